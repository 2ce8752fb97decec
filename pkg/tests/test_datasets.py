import gzip
import io
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbl_born.datasets import (
    bottom_rows_mask,
    corrupt_pattern,
    digit_pattern,
    digit_patterns,
    downsample,
    encode_idx,
    half_plane_mask,
    load_mnist_idx,
    parity_dataset,
    parse_idx,
    quantum_target,
    random_corruption_mask,
    read_pattern_csv,
    superpose_patterns,
    toy_digit_pattern,
    write_idx,
    write_pattern_csv,
)
from mbl_born.errors import DegenerateCorruptionError, DimensionError, FormatError, InvalidParameterError


def write_pair(tmp_path, images, labels, gz=False):
    ip, lp = tmp_path / "img.idx", tmp_path / "lab.idx"
    for path, arr, magic in ((ip, images, 3), (lp, labels, 1)):
        data = encode_idx(np.asarray(arr, dtype=np.uint8))
        path.write_bytes(gzip.compress(data) if gz else data)
    return ip, lp


def test_idx_round_trip(tmp_path):
    ip, lp = write_pair(tmp_path, np.full((1, 28, 28), 7), [3])
    images, labels = load_mnist_idx(ip, lp)
    assert images.shape == (1, 28, 28) and np.all(images == 7)
    assert labels.tolist() == [3]
    ip, lp = write_pair(tmp_path, np.full((2, 28, 28), 9), [1, 2], gz=True)
    assert load_mnist_idx(ip, lp)[0].shape == (2, 28, 28)


def test_idx_header_bytes():
    data = encode_idx(np.zeros((2, 28, 28)))
    assert data[:4] == bytes([0, 0, 8, 3])
    assert int.from_bytes(data[4:8], "big") == 2


def test_idx_errors(tmp_path):
    ip, lp = write_pair(tmp_path, np.zeros((1, 28, 28)), [0])
    # swap the files: wrong magic number
    with pytest.raises(FormatError, match="magic") as exc:
        load_mnist_idx(lp, ip)
    assert exc.value.offset == 0
    data = encode_idx(np.zeros((2, 28, 28)))
    with pytest.raises(FormatError, match="truncated") as exc:
        parse_idx(data[:-5], 2051)
    assert exc.value.offset == len(data) - 5
    with pytest.raises(FormatError, match="truncated"):
        parse_idx(data[:10], 2051)
    with pytest.raises(FormatError, match="trailing"):
        parse_idx(data + b"\0", 2051)
    with pytest.raises(FormatError):
        parse_idx(b"\0\0", 2051)
    ip, lp = write_pair(tmp_path, np.zeros((2, 28, 28)), [0])
    with pytest.raises(FormatError, match="labels"):
        load_mnist_idx(ip, lp)


def pool_oracle(img):
    padded = np.zeros((32, 32))
    padded[2:30, 2:30] = img
    out = np.zeros((8, 8))
    for r, c in itertools.product(range(8), range(8)):
        out[r, c] = sum(padded[4 * r + i, 4 * c + j] for i in range(4) for j in range(4)) / 16
    return out


def test_toy_digit_examples(rng):
    const = np.full((1, 28, 28), 5.0)
    p = toy_digit_pattern(const)
    assert p.shape == (64,) and abs(p.sum() - 1) < 1e-12
    # padding makes the border blocks dimmer; the interior is uniform
    assert np.allclose(p.reshape(8, 8)[1:7, 1:7], p.reshape(8, 8)[3, 3])
    img = rng.integers(0, 256, (28, 28))
    assert np.allclose(toy_digit_pattern(np.repeat(img[None], 4, axis=0)), toy_digit_pattern(img[None]))
    two = rng.integers(0, 256, (2, 28, 28))
    ref = (pool_oracle(two[0]) + pool_oracle(two[1])) / 2
    assert np.allclose(toy_digit_pattern(two), (ref / ref.sum()).ravel(), atol=1e-15)
    perm = two[::-1]
    assert np.allclose(toy_digit_pattern(perm), toy_digit_pattern(two))
    with pytest.raises(InvalidParameterError):
        toy_digit_pattern(np.zeros((0, 28, 28)))
    with pytest.raises(InvalidParameterError):
        toy_digit_pattern(two, L_v=5)


def test_downsample_single_image():
    assert downsample(np.ones((28, 28)), 8).shape == (8, 8)


def test_bundled_digits():
    pats = digit_patterns()
    assert sorted(pats) == list(range(10))
    for p in pats.values():
        assert p.shape == (64,) and np.all(p >= 0) and abs(p.sum() - 1) < 1e-12
    # a zero is hollow in the middle, a one is bright there
    zero, one = digit_pattern(0).reshape(8, 8), digit_pattern(1).reshape(8, 8)
    assert zero[3:5, 3:5].mean() < one[3:5, 3:5].mean()
    assert zero[:, 1:3].sum() > one[:, 1:3].sum()


def test_pattern_csv_round_trip(tmp_path, rng):
    pats = {"a": rng.random(64), "b": rng.random(64)}
    write_pattern_csv(tmp_path / "p.csv", pats)
    back = read_pattern_csv(tmp_path / "p.csv")
    for k in pats:
        assert np.array_equal(back[k], pats[k])


def test_parity():
    assert np.allclose(parity_dataset(2), [0.5, 0, 0, 0.5])
    p3 = parity_dataset(3)
    assert set(np.flatnonzero(p3)) == {0b000, 0b011, 0b101, 0b110}
    assert np.allclose(p3[p3 > 0], 0.25)
    for L in range(1, 11):
        p = parity_dataset(L)
        assert np.count_nonzero(p) == 2 ** (L - 1)
        odd = [i for i in range(2**L) if bin(i).count("1") % 2]
        assert np.all(p[odd] == 0)
        assert abs(p.sum() - 1) < 1e-12
    with pytest.raises(InvalidParameterError):
        parity_dataset(0)


def test_quantum_target():
    a = quantum_target(4, 3.0, 10.0, np.random.default_rng(1))
    assert a.shape == (16,) and abs(a.sum() - 1) < 1e-12 and np.all(a >= 0)
    assert np.array_equal(a, quantum_target(4, 3.0, 10.0, np.random.default_rng(1)))
    z1 = quantum_target(4, 0.0, 2.0, np.random.default_rng(1))
    z2 = quantum_target(4, 0.0, 2.0, np.random.default_rng(99))
    assert np.array_equal(z1, z2)


def test_superpose(rng):
    p = rng.dirichlet(np.ones(8))
    assert np.allclose(superpose_patterns([p]), p)
    assert np.allclose(superpose_patterns([np.eye(4)[0], np.eye(4)[2]]), [0.5, 0, 0.5, 0])
    with pytest.raises(DimensionError):
        superpose_patterns([np.ones(4) / 4, np.ones(8) / 8])
    with pytest.raises(InvalidParameterError):
        superpose_patterns([])


@given(st.integers(0, 2**32), st.integers(1, 4))
def test_generators_normalized(seed, k):
    g = np.random.default_rng(seed)
    pats = [g.dirichlet(np.ones(64)) for _ in range(k)]
    s = superpose_patterns(pats)
    assert abs(s.sum() - 1) < 1e-12 and np.all(s >= 0)
    c = corrupt_pattern(digit_pattern(int(g.integers(10))), random_corruption_mask(g))
    assert abs(c.sum() - 1) < 1e-12 and np.all(c >= 0)


def test_corruption():
    p = digit_pattern(0)
    assert np.array_equal(corrupt_pattern(p, []), p / p.sum())
    with pytest.raises(DegenerateCorruptionError):
        corrupt_pattern(p, range(64))
    c = corrupt_pattern(p, bottom_rows_mask())
    assert abs(c.sum() - 1) < 1e-12 and np.all(c[32:] == 0)
    with pytest.raises(DimensionError):
        corrupt_pattern(p, [64])


def test_masks():
    assert sorted(bottom_rows_mask(8, 4)) == list(range(32, 64))
    assert sorted(half_plane_mask(8, "left", 2)) == sorted([r * 8 + c for r in range(8) for c in range(2)])
    with pytest.raises(InvalidParameterError):
        half_plane_mask(8, "diagonal", 2)
    m = random_corruption_mask(np.random.default_rng(0))
    assert 16 <= len(m) <= 32
