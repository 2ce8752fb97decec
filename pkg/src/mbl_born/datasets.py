"""Target distributions: toy MNIST digit patterns, parity data, quantum-state targets.

Patterns are flat, non-negative, normalized vectors of length 2^L_v. Images are
read row-major, so an 8x8 image maps onto the six visible sites with the first
three sites selecting the row.
"""

from __future__ import annotations

import csv
import gzip
import io
import struct
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .born import born_distribution
from .dynamics import evolve_spectral, plus_state
from .errors import DegenerateCorruptionError, DimensionError, FormatError, InvalidParameterError
from .spin import ChainSpec, sample_fields, total_hamiltonian

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
MNIST_SIDE = 28
PADDED_SIDE = 32

BUNDLED_DIGITS = "toy_digits_8x8.csv"


# --- IDX ingestion -----------------------------------------------------------


def _open(path) -> bytes:
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def parse_idx(data: bytes, expected_magic: int | None = None) -> np.ndarray:
    """Decode an unsigned-byte IDX blob (big-endian header) into an array."""
    if len(data) < 4:
        raise FormatError("file too short for an IDX header", offset=len(data))
    (magic,) = struct.unpack(">I", data[:4])
    if expected_magic is not None and magic != expected_magic:
        raise FormatError(f"bad magic number {magic}, expected {expected_magic}", offset=0)
    if magic >> 8 != 0x08:
        raise FormatError(f"unsupported IDX element type 0x{(magic >> 8) & 0xFF:02x}", offset=2)
    ndim = magic & 0xFF
    header_end = 4 + 4 * ndim
    if len(data) < header_end:
        raise FormatError("truncated IDX dimension header", offset=len(data))
    dims = struct.unpack(f">{ndim}I", data[4:header_end])
    count = int(np.prod(dims)) if dims else 1
    if len(data) < header_end + count:
        raise FormatError(
            f"truncated IDX payload: need {count} bytes, have {len(data) - header_end}",
            offset=len(data),
        )
    if len(data) > header_end + count:
        raise FormatError("trailing bytes after IDX payload", offset=header_end + count)
    return np.frombuffer(data, dtype=np.uint8, count=count, offset=header_end).reshape(dims)


def encode_idx(array: np.ndarray) -> bytes:
    array = np.ascontiguousarray(array, dtype=np.uint8)
    head = struct.pack(">I", 0x0800 | array.ndim) + struct.pack(f">{array.ndim}I", *array.shape)
    return head + array.tobytes()


def write_idx(path, array: np.ndarray) -> None:
    Path(path).write_bytes(encode_idx(array))


def load_mnist_idx(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Read an MNIST image/label file pair (plain or gzipped)."""
    images = parse_idx(_open(images_path), IMAGE_MAGIC)
    if images.ndim != 3 or images.shape[1:] != (MNIST_SIDE, MNIST_SIDE):
        raise FormatError(f"expected n x 28 x 28 images, got shape {images.shape}", offset=4)
    labels = parse_idx(_open(labels_path), LABEL_MAGIC)
    if labels.ndim != 1:
        raise FormatError("label file must be one-dimensional", offset=4)
    if len(labels) != len(images):
        raise FormatError(
            f"{len(labels)} labels for {len(images)} images", offset=4
        )
    return images, labels


# --- toy digit patterns ------------------------------------------------------


def side_length(L_v: int) -> int:
    if L_v % 2:
        raise InvalidParameterError(f"image patterns need an even number of visible sites, got {L_v}")
    side = 2 ** (L_v // 2)
    if side > PADDED_SIDE:
        raise InvalidParameterError(f"cannot pool a {PADDED_SIDE}-pixel image to {side} pixels")
    return side


def downsample(images: np.ndarray, side: int) -> np.ndarray:
    """Zero-pad 28x28 to 32x32, then mean-pool to side x side."""
    images = np.asarray(images, dtype=float)
    single = images.ndim == 2
    if single:
        images = images[None]
    pad = (PADDED_SIDE - images.shape[-1]) // 2
    padded = np.zeros(images.shape[:-2] + (PADDED_SIDE, PADDED_SIDE))
    padded[..., pad : pad + images.shape[-2], pad : pad + images.shape[-1]] = images
    f = PADDED_SIDE // side
    pooled = padded.reshape(-1, side, f, side, f).mean(axis=(2, 4))
    return pooled[0] if single else pooled


def toy_digit_pattern(images: np.ndarray, L_v: int = 6) -> np.ndarray:
    """Class-averaged, downsampled, normalized image flattened row-major."""
    images = np.asarray(images)
    if images.ndim != 3 or len(images) == 0:
        raise InvalidParameterError("need a non-empty stack of images")
    mean = downsample(images, side_length(L_v)).mean(axis=0).ravel()
    total = mean.sum()
    if total <= 0:
        raise InvalidParameterError("class images are all blank")
    return mean / total


def read_pattern_csv(source) -> dict[str, np.ndarray]:
    """``label,v0,v1,...`` per line -> {label: pattern}."""
    text = source.read() if hasattr(source, "read") else Path(source).read_text()
    out = {}
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        out[row[0]] = np.array([float(x) for x in row[1:]])
    return out


def write_pattern_csv(path, patterns: dict[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for label, p in patterns.items():
            w.writerow([label] + [f"{x:.17g}" for x in p])


def digit_patterns() -> dict[int, np.ndarray]:
    """The bundled 8x8 class-averaged MNIST digits (L_v = 6)."""
    ref = resources.files("mbl_born") / "data" / BUNDLED_DIGITS
    with ref.open("r") as fh:
        raw = read_pattern_csv(fh)
    return {int(k): v / v.sum() for k, v in raw.items()}


def digit_pattern(digit: int) -> np.ndarray:
    return digit_patterns()[int(digit)]


# --- other targets -----------------------------------------------------------


def parity_dataset(L_v: int) -> np.ndarray:
    """Uniform over the even-parity bitstrings of length L_v."""
    if L_v < 1:
        raise InvalidParameterError("need at least one bit")
    idx = np.arange(2**L_v)
    ones = np.array([bin(i).count("1") for i in idx])
    p = (ones % 2 == 0).astype(float)
    return p / p.sum()


def quantum_target(
    L_v: int,
    h_d: float,
    T: float,
    rng: np.random.Generator,
    *,
    J_xy: float = 1.0,
    J_zz: float = 1.0,
) -> np.ndarray:
    """Born distribution of |+>^L_v after one disorder quench of strength h_d."""
    spec = ChainSpec(L_v, J_xy, J_zz)
    h = sample_fields(h_d, L_v, rng)
    psi = evolve_spectral(plus_state(L_v), total_hamiltonian(spec, h), T)
    return born_distribution(psi)


def superpose_patterns(patterns: Sequence[np.ndarray]) -> np.ndarray:
    """Entrywise sum, renormalized."""
    if not len(patterns):
        raise InvalidParameterError("need at least one pattern")
    arrs = [np.asarray(p, dtype=float) for p in patterns]
    if len({a.shape for a in arrs}) != 1:
        raise DimensionError("patterns must have equal lengths")
    total = np.sum(arrs, axis=0)
    return total / total.sum()


def corrupt_pattern(xi, mask: Iterable[int]) -> np.ndarray:
    """Zero the masked pixels and renormalize the remainder."""
    out = np.array(xi, dtype=float)
    idx = np.fromiter((int(i) for i in mask), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= out.size):
        raise DimensionError("mask index outside the pattern")
    out[idx] = 0.0
    total = out.sum()
    if not total > 0:
        raise DegenerateCorruptionError("mask removes all of the pattern's mass")
    return out / total


def row_mask(side: int, rows: Iterable[int]) -> np.ndarray:
    rows = list(rows)
    return (np.asarray(rows)[:, None] * side + np.arange(side)[None, :]).ravel()


def bottom_rows_mask(side: int = 8, rows: int = 4) -> np.ndarray:
    return row_mask(side, range(side - rows, side))


def half_plane_mask(side: int, edge: str, depth: int) -> np.ndarray:
    """Pixels within ``depth`` rows/columns of the named image edge."""
    grid = np.arange(side * side).reshape(side, side)
    if edge == "top":
        return grid[:depth].ravel()
    if edge == "bottom":
        return grid[side - depth :].ravel()
    if edge == "left":
        return grid[:, :depth].ravel()
    if edge == "right":
        return grid[:, side - depth :].ravel()
    raise InvalidParameterError(f"unknown edge {edge!r}")


def random_corruption_mask(rng: np.random.Generator, side: int = 8) -> np.ndarray:
    """A random half-plane mask covering 2 to side//2 rows or columns."""
    edge = ("top", "bottom", "left", "right")[rng.integers(4)]
    depth = int(rng.integers(2, side // 2 + 1))
    return half_plane_mask(side, edge, depth)
