import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from conftest import SX, random_state, site_op, SZ
from mbl_born.dynamics import (
    CorrelatorTracker,
    DriveSchedule,
    batch_sector_evolve,
    basis_state,
    chebyshev_propagate,
    eigendecompose,
    evolve_krylov,
    evolve_piecewise,
    evolve_spectral,
    gershgorin_bounds,
    neel_state,
    plus_state,
    zz_autocorrelator,
)
from mbl_born.errors import ConvergenceError, DimensionError, InvalidParameterError, NotHermitianError
from mbl_born.spin import ChainSpec, SectorCache, build_drive_term, build_xxz, total_hamiltonian


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def test_eigendecompose_examples(rng):
    es = eigendecompose(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(es.eigenvalues, [-1, 2, 3])
    assert np.allclose(eigendecompose(SX).eigenvalues, [-0.5, 0.5])
    H = random_hermitian(rng, 256)
    es = eigendecompose(H)
    V, w = es.eigenvectors, es.eigenvalues
    assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - H)) < 1e-8
    assert np.max(np.abs(V.conj().T @ V - np.eye(256))) < 1e-8
    assert np.all(np.diff(w) >= 0)


def test_eigendecompose_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_spectral_examples(rng):
    H = total_hamiltonian(ChainSpec(4), rng.normal(size=4))
    psi = random_state(rng, 16)
    assert np.allclose(evolve_spectral(psi, H, 0.0), psi)
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    out = evolve_spectral(plus, SZ, np.pi)
    assert abs(abs(np.vdot(minus, out)) - 1) < 1e-12
    with pytest.raises(DimensionError):
        evolve_spectral(np.ones(8) / np.sqrt(8), H, 1.0)


def test_spectral_matches_expm(rng):
    H = total_hamiltonian(ChainSpec(5, 0.7, 1.3, "periodic"), rng.uniform(-4, 4, 5)).matrix
    psi = random_state(rng, 32)
    ref = scipy.linalg.expm(-1j * 2.3 * H) @ psi
    assert np.linalg.norm(evolve_spectral(psi, H, 2.3) - ref) < 1e-10


hams = st.builds(
    lambda L, seed, T1, T2: (L, np.random.default_rng(seed), T1, T2),
    st.integers(2, 6),
    st.integers(0, 2**32),
    st.floats(0, 10),
    st.floats(0, 10),
)


@given(hams)
def test_unitarity_and_composition(case):
    L, g, T1, T2 = case
    H = total_hamiltonian(ChainSpec(L, *g.normal(size=2)), g.uniform(-8, 8, L))
    psi = random_state(g, 2**L)
    a = evolve_spectral(psi, H, T1 + T2)
    b = evolve_spectral(evolve_spectral(psi, H, T1), H, T2)
    assert abs(np.linalg.norm(a) - 1) < 1e-10
    assert np.linalg.norm(a - b) < 1e-9
    # energy is conserved within one quench
    E0 = np.vdot(psi, H.matrix @ psi).real
    assert abs(np.vdot(a, H.matrix @ a).real - E0) < 1e-9


@given(st.integers(2, 7), st.integers(0, 2**32), st.floats(0, 20))
def test_sector_confinement(L, seed, T):
    g = np.random.default_rng(seed)
    H = total_hamiltonian(ChainSpec(L, *g.normal(size=2)), g.uniform(-8, 8, L))
    k = int(g.integers(2**L))
    out = evolve_spectral(basis_state(L, k), H, T)
    n_up = L - bin(k).count("1")
    outside = [j for j in range(2**L) if L - bin(j).count("1") != n_up]
    assert np.max(np.abs(out[outside]), initial=0.0) <= 1e-10


def test_krylov_matches_spectral(rng):
    H = total_hamiltonian(ChainSpec(6), rng.uniform(-8, 8, 6))
    psi = random_state(rng, 64)
    ref = evolve_spectral(psi, H, 10.0)
    assert np.linalg.norm(evolve_krylov(psi, H, 10.0, tol=1e-8) - ref) < 1e-8
    assert np.array_equal(evolve_krylov(psi, H, 0.0), psi)
    D = np.diag(rng.normal(size=8))
    psi = random_state(rng, 8)
    assert np.linalg.norm(evolve_krylov(psi, D, 3.0) - np.exp(-3j * np.diag(D)) * psi) < 1e-10


@pytest.mark.parametrize("L", [8, 10])
def test_krylov_agreement_larger(L, rng):
    H = total_hamiltonian(ChainSpec(L, boundary="periodic"), rng.uniform(-3, 3, L))
    psi = random_state(rng, 2**L)
    ref = evolve_spectral(psi, H, 5.0)
    assert np.linalg.norm(evolve_krylov(psi, H, 5.0, tol=1e-9) - ref) < 1e-9


def test_krylov_nonconvergence(rng):
    H = total_hamiltonian(ChainSpec(6), rng.uniform(-8, 8, 6))
    with pytest.raises(ConvergenceError):
        evolve_krylov(random_state(rng, 64), H, 50.0, tol=1e-8, krylov_dim=4, max_steps=3)
    with pytest.raises(InvalidParameterError):
        evolve_krylov(random_state(rng, 64), H, 1.0, tol=0.0)


def test_piecewise_examples(rng):
    base = total_hamiltonian(ChainSpec(4), rng.uniform(-3, 3, 4))
    psi = random_state(rng, 16)
    single = DriveSchedule(((np.zeros(4), 2.5),))
    assert np.linalg.norm(evolve_piecewise(psi, base, single) - evolve_spectral(psi, base, 2.5)) < 1e-12
    many = DriveSchedule.uniform(np.zeros((50, 4)), 10.0)
    assert many.total_duration == pytest.approx(10.0)
    assert np.linalg.norm(evolve_piecewise(psi, base, many) - evolve_spectral(psi, base, 10.0)) < 1e-9
    driven = DriveSchedule.uniform(rng.normal(0, 1.4, (50, 4)), 10.0)
    out = evolve_piecewise(psi, base, driven)
    assert abs(np.linalg.norm(out) - 1) < 1e-10
    # dense reference for the drive term
    ref = psi
    for d, tau in driven.intervals:
        H = base.matrix + sum(di * site_op(SX, i, 4) for i, di in enumerate(d))
        ref = scipy.linalg.expm(-1j * tau * H) @ ref
    assert np.linalg.norm(out - ref) < 1e-9


def test_piecewise_errors(rng):
    base = build_xxz(ChainSpec(3))
    with pytest.raises(InvalidParameterError):
        DriveSchedule(())
    with pytest.raises(InvalidParameterError):
        DriveSchedule(((np.zeros(3), 0.0),))
    with pytest.raises(DimensionError):
        evolve_piecewise(plus_state(3), base, DriveSchedule(((np.zeros(2), 1.0),)))


def test_zz_autocorrelator(rng):
    L = 4
    H = total_hamiltonian(ChainSpec(L), rng.uniform(-2, 2, L)).matrix
    psi0 = random_state(rng, 2**L)
    assert zz_autocorrelator(psi0, 1, lambda v: v) == pytest.approx(1.0, abs=1e-15)
    U = scipy.linalg.expm(-1j * 3.0 * H)
    for i in range(L):
        Z = 2 * site_op(SZ, i, L)
        ref = np.vdot(psi0, U.conj().T @ Z @ U @ Z @ psi0).real
        val = zz_autocorrelator(psi0, i, lambda v: evolve_spectral(v, H, 3.0))
        assert val == pytest.approx(ref, abs=1e-10)
        assert abs(val) <= 1 + 1e-10
    with pytest.raises(InvalidParameterError):
        zz_autocorrelator(psi0, L, lambda v: v)


def test_correlator_tracker_matches_direct(rng):
    L = 5
    psi0 = plus_state(L)
    Hs = [total_hamiltonian(ChainSpec(L), rng.uniform(-4, 4, L)).matrix for _ in range(3)]

    def evolve(v):
        for H in Hs:
            v = evolve_spectral(v, H, 1.7)
        return v

    tr = CorrelatorTracker(psi0)
    psi = psi0
    for H in Hs:
        tr.advance(lambda v, H=H: np.stack([evolve_spectral(c, H, 1.7) for c in v.T], axis=1))
        psi = evolve_spectral(psi, H, 1.7)
    direct = [zz_autocorrelator(psi0, i, evolve) for i in range(L)]
    assert np.allclose(tr.correlators(psi), direct, atol=1e-12)


def test_neel_state():
    psi = neel_state(4)
    assert psi[0b0101] == 1 and np.count_nonzero(psi) == 1


def test_batch_sector_evolve_matches_dense(rng):
    spec = ChainSpec(6, 1.0, 0.8, "periodic")
    cache = SectorCache(spec)
    psi = random_state(rng, 64)
    hs = rng.uniform(-8, 8, (5, 6))
    out = batch_sector_evolve(cache, psi, hs, 4.0)
    for h, row in zip(hs, out):
        assert np.linalg.norm(row - evolve_spectral(psi, total_hamiltonian(spec, h), 4.0)) < 1e-10
    # rows do not depend on batch composition
    assert np.array_equal(batch_sector_evolve(cache, psi, hs[2:3], 4.0)[0], out[2])


def test_chebyshev_matches_spectral(rng):
    L = 5
    base = build_xxz(ChainSpec(L)).matrix
    Hs = [base + np.diag(rng.uniform(-3, 3, 32)) + build_drive_term(rng.normal(size=L)).matrix for _ in range(3)]
    Hs = np.array(Hs)
    psi = np.array([random_state(rng, 32) for _ in range(3)])
    diag = np.real(np.einsum("nii->ni", Hs))
    off = np.abs(Hs).sum(axis=2) - np.abs(diag)
    c, r = gershgorin_bounds(diag, off)
    out = chebyshev_propagate(lambda v: np.einsum("nij,nj->ni", Hs, v), psi, c, r, 0.7)
    for H, p, o in zip(Hs, psi, out):
        assert np.linalg.norm(o - evolve_spectral(p, H, 0.7)) < 1e-12
