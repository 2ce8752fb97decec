"""Exact propagation of pure states: spectral, Krylov, and piecewise-constant drives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.special import jv

from .errors import (
    ConvergenceError,
    DimensionError,
    InvalidParameterError,
    NotHermitianError,
    SectorViolationError,
)
from .spin import (
    HERMITIAN_TOL,
    HamiltonianMatrix,
    SectorCache,
    build_drive_term,
    check_sz_conserving,
    sector_indices,
    site_mask,
    sz_table,
)

def _matrix(H) -> np.ndarray:
    return H.matrix if isinstance(H, HamiltonianMatrix) else np.asarray(H)


def as_state(psi, dim: int | None = None) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError("state must be a vector")
    if dim is not None and psi.shape[0] != dim:
        raise DimensionError(f"state has dimension {psi.shape[0]}, operator has {dim}")
    return psi


def plus_state(L: int) -> np.ndarray:
    """Product state |+>^L."""
    return np.full(2**L, 2 ** (-L / 2), dtype=complex)


def neel_state(L: int) -> np.ndarray:
    """|up down up down ...> in the package basis convention."""
    k = sum(site_mask(L, i) for i in range(1, L, 2))
    psi = np.zeros(2**L, dtype=complex)
    psi[k] = 1.0
    return psi


def basis_state(L: int, k: int) -> np.ndarray:
    psi = np.zeros(2**L, dtype=complex)
    psi[k] = 1.0
    return psi


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigendecompose(H) -> EigenSystem:
    M = _matrix(H)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("operator must be square")
    if np.max(np.abs(M - M.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise NotHermitianError("eigendecompose requires a Hermitian operator")
    w, V = np.linalg.eigh(M)
    return EigenSystem(w, V)


class SpectralPropagator:
    """exp(-i H t) via cached eigensystems.

    S^z-conserving operators are diagonalized block by block; anything else
    falls back to one dense eigendecomposition.
    """

    def __init__(self, H):
        M = _matrix(H)
        if np.max(np.abs(M - M.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise NotHermitianError("propagator requires a Hermitian operator")
        self.dim = M.shape[0]
        try:
            check_sz_conserving(M)
        except SectorViolationError:
            self.blocks = None
            self.full = eigendecompose(M)
        else:
            L = int(self.dim).bit_length() - 1
            self.blocks = []
            for s in sector_indices(L):
                idx = s.basis_states
                w, V = np.linalg.eigh(M[np.ix_(idx, idx)])
                self.blocks.append((idx, w, V))

    def apply(self, psi: np.ndarray, T: float) -> np.ndarray:
        """Evolve a vector, or the columns of a (dim, k) array, for time ``T``."""
        if psi.shape[0] != self.dim:
            raise DimensionError(f"state has dimension {psi.shape[0]}, operator has {self.dim}")
        if self.blocks is None:
            w, V = self.full.eigenvalues, self.full.eigenvectors
            ph = np.exp(-1j * w * T)
            if psi.ndim == 2:
                ph = ph[:, None]
            return V @ (ph * (V.conj().T @ psi))
        out = np.empty(psi.shape, dtype=complex)
        for idx, w, V in self.blocks:
            ph = np.exp(-1j * w * T)
            if psi.ndim == 2:
                ph = ph[:, None]
            out[idx] = V @ (ph * (V.T @ psi[idx]))
        return out


def evolve_spectral(state, H, T: float) -> np.ndarray:
    """V exp(-i Lambda T) V^dagger psi."""
    if T < 0:
        raise InvalidParameterError("evolution time must be non-negative")
    M = _matrix(H)
    psi = as_state(state, M.shape[0])
    return SpectralPropagator(M).apply(psi, T)


def evolve_krylov(
    state,
    H,
    T: float,
    tol: float = 1e-10,
    krylov_dim: int = 30,
    max_steps: int = 10_000,
) -> np.ndarray:
    """Lanczos propagation with adaptive sub-steps.

    Each sub-step is accepted when the a-posteriori Lanczos error estimate
    stays below its share of ``tol`` (proportional to the step length).
    """
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    if T < 0:
        raise InvalidParameterError("evolution time must be non-negative")
    M = _matrix(H)
    psi = as_state(state, M.shape[0]).copy()
    if T == 0:
        return psi
    m_max = min(krylov_dim, M.shape[0])
    t_done = 0.0
    dt = T
    steps = 0
    while t_done < T:
        steps += 1
        if steps > max_steps:
            raise ConvergenceError(f"Krylov propagation did not finish within {max_steps} steps")
        dt = min(dt, T - t_done)
        beta0 = np.linalg.norm(psi)
        Q = np.zeros((M.shape[0], m_max + 1), dtype=complex)
        alpha = np.zeros(m_max)
        beta = np.zeros(m_max)
        Q[:, 0] = psi / beta0
        m = m_max
        breakdown = False
        for j in range(m_max):
            w = M @ Q[:, j]
            alpha[j] = np.real(np.vdot(Q[:, j], w))
            w = w - alpha[j] * Q[:, j] - (beta[j - 1] * Q[:, j - 1] if j > 0 else 0)
            # full reorthogonalization keeps the small basis numerically orthogonal
            w -= Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-13 * max(1.0, abs(alpha[j])):
                m = j + 1
                breakdown = True
                break
            Q[:, j + 1] = w / beta[j]
        Tm = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
        while True:
            c = scipy.linalg.expm(-1j * dt * Tm)[:, 0]
            err = 0.0 if breakdown else beta0 * beta[m - 1] * abs(c[m - 1])
            if err <= tol * dt / T or dt < T * 1e-12:
                break
            dt *= 0.5
        if err > tol * dt / T:
            raise ConvergenceError("Krylov step size underflow")
        psi = beta0 * (Q[:, :m] @ c)
        t_done += dt
        # cautious growth after a successful step
        dt *= 1.5
    return psi


@dataclass(frozen=True)
class DriveSchedule:
    """Piecewise-constant transverse drives: ``intervals[k] = (amplitudes, duration)``."""

    intervals: tuple[tuple[np.ndarray, float], ...]

    def __post_init__(self):
        if not self.intervals:
            raise InvalidParameterError("drive schedule must have at least one interval")
        for _, tau in self.intervals:
            if not tau > 0:
                raise InvalidParameterError("interval durations must be positive")

    @property
    def total_duration(self) -> float:
        return float(sum(tau for _, tau in self.intervals))

    @classmethod
    def uniform(cls, drives: np.ndarray, T: float) -> DriveSchedule:
        """Equal-length intervals, one per row of ``drives``."""
        drives = np.asarray(drives, dtype=float)
        tau = T / len(drives)
        return cls(tuple((row, tau) for row in drives))


def evolve_piecewise(state, base, schedule: DriveSchedule) -> np.ndarray:
    """Apply exp(-i (base + sum_i d_i S^x_i) tau) interval by interval."""
    B = _matrix(base)
    psi = as_state(state, B.shape[0])
    L = int(B.shape[0]).bit_length() - 1
    for d, tau in schedule.intervals:
        d = np.asarray(d, dtype=float)
        if d.shape != (L,):
            raise DimensionError(f"drive vector must have length {L}")
        H = B + build_drive_term(d).matrix if np.any(d) else B
        psi = SpectralPropagator(H).apply(psi, tau)
    return psi


def sigma_z(psi: np.ndarray, site: int, L: int) -> np.ndarray:
    """sigma^z_site applied to a vector (or to the rows of a (dim, k) array)."""
    sign = 2.0 * sz_table(L)[:, site]
    return sign * psi if psi.ndim == 1 else sign[:, None] * psi


def zz_autocorrelator(psi0, site: int, evolve: Callable[[np.ndarray], np.ndarray]) -> float:
    """Re <psi0| U^dag sigma^z_i U sigma^z_i |psi0> for the unitary implemented by ``evolve``."""
    psi0 = as_state(psi0)
    L = int(psi0.shape[0]).bit_length() - 1
    if not 0 <= site < L:
        raise InvalidParameterError(f"site {site} outside chain of length {L}")
    phi = evolve(sigma_z(psi0, site, L))
    psi = evolve(psi0)
    # dividing by the norm makes the t = 0 value exactly 1
    return float(np.real(np.vdot(psi, sigma_z(phi, site, L))) / np.vdot(psi0, psi0).real)


class CorrelatorTracker:
    """Carries sigma^z_i |psi0> for every site through a sequence of unitaries.

    ``correlators(psi_t)`` gives all L autocorrelators at the current time
    from the state evolved by the same sequence.
    """

    def __init__(self, psi0: np.ndarray):
        self.L = int(len(psi0)).bit_length() - 1
        sign = 2.0 * sz_table(self.L)
        self.phis = sign * psi0[:, None]

    def advance(self, propagate: Callable[[np.ndarray], np.ndarray]) -> None:
        self.phis = propagate(self.phis)

    def correlators(self, psi_t: np.ndarray) -> np.ndarray:
        sign = 2.0 * sz_table(self.L)
        return np.real(np.einsum("k,ki->i", psi_t.conj(), sign * self.phis))


def batch_sector_evolve(
    cache: SectorCache, psi: np.ndarray, hs: np.ndarray, T: float
) -> np.ndarray:
    """Evolve one state under H_XXZ + fields for every row of ``hs``.

    Returns an (n, dim) array. Each row is computed from its own stacked
    eigendecomposition, so results do not depend on how rows are batched.
    """
    out = np.empty((len(hs), psi.shape[0]), dtype=complex)
    for k, s in enumerate(cache.sectors):
        idx = s.basis_states
        if len(idx) == 1:
            e = cache.base_blocks[k][0, 0] + hs @ cache.sz_blocks[k][0]
            out[:, idx[0]] = np.exp(-1j * e * T) * psi[idx[0]]
            continue
        w, V = np.linalg.eigh(cache.blocks_batch(k, hs))
        c = np.matmul(V.transpose(0, 2, 1), psi[idx][None, :, None])[..., 0]
        out[:, idx] = np.matmul(V, (np.exp(-1j * w * T) * c)[..., None])[..., 0]
    return out


def gershgorin_bounds(diag: np.ndarray, offdiag_rowsum: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral center and radius per row of a batch from Gershgorin discs."""
    hi = np.max(diag + offdiag_rowsum, axis=-1)
    lo = np.min(diag - offdiag_rowsum, axis=-1)
    return 0.5 * (hi + lo), 0.5 * (hi - lo) + 1e-12


def chebyshev_propagate(
    apply_H: Callable[[np.ndarray], np.ndarray],
    psi: np.ndarray,
    center: np.ndarray,
    radius: np.ndarray,
    t: float,
    tol: float = 1e-15,
) -> np.ndarray:
    """exp(-i H_c t) psi_c for a batch of operators given by ``apply_H``.

    ``psi`` is (n, dim); ``center``/``radius`` bound each spectrum. The series
    is cut when every remaining Bessel coefficient is below ``tol``.
    """
    x = radius * t
    kmax = int(np.ceil(x.max())) + 60
    coef = jv(np.arange(kmax + 1)[None, :], x[:, None])
    small = np.all(np.abs(coef) < tol, axis=0)
    small[: int(np.ceil(x.max())) + 1] = False
    K = int(np.argmax(small)) if small.any() else kmax
    coef = coef[:, :K] * (2.0 * (-1j) ** np.arange(K))[None, :]
    coef[:, 0] *= 0.5

    def scaled(v):
        return (apply_H(v) - center[:, None] * v) / radius[:, None]

    v_prev = psi
    acc = coef[:, :1] * v_prev
    if K > 1:
        v = scaled(psi)
        acc = acc + coef[:, 1:2] * v
        for k in range(2, K):
            v_prev, v = v, 2.0 * scaled(v) - v_prev
            acc = acc + coef[:, k : k + 1] * v
    return np.exp(-1j * center * t)[:, None] * acc
