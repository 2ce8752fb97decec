"""Localization diagnostics: Hamming distance, entanglement entropy, level statistics."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .born import Partition, _split
from .dynamics import as_state, zz_autocorrelator
from .errors import InvalidParameterError
from .spin import ChainSpec, SectorCache, sample_fields
from .rng import stream

log = logging.getLogger(__name__)

DEGENERATE_GAP = 1e-12
ENTROPY_CLAMP = -1e-12


def hamming_from_correlators(correlators) -> float:
    """D = 1/2 - (1/2L) sum_i <sigma^z_i(t) sigma^z_i(0)>."""
    c = np.asarray(correlators, dtype=float)
    return float(0.5 - c.sum() / (2 * len(c)))


def hamming_distance(psi0, evolve: Callable[[np.ndarray], np.ndarray]) -> float:
    """Dynamical Hamming distance of ``psi0`` under the unitary implemented by ``evolve``."""
    psi0 = as_state(psi0)
    L = int(len(psi0)).bit_length() - 1
    return hamming_from_correlators([zz_autocorrelator(psi0, i, evolve) for i in range(L)])


def _check_cut(cut, L: int) -> tuple[int, ...]:
    cut = tuple(int(s) for s in cut)
    if len(set(cut)) != len(cut) or any(not 0 <= s < L for s in cut):
        raise InvalidParameterError(f"invalid cut {cut} for a {L}-site chain")
    return cut


def entropy_from_schmidt(s: np.ndarray) -> np.ndarray:
    """-sum lam ln lam over the last axis, lam = s^2."""
    lam = s**2
    lam = np.where(lam < 0, np.where(lam < ENTROPY_CLAMP, lam, 0.0), lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, -lam * np.log(lam), 0.0)
    return terms.sum(axis=-1)


def entanglement_entropy(state, cut: Sequence[int]) -> float:
    """Von Neumann entropy (natural log) of the reduced state on ``cut``."""
    psi = as_state(state)
    L = int(len(psi)).bit_length() - 1
    cut = _check_cut(cut, L)
    if not cut or len(cut) == L:
        return 0.0
    part = Partition(cut, tuple(s for s in range(L) if s not in cut))
    s = np.linalg.svd(_split(psi, part), compute_uv=False)
    return float(entropy_from_schmidt(s))


def half_chain_entropy(state) -> float:
    L = int(len(state)).bit_length() - 1
    return entanglement_entropy(state, range(L // 2))


@dataclass(frozen=True, eq=False)
class LevelStatistics:
    r_values: np.ndarray
    mean_r: float

    def histogram(self, bins: int = 20) -> tuple[np.ndarray, np.ndarray]:
        """Counts and edges over [0, 1]; counts sum to ``len(r_values)``."""
        return np.histogram(self.r_values, bins=bins, range=(0.0, 1.0))


def spacing_ratios(energies) -> np.ndarray:
    """min/max of consecutive level spacings of a spectrum."""
    e = np.sort(np.asarray(energies, dtype=float))
    gaps = np.diff(e)
    a, b = gaps[:-1], gaps[1:]
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    keep = hi >= DEGENERATE_GAP
    return lo[keep] / hi[keep]


def middle_slice(n: int, fraction: float) -> slice:
    """Central ``fraction`` of ``n`` sorted levels (at least one)."""
    k = max(1, int(round(n * fraction)))
    start = (n - k) // 2
    return slice(start, start + k)


def _largest_sector(cache: SectorCache) -> int:
    return int(np.argmax([s.dim for s in cache.sectors]))


def _seed_of(rng) -> int:
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(2**63))
    return int(rng)


def level_spacing_ratios(
    spec: ChainSpec,
    h_d: float,
    realizations: int,
    rng,
    *,
    fraction: float = 0.5,
    threads: int = 1,
) -> LevelStatistics:
    """Pooled spacing ratios from the largest S^z sector of disordered chains.

    ``rng`` is a seed or a Generator (from which one seed is drawn); realization
    ``r`` then uses its own stream, so results do not depend on ``threads``.
    """
    if realizations < 1:
        raise InvalidParameterError("need at least one disorder realization")
    if spec.L < 8:
        log.warning("level statistics at L=%d are dominated by finite-size effects", spec.L)
    seed = _seed_of(rng)
    cache = SectorCache(spec)
    k = _largest_sector(cache)

    def one(r: int) -> np.ndarray:
        h = sample_fields(h_d, spec.L, stream(seed, "levels", r))
        e = np.linalg.eigvalsh(cache.block(k, h))
        return spacing_ratios(e[middle_slice(len(e), fraction)])

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(one, range(realizations)))
    r = np.concatenate(parts)
    return LevelStatistics(r, float(r.mean()) if r.size else float("nan"))


def eigenstate_entropies(spec: ChainSpec, h, fraction: float = 0.1) -> np.ndarray:
    """Half-chain entropies of the central eigenstates of the largest sector."""
    cache = SectorCache(spec)
    k = _largest_sector(cache)
    idx = cache.sectors[k].basis_states
    w, V = np.linalg.eigh(cache.block(k, np.asarray(h, dtype=float)))
    sl = middle_slice(len(w), fraction)
    vecs = np.zeros((sl.stop - sl.start, spec.dim))
    vecs[:, idx] = V[:, sl].T
    half = spec.L // 2
    s = np.linalg.svd(vecs.reshape(-1, 2**half, 2 ** (spec.L - half)), compute_uv=False)
    return entropy_from_schmidt(s)


def entropy_scaling_sweep(
    Ls: Sequence[int],
    hs: Sequence[float],
    realizations: int,
    rng,
    *,
    fraction: float = 0.1,
    J_xy: float = 1.0,
    J_zz: float = 1.0,
    threads: int = 1,
) -> list[dict]:
    """Rows of (L, h, S_per_site, stderr): mid-spectrum half-chain entropy per site."""
    for L in Ls:
        if L % 2 or L < 6:
            raise InvalidParameterError(f"system sizes must be even and >= 6, got {L}")
    seed = _seed_of(rng)
    rows = []
    for L in Ls:
        spec = ChainSpec(L, J_xy, J_zz)
        for h in hs:

            def one(r: int) -> float:
                fields = sample_fields(h, L, stream(seed, "scaling", L, r))
                return float(eigenstate_entropies(spec, fields, fraction).mean())

            with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
                vals = np.array(list(pool.map(one, range(realizations))))
            stderr = vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0
            rows.append(
                {"L": L, "h": float(h), "S_per_site": vals.mean() / L, "stderr": stderr / L}
            )
    return rows
