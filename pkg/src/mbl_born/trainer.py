"""Greedy Monte Carlo training over sequences of disorder quenches.

At every quench ``N`` candidate field vectors are drawn, the current state is
evolved under each resulting Hamiltonian for time ``T``, and the candidate
whose visible distribution has the lowest MMD to the target is kept. One code
path covers the basic machine (no hidden sites), the hidden machine, and the
randomly driven machine (extra Gaussian transverse drives, piecewise constant).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .born import Partition, visible_probabilities
from .diagnostics import half_chain_entropy, hamming_from_correlators
from .dynamics import (
    CorrelatorTracker,
    SpectralPropagator,
    batch_sector_evolve,
    chebyshev_propagate,
    gershgorin_bounds,
    neel_state,
    plus_state,
)
from .errors import DimensionError, InvalidParameterError, NumericalError
from .objectives import KernelSpec, Metric, gram_matrix, mmd_batch
from .rng import per_candidate_rng
from .spin import ChainSpec, SectorCache, build_drive_term, build_xxz, site_mask, sz_table

log = logging.getLogger(__name__)

Variant = Literal["basic", "hidden", "rdbm"]


@dataclass(frozen=True)
class DriveConfig:
    """Random transverse drive of the driven variant.

    ``noise="literal"`` draws amplitudes with standard deviation sqrt(2D);
    ``noise="white"`` uses sqrt(2D/tau), the discretized white-noise scaling.
    """

    D: float = 1e-3
    intervals: int = 50
    noise: Literal["literal", "white"] = "literal"

    def __post_init__(self):
        if not self.D >= 0:
            raise InvalidParameterError("drive amplitude D must be >= 0")
        if self.intervals < 1:
            raise InvalidParameterError("need at least one drive interval")
        if self.noise not in ("literal", "white"):
            raise InvalidParameterError(f"unknown noise model {self.noise!r}")

    def std(self, T: float) -> float:
        if self.noise == "white":
            return float(np.sqrt(2 * self.D * self.intervals / T))
        return float(np.sqrt(2 * self.D))


@dataclass(frozen=True)
class TrainConfig:
    chain: ChainSpec
    partition: Partition
    M: int = 100
    N: int = 500
    h_d: float = 8.0
    T: float = 10.0
    initial_state: str | np.ndarray = "plus"
    kernel: KernelSpec = field(default_factory=KernelSpec)
    metric: Metric = "index"
    seed: int = 0
    variant: Variant = "hidden"
    drive: DriveConfig | None = None
    chunk_size: int = 25
    track_diagnostics: bool = True

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise InvalidParameterError("M and N must be >= 1")
        if not self.h_d >= 0:
            raise InvalidParameterError("h_d must be >= 0")
        if not self.T >= 0:
            raise InvalidParameterError("quench time T must be >= 0")
        if self.partition.L != self.chain.L:
            raise DimensionError("partition and chain disagree on the number of sites")
        if self.variant not in ("basic", "hidden", "rdbm"):
            raise InvalidParameterError(f"unknown variant {self.variant!r}")
        if self.variant == "basic" and self.partition.L_h:
            raise InvalidParameterError("the basic machine has no hidden units")
        if self.variant == "rdbm" and self.drive is None:
            object.__setattr__(self, "drive", DriveConfig())
        if self.chunk_size < 1:
            raise InvalidParameterError("chunk_size must be >= 1")

    @classmethod
    def default(cls, L_v: int = 6, L_h: int = 2, **kw) -> TrainConfig:
        """Chain of L_v + L_h sites with the hidden units at both ends."""
        kw.setdefault("variant", "hidden" if L_h else "basic")
        return cls(chain=ChainSpec(L_v + L_h), partition=Partition.ends(L_v, L_h), **kw)

    @property
    def driven(self) -> bool:
        return self.variant == "rdbm"

    def initial_vector(self) -> np.ndarray:
        L = self.chain.L
        if isinstance(self.initial_state, str):
            if self.initial_state == "plus":
                return plus_state(L)
            if self.initial_state == "neel":
                return neel_state(L)
            raise InvalidParameterError(f"unknown initial state {self.initial_state!r}")
        psi = np.asarray(self.initial_state, dtype=complex)
        if psi.shape != (2**L,):
            raise DimensionError("custom initial state has the wrong dimension")
        return psi / np.linalg.norm(psi)


@dataclass(eq=False)
class QuenchRecord:
    m: int
    theta: np.ndarray
    loss: float
    entropy: float
    hamming: float
    candidate_losses: np.ndarray
    drives: np.ndarray | None = None
    candidate: int = 0


@dataclass(eq=False)
class TrainingTrace:
    config: TrainConfig
    records: list[QuenchRecord]
    intermediate_distributions: np.ndarray
    initial_state: np.ndarray
    final_state: np.ndarray
    final_distribution: np.ndarray
    propagation_steps: int

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    @property
    def thetas(self) -> np.ndarray:
        return np.array([r.theta for r in self.records])

    @property
    def hammings(self) -> np.ndarray:
        return np.array([r.hamming for r in self.records])

    @property
    def entropies(self) -> np.ndarray:
        return np.array([r.entropy for r in self.records])


class QuenchEngine:
    """Propagation for one chain configuration, shared across quenches."""

    def __init__(self, config: TrainConfig):
        self.config = config
        self.cache = SectorCache(config.chain)
        self.L = config.chain.L
        self.base = build_xxz(config.chain).matrix
        if config.driven:
            self.sx = np.stack([build_drive_term(np.eye(self.L)[i]).matrix for i in range(self.L)])
            self.sz = sz_table(self.L)

    def draw(self, m: int, n: int) -> tuple[np.ndarray, np.ndarray | None]:
        """Fields (and drives) of candidate ``n`` at quench ``m``."""
        cfg = self.config
        g = per_candidate_rng(cfg.seed, m, n)
        h = g.uniform(-cfg.h_d, cfg.h_d, size=self.L)
        if not cfg.driven:
            return h, None
        d = g.normal(0.0, cfg.drive.std(cfg.T), size=(cfg.drive.intervals, self.L))
        return h, d

    def evolve_candidates(self, psi, hs, ds=None) -> np.ndarray:
        cfg = self.config
        if not cfg.driven:
            return batch_sector_evolve(self.cache, psi, hs, cfg.T)
        tau = cfg.T / cfg.drive.intervals
        base = self.base
        static = hs @ self.sz.T + np.diag(base)[None, :]
        off_rows = np.abs(base).sum(axis=1) - np.abs(np.diag(base))
        flips = [np.arange(base.shape[0]) ^ site_mask(self.L, i) for i in range(self.L)]
        base_off = base - np.diag(np.diag(base))
        out = psi[None].repeat(len(hs), axis=0)
        for k in range(cfg.drive.intervals):
            half = 0.5 * ds[:, k]

            def apply_H(v, half=half):
                hv = v @ base_off + static * v
                for i, f in enumerate(flips):
                    hv += half[:, i : i + 1] * v[:, f]
                return hv

            center, radius = gershgorin_bounds(
                static, off_rows[None, :] + np.abs(half).sum(axis=1)[:, None]
            )
            out = chebyshev_propagate(apply_H, out, center, radius, tau)
        return out

    def propagate(self, vecs: np.ndarray, h: np.ndarray, d: np.ndarray | None = None) -> np.ndarray:
        """Apply one chosen quench unitary to a vector or to the columns of an array."""
        cfg = self.config
        H = self.base.copy()
        H[np.diag_indices_from(H)] += sz_table(self.L) @ h
        if d is None:
            return SpectralPropagator(H).apply(vecs, cfg.T)
        tau = cfg.T / len(d)
        for row in d:
            vecs = SpectralPropagator(H + np.einsum("i,ijk->jk", row, self.sx)).apply(vecs, tau)
        return vecs

    @property
    def steps_per_candidate(self) -> int:
        return self.config.drive.intervals if self.config.driven else 1


def _check_target(target, L_v: int) -> np.ndarray:
    q = np.asarray(target, dtype=float)
    if q.shape != (2**L_v,):
        raise DimensionError(f"target has length {q.shape}, expected {2**L_v}")
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-8:
        raise InvalidParameterError("target must be a normalized, non-negative distribution")
    return q


def train(config: TrainConfig, target, *, threads: int = 1) -> TrainingTrace:
    """Run the quench search; the result is bitwise independent of ``threads``."""
    q = _check_target(target, config.partition.L_v)
    K = gram_matrix(config.kernel, len(q), config.metric)
    engine = QuenchEngine(config)
    part = config.partition
    psi0 = config.initial_vector()
    psi = psi0
    tracker = CorrelatorTracker(psi0) if config.track_diagnostics else None
    dists = [visible_probabilities(psi0, part)]
    records: list[QuenchRecord] = []
    chunks = [
        range(lo, min(lo + config.chunk_size, config.N))
        for lo in range(0, config.N, config.chunk_size)
    ]

    def evaluate(m: int, psi: np.ndarray, ns: range):
        draws = [engine.draw(m, n) for n in ns]
        hs = np.array([h for h, _ in draws])
        ds = np.array([d for _, d in draws]) if config.driven else None
        states = engine.evolve_candidates(psi, hs, ds)
        P = visible_probabilities(states, part)
        return states, mmd_batch(P, q, K), hs, ds

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for m in range(config.M):
            if pool is None:
                results = [evaluate(m, psi, ns) for ns in chunks]
            else:
                results = list(pool.map(lambda ns: evaluate(m, psi, ns), chunks))
            losses = np.concatenate([r[1] for r in results])
            if not np.all(np.isfinite(losses)):
                bad = int(np.flatnonzero(~np.isfinite(losses))[0])
                raise NumericalError(f"non-finite loss at quench {m}, candidate {bad}")
            best = int(np.argmin(losses))  # first minimum: lowest candidate index wins ties
            ci, off = divmod(best, config.chunk_size)
            states, _, hs, ds = results[ci]
            psi = states[off]
            theta = hs[off]
            drives = ds[off] if ds is not None else None
            entropy = hamming = float("nan")
            if tracker is not None:
                tracker.advance(lambda v: engine.propagate(v, theta, drives))
                hamming = hamming_from_correlators(tracker.correlators(psi))
                entropy = half_chain_entropy(psi)
            records.append(
                QuenchRecord(m, theta, float(losses[best]), entropy, hamming, losses, drives, best)
            )
            dists.append(visible_probabilities(psi, part))
            log.debug("quench %d: loss %.6g (candidate %d)", m, losses[best], best)
    finally:
        if pool is not None:
            pool.shutdown()

    return TrainingTrace(
        config=config,
        records=records,
        intermediate_distributions=np.array(dists),
        initial_state=psi0,
        final_state=psi,
        final_distribution=dists[-1],
        propagation_steps=config.M * config.N * engine.steps_per_candidate,
    )


def train_rdbm(config: TrainConfig, target, *, threads: int = 1) -> TrainingTrace:
    if config.variant != "rdbm":
        raise InvalidParameterError("train_rdbm needs variant='rdbm'")
    return train(config, target, threads=threads)
