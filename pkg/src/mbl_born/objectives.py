"""MMD loss with a Gaussian-mixture kernel, and classical fidelity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionError, InvalidParameterError

Metric = Literal["index", "hamming"]

DEFAULT_BANDWIDTHS = (0.1, 0.25, 4.0, 10.0)


@dataclass(frozen=True)
class KernelSpec:
    """Mixture of Gaussians; ``bandwidths`` are the squared widths sigma_i^2."""

    bandwidths: tuple[float, ...] = DEFAULT_BANDWIDTHS

    def __post_init__(self):
        object.__setattr__(self, "bandwidths", tuple(float(b) for b in self.bandwidths))
        if not self.bandwidths or any(not (b > 0 and np.isfinite(b)) for b in self.bandwidths):
            raise InvalidParameterError("kernel bandwidths must be positive and finite")

    @property
    def channels(self) -> int:
        return len(self.bandwidths)

    def __call__(self, dist2: np.ndarray) -> np.ndarray:
        """Kernel value for squared outcome distances."""
        dist2 = np.asarray(dist2, dtype=float)
        return sum(np.exp(-dist2 / (2.0 * s2)) for s2 in self.bandwidths) / self.channels


def outcome_distance2(x, y, metric: Metric = "index") -> np.ndarray:
    """Squared distance |x - y|^2 between integer outcomes (broadcasting)."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if metric == "index":
        return ((x - y) ** 2).astype(float)
    if metric == "hamming":
        diff = np.bitwise_xor(x, y)
        count = np.zeros(diff.shape, dtype=np.int64)
        while np.any(diff):
            count += diff & 1
            diff = diff >> 1
        return count.astype(float) ** 2
    raise InvalidParameterError(f"unknown outcome metric {metric!r}")


def gram_matrix(kernel: KernelSpec, n_outcomes: int, metric: Metric = "index") -> np.ndarray:
    if n_outcomes < 1:
        raise InvalidParameterError("need at least one outcome")
    x = np.arange(n_outcomes)
    K = kernel(outcome_distance2(x[:, None], x[None, :], metric))
    K.setflags(write=False)
    return K


def mmd_exact(p, q, K: np.ndarray) -> float:
    """(p - q)^T K (p - q)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.shape != (K.shape[0],):
        raise DimensionError(f"distributions of shape {p.shape}, {q.shape} vs Gram matrix {K.shape}")
    d = p - q
    return float(d @ K @ d)


def mmd_batch(P: np.ndarray, q: np.ndarray, K: np.ndarray) -> np.ndarray:
    """mmd_exact for every row of ``P`` against one target.

    Row results are independent of how many rows are passed in.
    """
    D = P - q
    return np.einsum("ni,ni->n", D @ K, D)


def mmd_sampled(samples_p, samples_q, kernel: KernelSpec, metric: Metric = "index") -> float:
    """Biased (V-statistic) MMD estimate from two outcome multisets."""
    x = np.asarray(samples_p).ravel()
    y = np.asarray(samples_q).ravel()
    if x.size == 0 or y.size == 0:
        raise InvalidParameterError("MMD estimate needs non-empty sample sets")
    # collapse to counts so the cost is in distinct outcomes, not samples
    ux, cx = np.unique(x, return_counts=True)
    uy, cy = np.unique(y, return_counts=True)
    wx = cx / x.size
    wy = cy / y.size

    def term(a, wa, b, wb):
        return wa @ kernel(outcome_distance2(a[:, None], b[None, :], metric)) @ wb

    return float(term(ux, wx, ux, wx) + term(uy, wy, uy, wy) - 2.0 * term(ux, wx, uy, wy))


def classical_fidelity(p, q) -> float:
    """(sum_i sqrt(p_i q_i))^2."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionError("fidelity needs distributions of equal length")
    return float(np.sum(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None))) ** 2)
