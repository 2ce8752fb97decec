"""Pattern retrieval by replaying learned quenches from the closest checkpoint."""

from __future__ import annotations

import numpy as np

from .born import Partition, embed_pattern, visible_probabilities
from .errors import InvalidParameterError
from .objectives import gram_matrix, mmd_batch
from .trainer import QuenchEngine, TrainingTrace


def find_closest_quench(trace: TrainingTrace, corrupted, K: np.ndarray | None = None) -> int:
    """Checkpoint m in 0..M whose distribution has the smallest MMD to ``corrupted``."""
    dists = np.asarray(trace.intermediate_distributions)
    if dists.ndim != 2 or len(dists) == 0:
        raise InvalidParameterError("trace has no stored intermediate distributions")
    if K is None:
        K = gram_matrix(trace.config.kernel, dists.shape[1], trace.config.metric)
    losses = mmd_batch(dists, np.asarray(corrupted, dtype=float), K)
    return int(np.argmin(losses))


def hidden_factor(psi: np.ndarray, part: Partition) -> np.ndarray:
    """Hidden-site factor of a visible/hidden product state (up to a global phase)."""
    if part.L_h == 0:
        return np.ones(1, dtype=complex)
    from .born import _split

    A = _split(np.asarray(psi, dtype=complex), part)
    u, s, vh = np.linalg.svd(A)
    if len(s) > 1 and s[1] > 1e-8:
        raise InvalidParameterError("initial state is entangled between visible and hidden sites")
    return vh[0]


def replay(trace: TrainingTrace, state: np.ndarray, start: int) -> np.ndarray:
    """Apply the learned quenches start+1 .. M (1-based) to ``state``."""
    engine = QuenchEngine(trace.config)
    for rec in trace.records[start:]:
        state = engine.propagate(state, rec.theta, rec.drives)
    return state


def retrieve(
    trace: TrainingTrace,
    corrupted,
    hidden_init=None,
    K: np.ndarray | None = None,
) -> np.ndarray:
    """Embed ``corrupted``, evolve it from the closest checkpoint to the end, read out."""
    part = trace.config.partition
    if hidden_init is None:
        hidden_init = hidden_factor(trace.initial_state, part)
    m_star = find_closest_quench(trace, corrupted, K)
    psi = embed_pattern(np.asarray(corrupted, dtype=float), hidden_init, part)
    psi = replay(trace, psi, m_star)
    return visible_probabilities(psi, part)
