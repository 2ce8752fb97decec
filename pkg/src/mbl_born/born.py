"""Visible/hidden partitions, reduced density matrices and Born distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidDensityError, InvalidParameterError

CLAMP_TOL = 1e-10
TRACE_TOL = 1e-6


@dataclass(frozen=True)
class Partition:
    """Which chain sites are read out (visible) and which are traced out (hidden)."""

    visible_sites: tuple[int, ...]
    hidden_sites: tuple[int, ...] = ()

    def __post_init__(self):
        v, h = set(self.visible_sites), set(self.hidden_sites)
        if len(v) != len(self.visible_sites) or len(h) != len(self.hidden_sites):
            raise InvalidParameterError("partition sites must be unique")
        if v & h:
            raise InvalidParameterError("visible and hidden sites overlap")
        if not self.visible_sites:
            raise InvalidParameterError("need at least one visible site")
        if v | h != set(range(self.L)):
            raise InvalidParameterError("partition must cover sites 0..L-1 exactly")

    @classmethod
    def contiguous(cls, L_v: int, L_h: int = 0) -> Partition:
        """Visible sites first, hidden units on the last ``L_h`` sites."""
        return cls(tuple(range(L_v)), tuple(range(L_v, L_v + L_h)))

    @classmethod
    def ends(cls, L_v: int, L_h: int = 0) -> Partition:
        """Hidden units split between the two chain ends, the extra one on the right."""
        left = L_h // 2
        return cls.from_hidden(L_v + L_h, [*range(left), *range(L_v + left, L_v + L_h)])

    @classmethod
    def from_hidden(cls, L: int, hidden_sites) -> Partition:
        hidden = tuple(sorted(int(s) for s in hidden_sites))
        return cls(tuple(s for s in range(L) if s not in hidden), hidden)

    @property
    def L(self) -> int:
        return len(self.visible_sites) + len(self.hidden_sites)

    @property
    def L_v(self) -> int:
        return len(self.visible_sites)

    @property
    def L_h(self) -> int:
        return len(self.hidden_sites)

    @property
    def is_trivial_order(self) -> bool:
        return self.visible_sites + self.hidden_sites == tuple(range(self.L))


def _split(psi: np.ndarray, part: Partition) -> np.ndarray:
    """Reshape amplitudes (or a stack of them) to (..., 2^L_v, 2^L_h)."""
    lead = psi.shape[:-1]
    if psi.shape[-1] != 2**part.L:
        raise DimensionError(
            f"state of dimension {psi.shape[-1]} does not match a {part.L}-site partition"
        )
    if part.is_trivial_order:
        return psi.reshape(lead + (2**part.L_v, 2**part.L_h))
    t = psi.reshape(lead + (2,) * part.L)
    n = len(lead)
    order = list(range(n)) + [n + s for s in part.visible_sites + part.hidden_sites]
    return t.transpose(order).reshape(lead + (2**part.L_v, 2**part.L_h))


def partial_trace_hidden(state, part: Partition) -> np.ndarray:
    """rho_vis = Tr_hidden |psi><psi| in the visible-site basis ordering."""
    A = _split(np.asarray(state, dtype=complex), part)
    if A.ndim != 2:
        raise DimensionError("partial_trace_hidden takes a single state vector")
    return A @ A.conj().T


def visible_distribution(rho: np.ndarray) -> np.ndarray:
    """Diagonal of a density matrix, with round-off negatives clamped."""
    rho = np.asarray(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidDensityError(f"density matrix has trace {tr:.8g}")
    return _clean(np.real(np.diag(rho)).copy())


def _clean(p: np.ndarray) -> np.ndarray:
    if p.min(initial=0.0) < -CLAMP_TOL:
        raise InvalidDensityError(f"probability {p.min():.3g} is negative beyond round-off")
    p[p < 0] = 0.0
    return p / p.sum(axis=-1, keepdims=True)


def born_distribution(state) -> np.ndarray:
    """p(z) = |psi(z)|^2 for a chain with no hidden units."""
    psi = np.asarray(state)
    p = np.abs(psi) ** 2
    return p / p.sum()


def visible_probabilities(states: np.ndarray, part: Partition) -> np.ndarray:
    """Visible marginals straight from amplitudes: sum over hidden of |psi(v, h)|^2.

    Accepts one state or an (n, 2^L) stack; equals the diagonal of
    ``partial_trace_hidden`` without forming the density matrix.
    """
    A = _split(np.asarray(states), part)
    return np.sum(A.real**2 + A.imag**2, axis=-1)


def embed_pattern(xi, hidden_init, part: Partition | None = None) -> np.ndarray:
    """State with visible amplitudes sqrt(xi) (non-negative real) times ``hidden_init``."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise InvalidParameterError("pattern has negative entries")
    if abs(xi.sum() - 1.0) > 1e-8:
        raise InvalidParameterError(f"pattern sums to {xi.sum():.10g}, expected 1")
    hidden = np.asarray(hidden_init, dtype=complex).ravel()
    L_v = int(len(xi)).bit_length() - 1
    L_h = int(len(hidden)).bit_length() - 1
    if 2**L_v != len(xi) or 2**L_h != len(hidden):
        raise DimensionError("pattern and hidden state lengths must be powers of two")
    if part is None:
        part = Partition.contiguous(L_v, L_h)
    if part.L_v != L_v or part.L_h != L_h:
        raise DimensionError("partition does not match pattern/hidden sizes")
    joint = np.kron(np.sqrt(xi), hidden)
    if part.is_trivial_order:
        return joint
    t = joint.reshape((2,) * part.L)
    # axis a of t holds site order[a]; put each site back at its chain position
    order = part.visible_sites + part.hidden_sites
    return t.transpose(np.argsort(order)).reshape(-1)
