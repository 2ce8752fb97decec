"""Spin-1/2 chain Hamiltonians: XXZ exchange, on-site fields, disorder, sectors.

Basis convention (used by every module in the package): basis index ``k`` of an
``L``-site chain encodes site ``i`` (0-based) in bit ``L - 1 - i`` of ``k``, so the
first site is the most significant bit. Bit value 0 is spin up (S^z = +1/2).
Spin operators are S^a = sigma^a / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Literal

import numpy as np

from .errors import (
    DimensionError,
    InvalidParameterError,
    InvalidSpecError,
    SectorViolationError,
)

Boundary = Literal["open", "periodic"]

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class ChainSpec:
    """Chain geometry and couplings. ``J_zz = 0`` gives the Anderson (XY) limit."""

    L: int
    J_xy: float = 1.0
    J_zz: float = 1.0
    boundary: Boundary = "open"

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise InvalidSpecError(f"chain needs L >= 2 sites, got {self.L}")
        if not (np.isfinite(self.J_xy) and np.isfinite(self.J_zz)):
            raise InvalidSpecError("couplings must be finite")
        if self.boundary not in ("open", "periodic"):
            raise InvalidSpecError(f"unknown boundary {self.boundary!r}")

    @property
    def dim(self) -> int:
        return 2**self.L

    def bonds(self) -> list[tuple[int, int]]:
        out = [(i, i + 1) for i in range(self.L - 1)]
        if self.boundary == "periodic" and self.L > 2:
            out.append((self.L - 1, 0))
        return out


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """A dense Hermitian operator together with the parameters that built it."""

    matrix: np.ndarray
    spec: ChainSpec | None = None
    fields: np.ndarray | None = None
    drives: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def L(self) -> int:
        return int(self.dim).bit_length() - 1

    def __add__(self, other: HamiltonianMatrix) -> HamiltonianMatrix:
        if other.dim != self.dim:
            raise DimensionError(f"cannot add operators of dim {self.dim} and {other.dim}")
        return HamiltonianMatrix(
            self.matrix + other.matrix,
            spec=self.spec or other.spec,
            fields=self.fields if self.fields is not None else other.fields,
            drives=self.drives if self.drives is not None else other.drives,
        )


@lru_cache(maxsize=32)
def basis_bits(L: int) -> np.ndarray:
    """(2^L, L) array of site occupations; entry 1 means spin down."""
    idx = np.arange(2**L)
    bits = (idx[:, None] >> (L - 1 - np.arange(L))) & 1
    bits.setflags(write=False)
    return bits


@lru_cache(maxsize=32)
def sz_table(L: int) -> np.ndarray:
    """(2^L, L) array of S^z eigenvalues (+-1/2) per basis state and site."""
    table = 0.5 - basis_bits(L).astype(float)
    table.setflags(write=False)
    return table


def site_mask(L: int, site: int) -> int:
    return 1 << (L - 1 - site)


def as_fields(h, L: int | None = None) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 1:
        raise DimensionError("field vector must be one-dimensional")
    if L is not None and h.shape[0] != L:
        raise DimensionError(f"field vector has length {h.shape[0]}, chain has {L} sites")
    if not np.all(np.isfinite(h)):
        raise InvalidParameterError("field entries must be finite")
    return h


def build_xxz(spec: ChainSpec) -> HamiltonianMatrix:
    """Sum over bonds of J_xy (SxSx + SySy) + J_zz SzSz."""
    L, dim = spec.L, spec.dim
    sz = sz_table(L)
    bits = basis_bits(L)
    idx = np.arange(dim)
    H = np.zeros((dim, dim))
    diag = np.zeros(dim)
    for i, j in spec.bonds():
        diag += spec.J_zz * sz[:, i] * sz[:, j]
        # SxSx + SySy = (S+S- + S-S+)/2 flips antiparallel pairs with amplitude 1/2
        anti = bits[:, i] != bits[:, j]
        src = idx[anti]
        H[src, src ^ (site_mask(L, i) | site_mask(L, j))] += 0.5 * spec.J_xy
    H[idx, idx] += diag
    return HamiltonianMatrix(H, spec=spec)


def build_field_term(h) -> HamiltonianMatrix:
    """Diagonal operator sum_i h_i S^z_i."""
    h = as_fields(h)
    L = h.shape[0]
    if L < 1:
        raise DimensionError("empty field vector")
    return HamiltonianMatrix(np.diag(sz_table(L) @ h), fields=h)


def build_drive_term(d) -> HamiltonianMatrix:
    """Transverse drive sum_i d_i S^x_i (breaks S^z conservation)."""
    d = as_fields(d)
    L = d.shape[0]
    dim = 2**L
    idx = np.arange(dim)
    H = np.zeros((dim, dim))
    for i, amp in enumerate(d):
        H[idx, idx ^ site_mask(L, i)] += 0.5 * amp
    return HamiltonianMatrix(H, drives=d)


def total_hamiltonian(spec: ChainSpec, h) -> HamiltonianMatrix:
    """H_XXZ + sum_i h_i S^z_i, keeping the parameter record."""
    h = as_fields(h, spec.L)
    H = build_xxz(spec).matrix.copy()
    H[np.diag_indices_from(H)] += sz_table(spec.L) @ h
    return HamiltonianMatrix(H, spec=spec, fields=h)


def sample_fields(h_d: float, L: int, rng: np.random.Generator) -> np.ndarray:
    """L i.i.d. draws from U[-h_d, h_d]."""
    if not h_d >= 0:
        raise InvalidParameterError(f"disorder strength must be >= 0, got {h_d}")
    return rng.uniform(-h_d, h_d, size=L)


@dataclass(frozen=True, eq=False)
class SectorIndex:
    """A fixed-magnetization block: ``n_up`` up spins, basis indices in ascending order."""

    n_up: int
    basis_states: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.basis_states)


@lru_cache(maxsize=32)
def sector_indices(L: int) -> tuple[SectorIndex, ...]:
    n_up = L - basis_bits(L).sum(axis=1)
    out = []
    for k in range(L, -1, -1):
        states = np.flatnonzero(n_up == k)
        states.setflags(write=False)
        assert len(states) == comb(L, k)
        out.append(SectorIndex(k, states))
    return tuple(out)


def total_sz(L: int) -> np.ndarray:
    return sz_table(L).sum(axis=1)


def check_sz_conserving(H: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    L = int(H.shape[0]).bit_length() - 1
    m = total_sz(L)
    leak = np.abs(H[m[:, None] != m[None, :]])
    if leak.size and leak.max() > tol:
        raise SectorViolationError(
            f"operator couples different magnetization sectors (max element {leak.max():.3g})"
        )


def sector_blocks(H: HamiltonianMatrix | np.ndarray) -> list[tuple[SectorIndex, np.ndarray]]:
    """Split an S^z-conserving operator into its magnetization blocks."""
    M = H.matrix if isinstance(H, HamiltonianMatrix) else np.asarray(H)
    check_sz_conserving(M)
    L = int(M.shape[0]).bit_length() - 1
    return [(s, M[np.ix_(s.basis_states, s.basis_states)]) for s in sector_indices(L)]


class SectorCache:
    """Per-sector pieces of a fixed XXZ chain, reused across many field draws.

    ``block(k, h)`` returns the sector-``k`` block of H_XXZ + sum h_i S^z_i
    without forming the full matrix.
    """

    def __init__(self, spec: ChainSpec):
        self.spec = spec
        base = build_xxz(spec).matrix
        self.sectors = sector_indices(spec.L)
        self.base_blocks = [base[np.ix_(s.basis_states, s.basis_states)] for s in self.sectors]
        self.sz_blocks = [sz_table(spec.L)[s.basis_states] for s in self.sectors]

    def block(self, k: int, h: np.ndarray) -> np.ndarray:
        B = self.base_blocks[k].copy()
        B[np.diag_indices_from(B)] += self.sz_blocks[k] @ h
        return B

    def blocks_batch(self, k: int, hs: np.ndarray) -> np.ndarray:
        """Stack of sector-``k`` blocks, one per row of ``hs``."""
        n = self.base_blocks[k].shape[0]
        B = np.repeat(self.base_blocks[k][None], len(hs), axis=0)
        B[:, np.arange(n), np.arange(n)] += hs @ self.sz_blocks[k].T
        return B
