from functools import reduce

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")

SX = np.array([[0, 1], [1, 0]]) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]]) / 2
ID = np.eye(2)


def site_op(op, i, L):
    """Naive Kronecker embedding of a one-site operator (site 0 is leftmost)."""
    return reduce(np.kron, [op if j == i else ID for j in range(L)])


def kron_xxz(L, J_xy=1.0, J_zz=1.0, fields=None, periodic=False):
    """Independent tensor-product construction of the XXZ chain plus z fields."""
    H = np.zeros((2**L, 2**L), dtype=complex)
    bonds = [(i, i + 1) for i in range(L - 1)]
    if periodic and L > 2:
        bonds.append((L - 1, 0))
    for i, j in bonds:
        H += J_xy * (site_op(SX, i, L) @ site_op(SX, j, L) + site_op(SY, i, L) @ site_op(SY, j, L))
        H += J_zz * site_op(SZ, i, L) @ site_op(SZ, j, L)
    if fields is not None:
        for i, h in enumerate(fields):
            H += h * site_op(SZ, i, L)
    return H


def random_state(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_VERDICTS: dict[int, str] = {}


@pytest.fixture
def report():
    """Record one verdict line per acceptance criterion; returns the verdict."""

    def _report(number: int, ok: bool, detail: str) -> bool:
        _VERDICTS[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}"
        print(_VERDICTS[number])
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[k])
