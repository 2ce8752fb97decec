"""Counter-based random streams: every (seed, purpose, indices) gets its own generator.

Keying streams by position instead of drawing from one shared generator is what
makes results independent of evaluation order and worker count.
"""

from __future__ import annotations

import zlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    if isinstance(part, (int, np.integer)) and part >= 0:
        return int(part)
    raise TypeError(f"stream keys must be non-negative ints or strings, got {part!r}")


def stream(seed: int, *keys) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def per_candidate_rng(seed: int, m: int, n: int) -> np.random.Generator:
    """Stream for candidate ``n`` of quench ``m``."""
    return stream(seed, "candidate", m, n)


def realization_seed(seed: int, r: int) -> int:
    """Independent 64-bit training seed for repetition ``r`` of an experiment."""
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=(_key("realization"), int(r)))
    return int(ss.generate_state(1, np.uint64)[0])
