"""Experiment drivers behind the CLI subcommands.

Each driver takes a validated ``RunConfig`` and returns plain data (traces,
row dicts); writing files is left to ``rundir``.
"""

from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np

from .config import RunConfig, to_train_config
from .datasets import (
    bottom_rows_mask,
    corrupt_pattern,
    digit_pattern,
    half_plane_mask,
    parity_dataset,
    quantum_target,
    read_pattern_csv,
    row_mask,
    side_length,
    superpose_patterns,
)
from .diagnostics import LevelStatistics, entropy_scaling_sweep, level_spacing_ratios
from .errors import InvalidParameterError, MaskSpecError
from .objectives import classical_fidelity
from .recognition import find_closest_quench, retrieve
from .rng import realization_seed, stream
from .spin import ChainSpec
from .trainer import TrainingTrace, train

log = logging.getLogger(__name__)


def build_target(cfg: RunConfig) -> np.ndarray:
    ds = cfg.dataset
    L_v = cfg.chain.L_v
    if ds.kind == "digit":
        if L_v != 6:
            raise InvalidParameterError("bundled digit patterns need L_v = 6")
        return superpose_patterns([digit_pattern(d) for d in ds.digits])
    if ds.kind == "parity":
        return parity_dataset(L_v)
    if ds.kind == "quantum":
        T = cfg.train.T if ds.T is None else ds.T
        return quantum_target(
            L_v, ds.h_d, T, stream(cfg.seed, "dataset"), J_xy=cfg.chain.J_xy, J_zz=cfg.chain.J_zz
        )
    pats = read_pattern_csv(ds.path)
    label = ds.label if ds.label is not None else next(iter(pats))
    if label not in pats:
        raise InvalidParameterError(f"pattern {label!r} not found in {ds.path}")
    p = pats[label]
    if p.shape != (2**L_v,) or np.any(p < 0) or not p.sum() > 0:
        raise InvalidParameterError(f"pattern {label!r} is not a valid length-{2**L_v} pattern")
    return p / p.sum()


def run_train(cfg: RunConfig, threads: int = 1) -> tuple[TrainingTrace, np.ndarray]:
    target = build_target(cfg)
    return train(to_train_config(cfg), target, threads=threads), target


def compare_models(cfg: RunConfig, threads: int = 1) -> dict:
    """All requested variants over the same realization seeds."""
    target = build_target(cfg)
    R = cfg.compare.realizations
    seeds = [realization_seed(cfg.seed, r) for r in range(R)]
    curves, terminal = [], []
    for variant in cfg.compare.variants:
        logs = []
        for r, s in enumerate(seeds):
            tc = replace(to_train_config(cfg, seed=s, variant=variant), track_diagnostics=False)
            tr = train(tc, target, threads=threads)
            logs.append(np.log10(tr.losses))
            terminal.append({"variant": variant, "realization": r, "seed": s, "terminal_loss": tr.losses[-1]})
            log.info("%s realization %d: terminal loss %.5g", variant, r, tr.losses[-1])
        logs = np.array(logs)
        mean = logs.mean(axis=0)
        std = logs.std(axis=0, ddof=1) if R > 1 else np.zeros_like(mean)
        for m in range(logs.shape[1]):
            curves.append({"m": m + 1, "variant": variant, "mean_log_loss": mean[m], "std": std[m]})
    return {"curves": curves, "terminal": terminal, "target": target}


def phase_sweep(cfg: RunConfig, threads: int = 1) -> dict:
    """Terminal loss against disorder strength, with trajectories at the extremes."""
    target = build_target(cfg)
    hs = list(cfg.sweep.h_values)
    extremes = {min(hs), max(hs)}
    seeds = [realization_seed(cfg.seed, r) for r in range(cfg.sweep.realizations)]
    terminal, traj = [], []
    for h in hs:
        for r, s in enumerate(seeds):
            tr = train(to_train_config(cfg, seed=s, h_d=h), target, threads=threads)
            terminal.append(
                {
                    "h_d": h,
                    "realization": r,
                    "terminal_loss": tr.losses[-1],
                    "fidelity": classical_fidelity(tr.final_distribution, target),
                }
            )
            log.info("h_d=%g realization %d: terminal loss %.5g", h, r, tr.losses[-1])
            if h in extremes:
                for rec in tr.records:
                    traj.append(
                        {
                            "h_d": h,
                            "realization": r,
                            "m": rec.m + 1,
                            "loss": rec.loss,
                            "entropy": rec.entropy,
                            "hamming": rec.hamming,
                        }
                    )
    return {"terminal": terminal, "trajectories": traj, "target": target}


def diagnose(cfg: RunConfig, threads: int = 1) -> dict:
    out: dict = {"levels": {}, "scaling": []}
    lv = cfg.diagnose.levels
    if lv is not None:
        spec = ChainSpec(lv.L, cfg.chain.J_xy, cfg.chain.J_zz, cfg.chain.boundary)
        for h in lv.h_values:
            out["levels"][h] = level_spacing_ratios(
                spec, h, lv.realizations, stream(cfg.seed, "levels", _milli(h)),
                fraction=lv.fraction, threads=threads,
            )
    sc = cfg.diagnose.scaling
    if sc is not None:
        out["scaling"] = entropy_scaling_sweep(
            sc.Ls, sc.h_values, sc.realizations, stream(cfg.seed, "scaling"),
            fraction=sc.fraction, J_xy=cfg.chain.J_xy, J_zz=cfg.chain.J_zz, threads=threads,
        )
    return out


def _milli(h: float) -> int:
    return int(round(abs(h) * 1000))


def level_rows(levels: dict[float, LevelStatistics], bins: int) -> list[dict]:
    rows = []
    for h, st in levels.items():
        counts, edges = st.histogram(bins)
        for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
            rows.append({"h_d": h, "bin_lo": lo, "bin_hi": hi, "count": int(c), "mean_r": st.mean_r})
    return rows


def parse_mask(spec, L_v: int) -> np.ndarray:
    """``none``, ``bottom:K``/``top:K``/``left:K``/``right:K``, ``rows:a,b,...`` or explicit indices."""
    try:
        side = side_length(L_v)
    except InvalidParameterError as exc:
        raise MaskSpecError(str(exc)) from exc
    n = side * side
    if isinstance(spec, list):
        idx = np.asarray(spec, dtype=np.int64)
    elif not isinstance(spec, str):
        raise MaskSpecError(f"mask must be a string or an index list, got {spec!r}")
    elif spec.strip() == "none":
        idx = np.zeros(0, dtype=np.int64)
    else:
        kind, _, arg = spec.partition(":")
        try:
            if kind == "rows":
                rows = [int(a) for a in arg.split(",")]
                if any(not 0 <= r < side for r in rows):
                    raise MaskSpecError(f"row outside 0..{side - 1} in {spec!r}")
                idx = row_mask(side, rows)
            elif kind in ("bottom", "top", "left", "right"):
                k = int(arg)
                if not 0 <= k <= side:
                    raise MaskSpecError(f"depth outside 0..{side} in {spec!r}")
                idx = bottom_rows_mask(side, k) if kind == "bottom" else half_plane_mask(side, kind, k)
            else:
                raise MaskSpecError(f"unknown mask kind {kind!r}")
        except ValueError as exc:
            if isinstance(exc, MaskSpecError):
                raise
            raise MaskSpecError(f"malformed mask spec {spec!r}") from exc
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise MaskSpecError(f"mask index outside 0..{n - 1}")
    return idx


def recognize(trace: TrainingTrace, clean: np.ndarray, mask) -> dict:
    corrupted = corrupt_pattern(clean, mask)
    m_star = find_closest_quench(trace, corrupted)
    retrieved = retrieve(trace, corrupted)
    return {
        "clean": clean,
        "corrupted": corrupted,
        "retrieved": retrieved,
        "m_star": m_star,
        "fidelity_corrupted": classical_fidelity(corrupted, clean),
        "fidelity_retrieved": classical_fidelity(retrieved, clean),
    }
