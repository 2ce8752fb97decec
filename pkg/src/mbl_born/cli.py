"""``mbl-born`` command line entry point.

Exit codes: 0 success, 2 invalid config or mask, 3 numeric failure,
4 missing checkpoints in the run directory given to ``recognize``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from pydantic import ValidationError

from . import experiments as ex
from .config import RunConfig, load_config
from .datasets import load_mnist_idx, toy_digit_pattern, write_pattern_csv
from .errors import (
    ConvergenceError,
    DegenerateCorruptionError,
    DimensionError,
    FormatError,
    InvalidDensityError,
    InvalidParameterError,
    InvalidSpecError,
    MaskSpecError,
    MissingCheckpointError,
    NumericalError,
)
from .objectives import classical_fidelity
from .rundir import (
    load_trace,
    version,
    write_csv,
    write_dict_rows,
    write_distribution,
    write_json,
    write_manifest,
    write_trace,
)

log = logging.getLogger("mbl_born")

COMMANDS = ("train", "compare-models", "phase-sweep", "diagnose", "recognize", "gen-data")
EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECKPOINT = 2, 3, 4
THREADS_ENV = "MBL_BORN_THREADS"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mbl-born", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {version()}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides the config's 'out')")
    p.add_argument("--seed", type=int, help="64-bit seed (overrides the config's 'seed')")
    p.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV}, then CPU count)")
    p.add_argument("--no-plots", action="store_true", help="skip SVG rendering")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        n = flag
    elif os.environ.get(THREADS_ENV):
        n = int(os.environ[THREADS_ENV])
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise InvalidParameterError("thread count must be >= 1")
    return n


def _prepare(args) -> RunConfig:
    cfg = load_config(args.config)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out"] = args.out
    if updates:
        cfg = RunConfig.model_validate({**cfg.dump(), **updates})
    if cfg.experiment is not None and cfg.experiment != args.command:
        raise InvalidParameterError(
            f"config is for '{cfg.experiment}' but the command is '{args.command}'"
        )
    return cfg


def _out_dir(cfg: RunConfig, command: str) -> Path:
    if cfg.out:
        return Path(cfg.out)
    if command == "recognize" and cfg.recognize.run_dir:
        return Path(cfg.recognize.run_dir) / "recognize"
    return Path("runs") / command


def cmd_train(cfg: RunConfig, out: Path, threads: int, plots: bool) -> None:
    trace, target = ex.run_train(cfg, threads)
    write_trace(out, trace, target, cfg.train.checkpoint_stride)
    write_json(
        out / "summary.json",
        {
            "quenches": len(trace.records),
            "terminal_loss": trace.losses[-1],
            "fidelity": classical_fidelity(trace.final_distribution, target),
            "propagation_steps": trace.propagation_steps,
        },
    )
    if plots:
        from . import plots as pl

        pl.training_curves(out / "plots" / "training.svg",
                           [(r.m + 1, r.loss, r.entropy, r.hamming) for r in trace.records])
        if cfg.chain.L_v % 2 == 0:
            pl.pattern_images(out / "plots" / "patterns.svg",
                              {"target": target, "model": trace.final_distribution})


def cmd_compare(cfg: RunConfig, out: Path, threads: int, plots: bool) -> None:
    res = ex.compare_models(cfg, threads)
    write_dict_rows(out / "compare.csv", res["curves"], ["m", "variant", "mean_log_loss", "std"])
    write_dict_rows(out / "terminal.csv", res["terminal"], ["variant", "realization", "seed", "terminal_loss"])
    write_distribution(out / "p_target.csv", res["target"])
    if plots:
        from . import plots as pl

        pl.compare_curves(out / "plots" / "compare.svg", res["curves"])


def cmd_sweep(cfg: RunConfig, out: Path, threads: int, plots: bool) -> None:
    res = ex.phase_sweep(cfg, threads)
    write_dict_rows(out / "sweep.csv", res["terminal"], ["h_d", "realization", "terminal_loss", "fidelity"])
    write_dict_rows(out / "trajectories.csv", res["trajectories"],
                    ["h_d", "realization", "m", "loss", "entropy", "hamming"])
    write_distribution(out / "p_target.csv", res["target"])
    if plots:
        from . import plots as pl

        pl.sweep_summary(out / "plots" / "sweep.svg", res["terminal"])
        pl.sweep_trajectories(out / "plots" / "trajectories.svg", res["trajectories"])


def cmd_diagnose(cfg: RunConfig, out: Path, threads: int, plots: bool) -> None:
    res = ex.diagnose(cfg, threads)
    lv = cfg.diagnose.levels
    if lv is not None:
        write_dict_rows(out / "levels.csv", ex.level_rows(res["levels"], lv.bins),
                        ["h_d", "bin_lo", "bin_hi", "count", "mean_r"])
    if cfg.diagnose.scaling is not None:
        write_dict_rows(out / "scaling.csv", res["scaling"], ["L", "h", "S_per_site", "stderr"])
    if plots:
        from . import plots as pl

        if lv is not None:
            pl.level_histograms(out / "plots" / "levels.svg", res["levels"], lv.bins)
        if res["scaling"]:
            pl.scaling_plot(out / "plots" / "scaling.svg", res["scaling"])


def cmd_recognize(cfg: RunConfig, out: Path, threads: int, plots: bool) -> None:
    rc = cfg.recognize
    if not rc.run_dir:
        raise InvalidParameterError("recognize needs 'recognize.run_dir'")
    trace, target, run_cfg = load_trace(rc.run_dir)
    mask = ex.parse_mask(rc.mask, run_cfg.chain.L_v)
    clean = target if rc.clean == "target" else trace.final_distribution
    res = ex.recognize(trace, clean, mask)
    write_csv(out / "retrieved.csv", ["index", "clean", "corrupted", "retrieved"],
              zip(range(len(clean)), res["clean"], res["corrupted"], res["retrieved"]))
    write_json(
        out / "recognition.json",
        {
            "m_star": res["m_star"],
            "fidelity_corrupted": res["fidelity_corrupted"],
            "fidelity_retrieved": res["fidelity_retrieved"],
            "fidelity_gain": res["fidelity_retrieved"] - res["fidelity_corrupted"],
        },
    )
    if plots and run_cfg.chain.L_v % 2 == 0:
        from . import plots as pl

        pl.pattern_images(out / "plots" / "recognition.svg",
                          {"clean": res["clean"], "corrupted": res["corrupted"], "retrieved": res["retrieved"]})


def cmd_gen_data(cfg: RunConfig, out: Path, threads: int, plots: bool) -> None:
    gd = cfg.gen_data
    if gd.images is not None:
        images, labels = load_mnist_idx(gd.images, gd.labels)
        pats = {str(d): toy_digit_pattern(images[labels == d], cfg.chain.L_v)
                for d in sorted(set(labels.tolist()))}
        out.mkdir(parents=True, exist_ok=True)
        write_pattern_csv(out / "patterns.csv", pats)
        return
    target = ex.build_target(cfg)
    write_distribution(out / "p_target.csv", target)
    if plots and cfg.chain.L_v % 2 == 0:
        from . import plots as pl

        pl.pattern_images(out / "plots" / "target.svg", {"target": target})


HANDLERS = {
    "train": cmd_train,
    "compare-models": cmd_compare,
    "phase-sweep": cmd_sweep,
    "diagnose": cmd_diagnose,
    "recognize": cmd_recognize,
    "gen-data": cmd_gen_data,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        threads = resolve_threads(args.threads)
        cfg = _prepare(args)
        out = _out_dir(cfg, args.command)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "config.json", cfg.dump())
        HANDLERS[args.command](cfg, out, threads, not args.no_plots)
        write_manifest(out, args.command, cfg, threads)
    except (ValidationError, json.JSONDecodeError) as exc:
        print(f"mbl-born: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingCheckpointError as exc:
        print(f"mbl-born: missing checkpoints: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except (NumericalError, ConvergenceError, InvalidDensityError, FloatingPointError) as exc:
        print(f"mbl-born: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MaskSpecError, DegenerateCorruptionError) as exc:
        print(f"mbl-born: invalid mask: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidParameterError, InvalidSpecError, DimensionError, FormatError, ValueError) as exc:
        print(f"mbl-born: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"mbl-born: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
