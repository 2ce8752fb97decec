"""Run-directory persistence: CSV tables, manifest, and trace reload for retrieval."""

from __future__ import annotations

import csv
import hashlib
import json
from importlib import metadata
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import RunConfig, to_train_config
from .errors import MissingCheckpointError
from .trainer import QuenchRecord, TrainingTrace

PACKAGE = "artifact"


def version() -> str:
    try:
        return metadata.version(PACKAGE)
    except metadata.PackageNotFoundError:
        return "0+unknown"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def write_dict_rows(path, rows: list[dict], header: Sequence[str] | None = None) -> None:
    header = list(header or (rows[0].keys() if rows else []))
    write_csv(path, header, ([r[k] for k in header] for r in rows))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MissingCheckpointError(f"{path} is empty")
    data = np.array([[float(x) for x in r] for r in rows[1:]]) if len(rows) > 1 else np.zeros((0, len(rows[0])))
    return rows[0], data


def write_distribution(path, p: np.ndarray) -> None:
    write_csv(path, ["index", "p"], zip(range(len(p)), p))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_manifest(out: Path, command: str, cfg: RunConfig, threads: int) -> None:
    """Records what produced the directory plus a SHA-256 of every file in it."""
    files = {}
    for f in sorted(out.rglob("*")):
        if f.is_file() and f.name != "manifest.json":
            files[str(f.relative_to(out))] = hashlib.sha256(f.read_bytes()).hexdigest()
    write_json(
        out / "manifest.json",
        {
            "package": PACKAGE,
            "version": version(),
            "command": command,
            "seed": cfg.seed,
            "threads": threads,
            "config": cfg.dump(),
            "files": files,
        },
    )


def write_trace(out: Path, trace: TrainingTrace, target: np.ndarray, stride: int = 0) -> None:
    """trace.csv, theta.csv, p_model.csv, p_target.csv plus the checkpoints retrieval needs."""
    recs = trace.records
    write_csv(out / "trace.csv", ["m", "loss", "entropy", "hamming"],
              ((r.m + 1, r.loss, r.entropy, r.hamming) for r in recs))
    L = trace.config.chain.L
    write_csv(out / "theta.csv", ["m"] + [f"h{i}" for i in range(L)],
              ([r.m + 1, *r.theta] for r in recs))
    if trace.config.driven:
        write_csv(out / "drives.csv", ["m", "interval"] + [f"d{i}" for i in range(L)],
                  ([r.m + 1, k, *row] for r in recs for k, row in enumerate(r.drives)))
    n = trace.intermediate_distributions.shape[1]
    write_csv(out / "p_intermediate.csv", ["m"] + [f"p{i}" for i in range(n)],
              ([m, *p] for m, p in enumerate(trace.intermediate_distributions)))
    write_distribution(out / "p_model.csv", trace.final_distribution)
    write_distribution(out / "p_target.csv", target)
    if stride:
        # final state always included so a run can be resumed or inspected
        ms = sorted(set(range(stride, len(recs) + 1, stride)) | {len(recs)})
        states = _replay_states(trace, ms)
        write_csv(out / "states.csv", ["m", "index", "re", "im"],
                  ([m, k, a.real, a.imag] for m, psi in zip(ms, states) for k, a in enumerate(psi)))


def _replay_states(trace: TrainingTrace, ms: list[int]) -> list[np.ndarray]:
    from .trainer import QuenchEngine

    eng = QuenchEngine(trace.config)
    psi, out = trace.initial_state, []
    for rec in trace.records:
        psi = eng.propagate(psi, rec.theta, rec.drives)
        if rec.m + 1 in ms:
            out.append(psi)
    return out


def load_trace(run_dir) -> tuple[TrainingTrace, np.ndarray, RunConfig]:
    """Rebuild a training trace from a ``train`` run directory.

    Fields and checkpoint distributions round-trip exactly through the CSVs.
    Candidate losses and the final state are not stored; ``final_state`` is
    left at the initial state.
    """
    run_dir = Path(run_dir)
    need = ["config.json", "theta.csv", "p_intermediate.csv", "p_target.csv"]
    missing = [f for f in need if not (run_dir / f).is_file()]
    if missing:
        raise MissingCheckpointError(f"{run_dir} lacks {', '.join(missing)}")
    cfg = RunConfig.model_validate(json.loads((run_dir / "config.json").read_text()))
    tc = to_train_config(cfg)
    _, theta = read_csv(run_dir / "theta.csv")
    _, dists = read_csv(run_dir / "p_intermediate.csv")
    _, target = read_csv(run_dir / "p_target.csv")
    if len(theta) != tc.M or len(dists) != tc.M + 1:
        raise MissingCheckpointError(f"{run_dir} has incomplete checkpoints")
    drives = [None] * tc.M
    if tc.driven:
        if not (run_dir / "drives.csv").is_file():
            raise MissingCheckpointError(f"{run_dir} lacks drives.csv")
        _, d = read_csv(run_dir / "drives.csv")
        drives = [d[d[:, 0] == m + 1][:, 2:] for m in range(tc.M)]
    records = [
        QuenchRecord(m, theta[m, 1:], np.nan, np.nan, np.nan, np.zeros(0), drives[m])
        for m in range(tc.M)
    ]
    psi0 = tc.initial_vector()
    trace = TrainingTrace(tc, records, dists[:, 1:], psi0, psi0, dists[-1, 1:], 0)
    return trace, target[:, 1], cfg
