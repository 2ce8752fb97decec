"""Optional SVG figures for run directories."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamps, so identical data gives identical files
plt.rcParams["svg.hashsalt"] = "mbl-born"
_META = {"Date": None, "Creator": None}


def _save(fig, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def pattern_images(path, panels: dict[str, np.ndarray]) -> None:
    fig, axes = plt.subplots(1, len(panels), figsize=(2.2 * len(panels), 2.4), squeeze=False)
    for ax, (title, p) in zip(axes[0], panels.items()):
        side = int(round(np.sqrt(len(p))))
        ax.imshow(np.asarray(p).reshape(side, -1), cmap="gray_r")
        ax.set_title(title, fontsize=9)
        ax.set_xticks([])
        ax.set_yticks([])
    _save(fig, path)


def training_curves(path, trace_rows: list[tuple]) -> None:
    m, loss, ent, ham = (np.array(c, dtype=float) for c in zip(*trace_rows))
    fig, axes = plt.subplots(1, 3, figsize=(10, 3))
    axes[0].semilogy(m, loss)
    axes[0].set_ylabel("MMD loss")
    axes[1].plot(m, ent)
    axes[1].set_ylabel("half-chain entropy")
    axes[2].plot(m, ham)
    axes[2].set_ylabel("Hamming distance")
    for ax in axes:
        ax.set_xlabel("quench m")
    _save(fig, path)


def compare_curves(path, rows: list[dict]) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for v in dict.fromkeys(r["variant"] for r in rows):
        sel = [r for r in rows if r["variant"] == v]
        m = np.array([r["m"] for r in sel])
        mu = np.array([r["mean_log_loss"] for r in sel])
        sd = np.array([r["std"] for r in sel])
        ax.plot(m, mu, label=v)
        ax.fill_between(m, mu - sd, mu + sd, alpha=0.2)
    ax.set_xlabel("quench m")
    ax.set_ylabel("log10 MMD loss")
    ax.legend()
    _save(fig, path)


def sweep_summary(path, rows: list[dict]) -> None:
    hs = sorted({r["h_d"] for r in rows})
    mu = [np.mean([r["terminal_loss"] for r in rows if r["h_d"] == h]) for h in hs]
    sd = [np.std([r["terminal_loss"] for r in rows if r["h_d"] == h]) for h in hs]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(hs, mu, yerr=sd, marker="o")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("disorder strength h_d")
    ax.set_ylabel("terminal MMD loss")
    _save(fig, path)


def sweep_trajectories(path, rows: list[dict]) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    for h in sorted({r["h_d"] for r in rows}):
        for r in sorted({r["realization"] for r in rows}):
            sel = [x for x in rows if x["h_d"] == h and x["realization"] == r]
            m = [x["m"] for x in sel]
            kw = {"color": "C0" if h == min(x["h_d"] for x in rows) else "C3", "alpha": 0.6, "lw": 1}
            axes[0].plot(m, [x["hamming"] for x in sel], label=f"h_d={h:g}" if r == 0 else None, **kw)
            axes[1].plot(m, [x["entropy"] for x in sel], **kw)
    axes[0].set_ylabel("Hamming distance")
    axes[1].set_ylabel("half-chain entropy")
    axes[0].legend()
    for ax in axes:
        ax.set_xlabel("quench m")
    _save(fig, path)


def level_histograms(path, levels: dict, bins: int) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for h, st in levels.items():
        ax.hist(st.r_values, bins=bins, range=(0, 1), density=True, histtype="step",
                label=f"h_d={h:g}, <r>={st.mean_r:.3f}")
    ax.set_xlabel("spacing ratio r")
    ax.set_ylabel("density")
    ax.legend()
    _save(fig, path)


def scaling_plot(path, rows: list[dict]) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for h in sorted({r["h"] for r in rows}):
        sel = [r for r in rows if r["h"] == h]
        ax.errorbar([r["L"] for r in sel], [r["S_per_site"] for r in sel],
                    yerr=[r["stderr"] for r in sel], marker="o", label=f"h={h:g}")
    ax.set_xlabel("L")
    ax.set_ylabel("S / L")
    ax.legend()
    _save(fig, path)
