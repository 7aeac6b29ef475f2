"""Report figures, rendered off-screen next to the CSV/JSON output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["REPORT_RC", "plot_trajectory", "plot_delta_limit"]

REPORT_RC = {
    "figure.figsize": (7.0, 4.3),
    "figure.dpi": 100,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "lines.linewidth": 1.2,
}

# fixed metadata so identical runs give identical files
_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def plot_trajectory(records, out_dir, linear_C: float | None = None, title: str | None = None) -> Path:
    """Energy drift, ||w||_2 (with the linear bound if known) and max |1-|u|^2|."""
    t = np.array([r.t for r in records])
    e = np.array([r.e_total for r in records])
    l2 = np.array([r.l2_w for r in records])
    dev = np.array([r.max_density_deviation for r in records])
    with plt.rc_context(REPORT_RC):
        fig, axes = plt.subplots(1, 3, figsize=(10.0, 3.4), constrained_layout=True)
        ax = axes[0]
        ax.plot(t, e - e[0], color="k")
        ax.set_xlabel("t")
        ax.set_ylabel("E(t) - E(0)")
        ax.ticklabel_format(axis="y", style="sci", scilimits=(-2, 2))

        ax = axes[1]
        ax.plot(t, l2, color="C0", label="||w||_2")
        if linear_C is not None:
            ax.plot(t, l2[0] + linear_C * (t - t[0]), color="C3", ls="--", label="C t + ||w0||_2")
            ax.legend(loc="upper left")
        ax.set_xlabel("t")
        ax.set_ylabel("||w(t)||_2")

        ax = axes[2]
        ax.semilogy(t, np.maximum(dev, 1e-300), color="C2")
        ax.set_xlabel("t")
        ax.set_ylabel("max |1 - |u|^2|")
        if title:
            fig.suptitle(title)
        return _save(fig, Path(out_dir) / "trajectory.png")


def plot_delta_limit(rows: Sequence[tuple[float, float]], out_dir) -> Path:
    eps = np.array([r[0] for r in rows])
    dist = np.array([r[1] for r in rows])
    with plt.rc_context(REPORT_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.4), constrained_layout=True)
        ax.loglog(eps, dist, "o-", color="k")
        ax.set_xlabel("eps")
        ax.set_ylabel("sup_t ||u_eps - u_delta||_H1")
        ax.invert_xaxis()
        return _save(fig, Path(out_dir) / "delta_limit.png")
