"""Figure rendering for experiment reports.

Each experiment writes a CSV (the data contract) and, next to it, a small
set of PNG figures summarizing the run: error decay against node count or
separation distance, iteration counts, and benchmark timings.  Rendering is
headless (Agg) and deliberately plain.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .geometry import DiscreteBoundary  # noqa: E402


def _finite(rows, key):
    vals = []
    for row in rows:
        v = row.get(key)
        if v not in (None, "") and math.isfinite(float(v)) and float(v) > 0:
            vals.append((row, float(v)))
    return vals


def render_convergence_figure(rows: list[dict], path: Path, sweep_key: str = "total_nodes") -> None:
    """Semilog/loglog error decay plus an iteration-count panel."""
    fig, (ax_err, ax_it) = plt.subplots(1, 2, figsize=(9, 3.6))
    for key, label in (("err_mu_inf", "max error in mu"),
                       ("err_h_inf", "max |h|"),
                       ("E_n", "orthogonality defect")):
        pts = _finite(rows, key)
        if pts:
            xs = [float(r[sweep_key]) for r, _ in pts]
            ys = [v for _, v in pts]
            ax_err.plot(xs, ys, "o-", label=label)
    ax_err.set_xlabel(sweep_key.replace("_", " "))
    ax_err.set_ylabel("error")
    ax_err.set_yscale("log")
    if sweep_key == "eps":
        ax_err.set_xscale("log")
    if ax_err.get_legend_handles_labels()[0]:
        ax_err.legend(fontsize=8)
    ax_err.grid(True, which="both", alpha=0.3)

    xs = [float(r[sweep_key]) for r in rows if r.get("gmres_iters") not in (None, "")]
    ys = [int(r["gmres_iters"]) for r in rows if r.get("gmres_iters") not in (None, "")]
    ax_it.plot(xs, ys, "s-", color="C3")
    ax_it.set_xlabel(sweep_key.replace("_", " "))
    ax_it.set_ylabel("GMRES inner iterations")
    if sweep_key == "eps":
        ax_it.set_xscale("log")
    ax_it.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_bench_figure(rows: list[dict], path: Path) -> None:
    """Log-log fast vs direct matvec timings against point count."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for key, label in (("time_solve_s", "fast path"), ("time_direct_s", "direct path")):
        pts = _finite(rows, key)
        if pts:
            ax.loglog([float(r["total_nodes"]) for r, _ in pts], [v for _, v in pts], "o-", label=label)
    ax.set_xlabel("points")
    ax.set_ylabel("matvec time [s]")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_geometry_figure(disc: DiscreteBoundary, path: Path) -> None:
    """Boundary nodes, one closed trace per component."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for k in range(disc.num_curves):
        eta = disc.eta[disc.block(k)]
        closed = list(eta) + [eta[0]]
        ax.plot([z.real for z in closed], [z.imag for z in closed], "-", lw=0.8)
        ax.plot(eta.real, eta.imag, ".", ms=2)
    ax.set_aspect("equal")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
