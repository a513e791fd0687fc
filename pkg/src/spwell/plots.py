"""SVG plot emission for sweep reports.

Rendering is pinned for reproducibility: fixed hash salt, no embedded
date, Agg backend.  Re-emitting the same report yields identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["emit_svg"]


def _mpl():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "spwell"
    import matplotlib.pyplot as plt

    return plt


_SAVE_KW = dict(format="svg", metadata={"Date": None})


def plot_single(result, out_dir) -> list[Path]:
    """Potential/density plot for one solve; returns the written paths."""
    plt = _mpl()
    out = Path(out_dir)
    sol = result.solution
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(sol.V.x, sol.V.values, lw=1.2, label="V")
    ax2 = ax.twinx()
    ax2.plot(sol.density.x, sol.density.values, "C1", lw=1.0, label="density")
    ax.set_xlabel("x")
    ax.set_ylabel("potential")
    ax2.set_ylabel("density")
    ax.set_title(f"self-consistent solution, h = {result.params.h:g}")
    ax.grid(True, alpha=0.3)
    p = out / "potential.svg"
    fig.savefig(p, **_SAVE_KW)
    plt.close(fig)
    return [p]


def emit_svg(report, out_dir) -> list[Path]:
    """Write potential.svg, errors.svg and spectrum.svg; returns the paths."""
    plt = _mpl()
    out = Path(out_dir)
    paths = []

    # V^h overlays against the exact tent
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for r in report.rows:
        if r.potential is not None:
            ax.plot(r.potential.x, r.potential.values, lw=1.0, label=f"h = {r.h:g}")
    v0 = report.limit.V0
    xs = np.linspace(0.0, v0.L, 801)
    ax.plot(xs, v0(xs), "k--", lw=1.2, label="limit tent")
    ax.set_xlabel("x")
    ax.set_ylabel("potential")
    ax.set_title("self-consistent potential vs. its limit")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    p = out / "potential.svg"
    fig.savefig(p, **_SAVE_KW)
    plt.close(fig)
    paths.append(p)

    # error metrics, log-log (empirical rates only; no rate is asserted)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ok = [r for r in report.rows if r.flag is None]
    hs = [r.h for r in ok]
    series = [
        ("sup error", [r.sup_err for r in ok]),
        (f"Holder-{report.alpha:g} error", [r.holder_err for r in ok]),
        ("pairing const", [r.pair_const for r in ok]),
        ("pairing x", [r.pair_x for r in ok]),
        ("pairing sin", [r.pair_sin for r in ok]),
    ]
    for label, ys in series:
        if hs:
            ax.loglog(hs, ys, "o-", lw=1.0, ms=4, label=label)
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.set_title("convergence metrics across the sweep")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    p = out / "errors.svg"
    fig.savefig(p, **_SAVE_KW)
    plt.close(fig)
    paths.append(p)

    # occupied spectrum vs the shifted limit levels
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    theta = report.limit.theta
    n_levels = max((r.count_occupied for r in ok), default=0)
    for i in range(1, n_levels + 1):
        pts = [(r.h, r.values[i - 1]) for r in ok if r.count_occupied >= i]
        if pts:
            ax.semilogx([q[0] for q in pts], [q[1] for q in pts], "o-", lw=1.0, ms=4,
                        label=f"eps_{i}^h")
        target = report.limit.reference.e(i) + theta
        ax.axhline(target, color="k", ls="--", lw=0.8)
    ax.set_xlabel("h")
    ax.set_ylabel("energy")
    ax.set_title("occupied levels vs. limit levels e_i + theta (dashed)")
    if n_levels:
        ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    p = out / "spectrum.svg"
    fig.savefig(p, **_SAVE_KW)
    plt.close(fig)
    paths.append(p)
    return paths
