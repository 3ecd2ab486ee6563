"""Figure rendering for coverage and running-statistic tables.

The CSV tables remain the primary output; these helpers draw the
matching matplotlib figures next to them. PNGs are written without the
software-version text chunk so repeated runs produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import CoverageRow, RunningRow

_COLORS = {
    "rbm": "#1f77b4",
    "abm": "#d62728",
    "naive": "#2ca02c",
    "bm": "#9467bd",
    "true": "#000000",
}

_STAT_LABELS = {
    "frobenius": "Frobenius norm of the covariance estimate",
    "ess_per_sample": "estimated ESS / (m n)",
}

_PNG_METADATA = {"Software": None}


def _by_estimator(rows):
    order: dict[str, list] = {}
    for row in rows:
        order.setdefault(row.estimator, []).append(row)
    return order


def save_running_plot(rows: list[RunningRow], stat: str, path, title: str | None = None) -> None:
    """Mean +- one standard error of the statistic against n, per estimator."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for name, cells in _by_estimator(rows).items():
        ns = [c.n for c in cells]
        means = [c.mean for c in cells]
        ses = [c.se for c in cells]
        color = _COLORS.get(name, None)
        if name == "true":
            ax.plot(ns, means, color=color, linestyle="--", label="true")
        else:
            ax.plot(ns, means, color=color, marker="o", markersize=3, label=name)
            lo = [m - s for m, s in zip(means, ses)]
            hi = [m + s for m, s in zip(means, ses)]
            ax.fill_between(ns, lo, hi, color=color, alpha=0.2, linewidth=0)
    ax.set_xscale("log")
    ax.set_xlabel("iterations per chain (n)")
    ax.set_ylabel(_STAT_LABELS.get(stat, stat))
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)


def save_coverage_plot(rows: list[CoverageRow], level: float, path, title: str | None = None) -> None:
    """Coverage against n per estimator, with the nominal level marked."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for name, cells in _by_estimator(rows).items():
        ns = [c.n for c in cells]
        cov = [c.coverage for c in cells]
        err = [c.mc_se for c in cells]
        color = _COLORS.get(name, None)
        ax.errorbar(ns, cov, yerr=err, color=color, marker="o", markersize=3, capsize=2, label=name)
    ax.axhline(level, color="#666666", linestyle=":", linewidth=1, label=f"nominal {level:g}")
    ax.set_xscale("log")
    ax.set_ylim(0.0, 1.02)
    ax.set_xlabel("iterations per chain (n)")
    ax.set_ylabel("coverage")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
