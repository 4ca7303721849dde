"""Static SVG figures for the report command.

Figures are written with the Agg backend, text kept as SVG text, a fixed
hash salt and no date metadata, so identical inputs give identical files.
"""

from __future__ import annotations

import math
from contextlib import contextmanager

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "thinsets",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 100,
}


@contextmanager
def _figure(path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        try:
            yield fig, ax
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)


def count_band(N, counts, sigmas, path, title="count vs expected count"):
    """Observed ``|Lambda ∩ [1, N]|`` against the band ``[sigma/2, 2 sigma]``."""
    N = np.asarray(N, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    with _figure(path) as (fig, ax):
        ax.fill_between(N, s / 2, 2 * s, color="0.85", label=r"$[\sigma_N/2,\ 2\sigma_N]$")
        ax.plot(N, s, color="0.4", ls="--", label=r"$\sigma_N$")
        ax.plot(N, counts, "o-", ms=3, color="C0", label="count")
        ax.set_xscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel("elements up to N")
        ax.set_title(title)
        ax.legend()


def weyl_decay(series: dict, path, title="Weyl averages"):
    """``|A_N(t)|`` against ``N``; ``series`` maps a label to ``(N, abs values)``."""
    with _figure(path) as (fig, ax):
        for i, (label, (N, v)) in enumerate(sorted(series.items())):
            ax.plot(N, v, lw=0.9, color=f"C{i % 10}", label=label if i < 6 else None)
        ax.set_xscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel(r"$|A_N(t)|$")
        ax.set_ylim(bottom=0)
        ax.set_title(title)
        if series:
            ax.legend(ncol=2)


def mesh_fit(N, counts, beta, C, path, title="growth of the counting function"):
    """Counts against ``log N`` on log-log axes with the fitted ``C (log N)^beta``."""
    L = np.log(np.asarray(N, dtype=float))
    with _figure(path) as (fig, ax):
        ax.loglog(L, counts, "o", ms=3, color="C0", label="count")
        if np.isfinite(beta):
            ax.loglog(L, C * L**beta, color="C3", label=rf"$C(\log N)^{{{beta:.3f}}}$")
        ax.set_xlabel(r"$\log N$")
        ax.set_ylabel("elements up to N")
        ax.set_title(title)
        ax.legend()


def lambda_q(q, Cq, path, exponent=float("nan"), title=r"$C_q$ lower estimates"):
    with _figure(path) as (fig, ax):
        ax.loglog(q, Cq, "o-", ms=3, color="C0", label="estimate")
        q = np.asarray(q, dtype=float)
        ax.loglog(q, np.sqrt(q / q[0]) * Cq[0], ls=":", color="0.5", label=r"$\propto\sqrt{q}$")
        if math.isfinite(exponent):
            ax.set_title(f"{title}, slope {exponent:.3f}")
        else:
            ax.set_title(title)
        ax.set_xlabel("q")
        ax.set_ylabel(r"$C_q$")
        ax.legend()


def bound_bars(labels, empirical, analytic, stderr, path, title="empirical vs analytic"):
    """Paired bars (log scale); values <= 0 are drawn at the axis floor."""
    emp = np.asarray(empirical, dtype=float)
    ana = np.asarray(analytic, dtype=float)
    err = np.nan_to_num(np.asarray(stderr, dtype=float))
    pos = np.concatenate([emp[emp > 0], ana[ana > 0]])
    floor = 10 ** math.floor(math.log10(pos.min())) / 10 if pos.size else 1e-6
    x = np.arange(len(labels))
    with _figure(path) as (fig, ax):
        fig.set_size_inches(max(5.0, 0.45 * len(labels) + 1.5), 3.6)
        ax.bar(x - 0.2, np.where(emp > 0, emp, floor), 0.4, yerr=3 * err, color="C0", label="empirical (+-3 se)")
        ax.bar(x + 0.2, np.where(ana > 0, ana, floor), 0.4, color="C1", label="analytic")
        ax.set_yscale("log")
        ax.set_ylim(bottom=floor)
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
        ax.set_title(title)
        ax.legend()
