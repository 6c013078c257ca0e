"""Figure rendering for fitted curves and coverage reports.

Companion to the CLI's ``--plot`` flag: writes a matplotlib figure to a
file next to the delimited output.  Uses the Agg backend so it works in
headless environments; the output format follows the file extension.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_fit_figure(path, rows, alpha=0.05, title=None):
    """Render estimate / interval / band columns from CLI output rows."""
    xs = [0.0] + [r.x for r in rows]
    est = [1.0] + [r.estimate for r in rows]
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    ax.step(xs, est, where="post", color="crimson", lw=1.8, label="survival estimate")
    ci_rows = [r for r in rows if r.ci_lo is not None]
    if ci_rows:
        ax.step(
            [r.x for r in ci_rows],
            [r.ci_lo for r in ci_rows],
            where="post",
            color="steelblue",
            lw=1.0,
            ls="--",
            label=f"{100 * (1 - alpha):g}% pointwise CI",
        )
        ax.step(
            [r.x for r in ci_rows],
            [r.ci_hi for r in ci_rows],
            where="post",
            color="steelblue",
            lw=1.0,
            ls="--",
        )
    band_rows = [r for r in rows if r.band_lo is not None]
    if band_rows:
        ax.fill_between(
            [r.x for r in band_rows],
            [r.band_lo for r in band_rows],
            [r.band_hi for r in band_rows],
            step="post",
            color="seagreen",
            alpha=0.25,
            label=f"{100 * (1 - alpha):g}% simultaneous band",
        )
    ax.set_xlabel("time")
    ax.set_ylabel("survival probability")
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_coverage_figure(path, report, alpha=0.05, title=None):
    """Coverage rate and mean interval length against evaluation time."""
    times = [row.time for row in report.per_time]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8.0, 6.5), sharex=True)
    ax1.plot(times, [row.coverage for row in report.per_time], "o-", color="crimson")
    ax1.axhline(1.0 - alpha, color="gray", ls="--", lw=1.0, label="nominal")
    ax1.set_ylabel("coverage")
    ax1.set_ylim(0.0, 1.05)
    ax1.grid(alpha=0.3)
    ax1.legend(loc="lower right")
    ax2.plot(
        times, [row.mean_ci_length for row in report.per_time], "s-", color="steelblue"
    )
    ax2.set_xlabel("time")
    ax2.set_ylabel("mean CI length")
    ax2.grid(alpha=0.3)
    if title:
        ax1.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
