"""Render sweep CSVs to figure files next to the delimited output.

Series carry gids ("series-empirical", "series-analytic") so the emitted
SVG can be inspected for the expected curves.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import METRIC_COLUMN, TrialRecord


def analytic_overlay(experiment: str, grid: list[int]) -> list[float] | None:
    """Closed-form mean-query curve for experiments that have one.

    For the double star, success within q probes has probability
    q / (n/2 - 1), so the mean number of probes is the mean of a uniform
    draw over the n/2 - 1 leaves: (n/2) / 2.
    """
    if experiment == "double-star":
        return [(n // 2) / 2.0 for n in grid]
    return None


def plot_sweep(records: list[TrialRecord], out_path) -> None:
    """Mean primary metric vs n on log-log axes, with overlay where defined."""
    if not records:
        raise ValueError("no records to plot")
    experiment = records[0].experiment
    metric = METRIC_COLUMN[experiment]
    grid = sorted({r.n for r in records})
    means = []
    for n in grid:
        vals = [getattr(r, metric) for r in records if r.n == n]
        means.append(float(np.mean(vals)))
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    line, = ax.plot(grid, means, "o-", label=f"mean {metric}")
    line.set_gid("series-empirical")
    overlay = analytic_overlay(experiment, grid)
    if overlay is not None:
        oline, = ax.plot(grid, overlay, "--", label="analytic")
        oline.set_gid("series-analytic")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(metric)
    ax.set_title(experiment)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
