"""Figures rendered next to the CSV output: metric curves per round,
execution-time totals, and straggler selections, one line/bar per strategy.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_COLORS = {"ca_cs": "tab:blue", "random": "tab:orange"}


def _per_round_mean(rows: list[dict], strategy: str, column: str) -> tuple[np.ndarray, np.ndarray]:
    by_round: dict[int, list[float]] = {}
    for row in rows:
        if row["strategy"] == strategy:
            by_round.setdefault(row["round"], []).append(row[column])
    rounds = np.array(sorted(by_round), dtype=np.int64)
    means = np.array([np.mean(by_round[r]) for r in rounds])
    return rounds, means


def _strategies(rows: list[dict]) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row["strategy"] not in seen:
            seen.append(row["strategy"])
    return seen


def render_figures(rows: list[dict], output_dir: str | Path) -> list[Path]:
    """Render the standard report figures from rounds.csv rows.

    Returns the written file paths: metric curves (accuracy and macro-F1
    vs round), mean total execution time, and cumulative stragglers
    selected per round, each averaged over seeds.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    strategies = _strategies(rows)
    written: list[Path] = []

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharex=True)
    for strategy in strategies:
        color = _COLORS.get(strategy)
        for ax, column, label in zip(axes, ("accuracy", "macro_f1"), ("Accuracy", "Macro F1")):
            rounds, means = _per_round_mean(rows, strategy, column)
            ax.plot(rounds, means, label=strategy, color=color, marker="o", markersize=3)
            ax.set_xlabel("Round")
            ax.set_ylabel(label)
            ax.grid(True, alpha=0.3)
    axes[0].legend()
    fig.suptitle("Global model quality per round (mean over seeds)")
    fig.tight_layout()
    path = out / "metrics_per_round.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    totals = []
    stds = []
    for strategy in strategies:
        per_seed: dict[int, float] = {}
        for row in rows:
            if row["strategy"] == strategy:
                per_seed[row["seed"]] = per_seed.get(row["seed"], 0.0) + row["total_s"]
        values = np.array(list(per_seed.values()))
        totals.append(values.mean())
        stds.append(values.std())
    bars = ax.bar(
        strategies, totals, yerr=stds, capsize=4,
        color=[_COLORS.get(s, "tab:gray") for s in strategies],
    )
    ax.bar_label(bars, fmt="%.1f")
    ax.set_ylabel("Total execution time (s)")
    ax.set_title("Execution time per strategy (mean over seeds)")
    fig.tight_layout()
    path = out / "execution_time.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for strategy in strategies:
        rounds, means = _per_round_mean(rows, strategy, "n_stragglers_selected")
        ax.plot(rounds, np.cumsum(means), label=strategy, color=_COLORS.get(strategy), marker="o", markersize=3)
    ax.set_xlabel("Round")
    ax.set_ylabel("Cumulative stragglers selected")
    ax.set_title("Straggler selections (mean over seeds)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = out / "stragglers.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    return written
