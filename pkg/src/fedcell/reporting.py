"""Result persistence: per-round CSV, per-strategy summary CSV, and the run
manifest. Floats are serialized with 6 significant digits; column orders
are fixed so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_from_dict, config_to_dict

ROUND_COLUMNS = (
    "strategy",
    "seed",
    "round",
    "n_selected",
    "n_stragglers_selected",
    "penalty_s",
    "train_s",
    "total_s",
    "accuracy",
    "macro_f1",
)

SUMMARY_COLUMNS = (
    "strategy",
    "n_seeds",
    "rounds",
    "final_accuracy_mean",
    "final_accuracy_std",
    "final_macro_f1_mean",
    "final_macro_f1_std",
    "total_seconds_mean",
    "total_seconds_std",
    "stragglers_selected_mean",
    "stragglers_selected_std",
)

_INT_COLUMNS = {"seed", "round", "n_selected", "n_stragglers_selected", "n_seeds", "rounds"}


def fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def records_to_rows(records) -> list[dict]:
    """Flatten RoundRecords into plain dicts keyed by ROUND_COLUMNS."""
    rows = []
    for r in records:
        rows.append(
            {
                "strategy": r.strategy,
                "seed": r.seed,
                "round": r.round_index,
                "n_selected": len(r.selected),
                "n_stragglers_selected": r.timing.stragglers_selected,
                "penalty_s": r.timing.penalty_seconds,
                "train_s": r.timing.train_seconds,
                "total_s": r.timing.total_seconds,
                "accuracy": r.metrics.accuracy,
                "macro_f1": r.metrics.macro_f1,
            }
        )
    return rows


def write_rounds_csv(rows: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ROUND_COLUMNS)
        for row in rows:
            writer.writerow([fmt(row[c]) for c in ROUND_COLUMNS])


def load_rounds_csv(path: str | Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for raw in csv.DictReader(f):
            row = {}
            for key, value in raw.items():
                if key == "strategy":
                    row[key] = value
                elif key in _INT_COLUMNS:
                    row[key] = int(value)
                else:
                    row[key] = float(value)
            rows.append(row)
    return rows


@dataclass(frozen=True)
class SummaryRow:
    """Across-seed aggregate for one strategy (mean and population std)."""

    strategy: str
    n_seeds: int
    rounds: int
    final_accuracy_mean: float
    final_accuracy_std: float
    final_macro_f1_mean: float
    final_macro_f1_std: float
    total_seconds_mean: float
    total_seconds_std: float
    stragglers_selected_mean: float
    stragglers_selected_std: float


def per_seed_totals(rows: list[dict]) -> dict[tuple[str, int], dict[str, float]]:
    """Per (strategy, seed): summed seconds/stragglers plus final-round metrics."""
    totals: dict[tuple[str, int], dict[str, float]] = {}
    for row in rows:
        t = totals.setdefault(
            (row["strategy"], row["seed"]),
            {
                "total_seconds": 0.0,
                "stragglers": 0.0,
                "final_accuracy": 0.0,
                "final_macro_f1": 0.0,
                "last_round": 0,
            },
        )
        t["total_seconds"] += row["total_s"]
        t["stragglers"] += row["n_stragglers_selected"]
        if row["round"] > t["last_round"]:
            t["last_round"] = row["round"]
            t["final_accuracy"] = row["accuracy"]
            t["final_macro_f1"] = row["macro_f1"]
    return totals


def summarize_rows(rows: list[dict]) -> list[SummaryRow]:
    totals = per_seed_totals(rows)
    seen: list[str] = []
    for row in rows:
        if row["strategy"] not in seen:
            seen.append(row["strategy"])
    out = []
    for strategy in seen:
        per_seed = [v for (s, _), v in sorted(totals.items()) if s == strategy]

        def _agg(key: str) -> tuple[float, float]:
            vals = np.array([v[key] for v in per_seed], dtype=np.float64)
            return float(vals.mean()), float(vals.std())

        acc, f1 = _agg("final_accuracy"), _agg("final_macro_f1")
        secs, strag = _agg("total_seconds"), _agg("stragglers")
        out.append(
            SummaryRow(
                strategy=strategy,
                n_seeds=len(per_seed),
                rounds=int(max(v["last_round"] for v in per_seed)),
                final_accuracy_mean=acc[0],
                final_accuracy_std=acc[1],
                final_macro_f1_mean=f1[0],
                final_macro_f1_std=f1[1],
                total_seconds_mean=secs[0],
                total_seconds_std=secs[1],
                stragglers_selected_mean=strag[0],
                stragglers_selected_std=strag[1],
            )
        )
    return out


def write_summary_csv(summary: list[SummaryRow], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary:
            writer.writerow([fmt(getattr(row, c)) for c in SUMMARY_COLUMNS])


def write_manifest(config: ExperimentConfig, path: Path) -> None:
    manifest = {
        "code_version": __version__,
        "seeds": list(config.seeds),
        "strategies": list(config.strategies),
        "config": config_to_dict(config),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_manifest_config(path: str | Path) -> ExperimentConfig:
    """Rebuild the exact configuration a manifest records."""
    with open(path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    return config_from_dict(manifest["config"])


def export_results(records, summary, config: ExperimentConfig, output_dir: str | Path) -> dict[str, Path]:
    """Write rounds.csv, summary.csv and manifest.json under output_dir."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = {
        "rounds": out / "rounds.csv",
        "summary": out / "summary.csv",
        "manifest": out / "manifest.json",
    }
    write_rounds_csv(records_to_rows(records), paths["rounds"])
    write_summary_csv(summary, paths["summary"])
    write_manifest(config, paths["manifest"])
    return paths
