"""Straggler identification from throughput congestion and the per-round
execution-time accounting (training time plus straggler penalties).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automaton import ConfigurationError, Coord, round_half_up

PENALTY_MODES = ("per_straggler", "per_round")


@dataclass(frozen=True)
class LatencyParams:
    """Straggler quantile and penalty accounting.

    penalty_mode "per_straggler" charges penalty_seconds for every selected
    straggler; "per_round" charges it once if any straggler was selected.
    sim_seconds_per_sample drives the deterministic simulated-timing mode
    (train seconds = that constant times the selected cells' sample count).
    """

    straggler_frac: float = 0.20
    penalty_seconds: float = 5.0
    penalty_mode: str = "per_straggler"
    sim_seconds_per_sample: float = 0.02

    def __post_init__(self):
        if not (0.0 < self.straggler_frac < 1.0):
            raise ConfigurationError(
                f"straggler_frac must be in (0, 1), got {self.straggler_frac}"
            )
        if self.penalty_seconds < 0:
            raise ConfigurationError("penalty_seconds must be >= 0")
        if self.penalty_mode not in PENALTY_MODES:
            raise ConfigurationError(
                f"penalty_mode must be one of {PENALTY_MODES}, got {self.penalty_mode!r}"
            )
        if self.sim_seconds_per_sample < 0:
            raise ConfigurationError("sim_seconds_per_sample must be >= 0")


@dataclass(frozen=True)
class RoundTiming:
    """Execution-time ledger for one round."""

    straggler_set: frozenset[Coord]
    stragglers_selected: int
    penalty_seconds: float
    train_seconds: float

    @property
    def total_seconds(self) -> float:
        return self.train_seconds + self.penalty_seconds


def flag_stragglers(tc_values: np.ndarray, params: LatencyParams) -> frozenset[Coord]:
    """The round(straggler_frac * K) highest-congestion cells this round.

    Ties break toward the earlier row-major coordinate. Recomputed every
    round; straggler status is not sticky.
    """
    tc = np.asarray(tc_values, dtype=np.float64)
    m = tc.shape[0]
    n_flag = round_half_up(params.straggler_frac * tc.size)
    coords = [(i, j) for i in range(m) for j in range(tc.shape[1])]
    order = sorted(coords, key=lambda ij: (-tc[ij], ij[0], ij[1]))
    return frozenset(order[:n_flag])


def score_round(
    selected: frozenset[Coord],
    stragglers: frozenset[Coord],
    train_seconds: float,
    params: LatencyParams,
) -> RoundTiming:
    """Count selected stragglers and convert them into penalty seconds."""
    hits = len(selected & stragglers)
    if params.penalty_mode == "per_straggler":
        penalty = hits * params.penalty_seconds
    else:
        penalty = params.penalty_seconds if hits > 0 else 0.0
    return RoundTiming(
        straggler_set=stragglers,
        stragglers_selected=hits,
        penalty_seconds=penalty,
        train_seconds=train_seconds,
    )
