"""The per-round simulation loop binding mobility, the automaton, local
training, aggregation and latency accounting, plus the seed-sweep runner.

Every run owns independent random streams derived from (seed, purpose), so
the environment (mobility, capacity draws) is bit-identical across the two
selection strategies for the same seed, and runs never share state.
"""

from __future__ import annotations

import logging
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .automaton import (
    Coord,
    Grid,
    apply_selection,
    select_ca,
    select_random,
    selection_count,
    update_cc,
    update_npc,
    update_tc,
)
from .config import DatasetConfig, ExperimentConfig
from .data import Dataset, load_idx_pairs, split_train_test, synth_dataset
from .latency import RoundTiming, flag_stragglers, score_round
from .metrics import EvalMetrics, evaluate
from .mobility import (
    CellMeasurement,
    Vehicle,
    init_population,
    measure_cells,
    step_mobility,
    total_shard_size,
)
from .training import ModelParams, fedavg, make_model, train_local

logger = logging.getLogger(__name__)

# Stream purposes; each (seed, purpose[, round, i, j]) pair seeds one generator.
_DATASET, _PLACEMENT, _MOBILITY, _CAPACITY, _SELECTION, _MODEL_INIT, _TRAINING = range(7)


def derive_rng(seed: int, purpose: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, purpose, *extra]))


@dataclass
class RoundRecord:
    """Everything logged about one completed round."""

    strategy: str
    seed: int
    round_index: int
    selected: list[Coord]
    score_min: float | None
    score_median: float | None
    score_max: float | None
    timing: RoundTiming
    metrics: EvalMetrics
    n_trained: int
    degenerate: bool


@dataclass
class SimulationState:
    config: ExperimentConfig
    strategy: str
    seed: int
    train: Dataset
    test: Dataset
    vehicles: list[Vehicle]
    pool: list[int]
    grid: Grid
    global_params: ModelParams
    arrival_shard_size: int
    mobility_rng: np.random.Generator
    capacity_rng: np.random.Generator
    selection_rng: np.random.Generator
    round_index: int = 0
    expected_samples: int = field(init=False, default=0)

    def __post_init__(self):
        self.expected_samples = total_shard_size(self.vehicles)


def build_dataset(spec: DatasetConfig, rng: np.random.Generator) -> Dataset:
    if spec.kind == "synthetic":
        return synth_dataset(
            spec.n_samples, spec.n_features, spec.n_classes, rng, class_sep=spec.class_sep
        )
    return load_idx_pairs(list(zip(spec.images, spec.labels)))


def init_simulation(
    config: ExperimentConfig, strategy: str, seed: int, data: Dataset | None = None
) -> SimulationState:
    """Fresh simulation state for one (strategy, seed) run.

    `data` short-circuits dataset construction (used to load IDX files once
    per sweep); the train/test split is still drawn per seed.
    """
    data_rng = derive_rng(seed, _DATASET)
    if data is None:
        data = build_dataset(config.dataset, data_rng)
    train, test = split_train_test(data, config.test_frac, data_rng)

    placement_rng = derive_rng(seed, _PLACEMENT)
    vehicles, pool = init_population(
        config.n_vehicles,
        config.grid_m,
        list(range(len(train))),
        placement_rng,
        initial_frac=config.mobility.initial_frac,
    )
    arrival_shard_size = config.mobility.arrival_shard_size or len(vehicles[0].shard)

    model = make_model(config.trainer, train.n_features, train.n_classes)
    global_params = model.init_params(derive_rng(seed, _MODEL_INIT))

    return SimulationState(
        config=config,
        strategy=strategy,
        seed=seed,
        train=train,
        test=test,
        vehicles=vehicles,
        pool=pool,
        grid=Grid(config.grid_m),
        global_params=global_params,
        arrival_shard_size=arrival_shard_size,
        mobility_rng=derive_rng(seed, _MOBILITY),
        capacity_rng=derive_rng(seed, _CAPACITY),
        selection_rng=derive_rng(seed, _SELECTION),
    )


def apply_measurements(grid: Grid, measurements: list[list[CellMeasurement]]) -> Grid:
    sq = np.array([[c.sq for c in row] for row in measurements], dtype=np.int64)
    is_ = np.array([[c.is_ for c in row] for row in measurements], dtype=np.int64)
    dq = np.array([[c.dq for c in row] for row in measurements], dtype=np.float64)
    return grid.copy(sq=sq, is_=is_, dq=dq)


def cell_shard_indices(vehicles: list[Vehicle], cell: Coord) -> list[int]:
    """Distinct training-set indices held by a cell's vehicles, sorted."""
    merged: set[int] = set()
    for v in vehicles:
        if v.cell == cell:
            merged.update(v.shard)
    return sorted(merged)


def run_round(state: SimulationState) -> RoundRecord:
    """Advance the simulation one round (mutates state) and log it.

    Order: mobility, measurement, automaton updates from the previous
    snapshot, selection, straggler flags, local training on the selected
    non-empty cells, aggregation, evaluation.
    """
    config = state.config
    state.round_index += 1
    rnd = state.round_index

    state.vehicles, step = step_mobility(
        state.vehicles,
        config.mobility,
        state.pool,
        state.mobility_rng,
        config.grid_m,
        state.arrival_shard_size,
        len(state.train),
    )
    state.expected_samples += sum(len(added) for added in step.granted.values())
    actual = total_shard_size(state.vehicles)
    if actual != state.expected_samples:
        raise RuntimeError(
            f"sample conservation violated at round {rnd}: "
            f"{actual} held vs {state.expected_samples} accounted"
        )

    measurements = measure_cells(
        state.vehicles, step.arrivals, state.train.labels, config.grid_m, state.train.n_classes
    )

    # Congestion and the non-participation counter read the previous round's
    # flags and sample counts; capacity is redrawn against the new counts.
    grid = update_tc(state.grid, config.ca)
    grid = update_npc(grid)
    grid = apply_measurements(grid, measurements)
    grid = update_cc(grid, state.capacity_rng)

    if state.strategy == "ca_cs":
        selection = select_ca(grid, config.ca)
    else:
        n = selection_count(config.ca.c_frac, grid.k)
        selection = select_random(config.grid_m, n, state.selection_rng)
    grid = apply_selection(grid, selection.selected)
    state.grid = grid

    stragglers = flag_stragglers(grid.tc, config.latency)

    wall_start = time.perf_counter()
    updates: list[tuple[ModelParams, float]] = []
    for i, j in sorted(selection.selected):
        indices = cell_shard_indices(state.vehicles, (i, j))
        if not indices:
            logger.info(
                "round %d (%s, seed %d): selected cell (%d, %d) has no samples, skipped",
                rnd, state.strategy, state.seed, i, j,
            )
            continue
        shard = state.train.subset(indices)
        rng = derive_rng(state.seed, _TRAINING, rnd, i, j)
        updates.append((train_local(state.global_params, shard, config.trainer, rng), len(indices)))
    degenerate = not updates
    if degenerate:
        logger.warning(
            "round %d (%s, seed %d): every selected cell was empty; model carried over",
            rnd, state.strategy, state.seed,
        )
    else:
        state.global_params = fedavg(updates)
    wall_seconds = time.perf_counter() - wall_start

    if config.timing_mode == "simulated":
        selected_sq = sum(int(grid.sq[i, j]) for i, j in selection.selected)
        train_seconds = config.latency.sim_seconds_per_sample * selected_sq
    else:
        train_seconds = wall_seconds
    timing = score_round(selection.selected, stragglers, train_seconds, config.latency)

    metrics = evaluate(state.global_params, state.test, config.trainer)

    if selection.scores:
        values = sorted(selection.scores.values())
        score_min, score_max = values[0], values[-1]
        score_median = float(statistics.median(values))
    else:
        score_min = score_median = score_max = None

    return RoundRecord(
        strategy=state.strategy,
        seed=state.seed,
        round_index=rnd,
        selected=sorted(selection.selected),
        score_min=score_min,
        score_median=score_median,
        score_max=score_max,
        timing=timing,
        metrics=metrics,
        n_trained=len(updates),
        degenerate=degenerate,
    )


def run_simulation(
    config: ExperimentConfig, strategy: str, seed: int, data: Dataset | None = None
) -> list[RoundRecord]:
    state = init_simulation(config, strategy, seed, data=data)
    return [run_round(state) for _ in range(config.rounds)]


@dataclass
class ResultsBundle:
    config: ExperimentConfig
    records: list[RoundRecord]
    summary: list


def run_experiment(config: ExperimentConfig) -> ResultsBundle:
    """Full sweep: every enabled strategy on every seed, then the summary.

    Mobility and capacity randomness derive from the seed alone, so both
    strategies face the same environment; runs are independent of the
    order they execute in.
    """
    config.validate()
    data: Dataset | None = None
    if config.dataset.kind == "mnist_idx":
        # Load once per sweep; also surfaces unloadable data before any simulation starts.
        data = build_dataset(config.dataset, derive_rng(0, _DATASET))
    records: list[RoundRecord] = []
    for strategy in config.strategies:
        for seed in config.seeds:
            logger.info("running strategy=%s seed=%d", strategy, seed)
            records.extend(run_simulation(config, strategy, seed, data=data))
    from .reporting import records_to_rows, summarize_rows

    return ResultsBundle(
        config=config, records=records, summary=summarize_rows(records_to_rows(records))
    )
