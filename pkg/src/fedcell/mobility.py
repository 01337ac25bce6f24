"""Vehicles moving between grid cells, accumulating data shards, and the
per-cell measurements (sample quantity, inbound samples, class dispersion)
that feed the automaton each timestep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automaton import ConfigurationError, Coord, round_half_up


@dataclass
class Vehicle:
    """A mobile data holder assigned to one grid cell.

    The shard is an append-only list of distinct sample indices into the
    global training set; it only ever grows.
    """

    id: int
    cell: Coord
    shard: list[int]


@dataclass(frozen=True)
class MobilityParams:
    """Population size, churn, and data-arrival knobs.

    arrival_shard_size=None means "same as the initial per-vehicle shard
    size", resolved when the population is created. initial_frac is the
    share of the training pool dealt out at t=0; the rest feeds arrivals.
    """

    n_vehicles: int = 100
    move_frac: float = 0.2
    arrival_shard_size: int | None = None
    initial_frac: float = 0.5

    def __post_init__(self):
        if self.n_vehicles < 1:
            raise ConfigurationError(f"n_vehicles must be >= 1, got {self.n_vehicles}")
        if not (0.0 <= self.move_frac <= 1.0):
            raise ConfigurationError(f"move_frac must be in [0, 1], got {self.move_frac}")
        if self.arrival_shard_size is not None and self.arrival_shard_size < 1:
            raise ConfigurationError("arrival_shard_size must be >= 1 when set")
        if not (0.0 < self.initial_frac <= 1.0):
            raise ConfigurationError(f"initial_frac must be in (0, 1], got {self.initial_frac}")


@dataclass(frozen=True)
class CellMeasurement:
    """What a base station reports for its cell at one timestep."""

    sq: int
    is_: int
    dq: float


@dataclass
class MobilityStep:
    """Log of one mobility timestep.

    arrivals maps a cell to every sample index carried into it this step
    by relocating vehicles (their full shards, post-grant). granted maps a
    vehicle id to the indices newly added to its shard; conservation
    accounting sums these. fallback_draws counts grant draws made with
    replacement after the undistributed pool ran dry.
    """

    moved: list[int] = field(default_factory=list)
    arrivals: dict[Coord, list[int]] = field(default_factory=dict)
    granted: dict[int, list[int]] = field(default_factory=dict)
    fallback_draws: int = 0


def init_population(
    n_vehicles: int,
    grid_m: int,
    pool: list[int],
    rng: np.random.Generator,
    initial_frac: float = 0.5,
) -> tuple[list[Vehicle], list[int]]:
    """Place vehicles uniformly on the grid and deal out initial shards.

    A fraction initial_frac of the (shuffled) pool is split into
    equal-size shards, one per vehicle; the unused remainder is returned
    as the arrival pool, ordered ready for sequential draws.
    """
    if n_vehicles < 1:
        raise ConfigurationError("need at least one vehicle")
    shuffled = [int(i) for i in rng.permutation(np.asarray(pool, dtype=np.int64))]
    n_initial = int(len(shuffled) * initial_frac)
    per_vehicle = n_initial // n_vehicles
    if per_vehicle < 1:
        raise ConfigurationError(
            f"initial pool of {n_initial} samples cannot give {n_vehicles} vehicles >= 1 sample each"
        )
    flat_cells = rng.integers(0, grid_m * grid_m, size=n_vehicles)
    vehicles = []
    for v in range(n_vehicles):
        shard = shuffled[v * per_vehicle : (v + 1) * per_vehicle]
        vehicles.append(Vehicle(id=v, cell=divmod(int(flat_cells[v]), grid_m), shard=shard))
    arrival_pool = shuffled[n_vehicles * per_vehicle :]
    return vehicles, arrival_pool


def step_mobility(
    vehicles: list[Vehicle],
    params: MobilityParams,
    pool: list[int],
    rng: np.random.Generator,
    grid_m: int,
    arrival_shard_size: int,
    n_total_samples: int,
) -> tuple[list[Vehicle], MobilityStep]:
    """Relocate a random subset of vehicles and grant each mover new data.

    Movers are drawn uniformly without replacement; each goes to a uniform
    cell different from its current one and receives arrival_shard_size
    sample indices, taken from `pool` while it lasts and drawn with
    replacement from the full training range afterwards. Duplicate draws
    already in a mover's shard are dropped. Non-movers are untouched.
    `pool` is consumed in place. Returns the new vehicle list and the log.
    """
    n = len(vehicles)
    n_move = round_half_up(params.move_frac * n)
    step = MobilityStep()
    new_vehicles = [Vehicle(v.id, v.cell, v.shard) for v in vehicles]
    if n_move == 0:
        return new_vehicles, step

    if grid_m * grid_m < 2:
        raise ConfigurationError("cannot relocate vehicles on a 1-cell grid")

    mover_ids = sorted(int(i) for i in rng.choice(n, size=n_move, replace=False))
    step.moved = mover_ids
    k = grid_m * grid_m
    for vid in mover_ids:
        v = new_vehicles[vid]
        cur_flat = v.cell[0] * grid_m + v.cell[1]
        # Uniform over the k-1 other cells: draw in [0, k-1) and skip past current.
        draw = int(rng.integers(0, k - 1))
        if draw >= cur_flat:
            draw += 1
        v.cell = divmod(draw, grid_m)

        v.shard = list(v.shard)  # movers get a private copy; input vehicles stay intact
        held = set(v.shard)
        added: list[int] = []
        for _ in range(arrival_shard_size):
            if pool:
                idx = pool.pop()
            else:
                idx = int(rng.integers(0, n_total_samples))
                step.fallback_draws += 1
            if idx not in held:
                held.add(idx)
                added.append(idx)
                v.shard.append(idx)
        step.granted[vid] = added
        step.arrivals.setdefault(v.cell, []).extend(v.shard)
    return new_vehicles, step


def measure_cells(
    vehicles: list[Vehicle],
    arrivals: dict[Coord, list[int]],
    labels: np.ndarray,
    grid_m: int,
    n_classes: int,
) -> list[list[CellMeasurement]]:
    """Per-cell base-station report for the current timestep.

    sq sums the shard sizes of the cell's vehicles, is_ counts the samples
    that landed there this step, and dq is the population stddev of the
    cell's per-class sample counts (over the concatenation of its
    vehicles' shards). An empty cell reports (0, 0, 0.0).
    """
    by_cell: dict[Coord, list[int]] = {}
    for v in vehicles:
        by_cell.setdefault(v.cell, []).extend(v.shard)

    out: list[list[CellMeasurement]] = []
    for i in range(grid_m):
        row = []
        for j in range(grid_m):
            held = by_cell.get((i, j), [])
            if held:
                hist = np.bincount(labels[held], minlength=n_classes)
                dq = float(np.std(hist))
            else:
                dq = 0.0
            row.append(
                CellMeasurement(sq=len(held), is_=len(arrivals.get((i, j), [])), dq=dq)
            )
        out.append(row)
    return out


def total_shard_size(vehicles: list[Vehicle]) -> int:
    return sum(len(v.shard) for v in vehicles)
