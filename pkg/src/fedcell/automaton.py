"""Cellular automaton over the base-station grid: state, update rules, scoring,
and the two client-selection strategies (score-based and uniform random).

Cell update rules treat out-of-grid neighbors as contributing zero (a city
edge has no base stations beyond it). All grid operations are pure: they
take a grid and return a new one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

Coord = tuple[int, int]


class ConfigurationError(ValueError):
    """Raised for parameter combinations the simulator cannot honor."""


@dataclass(frozen=True)
class CellState:
    """State tuple of one grid cell.

    pf        -- participation flag for the most recent round (0 or 1)
    sq        -- samples registered at this cell's base station
    npc       -- consecutive rounds the cell has not been selected
    is_       -- samples that newly arrived at this cell this timestep
    tc        -- throughput congestion, in sample-count units
    cc        -- computational capacity, in sample-count units
    dq        -- dispersion (population stddev) of the cell's class histogram
    """

    pf: int = 0
    sq: int = 0
    npc: int = 0
    is_: int = 0
    tc: float = 0.0
    cc: float = 0.0
    dq: float = 0.0

    def __post_init__(self):
        if self.pf not in (0, 1):
            raise ValueError(f"pf must be 0 or 1, got {self.pf}")
        if self.sq < 0 or self.npc < 0 or self.is_ < 0:
            raise ValueError("sq, npc and is_ must be non-negative")
        if self.tc < 0 or self.cc < 0 or self.dq < 0:
            raise ValueError("tc, cc and dq must be non-negative")


@dataclass(frozen=True)
class CaParams:
    """Weights and knobs of the scoring rule and top-fraction selection.

    alpha, beta, gamma weight the freshness ratio, the non-participation
    counter, and the inverse class-dispersion term. e and m_w weight the
    orthogonal and diagonal neighbor congestion contributions; orthogonal
    neighbors must weigh at least as much as diagonals. c_frac is the
    fraction of cells selected each round. eps_dq and eps_tc bound the
    divisors of the score away from zero.
    """

    alpha: float = 0.33
    beta: float = 0.33
    gamma: float = 0.33
    e: float = 0.5
    m_w: float = 0.25
    c_frac: float = 0.40
    eps_dq: float = 1e-6
    eps_tc: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "e", "m_w"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative")
        if not (0.0 < self.c_frac <= 1.0):
            raise ConfigurationError(f"c_frac must be in (0, 1], got {self.c_frac}")
        if self.e < self.m_w:
            raise ConfigurationError(
                f"orthogonal neighbor weight e={self.e} must be >= diagonal weight m_w={self.m_w}"
            )
        if self.eps_dq <= 0 or self.eps_tc <= 0:
            raise ConfigurationError("eps_dq and eps_tc must be positive")


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one selection round.

    selected is the set of chosen cell coordinates; scores maps every cell
    to its output score for the score-based strategy and is empty for the
    random baseline.
    """

    selected: frozenset[Coord]
    scores: dict[Coord, float] = field(default_factory=dict)

    def selected_sorted(self) -> list[Coord]:
        return sorted(self.selected)


class Grid:
    """M x M lattice of cell states, stored as one array per field.

    Mutating constructors (`with_*`) return new grids; callers treat
    instances as immutable snapshots.
    """

    FIELDS = ("pf", "sq", "npc", "is_", "tc", "cc", "dq")

    def __init__(self, m: int, pf=None, sq=None, npc=None, is_=None, tc=None, cc=None, dq=None):
        if m < 1:
            raise ConfigurationError(f"grid side length must be >= 1, got {m}")
        self.m = m
        shape = (m, m)

        def _int_field(v):
            a = np.zeros(shape, dtype=np.int64) if v is None else np.array(v, dtype=np.int64)
            if a.shape != shape:
                raise ValueError(f"expected shape {shape}, got {a.shape}")
            return a

        def _float_field(v):
            a = np.zeros(shape, dtype=np.float64) if v is None else np.array(v, dtype=np.float64)
            if a.shape != shape:
                raise ValueError(f"expected shape {shape}, got {a.shape}")
            return a

        self.pf = _int_field(pf)
        self.sq = _int_field(sq)
        self.npc = _int_field(npc)
        self.is_ = _int_field(is_)
        self.tc = _float_field(tc)
        self.cc = _float_field(cc)
        self.dq = _float_field(dq)

    @property
    def k(self) -> int:
        """Total number of cells."""
        return self.m * self.m

    def cell(self, i: int, j: int) -> CellState:
        return CellState(
            pf=int(self.pf[i, j]),
            sq=int(self.sq[i, j]),
            npc=int(self.npc[i, j]),
            is_=int(self.is_[i, j]),
            tc=float(self.tc[i, j]),
            cc=float(self.cc[i, j]),
            dq=float(self.dq[i, j]),
        )

    def coords(self) -> list[Coord]:
        """All cell coordinates in row-major order."""
        return [(i, j) for i in range(self.m) for j in range(self.m)]

    def copy(self, **overrides) -> "Grid":
        kwargs = {name: overrides.get(name, getattr(self, name)).copy() for name in self.FIELDS}
        return Grid(self.m, **kwargs)

    @classmethod
    def from_cells(cls, cells: list[list[CellState]]) -> "Grid":
        m = len(cells)
        g = cls(m)
        for i in range(m):
            if len(cells[i]) != m:
                raise ValueError("cell rows must all have length m")
            for j in range(m):
                c = cells[i][j]
                g.pf[i, j] = c.pf
                g.sq[i, j] = c.sq
                g.npc[i, j] = c.npc
                g.is_[i, j] = c.is_
                g.tc[i, j] = c.tc
                g.cc[i, j] = c.cc
                g.dq[i, j] = c.dq
        return g


def round_half_up(x: float) -> int:
    """Round to nearest integer with halves going up (platform independent)."""
    return int(math.floor(x + 0.5))


def selection_count(c_frac: float, k: int) -> int:
    """Number of cells a fraction c_frac of k cells selects (>= 1)."""
    n = round_half_up(c_frac * k)
    if n > k:
        raise ConfigurationError(f"cannot select {n} of {k} cells")
    return max(1, n)


def update_npc(grid: Grid) -> Grid:
    """Reset the non-participation counter on last round's participants,
    increment it everywhere else."""
    new_npc = np.where(grid.pf == 1, 0, grid.npc + 1)
    return grid.copy(npc=new_npc)


def update_cc(grid: Grid, rng: np.random.Generator) -> Grid:
    """Redraw computational capacity as d * sq with d uniform on [0, 1].

    One draw per cell, consumed from `rng` in row-major order.
    """
    d = rng.random(size=(grid.m, grid.m))
    return grid.copy(cc=d * grid.sq)


def update_tc(grid: Grid, params: CaParams) -> Grid:
    """Recompute throughput congestion from the current pf/sq snapshot.

    tc(i,j) = pf*sq at (i,j)
              + e   * sum of pf*sq over the 4 orthogonal neighbors
              + m_w * sum of pf*sq over the 4 diagonal neighbors,
    with out-of-grid neighbors contributing zero.
    """
    load = (grid.pf * grid.sq).astype(np.float64)
    p = np.pad(load, 1, mode="constant", constant_values=0.0)
    orth = p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]
    diag = p[:-2, :-2] + p[:-2, 2:] + p[2:, :-2] + p[2:, 2:]
    return grid.copy(tc=load + params.e * orth + params.m_w * diag)


def cell_score(cell: CellState, params: CaParams) -> float:
    """Output score of one cell.

    (alpha * is_/sq + beta * npc + gamma / dq) * cc / tc, with is_/sq := 0
    for an empty cell and dq, tc clamped below by their eps guards.
    """
    freshness = cell.is_ / cell.sq if cell.sq > 0 else 0.0
    numerator = (
        params.alpha * freshness
        + params.beta * cell.npc
        + params.gamma / max(cell.dq, params.eps_dq)
    )
    return numerator * cell.cc / max(cell.tc, params.eps_tc)


def score_grid(grid: Grid, params: CaParams) -> np.ndarray:
    """Score every cell; returns an m x m float array."""
    out = np.zeros((grid.m, grid.m), dtype=np.float64)
    for i in range(grid.m):
        for j in range(grid.m):
            out[i, j] = cell_score(grid.cell(i, j), params)
    return out


def select_ca(grid: Grid, params: CaParams) -> SelectionResult:
    """Pick the round(c_frac * K) cells with the highest scores.

    Ties break toward the earlier row-major coordinate. Scores for all
    cells are returned alongside the selection.
    """
    n = selection_count(params.c_frac, grid.k)
    scores = score_grid(grid, params)
    order = sorted(grid.coords(), key=lambda ij: (-scores[ij], ij[0], ij[1]))
    selected = frozenset(order[:n])
    return SelectionResult(
        selected=selected,
        scores={ij: float(scores[ij]) for ij in grid.coords()},
    )


def sample_cells(k: int, n: int, rng: np.random.Generator) -> list[int]:
    """n distinct indices drawn uniformly without replacement from range(k)."""
    if not 1 <= n <= k:
        raise ConfigurationError(f"cannot draw {n} distinct items from {k}")
    return [int(i) for i in rng.choice(k, size=n, replace=False)]


def select_random(grid_m: int, n: int, rng: np.random.Generator) -> SelectionResult:
    """Uniform-random baseline: n distinct cells, no scores."""
    flat = sample_cells(grid_m * grid_m, n, rng)
    return SelectionResult(selected=frozenset(divmod(f, grid_m) for f in flat))


def apply_selection(grid: Grid, selected: frozenset[Coord]) -> Grid:
    """Set pf=1 on the selected cells and pf=0 everywhere else."""
    pf = np.zeros((grid.m, grid.m), dtype=np.int64)
    for i, j in selected:
        if not (0 <= i < grid.m and 0 <= j < grid.m):
            raise ValueError(f"selected coordinate {(i, j)} outside {grid.m}x{grid.m} grid")
        pf[i, j] = 1
    return grid.copy(pf=pf)
