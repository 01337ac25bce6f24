"""Experiment configuration: defaults, YAML loading, overrides, validation.

The config file is a single YAML document whose sections mirror the
parameter dataclasses. CLI flags override individual fields after the
file is loaded.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .automaton import CaParams, ConfigurationError, round_half_up
from .latency import LatencyParams
from .mobility import MobilityParams
from .training import TrainerSpec

STRATEGIES = ("ca_cs", "random")
TIMING_MODES = ("wallclock", "simulated")
DATASET_KINDS = ("synthetic", "mnist_idx")


@dataclass(frozen=True)
class DatasetConfig:
    """Either a synthetic class-blob spec or paths to IDX file pairs."""

    kind: str = "synthetic"
    n_samples: int = 2000
    n_features: int = 32
    n_classes: int = 10
    class_sep: float = 3.0
    images: tuple[str, ...] = ()
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ConfigurationError(
                f"dataset kind must be one of {DATASET_KINDS}, got {self.kind!r}"
            )
        if self.kind == "synthetic":
            if self.n_samples < self.n_classes or self.n_classes < 2 or self.n_features < 1:
                raise ConfigurationError("invalid synthetic dataset dimensions")
        else:
            if not self.images or len(self.images) != len(self.labels):
                raise ConfigurationError(
                    "mnist_idx dataset needs matching images/labels path lists"
                )


@dataclass
class ExperimentConfig:
    grid_m: int = 5
    n_vehicles: int = 100
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    test_frac: float = 0.2
    rounds: int = 20
    trainer: TrainerSpec = field(default_factory=TrainerSpec)
    ca: CaParams = field(default_factory=CaParams)
    mobility: MobilityParams = field(default_factory=MobilityParams)
    latency: LatencyParams = field(default_factory=LatencyParams)
    strategies: tuple[str, ...] = STRATEGIES
    seeds: tuple[int, ...] = tuple(range(10))
    timing_mode: str = "wallclock"
    output_dir: str = "results"

    def __post_init__(self):
        # The top-level vehicle count is canonical; keep the mobility block in sync.
        if self.mobility.n_vehicles != self.n_vehicles:
            self.mobility = dataclasses.replace(self.mobility, n_vehicles=self.n_vehicles)
        self.validate()

    def validate(self) -> None:
        if self.grid_m < 1:
            raise ConfigurationError(f"grid_m must be >= 1, got {self.grid_m}")
        if self.n_vehicles < 1:
            raise ConfigurationError("n_vehicles must be >= 1")
        if self.rounds < 1:
            raise ConfigurationError(f"rounds must be >= 1, got {self.rounds}")
        if not (0.0 < self.test_frac < 1.0):
            raise ConfigurationError(f"test_frac must be in (0, 1), got {self.test_frac}")
        if not self.strategies:
            raise ConfigurationError("at least one strategy must be enabled")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigurationError(f"unknown strategy {s!r}; expected one of {STRATEGIES}")
        if not self.seeds:
            raise ConfigurationError("seeds must be non-empty")
        for s in self.seeds:
            if s < 0:
                raise ConfigurationError(f"seeds must be non-negative, got {s}")
        if self.timing_mode not in TIMING_MODES:
            raise ConfigurationError(
                f"timing_mode must be one of {TIMING_MODES}, got {self.timing_mode!r}"
            )
        if (
            self.grid_m == 1
            and round_half_up(self.mobility.move_frac * self.n_vehicles) > 0
        ):
            raise ConfigurationError("a 1x1 grid leaves movers no different cell to go to")


def _build(cls, section: dict, path: str):
    """Construct a dataclass from a config dict, rejecting unknown keys."""
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in section.items():
        if key not in known:
            raise ConfigurationError(f"unknown config key {path}.{key}")
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    return cls(**kwargs)


_SECTIONS = {
    "dataset": DatasetConfig,
    "trainer": TrainerSpec,
    "ca": CaParams,
    "mobility": MobilityParams,
    "latency": LatencyParams,
}


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a mapping")
    kwargs = {}
    top_level = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key, value in raw.items():
        if key not in top_level:
            raise ConfigurationError(f"unknown config key {key}")
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigurationError(f"config section {key} must be a mapping")
            kwargs[key] = _build(_SECTIONS[key], value, key)
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


def config_to_dict(config: ExperimentConfig) -> dict:
    out = dataclasses.asdict(config)

    def _plain(value):
        if isinstance(value, dict):
            return {k: _plain(v) for k, v in value.items()}
        if isinstance(value, tuple):
            return [_plain(v) for v in value]
        return value

    return _plain(out)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f)
    if raw is None:
        raw = {}
    try:
        return config_from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def apply_overrides(
    config: ExperimentConfig,
    seeds: tuple[int, ...] | None = None,
    strategies: tuple[str, ...] | None = None,
    timing_mode: str | None = None,
    output_dir: str | None = None,
) -> ExperimentConfig:
    updates = {}
    if seeds is not None:
        updates["seeds"] = seeds
    if strategies is not None:
        updates["strategies"] = strategies
    if timing_mode is not None:
        updates["timing_mode"] = timing_mode
    if output_dir is not None:
        updates["output_dir"] = output_dir
    return dataclasses.replace(config, **updates) if updates else config
