"""Seed-reproducible federated learning simulator on a city grid, with a
cellular-automaton client selector measured against uniform random
selection on model quality and straggler-driven execution time.
"""

__version__ = "0.1.0"

from .automaton import (
    CaParams,
    CellState,
    ConfigurationError,
    Grid,
    SelectionResult,
    cell_score,
    select_ca,
    select_random,
    update_cc,
    update_npc,
    update_tc,
)
from .config import ExperimentConfig, load_config
from .data import Dataset, IdxFormatError, load_idx, split_train_test, synth_dataset
from .latency import LatencyParams, RoundTiming, flag_stragglers, score_round
from .metrics import EvalMetrics, compute_metrics, evaluate
from .mobility import MobilityParams, Vehicle, init_population, measure_cells, step_mobility
from .simulation import RoundRecord, run_experiment, run_round, run_simulation
from .training import ModelParams, TrainerSpec, fedavg, train_local

__all__ = [
    "__version__",
    "CaParams",
    "CellState",
    "ConfigurationError",
    "Grid",
    "SelectionResult",
    "cell_score",
    "select_ca",
    "select_random",
    "update_cc",
    "update_npc",
    "update_tc",
    "ExperimentConfig",
    "load_config",
    "Dataset",
    "IdxFormatError",
    "load_idx",
    "split_train_test",
    "synth_dataset",
    "LatencyParams",
    "RoundTiming",
    "flag_stragglers",
    "score_round",
    "EvalMetrics",
    "compute_metrics",
    "evaluate",
    "MobilityParams",
    "Vehicle",
    "init_population",
    "measure_cells",
    "step_mobility",
    "RoundRecord",
    "run_experiment",
    "run_round",
    "run_simulation",
    "ModelParams",
    "TrainerSpec",
    "fedavg",
    "train_local",
]
