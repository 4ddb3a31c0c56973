"""Experiment harness: config, fidelity evaluators, statistics, result files, CLI."""

from .config import ExperimentConfig, load_config
from .experiments import (
    ExperimentSummary,
    TrialRecord,
    fidelity_bound,
    fidelity_formula,
    fidelity_post_randomizer,
    run_decoding_experiment,
    scrambling_fidelity,
    success_floor,
    sweep,
)
from .statistics import StatisticsRecord, randomizer_statistics, variance_scaling

__all__ = [
    "ExperimentConfig",
    "load_config",
    "ExperimentSummary",
    "TrialRecord",
    "fidelity_bound",
    "fidelity_formula",
    "fidelity_post_randomizer",
    "run_decoding_experiment",
    "scrambling_fidelity",
    "success_floor",
    "sweep",
    "StatisticsRecord",
    "randomizer_statistics",
    "variance_scaling",
]
