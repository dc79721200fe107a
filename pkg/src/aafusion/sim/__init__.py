from .config import BlindWindow, ConfigError, ScenarioConfig, SensorSpec, TargetScript, crossing_scenario
from .experiments import MseRow, mse_consistency_experiment
from .io import write_mse_table, write_run_outputs
from .metrics import ospa
from .runner import (
    GateCheck,
    MetricsRecord,
    RunResult,
    aggregate,
    misdetection_robustness_experiment,
    misdetection_scenario,
    run_monte_carlo,
    run_scenario,
)
from .truth import generate_measurements, generate_truth

__all__ = [
    "BlindWindow",
    "ConfigError",
    "GateCheck",
    "MetricsRecord",
    "MseRow",
    "RunResult",
    "ScenarioConfig",
    "SensorSpec",
    "TargetScript",
    "aggregate",
    "crossing_scenario",
    "generate_measurements",
    "generate_truth",
    "misdetection_robustness_experiment",
    "misdetection_scenario",
    "mse_consistency_experiment",
    "ospa",
    "run_monte_carlo",
    "run_scenario",
    "write_mse_table",
    "write_run_outputs",
]
