"""Python access to the edgedeploy simulator.

Configs are JSON strings with the same keys the command line accepts.
"""

from ._core import (
    ConfigError,
    DivergenceError,
    SimulationError,
    compute_reward,
    config_hash,
    keyframes,
    oracle,
    pareto_front,
    predict,
    run_cli,
    simulate,
    trace,
    train,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "SimulationError",
    "compute_reward",
    "config_hash",
    "keyframes",
    "oracle",
    "pareto_front",
    "predict",
    "run_cli",
    "simulate",
    "trace",
    "train",
]
