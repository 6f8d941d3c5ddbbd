"""Multi-user OAM backhaul simulator."""

from ._oambackhaul import (
    ConfigError,
    Experiment,
    IllConditionedError,
    ParseError,
    Placement,
    SystemConfig,
    __version__,
    bessel_j,
    channel,
    circuit_power,
    decoupling_residual,
    estimate_positions,
    list_presets,
    run_experiment,
    run_pipeline,
    set_max_threads,
    spectral_efficiency,
    training_overhead_factor,
)

__all__ = [
    "ConfigError",
    "Experiment",
    "IllConditionedError",
    "ParseError",
    "Placement",
    "SystemConfig",
    "__version__",
    "bessel_j",
    "channel",
    "circuit_power",
    "decoupling_residual",
    "estimate_positions",
    "list_presets",
    "run_experiment",
    "run_pipeline",
    "set_max_threads",
    "spectral_efficiency",
    "training_overhead_factor",
]
