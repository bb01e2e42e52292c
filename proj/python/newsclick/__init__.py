"""Hourly click prediction for front-page news links."""

from ._newsclick import (
    ContractViolation,
    Error,
    IoError,
    Model,
    ParseError,
    Pipeline,
    ValidationError,
    ablate,
    clip_outliers,
    compute_metrics,
    cross_validate,
    fit_config,
    fit_default,
    fit_linear,
    fit_m5p,
    fit_reptree,
    forward_target,
    inverse_target,
    kfold_split,
    normalize_dataset,
    read_clicks,
    run,
    synth,
)

__all__ = [
    "ContractViolation",
    "Error",
    "IoError",
    "Model",
    "ParseError",
    "Pipeline",
    "ValidationError",
    "ablate",
    "clip_outliers",
    "compute_metrics",
    "cross_validate",
    "fit_config",
    "fit_default",
    "fit_linear",
    "fit_m5p",
    "fit_reptree",
    "forward_target",
    "inverse_target",
    "kfold_split",
    "normalize_dataset",
    "read_clicks",
    "run",
    "synth",
]
