"""Nonlocal homogenization laboratory: Python front end of the C++ core."""

import json

from ._nhl import (
    CSV_HEADER,
    Config,
    ConfigError,
    NhlError,
    ParseError,
    SweepResult,
    assemble,
    check_kernel,
    config_from_toml,
    effective_coefficient,
    fit_rate,
    gagliardo_seminorm_sq,
    load_config,
    run_sweep,
)


def config_dict(config):
    """Complete configuration as nested dictionaries."""
    return json.loads(config.to_json())


__all__ = [
    "CSV_HEADER",
    "Config",
    "ConfigError",
    "NhlError",
    "ParseError",
    "SweepResult",
    "assemble",
    "check_kernel",
    "config_dict",
    "config_from_toml",
    "effective_coefficient",
    "fit_rate",
    "gagliardo_seminorm_sq",
    "load_config",
    "run_sweep",
]
