"""Configuration, Monte Carlo execution and result emission."""

from .config import SCHEMES, ConfigError, ScenarioConfig, config_from_mapping, parse_config
from .output import COLUMNS, emit_results, format_results
from .runner import ResultCell, ScenarioResult, TrialAssertionError, run_scenario, run_trial

__all__ = [
    "COLUMNS",
    "SCHEMES",
    "ConfigError",
    "ResultCell",
    "ScenarioConfig",
    "ScenarioResult",
    "TrialAssertionError",
    "config_from_mapping",
    "emit_results",
    "format_results",
    "parse_config",
    "run_scenario",
    "run_trial",
]
