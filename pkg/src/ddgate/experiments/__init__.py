"""Configurable experiment scenarios and their command-line front end."""
from .config import SCENARIOS, default_config, default_config_text, load_config
from .manifest import RunManifest, Table, read_table, write_table
from .scenarios import RUNNERS, ScenarioResult, run_scenario

__all__ = [
    "SCENARIOS",
    "RUNNERS",
    "RunManifest",
    "ScenarioResult",
    "Table",
    "default_config",
    "default_config_text",
    "load_config",
    "read_table",
    "run_scenario",
    "write_table",
]
