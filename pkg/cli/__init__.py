"""
Command-line layer: run configs, command runners and CSV output.
"""

from cli.commands import run
from cli.config import RunConfig, load_config

__all__ = ["RunConfig", "load_config", "run"]
