"""
Utilities Package Initialization
--------------------------------
Logging setup and runtime settings.
"""

from utils.logger import RunLogger, get_logger, setup_logging
from utils.settings import RuntimeSettings, get_settings

__all__ = [
    "get_logger",
    "setup_logging",
    "RunLogger",
    "RuntimeSettings",
    "get_settings",
]
