"""
Runtime Settings
----------------
Process-level settings read from the environment (prefix UDN_) and an
optional .env file. Run recipes live in TOML configs, not here.
"""

from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="UDN_", env_file=".env", extra="ignore")

    log_level: str = "INFO"
    log_dir: Path = Path("data/logs")
    log_json: bool = False
    log_config: Optional[Path] = None
    workers: int = Field(default=1, ge=1)
    metrics_dir: Path = Path("data/metrics")
    run_slow: bool = False


@lru_cache(maxsize=1)
def get_settings() -> RuntimeSettings:
    """Settings of the current process, read once."""
    return RuntimeSettings()
