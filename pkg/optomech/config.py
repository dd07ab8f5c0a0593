"""
Process settings for optomech.

Values come from a `.env` file in the project root (if present) and then from
the environment. Parameter files (physics inputs) live in `parameters.py`.
"""

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).resolve().parent.parent

_TRUTHY = {"1", "true", "yes", "on"}


@dataclass(frozen=True)
class Settings:
    """Runtime settings shared by the CLI and the logger."""

    log_level: str = "INFO"
    log_file: bool = False
    log_dir: str = str(PROJECT_ROOT / "logs")
    workers: int = 1

    @classmethod
    def from_env(cls) -> "Settings":
        workers = os.environ.get("OPTOMECH_WORKERS", "1")
        try:
            n_workers = max(1, int(workers))
        except ValueError:
            n_workers = 1
        return cls(
            log_level=os.environ.get("OPTOMECH_LOG_LEVEL", "INFO"),
            log_file=os.environ.get("OPTOMECH_LOG_FILE", "false").strip().lower() in _TRUTHY,
            log_dir=os.environ.get("OPTOMECH_LOG_DIR", str(PROJECT_ROOT / "logs")),
            workers=n_workers,
        )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Load settings once per process."""
    env_path = PROJECT_ROOT / ".env"
    if env_path.exists():
        load_dotenv(env_path)
    return Settings.from_env()
