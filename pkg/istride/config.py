"""
Configuration management for istride.

Only rendering and logging preferences come from the environment (optionally via a
.env file); everything that changes results is a command-line flag. ``CliConfig``
captures the parsed command line of one invocation.
"""

from __future__ import annotations

import os
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

from .models import BloomLevel, StrideCategory


class OutputFormat(str, Enum):
    JSON = "json"
    TABLE = "table"


class Settings(BaseModel):
    """Runtime preferences derived from environment variables."""

    log_level: str = Field(alias="ISTRIDE_LOG_LEVEL", default="WARNING")
    color: bool = Field(alias="ISTRIDE_COLOR", default=False)

    model_config = {
        "populate_by_name": True,
        "extra": "ignore",
    }

    @field_validator("log_level", mode="after")
    @classmethod
    def normalize_log_level(cls, value: str) -> str:
        normalized = value.upper()
        allowed = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}
        if normalized not in allowed:
            raise ValueError(f"ISTRIDE_LOG_LEVEL must be one of {', '.join(sorted(allowed))}")
        return normalized

    @field_validator("color", mode="before")
    @classmethod
    def parse_bool(cls, value: str | bool) -> bool:
        if isinstance(value, bool):
            return value
        truthy = {"1", "true", "t", "yes", "y", "on"}
        falsy = {"0", "false", "f", "no", "n", "off", ""}
        lower = value.strip().lower()
        if lower in truthy:
            return True
        if lower in falsy:
            return False
        raise ValueError("ISTRIDE_COLOR must be a boolean-like value (true/false)")


def _find_env_file(explicit_path: Optional[Path] = None) -> Optional[Path]:
    """Detect the .env file to load if present."""
    if explicit_path:
        if explicit_path.exists():
            return explicit_path
        raise FileNotFoundError(f"Explicit .env file not found: {explicit_path}")
    default_path = Path(".env")
    return default_path if default_path.exists() else None


def load_settings(env_file: Optional[Path] = None) -> Settings:
    """
    Load and validate preferences from environment variables.

    Parameters
    ----------
    env_file:
        Path to a .env file. If omitted, `.env` in the working directory is used when present.

    Raises
    ------
    pydantic.ValidationError
        If a variable holds an invalid value.
    """
    env_path = _find_env_file(env_file)
    if env_path:
        load_dotenv(env_path, override=False)
    return Settings.model_validate(os.environ)


class CliConfig(BaseModel):
    """Options of one command-line invocation."""

    command: str
    catalog_path: Optional[Path] = None
    output_format: OutputFormat = OutputFormat.TABLE
    lenient: bool = False
    category: Optional[StrideCategory] = None
    override: Optional[Tuple[str, BloomLevel]] = None
    impact: Optional[str] = None
    out: Optional[Path] = None

    @model_validator(mode="after")
    def require_catalog(self) -> "CliConfig":
        if self.command != "score-cvss" and self.catalog_path is None:
            raise ValueError(f"{self.command} requires a catalog path")
        return self
