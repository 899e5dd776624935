"""Application configuration for knot_mosaic."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Literal, Optional

try:
    from dotenv import load_dotenv
except ImportError:  # pragma: no cover
    load_dotenv = None

if load_dotenv is not None:
    load_dotenv()

try:
    from pydantic import Field
    from pydantic_settings import BaseSettings, SettingsConfigDict
except ImportError as exc:  # pragma: no cover
    raise ImportError(
        "Missing dependencies. Install with `uv sync` before running."
    ) from exc

from loguru import logger


LOG_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | "
    "<cyan>{name}</cyan> - <level>{message}</level>"
)


class Settings(BaseSettings):
    """Settings loaded from environment variables and optional .env file."""

    model_config = SettingsConfigDict(
        env_prefix="KNOT_MOSAIC_",
        env_file=".env",
        extra="ignore",
    )

    corpus_dir: Optional[Path] = None
    bit_format: Literal["bin", "hex"] = "bin"
    seed: int = 0

    flip_probability: float = Field(default=0.01, ge=0.0, le=1.0)
    channel_trials: int = Field(default=100, ge=1)
    session_length: int = Field(default=3, ge=1)

    log_level: str = "INFO"


def configure_logging(level: str = "INFO") -> None:
    """Route loguru output to a single stderr sink at ``level``.

    Library modules only emit records; sinks are installed by the entry
    points (CLI and MCP server). stdout stays reserved for machine output.
    """

    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT)
