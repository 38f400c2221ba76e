"""Operational settings loaded from environment variables via pydantic-settings."""

from __future__ import annotations

import os

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="CVENT_",
        env_file=None if "PYTEST_CURRENT_TEST" in os.environ else ".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = "INFO"
    # Thread-pool width for sweeps and per-trace simulation
    workers: int = Field(default=1, ge=1)
