#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuration settings for the Ising toolkit
Values are read from ISING_* environment variables or a .env file
"""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings"""

    model_config = SettingsConfigDict(
        env_prefix="ISING_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Replica execution
    MAX_WORKERS: int = Field(default=4, ge=1)

    # Sampling
    BURN_IN_FACTOR: float = Field(default=50.0, gt=0)  # pair sampling burn-in, in units of log(n) sweeps
    CONCENTRATION_CEILING: float = Field(default=3.0, gt=0)  # max std(rho_hat) * sqrt(n)

    # Exact enumeration limits
    DENSE_STATE_LIMIT: int = Field(default=20000, ge=1)
    ENUMERATION_VERTEX_LIMIT: int = Field(default=24, ge=1)
    FIRST_MOMENT_CLONE_LIMIT: int = Field(default=12, ge=2)
    EXACT_PLANTED_CLONE_LIMIT: int = Field(default=8, ge=2)
    COMBINATION_LIMIT: int = Field(default=2_000_000, ge=1)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Get the cached settings instance

    Returns:
        Settings loaded from the environment
    """
    return Settings()
