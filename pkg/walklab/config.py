"""Application configuration using Pydantic Settings."""

import os
from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Laboratory settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_env: Literal["development", "staging", "production"] = "development"
    debug: bool = False

    # Resource caps
    enumeration_cap: int = Field(default=24, gt=0)
    state_cap: int = Field(default=3_000_000, gt=0)
    chain_cache_size: int = Field(default=16, gt=0)

    # Simulator tuning
    move_memo_limit: int = Field(default=256, ge=0)
    shape_cache_size: int = Field(default=65536, gt=0)
    random_block_size: int = Field(default=4096, gt=0)
    default_parallelism: int | None = Field(default=None, gt=0)

    # Sentry
    sentry_dsn: str = ""

    @property
    def is_production(self) -> bool:
        """Check if running in production environment."""
        return self.app_env == "production"

    @property
    def parallelism(self) -> int:
        """Worker count used when a command does not pass one explicitly."""
        return self.default_parallelism or os.cpu_count() or 1


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Export settings instance for convenience
settings = get_settings()
