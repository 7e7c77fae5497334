"""Validated command configuration."""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, model_validator

Command = Literal["verify", "variance", "simulate", "table", "scan", "llt"]


class RunConfig(BaseModel):
    """Flags of one command invocation after parsing."""

    command: Command
    K: int | None = Field(default=None, ge=1)
    h: int | None = Field(default=None, ge=0)
    n: int = Field(default=10_000, ge=1)
    replicas: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    stride: int = Field(default=1, ge=1)
    parallelism: int | None = Field(default=None, ge=1)
    K_max: int = Field(default=8, ge=1)
    alpha_list: list[float] = Field(default_factory=list)
    variants: list[Literal["u", "star"]] = Field(default_factory=lambda: ["u", "star"])
    output_path: Path | None = None
    trajectory_path: Path | None = None
    format: Literal["csv", "json"] = "csv"
    initial: Literal["default", "uniform"] = "default"
    unconstrained: bool = False

    @model_validator(mode="after")
    def check_gap(self) -> "RunConfig":
        if self.K is not None and self.h is not None:
            if self.h > self.K or (self.K - self.h) % 2:
                raise ValueError(f"h={self.h} is not a valid gap for K={self.K}")
        if any(not 0 <= alpha <= 1 for alpha in self.alpha_list):
            raise ValueError("Exponents must lie in [0, 1]")
        return self
