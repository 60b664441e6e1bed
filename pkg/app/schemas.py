"""
Experiment configuration schema for the runner
"""

from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

SUBCOMMANDS = (
    "thresholds",
    "free-energy-curve",
    "bp",
    "reconstruction",
    "sample-planted",
    "run-dynamics",
    "projection",
    "oracle-validate",
    "zb-check",
)

GRAPH_SUBCOMMANDS = ("sample-planted", "run-dynamics", "projection", "zb-check")

Subcommand = Literal[
    "thresholds", "free-energy-curve", "bp", "reconstruction", "sample-planted",
    "run-dynamics", "projection", "oracle-validate", "zb-check",
]


class ExperimentConfig(BaseModel):
    """One runner invocation; echoed into every output header"""
    model_config = ConfigDict(extra="forbid")

    subcommand: Subcommand = Field(..., description="Experiment to run")
    d: int = Field(3, ge=3, description="Degree")
    beta: float = Field(0.5, ge=0, description="Inverse temperature")
    h: float = Field(0.0, description="External field for bp")
    eta: Optional[float] = Field(None, gt=-1, lt=1, description="Target magnetization")
    k: Optional[int] = Field(None, ge=0, description="Plus count; overrides eta")
    n: Optional[int] = Field(None, ge=1, description="Number of vertices")
    seed: int = Field(0, ge=0, lt=2 ** 64, description="64-bit seed")
    replicas: int = Field(1, ge=1, description="Independent replicas")
    sweeps: int = Field(100, ge=1, description="Recorded sweeps")
    burn_in: int = Field(10, ge=0, description="Discarded sweeps")
    out: Optional[Path] = Field(None, description="Output path; stdout when omitted")
    points: int = Field(201, ge=3, description="Grid points of the free-energy curve")
    depth: int = Field(6, ge=1, description="Maximum tree depth for reconstruction")
    samples: int = Field(1000, ge=1, description="Monte Carlo samples")
    init: Literal["uniform", "all_plus", "all_minus"] = Field("uniform", description="Initial configuration")
    variant: Literal["glauber", "kawasaki", "hybrid", "glauber_plus", "hybrid_plus"] = Field(
        "glauber", description="Chain variant")
    projection: Literal["madras_randall", "displayed"] = Field(
        "madras_randall", description="Projection-chain rate convention")
    pairing: Optional[Path] = Field(None, description="Pairing file to use instead of sampling one")
    workers: Optional[int] = Field(None, ge=1, description="Worker threads")
    log_level: Optional[str] = Field(None, description="Logging level; ISING_LOG_LEVEL when omitted")

    @model_validator(mode="after")
    def check_sizes(self) -> "ExperimentConfig":
        builds_graph = self.subcommand == "sample-planted" or (
            self.subcommand in GRAPH_SUBCOMMANDS and self.pairing is None)
        if builds_graph:
            if self.n is None:
                raise ValueError(f"{self.subcommand} needs n")
            if (self.d * self.n) % 2 != 0:
                raise ValueError(f"d*n must be even, got d={self.d}, n={self.n}")
        if self.k is not None and self.n is not None and self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        return self

    def plus_count(self, n: int) -> int:
        """Plus count from k, or from eta rounded to the nearest integer, default n/2"""
        if self.k is not None:
            return self.k
        eta = self.eta if self.eta is not None else 0.0
        return int(round((1.0 + eta) * n / 2.0))

    def magnetization(self) -> float:
        if self.k is not None and self.n is not None:
            return 2.0 * self.k / self.n - 1.0
        return self.eta if self.eta is not None else 0.0

    def echo(self) -> Dict[str, Any]:
        """Parameters for output headers; paths and logging excluded"""
        return self.model_dump(mode="json", exclude={"out", "log_level", "workers"})
