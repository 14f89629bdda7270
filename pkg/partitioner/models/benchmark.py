"""
Benchmark samples, fitted latency models and option-pricing workload inputs.
"""
from dataclasses import dataclass, field
from typing import Tuple

from partitioner.core.errors import InputValidationError


@dataclass(frozen=True)
class BenchmarkSample:
    work: int
    latency_s: float

    def __post_init__(self):
        if self.work < 0:
            raise InputValidationError("invalid-work", f"work={self.work}")
        if not self.latency_s > 0:
            raise InputValidationError("invalid-latency", f"latency_s={self.latency_s}")


@dataclass(frozen=True)
class FitResult:
    beta: float
    gamma: float
    max_relative_error: float
    sample_count: int
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def predict(self, work: float) -> float:
        return self.beta * work + self.gamma


@dataclass(frozen=True)
class ErrorReport:
    relative_errors: Tuple[float, ...]
    mean: float
    max: float


@dataclass(frozen=True)
class McOption:
    """European call under geometric Brownian motion."""

    spot: float
    strike: float
    rate: float
    volatility: float
    maturity: float

    def __post_init__(self):
        for name in ("spot", "strike", "volatility", "maturity"):
            if not getattr(self, name) > 0:
                raise InputValidationError("invalid-option", f"{name} must be > 0")


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    paths: int

    @property
    def stddev(self) -> float:
        """Sample standard deviation of the discounted payoffs."""
        return self.stderr * self.paths ** 0.5
