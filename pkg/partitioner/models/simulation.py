"""
Replay inputs and outputs: coefficient noise and realised plan behaviour.
"""
from dataclasses import dataclass

import numpy as np

from partitioner.core.errors import InputValidationError


@dataclass(frozen=True)
class NoiseSpec:
    beta_rel_sigma: float = 0.0
    gamma_rel_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.beta_rel_sigma < 0 or self.gamma_rel_sigma < 0:
            raise InputValidationError("invalid-noise", "noise sigmas must be >= 0")


@dataclass(frozen=True, eq=False)
class SimResult:
    seed: int
    realized_platform_latency_s: np.ndarray
    realized_makespan_s: float
    realized_cost: float
    predicted_makespan_s: float
    relative_makespan_error: float


@dataclass(frozen=True)
class SimSummary:
    runs: int
    mean_relative_error: float
    max_relative_error: float
    mean_makespan_ratio: float
    mean_realized_cost: float
