"""
Domain types: workloads, platforms, latency coefficients and partition plans.

Matrices are platform-major everywhere: row i is a platform, column j a task.
All types are immutable after construction (numpy arrays are flagged read-only).
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from partitioner.core.errors import InputValidationError
from partitioner.core.utils import as_matrix, as_vector

COLUMN_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Task:
    id: str
    work: int

    def __post_init__(self):
        if int(self.work) != self.work or self.work < 0:
            raise InputValidationError("invalid-work", f"task {self.id!r} has work {self.work}")


@dataclass(frozen=True)
class Workload:
    tasks: Tuple[Task, ...]

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.tasks:
            raise InputValidationError("empty-workload", "a workload needs at least one task")
        ids = [task.id for task in self.tasks]
        if len(set(ids)) != len(ids):
            raise InputValidationError("duplicate-task-id", "task ids must be distinct")

    @property
    def size(self) -> int:
        return len(self.tasks)

    @property
    def work(self) -> np.ndarray:
        """Work units N_j as a length-τ float vector."""
        return as_vector([task.work for task in self.tasks])


@dataclass(frozen=True)
class Platform:
    id: str
    quantum_s: float
    price_per_quantum: float

    def __post_init__(self):
        if not self.quantum_s > 0:
            raise InputValidationError("invalid-quantum", f"platform {self.id!r}: quantum_s must be > 0")
        if not self.price_per_quantum >= 0:
            raise InputValidationError("invalid-price", f"platform {self.id!r}: price must be >= 0")


@dataclass(frozen=True, eq=False)
class LatencyCoefficients:
    """Per-platform, per-task latency model L = beta * N + gamma."""

    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        beta = as_matrix(self.beta, "beta")
        gamma = as_matrix(self.gamma, "gamma")
        if beta.shape != gamma.shape:
            raise InputValidationError(
                "dimension-mismatch", f"beta {beta.shape} and gamma {gamma.shape} differ"
            )
        if not np.all(beta > 0):
            raise InputValidationError("invalid-coefficient", "all beta entries must be > 0")
        if not np.all(gamma >= 0):
            raise InputValidationError("invalid-coefficient", "all gamma entries must be >= 0")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.beta.shape


@dataclass(frozen=True, eq=False)
class ClusterModel:
    platforms: Tuple[Platform, ...]
    workload: Workload
    coeffs: LatencyCoefficients

    def __post_init__(self):
        object.__setattr__(self, "platforms", tuple(self.platforms))
        if not self.platforms:
            raise InputValidationError("empty-cluster", "a cluster needs at least one platform")
        ids = [platform.id for platform in self.platforms]
        if len(set(ids)) != len(ids):
            raise InputValidationError("duplicate-platform-id", "platform ids must be distinct")
        expected = (len(self.platforms), self.workload.size)
        if self.coeffs.shape != expected:
            raise InputValidationError(
                "dimension-mismatch",
                f"coefficients are {self.coeffs.shape}, expected (platforms, tasks) = {expected}",
            )

    @property
    def mu(self) -> int:
        return len(self.platforms)

    @property
    def tau(self) -> int:
        return self.workload.size

    @property
    def beta(self) -> np.ndarray:
        return self.coeffs.beta

    @property
    def gamma(self) -> np.ndarray:
        return self.coeffs.gamma

    @property
    def work(self) -> np.ndarray:
        return self.workload.work

    @property
    def quantum_s(self) -> np.ndarray:
        return as_vector([p.quantum_s for p in self.platforms])

    @property
    def price(self) -> np.ndarray:
        return as_vector([p.price_per_quantum for p in self.platforms])

    @property
    def scaled_work(self) -> np.ndarray:
        """beta ∘ N: seconds each platform needs for the whole of each task."""
        return self.beta * self.work[np.newaxis, :]

    @property
    def full_workload_latency(self) -> np.ndarray:
        """M_i: latency of platform i running every task alone."""
        return (self.scaled_work + self.gamma).sum(axis=1)


@dataclass(frozen=True)
class RateInputs:
    tco_per_period: float
    profit_margin: float
    quantum_s: float
    period_s: float
    relative_performance: float


@dataclass(frozen=True)
class DeviceCostProfile:
    """
    Inputs of the simple per-device datacentre cost model.

    The site costs spread the building, cooling and staff expenses of the
    datacentre over its devices; defaults are calibrated so the CPU/GPU/FPGA
    profiles land near observed 2015 IaaS rates.
    """

    capital_cost: float
    power_w: float
    recovery_years: float
    charged_usage: float = 0.8
    profit_margin_fraction: float = 0.2
    electricity_per_kwh: float = 0.10
    pue: float = 2.0
    site_cost_per_device_year: float = 1110.0
    site_cost_per_kw_year: float = 6150.0


@dataclass(frozen=True, eq=False)
class AllocationMatrix:
    """Fractional task-to-platform shares; every column sums to one."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2:
            raise InputValidationError("dimension-mismatch", "allocation must be 2-dimensional")
        if np.any(entries < -COLUMN_SUM_TOL) or np.any(entries > 1 + COLUMN_SUM_TOL):
            raise InputValidationError("invalid-allocation", "allocation entries must lie in [0, 1]")
        entries = np.clip(entries, 0.0, 1.0)
        sums = entries.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > COLUMN_SUM_TOL)
        if bad.size:
            raise InputValidationError(
                "column-sum-violation", f"task column {int(bad[0])} sums to {sums[bad[0]]!r}"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @classmethod
    def single_platform(cls, mu: int, tau: int, platform: int) -> "AllocationMatrix":
        entries = np.zeros((mu, tau))
        entries[platform, :] = 1.0
        return cls(entries)


@dataclass(frozen=True, eq=False)
class PartitionPlan:
    allocation: AllocationMatrix
    support: np.ndarray
    platform_latency_s: np.ndarray
    makespan_s: float
    billed_quanta: np.ndarray
    total_cost: float

    @property
    def active_platforms(self) -> np.ndarray:
        """Indices of platforms carrying any share."""
        return np.flatnonzero(self.support.any(axis=1))
