"""
Predictive latency, cost and rate models, and plan derivation from an allocation.
"""
import logging
import math
from typing import Optional

import numpy as np

from partitioner.core.config import settings
from partitioner.core.errors import InputValidationError
from partitioner.models.cluster import (
    AllocationMatrix,
    ClusterModel,
    DeviceCostProfile,
    PartitionPlan,
    Platform,
    RateInputs,
)

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600.0
HOURS_PER_YEAR = 8760.0


def predict_latency(beta: float, gamma: float, work: float) -> float:
    """
    Latency of `work` units on one platform: beta * work + gamma.

    Raises:
        InputValidationError: If beta <= 0, gamma < 0 or work < 0
    """
    if not beta > 0 or not gamma >= 0:
        raise InputValidationError("invalid-coefficient", f"beta={beta}, gamma={gamma}")
    if work < 0:
        raise InputValidationError("invalid-work", f"work={work}")
    return beta * work + gamma


def billed_quanta(latency_s, quantum_s):
    """
    Number of quanta billed for a latency: ceil(latency / quantum).

    Works element-wise on arrays; zero latency bills zero quanta. There is no
    tolerance: any excess over a whole number of quanta starts the next one.
    """
    ratio = np.asarray(latency_s, dtype=float) / np.asarray(quantum_s, dtype=float)
    quanta = np.ceil(ratio)
    return np.maximum(quanta, 0.0).astype(np.int64)


def predict_cost(latency_s: float, platform: Platform) -> float:
    """
    Cost of occupying `platform` for `latency_s` seconds.

    Args:
        latency_s: Predicted latency in seconds
        platform: Platform with its quantum and per-quantum price

    Returns:
        float: ceil(latency_s / quantum_s) * price_per_quantum
    """
    if latency_s < 0:
        raise InputValidationError("invalid-latency", f"latency_s={latency_s}")
    if latency_s == 0:
        return 0.0
    return int(billed_quanta(latency_s, platform.quantum_s)) * platform.price_per_quantum


def compute_rate(inputs: RateInputs) -> float:
    """
    Price per quantum of a device from its total cost of ownership.

    The device base rate (TCO + PM) * quantum / period is scaled by the
    device's relative performance.

    Raises:
        InputValidationError: invalid-period, invalid-rdp, invalid-quantum or invalid-tco
    """
    if not inputs.period_s > 0:
        raise InputValidationError("invalid-period", f"period_s={inputs.period_s}")
    if not inputs.relative_performance > 0:
        raise InputValidationError("invalid-rdp", f"relative_performance={inputs.relative_performance}")
    if not inputs.quantum_s > 0:
        raise InputValidationError("invalid-quantum", f"quantum_s={inputs.quantum_s}")
    if inputs.tco_per_period < 0:
        raise InputValidationError("invalid-tco", f"tco_per_period={inputs.tco_per_period}")
    base_rate = (inputs.tco_per_period + inputs.profit_margin) * inputs.quantum_s / inputs.period_s
    return base_rate * inputs.relative_performance


def estimate_annual_tco(profile: DeviceCostProfile) -> float:
    """
    Annual total cost of ownership of one datacentre device.

    Capital is recovered linearly; energy is charged at the facility PUE;
    site costs are split per device and per kW of IT load.
    """
    if not profile.recovery_years > 0:
        raise InputValidationError("invalid-period", f"recovery_years={profile.recovery_years}")
    power_kw = profile.power_w / 1000.0
    capital = profile.capital_cost / profile.recovery_years
    energy = power_kw * HOURS_PER_YEAR * profile.pue * profile.electricity_per_kwh
    site = profile.site_cost_per_device_year + profile.site_cost_per_kw_year * power_kw
    return capital + energy + site


def rate_inputs_from_profile(
    profile: DeviceCostProfile,
    quantum_s: float = SECONDS_PER_HOUR,
    relative_performance: float = 1.0,
) -> RateInputs:
    """Build RateInputs over one year of charged (billable) device time."""
    if not 0 < profile.charged_usage <= 1:
        raise InputValidationError("invalid-usage", f"charged_usage={profile.charged_usage}")
    tco = estimate_annual_tco(profile)
    return RateInputs(
        tco_per_period=tco,
        profit_margin=tco * profile.profit_margin_fraction,
        quantum_s=quantum_s,
        period_s=HOURS_PER_YEAR * SECONDS_PER_HOUR * profile.charged_usage,
        relative_performance=relative_performance,
    )


def normalize_price(price: float, price_unit: str, quantum_s: float) -> float:
    """Convert a catalog price to price per quantum."""
    if price_unit == "per_quantum":
        return float(price)
    if price_unit == "per_hour":
        return float(price) * quantum_s / SECONDS_PER_HOUR
    raise InputValidationError("invalid-price-unit", f"unknown price unit {price_unit!r}")


def snap_allocation(entries: np.ndarray, support_epsilon: Optional[float] = None) -> np.ndarray:
    """
    Zero shares below the support threshold and renormalise each column.

    Args:
        entries: μ×τ array of shares, columns summing to ~1
        support_epsilon: Threshold; defaults to settings.SUPPORT_EPSILON

    Returns:
        np.ndarray: New array, every column summing to 1
    """
    eps = settings.SUPPORT_EPSILON if support_epsilon is None else support_epsilon
    snapped = np.clip(np.array(entries, dtype=float), 0.0, None)
    snapped[snapped < eps] = 0.0
    sums = snapped.sum(axis=0)
    if np.any(sums <= 0):
        raise InputValidationError("column-sum-violation", "a task has no share above the support threshold")
    return snapped / sums[np.newaxis, :]


def plan_from_allocation(
    cluster: ClusterModel,
    allocation: AllocationMatrix,
    support_epsilon: Optional[float] = None,
) -> PartitionPlan:
    """
    Derive per-platform latency, makespan, billed quanta and cost of an allocation.

    Args:
        cluster: Platforms, workload and latency coefficients
        allocation: Fractional shares, platform-major
        support_epsilon: Shares below this are snapped to zero first

    Returns:
        PartitionPlan: Fully derived plan

    Raises:
        InputValidationError: dimension-mismatch or column-sum-violation
    """
    if allocation.shape != (cluster.mu, cluster.tau):
        raise InputValidationError(
            "dimension-mismatch",
            f"allocation is {allocation.shape}, cluster is {(cluster.mu, cluster.tau)}",
        )
    shares = snap_allocation(allocation.entries, support_epsilon)
    support = (shares > 0).astype(np.int8)

    latency = (cluster.scaled_work * shares + cluster.gamma * support).sum(axis=1)
    quanta = billed_quanta(latency, cluster.quantum_s)
    # Idle platforms never bill
    quanta[~support.any(axis=1)] = 0
    total_cost = float(np.dot(quanta, cluster.price))

    for array in (shares, support, latency, quanta):
        array.setflags(write=False)
    return PartitionPlan(
        allocation=AllocationMatrix(shares),
        support=support,
        platform_latency_s=latency,
        makespan_s=float(latency.max()),
        billed_quanta=quanta,
        total_cost=total_cost,
    )


def single_platform_plan(cluster: ClusterModel, platform: int) -> PartitionPlan:
    """Plan that runs the whole workload on one platform."""
    allocation = AllocationMatrix.single_platform(cluster.mu, cluster.tau, platform)
    return plan_from_allocation(cluster, allocation)


def full_workload_costs(cluster: ClusterModel) -> np.ndarray:
    """Billed cost of running the whole workload on each platform alone."""
    quanta = billed_quanta(cluster.full_workload_latency, cluster.quantum_s)
    return quanta * cluster.price


def check_plan_consistency(plan: PartitionPlan, cluster: ClusterModel, tol: float = 1e-9) -> None:
    """
    Assert that a plan's derived fields follow from its allocation.

    Raises:
        InputValidationError: If any field disagrees with a fresh derivation
    """
    fresh = plan_from_allocation(cluster, plan.allocation)
    if not np.allclose(fresh.platform_latency_s, plan.platform_latency_s, rtol=tol, atol=tol):
        raise InputValidationError("inconsistent-plan", "platform latencies do not match the allocation")
    if not np.array_equal(fresh.billed_quanta, plan.billed_quanta):
        raise InputValidationError("inconsistent-plan", "billed quanta do not match the latencies")
    if not math.isclose(fresh.total_cost, plan.total_cost, rel_tol=tol, abs_tol=tol):
        raise InputValidationError("inconsistent-plan", "total cost does not match the billed quanta")
    logger.debug(f"Plan consistent: makespan={plan.makespan_s:.6g}s cost={plan.total_cost:.6g}")
