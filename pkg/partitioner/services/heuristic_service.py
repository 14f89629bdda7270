"""
Baseline partitioners working only from absolute per-platform latency and cost.

They ignore quantum granularity and per-task setup overhead when choosing the
split; the resulting plans are still evaluated through the full cost model.
"""
import logging
from typing import Iterable, List, Union

import numpy as np

from partitioner.core.errors import InputValidationError
from partitioner.models.cluster import AllocationMatrix, ClusterModel, PartitionPlan
from partitioner.models.pareto import SweepWeight
from partitioner.services.performance_model import (
    full_workload_costs,
    plan_from_allocation,
    single_platform_plan,
)

logger = logging.getLogger(__name__)


def cheapest_platform_index(cluster: ClusterModel) -> int:
    """Platform of minimum full-workload cost; ties go to lower latency, then lower index."""
    costs = full_workload_costs(cluster)
    latency = cluster.full_workload_latency
    return min(range(cluster.mu), key=lambda i: (costs[i], latency[i], i))


def cheapest_single_platform(cluster: ClusterModel) -> PartitionPlan:
    """Run every task on the platform that completes the workload most cheaply."""
    index = cheapest_platform_index(cluster)
    logger.debug(f"Cheapest single platform: {cluster.platforms[index].id}")
    return single_platform_plan(cluster, index)


def _inverse_makespan_shares(cluster: ClusterModel, platforms: np.ndarray) -> np.ndarray:
    makespans = cluster.full_workload_latency
    inverse = np.zeros(cluster.mu)
    inverse[platforms] = 1.0 / makespans[platforms]
    return inverse / inverse.sum()


def inverse_makespan_split(cluster: ClusterModel) -> PartitionPlan:
    """
    Split every task across all platforms inversely to their full-workload makespans.

    Raises:
        InputValidationError: zero-makespan when a platform would finish instantly
    """
    makespans = cluster.full_workload_latency
    idle = np.flatnonzero(makespans <= 0)
    if idle.size:
        raise InputValidationError(
            "zero-makespan", f"platform {cluster.platforms[idle[0]].id!r} has zero full-workload latency"
        )
    shares = _inverse_makespan_shares(cluster, np.arange(cluster.mu))
    entries = np.repeat(shares[:, np.newaxis], cluster.tau, axis=1)
    return plan_from_allocation(cluster, AllocationMatrix(entries))


def _min_max(values: np.ndarray) -> np.ndarray:
    span = values.max() - values.min()
    if span <= 0:
        return np.zeros_like(values, dtype=float)
    return (values - values.min()) / span


def platform_scores(cluster: ClusterModel, weight: float) -> np.ndarray:
    """w * normalised cost + (1 - w) * normalised latency, per platform."""
    cost = _min_max(full_workload_costs(cluster).astype(float))
    latency = _min_max(cluster.full_workload_latency)
    return weight * cost + (1.0 - weight) * latency


def _weighted_plan(cluster: ClusterModel, weight: float) -> PartitionPlan:
    """
    Threshold the scores, then split by inverse makespan over the survivors.

    Scores only pick the platforms. Shares are not proportional to 1 - s_i,
    which is zero for the slowest platform at w=0; w=0 gives the
    inverse-makespan split over every platform.
    """
    if weight >= 1.0:
        return cheapest_single_platform(cluster)
    scores = platform_scores(cluster, weight)
    # Admit platforms whose score beats the threshold 1 - w: everything at w=0,
    # only the cheapest platforms as w approaches 1
    support = np.flatnonzero(scores <= 1.0 - weight)
    if support.size == 0:
        support = np.array([int(np.argmin(scores))])
    shares = _inverse_makespan_shares(cluster, support)
    entries = np.repeat(shares[:, np.newaxis], cluster.tau, axis=1)
    return plan_from_allocation(cluster, AllocationMatrix(entries))


def weighted_sweep(
    cluster: ClusterModel,
    weights: Iterable[Union[SweepWeight, float]],
) -> List[PartitionPlan]:
    """
    One plan per cost weighting, moving from the latency end (w=0) to the cost end (w=1).

    At w=0 the plan is the inverse-makespan split over every platform; at
    w=1 it is the cheapest single platform.

    Raises:
        InputValidationError: empty-weights
    """
    parsed = [w if isinstance(w, SweepWeight) else SweepWeight(float(w)) for w in weights]
    if not parsed:
        raise InputValidationError("empty-weights", "weighted_sweep needs at least one weight")
    plans = [_weighted_plan(cluster, weight.w) for weight in parsed]
    logger.info(f"Weighted sweep produced {len(plans)} plans")
    return plans
