"""
Replays a partition plan against perturbed platform behaviour.

Each platform runs its integer work shares back to back; a setup overhead is
paid once per task the platform touches. Coefficients are perturbed by
multiplicative truncated-normal noise drawn from a Philox stream per seed.
"""
import logging
from dataclasses import replace
from typing import Iterable, List, Tuple

import numpy as np

from partitioner.core.errors import InputValidationError
from partitioner.models.cluster import AllocationMatrix, ClusterModel, PartitionPlan, Workload
from partitioner.models.simulation import NoiseSpec, SimResult, SimSummary
from partitioner.services.log_service import log_service
from partitioner.services.performance_model import billed_quanta

logger = logging.getLogger(__name__)

TRUNCATION_SIGMAS = 3.0


def integerize_allocation(allocation: AllocationMatrix, workload: Workload) -> np.ndarray:
    """
    Whole work units per (platform, task), each column summing to N_j exactly.

    Shares are rounded to the nearest unit (half to even) and the platform
    holding the largest share of a task absorbs the rounding residual.
    """
    shares = allocation.entries
    work = np.array([task.work for task in workload.tasks], dtype=np.int64)
    if shares.shape[1] != work.size:
        raise InputValidationError("dimension-mismatch", f"allocation has {shares.shape[1]} tasks, workload {work.size}")

    counts = np.rint(shares * work[np.newaxis, :]).astype(np.int64)
    owner = np.argmax(shares, axis=0)
    columns = np.arange(work.size)
    counts[owner, columns] += work - counts.sum(axis=0)

    # A negative residual can exceed the owner's count on tiny tasks
    for j in np.flatnonzero((counts < 0).any(axis=0)):
        deficit = -counts[counts[:, j] < 0, j].sum()
        counts[counts[:, j] < 0, j] = 0
        for i in np.argsort(-shares[:, j], kind="stable"):
            take = min(deficit, counts[i, j])
            counts[i, j] -= take
            deficit -= take
            if deficit == 0:
                break
    return counts


def _truncated_normal(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """Standard normal draws, redrawing anything beyond the truncation bound."""
    draws = rng.standard_normal(shape)
    outside = np.abs(draws) > TRUNCATION_SIGMAS
    while outside.any():
        draws[outside] = rng.standard_normal(int(outside.sum()))
        outside = np.abs(draws) > TRUNCATION_SIGMAS
    return draws


def simulate(plan: PartitionPlan, cluster: ClusterModel, noise: NoiseSpec) -> SimResult:
    """
    Realised makespan and billed cost of a plan under perturbed coefficients.

    Raises:
        InputValidationError: dimension-mismatch when plan and cluster disagree
    """
    if plan.allocation.shape != (cluster.mu, cluster.tau):
        raise InputValidationError(
            "dimension-mismatch",
            f"plan is {plan.allocation.shape}, cluster is {(cluster.mu, cluster.tau)}",
        )
    rng = np.random.Generator(np.random.Philox(noise.seed))
    shape = (cluster.mu, cluster.tau)
    beta = cluster.beta * np.maximum(1.0 + noise.beta_rel_sigma * _truncated_normal(rng, shape), 0.0)
    gamma = cluster.gamma * np.maximum(1.0 + noise.gamma_rel_sigma * _truncated_normal(rng, shape), 0.0)

    counts = integerize_allocation(plan.allocation, cluster.workload)
    active = counts > 0
    latency = (beta * counts + gamma * active).sum(axis=1)
    quanta = billed_quanta(latency, cluster.quantum_s)
    quanta[~active.any(axis=1)] = 0
    cost = float(np.dot(quanta, cluster.price))

    makespan = float(latency.max())
    predicted = plan.makespan_s
    error = abs(makespan - predicted) / makespan if makespan > 0 else 0.0
    latency.setflags(write=False)
    return SimResult(
        seed=noise.seed,
        realized_platform_latency_s=latency,
        realized_makespan_s=makespan,
        realized_cost=cost,
        predicted_makespan_s=predicted,
        relative_makespan_error=error,
    )


def simulate_many(
    plan: PartitionPlan,
    cluster: ClusterModel,
    noise: NoiseSpec,
    seeds: Iterable[int],
) -> Tuple[List[SimResult], SimSummary]:
    """
    Replay the plan once per seed and summarise the model error.

    Raises:
        InputValidationError: invalid-seeds when no seed is given
    """
    results = [simulate(plan, cluster, replace(noise, seed=int(seed))) for seed in seeds]
    if not results:
        raise InputValidationError("invalid-seeds", "simulate_many needs at least one seed")
    errors = np.array([r.relative_makespan_error for r in results])
    ratios = np.array([
        r.realized_makespan_s / r.predicted_makespan_s if r.predicted_makespan_s > 0 else 1.0
        for r in results
    ])
    summary = SimSummary(
        runs=len(results),
        mean_relative_error=float(errors.mean()),
        max_relative_error=float(errors.max()),
        mean_makespan_ratio=float(ratios.mean()),
        mean_realized_cost=float(np.mean([r.realized_cost for r in results])),
    )
    logger.info(
        f"Simulated {summary.runs} runs: mean error {summary.mean_relative_error:.2%}, "
        f"makespan ratio {summary.mean_makespan_ratio:.4f}"
    )
    log_service.add_custom_log(
        "Simulation finished",
        action="simulation",
        runs=summary.runs,
        mean_relative_error=summary.mean_relative_error,
        max_relative_error=summary.max_relative_error,
    )
    return results, summary
