"""
Cluster builders and independent oracles shared by the test modules.
"""
import itertools
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from partitioner.models.cluster import ClusterModel, LatencyCoefficients, Platform, Task, Workload


def make_cluster(
    beta: Sequence[Sequence[float]],
    gamma: Sequence[Sequence[float]],
    work: Sequence[int],
    quantum_s: Sequence[float],
    price: Sequence[float],
) -> ClusterModel:
    """Cluster from plain lists; platforms are p0, p1, ... and tasks t0, t1, ..."""
    return ClusterModel(
        platforms=tuple(Platform(f"p{i}", float(q), float(p)) for i, (q, p) in enumerate(zip(quantum_s, price))),
        workload=Workload(tuple(Task(f"t{j}", int(n)) for j, n in enumerate(work))),
        coeffs=LatencyCoefficients(beta=beta, gamma=gamma),
    )


def random_small_cluster(rng: np.random.Generator, mu: int, tau: int) -> ClusterModel:
    """Desk-scale instance where setup times and billing quanta both matter."""
    return make_cluster(
        beta=rng.uniform(1e-3, 5e-3, size=(mu, tau)),
        gamma=rng.uniform(0.0, 2.0, size=(mu, tau)),
        work=rng.integers(1000, 3000, size=tau),
        quantum_s=rng.uniform(1.0, 6.0, size=mu),
        price=rng.uniform(0.5, 2.0, size=mu),
    )


def adversarial_cluster() -> ClusterModel:
    """
    Three identical platforms, three tasks whose setup time dwarfs their work.

    Splitting every task three ways costs 700 s per platform; one whole task
    per platform takes 300 s.
    """
    return make_cluster(
        beta=[[1e-3] * 3] * 3,
        gamma=[[200.0] * 3] * 3,
        work=[100_000] * 3,
        quantum_s=[1.0] * 3,
        price=[0.01] * 3,
    )


def split_only_cluster() -> ClusterModel:
    """
    An hourly platform just over one quantum and a slow per-second one.

    Alone they cost 2.0 and 100.0 and their inverse-makespan split about 27.5;
    moving one second of work to the slow platform costs about 1.03.
    """
    return make_cluster(
        beta=[[3.601], [10.0]],
        gamma=[[0.0], [0.0]],
        work=[1000],
        quantum_s=[3600.0, 1.0],
        price=[1.0, 0.01],
    )


def naive_plan_metrics(cluster: ClusterModel, shares: np.ndarray) -> Tuple[List[float], float, List[int], float]:
    """Per-platform latency, makespan, quanta and cost with plain loops."""
    latencies, quanta = [], []
    for i, platform in enumerate(cluster.platforms):
        latency = 0.0
        for j, task in enumerate(cluster.workload.tasks):
            if shares[i][j] > 0:
                latency += cluster.beta[i][j] * task.work * shares[i][j] + cluster.gamma[i][j]
        latencies.append(latency)
        quanta.append(math.ceil(latency / platform.quantum_s) if latency > 0 else 0)
    cost = sum(q * p.price_per_quantum for q, p in zip(quanta, cluster.platforms))
    return latencies, max(latencies), quanta, cost


def _simplex_grid(mu: int, resolution: int) -> np.ndarray:
    """Every share vector with entries in multiples of 1/resolution summing to 1."""
    points = [
        np.array(c, dtype=float) / resolution
        for c in itertools.product(range(resolution + 1), repeat=mu)
        if sum(c) == resolution
    ]
    return np.array(points)


def grid_search_makespan(cluster: ClusterModel, cost_cap: Optional[float], resolution: int) -> float:
    """
    Smallest makespan over every allocation on a 1/resolution grid.

    Support follows the shares (a supported pair with no work only adds
    setup time), billing is an exact ceiling. Returns inf when no grid point
    meets the cap.
    """
    mu = cluster.mu
    options = _simplex_grid(mu, resolution)
    latency = np.zeros((1, mu))
    for j in range(cluster.tau):
        contribution = options * (cluster.beta[:, j] * cluster.work[j]) + (options > 0) * cluster.gamma[:, j]
        latency = (latency[:, np.newaxis, :] + contribution[np.newaxis, :, :]).reshape(-1, mu)
    makespan = latency.max(axis=1)
    if cost_cap is None:
        return float(makespan.min())
    cost = np.ceil(latency / cluster.quantum_s) @ cluster.price
    feasible = cost <= cost_cap
    return float(makespan[feasible].min()) if feasible.any() else math.inf


def grid_rounding_bound(cluster: ClusterModel, resolution: int) -> float:
    """How far the grid optimum may sit above the continuous optimum without a cap."""
    return float((cluster.beta * cluster.work[np.newaxis, :]).sum(axis=1).max()) / resolution


def vertex_enumeration_lp(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> float:
    """
    min c.x s.t. A x <= b, x >= 0 by visiting every basic feasible solution.

    The feasible region must be a bounded, nonempty polytope.
    """
    n = A.shape[1]
    rows = np.vstack([A, -np.eye(n)])
    rhs = np.concatenate([b, np.zeros(n)])
    best = math.inf
    for active in itertools.combinations(range(rows.shape[0]), n):
        sub = rows[list(active)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, rhs[list(active)])
        if np.all(rows @ x <= rhs + 1e-9):
            best = min(best, float(c @ x))
    return best


def pairwise_front(points: Sequence[Tuple[float, float]]) -> List[int]:
    """Indices of points no other point weakly dominates; the first of equal points is kept."""
    kept = []
    for k, (cost, makespan) in enumerate(points):
        dominated = False
        for other, (o_cost, o_makespan) in enumerate(points):
            if other == k:
                continue
            if (o_cost, o_makespan) == (cost, makespan):
                dominated = other < k
            elif o_cost <= cost and o_makespan <= makespan:
                dominated = True
            if dominated:
                break
        if not dominated:
            kept.append(k)
    return kept
