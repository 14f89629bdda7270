"""
Synthetic heterogeneous clusters for experiments and tests.

Three platform archetypes cover the usual accelerator mix:

    fast-expensive-coarse   FPGA-like: high throughput, hourly billing, high price
    slow-cheap-fine         CPU-like: low throughput, per-minute billing, low price
    overhead-throughput     GPU-like: best throughput but a large per-task setup

The `adversarial` preset exaggerates the setup-time spread and quantum
coarseness that a split-everything heuristic cannot see.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from partitioner.core.errors import InputValidationError
from partitioner.models.cluster import ClusterModel, LatencyCoefficients, Platform, Task, Workload

logger = logging.getLogger(__name__)

WORK_RANGE = (50_000_000, 500_000_000)


@dataclass(frozen=True)
class Archetype:
    beta_range: Tuple[float, float]
    gamma_range: Tuple[float, float]
    quantum_s: float
    price_per_hour_range: Tuple[float, float]


ARCHETYPES: Dict[str, Archetype] = {
    "fast-expensive-coarse": Archetype((4e-7, 8e-7), (20.0, 60.0), 3600.0, (2.0, 3.0)),
    "slow-cheap-fine": Archetype((2e-6, 4e-6), (0.5, 2.0), 60.0, (0.3, 0.6)),
    "overhead-throughput": Archetype((2e-7, 4e-7), (60.0, 180.0), 3600.0, (0.6, 1.0)),
}

ADVERSARIAL: Dict[str, Archetype] = {
    "fast-expensive-coarse": Archetype((3e-7, 5e-7), (200.0, 400.0), 3600.0, (2.5, 3.5)),
    "slow-cheap-fine": Archetype((1.5e-6, 2.5e-6), (0.1, 0.5), 60.0, (0.2, 0.4)),
    "overhead-throughput": Archetype((1e-7, 2e-7), (600.0, 1200.0), 3600.0, (0.8, 1.2)),
}

PRESETS = ("mixed", "adversarial")


def generate_cluster(
    platforms: int,
    tasks: int,
    seed: int = 0,
    archetypes: Optional[Sequence[str]] = None,
    preset: str = "mixed",
) -> ClusterModel:
    """
    Random cluster with platforms drawn round-robin from the archetypes.

    Args:
        platforms: Number of platforms (mu)
        tasks: Number of tasks (tau)
        seed: Philox seed; the same arguments always give the same cluster
        archetypes: Archetype names to cycle through (default: all three)
        preset: "mixed" or "adversarial" coefficient ranges

    Raises:
        InputValidationError: invalid-generator for bad sizes, names or preset
    """
    if platforms < 1 or tasks < 1:
        raise InputValidationError("invalid-generator", f"platforms={platforms}, tasks={tasks}")
    if preset not in PRESETS:
        raise InputValidationError("invalid-generator", f"unknown preset {preset!r}")
    table = ADVERSARIAL if preset == "adversarial" else ARCHETYPES
    names = list(archetypes or table)
    unknown = [name for name in names if name not in table]
    if unknown:
        raise InputValidationError("invalid-generator", f"unknown archetypes {unknown}")

    rng = np.random.Generator(np.random.Philox(seed))
    work = rng.integers(WORK_RANGE[0], WORK_RANGE[1], size=tasks, endpoint=True)
    # Tasks differ slightly in per-unit effort on every platform
    task_factor = rng.uniform(0.8, 1.2, size=tasks)

    platform_list, beta_rows, gamma_rows = [], [], []
    for i in range(platforms):
        name = names[i % len(names)]
        spec = table[name]
        price_per_hour = rng.uniform(*spec.price_per_hour_range)
        platform_list.append(Platform(
            id=f"{name}-{i:02d}",
            quantum_s=spec.quantum_s,
            price_per_quantum=round(price_per_hour * spec.quantum_s / 3600.0, 6),
        ))
        beta_rows.append(rng.uniform(*spec.beta_range) * task_factor)
        gamma_rows.append(rng.uniform(*spec.gamma_range) * rng.uniform(0.9, 1.1, size=tasks))

    workload = Workload(tuple(Task(id=f"task-{j:03d}", work=int(work[j])) for j in range(tasks)))
    cluster = ClusterModel(
        platforms=tuple(platform_list),
        workload=workload,
        coeffs=LatencyCoefficients(beta=np.array(beta_rows), gamma=np.array(gamma_rows)),
    )
    logger.info(f"Generated {preset} cluster: {platforms} platforms x {tasks} tasks (seed {seed})")
    return cluster
