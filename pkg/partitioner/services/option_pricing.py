"""
Monte Carlo European option pricing, used as the divisible benchmark workload.

Paths are generated in fixed-size blocks, each block drawing from its own
Philox stream spawned from the seed, so estimates do not depend on how many
workers evaluate the blocks.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from partitioner.core.config import settings
from partitioner.core.errors import InputValidationError
from partitioner.models.benchmark import McEstimate, McOption
from partitioner.models.cluster import Task, Workload

logger = logging.getLogger(__name__)


def _box_muller(rng: np.random.Generator, count: int) -> np.ndarray:
    """`count` standard normal variates from pairs of uniforms."""
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    return np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:count]


def _price_block(option: McOption, seed_seq: np.random.SeedSequence, count: int) -> Tuple[int, float, float]:
    """Return (count, mean, sum of squared deviations) of discounted payoffs."""
    rng = np.random.Generator(np.random.Philox(seed_seq))
    z = _box_muller(rng, count)
    drift = (option.rate - 0.5 * option.volatility ** 2) * option.maturity
    diffusion = option.volatility * math.sqrt(option.maturity)
    terminal = option.spot * np.exp(drift + diffusion * z)
    payoff = math.exp(-option.rate * option.maturity) * np.maximum(terminal - option.strike, 0.0)
    mean = float(payoff.mean())
    return count, mean, float(np.sum((payoff - mean) ** 2))


def mc_price(
    option: McOption,
    paths: int,
    seed: int,
    block_paths: Optional[int] = None,
    workers: int = 1,
) -> McEstimate:
    """
    Discounted mean call payoff over `paths` simulated terminal prices.

    Args:
        option: Option parameters
        paths: Number of simulated paths (>= 2)
        seed: Seed of the block streams
        block_paths: Paths per block (defaults to settings.MC_BLOCK_PATHS)
        workers: Threads evaluating blocks; the result does not depend on it

    Returns:
        McEstimate: estimate and standard error

    Raises:
        InputValidationError: invalid-paths
    """
    if paths < 2:
        raise InputValidationError("invalid-paths", f"paths={paths}")
    block = block_paths or settings.MC_BLOCK_PATHS
    sizes = [block] * (paths // block)
    if paths % block:
        sizes.append(paths % block)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    jobs = list(zip(streams, sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _price_block(option, *job), jobs))
    else:
        results = [_price_block(option, *job) for job in jobs]

    # Chan et al. pairwise combination, always in block order
    count, mean, m2 = 0, 0.0, 0.0
    for n_b, mean_b, m2_b in results:
        total = count + n_b
        delta = mean_b - mean
        mean += delta * n_b / total
        m2 += m2_b + delta * delta * count * n_b / total
        count = total

    variance = max(m2 / (count - 1), 0.0)
    stderr = math.sqrt(variance / count)
    logger.debug(f"MC price {mean:.6f} +/- {stderr:.2e} over {count} paths")
    return McEstimate(estimate=mean, stderr=stderr, paths=count)


def paths_for_accuracy(stddev: float, target_accuracy: float) -> int:
    """Smallest N with stddev / sqrt(N) <= target_accuracy (at least 1)."""
    if not target_accuracy > 0:
        raise InputValidationError("invalid-target", f"target_accuracy={target_accuracy}")
    ratio = (stddev / target_accuracy) ** 2
    return max(1, math.ceil(ratio - 1e-9 * ratio))


def required_paths(option: McOption, target_accuracy: float, pilot_paths: int, seed: int) -> int:
    """
    Paths needed for a standard error of `target_accuracy`, from a pilot run.

    Raises:
        InputValidationError: invalid-target, or invalid-paths if pilot_paths < 100
    """
    if not target_accuracy > 0:
        raise InputValidationError("invalid-target", f"target_accuracy={target_accuracy}")
    if pilot_paths < 100:
        raise InputValidationError("invalid-paths", f"pilot_paths={pilot_paths} < 100")
    pilot = mc_price(option, pilot_paths, seed)
    return paths_for_accuracy(pilot.stddev, target_accuracy)


def black_scholes_call(option: McOption) -> float:
    """Closed-form Black-Scholes price of a European call."""
    sqrt_t = math.sqrt(option.maturity)
    d1 = (
        math.log(option.spot / option.strike)
        + (option.rate + 0.5 * option.volatility ** 2) * option.maturity
    ) / (option.volatility * sqrt_t)
    d2 = d1 - option.volatility * sqrt_t
    cdf = lambda x: 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))  # noqa: E731
    return option.spot * cdf(d1) - option.strike * math.exp(-option.rate * option.maturity) * cdf(d2)


def generate_option_workload(
    count: int,
    target_accuracy: float = 0.001,
    pilot_paths: int = 10000,
    seed: int = 0,
) -> Tuple[Workload, List[McOption]]:
    """
    Random option book whose task work is the paths each option needs.

    Returns:
        Workload with task ids `option-000`..., and the options themselves
    """
    rng = np.random.Generator(np.random.Philox(seed))
    options, tasks = [], []
    for index in range(count):
        option = McOption(
            spot=float(rng.uniform(80, 120)),
            strike=float(rng.uniform(80, 120)),
            rate=float(rng.uniform(0.01, 0.05)),
            volatility=float(rng.uniform(0.1, 0.4)),
            maturity=float(rng.uniform(0.25, 2.0)),
        )
        work = required_paths(option, target_accuracy, pilot_paths, seed + index + 1)
        options.append(option)
        tasks.append(Task(id=f"option-{index:03d}", work=work))
    logger.info(f"Generated option workload of {count} tasks, {sum(t.work for t in tasks)} paths")
    return Workload(tuple(tasks)), options
