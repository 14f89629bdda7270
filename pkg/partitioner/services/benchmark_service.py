"""
Latency model fitting from benchmark samples and prediction error characterisation.
"""
import csv
import io
import logging
from typing import Iterable, List, Sequence

import numpy as np

from partitioner.core.errors import InputValidationError
from partitioner.models.benchmark import BenchmarkSample, ErrorReport, FitResult
from partitioner.services.log_service import log_service

logger = logging.getLogger(__name__)

CSV_HEADER = ("work", "latency_s")


def fit_latency_model(samples: Sequence[BenchmarkSample]) -> FitResult:
    """
    Fit L = beta * N + gamma by weighted least squares.

    Weights are 1 / latency^2, so the fit minimises relative rather than
    absolute error; benchmark latencies span orders of magnitude.

    Args:
        samples: Benchmark samples, at least two distinct work values

    Returns:
        FitResult: Coefficients and the max relative error on the samples

    Raises:
        InputValidationError: insufficient-samples, degenerate-design or nonpositive-slope
    """
    if len(samples) < 2:
        raise InputValidationError("insufficient-samples", f"got {len(samples)} samples, need 2")
    work = np.array([s.work for s in samples], dtype=float)
    latency = np.array([s.latency_s for s in samples], dtype=float)
    if np.unique(work).size < 2:
        raise InputValidationError("degenerate-design", "all samples share the same work value")

    weights = 1.0 / latency ** 2
    # Scale the work column so the 2x2 system stays well conditioned
    scale = float(np.max(np.abs(work))) or 1.0
    root_w = np.sqrt(weights)
    design = np.column_stack([work / scale, np.ones_like(work)]) * root_w[:, np.newaxis]
    solution, *_ = np.linalg.lstsq(design, latency * root_w, rcond=None)
    beta, gamma = float(solution[0] / scale), float(solution[1])

    warnings: List[str] = []
    if gamma < 0:
        # Small-N noise: refit the slope through the origin
        beta = float(np.sum(weights * work * latency) / np.sum(weights * work * work))
        warnings.append(f"negative intercept {gamma:.3g}s clamped to 0")
        logger.warning(f"Latency fit intercept {gamma:.3g}s clamped to 0")
        gamma = 0.0
    if not beta > 0:
        raise InputValidationError("nonpositive-slope", f"fitted beta={beta:.3g}")

    predicted = beta * work + gamma
    max_error = float(np.max(np.abs(predicted - latency) / latency))
    logger.info(f"Fitted latency model beta={beta:.6g} gamma={gamma:.6g} on {len(samples)} samples")
    return FitResult(
        beta=beta,
        gamma=gamma,
        max_relative_error=max_error,
        sample_count=len(samples),
        warnings=tuple(warnings),
    )


def prediction_error(fit: FitResult, holdout: Sequence[BenchmarkSample]) -> ErrorReport:
    """
    Relative error |predicted - observed| / observed of a fit on holdout samples.

    Raises:
        InputValidationError: empty-holdout
    """
    if not holdout:
        raise InputValidationError("empty-holdout", "holdout set is empty")
    errors = tuple(abs(fit.predict(s.work) - s.latency_s) / s.latency_s for s in holdout)
    return ErrorReport(relative_errors=errors, mean=float(np.mean(errors)), max=max(errors))


def benchmark_work_grid(min_work: int, span: float = 10.0, count: int = 5) -> List[int]:
    """Geometrically spaced work sizes covering [min_work, span * min_work]."""
    if min_work <= 0 or span < 1 or count < 2:
        raise InputValidationError("invalid-grid", f"min_work={min_work}, span={span}, count={count}")
    grid = np.geomspace(min_work, min_work * span, count)
    return [int(round(w)) for w in grid]


def work_grid_for_budget(
    beta: float,
    gamma: float,
    budget_s: float,
    span: float = 10.0,
    count: int = 5,
    repeats: int = 3,
) -> List[int]:
    """
    Benchmark grid whose predicted total run time fills `budget_s` seconds.

    Every grid point is run `repeats` times; the grid keeps the ratios of
    `benchmark_work_grid`.
    """
    ratios = np.geomspace(1.0, span, count)
    usable = budget_s / repeats - count * gamma
    if usable <= 0:
        raise InputValidationError("invalid-budget", f"budget {budget_s}s is consumed by setup time")
    min_work = max(1, int(usable / (beta * float(ratios.sum()))))
    return benchmark_work_grid(min_work, span, count)


def generate_benchmark_samples(
    beta: float,
    gamma: float,
    work_values: Iterable[int],
    repeats: int = 3,
    noise_rel: float = 0.05,
    seed: int = 0,
) -> List[BenchmarkSample]:
    """
    Synthetic benchmark runs with multiplicative Gaussian noise.

    Deterministic for a fixed seed.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    samples = []
    for work in work_values:
        true_latency = beta * work + gamma
        for _ in range(repeats):
            factor = max(1.0 + noise_rel * rng.standard_normal(), 1e-3)
            samples.append(BenchmarkSample(work=int(work), latency_s=true_latency * factor))
    return samples


def read_samples_csv(text: str) -> List[BenchmarkSample]:
    """
    Parse `work,latency_s` rows; a header row is optional.

    Raises:
        InputValidationError: malformed-csv with the offending line number
    """
    samples = []
    for line_no, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if line_no == 1 and tuple(cell.strip() for cell in row) == CSV_HEADER:
            continue
        if len(row) != 2:
            raise InputValidationError("malformed-csv", f"line {line_no}: expected 2 columns")
        try:
            samples.append(BenchmarkSample(work=int(row[0]), latency_s=float(row[1])))
        except ValueError as exc:
            raise InputValidationError("malformed-csv", f"line {line_no}: {exc}") from exc
    if not samples:
        raise InputValidationError("malformed-csv", "line 1: no samples")
    log_service.add_custom_log(f"Read {len(samples)} benchmark samples", action="samples_read")
    return samples


def write_samples_csv(samples: Sequence[BenchmarkSample]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for sample in samples:
        writer.writerow([sample.work, repr(sample.latency_s)])
    return buffer.getvalue()
