"""
Tests for latency model fitting, prediction error and benchmark sample files.
"""
import numpy as np
import pytest

from partitioner.core.errors import InputValidationError
from partitioner.models.benchmark import BenchmarkSample
from partitioner.services.benchmark_service import (
    benchmark_work_grid,
    fit_latency_model,
    generate_benchmark_samples,
    prediction_error,
    read_samples_csv,
    work_grid_for_budget,
    write_samples_csv,
)


def _line(beta, gamma, work_values):
    return [BenchmarkSample(work=int(n), latency_s=beta * n + gamma) for n in work_values]


def _normal_equations(samples):
    """Weighted normal equations on a rescaled design, solved directly."""
    work = np.array([s.work for s in samples], dtype=float)
    latency = np.array([s.latency_s for s in samples])
    scale = work.max()
    X = np.column_stack([work / scale, np.ones_like(work)])
    W = np.diag(1.0 / latency ** 2)
    coef = np.linalg.solve(X.T @ W @ X, X.T @ W @ latency)
    return coef[0] / scale, coef[1]


class TestFitLatencyModel:
    """Test cases for weighted least squares fitting."""

    def test_noiseless_line(self):
        """Test samples on the line recover its coefficients."""
        fit = fit_latency_model(_line(2e-6, 1.5, [100_000, 1_000_000, 10_000_000]))

        assert fit.beta == pytest.approx(2e-6, rel=1e-10)
        assert fit.gamma == pytest.approx(1.5, rel=1e-10)
        assert fit.max_relative_error < 1e-10
        assert fit.sample_count == 3
        assert fit.warnings == ()

    def test_noisy_matches_normal_equations(self):
        """Test the fit against a direct weighted normal-equations solve."""
        grid = np.geomspace(100_000, 10_000_000, 20).astype(int)
        samples = generate_benchmark_samples(2e-6, 5.0, grid, repeats=1, noise_rel=0.05, seed=3)
        fit = fit_latency_model(samples)
        beta, gamma = _normal_equations(samples)

        assert fit.beta == pytest.approx(beta, rel=1e-8)
        assert fit.gamma == pytest.approx(gamma, rel=1e-8)

    def test_single_work_value(self):
        """Test one distinct work value cannot separate beta from gamma."""
        samples = [BenchmarkSample(1000, 1.0), BenchmarkSample(1000, 1.1)]
        with pytest.raises(InputValidationError, match="degenerate-design"):
            fit_latency_model(samples)

    def test_too_few_samples(self):
        with pytest.raises(InputValidationError, match="insufficient-samples"):
            fit_latency_model([BenchmarkSample(1000, 1.0)])

    def test_negative_intercept_clamped(self):
        """Test a negative fitted setup time is clamped to zero with a warning."""
        fit = fit_latency_model(_line(2e-6, -0.5, [1_000_000, 10_000_000]))

        assert fit.gamma == 0.0
        assert fit.beta > 0
        assert len(fit.warnings) == 1
        assert "clamped" in fit.warnings[0]


class TestPredictionError:
    """Test cases for holdout error characterisation."""

    def test_perfect_fit(self):
        fit = fit_latency_model(_line(3e-6, 2.0, [10_000, 100_000, 1_000_000]))
        report = prediction_error(fit, _line(3e-6, 2.0, [5_000_000, 9_000_000]))

        assert report.max < 1e-9
        assert report.mean < 1e-9

    def test_holdout_equal_to_training(self):
        """Test self-consistency with the fit's own error."""
        samples = generate_benchmark_samples(1e-4, 3.0, [10_000, 50_000, 100_000], noise_rel=0.05, seed=1)
        fit = fit_latency_model(samples)
        report = prediction_error(fit, samples)

        assert report.max == pytest.approx(fit.max_relative_error)

    def test_empty_holdout(self):
        fit = fit_latency_model(_line(3e-6, 2.0, [10_000, 100_000]))
        with pytest.raises(InputValidationError, match="empty-holdout"):
            prediction_error(fit, [])

    def test_extrapolation_accuracy(self):
        """Test fits on a 10x work range predict 4-10x larger problems within 10%."""
        beta, gamma = 2.5e-7, 4.0
        grid = work_grid_for_budget(beta, gamma, budget_s=600.0)
        errors = []
        for trial in range(100):
            samples = generate_benchmark_samples(beta, gamma, grid, repeats=3, noise_rel=0.05, seed=trial)
            holdout_grid = [int(grid[-1] * factor) for factor in (4, 6, 8, 10)]
            holdout = generate_benchmark_samples(beta, gamma, holdout_grid, 1, 0.05, seed=10_000 + trial)
            errors.append(prediction_error(fit_latency_model(samples), holdout).mean)

        assert float(np.mean(errors)) <= 0.10


class TestWorkGrids:
    """Test cases for benchmark size planning."""

    def test_geometric_grid(self):
        grid = benchmark_work_grid(1000, span=10.0, count=5)
        assert grid[0] == 1000
        assert grid[-1] == 10_000
        assert grid == sorted(grid)

    def test_budget_grid_fits_budget(self):
        """Test the planned benchmark runs take no longer than the budget."""
        beta, gamma, budget = 2.5e-7, 4.0, 600.0
        grid = work_grid_for_budget(beta, gamma, budget, repeats=3)
        total = sum(3 * (beta * n + gamma) for n in grid)

        assert total <= budget * (1 + 1e-9)
        assert total >= 0.5 * budget
        assert grid[-1] == pytest.approx(10 * grid[0], rel=1e-3)

    def test_budget_consumed_by_setup(self):
        with pytest.raises(InputValidationError, match="invalid-budget"):
            work_grid_for_budget(1e-6, 100.0, 60.0)

    def test_invalid_grid(self):
        with pytest.raises(InputValidationError, match="invalid-grid"):
            benchmark_work_grid(0)


class TestSamplesCsv:
    """Test cases for the work,latency_s sample format."""

    def test_with_header(self):
        samples = read_samples_csv("work,latency_s\n1000,1.5\n2000,2.5\n")
        assert [s.work for s in samples] == [1000, 2000]
        assert [s.latency_s for s in samples] == [1.5, 2.5]

    def test_without_header(self):
        assert len(read_samples_csv("1000,1.5\n")) == 1

    def test_written_samples_read_back(self):
        samples = generate_benchmark_samples(1e-6, 1.0, [1000, 2000], repeats=2, seed=4)
        assert read_samples_csv(write_samples_csv(samples)) == samples

    def test_empty_file(self):
        with pytest.raises(InputValidationError, match="malformed-csv"):
            read_samples_csv("")

    def test_bad_row_reports_line(self):
        """Test the offending line number is part of the error."""
        with pytest.raises(InputValidationError, match="line 3"):
            read_samples_csv("work,latency_s\n1000,1.5\nabc,2.0\n")

    def test_wrong_column_count(self):
        with pytest.raises(InputValidationError, match="line 1"):
            read_samples_csv("1000,1.5,7\n")


if __name__ == "__main__":
    pytest.main([__file__])
