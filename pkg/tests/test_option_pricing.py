"""
Tests for the Monte Carlo option pricing workload.
"""
import pytest

from partitioner.core.errors import InputValidationError
from partitioner.models.benchmark import McOption
from partitioner.services.option_pricing import (
    black_scholes_call,
    generate_option_workload,
    mc_price,
    paths_for_accuracy,
    required_paths,
)

AT_THE_MONEY = McOption(spot=100.0, strike=100.0, rate=0.05, volatility=0.2, maturity=1.0)


class TestMcPrice:
    """Test cases for the Monte Carlo estimator."""

    def test_closed_form_reference(self):
        """Test the closed-form price of the at-the-money call."""
        assert black_scholes_call(AT_THE_MONEY) == pytest.approx(10.4506, abs=1e-4)

    def test_converges_to_closed_form(self):
        """Test a million paths land within three standard errors of the closed form."""
        estimate = mc_price(AT_THE_MONEY, 1_000_000, seed=42)

        assert estimate.paths == 1_000_000
        assert abs(estimate.estimate - 10.4506) <= 3 * estimate.stderr

    def test_vanishing_volatility(self):
        """Test a deterministic payoff when volatility is negligible."""
        option = McOption(spot=100.0, strike=50.0, rate=0.0, volatility=1e-9, maturity=1.0)
        estimate = mc_price(option, 1000, seed=0)

        assert estimate.estimate == pytest.approx(50.0, abs=1e-3)

    def test_same_seed_is_bit_identical(self):
        first = mc_price(AT_THE_MONEY, 100_000, seed=9, block_paths=4096)
        second = mc_price(AT_THE_MONEY, 100_000, seed=9, block_paths=4096)
        assert first == second

    def test_worker_count_does_not_change_result(self):
        """Test block streams make the estimate independent of the worker count."""
        serial = mc_price(AT_THE_MONEY, 50_000, seed=5, block_paths=4096, workers=1)
        parallel = mc_price(AT_THE_MONEY, 50_000, seed=5, block_paths=4096, workers=4)
        assert serial == parallel

    def test_too_few_paths(self):
        with pytest.raises(InputValidationError, match="invalid-paths"):
            mc_price(AT_THE_MONEY, 1, seed=0)

    def test_invalid_option(self):
        with pytest.raises(InputValidationError, match="invalid-option"):
            McOption(spot=100.0, strike=100.0, rate=0.05, volatility=0.0, maturity=1.0)


class TestRequiredPaths:
    """Test cases for sizing a task by its target accuracy."""

    def test_paths_for_accuracy(self):
        """Test (stddev / accuracy)^2 paths."""
        assert paths_for_accuracy(10.0, 0.001) == 100_000_000

    def test_zero_variance_needs_one_path(self):
        assert paths_for_accuracy(0.0, 0.001) == 1

    def test_invalid_target(self):
        with pytest.raises(InputValidationError, match="invalid-target"):
            paths_for_accuracy(1.0, 0.0)

    def test_required_paths_reach_target(self):
        """Test the sized run meets the accuracy target with slack for pilot noise."""
        paths = required_paths(AT_THE_MONEY, 0.01, pilot_paths=10_000, seed=1)
        estimate = mc_price(AT_THE_MONEY, paths, seed=2)

        assert estimate.stderr <= 0.012

    def test_pilot_too_small(self):
        with pytest.raises(InputValidationError, match="invalid-paths"):
            required_paths(AT_THE_MONEY, 0.01, pilot_paths=10, seed=1)


class TestOptionWorkload:
    """Test cases for the generated option book."""

    def test_workload_shape(self):
        workload, options = generate_option_workload(3, target_accuracy=0.05, pilot_paths=2000, seed=11)

        assert workload.size == 3
        assert [task.id for task in workload.tasks] == ["option-000", "option-001", "option-002"]
        assert all(task.work >= 1 for task in workload.tasks)
        assert len(options) == 3

    def test_deterministic(self):
        first, _ = generate_option_workload(2, target_accuracy=0.05, pilot_paths=2000, seed=3)
        second, _ = generate_option_workload(2, target_accuracy=0.05, pilot_paths=2000, seed=3)
        assert first == second


if __name__ == "__main__":
    pytest.main([__file__])
