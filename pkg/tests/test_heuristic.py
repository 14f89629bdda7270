"""
Tests for the baseline heuristic partitioners.
"""
import numpy as np
import pytest

from partitioner.core.errors import InputValidationError
from partitioner.models.cluster import AllocationMatrix
from partitioner.models.pareto import SweepWeight
from partitioner.services.branch_and_bound import solve_milp
from partitioner.services.heuristic_service import (
    cheapest_platform_index,
    cheapest_single_platform,
    inverse_makespan_split,
    platform_scores,
    weighted_sweep,
)
from partitioner.services.milp_builder import (
    MAKESPAN,
    build_milp,
    check_solution,
    quanta_name,
    share_name,
    support_name,
)
from partitioner.services.performance_model import check_plan_consistency
from tests.helpers import make_cluster, naive_plan_metrics, random_small_cluster


def _fine_grained_cluster(rng, mu, tau):
    """No setup time and a one-millisecond quantum, so billing is nearly continuous."""
    rate = rng.uniform(0.1, 3.0, size=mu)
    return make_cluster(
        beta=rng.uniform(1e-4, 1e-3, size=(mu, tau)),
        gamma=np.zeros((mu, tau)),
        work=rng.integers(10_000, 50_000, size=tau),
        quantum_s=[1e-3] * mu,
        price=rate * 1e-3,
    )


def _plan_values(plan):
    """Solver values describing a plan: shares, support, billed quanta and makespan."""
    mu, tau = plan.allocation.shape
    values = {MAKESPAN: plan.makespan_s}
    for i in range(mu):
        for j in range(tau):
            values[share_name(i, j)] = float(plan.allocation.entries[i, j])
            values[support_name(i, j)] = float(plan.support[i, j])
        values[quanta_name(i)] = float(plan.billed_quanta[i])
    return values


class TestCheapestSinglePlatform:
    """Test cases for the cost-end bound plan."""

    def test_single_platform_cluster(self):
        cluster = make_cluster([[1e-3, 2e-3]], [[1.0, 1.0]], [100, 100], [1.0], [1.0])
        plan = cheapest_single_platform(cluster)

        assert plan.allocation.entries.tolist() == [[1.0, 1.0]]

    def test_picks_cheaper_platform(self, two_platform_cluster):
        plan = cheapest_single_platform(two_platform_cluster)

        assert plan.allocation.entries.tolist() == [[0.0, 0.0], [1.0, 1.0]]
        assert plan.total_cost == pytest.approx(0.26)

    def test_cost_tie_goes_to_lower_latency(self):
        """Test equal bills are decided by speed, then by index."""
        faster_second = make_cluster([[2e-3], [1e-3]], [[0.0], [0.0]], [1000], [3600.0, 3600.0], [1.0, 1.0])
        identical = make_cluster([[1e-3], [1e-3]], [[0.0], [0.0]], [1000], [3600.0, 3600.0], [1.0, 1.0])

        assert cheapest_platform_index(faster_second) == 1
        assert cheapest_platform_index(identical) == 0

    def test_matches_exhaustive_scan(self, generated_cluster):
        """Test the chosen cost is the minimum of every single-platform plan."""
        cluster = generated_cluster
        costs = []
        for i in range(cluster.mu):
            entries = AllocationMatrix.single_platform(cluster.mu, cluster.tau, i).entries
            costs.append(naive_plan_metrics(cluster, entries)[3])

        assert cheapest_single_platform(cluster).total_cost == pytest.approx(min(costs), rel=1e-12)


class TestInverseMakespanSplit:
    """Test cases for the latency-end bound plan."""

    def test_identical_platforms_split_evenly(self, symmetric_cluster):
        plan = inverse_makespan_split(symmetric_cluster)
        assert plan.allocation.entries.tolist() == [[0.5, 0.5], [0.5, 0.5]]

    def test_inverse_proportional_shares(self):
        """Test full-workload makespans [1, 3] give shares [0.75, 0.25]."""
        cluster = make_cluster([[1e-3], [3e-3]], [[0.0], [0.0]], [1000], [1.0, 1.0], [1.0, 1.0])
        plan = inverse_makespan_split(cluster)

        assert plan.allocation.entries[:, 0].tolist() == pytest.approx([0.75, 0.25])

    def test_beats_every_single_platform_without_setup(self, rng):
        """Test the split balances load exactly when setup time is zero."""
        for _ in range(10):
            cluster = _fine_grained_cluster(rng, 4, 5)
            plan = inverse_makespan_split(cluster)
            makespans = cluster.full_workload_latency

            assert plan.makespan_s == pytest.approx(1.0 / np.sum(1.0 / makespans), rel=1e-9)
            assert plan.makespan_s <= makespans.min()

    def test_zero_makespan_rejected(self):
        cluster = make_cluster([[1e-3], [1e-3]], [[0.0], [1.0]], [0], [1.0, 1.0], [1.0, 1.0])
        with pytest.raises(InputValidationError, match="zero-makespan"):
            inverse_makespan_split(cluster)


class TestWeightedSweep:
    """Test cases for the cost-weighted heuristic family."""

    def test_cost_end_matches_cheapest(self, generated_cluster):
        plan = weighted_sweep(generated_cluster, [1.0])[0]
        assert plan.total_cost == cheapest_single_platform(generated_cluster).total_cost

    def test_latency_end_matches_split(self, rng):
        for _ in range(5):
            cluster = _fine_grained_cluster(rng, 3, 4)
            plan = weighted_sweep(cluster, [SweepWeight(0.0)])[0]
            np.testing.assert_allclose(
                plan.allocation.entries, inverse_makespan_split(cluster).allocation.entries, atol=1e-9
            )

    def test_scores(self, two_platform_cluster):
        """Test min-max normalised scores at an even weighting."""
        # p0 is the expensive fast platform, p1 the cheap slow one
        assert platform_scores(two_platform_cluster, 0.5).tolist() == pytest.approx([0.5, 0.5])
        assert platform_scores(two_platform_cluster, 0.0).tolist() == pytest.approx([0.0, 1.0])

    def test_high_cost_weight_drops_expensive_platform(self, two_platform_cluster):
        plan = weighted_sweep(two_platform_cluster, [0.75])[0]
        assert plan.allocation.entries.tolist() == [[0.0, 0.0], [1.0, 1.0]]

    def test_sweep_endpoints_bound_the_family(self, rng):
        """Test w=0 is the fastest plan of the sweep and w=1 the cheapest."""
        weights = [0.0, 0.25, 0.5, 0.75, 1.0]
        for _ in range(5):
            cluster = _fine_grained_cluster(rng, 6, 4)
            plans = weighted_sweep(cluster, weights)
            rounding = cluster.mu * cluster.price.max()

            assert len(plans) == 5
            assert plans[0].makespan_s <= min(p.makespan_s for p in plans) * (1 + 1e-9)
            assert plans[-1].total_cost <= min(p.total_cost for p in plans) + rounding

    def test_plans_are_consistent(self, generated_cluster):
        for plan in weighted_sweep(generated_cluster, np.linspace(0.0, 1.0, 7)):
            check_plan_consistency(plan, generated_cluster)

    def test_empty_weights(self, two_platform_cluster):
        with pytest.raises(InputValidationError, match="empty-weights"):
            weighted_sweep(two_platform_cluster, [])

    def test_weight_out_of_range(self, two_platform_cluster):
        with pytest.raises(InputValidationError, match="invalid-weight"):
            weighted_sweep(two_platform_cluster, [1.5])


class TestAgainstMilp:
    """Test cases relating heuristic plans to the exact program."""

    def test_plans_feasible_at_own_cost(self, rng):
        for _ in range(5):
            cluster = random_small_cluster(rng, 3, 2)
            for plan in weighted_sweep(cluster, [0.0, 0.5, 1.0]):
                program = build_milp(cluster, cost_cap=plan.total_cost)
                assert check_solution(program, _plan_values(plan), integrality_tol=1e-9) <= 1e-6

    def test_milp_never_slower_at_same_cost(self, rng):
        for _ in range(4):
            cluster = random_small_cluster(rng, 2, 2)
            for plan in weighted_sweep(cluster, [0.0, 0.5, 1.0]):
                solution = solve_milp(build_milp(cluster, cost_cap=plan.total_cost))
                assert solution.objective_value <= plan.makespan_s * (1 + 2e-4)


if __name__ == "__main__":
    pytest.main([__file__])
