"""
Tests for document loading and serialisation.
"""
import math

import pytest

from partitioner.core.errors import InputValidationError
from partitioner.models.benchmark import BenchmarkSample
from partitioner.models.cluster import ClusterModel, RateInputs
from partitioner.models.milp import MilpSolution, SolveStatus
from partitioner.models.schemas import (
    ClusterSchema,
    FitRequestSchema,
    MAX_SIMULATION_SEEDS,
    RateRequestSchema,
    SimulateRequestSchema,
    SolveRequestSchema,
    dump_cluster,
    dump_plan,
    dump_solver_stats,
    load_document,
    load_plan,
)
from partitioner.models.simulation import NoiseSpec
from partitioner.services.heuristic_service import inverse_makespan_split


def _cluster_document(**overrides):
    document = {
        "schema_version": "1",
        "platforms": [
            {"id": "gpu", "quantum_s": 3600.0, "price": 0.65, "price_unit": "per_hour"},
            {"id": "cpu", "quantum_s": 60.0, "price": 0.6, "price_unit": "per_hour"},
        ],
        "tasks": [{"id": "a", "work": 1000}, {"id": "b", "work": 2000}],
        "beta": [[1e-3, 1e-3], [2e-3, 2e-3]],
        "gamma": [[5.0, 5.0], [0.5, 0.5]],
    }
    document.update(overrides)
    return document


class TestClusterDocument:
    """Test cases for cluster files."""

    def test_load(self):
        cluster = load_document(ClusterSchema, _cluster_document())

        assert isinstance(cluster, ClusterModel)
        assert [p.id for p in cluster.platforms] == ["gpu", "cpu"]
        # Hourly prices are converted to the platform's own quantum
        assert cluster.platforms[0].price_per_quantum == pytest.approx(0.65)
        assert cluster.platforms[1].price_per_quantum == pytest.approx(0.01)

    def test_dump_then_load_keeps_values(self, generated_cluster):
        reloaded = load_document(ClusterSchema, dump_cluster(generated_cluster))

        assert reloaded.platforms == generated_cluster.platforms
        assert reloaded.workload == generated_cluster.workload
        assert reloaded.beta.tolist() == generated_cluster.beta.tolist()

    def test_missing_version_accepted(self):
        document = _cluster_document()
        del document["schema_version"]
        assert load_document(ClusterSchema, document).mu == 2

    def test_wrong_version(self):
        with pytest.raises(InputValidationError, match="schema-mismatch"):
            load_document(ClusterSchema, _cluster_document(schema_version="2"))

    def test_wrong_matrix_shape(self):
        with pytest.raises(InputValidationError, match="invalid-document"):
            load_document(ClusterSchema, _cluster_document(beta=[[1e-3, 1e-3]]))

    def test_fractional_work_rejected(self):
        tasks = [{"id": "a", "work": 10.5}, {"id": "b", "work": 2000}]
        with pytest.raises(InputValidationError, match="invalid-document"):
            load_document(ClusterSchema, _cluster_document(tasks=tasks))

    def test_nonpositive_beta_rejected(self):
        with pytest.raises(InputValidationError, match="invalid-coefficient"):
            load_document(ClusterSchema, _cluster_document(beta=[[0.0, 1e-3], [2e-3, 2e-3]]))

    def test_unknown_field_rejected(self):
        with pytest.raises(InputValidationError, match="invalid-document"):
            load_document(ClusterSchema, _cluster_document(replicas=3))

    def test_unknown_platform_field_rejected(self):
        document = _cluster_document()
        document["platforms"][0]["spot"] = True
        with pytest.raises(InputValidationError, match="invalid-document"):
            load_document(ClusterSchema, document)


class TestPlanDocument:
    """Test cases for plan files."""

    def test_reload_rederives_plan(self, two_platform_cluster):
        plan = inverse_makespan_split(two_platform_cluster)
        reloaded = load_plan(dump_plan(plan, two_platform_cluster), two_platform_cluster)

        assert reloaded.total_cost == plan.total_cost
        assert reloaded.makespan_s == pytest.approx(plan.makespan_s)

    def test_ids_must_match(self, two_platform_cluster):
        document = dump_plan(inverse_makespan_split(two_platform_cluster), two_platform_cluster)
        document["platform_ids"] = ["x", "y"]
        with pytest.raises(InputValidationError, match="dimension-mismatch"):
            load_plan(document, two_platform_cluster)

    def test_unknown_field_rejected(self, two_platform_cluster):
        document = dump_plan(inverse_makespan_split(two_platform_cluster), two_platform_cluster)
        document["weights"] = [1.0, 1.0]
        with pytest.raises(InputValidationError, match="invalid-document"):
            load_plan(document, two_platform_cluster)


class TestRequestBodies:
    """Test cases for HTTP request bodies."""

    def test_solve_defaults(self):
        body = load_document(SolveRequestSchema, {"cluster": _cluster_document()})

        assert isinstance(body["cluster"], ClusterModel)
        assert body["method"] == "milp"
        assert body["weight"] == 1.0
        assert body["cost_cap"] is None

    def test_non_numeric_cost_cap(self):
        with pytest.raises(InputValidationError, match="invalid-document"):
            load_document(SolveRequestSchema, {"cluster": _cluster_document(), "cost_cap": "cheap"})

    def test_nested_version_mismatch(self):
        with pytest.raises(InputValidationError, match="schema-mismatch"):
            load_document(SolveRequestSchema, {"cluster": _cluster_document(schema_version="2")})

    def test_noise_loads_spec(self):
        body = load_document(
            SimulateRequestSchema,
            {"cluster": _cluster_document(), "plan": {}, "noise": {"beta_rel_sigma": 0.05}, "seeds": [1, 2]},
        )

        assert body["noise"] == NoiseSpec(beta_rel_sigma=0.05)
        assert body["seeds"] == [1, 2]

    def test_too_many_seeds(self):
        seeds = list(range(MAX_SIMULATION_SEEDS + 1))
        with pytest.raises(InputValidationError, match="invalid-document"):
            load_document(SimulateRequestSchema, {"cluster": _cluster_document(), "plan": {}, "seeds": seeds})

    def test_fit_samples(self):
        body = load_document(FitRequestSchema, {"samples": [{"work": 10, "latency_s": 1.0}]})
        assert body["samples"] == [BenchmarkSample(10, 1.0)]


class TestRateRequest:
    """Test cases for rate inputs."""

    def test_explicit_values(self):
        inputs = load_document(RateRequestSchema, {"tco_per_period": 4380.0, "period_s": 31_536_000.0})

        assert isinstance(inputs, RateInputs)
        assert inputs.quantum_s == 3600.0

    def test_profile(self):
        inputs = load_document(RateRequestSchema, {"profile": {"capital_cost": 3120.0, "power_w": 135.0, "recovery_years": 2}})
        assert inputs.tco_per_period > 0

    def test_both_sources_rejected(self):
        document = {"tco_per_period": 1.0, "period_s": 1.0, "profile": {"capital_cost": 1.0, "power_w": 1.0, "recovery_years": 1}}
        with pytest.raises(InputValidationError, match="invalid-document"):
            load_document(RateRequestSchema, document)


class TestSolverStats:
    def test_infinite_values_become_null(self):
        solution = MilpSolution({}, math.inf, SolveStatus.LIMIT_HIT, math.inf, 0)
        stats = dump_solver_stats(solution)

        assert stats["status"] == "limit-hit"
        assert stats["gap"] is None
        assert stats["objective_value"] is None


if __name__ == "__main__":
    pytest.main([__file__])
