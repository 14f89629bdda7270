"""
Tests for the HTTP API.
"""
import pytest
from fastapi.testclient import TestClient

from partitioner.core.config import settings
from partitioner.main import app
from partitioner.models.schemas import dump_cluster
from tests.helpers import adversarial_cluster, split_only_cluster

client = TestClient(app)


@pytest.fixture
def cluster_document():
    return dump_cluster(adversarial_cluster())


class TestHealthEndpoint:
    """Test cases for health endpoint."""

    def test_health_check(self):
        """Test health check endpoint returns correct status."""
        response = client.get("/api/health")

        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "ok"
        assert data["version"] == settings.VERSION


class TestSolveEndpoint:
    """Test cases for the solve endpoint."""

    def test_milp_solve(self, cluster_document):
        response = client.post("/api/solve", json={"cluster": cluster_document})

        assert response.status_code == 200
        data = response.json()
        assert data["solver"]["status"] == "optimal"
        assert data["plan"]["makespan_s"] == pytest.approx(300.0, rel=1e-4)

    def test_heuristic_solve(self, cluster_document):
        response = client.post("/api/solve", json={"cluster": cluster_document, "method": "heuristic", "weight": 0.0})

        assert response.status_code == 200
        assert response.json()["plan"]["makespan_s"] == pytest.approx(700.0)

    def test_missing_cluster(self):
        """Test invalid input is reported as 422 with its error code."""
        response = client.post("/api/solve", json={"method": "milp"})

        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "invalid-document"

    def test_unknown_method(self, cluster_document):
        response = client.post("/api/solve", json={"cluster": cluster_document, "method": "annealing"})
        assert response.status_code == 422

    def test_infeasible_cap(self, cluster_document):
        """Test a cap below every price is a 409 conflict."""
        response = client.post("/api/solve", json={"cluster": cluster_document, "cost_cap": 0.001})

        assert response.status_code == 409
        assert response.json()["detail"]["code"] == "no-solution"

    def test_time_limit_keeps_baseline_plan(self, cluster_document):
        """Test a search cut short still answers with the seeded plan and its gap."""
        response = client.post("/api/solve", json={"cluster": cluster_document, "time_limit_s": 1e-9})

        assert response.status_code == 200
        data = response.json()
        assert data["solver"]["status"] == "feasible-gap"
        assert 0.0 < data["solver"]["gap"] <= 1.0
        assert data["plan"]["makespan_s"] == pytest.approx(700.0)

    def test_time_limit_without_plan(self):
        """Test a limit hit before any plan meets the cap is a 504."""
        document = dump_cluster(split_only_cluster())
        response = client.post("/api/solve", json={"cluster": document, "cost_cap": 1.5, "time_limit_s": 1e-9})

        assert response.status_code == 504
        assert response.json()["detail"]["code"] == "no-solution"

    @pytest.mark.parametrize("cost_cap", ["cheap", [1.0], {"value": 1.0}])
    def test_non_numeric_cost_cap(self, cluster_document, cost_cap):
        response = client.post("/api/solve", json={"cluster": cluster_document, "cost_cap": cost_cap})

        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "invalid-document"

    @pytest.mark.parametrize("body", [{"weight": 1.5}, {"weight": "heavy"}, {"node_limit": 2.5}, {"shots": 3}])
    def test_invalid_solve_fields(self, cluster_document, body):
        response = client.post("/api/solve", json={"cluster": cluster_document, "method": "heuristic", **body})
        assert response.status_code == 422


class TestCurveEndpoints:
    """Test cases for pareto and compare."""

    def test_heuristic_curve(self, cluster_document):
        response = client.post("/api/pareto", json={"cluster": cluster_document, "points": 3, "method": "heuristic"})

        assert response.status_code == 200
        data = response.json()
        assert data["method"] == "heuristic"
        costs = [point["cost"] for point in data["points"]]
        assert costs == sorted(costs)

    def test_compare(self, cluster_document):
        response = client.post("/api/compare", json={"cluster": cluster_document, "points": 2})

        assert response.status_code == 200
        assert [row["level"] for row in response.json()["rows"]] == ["cheapest", "median", "fastest"]


class TestSimulateEndpoint:
    def test_replay(self, cluster_document):
        plan = client.post("/api/solve", json={"cluster": cluster_document}).json()["plan"]
        response = client.post(
            "/api/simulate",
            json={"cluster": cluster_document, "plan": plan, "noise": {"beta_rel_sigma": 0.05}, "seeds": [1, 2, 3]},
        )

        assert response.status_code == 200
        data = response.json()
        assert data["summary"]["runs"] == 3
        assert [run["seed"] for run in data["runs"]] == [1, 2, 3]

    def test_unknown_noise_field(self, cluster_document):
        plan = client.post("/api/solve", json={"cluster": cluster_document, "method": "heuristic"}).json()["plan"]
        response = client.post("/api/simulate", json={"cluster": cluster_document, "plan": plan, "noise": {"sigma": 1}})
        assert response.status_code == 422


class TestModelEndpoints:
    """Test cases for rate and fit."""

    def test_rate(self):
        response = client.post("/api/rate", json={"tco_per_period": 4380.0, "period_s": 8760 * 3600.0})

        assert response.status_code == 200
        assert response.json()["price_per_quantum"] == pytest.approx(0.5)

    def test_fit(self):
        samples = [{"work": n, "latency_s": 2e-6 * n + 1.5} for n in (100_000, 1_000_000, 10_000_000)]
        response = client.post("/api/fit", json={"samples": samples})

        assert response.status_code == 200
        assert response.json()["beta"] == pytest.approx(2e-6)

    def test_fit_without_samples(self):
        response = client.post("/api/fit", json={"samples": [{"work": 1000}]})
        assert response.status_code == 422


class TestLogsEndpoint:
    """Test cases for the event history."""

    def test_solve_events(self, cluster_document):
        client.post("/api/solve", json={"cluster": cluster_document})
        response = client.get("/api/logs/history", params={"action": "milp_solved"})

        assert response.status_code == 200
        data = response.json()
        assert data["success"] is True
        assert data["count"] == 1
        assert data["logs"][0]["status"] == "optimal"

    def test_clear(self, cluster_document):
        client.post("/api/solve", json={"cluster": cluster_document, "method": "heuristic"})
        assert client.delete("/api/logs/history").status_code == 200
        assert client.get("/api/logs/history").json()["count"] == 0

    def test_invalid_count(self):
        assert client.get("/api/logs/history", params={"count": 0}).status_code == 422


if __name__ == "__main__":
    pytest.main([__file__])
