"""
Partitioning endpoints: solve, trade-off curves, comparison, simulation, rates and fits.

Request bodies reuse the CLI document formats; a cluster is always given
inline under "cluster". Every body is loaded through its marshmallow schema
before any solver runs.
"""
import logging
from typing import Any, Dict

from fastapi import APIRouter, HTTPException

from partitioner.core.errors import PartitionerError
from partitioner.models.milp import SolveOptions
from partitioner.models.schemas import (
    CompareRequestSchema,
    FitRequestSchema,
    FitResultSchema,
    ParetoRequestSchema,
    RateRequestSchema,
    SimSummarySchema,
    SimulateRequestSchema,
    SolveRequestSchema,
    dump_comparison,
    dump_curve,
    dump_plan,
    dump_solver_stats,
    load_document,
    load_plan,
    versioned_dump,
)
from partitioner.services.benchmark_service import fit_latency_model
from partitioner.services.branch_and_bound import solve_milp
from partitioner.services.heuristic_service import weighted_sweep
from partitioner.services.milp_builder import build_milp, extract_plan, start_values
from partitioner.services.pareto_service import compare_methods, epsilon_sweep, heuristic_sweep
from partitioner.services.performance_model import compute_rate
from partitioner.services.simulation_service import simulate_many

logger = logging.getLogger(__name__)
router = APIRouter(tags=["partition"])


def _http_error(exc: PartitionerError) -> HTTPException:
    logger.warning(f"Request rejected: {exc}")
    return HTTPException(status_code=exc.http_status, detail={"code": exc.code, "message": str(exc)})


def _options(request: Dict[str, Any]) -> SolveOptions:
    defaults = SolveOptions()
    return SolveOptions(
        integrality_tol=defaults.integrality_tol,
        relative_gap_tol=request.get("gap", defaults.relative_gap_tol),
        time_limit_s=request.get("time_limit_s", defaults.time_limit_s),
        node_limit=request.get("node_limit", defaults.node_limit),
    )


@router.post("/solve")
def solve(request: Dict[str, Any]) -> Dict[str, Any]:
    """
    Partition one workload.

    Expected request format:
    {
        "cluster": {...},
        "method": "milp" | "heuristic",
        "weight": float,          (heuristic)
        "cost_cap": float,        (milp, optional)
        "time_limit_s": float, "gap": float, "node_limit": int
    }
    """
    try:
        body = load_document(SolveRequestSchema, request)
        cluster = body["cluster"]
        if body["method"] == "heuristic":
            plan = weighted_sweep(cluster, [body["weight"]])[0]
            return {"method": "heuristic", "plan": dump_plan(plan, cluster)}
        cost_cap = body["cost_cap"]
        solution = solve_milp(build_milp(cluster, cost_cap), _options(body), start=start_values(cluster, cost_cap))
        plan = extract_plan(solution, cluster)
        return {
            "method": "milp",
            "cost_cap": cost_cap,
            "plan": dump_plan(plan, cluster),
            "solver": dump_solver_stats(solution),
        }
    except PartitionerError as exc:
        raise _http_error(exc)


@router.post("/pareto")
def pareto(request: Dict[str, Any]) -> Dict[str, Any]:
    """
    Latency-cost trade-off curve.

    Request: {"cluster": {...}, "points": int, "method": "milp" | "heuristic", solver options}
    """
    try:
        body = load_document(ParetoRequestSchema, request)
        cluster = body["cluster"]
        if body["method"] == "milp":
            curve = epsilon_sweep(cluster, body["points"], _options(body))
        else:
            curve = heuristic_sweep(cluster, body["points"])
        return dump_curve(curve, cluster)
    except PartitionerError as exc:
        raise _http_error(exc)


@router.post("/compare")
def compare(request: Dict[str, Any]) -> Dict[str, Any]:
    """Cheapest / median / fastest comparison of the heuristic against the MILP."""
    try:
        body = load_document(CompareRequestSchema, request)
        report = compare_methods(body["cluster"], body["points"], _options(body))
        return dump_comparison(report)
    except PartitionerError as exc:
        raise _http_error(exc)


@router.post("/simulate")
def simulate(request: Dict[str, Any]) -> Dict[str, Any]:
    """
    Replay a plan under coefficient noise.

    Request: {"cluster": {...}, "plan": {...}, "noise": {"beta_rel_sigma", "gamma_rel_sigma", "seed"}, "seeds": [int]}
    """
    try:
        body = load_document(SimulateRequestSchema, request)
        cluster = body["cluster"]
        plan = load_plan(body["plan"], cluster)
        noise = body["noise"]
        results, summary = simulate_many(plan, cluster, noise, body.get("seeds", [noise.seed]))
        return {
            "summary": versioned_dump(SimSummarySchema, summary),
            "runs": [
                {
                    "seed": r.seed,
                    "realized_makespan_s": r.realized_makespan_s,
                    "realized_cost": r.realized_cost,
                    "relative_error": r.relative_makespan_error,
                }
                for r in results
            ],
        }
    except PartitionerError as exc:
        raise _http_error(exc)


@router.post("/rate")
def rate(request: Dict[str, Any]) -> Dict[str, Any]:
    """Price per quantum from explicit TCO values or a device cost profile."""
    try:
        inputs = load_document(RateRequestSchema, request)
        return {"price_per_quantum": compute_rate(inputs), "quantum_s": inputs.quantum_s}
    except PartitionerError as exc:
        raise _http_error(exc)


@router.post("/fit")
def fit(request: Dict[str, Any]) -> Dict[str, Any]:
    """
    Fit the latency model.

    Request: {"samples": [{"work": int, "latency_s": float}, ...]}
    """
    try:
        body = load_document(FitRequestSchema, request)
        return versioned_dump(FitResultSchema, fit_latency_model(body["samples"]))
    except PartitionerError as exc:
        raise _http_error(exc)
