"""
Latency-cost trade-off generation: cost bounds, epsilon-constraint sweeps of
the MILP, heuristic sweeps, dominance filtering and method comparison.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from partitioner.core.config import settings
from partitioner.core.errors import InputValidationError, SolverInfeasibleError, SolverLimitError
from partitioner.core.utils import evenly_spaced, stable_digest
from partitioner.models.cluster import ClusterModel, PartitionPlan
from partitioner.models.milp import MilpSolution, SolveOptions, SolveStatus
from partitioner.models.pareto import (
    ComparisonReport,
    ComparisonRow,
    ParetoPoint,
    PointDiagnostic,
    TradeoffCurve,
)
from partitioner.models.schemas import dump_cluster
from partitioner.services.branch_and_bound import solve_milp
from partitioner.services.heuristic_service import (
    cheapest_single_platform,
    inverse_makespan_split,
    weighted_sweep,
)
from partitioner.services.log_service import log_service
from partitioner.services.milp_builder import build_milp, extract_plan, start_values

logger = logging.getLogger(__name__)

DOMINANCE_TOL = 1e-6


def cluster_digest(cluster: ClusterModel) -> str:
    return stable_digest(dump_cluster(cluster))


def solve_plan(
    cluster: ClusterModel,
    cost_cap: Optional[float],
    options: Optional[SolveOptions] = None,
) -> Tuple[PartitionPlan, MilpSolution]:
    """
    Solve the partitioning MILP at one cost cap and rebuild the plan.

    Raises:
        SolverInfeasibleError: no-solution when no plan fits the cap
        SolverLimitError: no-solution when limits hit before any incumbent
    """
    solution = solve_milp(build_milp(cluster, cost_cap), options, start=start_values(cluster, cost_cap))
    return extract_plan(solution, cluster), solution


def _uncapped_optimum(cluster: ClusterModel, options: Optional[SolveOptions]) -> Tuple[PartitionPlan, MilpSolution]:
    return solve_plan(cluster, None, options)


def cost_bounds(
    cluster: ClusterModel,
    method: str = "milp",
    options: Optional[SolveOptions] = None,
) -> Tuple[float, float]:
    """
    Lower and upper ends of the cost range worth sweeping.

    C_L is the cheapest single-platform cost for both methods. C_U is the
    cost of the uncapped latency optimum (milp) or of the inverse-makespan
    split (heuristic), never below C_L.
    """
    lower = cheapest_single_platform(cluster).total_cost
    if method == "milp":
        plan, _ = _uncapped_optimum(cluster, options)
    elif method == "heuristic":
        plan = inverse_makespan_split(cluster)
    else:
        raise InputValidationError("invalid-method", f"unknown method {method!r}")
    return lower, max(lower, plan.total_cost)


def pareto_filter(points: Iterable[ParetoPoint]) -> List[ParetoPoint]:
    """
    Drop every weakly dominated point and sort by cost.

    Among points with identical cost and makespan the first one in input
    order survives.
    """
    indexed = sorted(enumerate(points), key=lambda item: (item[1].cost, item[1].makespan_s, item[0]))
    kept: List[ParetoPoint] = []
    best_makespan = math.inf
    for _, point in indexed:
        if point.makespan_s < best_makespan:
            kept.append(point)
            best_makespan = point.makespan_s
    return kept


def _solve_cap(cluster: ClusterModel, cap: float, options: Optional[SolveOptions]) -> Tuple[Optional[PartitionPlan], MilpSolution]:
    solution = solve_milp(build_milp(cluster, cap), options, start=start_values(cluster, cap))
    plan = extract_plan(solution, cluster) if solution.status.has_solution else None
    return plan, solution


@dataclass(frozen=True)
class _Sweep:
    curve: TradeoffCurve
    fastest: Optional[PartitionPlan]
    spaced_caps: List[float]
    solved: Dict[float, Tuple[Optional[PartitionPlan], MilpSolution]]


def epsilon_sweep(
    cluster: ClusterModel,
    point_count: int = settings.PARETO_POINTS,
    options: Optional[SolveOptions] = None,
    extra_caps: Sequence[float] = (),
    workers: Optional[int] = None,
) -> TradeoffCurve:
    """
    Solve the MILP at evenly spaced cost caps between C_L and C_U.

    Every solved plan is re-costed through the cost model; caps without a
    solution are recorded in the diagnostics and dropped.

    Args:
        cluster: Cluster to partition
        point_count: Number of evenly spaced caps (>= 2)
        options: Solver options shared by every cap
        extra_caps: Additional caps solved alongside the evenly spaced ones
        workers: Concurrent solves (defaults to settings.SWEEP_WORKERS)

    Raises:
        InputValidationError: invalid-point-count
        SolverInfeasibleError: all-points-infeasible
    """
    return _sweep(cluster, point_count, options, extra_caps, workers).curve


def _sweep(
    cluster: ClusterModel,
    point_count: int,
    options: Optional[SolveOptions],
    extra_caps: Sequence[float] = (),
    workers: Optional[int] = None,
) -> _Sweep:
    if point_count < 2:
        raise InputValidationError("invalid-point-count", f"point_count={point_count} < 2")
    cheapest = cheapest_single_platform(cluster)
    candidates: List[ParetoPoint] = [ParetoPoint.from_plan(cheapest, "milp", 0.0, cheapest.total_cost)]
    lower = cheapest.total_cost
    fastest: Optional[PartitionPlan] = None
    try:
        fastest, fastest_solution = _uncapped_optimum(cluster, options)
        candidates.append(ParetoPoint.from_plan(fastest, "milp", fastest_solution.gap, None))
        upper = max(lower, fastest.total_cost)
    except SolverLimitError:
        upper = max(lower, inverse_makespan_split(cluster).total_cost)
        logger.warning(f"Uncapped solve hit its limits; sweeping up to the split cost {upper:.6g}")
    spaced_caps = evenly_spaced(lower, upper, point_count)
    caps = spaced_caps + [float(c) for c in extra_caps]

    # Identical caps give identical solves
    unique_caps = sorted(set(caps))
    with ThreadPoolExecutor(max_workers=workers or settings.SWEEP_WORKERS) as pool:
        solved = dict(zip(unique_caps, pool.map(lambda cap: _solve_cap(cluster, cap, options), unique_caps)))

    swept = {}
    for index, cap in enumerate(caps):
        plan, solution = solved[cap]
        if plan is not None:
            swept[index] = ParetoPoint.from_plan(plan, "milp", solution.gap, cap)
    if not swept:
        if all(solution.status is SolveStatus.INFEASIBLE for _, solution in solved.values()):
            raise SolverInfeasibleError("all-points-infeasible", "no swept cost cap produced a plan")
        logger.warning("No swept cost cap produced a plan within the solver limits")

    points = pareto_filter(list(swept.values()) + candidates)
    kept = {id(point) for point in points}
    diagnostics = []
    for index, cap in enumerate(caps):
        plan, solution = solved[cap]
        point = swept.get(index)
        if point is None:
            reason = f"no incumbent ({solution.status.value})"
        elif id(point) not in kept:
            reason = "dominated"
        else:
            reason = ""
        diagnostics.append(PointDiagnostic(
            index=index,
            cost_cap=cap,
            status=solution.status.value,
            gap=solution.gap,
            nodes=solution.nodes_explored,
            kept=point is not None and id(point) in kept,
            reason=reason,
            cost=None if plan is None else plan.total_cost,
            makespan_s=None if plan is None else plan.makespan_s,
        ))

    log_service.add_custom_log(
        f"MILP sweep kept {len(points)} points from {len(caps)} caps",
        action="pareto_sweep",
        method="milp",
        caps=len(caps),
        points=len(points),
        worst_gap=max((p.solver_gap for p in points), default=0.0),
    )
    curve = TradeoffCurve(
        points=tuple(points),
        cluster_digest=cluster_digest(cluster),
        method="milp",
        diagnostics=tuple(diagnostics),
    )
    return _Sweep(curve, fastest, spaced_caps, solved)


def heuristic_sweep(cluster: ClusterModel, point_count: int = settings.PARETO_POINTS) -> TradeoffCurve:
    """
    Weighted heuristic plans at evenly spaced weights plus both bound plans, filtered.

    Raises:
        InputValidationError: invalid-point-count
    """
    if point_count < 2:
        raise InputValidationError("invalid-point-count", f"point_count={point_count} < 2")
    plans = weighted_sweep(cluster, evenly_spaced(0.0, 1.0, point_count))
    plans += [cheapest_single_platform(cluster), inverse_makespan_split(cluster)]
    points = pareto_filter(ParetoPoint.from_plan(plan, "heuristic") for plan in plans)
    log_service.add_custom_log(
        f"Heuristic sweep kept {len(points)} of {len(plans)} plans",
        action="pareto_sweep",
        method="heuristic",
        caps=len(plans),
        points=len(points),
        worst_gap=0.0,
    )
    return TradeoffCurve(points=tuple(points), cluster_digest=cluster_digest(cluster), method="heuristic")


def dominance_check(
    milp_curve: TradeoffCurve,
    heuristic_curve: TradeoffCurve,
    tol: float = DOMINANCE_TOL,
) -> List[ParetoPoint]:
    """
    Heuristic points that no MILP point matches or beats.

    A MILP point covers a heuristic point when it costs no more and its
    makespan is no longer, allowing for the MILP point's own solver gap.
    """
    uncovered = []
    for point in heuristic_curve.points:
        covered = any(
            m.cost <= point.cost + tol
            and m.makespan_s <= point.makespan_s + m.solver_gap * m.makespan_s + tol
            for m in milp_curve.points
        )
        if not covered:
            uncovered.append(point)
    return uncovered


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return 1.0 if numerator == 0 else math.inf
    return numerator / denominator


def _middle(values: Sequence) -> int:
    return (len(values) - 1) // 2


def compare_methods(
    cluster: ClusterModel,
    point_count: int = settings.PARETO_POINTS,
    options: Optional[SolveOptions] = None,
) -> ComparisonReport:
    """
    Cheapest, median and fastest rows for the heuristic and the MILP.

    The cheapest row is the shared single-platform plan. The median row is
    the plan at the middle swept cap (MILP) and the middle swept weight on the
    cost-ascending side (heuristic). The fastest row compares the uncapped
    optimum with the inverse-makespan split. The MILP sweep also solves at
    every heuristic point's cost so dominance is checked at shared caps; the
    MILP rows reuse the sweep's own solves.
    """
    heuristic_curve = heuristic_sweep(cluster, point_count)
    sweep = _sweep(cluster, point_count, options, extra_caps=[p.cost for p in heuristic_curve.points])
    milp_curve = sweep.curve

    cheapest = cheapest_single_platform(cluster)
    if sweep.fastest is None:
        raise SolverLimitError("no-solution", "the uncapped solve found no plan within its limits")
    milp_fastest = sweep.fastest
    heuristic_fastest = inverse_makespan_split(cluster)

    median_cap = sweep.spaced_caps[_middle(sweep.spaced_caps)]
    median_milp, median_solution = sweep.solved[median_cap]
    if median_milp is None:
        # Raises the no-solution error matching the solver status
        median_milp = extract_plan(median_solution, cluster)
    weights = evenly_spaced(1.0, 0.0, point_count)
    median_heuristic = weighted_sweep(cluster, [weights[_middle(weights)]])[0]

    def row(level: str, heuristic: PartitionPlan, milp: PartitionPlan) -> ComparisonRow:
        return ComparisonRow(
            level=level,
            heuristic_cost=heuristic.total_cost,
            heuristic_makespan_s=heuristic.makespan_s,
            milp_cost=milp.total_cost,
            milp_makespan_s=milp.makespan_s,
            cost_ratio=_ratio(heuristic.total_cost, milp.total_cost),
            latency_ratio=_ratio(heuristic.makespan_s, milp.makespan_s),
        )

    rows = (
        row("cheapest", cheapest, cheapest),
        row("median", median_heuristic, median_milp),
        row("fastest", heuristic_fastest, milp_fastest),
    )
    uncovered = dominance_check(milp_curve, heuristic_curve)
    if uncovered:
        logger.warning(f"{len(uncovered)} heuristic points are not dominated by the MILP curve")
    logger.info(
        "Comparison: " + ", ".join(f"{r.level} latency x{r.latency_ratio:.3g} cost x{r.cost_ratio:.3g}" for r in rows)
    )
    return ComparisonReport(
        rows=rows,
        milp_curve=milp_curve,
        heuristic_curve=heuristic_curve,
        undominated_heuristic_points=len(uncovered),
    )
