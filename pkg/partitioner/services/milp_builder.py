"""
Builds the partitioning MILP for a cluster and turns solutions back into plans.

Variable layout (all platform-major):
    A_i_j  share of task j on platform i, continuous in [0, 1]
    B_i_j  1 when platform i carries any of task j
    D_i    quanta billed on platform i, integer in [0, D_i^max]
    F_L    makespan, continuous in [0, F_L^max]
"""
import logging
import math
from typing import Dict, Mapping, Optional

import numpy as np

from partitioner.core.config import settings
from partitioner.core.errors import InputValidationError, SolverInfeasibleError, SolverLimitError
from partitioner.models.cluster import AllocationMatrix, ClusterModel, PartitionPlan
from partitioner.models.milp import (
    Integrality,
    LinearConstraint,
    MilpSolution,
    MixedIntegerProgram,
    Sense,
    SolveStatus,
    VariableSpec,
)
from partitioner.services.heuristic_service import inverse_makespan_split
from partitioner.services.performance_model import (
    billed_quanta,
    plan_from_allocation,
    single_platform_plan,
    snap_allocation,
)

logger = logging.getLogger(__name__)

MAKESPAN = "F_L"
EXTRACT_MAKESPAN_TOL = 1e-6
# Overshoot past a solver quantum boundary treated as float residue, relative
BILLING_RESIDUE_TOL = 1e-6
# Relative distance kept below the boundary once residue is moved
BILLING_MARGIN = 1e-9
# Headroom on D_i^max for latency rows that sum a hair above the full-workload latency
QUANTA_BOUND_SLACK = 1e-9


def share_name(i: int, j: int) -> str:
    return f"A_{i}_{j}"


def support_name(i: int, j: int) -> str:
    return f"B_{i}_{j}"


def quanta_name(i: int) -> str:
    return f"D_{i}"


def build_milp(cluster: ClusterModel, cost_cap: Optional[float] = None) -> MixedIntegerProgram:
    """
    Minimise the makespan F_L subject to an optional cap on billed cost.

    Rows, in order: one assignment row per task, one makespan row per
    platform, one share/support link per (platform, task), one billing row
    per platform, then the cost cap when given.

    Raises:
        InputValidationError: invalid-cost-cap when cost_cap < 0
    """
    if cost_cap is not None and not cost_cap >= 0:
        raise InputValidationError("invalid-cost-cap", f"cost_cap={cost_cap}")

    mu, tau = cluster.mu, cluster.tau
    scaled = cluster.scaled_work
    gamma = cluster.gamma
    quantum = cluster.quantum_s
    full_latency = cluster.full_workload_latency
    quanta_max = billed_quanta(full_latency * (1.0 + QUANTA_BOUND_SLACK), quantum)

    variables = []
    for i in range(mu):
        for j in range(tau):
            variables.append(VariableSpec(share_name(i, j), 0.0, 1.0, Integrality.CONTINUOUS))
    for i in range(mu):
        for j in range(tau):
            variables.append(VariableSpec(support_name(i, j), 0.0, 1.0, Integrality.BINARY))
    for i in range(mu):
        variables.append(VariableSpec(quanta_name(i), 0.0, float(quanta_max[i]), Integrality.INTEGER))
    variables.append(VariableSpec(MAKESPAN, 0.0, float(full_latency.max()), Integrality.CONTINUOUS))

    def platform_latency(i: int) -> dict:
        terms = {}
        for j in range(tau):
            if scaled[i, j]:
                terms[share_name(i, j)] = float(scaled[i, j])
            if gamma[i, j]:
                terms[support_name(i, j)] = float(gamma[i, j])
        return terms

    constraints = []
    for j in range(tau):
        constraints.append(LinearConstraint(
            {share_name(i, j): 1.0 for i in range(mu)}, Sense.EQ, 1.0, f"assign_{j}"
        ))
    for i in range(mu):
        constraints.append(LinearConstraint(
            {**platform_latency(i), MAKESPAN: -1.0}, Sense.LE, 0.0, f"makespan_{i}"
        ))
    for i in range(mu):
        for j in range(tau):
            constraints.append(LinearConstraint(
                {share_name(i, j): 1.0, support_name(i, j): -1.0}, Sense.LE, 0.0, f"support_{i}_{j}"
            ))
    for i in range(mu):
        constraints.append(LinearConstraint(
            {**platform_latency(i), quanta_name(i): -float(quantum[i])}, Sense.LE, 0.0, f"quanta_{i}"
        ))
    if cost_cap is not None:
        prices = {quanta_name(i): float(cluster.price[i]) for i in range(mu) if cluster.price[i]}
        if prices:
            constraints.append(LinearConstraint(prices, Sense.LE, float(cost_cap), "cost_cap"))
        else:
            logger.warning("Every platform is free; cost cap row omitted")

    name = f"partition_{mu}x{tau}" + ("" if cost_cap is None else f"_cap_{cost_cap:.6g}")
    logger.debug(f"Built {name}: {len(variables)} variables, {len(constraints)} rows")
    return MixedIntegerProgram(
        variables=tuple(variables),
        constraints=tuple(constraints),
        objective={MAKESPAN: 1.0},
        name=name,
    )


def _settle_billing(plan: PartitionPlan, cluster: ClusterModel, quanta: np.ndarray) -> PartitionPlan:
    """
    Move float residue off platforms billed one quantum past the solver's D_i.

    Latency re-derived from snapped shares can land a hair past a quantum
    boundary the program sat exactly on. That overshoot, plus BILLING_MARGIN,
    is shifted to another platform already running the same task and still
    inside its own billed quanta. Overruns beyond BILLING_RESIDUE_TOL are
    left alone.
    """
    entries = plan.allocation.entries.copy()
    latency = plan.platform_latency_s.copy()
    limit = quanta * cluster.quantum_s
    scaled = cluster.scaled_work
    moved = False
    for i in np.flatnonzero(plan.billed_quanta > quanta):
        scale = max(1.0, limit[i])
        margin = BILLING_MARGIN * scale
        excess = latency[i] - limit[i]
        if excess > BILLING_RESIDUE_TOL * scale:
            continue
        for j in np.argsort(-entries[i]):
            if scaled[i, j] <= 0.0:
                continue
            delta = (excess + margin) / scaled[i, j]
            if entries[i, j] - delta < settings.SUPPORT_EPSILON:
                continue
            headroom = limit - latency - delta * scaled[:, j]
            receivers = [
                k for k in range(cluster.mu)
                if k != i and entries[k, j] > 0.0 and headroom[k] > BILLING_MARGIN * max(1.0, limit[k])
            ]
            if not receivers:
                continue
            k = max(receivers, key=lambda r: headroom[r])
            entries[i, j] -= delta
            entries[k, j] += delta
            latency[i] -= delta * scaled[i, j]
            latency[k] += delta * scaled[k, j]
            moved = True
            break
    if not moved:
        return plan
    settled = plan_from_allocation(cluster, AllocationMatrix(entries))
    logger.debug(f"Settled billing residue: cost {plan.total_cost:.9g} -> {settled.total_cost:.9g}")
    return settled


def extract_plan(solution: MilpSolution, cluster: ClusterModel) -> PartitionPlan:
    """
    Rebuild a PartitionPlan from the A values of a solved program.

    Shares under the support threshold are zeroed and columns renormalised;
    latency and cost are then re-derived from the allocation, so a billing
    variable left above its tight value does not inflate the plan cost. A
    platform pushed one quantum past its D_i by float residue is settled
    back under it.

    Raises:
        SolverInfeasibleError: no-solution for infeasible or unbounded programs
        SolverLimitError: no-solution when a limit hit before any incumbent
    """
    if not solution.status.has_solution:
        error = SolverLimitError if solution.status is SolveStatus.LIMIT_HIT else SolverInfeasibleError
        raise error("no-solution", f"solver status is {solution.status.value}")

    raw = np.array(
        [[solution.values[share_name(i, j)] for j in range(cluster.tau)] for i in range(cluster.mu)]
    )
    plan = plan_from_allocation(cluster, AllocationMatrix(snap_allocation(raw)))
    names = [quanta_name(i) for i in range(cluster.mu)]
    if all(name in solution.values for name in names):
        quanta = np.round([solution.values[name] for name in names]).astype(np.int64)
        plan = _settle_billing(plan, cluster, quanta)
    if plan.makespan_s > solution.objective_value + EXTRACT_MAKESPAN_TOL:
        logger.warning(
            f"Extracted makespan {plan.makespan_s:.9g}s exceeds solver F_L {solution.objective_value:.9g}s"
        )
    return plan


def _format_term(coefficient: float, name: str, first: bool) -> str:
    sign = "-" if coefficient < 0 else ("" if first else "+")
    return f"{sign} {abs(coefficient):.17g} {name}".strip()


def _format_expression(coefficients: Mapping[str, float]) -> str:
    terms = [
        _format_term(value, name, k == 0)
        for k, (name, value) in enumerate((n, v) for n, v in coefficients.items() if v != 0)
    ]
    return " ".join(terms) if terms else "0"


def program_to_lp_format(program: MixedIntegerProgram) -> str:
    """Render the program in CPLEX LP text format."""
    lines = [f"\\ {program.name}", "Minimize", f" obj: {_format_expression(program.objective)}", "Subject To"]
    for k, row in enumerate(program.constraints):
        label = row.name or f"c{k}"
        lines.append(f" {label}: {_format_expression(row.coefficients)} {row.sense.value} {row.rhs:.17g}")

    lines.append("Bounds")
    for v in program.variables:
        lower = "-inf" if math.isinf(v.lower) else f"{v.lower:.17g}"
        upper = "+inf" if math.isinf(v.upper) else f"{v.upper:.17g}"
        lines.append(f" {lower} <= {v.name} <= {upper}")

    binaries = [v.name for v in program.variables if v.integrality is Integrality.BINARY]
    generals = [v.name for v in program.variables if v.integrality is Integrality.INTEGER]
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    if generals:
        lines.append("Generals")
        lines.append(" " + " ".join(generals))
    lines.append("End")
    return "\n".join(lines) + "\n"


def check_solution(
    program: MixedIntegerProgram,
    values: Mapping[str, float],
    integrality_tol: Optional[float] = None,
) -> float:
    """
    Largest violation of any row or bound at `values`.

    With `integrality_tol`, distance from integrality beyond the tolerance
    counts as a violation too.
    """
    dense = program.to_dense()
    x = np.array([values[v.name] for v in program.variables], dtype=float)
    worst = dense.max_violation(x)
    if integrality_tol is not None:
        integer = dense.integer_kind > 0
        if integer.any():
            drift = float(np.max(np.abs(x[integer] - np.round(x[integer]))))
            if drift > integrality_tol:
                worst = max(worst, drift)
    return worst


def plan_values(plan: PartitionPlan, cluster: ClusterModel) -> Dict[str, float]:
    """Program variable values that reproduce `plan` (tight billing, F_L at the makespan)."""
    values = {MAKESPAN: float(plan.makespan_s)}
    for i in range(cluster.mu):
        values[quanta_name(i)] = float(plan.billed_quanta[i])
        for j in range(cluster.tau):
            values[share_name(i, j)] = float(plan.allocation.entries[i, j])
            values[support_name(i, j)] = float(plan.support[i, j])
    return values


def start_values(cluster: ClusterModel, cost_cap: Optional[float] = None) -> Optional[Dict[str, float]]:
    """
    Fastest baseline plan within the cap, as program values for a solver start.

    Candidates are every single-platform plan and the inverse-makespan split.

    Returns:
        Optional[Dict[str, float]]: None when no candidate fits the cap
    """
    candidates = [single_platform_plan(cluster, i) for i in range(cluster.mu)]
    try:
        candidates.append(inverse_makespan_split(cluster))
    except InputValidationError:
        pass
    if cost_cap is not None:
        candidates = [plan for plan in candidates if plan.total_cost <= cost_cap]
    if not candidates:
        return None
    best = min(candidates, key=lambda plan: (plan.makespan_s, plan.total_cost))
    return plan_values(best, cluster)
