"""
Best-bound branch-and-bound over the LP relaxations of a mixed integer program.

Nodes are kept in a heap keyed by their parent's LP bound, deeper nodes first
among equal bounds, and solved lazily when popped, so a time limit never
leaves a node half evaluated. Branching
picks the most fractional binary variable, then the most fractional integer
variable; equal fractionality goes to the lowest variable index. A relaxation
that is integral within tolerance but violates a row once rounded is branched
on its largest residual fractionality instead of being dropped.

Children are re-solved from their parent's final tableau while it is among
the last few kept (settings.WARM_START_STATES). A caller may pass a feasible
start assignment, which becomes the first incumbent, so a search cut short
still returns a plan with a finite gap.
"""
import heapq
import logging
import math
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import List, Mapping, Optional, Tuple

import numpy as np

from partitioner.core.config import settings
from partitioner.models.milp import (
    DenseProgram,
    MilpSolution,
    MixedIntegerProgram,
    SolveOptions,
    SolveStatus,
)
from partitioner.services.log_service import log_service
from partitioner.services.simplex import WarmStart, solve_dense_lp

logger = logging.getLogger(__name__)

INCUMBENT_VIOLATION_TOL = 1e-6


@dataclass
class _SearchState:
    incumbent: Optional[np.ndarray] = None
    incumbent_value: float = math.inf
    nodes: int = 0
    lp_iterations: int = 0


def relative_gap(incumbent: float, bound: float) -> float:
    """(incumbent - bound) / |incumbent|, zero once the two meet."""
    if not math.isfinite(incumbent):
        return math.inf
    diff = incumbent - bound
    if diff <= 1e-9:
        return 0.0
    return diff / max(abs(incumbent), 1e-9)


def _fractionality(values: np.ndarray) -> np.ndarray:
    return np.abs(values - np.round(values))


def _branching_variable(x: np.ndarray, kind: np.ndarray, tol: float) -> Optional[int]:
    """Most fractional binary first, then most fractional general integer."""
    frac = _fractionality(x)
    for code in (1, 2):
        candidates = np.flatnonzero((kind == code) & (frac > tol))
        if candidates.size:
            return int(candidates[np.argmax(frac[candidates])])
    return None


def _snap_integers(x: np.ndarray, kind: np.ndarray) -> np.ndarray:
    snapped = x.copy()
    integer = kind > 0
    snapped[integer] = np.round(snapped[integer])
    return snapped


def _fallback_branch(x: np.ndarray, kind: np.ndarray) -> Optional[int]:
    """Integer variable with the largest nonzero fractionality, however small."""
    frac = np.where(kind > 0, _fractionality(x), 0.0)
    if not frac.size:
        return None
    j = int(np.argmax(frac))
    return j if frac[j] > 0.0 else None


def _objective_floor(dense: DenseProgram, lower: np.ndarray, upper: np.ndarray) -> float:
    """Smallest objective value the variable bounds alone allow."""
    c = dense.c
    with np.errstate(invalid="ignore"):
        low = np.where(c > 0, c * lower, np.where(c < 0, c * upper, 0.0))
    total = float(low.sum())
    return total if math.isfinite(total) else -math.inf


def _start_point(
    program: MixedIntegerProgram, dense: DenseProgram, start: Mapping[str, float], tol: float
) -> Optional[np.ndarray]:
    """Dense vector for a caller supplied start, or None when it is not a feasible integral point."""
    index = program.index
    unknown = set(start) - set(index)
    if unknown:
        logger.warning(f"Ignoring start for {program.name}: undeclared variables {sorted(unknown)[:5]}")
        return None
    x = np.zeros(len(program.variables))
    for name, value in start.items():
        x[index[name]] = value
    integer = dense.integer_kind > 0
    if np.any(_fractionality(x[integer]) > tol):
        logger.warning(f"Ignoring start for {program.name}: fractional integer variables")
        return None
    candidate = _snap_integers(x, dense.integer_kind)
    violation = dense.max_violation(candidate)
    if violation > INCUMBENT_VIOLATION_TOL:
        logger.warning(f"Ignoring start for {program.name}: violation {violation:.3g}")
        return None
    return candidate


def _rounding_heuristic(
    dense: DenseProgram,
    lower: np.ndarray,
    upper: np.ndarray,
    x: np.ndarray,
    warm: Optional[WarmStart],
    state: _SearchState,
    tol: float,
    deadline: float,
) -> Optional[np.ndarray]:
    """
    Round binaries up and fix them, re-solve, then do the same for integers.

    Returns:
        Optional[np.ndarray]: An integral point satisfying every row, or None
    """
    lo, hi = lower.copy(), upper.copy()
    point = x
    for code in (1, 2):
        mask = dense.integer_kind == code
        if not mask.any():
            continue
        fixed = np.clip(np.ceil(point[mask] - tol), lo[mask], hi[mask])
        lo[mask] = fixed
        hi[mask] = fixed
        result = solve_dense_lp(dense, lo, hi, deadline=deadline, warm_start=warm, keep_state=True)
        state.lp_iterations += result.iterations
        if result.status is not SolveStatus.OPTIMAL:
            return None
        point = result.x
        warm = result.state
    candidate = _snap_integers(point, dense.integer_kind)
    if dense.max_violation(candidate) > INCUMBENT_VIOLATION_TOL:
        return None
    return candidate


def _accept(state: _SearchState, dense: DenseProgram, candidate: np.ndarray, source: str) -> None:
    value = float(dense.c @ candidate)
    if value < state.incumbent_value:
        state.incumbent = candidate
        state.incumbent_value = value
        logger.debug(f"New incumbent {value:.9g} from {source} at node {state.nodes}")


def solve_milp(
    program: MixedIntegerProgram,
    options: Optional[SolveOptions] = None,
    start: Optional[Mapping[str, float]] = None,
) -> MilpSolution:
    """
    Solve a mixed integer program to the requested relative gap.

    Args:
        program: The program; objective is minimised
        options: Tolerances and limits (defaults from settings)
        start: Optional feasible assignment used as the first incumbent.
            Names absent from it are taken as zero; an infeasible start is
            ignored with a warning.

    Returns:
        MilpSolution: optimal, feasible-gap (limit hit with incumbent),
        infeasible, unbounded, or limit-hit (no incumbent)
    """
    options = options or SolveOptions()
    dense = program.to_dense()
    tol = options.integrality_tol
    started = time.monotonic()
    deadline = started + options.time_limit_s

    lower = dense.lower.copy()
    upper = dense.upper.copy()
    integer = dense.integer_kind > 0
    lower[integer] = np.ceil(lower[integer] - tol)
    upper[integer] = np.floor(upper[integer] + tol)

    state = _SearchState()
    if start is not None:
        seed = _start_point(program, dense, start, tol)
        if seed is not None:
            _accept(state, dense, seed, "start")

    # (bound, -depth, sequence, parent sequence, lower, upper)
    heap: List[Tuple[float, int, int, int, np.ndarray, np.ndarray]] = [
        (_objective_floor(dense, lower, upper), 0, 0, -1, lower, upper)
    ]
    sequence = 1
    limit_hit = False
    unbounded = False
    # Final tableaus of recently solved nodes, keyed by sequence
    tableaus: "OrderedDict[int, WarmStart]" = OrderedDict()
    keep_state = settings.WARM_START_STATES > 0

    while heap:
        if state.nodes >= options.node_limit or time.monotonic() > deadline:
            limit_hit = True
            break
        bound = heap[0][0]
        if relative_gap(state.incumbent_value, bound) <= options.relative_gap_tol:
            heap.clear()
            break
        node_bound, neg_depth, seq, parent, lo, hi = heapq.heappop(heap)

        result = solve_dense_lp(
            dense, lo, hi, deadline=deadline, warm_start=tableaus.get(parent), keep_state=keep_state
        )
        state.lp_iterations += result.iterations
        if result.status is SolveStatus.LIMIT_HIT:
            heapq.heappush(heap, (node_bound, neg_depth, seq, parent, lo, hi))
            limit_hit = True
            break
        state.nodes += 1
        if result.status is SolveStatus.UNBOUNDED:
            unbounded = True
            break
        if result.status is SolveStatus.INFEASIBLE:
            continue
        if relative_gap(state.incumbent_value, result.objective) <= options.relative_gap_tol:
            continue

        x = result.x
        branch = _branching_variable(x, dense.integer_kind, tol)
        if branch is None:
            candidate = _snap_integers(x, dense.integer_kind)
            if dense.max_violation(candidate) <= INCUMBENT_VIOLATION_TOL:
                _accept(state, dense, candidate, "relaxation")
                continue
            # Integral within tolerance but infeasible once snapped
            branch = _fallback_branch(x, dense.integer_kind)
            if branch is None:
                continue

        if result.state is not None:
            tableaus[seq] = result.state
            while len(tableaus) > settings.WARM_START_STATES:
                tableaus.popitem(last=False)

        if state.nodes == 1 or state.nodes % settings.ROUNDING_HEURISTIC_FREQUENCY == 0:
            rounded = _rounding_heuristic(dense, lo, hi, x, result.state, state, tol, deadline)
            if rounded is not None:
                _accept(state, dense, rounded, "rounding")

        value = x[branch]
        down_hi = hi.copy()
        down_hi[branch] = math.floor(value)
        up_lo = lo.copy()
        up_lo[branch] = math.ceil(value)
        heapq.heappush(heap, (result.objective, neg_depth - 1, sequence, seq, lo, down_hi))
        heapq.heappush(heap, (result.objective, neg_depth - 1, sequence + 1, seq, up_lo, hi))
        sequence += 2
        logger.debug(
            f"Node {state.nodes}: bound={result.objective:.9g} branch on "
            f"{program.variables[branch].name}={value:.6g}"
        )

    if unbounded:
        status = SolveStatus.UNBOUNDED
        best_bound = -math.inf
    else:
        open_bound = min((entry[0] for entry in heap), default=math.inf)
        best_bound = min(open_bound, state.incumbent_value)
        gap = relative_gap(state.incumbent_value, best_bound)
        if state.incumbent is None:
            status = SolveStatus.LIMIT_HIT if limit_hit else SolveStatus.INFEASIBLE
        elif gap <= options.relative_gap_tol:
            status = SolveStatus.OPTIMAL
        else:
            status = SolveStatus.FEASIBLE_GAP

    gap = relative_gap(state.incumbent_value, best_bound) if state.incumbent is not None else math.inf
    values = {}
    if state.incumbent is not None:
        values = {v.name: float(x) for v, x in zip(program.variables, state.incumbent)}

    elapsed = time.monotonic() - started
    logger.info(
        f"Solved {program.name}: {status.value} objective={state.incumbent_value:.9g} "
        f"gap={gap:.3g} nodes={state.nodes} in {elapsed:.2f}s"
    )
    log_service.add_custom_log(
        f"MILP {program.name} {status.value}",
        action="milp_solved",
        program=program.name,
        status=status.value,
        objective=state.incumbent_value,
        gap=gap,
        nodes=state.nodes,
        lp_iterations=state.lp_iterations,
    )
    return MilpSolution(
        values=values,
        objective_value=state.incumbent_value,
        status=status,
        gap=gap,
        nodes_explored=state.nodes,
        lp_iterations=state.lp_iterations,
        best_bound=None if math.isinf(best_bound) and best_bound > 0 else best_bound,
    )
