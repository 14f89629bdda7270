"""
Bounded-variable primal simplex on a dense tableau.

Every variable is first shifted (or mirrored, or split when free) so that it
lives in [0, U] with U possibly infinite; inequality rows get slack columns.
Nonbasic variables sit at either bound. Phase 1 drives artificial variables
to zero, phase 2 optimises the real objective. Dantzig pricing is used until
a streak of degenerate pivots, then Bland's rule takes over until the next
improving step.

A solve can keep its final tableau as a WarmStart. Re-solving the same rows
under tightened bounds then starts from that basis: bound changes are folded
into the tableau and a bounded dual simplex restores primal feasibility,
followed by a primal pass. Warm results that drift past a violation check are
thrown away and the LP is solved from scratch.
"""
import logging
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from partitioner.core.config import settings
from partitioner.models.milp import DenseProgram, MilpSolution, MixedIntegerProgram, SolveStatus

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
OPTIMALITY_TOL = 1e-9
DEGENERATE_STEP = 1e-12
WARM_START_CHECK_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LpResult:
    status: SolveStatus
    x: Optional[np.ndarray]
    objective: float
    iterations: int
    state: Optional["WarmStart"] = None


class BoundedSimplex:
    """Tableau state: (m+1) x (n+1) array, objective in the last row, rhs in the last column."""

    REFRESH_EVERY = 100

    def __init__(
        self,
        tableau: np.ndarray,
        basis: np.ndarray,
        upper: np.ndarray,
        iteration_limit: int,
        deadline: Optional[float],
        degenerate_streak: int,
    ):
        self.T = tableau
        self.basis = basis
        self.upper = upper
        n = tableau.shape[1] - 1
        self.at_upper = np.zeros(n, dtype=bool)
        self.is_basic = np.zeros(n, dtype=bool)
        self.is_basic[basis] = True
        self.iteration_limit = iteration_limit
        self.deadline = deadline
        self.degenerate_streak = degenerate_streak
        self.iterations = 0
        self.x_b = self.basic_values()

    def copy(self, iteration_limit: int, deadline: Optional[float]) -> "BoundedSimplex":
        clone = BoundedSimplex(
            self.T.copy(), self.basis.copy(), self.upper.copy(), iteration_limit, deadline, self.degenerate_streak
        )
        clone.at_upper = self.at_upper.copy()
        clone.x_b = clone.basic_values()
        return clone

    def shift_column(self, col: int, shift: float) -> None:
        """Move column `col`'s origin up by `shift` (its variable's lower bound rose)."""
        self.T[:, -1] -= shift * self.T[:, col]

    def set_span(self, col: int, span: float) -> None:
        self.upper[col] = span
        if not np.isfinite(span):
            self.at_upper[col] = False

    @property
    def m(self) -> int:
        return len(self.basis)

    def basic_values(self) -> np.ndarray:
        """Values of the basic variables recomputed from the tableau."""
        values = self.T[: self.m, -1].copy()
        if self.at_upper.any():
            idx = np.flatnonzero(self.at_upper)
            values -= self.T[: self.m, idx] @ self.upper[idx]
        return values

    def set_objective(self, cost: np.ndarray) -> None:
        m = self.m
        self.T[-1, :-1] = cost - cost[self.basis] @ self.T[:m, :-1]
        self.T[-1, -1] = -cost[self.basis] @ self.T[:m, -1]
        self.x_b = self.basic_values()

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        # Only rows with a nonzero entry in the pivot column change
        touched = np.flatnonzero(factors)
        if touched.size:
            T[touched] -= factors[touched, np.newaxis] * T[row]
        T[:, col] = 0.0
        T[row, col] = 1.0
        leaving = self.basis[row]
        self.is_basic[leaving] = False
        self.is_basic[col] = True
        self.basis[row] = col

    def run(self) -> SolveStatus:
        """Iterate until optimal, unbounded or out of budget."""
        m = self.m
        streak = 0
        bland = False
        while True:
            if self.iterations >= self.iteration_limit:
                return SolveStatus.LIMIT_HIT
            if self.deadline is not None and time.monotonic() > self.deadline:
                return SolveStatus.LIMIT_HIT

            reduced = self.T[-1, :-1]
            improving = np.where(self.at_upper, reduced > OPTIMALITY_TOL, reduced < -OPTIMALITY_TOL)
            candidates = np.flatnonzero(improving & ~self.is_basic)
            if candidates.size == 0:
                return SolveStatus.OPTIMAL
            if bland:
                col = int(candidates[0])
            else:
                col = int(candidates[np.argmax(np.abs(reduced[candidates]))])

            direction = -1.0 if self.at_upper[col] else 1.0
            alpha = direction * self.T[:m, col]
            x_b = self.x_b
            basic_upper = self.upper[self.basis]

            ratios = np.full(m, np.inf)
            falling = alpha > PIVOT_TOL
            rising = (alpha < -PIVOT_TOL) & np.isfinite(basic_upper)
            ratios[falling] = np.maximum(x_b[falling], 0.0) / alpha[falling]
            ratios[rising] = np.maximum(basic_upper[rising] - x_b[rising], 0.0) / -alpha[rising]

            step_flip = self.upper[col]
            step_row = ratios.min() if m else np.inf
            if not np.isfinite(step_row) and not np.isfinite(step_flip):
                return SolveStatus.UNBOUNDED

            if step_row < step_flip:
                step = step_row
                tied = np.flatnonzero(ratios <= step_row + 1e-12 * (1.0 + step_row))
                if bland:
                    row = int(tied[np.argmin(self.basis[tied])])
                else:
                    row = int(tied[np.argmax(np.abs(alpha[tied]))])
                leaving = self.basis[row]
                leaves_at_upper = alpha[row] < 0
                entering_value = step if direction > 0 else self.upper[col] - step
                x_b -= step * alpha
                self.pivot(row, col)
                x_b[row] = entering_value
                self.at_upper[leaving] = leaves_at_upper
                self.at_upper[col] = False
            else:
                step = step_flip
                x_b -= step * alpha
                self.at_upper[col] = not self.at_upper[col]

            self.iterations += 1
            if self.iterations % self.REFRESH_EVERY == 0:
                self.x_b = self.basic_values()
            if step <= DEGENERATE_STEP:
                streak += 1
                if streak >= self.degenerate_streak and not bland:
                    logger.debug(f"Switching to Bland's rule after {streak} degenerate pivots")
                    bland = True
            else:
                streak = 0
                bland = False

    def run_dual(self, feasibility_tol: float) -> SolveStatus:
        """
        Bounded dual simplex from a dual feasible basis.

        Returns:
            SolveStatus: OPTIMAL once every basic value is within its bounds,
            INFEASIBLE when a violated row has no eligible entering column
        """
        m = self.m
        while True:
            if self.iterations >= self.iteration_limit:
                return SolveStatus.LIMIT_HIT
            if self.deadline is not None and time.monotonic() > self.deadline:
                return SolveStatus.LIMIT_HIT
            if m == 0:
                return SolveStatus.OPTIMAL

            x_b = self.x_b
            basic_upper = self.upper[self.basis]
            below = -x_b
            above = x_b - basic_upper
            excess = np.maximum(below, above) - feasibility_tol * (1.0 + np.abs(x_b))
            row = int(np.argmax(excess))
            if excess[row] <= 0:
                return SolveStatus.OPTIMAL
            to_upper = above[row] > below[row]
            target = basic_upper[row] if to_upper else 0.0

            alpha = self.T[row, :-1]
            free = ~self.is_basic
            rising = free & ~self.at_upper
            falling = free & self.at_upper
            # x_r moves by -alpha_q per unit increase of y_q
            if to_upper:
                eligible = (rising & (alpha > PIVOT_TOL)) | (falling & (alpha < -PIVOT_TOL))
            else:
                eligible = (rising & (alpha < -PIVOT_TOL)) | (falling & (alpha > PIVOT_TOL))
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                return SolveStatus.INFEASIBLE

            ratios = np.abs(self.T[-1, candidates]) / np.abs(alpha[candidates])
            best = ratios.min()
            tied = candidates[ratios <= best + 1e-12 * (1.0 + best)]
            col = int(tied[np.argmax(np.abs(alpha[tied]))])

            step = (x_b[row] - target) / alpha[col]
            entering_value = (self.upper[col] if self.at_upper[col] else 0.0) + step
            leaving = self.basis[row]
            x_b -= step * self.T[:m, col]
            self.pivot(row, col)
            x_b[row] = entering_value
            self.at_upper[leaving] = to_upper
            self.at_upper[col] = False

            self.iterations += 1
            if self.iterations % self.REFRESH_EVERY == 0:
                self.x_b = self.basic_values()

    def drive_out(self, first_artificial: int) -> np.ndarray:
        """
        Pivot basic artificials out after phase 1.

        Returns:
            np.ndarray: Mask of rows that stay (redundant rows are dropped)
        """
        keep = np.ones(self.m, dtype=bool)
        for row in range(self.m):
            if self.basis[row] < first_artificial:
                continue
            entries = np.abs(self.T[row, :first_artificial])
            entries[self.is_basic[:first_artificial]] = 0.0
            col = int(np.argmax(entries)) if entries.size else 0
            if entries.size and entries[col] > PIVOT_TOL:
                self.pivot(row, col)
                self.at_upper[col] = False
            else:
                keep[row] = False
        return keep

    def truncate(self, keep_rows: np.ndarray, column_count: int) -> None:
        """Drop redundant rows and every column from `column_count` on."""
        rows = np.append(np.flatnonzero(keep_rows), self.T.shape[0] - 1)
        cols = np.append(np.arange(column_count), self.T.shape[1] - 1)
        self.T = np.ascontiguousarray(self.T[np.ix_(rows, cols)])
        self.basis = self.basis[keep_rows]
        self.upper = self.upper[:column_count]
        self.at_upper = self.at_upper[:column_count]
        self.is_basic = self.is_basic[:column_count]
        self.x_b = self.basic_values()


@dataclass(frozen=True, eq=False)
class WarmStart:
    """Optimal tableau of one solve, with the bounds and variable mapping it was built under."""

    program: DenseProgram
    simplex: BoundedSimplex
    lower: np.ndarray
    upper: np.ndarray
    offset: np.ndarray
    origin_idx: np.ndarray
    sign: np.ndarray
    column: np.ndarray  # tableau column of each variable, -1 when mirrored or split


def _recover(
    simplex: BoundedSimplex, offset: np.ndarray, origin_idx: np.ndarray, sign: np.ndarray
) -> np.ndarray:
    k = len(origin_idx)
    y = np.zeros(len(simplex.upper))
    y[simplex.at_upper] = simplex.upper[simplex.at_upper]
    y[simplex.basis] = simplex.basic_values()
    y = np.clip(y, 0.0, simplex.upper)
    x = offset.copy()
    np.add.at(x, origin_idx, sign * y[:k])
    return x


def _reoptimize(
    warm: WarmStart,
    lower: np.ndarray,
    upper: np.ndarray,
    feasibility_tol: float,
    iteration_limit: int,
    deadline: Optional[float],
    keep_state: bool,
) -> Optional[LpResult]:
    """
    Re-solve from a previous optimal basis under new bounds.

    Returns:
        Optional[LpResult]: The result, or None when the caller should solve cold
    """
    program = warm.program
    changed = np.flatnonzero((lower != warm.lower) | (upper != warm.upper))
    if np.any(warm.column[changed] < 0) or not np.all(np.isfinite(lower[changed])):
        return None

    simplex = warm.simplex.copy(iteration_limit, deadline)
    offset = warm.offset.copy()
    for j in changed:
        col = warm.column[j]
        shift = lower[j] - warm.lower[j]
        if shift != 0.0:
            simplex.shift_column(col, shift)
            offset[j] = lower[j]
        simplex.set_span(col, max(upper[j] - lower[j], 0.0))
    simplex.x_b = simplex.basic_values()

    status = simplex.run_dual(feasibility_tol)
    if status is SolveStatus.OPTIMAL:
        status = simplex.run()
    if status is SolveStatus.LIMIT_HIT:
        if deadline is not None and time.monotonic() > deadline:
            return LpResult(status, None, np.nan, simplex.iterations)
        return None
    if status is not SolveStatus.OPTIMAL:
        # Dual infeasibility proofs and unbounded rays are confirmed from scratch
        return None

    x = _recover(simplex, offset, warm.origin_idx, warm.sign)
    scale = max(1.0, float(np.max(np.abs(program.b))) if program.b.size else 1.0)
    if program.max_violation(x) > WARM_START_CHECK_TOL * scale:
        logger.debug("Warm start drifted, solving from scratch")
        return None
    state = None
    if keep_state:
        state = WarmStart(program, simplex, lower.copy(), upper.copy(), offset, warm.origin_idx, warm.sign, warm.column)
    return LpResult(SolveStatus.OPTIMAL, x, float(program.c @ x), simplex.iterations, state)


def solve_dense_lp(
    program: DenseProgram,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
    feasibility_tol: float = settings.LP_FEASIBILITY_TOL,
    iteration_limit: int = settings.LP_ITERATION_LIMIT,
    deadline: Optional[float] = None,
    warm_start: Optional[WarmStart] = None,
    keep_state: bool = False,
) -> LpResult:
    """
    Solve min c.x subject to the program rows and the given bounds.

    Args:
        program: Dense program (integrality ignored)
        lower, upper: Bounds overriding the program's (used by branch-and-bound)
        feasibility_tol: Tolerance on phase-1 residual infeasibility
        iteration_limit: Pivot budget over both phases
        deadline: time.monotonic() value after which the solve gives up
        warm_start: State of an earlier optimal solve of the same program
        keep_state: Attach the final tableau to the result for later warm starts

    Returns:
        LpResult: status, solution in the original variable space, objective
    """
    lower = program.lower if lower is None else lower
    upper = program.upper if upper is None else upper
    if np.any(lower > upper + feasibility_tol):
        return LpResult(SolveStatus.INFEASIBLE, None, np.inf, 0)

    if warm_start is not None and warm_start.program is program:
        result = _reoptimize(warm_start, lower, upper, feasibility_tol, iteration_limit, deadline, keep_state)
        if result is not None:
            return result

    # Map x = offset + sum(sign * y) with 0 <= y <= span
    origin, signs, spans = [], [], []
    offset = np.zeros(len(lower))
    for j, (lo, hi) in enumerate(zip(lower, upper)):
        if np.isfinite(lo):
            offset[j] = lo
            origin.append(j)
            signs.append(1.0)
            spans.append(max(hi - lo, 0.0))
        elif np.isfinite(hi):
            offset[j] = hi
            origin.append(j)
            signs.append(-1.0)
            spans.append(np.inf)
        else:
            origin.extend([j, j])
            signs.extend([1.0, -1.0])
            spans.extend([np.inf, np.inf])
    origin_idx = np.array(origin, dtype=int)
    sign = np.array(signs)
    k = len(origin)
    column = np.full(len(lower), -1)
    counts = np.bincount(origin_idx, minlength=len(lower))
    single = (counts[origin_idx] == 1) & (sign > 0)
    column[origin_idx[single]] = np.flatnonzero(single)

    m = program.A.shape[0]
    A_y = program.A[:, origin_idx] * sign
    c_y = program.c[origin_idx] * sign
    rhs = program.b - program.A @ offset

    slack_rows = np.flatnonzero(program.senses != 0)
    s = len(slack_rows)
    flip = np.where(rhs < 0, -1.0, 1.0)
    slack_sign = np.zeros(m)
    slack_sign[slack_rows] = program.senses[slack_rows] * flip[slack_rows]
    needs_artificial = slack_sign != 1.0
    artificial_rows = np.flatnonzero(needs_artificial)
    a = len(artificial_rows)

    n_total = k + s + a
    T = np.zeros((m + 1, n_total + 1))
    T[:m, :k] = A_y * flip[:, np.newaxis]
    T[slack_rows, k + np.arange(s)] = slack_sign[slack_rows]
    T[artificial_rows, k + s + np.arange(a)] = 1.0
    T[:m, -1] = rhs * flip

    basis = np.empty(m, dtype=int)
    slack_col = np.full(m, -1)
    slack_col[slack_rows] = k + np.arange(s)
    basis[~needs_artificial] = slack_col[~needs_artificial]
    basis[artificial_rows] = k + s + np.arange(a)

    span_all = np.concatenate([np.array(spans, dtype=float), np.full(s + a, np.inf)])
    simplex = BoundedSimplex(
        T, basis, span_all, iteration_limit, deadline, settings.BLAND_DEGENERATE_STREAK
    )

    if a:
        phase_one = np.zeros(n_total)
        phase_one[k + s:] = 1.0
        simplex.set_objective(phase_one)
        status = simplex.run()
        if status is SolveStatus.LIMIT_HIT:
            return LpResult(status, None, np.nan, simplex.iterations)
        residual = float(simplex.basic_values()[simplex.basis >= k + s].sum())
        scale = max(1.0, float(np.max(np.abs(rhs))) if m else 1.0)
        if residual > feasibility_tol * scale:
            logger.debug(f"LP infeasible: phase-1 residual {residual:.3g}")
            return LpResult(SolveStatus.INFEASIBLE, None, np.inf, simplex.iterations)
        keep = simplex.drive_out(k + s)
        simplex.truncate(keep, k + s)

    simplex.set_objective(np.concatenate([c_y, np.zeros(s)]))
    status = simplex.run()
    if status is not SolveStatus.OPTIMAL:
        return LpResult(status, None, -np.inf if status is SolveStatus.UNBOUNDED else np.nan, simplex.iterations)

    x = _recover(simplex, offset, origin_idx, sign)
    state = None
    if keep_state:
        state = WarmStart(program, simplex, lower.copy(), upper.copy(), offset, origin_idx, sign, column)
    return LpResult(SolveStatus.OPTIMAL, x, float(program.c @ x), simplex.iterations, state)


def solve_lp_relaxation(program: MixedIntegerProgram, time_limit_s: Optional[float] = None) -> MilpSolution:
    """
    Solve the program with integrality dropped.

    Returns:
        MilpSolution: optimal basic solution, or an infeasible/unbounded/limit-hit status
    """
    dense = program.to_dense()
    deadline = time.monotonic() + time_limit_s if time_limit_s else None
    result = solve_dense_lp(dense, deadline=deadline)
    values = {}
    if result.x is not None:
        values = {v.name: float(x) for v, x in zip(program.variables, result.x)}
    logger.info(f"LP relaxation of {program.name}: {result.status.value} after {result.iterations} pivots")
    return MilpSolution(
        values=values,
        objective_value=result.objective,
        status=result.status,
        gap=0.0 if result.status is SolveStatus.OPTIMAL else np.inf,
        nodes_explored=0,
        lp_iterations=result.iterations,
        best_bound=result.objective if result.status is SolveStatus.OPTIMAL else None,
    )
