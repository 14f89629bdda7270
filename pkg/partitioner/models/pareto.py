"""
Trade-off curve types: sweep weights, curve points, diagnostics and comparison reports.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

from partitioner.core.errors import InputValidationError
from partitioner.models.cluster import PartitionPlan

METHODS = ("milp", "heuristic")


@dataclass(frozen=True)
class SweepWeight:
    """Cost weighting of the heuristic score: 0 is pure latency, 1 pure cost."""

    w: float

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise InputValidationError("invalid-weight", f"w={self.w} is outside [0, 1]")


@dataclass(frozen=True)
class ParetoPoint:
    cost: float
    makespan_s: float
    plan: PartitionPlan
    method: str
    solver_gap: float = 0.0
    cost_cap: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputValidationError("invalid-method", f"unknown method {self.method!r}")

    @classmethod
    def from_plan(
        cls,
        plan: PartitionPlan,
        method: str,
        solver_gap: float = 0.0,
        cost_cap: Optional[float] = None,
    ) -> "ParetoPoint":
        return cls(
            cost=plan.total_cost,
            makespan_s=plan.makespan_s,
            plan=plan,
            method=method,
            solver_gap=solver_gap,
            cost_cap=cost_cap,
        )


@dataclass(frozen=True)
class PointDiagnostic:
    """What happened to one swept cost cap."""

    index: int
    cost_cap: float
    status: str
    gap: float
    nodes: int
    kept: bool
    reason: str = ""
    cost: Optional[float] = None
    makespan_s: Optional[float] = None


@dataclass(frozen=True)
class TradeoffCurve:
    points: Tuple[ParetoPoint, ...]
    cluster_digest: str
    method: str
    diagnostics: Tuple[PointDiagnostic, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        if not self.points:
            raise InputValidationError("empty-curve", "a trade-off curve needs at least one point")
        for before, after in zip(self.points, self.points[1:]):
            if not (after.cost > before.cost and after.makespan_s < before.makespan_s):
                raise InputValidationError("invalid-curve", "curve points must trade cost for makespan strictly")

    @property
    def cheapest(self) -> ParetoPoint:
        return self.points[0]

    @property
    def fastest(self) -> ParetoPoint:
        return self.points[-1]


@dataclass(frozen=True)
class ComparisonRow:
    level: str
    heuristic_cost: float
    heuristic_makespan_s: float
    milp_cost: float
    milp_makespan_s: float
    cost_ratio: float
    latency_ratio: float


@dataclass(frozen=True)
class ComparisonReport:
    rows: Tuple[ComparisonRow, ...]
    milp_curve: TradeoffCurve
    heuristic_curve: TradeoffCurve
    undominated_heuristic_points: int = 0

    def row(self, level: str) -> ComparisonRow:
        for row in self.rows:
            if row.level == level:
                return row
        raise KeyError(level)
