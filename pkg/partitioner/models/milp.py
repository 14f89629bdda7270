"""
Mixed integer linear program representation and solver results.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from partitioner.core.config import settings
from partitioner.core.errors import InputValidationError


class Integrality(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    INTEGER = "integer"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE_GAP = "feasible-gap"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    LIMIT_HIT = "limit-hit"

    @property
    def has_solution(self) -> bool:
        return self in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE_GAP)


@dataclass(frozen=True)
class VariableSpec:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    integrality: Integrality = Integrality.CONTINUOUS

    def __post_init__(self):
        if self.lower > self.upper:
            raise InputValidationError("invalid-bounds", f"{self.name}: lower {self.lower} > upper {self.upper}")
        if self.integrality is Integrality.BINARY and (self.lower < 0 or self.upper > 1):
            raise InputValidationError("invalid-bounds", f"binary variable {self.name} must lie in [0, 1]")


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: Mapping[str, float]
    sense: Sense
    rhs: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coefficients", dict(self.coefficients))
        if not any(value != 0 for value in self.coefficients.values()):
            raise InputValidationError("empty-constraint", f"constraint {self.name!r} has no nonzero coefficient")


@dataclass(frozen=True, eq=False)
class DenseProgram:
    """Array form of a program: min c.x, rows A x (sense) b, lower <= x <= upper."""

    c: np.ndarray
    A: np.ndarray
    senses: np.ndarray  # +1 for <=, 0 for =, -1 for >=
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    integer_kind: np.ndarray  # 0 continuous, 1 binary, 2 integer

    def max_violation(self, x: np.ndarray) -> float:
        """Largest violation of any row or variable bound at point `x`."""
        activity = self.A @ x - self.b
        row_excess = np.where(
            self.senses > 0, activity, np.where(self.senses < 0, -activity, np.abs(activity))
        )
        bound_excess = np.maximum(self.lower - x, x - self.upper)
        worst = 0.0
        if row_excess.size:
            worst = max(worst, float(row_excess.max()))
        if bound_excess.size:
            worst = max(worst, float(bound_excess.max()))
        return worst


@dataclass(frozen=True, eq=False)
class MixedIntegerProgram:
    variables: Tuple[VariableSpec, ...]
    constraints: Tuple[LinearConstraint, ...]
    objective: Mapping[str, float]
    name: str = "program"

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "objective", dict(self.objective))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise InputValidationError("duplicate-variable", "variable names must be unique")
        declared = set(names)
        for row in self.constraints:
            unknown = set(row.coefficients) - declared
            if unknown:
                raise InputValidationError("undeclared-variable", f"{row.name}: {sorted(unknown)}")
        unknown = set(self.objective) - declared
        if unknown:
            raise InputValidationError("undeclared-variable", f"objective: {sorted(unknown)}")

    @property
    def index(self) -> Dict[str, int]:
        return {v.name: k for k, v in enumerate(self.variables)}

    def to_dense(self) -> DenseProgram:
        index = self.index
        n, m = len(self.variables), len(self.constraints)
        c = np.zeros(n)
        for name, value in self.objective.items():
            c[index[name]] = value
        A = np.zeros((m, n))
        senses = np.zeros(m, dtype=np.int8)
        b = np.zeros(m)
        sense_code = {Sense.LE: 1, Sense.EQ: 0, Sense.GE: -1}
        for r, row in enumerate(self.constraints):
            for name, value in row.coefficients.items():
                A[r, index[name]] += value
            senses[r] = sense_code[row.sense]
            b[r] = row.rhs
        kind_code = {Integrality.CONTINUOUS: 0, Integrality.BINARY: 1, Integrality.INTEGER: 2}
        return DenseProgram(
            c=c,
            A=A,
            senses=senses,
            b=b,
            lower=np.array([v.lower for v in self.variables], dtype=float),
            upper=np.array([v.upper for v in self.variables], dtype=float),
            integer_kind=np.array([kind_code[v.integrality] for v in self.variables], dtype=np.int8),
        )


@dataclass(frozen=True)
class SolveOptions:
    integrality_tol: float = settings.INTEGRALITY_TOL
    relative_gap_tol: float = settings.RELATIVE_GAP_TOL
    time_limit_s: float = settings.TIME_LIMIT_S
    node_limit: int = settings.NODE_LIMIT

    def __post_init__(self):
        if not (self.integrality_tol > 0 and self.relative_gap_tol > 0 and self.time_limit_s > 0):
            raise InputValidationError("invalid-options", "solver tolerances and limits must be > 0")
        if self.node_limit < 1:
            raise InputValidationError("invalid-options", "node_limit must be >= 1")


@dataclass(frozen=True)
class MilpSolution:
    values: Mapping[str, float]
    objective_value: float
    status: SolveStatus
    gap: float
    nodes_explored: int
    lp_iterations: int = 0
    best_bound: Optional[float] = None
