import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Type

from marshmallow import (
    RAISE,
    Schema,
    ValidationError,
    fields,
    post_load,
    validate,
    validates,
    validates_schema,
)

from partitioner.core.config import settings
from partitioner.core.errors import InputValidationError
from partitioner.models.benchmark import BenchmarkSample
from partitioner.models.cluster import (
    AllocationMatrix,
    ClusterModel,
    DeviceCostProfile,
    LatencyCoefficients,
    PartitionPlan,
    Platform,
    RateInputs,
    Task,
    Workload,
)
from partitioner.models.milp import MilpSolution
from partitioner.models.pareto import ComparisonReport, TradeoffCurve
from partitioner.models.simulation import NoiseSpec
from partitioner.services.performance_model import (
    normalize_price,
    plan_from_allocation,
    rate_inputs_from_profile,
)


# --------------------------
# Data classes
# --------------------------

@dataclass
class HealthResponse:
    status: str = "ok"
    version: str = settings.VERSION


@dataclass
class RunManifest:
    command: str
    input_digest: str
    options: Dict[str, Any] = field(default_factory=dict)
    tool_version: str = settings.VERSION
    wall_time_s: float = 0.0


# --------------------------
# Schemas for validation
# --------------------------

class VersionedSchema(Schema):
    """Documents written by this tool carry a schema version; a mismatch is fatal."""

    schema_version = fields.String(required=False)

    @validates("schema_version")
    def validate_schema_version(self, value, **kwargs):
        if value != settings.SCHEMA_VERSION:
            raise ValidationError(
                f"schema_version {value!r} is not supported (expected {settings.SCHEMA_VERSION!r})"
            )


class PlatformSchema(Schema):
    id = fields.String(required=True)
    quantum_s = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))
    price = fields.Float(required=True, validate=validate.Range(min=0))
    price_unit = fields.String(
        load_default="per_quantum", validate=validate.OneOf(["per_quantum", "per_hour"])
    )


class TaskSchema(Schema):
    id = fields.String(required=True)
    work = fields.Integer(required=True, strict=True, validate=validate.Range(min=0))


class ClusterSchema(VersionedSchema):
    class Meta:
        unknown = RAISE

    platforms = fields.List(fields.Nested(PlatformSchema), required=True, validate=validate.Length(min=1))
    tasks = fields.List(fields.Nested(TaskSchema), required=True, validate=validate.Length(min=1))
    beta = fields.List(fields.List(fields.Float()), required=True)
    gamma = fields.List(fields.List(fields.Float()), required=True)

    @validates_schema
    def validate_shapes(self, data, **kwargs):
        mu, tau = len(data["platforms"]), len(data["tasks"])
        for name in ("beta", "gamma"):
            matrix = data[name]
            if len(matrix) != mu or any(len(row) != tau for row in matrix):
                raise ValidationError(f"{name} must be {mu}x{tau} (platforms x tasks)", name)

    @post_load
    def make_cluster(self, data, **kwargs) -> ClusterModel:
        platforms = [
            Platform(
                id=p["id"],
                quantum_s=p["quantum_s"],
                price_per_quantum=normalize_price(p["price"], p["price_unit"], p["quantum_s"]),
            )
            for p in data["platforms"]
        ]
        workload = Workload(tuple(Task(id=t["id"], work=t["work"]) for t in data["tasks"]))
        coeffs = LatencyCoefficients(beta=data["beta"], gamma=data["gamma"])
        return ClusterModel(platforms=tuple(platforms), workload=workload, coeffs=coeffs)


class DeviceCostProfileSchema(Schema):
    capital_cost = fields.Float(required=True, validate=validate.Range(min=0))
    power_w = fields.Float(required=True, validate=validate.Range(min=0))
    recovery_years = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))
    charged_usage = fields.Float(load_default=0.8, validate=validate.Range(min=0, max=1, min_inclusive=False))
    profit_margin_fraction = fields.Float(load_default=0.2, validate=validate.Range(min=0))
    electricity_per_kwh = fields.Float(load_default=0.10, validate=validate.Range(min=0))
    pue = fields.Float(load_default=2.0, validate=validate.Range(min=1))
    site_cost_per_device_year = fields.Float(load_default=1110.0, validate=validate.Range(min=0))
    site_cost_per_kw_year = fields.Float(load_default=6150.0, validate=validate.Range(min=0))

    @post_load
    def make_profile(self, data, **kwargs) -> DeviceCostProfile:
        return DeviceCostProfile(**data)


class RateRequestSchema(VersionedSchema):
    """Either explicit TCO/PM/period values or a device cost profile."""

    tco_per_period = fields.Float(validate=validate.Range(min=0))
    profit_margin = fields.Float(load_default=0.0)
    quantum_s = fields.Float(load_default=3600.0)
    period_s = fields.Float()
    relative_performance = fields.Float(load_default=1.0)
    profile = fields.Nested(DeviceCostProfileSchema)

    @validates_schema
    def validate_source(self, data, **kwargs):
        explicit = "tco_per_period" in data and "period_s" in data
        if explicit == ("profile" in data):
            raise ValidationError("give either tco_per_period + period_s, or profile")

    @post_load
    def make_inputs(self, data, **kwargs) -> RateInputs:
        if "profile" in data:
            return rate_inputs_from_profile(
                data["profile"], data["quantum_s"], data["relative_performance"]
            )
        return RateInputs(
            tco_per_period=data["tco_per_period"],
            profit_margin=data["profit_margin"],
            quantum_s=data["quantum_s"],
            period_s=data["period_s"],
            relative_performance=data["relative_performance"],
        )


class FitResultSchema(VersionedSchema):
    beta = fields.Float(required=True)
    gamma = fields.Float(required=True)
    max_relative_error = fields.Float(required=True)
    sample_count = fields.Integer(required=True)
    warnings = fields.List(fields.String(), dump_default=list)


class PlanSchema(VersionedSchema):
    class Meta:
        unknown = RAISE

    platform_ids = fields.List(fields.String(), required=True)
    task_ids = fields.List(fields.String(), required=True)
    allocation = fields.List(fields.List(fields.Float()), required=True)
    support = fields.List(fields.List(fields.Integer()))
    platform_latency_s = fields.List(fields.Float())
    makespan_s = fields.Float()
    billed_quanta = fields.List(fields.Integer())
    total_cost = fields.Float()


class SolverStatsSchema(Schema):
    status = fields.String(required=True)
    objective_value = fields.Float(allow_nan=True)
    gap = fields.Float(allow_nan=True)
    nodes_explored = fields.Integer()
    lp_iterations = fields.Integer()


class RunManifestSchema(VersionedSchema):
    command = fields.String(required=True)
    input_digest = fields.String(required=True)
    options = fields.Dict(keys=fields.String(), values=fields.Raw())
    tool_version = fields.String(required=True)
    wall_time_s = fields.Float(required=True)


class HealthResponseSchema(Schema):
    status = fields.String(dump_default="ok")
    version = fields.String(required=True)


# --------------------------
# HTTP request bodies
# --------------------------

MAX_SIMULATION_SEEDS = 1000


class SolverRequestSchema(Schema):
    """Inline cluster plus the solver limits shared by every MILP endpoint."""

    cluster = fields.Nested(ClusterSchema, required=True)
    time_limit_s = fields.Float()
    gap = fields.Float()
    node_limit = fields.Integer(strict=True)


class SolveRequestSchema(SolverRequestSchema):
    method = fields.String(load_default="milp", validate=validate.OneOf(["milp", "heuristic"]))
    weight = fields.Float(load_default=1.0, validate=validate.Range(min=0, max=1))
    cost_cap = fields.Float(load_default=None, allow_none=True)


class ParetoRequestSchema(SolverRequestSchema):
    points = fields.Integer(strict=True, load_default=settings.PARETO_POINTS)
    method = fields.String(load_default="milp", validate=validate.OneOf(["milp", "heuristic"]))


class CompareRequestSchema(SolverRequestSchema):
    points = fields.Integer(strict=True, load_default=settings.PARETO_POINTS)


class NoiseSchema(Schema):
    beta_rel_sigma = fields.Float(load_default=0.0)
    gamma_rel_sigma = fields.Float(load_default=0.0)
    seed = fields.Integer(strict=True, load_default=0)

    @post_load
    def make_noise(self, data, **kwargs) -> NoiseSpec:
        return NoiseSpec(**data)


class SimulateRequestSchema(Schema):
    cluster = fields.Nested(ClusterSchema, required=True)
    # Checked against the cluster by load_plan
    plan = fields.Dict(required=True)
    noise = fields.Nested(NoiseSchema, load_default=NoiseSpec)
    seeds = fields.List(
        fields.Integer(strict=True), validate=validate.Length(min=1, max=MAX_SIMULATION_SEEDS)
    )


class BenchmarkSampleSchema(Schema):
    work = fields.Integer(required=True, strict=True)
    latency_s = fields.Float(required=True)

    @post_load
    def make_sample(self, data, **kwargs) -> BenchmarkSample:
        return BenchmarkSample(**data)


class FitRequestSchema(Schema):
    samples = fields.List(fields.Nested(BenchmarkSampleSchema), required=True)


def _mentions_version(messages: Any) -> bool:
    if not isinstance(messages, dict):
        return False
    return "schema_version" in messages or any(_mentions_version(value) for value in messages.values())


def load_document(schema_cls: Type[Schema], data: Any) -> Any:
    """
    Validate and load a document, turning marshmallow errors into domain errors.

    Raises:
        InputValidationError: schema-mismatch for a wrong version, invalid-document otherwise
    """
    try:
        return schema_cls().load(data)
    except ValidationError as exc:
        messages = exc.normalized_messages()
        code = "schema-mismatch" if _mentions_version(messages) else "invalid-document"
        raise InputValidationError(code, str(messages)) from exc


def dump_cluster(cluster: ClusterModel) -> Dict[str, Any]:
    """Serialise a cluster with prices normalised per quantum."""
    return {
        "schema_version": settings.SCHEMA_VERSION,
        "platforms": [
            {"id": p.id, "quantum_s": p.quantum_s, "price": p.price_per_quantum, "price_unit": "per_quantum"}
            for p in cluster.platforms
        ],
        "tasks": [{"id": t.id, "work": int(t.work)} for t in cluster.workload.tasks],
        "beta": cluster.beta.tolist(),
        "gamma": cluster.gamma.tolist(),
    }


def dump_plan(plan: PartitionPlan, cluster: ClusterModel) -> Dict[str, Any]:
    """Serialise a PartitionPlan with the ids needed to reload it."""
    return {
        "schema_version": settings.SCHEMA_VERSION,
        "platform_ids": [p.id for p in cluster.platforms],
        "task_ids": [t.id for t in cluster.workload.tasks],
        "allocation": plan.allocation.entries.tolist(),
        "support": plan.support.tolist(),
        "platform_latency_s": plan.platform_latency_s.tolist(),
        "makespan_s": plan.makespan_s,
        "billed_quanta": [int(q) for q in plan.billed_quanta],
        "total_cost": plan.total_cost,
    }



class PointDiagnosticSchema(Schema):
    index = fields.Integer()
    cost_cap = fields.Float()
    status = fields.String()
    gap = fields.Float(allow_nan=True)
    nodes = fields.Integer()
    kept = fields.Boolean()
    reason = fields.String()
    cost = fields.Float(allow_none=True)
    makespan_s = fields.Float(allow_none=True)


class ComparisonRowSchema(Schema):
    level = fields.String()
    heuristic_cost = fields.Float()
    heuristic_makespan_s = fields.Float()
    milp_cost = fields.Float()
    milp_makespan_s = fields.Float()
    cost_ratio = fields.Float(allow_nan=True)
    latency_ratio = fields.Float(allow_nan=True)


class SimSummarySchema(VersionedSchema):
    runs = fields.Integer()
    mean_relative_error = fields.Float()
    max_relative_error = fields.Float()
    mean_makespan_ratio = fields.Float()
    mean_realized_cost = fields.Float()


def versioned_dump(schema_cls: Type[Schema], obj: Any) -> Dict[str, Any]:
    """Dump an object and stamp the current schema version."""
    payload = schema_cls().dump(obj)
    payload["schema_version"] = settings.SCHEMA_VERSION
    return payload


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def dump_solver_stats(solution: MilpSolution) -> Dict[str, Any]:
    return {
        "status": solution.status.value,
        "objective_value": _finite(solution.objective_value),
        "gap": _finite(solution.gap),
        "nodes_explored": solution.nodes_explored,
        "lp_iterations": solution.lp_iterations,
    }


def dump_curve(curve: TradeoffCurve, cluster: ClusterModel) -> Dict[str, Any]:
    """Serialise a trade-off curve with every plan in full."""
    return {
        "schema_version": settings.SCHEMA_VERSION,
        "method": curve.method,
        "cluster_digest": curve.cluster_digest,
        "points": [
            {
                "cost": point.cost,
                "makespan_s": point.makespan_s,
                "solver_gap": _finite(point.solver_gap),
                "cost_cap": point.cost_cap,
                "plan": dump_plan(point.plan, cluster),
            }
            for point in curve.points
        ],
        "diagnostics": [
            {key: (_finite(v) if isinstance(v, float) else v) for key, v in PointDiagnosticSchema().dump(d).items()}
            for d in curve.diagnostics
        ],
    }


def dump_comparison(report: ComparisonReport) -> Dict[str, Any]:
    return {
        "schema_version": settings.SCHEMA_VERSION,
        "rows": [
            {key: (_finite(v) if isinstance(v, float) else v) for key, v in row.items()}
            for row in ComparisonRowSchema(many=True).dump(report.rows)
        ],
        "undominated_heuristic_points": report.undominated_heuristic_points,
    }


def load_plan(data: Any, cluster: ClusterModel) -> PartitionPlan:
    """
    Load a plan document and re-derive it against the cluster.

    Raises:
        InputValidationError: schema-mismatch, invalid-document or dimension-mismatch
    """
    document = load_document(PlanSchema, data)
    platform_ids = [p.id for p in cluster.platforms]
    task_ids = [t.id for t in cluster.workload.tasks]
    if document["platform_ids"] != platform_ids or document["task_ids"] != task_ids:
        raise InputValidationError("dimension-mismatch", "plan ids do not match the cluster")
    return plan_from_allocation(cluster, AllocationMatrix(document["allocation"]))
