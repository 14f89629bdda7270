"""
Command-line front end: fitting, rates, solving, sweeps, simulation and comparison.

Every command reads JSON/CSV files, writes its outputs and a run manifest into
--out, and exits with 0 (success), 1 (usage), 2 (invalid input), 3 (solver
infeasible) or 4 (limit hit).
"""
import csv
import functools
import io
import json
import logging
import os
import sys
import time
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

import click
import typer

from partitioner.core.config import settings
from partitioner.core.errors import PartitionerError
from partitioner.core.manifest import build_manifest, write_manifest
from partitioner.core.utils import evenly_spaced
from partitioner.models.milp import SolveOptions, SolveStatus
from partitioner.models.schemas import (
    ClusterSchema,
    FitResultSchema,
    RateRequestSchema,
    SimSummarySchema,
    dump_cluster,
    dump_comparison,
    dump_curve,
    dump_plan,
    dump_solver_stats,
    load_document,
    load_plan,
    versioned_dump,
)
from partitioner.models.simulation import NoiseSpec
from partitioner.services.benchmark_service import (
    benchmark_work_grid,
    fit_latency_model,
    generate_benchmark_samples,
    prediction_error,
    read_samples_csv,
    write_samples_csv,
)
from partitioner.services.branch_and_bound import solve_milp
from partitioner.services.cluster_generator import generate_cluster
from partitioner.services.heuristic_service import weighted_sweep
from partitioner.services.milp_builder import (
    build_milp,
    extract_plan,
    program_to_lp_format,
    start_values,
)
from partitioner.services.pareto_service import compare_methods, epsilon_sweep, heuristic_sweep
from partitioner.services.performance_model import SECONDS_PER_HOUR, compute_rate
from partitioner.services.simulation_service import simulate_many

logger = logging.getLogger(__name__)

app = typer.Typer(help="Heterogeneous IaaS workload partitioner", add_completion=False)

OUT_HELP = "Output directory"
FORMAT_HELP = "Format echoed to stdout"


class OutputFormat(str, Enum):
    json = "json"
    csv = "csv"


@app.callback()
def configure(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level")) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def handle_errors(command: Callable) -> Callable:
    """Report domain errors on stderr and exit with their exit code."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except PartitionerError as exc:
            typer.echo(f"error: {exc}", err=True)
            raise typer.Exit(code=exc.exit_code)
        except (OSError, json.JSONDecodeError) as exc:
            typer.echo(f"error: {exc}", err=True)
            raise typer.Exit(code=2)

    return wrapper


def _read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _write_json(out: str, name: str, payload: Any) -> str:
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, name)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def _write_text(out: str, name: str, text: str) -> str:
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, name)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    return path


def _csv_text(header: List[str], rows: List[List[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _echo(fmt: OutputFormat, payload: Any, csv_text: Optional[str] = None) -> None:
    if fmt is OutputFormat.csv and csv_text is not None:
        typer.echo(csv_text, nl=False)
    else:
        typer.echo(json.dumps(payload, indent=2, sort_keys=True))


def _solve_options(time_limit: Optional[float], gap: Optional[float], node_limit: Optional[int]) -> SolveOptions:
    defaults = SolveOptions()
    return SolveOptions(
        integrality_tol=defaults.integrality_tol,
        relative_gap_tol=gap if gap is not None else defaults.relative_gap_tol,
        time_limit_s=time_limit if time_limit is not None else defaults.time_limit_s,
        node_limit=node_limit if node_limit is not None else defaults.node_limit,
    )


def _finish(command: str, out: str, inputs: List[str], options: Dict[str, Any], started: float) -> None:
    write_manifest(out, build_manifest(command, inputs, options, started))


@app.command("fit")
@handle_errors
def fit_cmd(
    samples: str = typer.Argument(..., help="CSV of work,latency_s samples"),
    holdout: Optional[str] = typer.Option(None, help="CSV of holdout samples to score the fit on"),
    out: str = typer.Option("out", help=OUT_HELP),
    fmt: OutputFormat = typer.Option(OutputFormat.json, "--format", help=FORMAT_HELP),
) -> None:
    """Fit L = beta * N + gamma to benchmark samples."""
    started = time.monotonic()
    with open(samples, encoding="utf-8") as handle:
        fit = fit_latency_model(read_samples_csv(handle.read()))
    payload = versioned_dump(FitResultSchema, fit)
    inputs = [samples]
    if holdout:
        with open(holdout, encoding="utf-8") as handle:
            report = prediction_error(fit, read_samples_csv(handle.read()))
        payload["holdout"] = {"mean_relative_error": report.mean, "max_relative_error": report.max}
        inputs.append(holdout)
    _write_json(out, "fit.json", payload)
    _finish("fit", out, inputs, {}, started)
    _echo(fmt, payload)


@app.command("rate")
@handle_errors
def rate_cmd(
    inputs: str = typer.Argument(..., help="Rate inputs JSON (explicit TCO or device profile)"),
    out: str = typer.Option("out", help=OUT_HELP),
    fmt: OutputFormat = typer.Option(OutputFormat.json, "--format", help=FORMAT_HELP),
) -> None:
    """Price per quantum from total cost of ownership."""
    started = time.monotonic()
    rate_inputs = load_document(RateRequestSchema, _read_json(inputs))
    rate = compute_rate(rate_inputs)
    payload = {
        "schema_version": settings.SCHEMA_VERSION,
        "price_per_quantum": rate,
        "price_per_hour": rate * SECONDS_PER_HOUR / rate_inputs.quantum_s,
        "quantum_s": rate_inputs.quantum_s,
        "tco_per_period": rate_inputs.tco_per_period,
        "profit_margin": rate_inputs.profit_margin,
        "period_s": rate_inputs.period_s,
        "relative_performance": rate_inputs.relative_performance,
    }
    _write_json(out, "rate.json", payload)
    _finish("rate", out, [inputs], {}, started)
    _echo(fmt, payload)


@app.command("solve")
@handle_errors
def solve_cmd(
    cluster_file: str = typer.Argument(..., help="Cluster JSON"),
    method: str = typer.Option("milp", help="milp or heuristic"),
    weight: float = typer.Option(1.0, help="Heuristic cost weight in [0, 1]"),
    cost_cap: Optional[float] = typer.Option(None, help="Cost cap C_k (milp)"),
    time_limit: Optional[float] = typer.Option(None, help="Solver time limit in seconds"),
    gap: Optional[float] = typer.Option(None, help="Relative gap tolerance"),
    node_limit: Optional[int] = typer.Option(None, help="Branch-and-bound node limit"),
    dump_lp: Optional[str] = typer.Option(None, help="Also write the program in LP format to this path"),
    out: str = typer.Option("out", help=OUT_HELP),
    fmt: OutputFormat = typer.Option(OutputFormat.json, "--format", help=FORMAT_HELP),
) -> None:
    """Partition the workload with the MILP or the weighted heuristic."""
    started = time.monotonic()
    if method not in ("milp", "heuristic"):
        raise click.BadParameter(f"unknown method {method!r}", param_hint="--method")
    cluster = load_document(ClusterSchema, _read_json(cluster_file))
    payload: Dict[str, Any]
    status = SolveStatus.OPTIMAL
    if method == "heuristic":
        plan = weighted_sweep(cluster, [weight])[0]
        payload = {"method": "heuristic", "weight": weight, "plan": dump_plan(plan, cluster)}
    else:
        program = build_milp(cluster, cost_cap)
        if dump_lp:
            with open(dump_lp, "w", encoding="utf-8") as handle:
                handle.write(program_to_lp_format(program))
        solution = solve_milp(
            program, _solve_options(time_limit, gap, node_limit), start=start_values(cluster, cost_cap)
        )
        status = solution.status
        plan = extract_plan(solution, cluster)
        payload = {
            "method": "milp",
            "cost_cap": cost_cap,
            "plan": dump_plan(plan, cluster),
            "solver": dump_solver_stats(solution),
        }
    payload["schema_version"] = settings.SCHEMA_VERSION
    _write_json(out, "plan.json", payload["plan"])
    _write_json(out, "solve.json", payload)
    _finish(
        "solve", out, [cluster_file],
        {"method": method, "weight": weight, "cost_cap": cost_cap, "time_limit": time_limit,
         "gap": gap, "node_limit": node_limit},
        started,
    )
    _echo(fmt, payload)
    if status is SolveStatus.FEASIBLE_GAP:
        raise typer.Exit(code=4)


def _curve_rows(curve) -> List[List[Any]]:
    return [[curve.method, p.cost, p.makespan_s, p.solver_gap] for p in curve.points]


@app.command("pareto")
@handle_errors
def pareto_cmd(
    cluster_file: str = typer.Argument(..., help="Cluster JSON"),
    points: int = typer.Option(settings.PARETO_POINTS, help="Number of swept cost caps / weights"),
    method: str = typer.Option("milp", help="milp, heuristic or both"),
    time_limit: Optional[float] = typer.Option(None, help="Per-solve time limit in seconds"),
    gap: Optional[float] = typer.Option(None, help="Relative gap tolerance"),
    node_limit: Optional[int] = typer.Option(None, help="Per-solve node limit"),
    out: str = typer.Option("out", help=OUT_HELP),
    fmt: OutputFormat = typer.Option(OutputFormat.csv, "--format", help=FORMAT_HELP),
) -> None:
    """Latency-cost trade-off curve(s) as CSV plus full plans as JSON."""
    started = time.monotonic()
    if method not in ("milp", "heuristic", "both"):
        raise click.BadParameter(f"unknown method {method!r}", param_hint="--method")
    cluster = load_document(ClusterSchema, _read_json(cluster_file))
    curves = []
    if method in ("milp", "both"):
        curves.append(epsilon_sweep(cluster, points, _solve_options(time_limit, gap, node_limit)))
    if method in ("heuristic", "both"):
        curves.append(heuristic_sweep(cluster, points))

    rows = [row for curve in curves for row in _curve_rows(curve)]
    csv_text = _csv_text(["method", "cost", "makespan_s", "gap"], rows)
    payload = {
        "schema_version": settings.SCHEMA_VERSION,
        "curves": [dump_curve(curve, cluster) for curve in curves],
    }
    _write_text(out, "curve.csv", csv_text)
    _write_json(out, "curve.json", payload)
    _finish(
        "pareto", out, [cluster_file],
        {"points": points, "method": method, "time_limit": time_limit, "gap": gap, "node_limit": node_limit},
        started,
    )
    _echo(fmt, payload, csv_text)


@app.command("compare")
@handle_errors
def compare_cmd(
    cluster_file: str = typer.Argument(..., help="Cluster JSON"),
    points: int = typer.Option(settings.PARETO_POINTS, help="Number of swept cost caps / weights"),
    time_limit: Optional[float] = typer.Option(None, help="Per-solve time limit in seconds"),
    gap: Optional[float] = typer.Option(None, help="Relative gap tolerance"),
    node_limit: Optional[int] = typer.Option(None, help="Per-solve node limit"),
    out: str = typer.Option("out", help=OUT_HELP),
    fmt: OutputFormat = typer.Option(OutputFormat.json, "--format", help=FORMAT_HELP),
) -> None:
    """Cheapest / median / fastest comparison of the heuristic and the MILP."""
    started = time.monotonic()
    cluster = load_document(ClusterSchema, _read_json(cluster_file))
    report = compare_methods(cluster, points, _solve_options(time_limit, gap, node_limit))
    payload = dump_comparison(report)
    header = [
        "level", "heuristic_cost", "heuristic_makespan_s", "milp_cost", "milp_makespan_s",
        "cost_ratio", "latency_ratio",
    ]
    csv_text = _csv_text(header, [[getattr(row, name) for name in header] for row in report.rows])
    _write_json(out, "comparison.json", payload)
    _write_text(out, "comparison.csv", csv_text)
    _finish(
        "compare", out, [cluster_file],
        {"points": points, "time_limit": time_limit, "gap": gap, "node_limit": node_limit},
        started,
    )
    _echo(fmt, payload, csv_text)


@app.command("simulate")
@handle_errors
def simulate_cmd(
    plan_file: str = typer.Option(..., "--plan", help="Plan JSON written by solve"),
    cluster_file: str = typer.Option(..., "--cluster", help="Cluster JSON the plan was solved on"),
    noise_beta: float = typer.Option(0.0, help="Relative sigma of beta noise"),
    noise_gamma: float = typer.Option(0.0, help="Relative sigma of gamma noise"),
    seeds: int = typer.Option(1, help="Number of seeds to replay"),
    seed: int = typer.Option(0, help="First seed"),
    out: str = typer.Option("out", help=OUT_HELP),
    fmt: OutputFormat = typer.Option(OutputFormat.json, "--format", help=FORMAT_HELP),
) -> None:
    """Replay a plan under coefficient noise, one run per seed."""
    started = time.monotonic()
    if seeds < 1:
        raise click.BadParameter("must be >= 1", param_hint="--seeds")
    cluster = load_document(ClusterSchema, _read_json(cluster_file))
    plan = load_plan(_read_json(plan_file), cluster)
    noise = NoiseSpec(beta_rel_sigma=noise_beta, gamma_rel_sigma=noise_gamma, seed=seed)
    results, summary = simulate_many(plan, cluster, noise, range(seed, seed + seeds))

    csv_text = _csv_text(
        ["seed", "realized_makespan_s", "realized_cost", "relative_error"],
        [[r.seed, r.realized_makespan_s, r.realized_cost, r.relative_makespan_error] for r in results],
    )
    payload = versioned_dump(SimSummarySchema, summary)
    _write_text(out, "simulation.csv", csv_text)
    _write_json(out, "simulation_summary.json", payload)
    _finish(
        "simulate", out, [plan_file, cluster_file],
        {"noise_beta": noise_beta, "noise_gamma": noise_gamma, "seeds": seeds, "seed": seed},
        started,
    )
    _echo(fmt, payload, csv_text)


@app.command("gen")
@handle_errors
def gen_cmd(
    platforms: int = typer.Option(6, help="Number of platforms"),
    tasks: int = typer.Option(16, help="Number of tasks"),
    seed: int = typer.Option(0, help="Generator seed"),
    preset: str = typer.Option("mixed", help="mixed or adversarial"),
    archetype: Optional[List[str]] = typer.Option(None, help="Archetype to include (repeatable)"),
    out: str = typer.Option("out", help=OUT_HELP),
    fmt: OutputFormat = typer.Option(OutputFormat.json, "--format", help=FORMAT_HELP),
) -> None:
    """Generate a synthetic cluster."""
    started = time.monotonic()
    cluster = generate_cluster(platforms, tasks, seed, archetype or None, preset)
    payload = dump_cluster(cluster)
    _write_json(out, "cluster.json", payload)
    _finish(
        "gen", out, [],
        {"platforms": platforms, "tasks": tasks, "seed": seed, "preset": preset,
         "archetype": ",".join(archetype) if archetype else None},
        started,
    )
    _echo(fmt, payload)


@app.command("bench-gen")
@handle_errors
def bench_gen_cmd(
    beta: float = typer.Option(..., help="True seconds per work unit"),
    gamma: float = typer.Option(0.0, help="True setup seconds"),
    min_work: int = typer.Option(1000, help="Smallest benchmark size"),
    span: float = typer.Option(10.0, help="Largest / smallest benchmark size"),
    count: int = typer.Option(5, help="Number of benchmark sizes"),
    repeats: int = typer.Option(3, help="Runs per size"),
    noise: float = typer.Option(0.05, help="Relative sigma of latency noise"),
    seed: int = typer.Option(0, help="Noise seed"),
    holdout_factor: Optional[float] = typer.Option(
        None, help="Also write holdout.csv at this multiple of the largest size"
    ),
    out: str = typer.Option("out", help=OUT_HELP),
    fmt: OutputFormat = typer.Option(OutputFormat.csv, "--format", help=FORMAT_HELP),
) -> None:
    """Synthetic benchmark samples for a known latency model."""
    started = time.monotonic()
    grid = benchmark_work_grid(min_work, span, count)
    samples = generate_benchmark_samples(beta, gamma, grid, repeats, noise, seed)
    csv_text = write_samples_csv(samples)
    _write_text(out, "samples.csv", csv_text)
    if holdout_factor:
        largest = grid[-1] * holdout_factor
        holdout_grid = [int(round(w)) for w in evenly_spaced(largest, largest * 2.5, count)]
        holdout = generate_benchmark_samples(beta, gamma, holdout_grid, repeats, noise, seed + 1)
        _write_text(out, "holdout.csv", write_samples_csv(holdout))
    _finish(
        "bench-gen", out, [],
        {"beta": beta, "gamma": gamma, "min_work": min_work, "span": span, "count": count,
         "repeats": repeats, "noise": noise, "seed": seed, "holdout_factor": holdout_factor},
        started,
    )
    _echo(fmt, {"samples": len(samples)}, csv_text)


def main() -> None:
    """Console entry point; usage errors exit with 1."""
    try:
        code = app(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(1)
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
