"""Benchmark harness: run the experiment grids, aggregate, export.

Each grid crosses random instances with random starting points and runs all
methods from the same projected start. Iteration counts are the performance
measure; per-method statistics and Dolan-More performance profiles are
computed from the per-run records. Everything is deterministic given the base
seed, including the record order (sorted by instance seed, start seed,
method) and the exported files.
"""

from __future__ import annotations

import csv
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import EmptyInput
from .instances import derive_seed, gen_polyhedral_instance, gen_soc_instance, gen_start
from .methods import Method, SolverConfig, Status, run
from .product_space import ProductSet, run_prod

__all__ = [
    "RunRecord",
    "RunStats",
    "ProfileCurve",
    "BenchResult",
    "summarize",
    "make_stats",
    "performance_profile",
    "profile_from_records",
    "bench_soc",
    "bench_polyhedral_prod",
    "export",
    "export_records_csv",
    "read_records_csv",
    "export_traces_csv",
    "export_summary_json",
]

SOC_METHODS = ("CRM", "DRM", "MAP")
PROD_METHODS = ("CRM-prod", "DRM-prod", "MAP-prod")
CSV_COLUMNS = ("instance_seed", "start_seed", "method", "iterations", "final_gap", "status")

# seed-stream tags, part of the determinism contract
_INSTANCE_TAG = 1
_START_TAG = 2


@dataclass
class RunRecord:
    """One (instance, start, method) run."""

    instance_seed: int
    start_seed: int
    method: str
    iterations: int
    final_gap: float
    status: str
    gaps: list[float] | None = None


@dataclass
class RunStats:
    """Aggregate iteration statistics for one method."""

    method: str
    iteration_counts: list[int]
    mean: float
    min: int
    median: float
    max: int
    failures: int


@dataclass
class ProfileCurve:
    """Performance-profile curve: fraction of runs solved within factor tau."""

    method: str
    thresholds: list[float]
    fraction_solved: list[float]


@dataclass
class BenchResult:
    kind: str
    params: dict
    records: list[RunRecord]
    stats: list[RunStats] = field(default_factory=list)


def summarize(counts) -> dict:
    """mean / min / median / max of iteration counts.

    The median uses the midpoint convention (average of the two central order
    statistics for even length).
    """
    counts = list(counts)
    if not counts:
        raise EmptyInput("no iteration counts to summarize")
    return {
        "mean": statistics.fmean(counts),
        "min": min(counts),
        "median": float(statistics.median(counts)),
        "max": max(counts),
    }


def make_stats(method: str, records, max_iter: int, exclude_failures: bool = False) -> RunStats:
    """Build RunStats for ``method`` from its records.

    Non-converged runs count as ``max_iter`` by default and are always
    reported in the ``failures`` column; with ``exclude_failures`` they are
    dropped from the statistics instead.
    """
    failures = sum(1 for r in records if r.status != Status.CONVERGED.value)
    counts = []
    for r in records:
        if r.status == Status.CONVERGED.value:
            counts.append(r.iterations)
        elif not exclude_failures:
            counts.append(max_iter)
    s = summarize(counts)
    return RunStats(
        method=method,
        iteration_counts=counts,
        mean=s["mean"],
        min=s["min"],
        median=s["median"],
        max=s["max"],
        failures=failures,
    )


def performance_profile(costs, methods=None, failure=None) -> list[ProfileCurve]:
    """Dolan-More performance profiles from a runs x methods cost matrix.

    Each row holds one run's cost (positive) per method, with ``failure``
    marking unsolved runs. Per run, each method's ratio is its cost divided
    by the best cost in the row (failures get ratio +inf; so do whole rows
    without any success). The threshold grid is the sorted set of distinct
    finite ratios, and each curve reports the fraction of runs with ratio at
    most tau.
    """
    rows = [list(row) for row in costs]
    if not rows:
        raise EmptyInput("no cost rows")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValueError("cost rows have unequal width")
    if methods is None:
        methods = [f"method_{j}" for j in range(width)]
    if len(methods) != width:
        raise ValueError("one method label per column required")

    ratios = []
    for row in rows:
        finite = [c for c in row if c is not failure]
        best = min(finite) if finite else None
        ratios.append(
            [float("inf") if (c is failure or best is None) else c / best for c in row]
        )

    finite_ratios = sorted({r for row in ratios for r in row if r != float("inf")})
    thresholds = finite_ratios or [1.0]
    runs = len(rows)
    curves = []
    for j, name in enumerate(methods):
        col = sorted(row[j] for row in ratios)
        fractions = [sum(1 for r in col if r <= tau) / runs for tau in thresholds]
        curves.append(ProfileCurve(method=name, thresholds=list(thresholds), fraction_solved=fractions))
    return curves


def profile_from_records(records) -> list[ProfileCurve]:
    """Group records by (instance seed, start seed) and profile the methods."""
    methods = sorted({r.method for r in records})
    by_run: dict[tuple[int, int], dict[str, RunRecord]] = {}
    for r in records:
        by_run.setdefault((r.instance_seed, r.start_seed), {})[r.method] = r
    rows = []
    for key in sorted(by_run):
        group = by_run[key]
        rows.append(
            [
                group[m].iterations
                if m in group and group[m].status == Status.CONVERGED.value
                else None
                for m in methods
            ]
        )
    return performance_profile(rows, methods=methods, failure=None)


def _soc_unit(args) -> list[RunRecord]:
    n, tol, max_iter, instance_seed, start_seeds, record_gaps = args
    instance = gen_soc_instance(n, instance_seed)
    cone, affine = instance.sets[0], instance.affine
    records = []
    for start_seed in start_seeds:
        start = gen_start(instance, start_seed, min_gap=tol)
        for name, method in (("CRM", Method.CRM), ("DRM", Method.DRM), ("MAP", Method.MAP)):
            cfg = SolverConfig(tol=tol, max_iter=max_iter, method=method)
            trace = run(cone, affine, start.projected, cfg)
            records.append(
                RunRecord(
                    instance_seed=instance_seed,
                    start_seed=start_seed,
                    method=name,
                    iterations=trace.iterations,
                    final_gap=trace.gaps[-1],
                    status=trace.status.value,
                    gaps=trace.gaps if record_gaps else None,
                )
            )
    return records


def _poly_unit(args) -> list[RunRecord]:
    n, tol, max_iter, instance_seed, start_seeds, record_gaps = args
    instance = gen_polyhedral_instance(n, instance_seed)
    W = ProductSet(instance.sets)
    records = []
    for start_seed in start_seeds:
        start = gen_start(instance, start_seed, min_gap=tol)
        for name, method in (
            ("CRM-prod", Method.CRM),
            ("DRM-prod", Method.DRM),
            ("MAP-prod", Method.MAP),
        ):
            cfg = SolverConfig(tol=tol, max_iter=max_iter, method=method)
            trace = run_prod(W, start.projected, cfg)
            records.append(
                RunRecord(
                    instance_seed=instance_seed,
                    start_seed=start_seed,
                    method=name,
                    iterations=trace.iterations,
                    final_gap=trace.gaps[-1],
                    status=trace.status.value,
                    gaps=trace.gaps if record_gaps else None,
                )
            )
    return records


def _run_grid(unit, kind, methods, num_instances, starts_per_instance, n, tol, max_iter,
              base_seed, jobs, record_gaps) -> BenchResult:
    if num_instances < 1 or starts_per_instance < 1:
        raise ValueError("instance and start counts must be positive")
    units = []
    for i in range(num_instances):
        instance_seed = derive_seed(base_seed, _INSTANCE_TAG, i)
        start_seeds = [
            derive_seed(base_seed, _START_TAG, i, j) for j in range(starts_per_instance)
        ]
        units.append((n, tol, max_iter, instance_seed, start_seeds, record_gaps))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(unit, units))
    else:
        chunks = [unit(u) for u in units]

    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.instance_seed, r.start_seed, r.method))
    stats = [
        make_stats(m, [r for r in records if r.method == m], max_iter) for m in methods
    ]
    params = {
        "n": n,
        "instances": num_instances,
        "starts": starts_per_instance,
        "tol": tol,
        "max_iter": max_iter,
        "base_seed": base_seed,
    }
    return BenchResult(kind=kind, params=params, records=records, stats=stats)


def bench_soc(num_instances: int = 100, starts_per_instance: int = 10, n: int = 200,
              tol: float = 1e-6, max_iter: int = 100_000, base_seed: int = 0,
              jobs: int = 1, record_gaps: bool = False) -> BenchResult:
    """Cone-and-affine grid: CRM vs DRM vs MAP on the two-set problem.

    All three methods start from the same projected point and stop when
    ``||P_U(z) - P_C(z)|| < tol``.
    """
    return _run_grid(_soc_unit, "soc", SOC_METHODS, num_instances, starts_per_instance,
                     n, tol, max_iter, base_seed, jobs, record_gaps)


def bench_polyhedral_prod(num_instances: int = 1, starts_per_instance: int = 20,
                          n: int = 200, tol: float = 1e-6, max_iter: int = 100_000,
                          base_seed: int = 0, jobs: int = 1,
                          record_gaps: bool = False) -> BenchResult:
    """Polyhedral grid under the product-space reformulation.

    Starts are diagonal lifts; stopping uses the product feasibility error
    (see :func:`crmfeas.product_space.run_prod`).
    """
    return _run_grid(_poly_unit, "polyhedral_prod", PROD_METHODS, num_instances,
                     starts_per_instance, n, tol, max_iter, base_seed, jobs, record_gaps)


# --- export -----------------------------------------------------------------

def export_records_csv(records, path) -> None:
    """One row per run; floats keep full (repr) precision."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [r.instance_seed, r.start_seed, r.method, r.iterations,
                 repr(r.final_gap), r.status]
            )


def read_records_csv(path) -> list[RunRecord]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or list(reader.fieldnames) != list(CSV_COLUMNS):
            raise ValueError(f"expected CSV columns {','.join(CSV_COLUMNS)}")
        return [
            RunRecord(
                instance_seed=int(row["instance_seed"]),
                start_seed=int(row["start_seed"]),
                method=row["method"],
                iterations=int(row["iterations"]),
                final_gap=float(row["final_gap"]),
                status=row["status"],
            )
            for row in reader
        ]


def export_traces_csv(records, path) -> None:
    """Convergence curves as (iteration, gap) rows, for log-log plotting."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["instance_seed", "start_seed", "method", "iteration", "gap"])
        for r in records:
            if r.gaps is None:
                continue
            for k, g in enumerate(r.gaps):
                writer.writerow([r.instance_seed, r.start_seed, r.method, k, repr(g)])


def export_summary_json(result: BenchResult, path, profiles=None) -> None:
    doc = {
        "schema": 1,
        "kind": result.kind,
        "params": result.params,
        "stats": [
            {
                "method": s.method,
                "mean": s.mean,
                "min": s.min,
                "median": s.median,
                "max": s.max,
                "failures": s.failures,
            }
            for s in result.stats
        ],
    }
    if profiles is not None:
        doc["profile"] = [
            {
                "method": c.method,
                "thresholds": c.thresholds,
                "fraction_solved": c.fraction_solved,
            }
            for c in profiles
        ]
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def export(result: BenchResult, format: str, path) -> None:
    """Write a bench result: per-run CSV or JSON summary (stats + profiles)."""
    if format == "csv":
        export_records_csv(result.records, path)
    elif format == "json":
        export_summary_json(result, path, profiles=profile_from_records(result.records))
    else:
        raise ValueError(f"unknown format {format!r}")
