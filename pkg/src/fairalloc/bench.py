"""Scenario orchestration: named allocators behind a registry, problem and
allocation (de)serialization, POP-style partitioning, and the benchmark
runner that scores every scenario against the exact oracle.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Callable, Mapping

import numpy as np

from .lp import SolveSession
from .metrics import compare_rates, default_vartheta
from .model import (
    Allocation,
    Demand,
    Problem,
    Resource,
    problem_from_json,
    problem_to_json,
    total_allocation,
)
from .optimizers import (
    BinConfig,
    EquiDepthConfig,
    compute_equi_boundaries,
    equi_depth_elastic,
    equi_depth_multibin,
    exact_sequential_max_min,
    geo_binner,
    merge_boundaries,
    one_shot_exact,
    suggest_bin_config,
    swan_sequence,
)
from .report import AllocatorReport
from .waterfill import (
    adaptive_waterfill,
    approx_waterfill,
    build_subdemands,
    single_path_waterfill,
    uniform_theta,
)

__all__ = [
    "Scenario",
    "BenchmarkRow",
    "ALLOCATOR_IDS",
    "run_allocator",
    "run_benchmark",
    "benchmark_csv",
    "BENCH_CSV_HEADER",
    "BENCH_CSV_VERSION",
    "pop_partition",
    "merge_partition_allocations",
    "load_problem",
    "save_problem",
    "save_allocation",
    "load_allocation",
]


# -- problem / allocation files -------------------------------------------------


def load_problem(path: str | FsPath) -> Problem:
    text = FsPath(path).read_text()
    try:
        return problem_from_json(text)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_problem(path: str | FsPath, problem: Problem) -> None:
    FsPath(path).write_text(problem_to_json(problem) + "\n")


def save_allocation(path: str | FsPath, alloc: Allocation) -> None:
    nested: dict[str, dict[str, float]] = {}
    for (k, p), rate in sorted(alloc.rates.items()):
        nested.setdefault(k, {})[p] = rate
    FsPath(path).write_text(json.dumps({"rates": nested}, indent=2) + "\n")


def load_allocation(path: str | FsPath) -> Allocation:
    data = json.loads(FsPath(path).read_text())
    rates = {
        (k, p): float(r)
        for k, per_path in data["rates"].items()
        for p, r in per_path.items()
    }
    return Allocation(rates)


# -- named allocators -------------------------------------------------------------


def _run_waterfill_exact(problem: Problem, config: dict, session) -> AllocatorReport:
    multi = [d.id for d in problem.demands if len(d.paths) > 1]
    if multi:
        raise ValueError(
            f"waterfill handles single-path demands only; {multi[:3]} have "
            "several paths (use approx-waterfill or adaptive-waterfill)"
        )
    matrix, caps = build_subdemands(problem, uniform_theta(problem))
    rates = single_path_waterfill(matrix, caps)
    alloc = Allocation({c: float(r) for c, r in zip(matrix.columns, rates)})
    return AllocatorReport(alloc, 0, 1, {"allocator": "waterfill", "converged": True})


def _run_approx_waterfill(problem: Problem, config: dict, session) -> AllocatorReport:
    matrix, caps = build_subdemands(problem, uniform_theta(problem))
    rates = approx_waterfill(matrix, caps)
    alloc = Allocation({c: float(r) for c, r in zip(matrix.columns, rates)})
    return AllocatorReport(
        alloc, 0, 1, {"allocator": "approx-waterfill", "converged": True}
    )


def _run_adaptive(problem: Problem, config: dict, session) -> AllocatorReport:
    return adaptive_waterfill(
        problem,
        max_iterations=int(config.get("iterations", 10)),
        inner=config.get("inner", "approx"),
    )


def _run_gb(problem: Problem, config: dict, session) -> AllocatorReport:
    cfg = suggest_bin_config(
        problem,
        alpha=float(config.get("alpha", 2.0)),
        u=config.get("u"),
        epsilon=config.get("epsilon"),
        num_bins=config.get("bins"),
    )
    return geo_binner(problem, cfg, session)


def _run_swan(problem: Problem, config: dict, session) -> AllocatorReport:
    cfg = suggest_bin_config(
        problem, alpha=float(config.get("alpha", 2.0)), u=config.get("u")
    )
    return swan_sequence(
        problem,
        u=cfg.u,
        alpha=cfg.alpha,
        max_bins=config.get("bins"),
        session=session,
    )


def _run_eb_elastic(problem: Problem, config: dict, session) -> AllocatorReport:
    cfg = EquiDepthConfig(
        num_bins=int(config.get("bins", max(2, min(8, len(problem.demands) // 2)))),
        epsilon=float(config.get("epsilon", 0.25)),
        slack=config.get("slack"),
        aw_iterations=int(config.get("iterations", 10)),
    )
    return equi_depth_elastic(problem, cfg, session)


def _run_eb_multibin(problem: Problem, config: dict, session) -> AllocatorReport:
    aw = adaptive_waterfill(
        problem, max_iterations=int(config.get("iterations", 10)), inner="approx"
    )
    dm = problem.demand_map()
    totals: dict[str, float] = {d.id: 0.0 for d in problem.demands}
    for (k, pid), r in aw.allocation.rates.items():
        totals[k] += dm[k].utility_on(pid) * r
    est = {k: totals[k] / dm[k].weight for k in totals}
    bins = int(config.get("bins", max(2, min(8, len(problem.demands) // 2))))
    bounds, _ = compute_equi_boundaries(est, min(bins, len(est)))
    merged = merge_boundaries(bounds)
    if not merged:
        merged = [max(est.values(), default=1.0) or 1.0]
    return equi_depth_multibin(
        problem, merged, epsilon=float(config.get("epsilon", 0.25)), session=session
    )


_RUNNERS: dict[str, Callable[[Problem, dict, SolveSession], AllocatorReport]] = {
    "exact": lambda p, c, s: exact_sequential_max_min(p, s),
    "oneshot": lambda p, c, s: one_shot_exact(p, float(c.get("epsilon", 0.01)), s),
    "swan": _run_swan,
    "gb": _run_gb,
    "eb-elastic": _run_eb_elastic,
    "eb-multibin": _run_eb_multibin,
    "waterfill": _run_waterfill_exact,
    "approx-waterfill": _run_approx_waterfill,
    "adaptive-waterfill": _run_adaptive,
}

ALLOCATOR_IDS = tuple(_RUNNERS)


def run_allocator(
    problem: Problem, allocator: str, config: dict | None = None
) -> AllocatorReport:
    if allocator not in _RUNNERS:
        raise ValueError(
            f"unknown allocator {allocator!r}; choose from {', '.join(ALLOCATOR_IDS)}"
        )
    session = SolveSession()
    return _RUNNERS[allocator](problem, config or {}, session)


# -- POP-style partitioning -------------------------------------------------------


def pop_partition(
    problem: Problem,
    k: int,
    client_split_threshold: float = 0.75,
    seed: int = 0,
) -> list[Problem]:
    """Split the problem into k subproblems, each holding an equal 1/k share
    of every resource capacity.

    Demands land in one uniformly random partition, except those with volume
    above client_split_threshold * mean volume, which are divided evenly
    across all partitions (volume/k each); unbounded demands are never split.
    The union of partition volumes reconstructs the original volumes.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    resources = [Resource(r.id, r.capacity / k) for r in problem.resources]

    bounded = [d.volume for d in problem.demands if d.bounded]
    mean_volume = sum(bounded) / len(bounded) if bounded else 0.0
    cutoff = client_split_threshold * mean_volume

    buckets: list[list[Demand]] = [[] for _ in range(k)]
    for d in problem.demands:
        if d.bounded and bounded and d.volume > cutoff:
            for b in buckets:
                b.append(
                    Demand(d.id, d.paths, d.volume / k, d.weight, d.utility, d.consumption)
                )
        else:
            buckets[int(rng.integers(0, k))].append(d)
    return [Problem(resources, problem.paths, bucket) for bucket in buckets]


def merge_partition_allocations(
    problem: Problem, allocations: list[Allocation]
) -> Allocation:
    """Sum per-(demand, path) rates across partitions; feasible in the
    original problem because partition capacities sum back to c_e."""
    merged: dict[tuple[str, str], float] = {}
    for alloc in allocations:
        for key, rate in alloc.rates.items():
            merged[key] = merged.get(key, 0.0) + rate
    valid = {(d.id, pid) for d in problem.demands for pid in d.paths}
    unknown = set(merged) - valid
    if unknown:
        raise ValueError(f"partition allocations carry unknown keys: {sorted(unknown)[:3]}")
    return Allocation(merged)


# -- benchmark ----------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    label: str
    problem: Problem
    allocator: str
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.allocator not in _RUNNERS:
            raise ValueError(f"scenario {self.label!r}: unknown allocator {self.allocator!r}")


@dataclass
class BenchmarkRow:
    scenario: str
    allocator: str
    fairness_geomean: float | None
    efficiency: float | None
    lp_solves: int | None
    iterations: int | None
    converged: bool | None
    wall_ms: float | None
    error: str | None = None


BENCH_CSV_VERSION = 1
BENCH_CSV_HEADER = (
    "scenario,allocator,fairness_geomean,efficiency,lp_solves,iterations,converged,wall_ms"
)


def run_benchmark(
    scenarios: list[Scenario],
    oracle: str | Mapping[str, Mapping[str, float]] = "exact",
) -> list[BenchmarkRow]:
    """Score scenarios against max-min fair reference rates.

    ``oracle`` is either the id "exact" (the sequential LP oracle, solved
    once per distinct problem) or a mapping scenario label -> golden per-
    demand rates.  Allocator failures become row-level errors; the run
    continues.
    """
    if isinstance(oracle, str) and oracle != "exact":
        raise ValueError("oracle must be 'exact' or a mapping of golden rates")
    golden_cache: dict[int, dict[str, float]] = {}
    rows: list[BenchmarkRow] = []
    for sc in scenarios:
        if isinstance(oracle, Mapping):
            golden = dict(oracle[sc.label])
        else:
            key = id(sc.problem)
            if key not in golden_cache:
                golden_cache[key] = total_allocation(
                    sc.problem, exact_sequential_max_min(sc.problem).allocation
                )
            golden = golden_cache[key]
        try:
            t0 = time.perf_counter()
            report = run_allocator(sc.problem, sc.allocator, sc.config)
            wall_ms = (time.perf_counter() - t0) * 1e3
            totals = total_allocation(sc.problem, report.allocation)
            metrics = compare_rates(sc.problem, totals, golden)
            rows.append(
                BenchmarkRow(
                    sc.label,
                    sc.allocator,
                    metrics.fairness_geomean,
                    metrics.efficiency_ratio,
                    report.lp_solves,
                    report.iterations,
                    report.converged,
                    wall_ms,
                )
            )
        except Exception as exc:  # row-level failure, keep going
            rows.append(
                BenchmarkRow(
                    sc.label, sc.allocator, None, None, None, None, None, None,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return rows


def benchmark_csv(rows: list[BenchmarkRow]) -> str:
    """Fixed, versioned column order (BENCH_CSV_VERSION)."""
    buf = io.StringIO()
    buf.write(BENCH_CSV_HEADER + "\n")
    for r in rows:
        cells = [
            r.scenario,
            r.allocator,
            "" if r.fairness_geomean is None else repr(r.fairness_geomean),
            "" if r.efficiency is None else repr(r.efficiency),
            "" if r.lp_solves is None else str(r.lp_solves),
            "" if r.iterations is None else str(r.iterations),
            "" if r.converged is None else str(r.converged).lower(),
            "" if r.wall_ms is None else f"{r.wall_ms:.3f}",
        ]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
