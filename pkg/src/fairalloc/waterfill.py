"""Combinatorial allocators: exact and single-pass approximate waterfilling
over single-path subdemands, plus the adaptive multi-path waterfiller that
re-weights subdemands toward less congested paths each round.

Multi-path demands are expanded into one subdemand per (demand, path); the
subdemands of a bounded demand share a virtual edge whose capacity is the
demand volume, so no demand can exceed what it asked for.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import Allocation, Problem, total_allocation, virtual_edge_id
from .report import AllocatorReport

__all__ = [
    "SubdemandMatrix",
    "ThetaState",
    "BottleneckCheck",
    "build_subdemands",
    "single_path_waterfill",
    "approx_waterfill",
    "adaptive_waterfill",
    "is_bandwidth_bottlenecked",
    "theta_trace_csv",
]

THETA_CONVERGENCE = 1e-6


@dataclass(frozen=True)
class SubdemandMatrix:
    """Per-(demand, path) columns over resource rows (virtual edges last).

    ``gamma[e, c]`` is the waterfilling weight w_k * theta_k^p when row e lies
    on column c's path, else 0.  ``consumption`` carries r_k^e on the same
    sparsity pattern (1 on virtual edges) so capacity deductions stay correct
    when consumption factors differ from 1.
    """

    gamma: np.ndarray
    consumption: np.ndarray
    rows: tuple[str, ...]
    columns: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class ThetaState:
    theta: Mapping[tuple[str, str], float]
    iteration: int = 0

    def __init__(self, theta: Mapping[tuple[str, str], float], iteration: int = 0):
        object.__setattr__(self, "theta", dict(theta))
        object.__setattr__(self, "iteration", iteration)


def uniform_theta(problem: Problem) -> ThetaState:
    theta = {
        (d.id, pid): 1.0 / len(d.paths) for d in problem.demands for pid in d.paths
    }
    return ThetaState(theta, 0)


def build_subdemands(
    problem: Problem, theta: ThetaState | Mapping[tuple[str, str], float]
) -> tuple[SubdemandMatrix, np.ndarray]:
    """Expand demands into single-path subdemand columns and capacities.

    Raises ValueError when a demand's theta row does not sum to 1 within 1e-9
    or contains negatives.  Unbounded demands get no virtual edge.
    """
    weights = theta.theta if isinstance(theta, ThetaState) else theta
    path_map = problem.path_map()

    for d in problem.demands:
        row = [weights.get((d.id, pid), 0.0) for pid in d.paths]
        if any(t < -1e-12 for t in row):
            raise ValueError(f"negative path weight for demand {d.id!r}")
        if abs(sum(row) - 1.0) > 1e-9:
            raise ValueError(
                f"path weights for demand {d.id!r} sum to {sum(row)}, expected 1"
            )

    rows = [r.id for r in problem.resources]
    caps = [r.capacity for r in problem.resources]
    for d in problem.demands:
        if d.bounded:
            rows.append(virtual_edge_id(d.id))
            caps.append(float(d.volume))
    row_idx = {rid: i for i, rid in enumerate(rows)}

    columns = [(d.id, pid) for d in problem.demands for pid in d.paths]
    gamma = np.zeros((len(rows), len(columns)))
    cons = np.zeros_like(gamma)
    for c, (k, pid) in enumerate(columns):
        d = problem.demand_map()[k]
        g = d.weight * weights.get((k, pid), 0.0)
        for rid in path_map[pid].resources:
            gamma[row_idx[rid], c] = g
            cons[row_idx[rid], c] = d.consumption_on(rid)
        if d.bounded:
            v = row_idx[virtual_edge_id(k)]
            gamma[v, c] = g
            cons[v, c] = 1.0
    return SubdemandMatrix(gamma, cons, tuple(rows), tuple(columns)), np.array(caps)


def _check_columns(matrix: SubdemandMatrix) -> np.ndarray:
    """Columns with no resource are structural errors; zero-weight columns
    (theta = 0) are legal and simply receive rate 0."""
    if np.any(matrix.consumption.sum(axis=0) <= 0.0):
        bad = int(np.argmin(matrix.consumption.sum(axis=0)))
        raise ValueError(f"subdemand {matrix.columns[bad]} lies on no resource")
    return matrix.gamma.sum(axis=0) > 0.0


def single_path_waterfill(
    matrix: SubdemandMatrix, capacities: np.ndarray
) -> np.ndarray:
    """Exact weighted max-min rates for single-path subdemands.

    Each round finds the link with the smallest fair share
    zeta = capacity / total consumption-scaled weight, fixes its subdemands at
    zeta * weight, deducts their usage everywhere, and removes the link.
    Terminates in at most one round per link.
    """
    active = _check_columns(matrix)
    gamma, cons = matrix.gamma, matrix.consumption
    n_rows, n_cols = gamma.shape
    caps = np.array(capacities, dtype=float)
    live = np.ones(n_rows, dtype=bool)
    rates = np.zeros(n_cols)

    while active.any():
        load = (gamma * cons) @ active.astype(float)
        eligible = live & (load > 0.0)
        if not eligible.any():
            break
        share = np.full(n_rows, np.inf)
        share[eligible] = np.maximum(caps[eligible], 0.0) / load[eligible]
        e = int(np.argmin(share))  # ties: lowest row index (resource order)
        zeta = share[e]
        fixed = active & (gamma[e] > 0.0)
        rates[fixed] = zeta * gamma[e, fixed]
        usage = cons[:, fixed] @ rates[fixed]
        caps -= usage
        live[e] = False
        active &= ~fixed
    return rates


def approx_waterfill(matrix: SubdemandMatrix, capacities: np.ndarray) -> np.ndarray:
    """Single pass in the initial fair-share order of the links.

    Per link, an inner fixed point drops subdemands already bottlenecked at a
    smaller rate elsewhere (deducting their usage), then fixes the remaining
    ones at the link's weighted share.  Approximate even for single-path
    inputs, but never exceeds any capacity.
    """
    active = _check_columns(matrix)
    gamma, cons = matrix.gamma, matrix.consumption
    n_rows, n_cols = gamma.shape
    caps = np.array(capacities, dtype=float)

    rates = np.zeros(n_cols)
    rates[active] = np.inf

    load = (gamma * cons) @ active.astype(float)
    share = np.full(n_rows, np.inf)
    share[load > 0.0] = caps[load > 0.0] / load[load > 0.0]
    order = np.argsort(share, kind="stable")  # ties: lowest resource index

    for e in order:
        if not np.isfinite(share[e]):
            continue
        members = np.where(active & (gamma[e] > 0.0))[0]
        cap = caps[e]
        while members.size:
            denom = float(np.dot(gamma[e, members], cons[e, members]))
            if denom <= 0.0:
                break
            zeta = max(cap, 0.0) / denom
            tentative = zeta * gamma[e, members]
            elsewhere = rates[members] < tentative
            if not elsewhere.any():
                rates[members] = tentative
                break
            dropped = members[elsewhere]
            cap -= float(np.dot(cons[e, dropped], rates[dropped]))
            members = members[~elsewhere]
    rates[np.isinf(rates)] = 0.0
    return rates


def _rates_dict(
    matrix: SubdemandMatrix, rates: np.ndarray
) -> dict[tuple[str, str], float]:
    return {col: float(r) for col, r in zip(matrix.columns, rates)}


def adaptive_waterfill(
    problem: Problem,
    max_iterations: int = 10,
    inner: str = "approx",
    theta_tol: float = THETA_CONVERGENCE,
) -> AllocatorReport:
    """Iterate waterfilling with path weights theta_k^p updated to last
    round's rate proportions: theta(t+1) = f_k^p(t) / sum_p f_k^p(t).

    Stops when the largest theta change drops to theta_tol (default 1e-6) or
    at max_iterations; non-convergence is flagged in the report, not an
    error.  Demands with zero total rate keep their previous theta (the
    update is undefined there).
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    if inner not in ("exact", "approx"):
        raise ValueError(f"unknown inner waterfiller {inner!r}")
    fill = single_path_waterfill if inner == "exact" else approx_waterfill

    theta = dict(uniform_theta(problem).theta)
    trace: list[dict] = []
    converged = False
    rates: dict[tuple[str, str], float] = {}
    iterations = 0

    for t in range(1, max_iterations + 1):
        iterations = t
        matrix, caps = build_subdemands(problem, theta)
        rates = _rates_dict(matrix, fill(matrix, caps))
        trace.append({"iteration": t, "theta": dict(theta), "rates": dict(rates)})

        totals: dict[str, float] = {}
        for (k, _), r in rates.items():
            totals[k] = totals.get(k, 0.0) + r
        new_theta = dict(theta)
        for (k, p), r in rates.items():
            if totals[k] > 0.0:
                new_theta[(k, p)] = r / totals[k]
        delta = max(abs(new_theta[kp] - theta[kp]) for kp in theta)
        theta = new_theta
        if delta <= theta_tol:
            converged = True
            break

    allocation = Allocation(rates)
    return AllocatorReport(
        allocation,
        lp_solves=0,
        iterations=iterations,
        notes={
            "allocator": f"adaptive-waterfill/{inner}",
            "converged": converged,
            "theta_trace": trace,
            "final_theta": theta,
        },
    )


def theta_trace_csv(report: AllocatorReport) -> str:
    """Render the adaptive waterfiller's trace as iteration x subdemand CSV."""
    trace = report.notes.get("theta_trace")
    if trace is None:
        raise ValueError("report has no theta trace")
    buf = io.StringIO()
    buf.write("iteration,demand,path,theta,rate\n")
    for entry in trace:
        for (k, p), th in sorted(entry["theta"].items()):
            rate = entry["rates"].get((k, p), 0.0)
            buf.write(f"{entry['iteration']},{k},{p},{th!r},{rate!r}\n")
    return buf.getvalue()


@dataclass(frozen=True)
class BottleneckCheck:
    bottlenecked: bool
    witness: tuple[str, str, str | None, str | None] | None = None


def is_bandwidth_bottlenecked(
    problem: Problem, alloc: Allocation, tol: float = 1e-6
) -> BottleneckCheck:
    """Check the fixed-point condition of the adaptive waterfiller.

    True iff every nonzero subdemand f_k^p has a saturated link l on its path
    (volume edges count as links; saturation within a 1e-6 relative margin)
    where k's weighted ratio is at least every sharer's ratio minus ``tol``.
    The witness of a failure is (demand, path, link, sharer); link/sharer are
    None when the path has no saturated link at all.
    """
    path_map = problem.path_map()
    demand_map = problem.demand_map()
    max_cap = problem.max_capacity()
    rate_eps = 1e-9 * max(1.0, max_cap)

    usage: dict[str, float] = {r.id: 0.0 for r in problem.resources}
    raw_total: dict[str, float] = {d.id: 0.0 for d in problem.demands}
    on_link: dict[str, list[str]] = {r.id: [] for r in problem.resources}
    for (k, p), rate in alloc.rates.items():
        raw_total[k] += rate
        if rate <= rate_eps:
            continue
        for rid in path_map[p].resources:
            usage[rid] += demand_map[k].consumption_on(rid) * rate
            on_link[rid].append(k)
    capacities = {r.id: r.capacity for r in problem.resources}
    for d in problem.demands:
        if d.bounded:
            vid = virtual_edge_id(d.id)
            capacities[vid] = float(d.volume)
            usage[vid] = raw_total[d.id]
            on_link[vid] = [d.id]

    totals = total_allocation(problem, alloc)
    ratio = {k: totals[k] / demand_map[k].weight for k in totals}

    def saturated(rid: str) -> bool:
        c = capacities[rid]
        return usage.get(rid, 0.0) >= c - 1e-6 * max(c, 1e-12)

    for d in problem.demands:
        # A demand with no rate anywhere is bottlenecked only if every one of
        # its paths is blocked by a saturated link; otherwise it could grow.
        starved = raw_total[d.id] <= rate_eps
        for pid in d.paths:
            if not starved and alloc.rate(d.id, pid) <= rate_eps:
                continue
            candidates = list(path_map[pid].resources)
            if d.bounded:
                candidates.append(virtual_edge_id(d.id))
            sat = [rid for rid in candidates if saturated(rid)]
            if not sat:
                return BottleneckCheck(False, (d.id, pid, None, None))
            ok = False
            first_bad: tuple[str, str] | None = None
            for rid in sat:
                sharers = on_link.get(rid, [])
                worst = max((ratio[j] for j in sharers), default=0.0)
                if ratio[d.id] >= worst - tol:
                    ok = True
                    break
                if first_bad is None:
                    bad_j = max(sharers, key=lambda j: ratio[j])
                    first_bad = (rid, bad_j)
            if not ok:
                assert first_bad is not None
                return BottleneckCheck(False, (d.id, pid, *first_bad))
    return BottleneckCheck(True, None)
