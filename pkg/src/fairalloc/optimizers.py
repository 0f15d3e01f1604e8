"""Optimization-based max-min fair allocators.

All of them operate on weighted ratios f_k / w_k and share the same
feasible-allocation LP fragment:

* exact sequential: maximize the i-th smallest ratio, freeze, repeat;
* one-shot exact: a single LP that sorts the ratios with a comparator
  network and maximizes a geometrically weighted sum of the sorted outputs;
* capped sequence (SWAN-style) and its per-bin-increment reformulation;
* one-shot geometric binner: per-bin rate variables with geometrically
  decaying objective weights, solved once;
* equi-depth binners: bin boundaries taken from (elastic variant) or fed by
  (multi-bin variant) an adaptive-waterfill estimate.

Ratio objectives carry a deterministic per-demand tie-break factor
(1 + eta * 2^-i, demand order) so that degenerate optima are resolved the
same way across allocators; eta is far below every bin-weight gap, so the
returned point is always an optimum of the unperturbed objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .lp import (
    LinearProgram,
    SolveSession,
    build_feasible_alloc,
    rate_var,
    total_var,
)
from .model import Allocation, Problem, validate_problem
from .report import AllocatorReport
from .sortnet import SortingNetwork, build_sorting_network
from .waterfill import adaptive_waterfill

__all__ = [
    "BinConfig",
    "EquiDepthConfig",
    "AllocationError",
    "exact_sequential_max_min",
    "one_shot_exact",
    "swan_sequence",
    "approx_sequence_bins",
    "geo_binner",
    "compute_equi_boundaries",
    "merge_boundaries",
    "equi_depth_elastic",
    "equi_depth_multibin",
    "achievable_rate_bound",
    "default_num_bins",
    "suggest_bin_config",
    "ratio_var",
]

EPSILON_GUARD = 1e-12  # smallest representable objective level we trust
FREEZE_TOL = 1e-7
TIE_BREAK = 1e-4


class AllocationError(RuntimeError):
    """An allocator could not produce a solution (infeasible or numeric)."""


@dataclass(frozen=True)
class BinConfig:
    """Geometric bin ladder: bin 1 covers [0, u], bin b adds
    u * (alpha^(b-1) - alpha^(b-2)) more headroom."""

    u: float
    alpha: float
    num_bins: int
    epsilon: float

    def __post_init__(self):
        if not self.u > 0:
            raise ValueError("u must be > 0")
        if not self.alpha > 1:
            raise ValueError("alpha must be > 1")
        if self.num_bins < 1:
            raise ValueError("num_bins must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must be in (0, 1)")
        if self.epsilon ** (self.num_bins - 1) < EPSILON_GUARD:
            raise ValueError(
                f"epsilon^(num_bins-1) = {self.epsilon ** (self.num_bins - 1):.3g} "
                f"underflows the double-precision guard {EPSILON_GUARD:g}; "
                "use fewer bins or a larger epsilon"
            )

    def bin_cap(self, b: int) -> float:
        if b == 1:
            return self.u
        return self.u * (self.alpha ** (b - 1) - self.alpha ** (b - 2))


@dataclass(frozen=True)
class EquiDepthConfig:
    num_bins: int
    epsilon: float = 0.25
    slack: Mapping[int, float] | float | None = None  # None = 5% of bin span
    aw_iterations: int = 10

    def __post_init__(self):
        if self.num_bins < 1:
            raise ValueError("num_bins must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must be in (0, 1)")
        if self.aw_iterations < 1:
            raise ValueError("aw_iterations must be >= 1")
        if isinstance(self.slack, Mapping) and any(s < 0 for s in self.slack.values()):
            raise ValueError("slack must be nonnegative")
        if isinstance(self.slack, (int, float)) and self.slack < 0:
            raise ValueError("slack must be nonnegative")


def _require_valid(problem: Problem) -> None:
    violations = validate_problem(problem)
    if violations:
        head = "; ".join(str(v) for v in violations[:3])
        raise ValueError(f"invalid problem ({len(violations)} violations): {head}")


def ratio_var(demand_id: str) -> str:
    return f"rho:{demand_id}"


def _ratio_fragment(problem: Problem, name: str) -> LinearProgram:
    """Feasible-allocation fragment plus one ratio variable per demand tied
    by F_k - w_k * rho_k = 0."""
    lp = build_feasible_alloc(problem, name=name)
    for d in problem.demands:
        lp.add_variable(ratio_var(d.id))
        lp.add_constraint(
            {total_var(d.id): 1.0, ratio_var(d.id): -d.weight},
            "==",
            0.0,
            name=f"ratio:{d.id}",
        )
    return lp


def _tie(index: int, eta: float = TIE_BREAK) -> float:
    # Deterministic preference for earlier demands among otherwise-equal
    # optima; inert (rounds to 1.0) beyond ~50 demands.
    return 1.0 + eta * 2.0 ** (-index)


def _solved(session: SolveSession, lp: LinearProgram):
    sol = session.solve(lp)
    if sol.status != "optimal":
        raise AllocationError(f"LP {lp.name!r} is {sol.status}")
    return sol


def _allocation_from(problem: Problem, values: Mapping[str, float]) -> Allocation:
    rates = {}
    for d in problem.demands:
        for pid in d.paths:
            rates[(d.id, pid)] = max(0.0, values[rate_var(d.id, pid)])
    return Allocation(rates)


# -- exact allocators ----------------------------------------------------------


def exact_sequential_max_min(
    problem: Problem, session: SolveSession | None = None
) -> AllocatorReport:
    """Weighted max-min fairness by the classic LP sequence.

    Round i maximizes a common floor t over all unfrozen ratios; a probe LP
    per unfrozen demand then detects which of them cannot exceed t (those
    freeze at ratio exactly t).  Terminates when every demand is frozen.
    """
    _require_valid(problem)
    session = session or SolveSession()
    demands = [d.id for d in problem.demands]
    frozen: dict[str, float] = {}
    rounds = 0
    last_values: Mapping[str, float] = {}

    while len(frozen) < len(demands):
        rounds += 1
        lp = _ratio_fragment(problem, f"max-min-round-{rounds}")
        lp.add_variable("t")
        for k in demands:
            if k in frozen:
                lp.add_constraint({ratio_var(k): 1.0}, "==", frozen[k], name=f"freeze:{k}")
            else:
                lp.add_constraint({ratio_var(k): 1.0, "t": -1.0}, ">=", 0.0)
        lp.objective = {"t": 1.0}
        sol = _solved(session, lp)
        t_i = sol.values["t"]
        last_values = sol.values

        probes: dict[str, float] = {}
        for k in demands:
            if k in frozen:
                continue
            probe = _ratio_fragment(problem, f"probe-{rounds}-{k}")
            for j in demands:
                if j in frozen:
                    probe.add_constraint({ratio_var(j): 1.0}, "==", frozen[j])
                else:
                    probe.add_constraint({ratio_var(j): 1.0}, ">=", t_i)
            probe.objective = {ratio_var(k): 1.0}
            probes[k] = _solved(session, probe).objective

        newly = [k for k, v in probes.items() if v <= t_i + FREEZE_TOL]
        if not newly:
            # float slop can leave every probe epsilon above t; freeze the
            # tightest demand so the sequence always makes progress
            newly = [min(probes, key=lambda k: (probes[k], k))]
        for k in newly:
            frozen[k] = t_i

    allocation = _allocation_from(problem, last_values)
    return AllocatorReport(
        allocation,
        lp_solves=session.count,
        iterations=rounds,
        notes={
            "allocator": "exact-sequential",
            "frozen_ratios": dict(frozen),
            "converged": True,
        },
    )


def one_shot_exact(
    problem: Problem, epsilon: float, session: SolveSession | None = None
) -> AllocatorReport:
    """Single-LP exact max-min fairness.

    A comparator network sorts the ratio variables inside the LP (each
    comparator contributes lo <= x, lo <= y, hi = x + y - lo); the objective
    sum_i epsilon^(i-1) t_i puts strictly more weight on smaller sorted
    outputs, which both drives every lo to min(x, y) at the optimum and makes
    the sorted vector lexicographically maximal.
    """
    _require_valid(problem)
    n = len(problem.demands)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    if epsilon ** max(n - 1, 0) < EPSILON_GUARD:
        raise ValueError(
            f"epsilon^(n-1) = {epsilon ** (n - 1):.3g} underflows double "
            f"precision for n={n} demands; use the geometric binner instead"
        )
    session = session or SolveSession()

    lp = _ratio_fragment(problem, "one-shot-exact")
    wires: list[str] = [ratio_var(d.id) for d in problem.demands]
    net: SortingNetwork = build_sorting_network(n)
    for ci, (i, j) in enumerate(net.comparators):
        lo, hi = f"lo:{ci}", f"hi:{ci}"
        lp.add_variable(lo)
        lp.add_variable(hi)
        lp.add_constraint({lo: 1.0, wires[i]: -1.0}, "<=", 0.0)
        lp.add_constraint({lo: 1.0, wires[j]: -1.0}, "<=", 0.0)
        lp.add_constraint(
            {hi: 1.0, lo: 1.0, wires[i]: -1.0, wires[j]: -1.0}, "==", 0.0
        )
        wires[i], wires[j] = lo, hi

    objective: dict[str, float] = {}
    for pos, wire in enumerate(wires):
        objective[wire] = objective.get(wire, 0.0) + epsilon**pos
    lp.objective = objective
    sol = _solved(session, lp)

    sorted_out = [sol.values[w] for w in wires]
    ratios = sorted(sol.values[ratio_var(d.id)] for d in problem.demands)
    scale = max(1.0, max(ratios, default=0.0))
    for a, b in zip(sorted_out, sorted_out[1:]):
        if a > b + 1e-6 * scale:
            raise AllocationError("comparator relaxation left outputs unsorted")
    for a, b in zip(sorted_out, ratios):
        if abs(a - b) > 1e-6 * scale:
            raise AllocationError("sorted outputs diverge from ratio multiset")

    return AllocatorReport(
        _allocation_from(problem, sol.values),
        lp_solves=session.count,
        iterations=1,
        notes={
            "allocator": "one-shot-exact",
            "epsilon": epsilon,
            "sorted_ratios": sorted_out,
            "comparators": len(net.comparators),
            "converged": True,
        },
    )


# -- capped sequences and binners ----------------------------------------------


def achievable_rate_bound(problem: Problem) -> float:
    """Cheap upper bound on any total rate: min of the volume-side bound
    max_k d_k * max_p q_k^p and the capacity-side bound max_e c_e * |paths|."""
    volume_side = math.inf
    if all(d.bounded for d in problem.demands):
        volume_side = max(
            d.volume * max(d.utility_on(p) for p in d.paths) for d in problem.demands
        )
    capacity_side = problem.max_capacity() * len(problem.paths)
    return min(volume_side, capacity_side)


def default_num_bins(problem: Problem, u: float, alpha: float) -> int:
    """Enough geometric bins to cover ratios up to the achievable bound."""
    min_w = min(d.weight for d in problem.demands)
    bound = achievable_rate_bound(problem) / min_w
    if bound <= u:
        return 1
    return max(1, math.ceil(math.log(bound / u, alpha))) + 1


def _ratio_objective(
    problem: Problem, weight_of: Mapping[str, float], eta: float = TIE_BREAK
) -> dict[str, float]:
    return {
        ratio_var(d.id): weight_of[d.id] * _tie(i, eta)
        for i, d in enumerate(problem.demands)
    }


def swan_sequence(
    problem: Problem,
    u: float,
    alpha: float,
    max_bins: int | None = None,
    session: SolveSession | None = None,
) -> AllocatorReport:
    """Iterative approximate max-min fairness with geometrically growing
    per-demand rate caps.

    Iteration b maximizes the ratio sum subject to rho_k <= u * alpha^(b-1);
    a demand that ends an iteration strictly below its cap is frozen there
    for all later iterations.  Runs until every demand is frozen or the cap
    ladder covers the achievable range.  One LP per iteration.
    """
    _require_valid(problem)
    if not u > 0:
        raise ValueError("u must be > 0")
    if not alpha > 1:
        raise ValueError("alpha must be > 1")
    session = session or SolveSession()
    ladder = max_bins if max_bins is not None else default_num_bins(problem, u, alpha)

    frozen: dict[str, float] = {}
    prev: dict[str, float] = {}
    iterations = 0
    last_values: Mapping[str, float] = {}

    for b in range(1, ladder + 1):
        iterations = b
        cap = u * alpha ** (b - 1)
        lp = _ratio_fragment(problem, f"capped-seq-{b}")
        for d in problem.demands:
            k = d.id
            if k in frozen:
                lp.add_constraint({ratio_var(k): 1.0}, "==", frozen[k], name=f"freeze:{k}")
            else:
                lp.add_constraint({ratio_var(k): 1.0}, "<=", cap)
                if b > 1:
                    lp.add_constraint({ratio_var(k): 1.0}, ">=", prev[k])
        lp.objective = _ratio_objective(problem, {d.id: 1.0 for d in problem.demands})
        sol = _solved(session, lp)
        last_values = sol.values

        for d in problem.demands:
            k = d.id
            if k in frozen:
                continue
            r = sol.values[ratio_var(k)]
            prev[k] = r
            if r < cap - FREEZE_TOL * max(1.0, cap):
                frozen[k] = r
        if len(frozen) == len(problem.demands):
            break

    return AllocatorReport(
        _allocation_from(problem, last_values),
        lp_solves=session.count,
        iterations=iterations,
        notes={
            "allocator": "swan-sequence",
            "u": u,
            "alpha": alpha,
            "ladder": ladder,
            "converged": True,
        },
    )


def approx_sequence_bins(
    problem: Problem,
    u: float,
    alpha: float,
    max_bins: int | None = None,
    session: SolveSession | None = None,
) -> AllocatorReport:
    """The capped sequence rewritten over per-bin increment variables.

    Iteration b allocates only the increment y_kb <= u * (alpha^(b-1) -
    alpha^(b-2)) on top of the frozen earlier bins, with y_kb forced to 0 for
    demands that did not fill their previous bins.  Totals match
    swan_sequence; the per-bin variables are kept in the report notes.
    """
    _require_valid(problem)
    if not u > 0:
        raise ValueError("u must be > 0")
    if not alpha > 1:
        raise ValueError("alpha must be > 1")
    session = session or SolveSession()
    ladder = max_bins if max_bins is not None else default_num_bins(problem, u, alpha)

    increments: dict[str, list[float]] = {d.id: [] for d in problem.demands}
    frozen: set[str] = set()
    iterations = 0
    last_values: Mapping[str, float] = {}

    for b in range(1, ladder + 1):
        iterations = b
        inc_cap = u if b == 1 else u * (alpha ** (b - 1) - alpha ** (b - 2))
        prev_cap = u * alpha ** (b - 2) if b > 1 else 0.0
        lp = _ratio_fragment(problem, f"bin-seq-{b}")
        weight: dict[str, float] = {}
        for i, d in enumerate(problem.demands):
            k = d.id
            done = sum(increments[k])
            y = f"y:{k}"
            lp.add_variable(y, 0.0, 0.0 if k in frozen else inc_cap)
            lp.add_constraint(
                {ratio_var(k): 1.0, y: -1.0}, "==", done, name=f"cum:{k}"
            )
            weight[y] = _tie(i)
        lp.objective = weight
        sol = _solved(session, lp)
        last_values = sol.values

        for d in problem.demands:
            k = d.id
            got = sol.values[f"y:{k}"]
            increments[k].append(got)
            if k not in frozen and sum(increments[k]) < (
                prev_cap + inc_cap
            ) - FREEZE_TOL * max(1.0, prev_cap + inc_cap):
                frozen.add(k)
        if len(frozen) == len(problem.demands):
            break

    return AllocatorReport(
        _allocation_from(problem, last_values),
        lp_solves=session.count,
        iterations=iterations,
        notes={
            "allocator": "bin-sequence",
            "u": u,
            "alpha": alpha,
            "bin_increments": increments,
            "converged": True,
        },
    )


def _repair_bin_prefix(
    totals: Mapping[str, float], caps: Sequence[float]
) -> dict[str, list[float]]:
    """Restack each demand's per-bin mass into the lowest bins first.

    LP optima are unique in objective value but not in individual bin
    variables; the canonical optimum fills the prefix.  Restacking preserves
    each demand's total, hence feasibility and objective value.
    """
    out: dict[str, list[float]] = {}
    for k, total in totals.items():
        left = max(0.0, total)
        stack = []
        for cap in caps:
            take = min(left, cap)
            stack.append(take)
            left -= take
        if left > 0:  # beyond the ladder: spill into the top bin
            stack[-1] += left
        out[k] = stack
    return out


def geo_binner(
    problem: Problem,
    cfg: BinConfig,
    session: SolveSession | None = None,
) -> AllocatorReport:
    """One-shot geometric binner: a single LP over per-bin ratio variables
    with objective sum_k sum_b epsilon^(b-1) y_kb.

    The decaying weights make every optimum fill a demand's lower bins before
    the higher ones, which reproduces the capped sequence's allocation
    without iterating.
    """
    _require_valid(problem)
    session = session or SolveSession()
    caps = [cfg.bin_cap(b) for b in range(1, cfg.num_bins + 1)]

    lp = _ratio_fragment(problem, "geo-binner")
    objective: dict[str, float] = {}
    for i, d in enumerate(problem.demands):
        k = d.id
        coeffs = {ratio_var(k): -1.0}
        for b in range(1, cfg.num_bins + 1):
            y = f"y:{k}:{b}"
            lp.add_variable(y, 0.0, caps[b - 1])
            coeffs[y] = 1.0
            objective[y] = cfg.epsilon ** (b - 1) * _tie(i)
        lp.add_constraint(coeffs, "==", 0.0, name=f"bins:{k}")
    lp.objective = objective
    sol = _solved(session, lp)

    totals = {
        d.id: sum(sol.values[f"y:{d.id}:{b}"] for b in range(1, cfg.num_bins + 1))
        for d in problem.demands
    }
    bins = _repair_bin_prefix(totals, caps)

    notes = {
        "allocator": "geo-binner",
        "u": cfg.u,
        "alpha": cfg.alpha,
        "epsilon": cfg.epsilon,
        "num_bins": cfg.num_bins,
        "bin_caps": caps,
        "bins": bins,
        "converged": True,
    }
    min_w = min(d.weight for d in problem.demands)
    if cfg.u * cfg.alpha ** (cfg.num_bins - 1) < achievable_rate_bound(problem) / min_w:
        notes["coverage"] = (
            "bin ladder tops out below the achievable ratio bound; "
            "allocations above it are truncated"
        )
    return AllocatorReport(
        _allocation_from(problem, sol.values),
        lp_solves=session.count,
        iterations=1,
        notes=notes,
    )


def suggest_bin_config(
    problem: Problem,
    alpha: float = 2.0,
    u: float | None = None,
    epsilon: float | None = None,
    num_bins: int | None = None,
) -> BinConfig:
    """Fill unspecified binner parameters from the problem.

    u defaults to just under the smallest positive ratio a quick waterfill
    estimate produces; num_bins covers the achievable range from there;
    epsilon defaults to 1e-6 but is lifted to the precision-guard boundary
    when the bin count requires it.
    """
    if u is None:
        est = adaptive_waterfill(problem, max_iterations=1, inner="approx")
        totals: dict[str, float] = {d.id: 0.0 for d in problem.demands}
        for (k, _), r in est.allocation.rates.items():
            totals[k] += r
        dm = problem.demand_map()
        positive = [
            totals[k] / dm[k].weight for k in totals if totals[k] > 1e-12
        ]
        u = 0.9 * min(positive) if positive else 1e-3 * problem.max_capacity()
    if num_bins is None:
        num_bins = default_num_bins(problem, u, alpha)
    if epsilon is None:
        epsilon = 1e-6
        if num_bins > 1:
            floor = (EPSILON_GUARD * 1.01) ** (1.0 / (num_bins - 1))
            epsilon = min(0.5, max(epsilon, floor))
    return BinConfig(u=u, alpha=alpha, num_bins=num_bins, epsilon=epsilon)


# -- equi-depth binners ---------------------------------------------------------


def compute_equi_boundaries(
    aw_rates: Mapping[str, float], num_bins: int
) -> tuple[list[float], list[list[str]]]:
    """Split demands into contiguous equal-size groups by ascending estimated
    rate (ties by demand id); boundary b is the largest rate in group b."""
    if not aw_rates:
        raise ValueError("empty rates map")
    if num_bins < 1:
        raise ValueError("num_bins must be >= 1")
    if num_bins > len(aw_rates):
        raise ValueError(
            f"num_bins={num_bins} exceeds the {len(aw_rates)} demands"
        )
    order = sorted(aw_rates.items(), key=lambda kv: (kv[1], kv[0]))
    size = math.ceil(len(order) / num_bins)
    groups: list[list[str]] = []
    boundaries: list[float] = []
    for start in range(0, len(order), size):
        chunk = order[start : start + size]
        groups.append([k for k, _ in chunk])
        boundaries.append(chunk[-1][1])
    return boundaries, groups


def merge_boundaries(boundaries: Sequence[float], rel_tol: float = 1e-9) -> list[float]:
    """Collapse equal or non-positive boundaries so the result is strictly
    increasing (the degenerate-merge rule for the multi-bin variant)."""
    out: list[float] = []
    for b in boundaries:
        if b <= 0:
            continue
        if out and b <= out[-1] * (1 + rel_tol):
            continue
        out.append(b)
    return out


def equi_depth_elastic(
    problem: Problem,
    cfg: EquiDepthConfig,
    session: SolveSession | None = None,
) -> AllocatorReport:
    """Equi-depth binner with elastic boundaries.

    An adaptive-waterfill run orders the demands; each equal-size group is
    assigned to one bin whose boundary is an LP variable, with the group's
    ratios constrained to l_(b-1) <= rho_k <= l_b + s_b.  The slack absorbs
    estimate inaccuracies.  One LP regardless of bin count.
    """
    _require_valid(problem)
    session = session or SolveSession()

    aw = adaptive_waterfill(problem, max_iterations=cfg.aw_iterations, inner="approx")
    dm = problem.demand_map()
    totals: dict[str, float] = {d.id: 0.0 for d in problem.demands}
    for (k, pid), r in aw.allocation.rates.items():
        totals[k] += dm[k].utility_on(pid) * r
    est_ratio = {k: totals[k] / dm[k].weight for k in totals}

    num_bins = min(cfg.num_bins, len(problem.demands))
    est_bounds, groups = compute_equi_boundaries(est_ratio, num_bins)
    n_groups = len(groups)

    max_ratio = max(est_ratio.values(), default=0.0)
    slack: list[float] = []
    for b, group in enumerate(groups):
        if isinstance(cfg.slack, Mapping):
            slack.append(float(cfg.slack.get(b + 1, 0.0)))
        elif isinstance(cfg.slack, (int, float)) and cfg.slack is not None:
            slack.append(float(cfg.slack))
        else:
            span = est_ratio[group[-1]] - est_ratio[group[0]]
            slack.append(max(0.05 * span, 1e-6 * max(max_ratio, 1e-9)))

    lp = _ratio_fragment(problem, "equi-depth-elastic")
    for b in range(1, n_groups + 1):
        lp.add_variable(f"l:{b}")
    index_of = {d.id: i for i, d in enumerate(problem.demands)}
    objective: dict[str, float] = {}
    for b, group in enumerate(groups, start=1):
        for k in group:
            if b > 1:
                lp.add_constraint({ratio_var(k): 1.0, f"l:{b - 1}": -1.0}, ">=", 0.0)
            if b < n_groups:
                lp.add_constraint(
                    {ratio_var(k): 1.0, f"l:{b}": -1.0}, "<=", slack[b - 1]
                )
            objective[ratio_var(k)] = cfg.epsilon ** (b - 1) * _tie(index_of[k])
    lp.objective = objective
    sol = _solved(session, lp)

    return AllocatorReport(
        _allocation_from(problem, sol.values),
        lp_solves=session.count,
        iterations=1,
        notes={
            "allocator": "equi-depth-elastic",
            "epsilon": cfg.epsilon,
            "groups": groups,
            "estimate_boundaries": est_bounds,
            "solved_boundaries": [
                sol.values[f"l:{b}"] for b in range(1, n_groups + 1)
            ],
            "slack": slack,
            "aw_iterations": aw.iterations,
            "converged": True,
        },
    )


def equi_depth_multibin(
    problem: Problem,
    boundaries: Sequence[float],
    epsilon: float,
    session: SolveSession | None = None,
) -> AllocatorReport:
    """Geometric-binner LP shape with bin caps taken from the supplied
    boundary ladder (l_1, l_2 - l_1, ...) instead of geometric growth."""
    _require_valid(problem)
    if not boundaries:
        raise ValueError("need at least one boundary")
    if any(b <= 0 for b in boundaries) or any(
        b2 <= b1 for b1, b2 in zip(boundaries, boundaries[1:])
    ):
        raise ValueError("boundaries must be strictly increasing and positive")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    if epsilon ** (len(boundaries) - 1) < EPSILON_GUARD:
        raise ValueError("epsilon underflows the double-precision guard")
    session = session or SolveSession()

    caps = [boundaries[0]] + [
        b2 - b1 for b1, b2 in zip(boundaries, boundaries[1:])
    ]
    lp = _ratio_fragment(problem, "equi-depth-multibin")
    objective: dict[str, float] = {}
    for i, d in enumerate(problem.demands):
        k = d.id
        coeffs = {ratio_var(k): -1.0}
        for b, cap in enumerate(caps, start=1):
            y = f"y:{k}:{b}"
            lp.add_variable(y, 0.0, cap)
            coeffs[y] = 1.0
            objective[y] = epsilon ** (b - 1) * _tie(i)
        lp.add_constraint(coeffs, "==", 0.0, name=f"bins:{k}")
    lp.objective = objective
    sol = _solved(session, lp)

    totals = {
        d.id: sum(sol.values[f"y:{d.id}:{b}"] for b in range(1, len(caps) + 1))
        for d in problem.demands
    }
    bins = _repair_bin_prefix(totals, caps)

    return AllocatorReport(
        _allocation_from(problem, sol.values),
        lp_solves=session.count,
        iterations=1,
        notes={
            "allocator": "equi-depth-multibin",
            "epsilon": epsilon,
            "boundaries": list(boundaries),
            "bin_caps": caps,
            "bins": bins,
            "converged": True,
        },
    )
