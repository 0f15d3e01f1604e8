"""Result envelope shared by every allocator."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Allocation, Problem, total_allocation

__all__ = ["AllocatorReport", "report_to_dict"]


@dataclass
class AllocatorReport:
    allocation: Allocation
    lp_solves: int
    iterations: int
    notes: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return bool(self.notes.get("converged", True))


def _jsonable(value):
    if isinstance(value, dict):
        return {
            "/".join(k) if isinstance(k, tuple) else str(k): _jsonable(v)
            for k, v in value.items()
        }
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    return value


def report_to_dict(problem: Problem, report: AllocatorReport) -> dict:
    """JSON-friendly view: rates nested by demand, utility totals, counters.
    Tuple-keyed note entries become "demand/path" strings; the bulky theta
    trace is omitted (export it with theta_trace_csv instead)."""
    rates: dict[str, dict[str, float]] = {}
    for (k, p), rate in sorted(report.allocation.rates.items()):
        rates.setdefault(k, {})[p] = rate
    return {
        "rates": rates,
        "totals": total_allocation(problem, report.allocation),
        "lp_solves": report.lp_solves,
        "iterations": report.iterations,
        "converged": report.converged,
        "notes": _jsonable(
            {k: v for k, v in report.notes.items() if k != "theta_trace"}
        ),
    }
