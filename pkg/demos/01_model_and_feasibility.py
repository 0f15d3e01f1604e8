"""Build a tiny capacitated-graph problem and poke at the model layer.

Two links e1 (capacity 0.5) and e2 (capacity 1.0); demand d1 may split over
both links, demand d2 is stuck on e2.  This instance reappears throughout
the demos because its max-min fair allocation is easy to reason about:
both demands end up with a total of 3/4.
"""

from fairalloc import (
    Allocation,
    Demand,
    Path,
    Problem,
    Resource,
    check_feasible,
    expand_virtual_edges,
    problem_to_json,
    total_allocation,
    validate_problem,
)

problem = Problem(
    resources=[Resource("e1", 0.5), Resource("e2", 1.0)],
    paths=[Path("p1", ["e1"]), Path("p2", ["e2"]), Path("p3", ["e2"])],
    demands=[Demand("d1", ["p1", "p2"]), Demand("d2", ["p3"])],
)

print("violations:", validate_problem(problem))  # [] -> well formed

# A valid (in fact max-min fair) allocation: d1 = 1/2 + 1/4, d2 = 3/4.
alloc = Allocation({("d1", "p1"): 0.5, ("d1", "p2"): 0.25, ("d2", "p3"): 0.75})
print("totals:", total_allocation(problem, alloc))

check = check_feasible(problem, alloc)
print("feasible:", check.feasible)
print("capacity slack per link:", check.capacity_slack)  # both links fully used

# Push d2 beyond e2 and watch the slack go negative.
greedy = Allocation({("d1", "p2"): 0.5, ("d2", "p3"): 0.75})
print("overloaded e2 slack:", check_feasible(problem, greedy).capacity_slack["e2"])

# Volume bounds can be materialized as links: a bounded demand gains a
# private virtual edge whose capacity is its requested rate.
bounded = Problem(
    resources=[Resource("e1", 10.0)],
    paths=[Path("p1", ["e1"])],
    demands=[Demand("d1", ["p1"], volume=2.0)],
)
expanded = expand_virtual_edges(bounded)
print("expanded resources:", [r.id for r in expanded.resources])
print("expanded path:", expanded.paths[0].resources)

# Problems serialize to a canonical JSON format (volume null = unbounded).
print(problem_to_json(problem))
