"""The two exact max-min fair allocators, side by side.

The sequential allocator solves a short series of LPs: maximize a common
floor, detect which demands cannot rise above it (probe LPs), freeze them,
repeat.  The one-shot allocator embeds a Batcher odd-even merge network in
a single LP so the objective can weight the sorted ratios directly:
maximize sum_i epsilon^(i-1) t_i with t the sorted ratio vector.
"""

from fairalloc import (
    Demand,
    Path,
    Problem,
    Resource,
    SolveSession,
    build_sorting_network,
    exact_sequential_max_min,
    one_shot_exact,
    total_allocation,
    write_lp_text,
    build_feasible_alloc,
)

problem = Problem(
    resources=[Resource("e1", 0.5), Resource("e2", 1.0)],
    paths=[Path("p1", ["e1"]), Path("p2", ["e2"]), Path("p3", ["e2"])],
    demands=[Demand("d1", ["p1", "p2"]), Demand("d2", ["p3"])],
)

session = SolveSession()
seq = exact_sequential_max_min(problem, session)
print("sequential totals:", total_allocation(problem, seq.allocation))
print("sequential LP solves:", seq.lp_solves, "freeze rounds:", seq.iterations)

# One LP total, thanks to the sorting network.
shot = one_shot_exact(problem, epsilon=0.05)
print("one-shot totals:  ", total_allocation(problem, shot.allocation))
print("one-shot LP solves:", shot.lp_solves,
      "comparators:", shot.notes["comparators"],
      "sorted ratios:", shot.notes["sorted_ratios"])

# The comparator count grows like n log^2 n.
for n in (2, 4, 8, 16, 32):
    print(f"network width {n:>2}: {len(build_sorting_network(n).comparators)} comparators")

# Weighted fairness: ratios f_k / w_k are equalized, not raw rates.
weighted = Problem(
    resources=[Resource("L", 9.0)],
    paths=[Path("pa", ["L"]), Path("pb", ["L"])],
    demands=[Demand("a", ["pa"], weight=2.0), Demand("b", ["pb"], weight=1.0)],
)
print("weighted totals:", total_allocation(
    weighted, exact_sequential_max_min(weighted).allocation))

# Any LP in the pipeline can be exported in the text interchange format for
# cross-checking against an external solver.
print()
print(write_lp_text(build_feasible_alloc(weighted)))
