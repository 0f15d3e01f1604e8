import numpy as np
import pytest

from fairalloc.model import Demand, Path, Problem, Resource, check_feasible, total_allocation
from fairalloc.optimizers import (
    BinConfig,
    EquiDepthConfig,
    approx_sequence_bins,
    compute_equi_boundaries,
    default_num_bins,
    equi_depth_elastic,
    equi_depth_multibin,
    exact_sequential_max_min,
    geo_binner,
    merge_boundaries,
    one_shot_exact,
    suggest_bin_config,
    swan_sequence,
)
from fairalloc.metrics import compare_rates

from conftest import distinct_utility_instance, small_grid_instance


def single_link(capacity, demands):
    paths = [Path(f"p{i}", ["L"]) for i in range(len(demands))]
    dem = [
        Demand(f"d{i}", [f"p{i}"], volume=vol, weight=w)
        for i, (vol, w) in enumerate(demands)
    ]
    return Problem([Resource("L", capacity)], paths, dem)


# -- exact sequential ------------------------------------------------------------


def test_exact_symmetric_split():
    prob = single_link(10.0, [(None, 1.0), (None, 1.0)])
    totals = total_allocation(prob, exact_sequential_max_min(prob).allocation)
    assert totals == pytest.approx({"d0": 5.0, "d1": 5.0})


def test_exact_worked_example(two_link_example):
    totals = total_allocation(
        two_link_example, exact_sequential_max_min(two_link_example).allocation
    )
    assert totals == pytest.approx({"d1": 0.75, "d2": 0.75})


def test_exact_weighted_shares():
    prob = single_link(9.0, [(None, 2.0), (None, 1.0)])
    totals = total_allocation(prob, exact_sequential_max_min(prob).allocation)
    assert totals == pytest.approx({"d0": 6.0, "d1": 3.0})


def test_exact_freezes_volume_limited_demand_first():
    prob = single_link(10.0, [(1.0, 1.0), (None, 1.0)])
    report = exact_sequential_max_min(prob)
    totals = total_allocation(prob, report.allocation)
    assert totals == pytest.approx({"d0": 1.0, "d1": 9.0})
    assert report.iterations == 2
    assert report.notes["frozen_ratios"]["d0"] == pytest.approx(1.0)


def test_exact_rejects_invalid_problem():
    bad = Problem([Resource("L", -1.0)], [Path("p", ["L"])], [Demand("d", ["p"])])
    with pytest.raises(ValueError, match="invalid problem"):
        exact_sequential_max_min(bad)


# -- one-shot exact ----------------------------------------------------------------


def test_one_shot_single_demand_takes_the_link():
    prob = single_link(3.0, [(None, 1.0)])
    rep = one_shot_exact(prob, epsilon=0.05)
    assert rep.lp_solves == 1
    assert rep.notes["sorted_ratios"] == pytest.approx([3.0])


def test_one_shot_worked_example(two_link_example):
    totals = total_allocation(
        two_link_example, one_shot_exact(two_link_example, 0.05).allocation
    )
    assert totals == pytest.approx({"d1": 0.75, "d2": 0.75}, abs=1e-6)


def test_one_shot_matches_oracle_on_random_instance():
    prob = small_grid_instance(12345)
    want = total_allocation(prob, exact_sequential_max_min(prob).allocation)
    got = total_allocation(prob, one_shot_exact(prob, 0.01).allocation)
    for k in want:
        assert got[k] == pytest.approx(want[k], abs=1e-5)


def test_one_shot_precision_guard_advises_binner():
    prob = single_link(3.0, [(None, 1.0)] * 8)
    with pytest.raises(ValueError, match="geometric binner"):
        one_shot_exact(prob, epsilon=0.01)  # 0.01^7 = 1e-14 < 1e-12


def test_one_shot_sorted_outputs_are_sorted(two_link_example):
    rep = one_shot_exact(two_link_example, 0.05)
    t = rep.notes["sorted_ratios"]
    assert all(a <= b + 1e-9 for a, b in zip(t, t[1:]))


# -- capped sequence (SWAN) ---------------------------------------------------------


def test_swan_symmetric_link_resolves_ties_deterministically():
    # Vertex solutions of the per-iteration LPs cannot yield the interior
    # (5, 5) split; the deterministic tie-break hands the slack of the last
    # unfair bin to the earlier demand.  Fairness stays within alpha = 2.
    prob = single_link(10.0, [(None, 1.0), (None, 1.0)])
    rep = swan_sequence(prob, u=1.0, alpha=2.0)
    totals = total_allocation(prob, rep.allocation)
    assert totals == pytest.approx({"d0": 6.0, "d1": 4.0})
    assert rep.iterations == rep.lp_solves
    star = total_allocation(prob, exact_sequential_max_min(prob).allocation)
    for k in totals:
        assert star[k] / 2 - 1e-9 <= totals[k] <= 2 * star[k] + 1e-9


def test_swan_frozen_demand_keeps_rate():
    prob = single_link(10.0, [(0.5, 1.0), (None, 1.0)])
    rep = swan_sequence(prob, u=1.0, alpha=2.0)
    totals = total_allocation(prob, rep.allocation)
    assert totals["d0"] == pytest.approx(0.5)  # frozen at its volume in round 1
    assert totals["d1"] == pytest.approx(9.5)


def test_swan_volume_below_first_cap_freezes_after_round_one():
    prob = single_link(10.0, [(0.5, 1.0)])
    rep = swan_sequence(prob, u=1.0, alpha=2.0)
    assert total_allocation(prob, rep.allocation)["d0"] == pytest.approx(0.5)


def test_swan_close_to_oracle_for_symmetric_case():
    prob = single_link(10.0, [(None, 1.0), (None, 1.0)])
    star = total_allocation(prob, exact_sequential_max_min(prob).allocation)
    got = total_allocation(prob, swan_sequence(prob, 1.0, 2.0).allocation)
    assert sum(got.values()) == pytest.approx(sum(star.values()))


# -- per-bin increment reformulation ---------------------------------------------


def test_bin_increments_respect_caps():
    prob = single_link(10.0, [(None, 1.0), (None, 1.0)])
    u, alpha = 1.0, 2.0
    rep = approx_sequence_bins(prob, u, alpha)
    for ys in rep.notes["bin_increments"].values():
        assert ys[0] <= u + 1e-9
        for b in range(1, len(ys)):
            assert ys[b] <= u * (alpha**b - alpha ** (b - 1)) + 1e-9


def test_bin_increment_totals_match_swan():
    for seed in (0, 3, 7, 11, 19):
        prob = distinct_utility_instance(seed)
        sw = swan_sequence(prob, 0.3, 2.0)
        ab = approx_sequence_bins(prob, 0.3, 2.0)
        ts = total_allocation(prob, sw.allocation)
        tb = total_allocation(prob, ab.allocation)
        for k in ts:
            assert tb[k] == pytest.approx(ts[k], abs=1e-6)
        assert sw.iterations == ab.iterations


def test_frozen_demand_gets_zero_increment():
    prob = single_link(10.0, [(0.5, 1.0), (None, 1.0)])
    rep = approx_sequence_bins(prob, 1.0, 2.0)
    ys = rep.notes["bin_increments"]["d0"]
    assert ys[0] == pytest.approx(0.5)
    assert all(y == pytest.approx(0.0, abs=1e-12) for y in ys[1:])


# -- geometric binner ------------------------------------------------------------


def test_bin_config_validation():
    with pytest.raises(ValueError, match="alpha"):
        BinConfig(1.0, 1.0, 2, 0.1)
    with pytest.raises(ValueError, match="epsilon"):
        BinConfig(1.0, 2.0, 2, 1.5)
    with pytest.raises(ValueError, match="guard"):
        BinConfig(1.0, 2.0, 8, 1e-6)  # 1e-42 underflows
    cfg = BinConfig(1.0, 2.0, 3, 1e-6)  # exactly at the guard boundary
    assert cfg.bin_cap(2) == pytest.approx(1.0)
    assert cfg.bin_cap(3) == pytest.approx(2.0)


def test_single_demand_saturates_first_bin_exactly():
    prob = single_link(1.0, [(None, 1.0)])
    rep = geo_binner(prob, BinConfig(u=1.0, alpha=2.0, num_bins=4, epsilon=0.1))
    bins = rep.notes["bins"]["d0"]
    assert bins[0] == pytest.approx(1.0)
    assert all(b == pytest.approx(0.0, abs=1e-9) for b in bins[1:])


def test_geo_binner_matches_swan_on_worked_example(two_link_example):
    cfg = BinConfig(u=1 / 16, alpha=2.0, num_bins=6, epsilon=0.05)
    gb = geo_binner(two_link_example, cfg)
    sw = swan_sequence(two_link_example, u=1 / 16, alpha=2.0, max_bins=6)
    tg = total_allocation(two_link_example, gb.allocation)
    ts = total_allocation(two_link_example, sw.allocation)
    for k in tg:
        assert tg[k] == pytest.approx(ts[k], abs=1e-6)
    assert gb.lp_solves == 1


def test_geo_binner_bin_prefix_property(two_link_example):
    cfg = BinConfig(u=1 / 16, alpha=2.0, num_bins=6, epsilon=0.05)
    rep = geo_binner(two_link_example, cfg)
    caps = rep.notes["bin_caps"]
    for bins in rep.notes["bins"].values():
        for b in range(1, len(bins)):
            if bins[b] > 1e-9:
                for j in range(b):
                    assert bins[j] >= caps[j] - 1e-9


def test_geo_binner_allocation_is_feasible(two_link_example):
    rep = geo_binner(two_link_example, BinConfig(1 / 16, 2.0, 6, 0.05))
    assert check_feasible(two_link_example, rep.allocation).feasible


def test_suggest_bin_config_covers_range_and_respects_guard():
    prob = single_link(10.0, [(None, 1.0), (None, 1.0)])
    cfg = suggest_bin_config(prob, alpha=2.0)
    assert cfg.u > 0
    assert cfg.epsilon ** (cfg.num_bins - 1) >= 1e-12
    assert cfg.num_bins == default_num_bins(prob, cfg.u, 2.0)


# -- equi-depth binners ------------------------------------------------------------


def test_boundaries_basic_grouping():
    bounds, groups = compute_equi_boundaries(
        {"a": 1.0, "b": 2.0, "c": 3.0, "d": 4.0}, 2
    )
    assert groups == [["a", "b"], ["c", "d"]]
    assert bounds == [2.0, 4.0]


def test_boundaries_all_equal_rates_then_merge():
    bounds, groups = compute_equi_boundaries({"a": 1.0, "b": 1.0, "c": 1.0}, 3)
    assert bounds == [1.0, 1.0, 1.0]
    assert merge_boundaries(bounds) == [1.0]


def test_boundaries_six_demands_three_bins():
    rates = {f"d{i}": float(i) for i in range(6)}
    _, groups = compute_equi_boundaries(rates, 3)
    assert [len(g) for g in groups] == [2, 2, 2]


def test_boundaries_validation():
    with pytest.raises(ValueError, match="empty"):
        compute_equi_boundaries({}, 1)
    with pytest.raises(ValueError, match="exceeds"):
        compute_equi_boundaries({"a": 1.0}, 2)


def test_elastic_single_bin_maximizes_ratio_sum():
    prob = single_link(10.0, [(None, 1.0), (None, 1.0)])
    rep = equi_depth_elastic(prob, EquiDepthConfig(num_bins=1, epsilon=0.25))
    totals = total_allocation(prob, rep.allocation)
    assert sum(totals.values()) == pytest.approx(10.0)
    assert rep.lp_solves == 1


def test_elastic_symmetric_split_is_fair():
    prob = single_link(10.0, [(None, 1.0), (None, 1.0)])
    rep = equi_depth_elastic(prob, EquiDepthConfig(num_bins=2, epsilon=0.25))
    totals = total_allocation(prob, rep.allocation)
    assert totals["d0"] == pytest.approx(5.0, abs=1e-4)
    assert totals["d1"] == pytest.approx(5.0, abs=1e-4)


def test_elastic_is_at_least_as_fair_as_geo_binner_on_worked_example(two_link_example):
    star = total_allocation(
        two_link_example, exact_sequential_max_min(two_link_example).allocation
    )
    eb = equi_depth_elastic(two_link_example, EquiDepthConfig(num_bins=2, epsilon=0.25))
    gb = geo_binner(two_link_example, BinConfig(1 / 16, 2.0, 6, 0.05))
    q_eb = compare_rates(
        two_link_example, total_allocation(two_link_example, eb.allocation), star
    ).fairness_geomean
    q_gb = compare_rates(
        two_link_example, total_allocation(two_link_example, gb.allocation), star
    ).fairness_geomean
    assert q_eb >= q_gb - 1e-9


def test_multibin_with_geometric_boundaries_equals_geo_binner(two_link_example):
    u, alpha, nb = 1 / 16, 2.0, 6
    boundaries = [u * alpha**b for b in range(nb)]
    mb = equi_depth_multibin(two_link_example, boundaries, epsilon=0.05)
    gb = geo_binner(two_link_example, BinConfig(u, alpha, nb, 0.05))
    tm = total_allocation(two_link_example, mb.allocation)
    tg = total_allocation(two_link_example, gb.allocation)
    for k in tm:
        assert tm[k] == pytest.approx(tg[k], abs=1e-9)


def test_multibin_single_boundary_caps_rate():
    prob = single_link(3.0, [(5.0, 1.0)])
    rep = equi_depth_multibin(prob, [3.0], epsilon=0.25)
    assert total_allocation(prob, rep.allocation)["d0"] == pytest.approx(3.0)
    prob2 = single_link(3.0, [(2.0, 1.0)])
    rep2 = equi_depth_multibin(prob2, [3.0], epsilon=0.25)
    assert total_allocation(prob2, rep2.allocation)["d0"] == pytest.approx(2.0)


def test_multibin_rejects_bad_boundaries(two_link_example):
    with pytest.raises(ValueError, match="increasing"):
        equi_depth_multibin(two_link_example, [1.0, 1.0], epsilon=0.25)
    with pytest.raises(ValueError, match="increasing"):
        equi_depth_multibin(two_link_example, [2.0, 1.0], epsilon=0.25)


def test_multibin_bin_prefix_on_random_instance():
    prob = distinct_utility_instance(4)
    rep = equi_depth_multibin(prob, [0.3, 0.6, 1.2], epsilon=0.25)
    caps = rep.notes["bin_caps"]
    for bins in rep.notes["bins"].values():
        for b in range(1, len(bins)):
            if bins[b] > 1e-9:
                for j in range(b):
                    assert bins[j] >= caps[j] - 1e-9


def test_all_optimizer_allocations_are_feasible():
    for seed in (1, 5, 9):
        prob = distinct_utility_instance(seed)
        reports = [
            exact_sequential_max_min(prob),
            swan_sequence(prob, 0.3, 2.0),
            approx_sequence_bins(prob, 0.3, 2.0),
            geo_binner(prob, suggest_bin_config(prob, alpha=2.0)),
            equi_depth_elastic(prob, EquiDepthConfig(num_bins=2)),
        ]
        for rep in reports:
            assert check_feasible(prob, rep.allocation).feasible
