import numpy as np
import pytest

from fairalloc.model import Demand, Path, Problem, Resource


@pytest.fixture
def two_link_example() -> Problem:
    """Two links (0.5, 1.0); demand d1 on [e1] and [e2], demand d2 on [e2].

    Max-min fair totals are (3/4, 3/4) via path rates (1/2, 1/4, 3/4).
    """
    return Problem(
        resources=[Resource("e1", 0.5), Resource("e2", 1.0)],
        paths=[Path("p1", ["e1"]), Path("p2", ["e2"]), Path("p3", ["e2"])],
        demands=[Demand("d1", ["p1", "p2"]), Demand("d2", ["p3"])],
    )


def small_grid_instance(seed: int) -> Problem:
    """<= 6 demands, <= 6 edges, <= 3 paths per demand, grid-valued data
    (well-separated max-min levels for oracle-equivalence checks)."""
    rng = np.random.default_rng(seed)
    n_links = int(rng.integers(2, 7))
    links = [f"L{i}" for i in range(n_links)]
    caps = rng.choice([1.0, 1.5, 2.0, 2.5, 3.0], size=n_links)
    resources = [Resource(l, float(c)) for l, c in zip(links, caps)]
    paths, demands = [], []
    for k in range(int(rng.integers(2, 7))):
        pids = []
        for pi in range(int(rng.integers(1, 4))):
            plen = int(rng.integers(1, min(3, n_links) + 1))
            edges = list(rng.choice(links, size=plen, replace=False))
            pid = f"d{k}p{pi}"
            paths.append(Path(pid, edges))
            pids.append(pid)
        w = float(rng.choice([1.0, 2.0]))
        vol = None if rng.random() < 0.6 else float(rng.choice([0.5, 1.0, 2.0]))
        demands.append(Demand(f"d{k}", pids, vol, w))
    return Problem(resources, paths, demands)


def distinct_utility_instance(seed: int) -> Problem:
    """Similar capacities and globally distinct per-path utilities: the
    binner and capped-sequence LPs have unique optima on these, and the
    max-min ratio spread stays small."""
    rng = np.random.default_rng(seed)
    n_links = int(rng.integers(2, 5))
    links = [f"L{i}" for i in range(n_links)]
    resources = [Resource(l, float(rng.uniform(2.0, 2.6))) for l in links]
    paths, demands = [], []
    for k in range(int(rng.integers(3, 7))):
        pids = []
        for pi in range(int(rng.integers(1, 3))):
            plen = int(rng.integers(1, 3))
            edges = list(rng.choice(links, size=min(plen, n_links), replace=False))
            pid = f"d{k}p{pi}"
            paths.append(Path(pid, edges))
            pids.append(pid)
        utility = {pid: float(rng.uniform(0.8, 1.2)) for pid in pids}
        w = float(rng.choice([1.0, 1.5, 2.0]))
        vol = None if rng.random() < 0.7 else float(rng.uniform(0.5, 2.0))
        demands.append(Demand(f"d{k}", pids, vol, w, utility))
    return Problem(resources, paths, demands)


def unit_qr_instance(seed: int, multi: bool = True) -> Problem:
    """q = r = 1 instances for the waterfilling / bottleneck theory checks."""
    rng = np.random.default_rng(seed)
    n_links = int(rng.integers(2, 6))
    links = [f"L{i}" for i in range(n_links)]
    resources = [Resource(l, float(rng.uniform(1.0, 4.0))) for l in links]
    paths, demands = [], []
    for k in range(int(rng.integers(2, 6))):
        pids = []
        for pi in range(int(rng.integers(1, 3)) if multi else 1):
            plen = int(rng.integers(1, min(3, n_links) + 1))
            edges = list(rng.choice(links, size=plen, replace=False))
            pid = f"d{k}p{pi}"
            paths.append(Path(pid, edges))
            pids.append(pid)
        w = float(rng.choice([1.0, 2.0]))
        vol = None if rng.random() < 0.7 else float(rng.uniform(0.5, 2.0))
        demands.append(Demand(f"d{k}", pids, vol, w))
    return Problem(resources, paths, demands)
