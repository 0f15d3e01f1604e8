"""Batcher odd-even merge sorting networks.

Non-power-of-two widths use the classic padding trick: build the network for
the next power of two over a padded index list and drop comparators touching
pad slots (imagining pads hold +inf, no comparator ever moves them).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

__all__ = ["SortingNetwork", "build_sorting_network", "sorts_all_binary_inputs"]


@dataclass(frozen=True)
class SortingNetwork:
    width: int
    comparators: tuple[tuple[int, int], ...]

    def apply(self, values: list) -> list:
        out = list(values)
        for i, j in self.comparators:
            if out[i] > out[j]:
                out[i], out[j] = out[j], out[i]
        return out


def _merge(indices: list[int | None]):
    if len(indices) == 2:
        yield indices[0], indices[1]
        return
    yield from _merge(indices[0::2])
    yield from _merge(indices[1::2])
    for a, b in zip(indices[1::2], indices[2::2]):
        yield a, b


def _network(indices: list[int | None]):
    if len(indices) < 2:
        return
    mid = len(indices) // 2
    yield from _network(indices[:mid])
    yield from _network(indices[mid:])
    yield from _merge(indices)


def build_sorting_network(n: int) -> SortingNetwork:
    """Odd-even merge network of width n; size O(n log^2 n) comparators."""
    if n < 1:
        raise ValueError("width must be >= 1")
    if n == 1:
        return SortingNetwork(1, ())
    size = 1 << (n - 1).bit_length()
    padded: list[int | None] = list(range(n)) + [None] * (size - n)
    comps = tuple(
        (a, b) for a, b in _network(padded) if a is not None and b is not None
    )
    return SortingNetwork(n, comps)


def sorts_all_binary_inputs(net: SortingNetwork) -> bool:
    """Exhaustive zero-one-principle check; intended for width <= 16."""
    for bits in product((0, 1), repeat=net.width):
        out = net.apply(list(bits))
        if any(out[i] > out[i + 1] for i in range(net.width - 1)):
            return False
    return True
