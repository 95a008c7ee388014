"""Multi-index bookkeeping and the set-partition moment/cumulant converter."""
from __future__ import annotations

import itertools
from math import factorial
from typing import Callable, Iterator, Sequence

__all__ = [
    "check_multi_index",
    "cumulant_from_moments",
    "decompose",
    "orderings",
    "parse_multi_index",
    "set_partitions",
]


def check_multi_index(m: Sequence[int], d: int) -> tuple[int, ...]:
    m = tuple(int(k) for k in m)
    if len(m) != d:
        raise ValueError(f"multi-index {m} has length {len(m)}, expected {d}")
    if any(k < 0 for k in m):
        raise ValueError(f"multi-index {m} has negative entries")
    if sum(m) == 0:
        raise ValueError("multi-index must be nonzero")
    return m


def parse_multi_index(text: str) -> tuple[int, ...]:
    """``"2,1"`` -> ``(2, 1)``."""
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ValueError(f"cannot parse multi-index {text!r}") from exc


def decompose(m: Sequence[int]) -> tuple[int, ...]:
    """Component labels of ``m`` in sorted order: ``(2, 1)`` -> ``(0, 0, 1)``."""
    return tuple(i for i, k in enumerate(m) for _ in range(k))


def orderings(m: Sequence[int]) -> list[tuple[int, ...]]:
    """All distinct orderings of the decomposition of ``m``, lexicographically sorted."""
    return sorted(set(itertools.permutations(decompose(m))))


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """Every partition of ``items`` into nonempty blocks (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [[first]] + partition
        for k in range(len(partition)):
            yield partition[:k] + [[first] + partition[k]] + partition[k + 1:]


def cumulant_from_moments(labels: Sequence[int],
                          moment_of: Callable[[tuple[int, ...]], float]) -> float:
    """Joint cumulant of the variables named by ``labels``.

    ``moment_of`` receives a sorted tuple of labels and returns the joint raw
    moment of those variables; each distinct tuple is requested once.
    """
    cache: dict[tuple[int, ...], float] = {}

    def block_moment(block: list[int]) -> float:
        key = tuple(sorted(labels[i] for i in block))
        if key not in cache:
            cache[key] = moment_of(key)
        return cache[key]

    total = 0.0
    for partition in set_partitions(range(len(labels))):
        k = len(partition)
        term = (-1) ** (k - 1) * factorial(k - 1)
        for block in partition:
            term *= block_moment(block)
        total += term
    return total
