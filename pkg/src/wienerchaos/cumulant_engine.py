"""Closed-form joint cumulants of pure chaos vectors, and the Wick-pairing oracle.

The closed form sums, for an ordering ``lambda_1..lambda_k`` of the components
in ``m``, over contraction orders ``r_2..r_{k-1}`` of the left-to-right chain
``f_{lambda_1} ~⊗_{r_2} f_{lambda_2} ... ~⊗_{r_{k-1}} f_{lambda_{k-1}}`` paired
with ``f_{lambda_k}``.

Two conventions are provided for the running-order bound and the binomial
coefficient of the recursive constant:

``"derived"``
    the running order before step ``s`` is
    ``N_{s-1} = q_1 + ... + q_{s-1} - 2 (r_2 + ... + r_{s-1})``; the bound is
    ``r_s <= N_{s-1}`` and the binomial top is ``N_{s-1} - 1``. This matches
    the Gamma recursion and the oracle.
``"printed"``
    the bound ``r_s <= q_1 + q_{s-1} - 2 (r_2 + ... + r_{s-1})`` and the
    binomial top ``q_1 + ... + q_s - 2 (r_2 + ... + r_{s-1}) - 1``. Kept
    only so the disagreement can be reproduced.

The oracle (:func:`moments_via_wick`, :func:`cumulants_from_moments`) shares
nothing with the product formula: it enumerates complete pairings of integral
legs and contracts dense kernels with :func:`numpy.einsum`.
"""
from __future__ import annotations

from collections import Counter
from math import comb, factorial
from typing import Callable, Sequence

import numpy as np

from .chaos_algebra import ChaosVector, covariance_matrix
from .multiindex import check_multi_index, cumulant_from_moments, decompose, orderings
from .tensor_core import SymmetricKernel, contract_sym, inner

__all__ = [
    "WICK_DEGREE_CAP",
    "DegreeCapExceeded",
    "admissible_r_tuples",
    "closed_form_per_ordering",
    "constant_c",
    "cumulant_closed_form",
    "cumulants_from_moments",
    "joint_moment_wick",
    "moments_via_wick",
    "pairing_multigraphs",
]

WICK_DEGREE_CAP = 16

CONVENTIONS = ("derived", "printed")


class DegreeCapExceeded(ValueError):
    """Total number of integral legs is beyond :data:`WICK_DEGREE_CAP`."""


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")


def admissible_r_tuples(q_ordering: Sequence[int],
                        convention: str = "derived") -> list[tuple[int, ...]]:
    """Contraction orders ``(r_2, ..., r_{k-1})`` admitted for an ordering of orders.

    ``q_ordering`` lists ``q_{lambda_1}, ..., q_{lambda_k}`` with ``k >= 3``.
    The tuple must satisfy: ``1 <= r_s <= q_{lambda_s}``; the sum fixes the
    final running order to ``q_{lambda_k}``; every intermediate running order
    stays positive; and ``r_s`` is bounded by the previous running order
    (in the form selected by ``convention``). An empty list means the
    ordering contributes nothing.
    """
    _check_convention(convention)
    q = [int(x) for x in q_ordering]
    k = len(q)
    if k < 3:
        raise ValueError("admissible tuples are defined for |m| >= 3")
    numerator = sum(q[:-1]) - q[-1]
    if numerator < 0 or numerator % 2:
        return []
    target = numerator // 2
    out: list[tuple[int, ...]] = []

    def extend(s: int, prefix: list[int], used: int) -> None:
        # s is the 0-based position of the next factor; prefix holds r_2..r_s
        if s == k - 1:
            if used == target:
                out.append(tuple(prefix))
            return
        running = sum(q[:s]) - 2 * used
        if convention == "derived" or s == 1:
            bound = running
        else:
            bound = q[0] + q[s - 1] - 2 * used
        for r in range(1, min(q[s], bound) + 1):
            if used + r > target:
                break
            # running order after this step must stay positive before the last factor
            if s < k - 2 and sum(q[: s + 1]) - 2 * (used + r) <= 0:
                continue
            extend(s + 1, prefix + [r], used + r)

    extend(1, [], 0)
    return out


def constant_c(q_ordering: Sequence[int], rtuple: Sequence[int],
               convention: str = "derived") -> int:
    """Combinatorial constant for an admissible tuple, in exact integers."""
    _check_convention(convention)
    q = [int(x) for x in q_ordering]
    r = [int(x) for x in rtuple]
    if len(r) > len(q) - 1:
        raise ValueError("r-tuple longer than the ordering allows")
    c = 1
    used = 0
    for step, rs in enumerate(r, start=1):
        qs = q[step]
        if step == 1:
            top = q[0] - 1
        elif convention == "derived":
            top = sum(q[:step]) - 2 * used - 1
        else:
            top = sum(q[: step + 1]) - 2 * used - 1
        c *= qs * factorial(rs - 1) * comb(top, rs - 1) * comb(qs - 1, rs - 1)
        used += rs
    return c


def _chain_inner(kernels: Sequence[SymmetricKernel], rtuple: Sequence[int]) -> float:
    acc = kernels[0]
    for f, r in zip(kernels[1:-1], rtuple):
        if r > acc.order:
            # the printed bound can admit a contraction wider than the running order
            return 0.0
        acc = contract_sym(acc, f, r)
    last = kernels[-1]
    if acc.order != last.order:
        return 0.0
    return inner(acc, last)


def closed_form_per_ordering(F: ChaosVector, m: Sequence[int],
                             convention: str = "derived",
                             constant: Callable[..., int] = constant_c,
                             ) -> dict[tuple[int, ...], float]:
    """Closed-form value for each distinct ordering of the decomposition of ``m``."""
    m = check_multi_index(m, len(F))
    return {path: _closed_form_one(F, path, convention, constant) for path in orderings(m)}


def _closed_form_one(F: ChaosVector, path: tuple[int, ...], convention: str,
                     constant: Callable[..., int]) -> float:
    kernels = [F.kernels[j] for j in path]
    q = [f.order for f in kernels]
    k = len(path)
    total = 0.0
    for rtuple in admissible_r_tuples(q, convention):
        c = constant(q, rtuple, convention)
        total += c * _chain_inner(kernels, rtuple)
    return factorial(q[-1]) * factorial(k - 1) * total


def cumulant_closed_form(F: ChaosVector, m: Sequence[int],
                         path: Sequence[int] | None = None,
                         convention: str = "derived",
                         constant: Callable[..., int] = constant_c) -> float:
    """Joint cumulant of a pure vector from contraction chains.

    ``path`` selects one ordering; otherwise the values of all distinct
    orderings are averaged. For ``|m| = 1`` the mean (zero) and for
    ``|m| = 2`` the covariance entry is returned.
    """
    _check_convention(convention)
    m = check_multi_index(m, len(F))
    labels = decompose(m)
    if path is not None:
        path = tuple(path)
        if sorted(path) != list(labels):
            raise ValueError(f"path {path} does not decompose multi-index {m}")
    F.kernels  # raises for non-pure vectors
    if len(labels) == 1:
        return 0.0
    if len(labels) == 2:
        return float(covariance_matrix(F)[labels[0], labels[1]])
    if path is not None:
        return _closed_form_one(F, path, convention, constant)
    values = closed_form_per_ordering(F, m, convention, constant)
    return sum(values.values()) / len(values)


def pairing_multigraphs(orders: Sequence[int]) -> Counter:
    """Count complete pairings of integral legs by the multigraph they induce.

    Legs of factor ``a`` (``orders[a]`` of them) may only pair with legs of a
    different factor. Enumeration anchors the first unmatched leg; the
    multiplicity of each step is the number of free legs on the partner
    factor, so the counts are exact pairing counts. Keys are tuples of edge
    multiplicities over factor pairs ``(a, b)``, ``a < b``, in lexicographic
    order.
    """
    n = len(orders)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    pair_pos = {pair: i for i, pair in enumerate(pairs)}
    counts: Counter = Counter()
    remaining = list(orders)
    edges = [0] * len(pairs)

    def recurse(weight: int) -> None:
        a = next((i for i, left in enumerate(remaining) if left), None)
        if a is None:
            counts[tuple(edges)] += weight
            return
        remaining[a] -= 1
        for b in range(a + 1, n):
            free = remaining[b]
            if not free:
                continue
            remaining[b] -= 1
            edges[pair_pos[(a, b)]] += 1
            recurse(weight * free)
            edges[pair_pos[(a, b)]] -= 1
            remaining[b] += 1
        remaining[a] += 1

    if sum(orders) % 2 == 0:
        recurse(1)
    return counts


def _multigraph_value(dense: Sequence[np.ndarray], n: int, edges: tuple[int, ...]) -> float:
    labels: list[list[int]] = [[] for _ in range(n)]
    next_label = 0
    pos = 0
    for a in range(n):
        for b in range(a + 1, n):
            for _ in range(edges[pos]):
                labels[a].append(next_label)
                labels[b].append(next_label)
                next_label += 1
            pos += 1
    operands = []
    for arr, lab in zip(dense, labels):
        operands.extend([arr, lab])
    return float(np.einsum(*operands, [], optimize="greedy"))


def joint_moment_wick(kernels: Sequence[SymmetricKernel]) -> float:
    """``E[prod_k I_{q_k}(f_k)]`` by summing over complete leg pairings."""
    kernels = list(kernels)
    if not kernels:
        return 1.0
    orders = [f.order for f in kernels]
    degree = sum(orders)
    if degree > WICK_DEGREE_CAP:
        raise DegreeCapExceeded(f"total degree {degree} exceeds cap {WICK_DEGREE_CAP}")
    if degree % 2:
        return 0.0
    # order-0 factors are constants and carry no legs
    scalar = 1.0
    legged = []
    for f in kernels:
        if f.order == 0:
            scalar *= float(f.values[0])
        else:
            legged.append(f)
    if not legged:
        return scalar
    graphs = pairing_multigraphs([f.order for f in legged])
    dense = [f.to_dense() for f in legged]
    total = 0.0
    for edges in sorted(graphs):
        total += graphs[edges] * _multigraph_value(dense, len(legged), edges)
    return scalar * total


def moments_via_wick(F: ChaosVector, m: Sequence[int]) -> float:
    """``E[F^m]`` for a pure vector via the pairing oracle."""
    m = check_multi_index(m, len(F))
    kernels = F.kernels
    return joint_moment_wick([kernels[j] for j in decompose(m)])


def cumulants_from_moments(F: ChaosVector, m: Sequence[int]) -> float:
    """Ground-truth joint cumulant: set-partition inversion of oracle moments."""
    m = check_multi_index(m, len(F))
    kernels = F.kernels
    degree = sum(kernels[j].order for j in decompose(m))
    if degree > WICK_DEGREE_CAP:
        raise DegreeCapExceeded(f"total degree {degree} exceeds cap {WICK_DEGREE_CAP}")
    return cumulant_from_moments(
        decompose(m), lambda key: joint_moment_wick([kernels[j] for j in key])
    )
