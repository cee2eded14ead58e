"""Brute-force ground truth, kept independent of the envy-graph algorithms.

Caps come from the environment so larger checks can be run deliberately:
``ONLINE_SUBSIDY_MAX_AGENTS`` bounds permutation enumeration (default 8),
``ONLINE_SUBSIDY_MAX_PATH_AGENTS`` bounds path enumeration (default 7) and
``ONLINE_SUBSIDY_MAX_ALLOCATIONS`` bounds ``n ** m`` (default 10**6).
"""

from __future__ import annotations

import os
from fractions import Fraction
from itertools import permutations, product
from typing import Optional

from online_subsidy.model import Allocation, CapabilityError, PositiveCycleError
from online_subsidy.rational import ZERO
from online_subsidy.valuations import Valuation


def _cap(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


def max_agents() -> int:
    return _cap("ONLINE_SUBSIDY_MAX_AGENTS", 8)


def max_path_agents() -> int:
    return _cap("ONLINE_SUBSIDY_MAX_PATH_AGENTS", 7)


def max_allocations() -> int:
    return _cap("ONLINE_SUBSIDY_MAX_ALLOCATIONS", 10**6)


def welfare(valuation: Valuation, allocation: Allocation, witness: Optional[tuple[int, ...]] = None) -> Fraction:
    """Social welfare, optionally after agent ``i`` takes bundle ``witness[i]``."""
    n = valuation.n
    if witness is None:
        witness = tuple(range(n))
    return sum((valuation.value(i, allocation.bundles[witness[i]]) for i in range(n)), ZERO)


def brute_force_le(valuation: Valuation, allocation: Allocation) -> Optional[tuple[int, ...]]:
    """Best welfare-improving reassignment of the bundles, or ``None`` if LE.

    Enumerates all ``n!`` reassignments; the returned witness maps each agent
    to the bundle it receives.
    """
    n = valuation.n
    if n > max_agents():
        raise CapabilityError(f"permutation check limited to {max_agents()} agents, got {n}")
    V = [[valuation.value(i, b) for b in allocation.bundles] for i in range(n)]
    base = sum((V[i][i] for i in range(n)), ZERO)
    best, best_gain = None, ZERO
    for perm in permutations(range(n)):
        gain = sum((V[i][perm[i]] for i in range(n)), ZERO) - base
        if gain > best_gain:
            best, best_gain = perm, gain
    return best


def brute_force_paths(weights) -> tuple[Fraction, ...]:
    """Heaviest simple-path weight from every vertex by exhaustive DFS.

    ``weights`` is an n x n matrix (or an object with a ``weights`` field).
    Raises :class:`PositiveCycleError` if some simple cycle has positive weight.
    """
    W = getattr(weights, "weights", weights)
    n = len(W)
    if n > max_path_agents():
        raise CapabilityError(f"path enumeration limited to {max_path_agents()} agents, got {n}")
    best = [ZERO] * n

    def walk(start: int, cur: int, total: Fraction, path: list[int]) -> None:
        if total > best[start]:
            best[start] = total
        for nxt in range(n):
            if nxt == start and len(path) > 1 and total + W[cur][start] > 0:
                raise PositiveCycleError(path)
            if nxt in path:
                continue
            path.append(nxt)
            walk(start, nxt, total + W[cur][nxt], path)
            path.pop()

    for s in range(n):
        walk(s, s, ZERO, [s])
    return tuple(best)


def _check_size(n: int, m: int) -> None:
    if n**m > max_allocations():
        raise CapabilityError(f"{n}**{m} allocations exceed the cap of {max_allocations()}")


def all_allocations(n: int, m: int):
    """Every assignment of items ``0..m-1`` to ``n`` agents, lexicographically."""
    for owners in product(range(n), repeat=m):
        yield Allocation.from_assignment(n, owners)


def brute_force_welfare(valuation: Valuation) -> tuple[Allocation, Fraction]:
    """Lexicographically first welfare-maximizing allocation of all items."""
    n, m = valuation.n, valuation.m
    _check_size(n, m)
    best, best_w = None, None
    for alloc in all_allocations(n, m):
        w = welfare(valuation, alloc)
        if best_w is None or w > best_w:
            best, best_w = alloc, w
    return best, best_w


def brute_force_offline(valuation: Valuation) -> tuple[Allocation, Fraction]:
    """Locally efficient allocation of all items with the least total subsidy."""
    n, m = valuation.n, valuation.m
    _check_size(n, m)
    best, best_total = None, None
    for alloc in all_allocations(n, m):
        if brute_force_le(valuation, alloc) is not None:
            continue
        V = [[valuation.value(i, b) for b in alloc.bundles] for i in range(n)]
        W = [[V[i][k] - V[i][i] for k in range(n)] for i in range(n)]
        total = sum(brute_force_paths(W), ZERO)
        if best_total is None or total < best_total:
            best, best_total = alloc, total
    return best, best_total
