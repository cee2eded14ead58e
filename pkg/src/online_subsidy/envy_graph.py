"""Envy graph of an allocation, local-efficiency test and minimum subsidy.

The arc ``(i, k)`` weighs ``v_i(X_k) - v_i(X_i)``.  An allocation is
envy-freeable iff this graph has no positive-weight cycle, and the minimum
subsidy of agent ``i`` is then the heaviest path weight leaving ``i``
(the empty path counts, so it is never negative).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from online_subsidy.model import Allocation, InputError, PositiveCycleError, SubsidyReport
from online_subsidy.rational import ZERO, format_rational
from online_subsidy.valuations import Valuation


@dataclass(frozen=True)
class EnvyGraph:
    weights: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.weights)

    def w(self, i: int, k: int) -> Fraction:
        return self.weights[i][k]

    def cycle_weight(self, cycle: Sequence[int]) -> Fraction:
        return sum((self.weights[a][b] for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]])), ZERO)

    def to_json(self) -> str:
        return json.dumps([[format_rational(x) for x in row] for row in self.weights])


def value_matrix(valuation: Valuation, allocation: Allocation) -> list[list[Fraction]]:
    """``V[i][k] = v_i(X_k)``."""
    if allocation.n != valuation.n:
        raise InputError(f"allocation has {allocation.n} bundles but the instance has {valuation.n} agents")
    return [[valuation.value(i, allocation.bundles[k]) for k in range(valuation.n)] for i in range(valuation.n)]


def build(valuation: Valuation, allocation: Allocation) -> EnvyGraph:
    V = value_matrix(valuation, allocation)
    n = len(V)
    return EnvyGraph(tuple(tuple(V[i][k] - V[i][i] for k in range(n)) for i in range(n)))


def positive_cycle(graph: EnvyGraph) -> Optional[list[int]]:
    """Return agents ``[c0, c1, ...]`` of a positive cycle, or ``None``.

    Longest-path relaxation from a virtual source joined to every vertex by a
    zero arc; an improvement in round ``n`` proves a positive cycle, which is
    recovered by walking predecessors.
    """
    n = graph.n
    dist = [ZERO] * n
    pred: list[Optional[int]] = [None] * n
    changed = None
    for _ in range(n):
        changed = None
        for u in range(n):
            du = dist[u]
            row = graph.weights[u]
            for v in range(n):
                if u != v and du + row[v] > dist[v]:
                    dist[v] = du + row[v]
                    pred[v] = u
                    changed = v
        if changed is None:
            return None
    x = changed
    for _ in range(n):
        x = pred[x]
    cycle = [x]
    y = pred[x]
    while y != x:
        cycle.append(y)
        y = pred[y]
    cycle.reverse()
    if graph.cycle_weight(cycle) <= 0:
        raise AssertionError("relaxation produced a non-positive cycle")
    return cycle


def cycle_to_witness(n: int, cycle: Sequence[int]) -> tuple[int, ...]:
    """Each agent on the cycle takes the bundle of its successor."""
    witness = list(range(n))
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        witness[a] = b
    return tuple(witness)


def heaviest_paths(graph: EnvyGraph) -> tuple[Fraction, ...]:
    """All-pairs max-plus closure; valid only without positive cycles."""
    n = graph.n
    D = [list(row) for row in graph.weights]
    for i in range(n):
        D[i][i] = ZERO
    for k in range(n):
        Dk = D[k]
        for i in range(n):
            dik = D[i][k]
            Di = D[i]
            for j in range(n):
                if dik + Dk[j] > Di[j]:
                    Di[j] = dik + Dk[j]
    return tuple(max(row) for row in D)


def min_subsidy(graph: EnvyGraph) -> SubsidyReport:
    cycle = positive_cycle(graph)
    if cycle is not None:
        raise PositiveCycleError(cycle)
    return SubsidyReport(heaviest_paths(graph))


def subsidy_report(valuation: Valuation, allocation: Allocation) -> SubsidyReport:
    """Minimum-subsidy report, or a welfare-improving witness if not LE."""
    graph = build(valuation, allocation)
    cycle = positive_cycle(graph)
    if cycle is not None:
        return SubsidyReport(None, cycle_to_witness(graph.n, cycle))
    return SubsidyReport(heaviest_paths(graph))
