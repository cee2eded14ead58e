"""Seeded random instances for every positive class.

Values are multiples of ``1/1024`` so arithmetic stays small.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from online_subsidy.envy_graph import subsidy_report
from online_subsidy.model import Allocation, InputError
from online_subsidy.valuations import (
    SPLC,
    Additive,
    BudgetAdditive,
    KDemand,
    KValued,
    RankOne,
    RestrictedAdditive,
    Table,
    Valuation,
)

DENOMINATOR = 1024


def rational(rng: random.Random, lo: int = 0, hi: int = DENOMINATOR) -> Fraction:
    """Uniform multiple of ``1/1024`` in ``[lo/1024, hi/1024]``."""
    return Fraction(rng.randint(lo, hi), DENOMINATOR)


def _matrix(rng: random.Random, n: int, m: int) -> list[list[Fraction]]:
    return [[rational(rng) for _ in range(n)] for _ in range(m)]


def random_additive(n: int, m: int, rng: random.Random) -> Additive:
    return Additive(_matrix(rng, n, m), n)


def random_k_demand(n: int, m: int, k: int, rng: random.Random) -> KDemand:
    return KDemand(k, _matrix(rng, n, m), n)


def random_budget_additive(n: int, m: int, rng: random.Random) -> BudgetAdditive:
    budgets = [rational(rng, 1, DENOMINATOR * max(m, 1)) for _ in range(n)]
    return BudgetAdditive(budgets, _matrix(rng, n, m), n)


def random_k_valued(n: int, m: int, k: int, rng: random.Random) -> KValued:
    palettes = []
    for _ in range(n):
        palettes.append(sorted({rational(rng) for _ in range(k)}, reverse=True))
    values = [[rng.choice(palettes[i]) for i in range(n)] for _ in range(m)]
    return KValued(k, palettes, values, n)


def random_rank_one(n: int, m: int, rng: random.Random) -> RankOne:
    return RankOne([rational(rng) for _ in range(n)], [rational(rng) for _ in range(m)])


def random_restricted_additive(n: int, m: int, rng: random.Random, binary: bool = False) -> RestrictedAdditive:
    values = [Fraction(1) if binary else rational(rng, 1) for _ in range(m)]
    interest = [[rng.random() < 0.6 for _ in range(m)] for _ in range(n)]
    return RestrictedAdditive(values, interest, binary=binary)


def random_splc(n: int, m: int, rng: random.Random, n_types: Optional[int] = None) -> SPLC:
    if n_types is None:
        n_types = rng.randint(1, max(1, m // 2))
    item_types = [rng.randrange(n_types) for _ in range(m)]
    segments = []
    for _ in range(n):
        per_agent = []
        for t in range(n_types):
            copies = max(1, item_types.count(t))
            per_agent.append(sorted((rational(rng) for _ in range(copies)), reverse=True))
        segments.append(per_agent)
    return SPLC(item_types, segments)


def random_identical_monotone(n: int, m: int, rng: random.Random) -> Table:
    """A random monotone normalized table with marginals in ``[0, 1]``, shared by all agents.

    Each set's value is drawn between the largest value of its subsets one
    item smaller and the smallest of them plus 1; that window is never empty,
    and all values stay on the ``1/1024`` grid.
    """
    t = [Fraction(0)] * (1 << m)
    for s in sorted(range(1, 1 << m), key=lambda x: bin(x).count("1")):
        below = [t[s & ~(1 << g)] for g in range(m) if s >> g & 1]
        lo, hi = max(below), min(below) + 1
        t[s] = lo + rational(rng, 0, int((hi - lo) * DENOMINATOR))
    return Table(m, [t] * n, identical=True)


def random_instance(tag: str, n: int, m: int, rng: random.Random, k: int = 2) -> Valuation:
    makers = {
        "additive": lambda: random_additive(n, m, rng),
        "splc": lambda: random_splc(n, m, rng),
        "k-demand": lambda: random_k_demand(n, m, k, rng),
        "k-valued": lambda: random_k_valued(n, m, k, rng),
        "rank-one": lambda: random_rank_one(n, m, rng),
        "restricted-additive": lambda: random_restricted_additive(n, m, rng),
        "binary-additive": lambda: random_restricted_additive(n, m, rng, binary=True),
        "identical-monotone": lambda: random_identical_monotone(n, m, rng),
        "budget-additive": lambda: random_budget_additive(n, m, rng),
    }
    if tag not in makers:
        raise InputError(f"no random generator for class {tag!r}; expected one of {', '.join(makers)}")
    return makers[tag]()


RANDOM_CLASSES = (
    "additive",
    "splc",
    "k-demand",
    "k-valued",
    "rank-one",
    "restricted-additive",
    "binary-additive",
    "identical-monotone",
    "budget-additive",
)


def random_allocation(n: int, m: int, rng: random.Random) -> Allocation:
    return Allocation.from_assignment(n, [rng.randrange(n) for _ in range(m)])


def make_locally_efficient(valuation: Valuation, allocation: Allocation) -> Allocation:
    """Apply improving reassignments until none is left.

    Each step strictly raises welfare over finitely many reassignments, so
    this terminates.
    """
    while True:
        report = subsidy_report(valuation, allocation)
        if report.locally_efficient:
            return allocation
        allocation = allocation.permuted(report.witness)
