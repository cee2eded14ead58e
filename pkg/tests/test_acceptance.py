"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.  All comparisons are exact.
"""

import random
import sys
import time
from fractions import Fraction as F

import pytest

from online_subsidy import adversaries, allocators, generators, oracles
from online_subsidy.envy_graph import build, min_subsidy, positive_cycle
from online_subsidy.model import Allocation
from online_subsidy.valuations import KDemand, validate

RESULTS: dict[int, tuple[bool, str]] = {}

TITLES = {
    1: "heaviest-path subsidy matches enumeration",
    2: "no positive cycle iff no improving permutation",
    3: "per-step LE and class bounds for every policy",
    4: "additive lower-bound instance under max-marginal",
    5: "rank-one lower-bound instance under the ladder",
    6: "restricted-additive adversary vs greedy",
    7: "single good under min-value",
    8: "impossibility game trees defeat every branch",
    9: "welfare maximality and the unit-demand separation",
    10: "offline subsidy beats online on the additive instance",
}


def report(number, ok, detail, started, limit):
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < limit
    RESULTS[number] = (ok, f"{detail}; {elapsed:.2f}s (limit {limit}s)")
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {TITLES[number]} [{RESULTS[number][1]}]"
    print(line)
    assert ok, line


def envy_free_with(vals, p):
    n = len(p)
    return all(vals[i][i] + p[i] >= vals[i][k] + p[k] for i in range(n) for k in range(n))


def test_criterion_01_min_subsidy_oracle():
    t0 = time.perf_counter()
    rng = random.Random(101)
    bad = []
    for trial in range(500):
        tag = generators.RANDOM_CLASSES[trial % len(generators.RANDOM_CLASSES)]
        n, m = rng.randint(1, 6), rng.randint(0, 8)
        v = generators.random_instance(tag, n, m, rng)
        x = generators.make_locally_efficient(v, generators.random_allocation(n, m, rng))
        g = build(v, x)
        r = min_subsidy(g)
        vals = [[v.value(i, x.bundles[k]) for k in range(n)] for i in range(n)]
        if not (
            r.ell == oracles.brute_force_paths(g)
            and envy_free_with(vals, r.payments)
            and 0 in r.ell
            and r.total <= m * (n - 1)
        ):
            bad.append(trial)
    report(1, not bad, f"500 allocations, {len(bad)} mismatches", t0, 10)


def test_criterion_02_cycle_equivalence():
    t0 = time.perf_counter()
    rng = random.Random(202)
    bad, le_count = [], 0
    for trial in range(500):
        tag = generators.RANDOM_CLASSES[trial % len(generators.RANDOM_CLASSES)]
        n, m = rng.randint(1, 6), rng.randint(0, 8)
        v = generators.random_instance(tag, n, m, rng)
        x = generators.random_allocation(n, m, rng)
        if trial % 2:
            x = generators.make_locally_efficient(v, x)
        acyclic = positive_cycle(build(v, x)) is None
        le_count += acyclic
        if acyclic != (oracles.brute_force_le(v, x) is None):
            bad.append(trial)
    report(2, not bad, f"500 allocations ({le_count} LE), {len(bad)} disagreements", t0, 10)


POLICY_CLASSES = {
    "max-marginal": ("additive", "splc"),
    "max-singleton": ("k-demand",),
    "type-round-robin": ("k-valued",),
    "rank-one": ("rank-one",),
    "greedy-min-value": ("restricted-additive", "binary-additive"),
    "min-value": ("identical-monotone",),
}


def test_criterion_03_per_step_le_and_bounds():
    t0 = time.perf_counter()
    rng = random.Random(303)
    failures = []
    for name, classes in POLICY_CLASSES.items():
        info = allocators.get_policy(name)
        for trial in range(200):
            tag = classes[trial % len(classes)]
            n, m = rng.randint(1, 4), rng.randint(0, 10)
            v = generators.random_instance(tag, n, m, rng, k=rng.randint(1, 3))
            t = allocators.run_policy(v, name)
            for step in range(len(t) + 1):
                x = t.allocation(step)
                if oracles.brute_force_le(v, x) is not None:
                    failures.append((name, trial, step, "not LE"))
                    break
                total = t.steps[step - 1].report.total if step else F(0)
                if total > info.bound(v, step):
                    failures.append((name, trial, step, "over bound"))
                    break
    report(3, not failures, f"6 policies x 200 instances, failures {failures[:3]}", t0, 60)


def test_criterion_04_additive_tightness():
    t0 = time.perf_counter()
    v = adversaries.additive_table2(4, 6, F(1, 2))
    t = allocators.run_policy(v, "max-marginal")
    total = t.final_report.total
    ok = all(s.agent == 0 for s in t.steps) and F(35, 2) <= total <= 18
    report(4, ok, f"all to agent 0: {ok}, S = {total}", t0, 1)


def test_criterion_05_rank_one_tightness():
    t0 = time.perf_counter()
    notes, ok = [], True
    for n in (2, 3, 4):
        eps = F(1, 10 * n * n)
        v = adversaries.rank_one_hard(n, eps)
        t = allocators.run_policy(v, "rank-one")
        lower, upper = sum(range(2, n + 1)) - 2 * n * n * eps, F(n * (n + 1), 2) - 1
        total = t.final_report.total
        ladder = all(allocators.ladder_holds(v, t.allocation(k).bundles) for k in range(len(t) + 1))
        in_range = total is not None and lower <= total <= upper
        ok = ok and in_range and ladder
        shown = "undefined" if total is None else f"{float(total):.4f}"
        notes.append(f"n={n}: S={shown} vs [{float(lower):.4f}, {upper}], ladder {'ok' if ladder else 'broken'}")
    report(5, ok, "; ".join(notes), t0, 1)


def test_criterion_06_restricted_sandwich():
    t0 = time.perf_counter()
    notes, ok = [], True
    for n, expected in ((3, 3), (4, 6), (5, 10)):
        out = adversaries.restricted_additive_adversary(allocators.greedy_min_value, n)
        ok = ok and out.case == "3" and out.report.total == expected
        notes.append(f"n={n}: case {out.case}, S={out.report.total}")
    report(6, ok, "; ".join(notes), t0, 5)


def test_criterion_07_single_good():
    t0 = time.perf_counter()
    totals = {}
    for n in range(2, 7):
        t = allocators.run_policy(adversaries.identical_monotone_hard(n), "min-value")
        totals[n] = t.final_report.total
    ok = all(totals[n] == n - 1 for n in totals)
    report(7, ok, ", ".join(f"n={n}: S={s}" for n, s in totals.items()), t0, 1)


def test_criterion_08_impossibility_trees():
    t0 = time.perf_counter()
    notes, ok = [], True
    for name, (fn, depth) in adversaries.IMPOSSIBILITY_ADVERSARIES.items():
        results = adversaries.exhaustive(fn, depth)
        won = 0
        for _, out in results:
            improves = out.defeated and oracles.welfare(out.valuation, out.transcript.allocation(), out.witness) > oracles.welfare(
                out.valuation, out.transcript.allocation()
            )
            valid = all(validate(v) is None for v in out.valuations)
            won += improves and valid and len(out.transcript) <= depth
        ok = ok and won == len(results)
        notes.append(f"{name}: {won}/{len(results)}")
    report(8, ok, "; ".join(notes), t0, 5)


def test_criterion_09_welfare():
    t0 = time.perf_counter()
    rng = random.Random(909)
    misses = 0
    for _ in range(100):
        v = generators.random_splc(rng.randint(1, 3), rng.randint(0, 7), rng)
        t = allocators.run_policy(v, "max-marginal")
        misses += oracles.welfare(v, t.allocation()) != oracles.brute_force_welfare(v)[1]
    for _ in range(100):
        v = generators.random_restricted_additive(rng.randint(1, 3), rng.randint(0, 7), rng)
        t = allocators.run_policy(v, "greedy-min-value")
        misses += oracles.welfare(v, t.allocation()) != oracles.brute_force_welfare(v)[1]
    unit = KDemand(1, [[F(3, 4), F(1, 2)], [F(1), F(1, 4)]], 2)
    online = oracles.welfare(unit, allocators.run_policy(unit, "max-singleton").allocation())
    best = oracles.brute_force_welfare(unit)[1]
    ok = misses == 0 and online == 1 and best == F(3, 2)
    report(9, ok, f"{misses} welfare mismatches in 200; unit demand {online} vs optimum {best}", t0, 30)


def test_criterion_10_offline_gap():
    t0 = time.perf_counter()
    notes, ok = [], True
    for m in (2, 3):
        v = adversaries.additive_table2(2, m, F(1, 2))
        online = allocators.run_policy(v, "max-marginal").final_report.total
        offline = oracles.brute_force_offline(v)[1]
        ok = ok and offline < online
        notes.append(f"m={m}: offline {offline} < online {online}")
    report(10, ok, "; ".join(notes), t0, 5)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
