import random
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from online_subsidy import allocators, generators, oracles
from online_subsidy.envy_graph import build, heaviest_paths, positive_cycle, subsidy_report
from online_subsidy.model import Allocation
from online_subsidy.rational import format_rational, parse_rational
from online_subsidy.valuations import from_json

from conftest import every_prefix_le

DELTA = F(1, 2**10)

POLICY_FOR = {
    "additive": "max-marginal",
    "splc": "max-marginal",
    "k-demand": "max-singleton",
    "k-valued": "type-round-robin",
    "rank-one": "rank-one",
    "restricted-additive": "greedy-min-value",
    "binary-additive": "greedy-min-value",
    "identical-monotone": "min-value",
}


@st.composite
def instances(draw, classes=generators.RANDOM_CLASSES, max_n=4, max_m=6):
    tag = draw(st.sampled_from(classes))
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    rng = random.Random(draw(st.integers(0, 2**32)))
    return generators.random_instance(tag, n, m, rng, k=draw(st.integers(1, 3)))


@st.composite
def allocated(draw, le=False):
    v = draw(instances())
    owners = draw(st.lists(st.integers(0, v.n - 1), min_size=v.m, max_size=v.m))
    x = Allocation.from_assignment(v.n, owners)
    if le:
        x = generators.make_locally_efficient(v, x)
    return v, x


def envy_free_with(v, x, p):
    vals = [[v.value(i, x.bundles[k]) for k in range(v.n)] for i in range(v.n)]
    return all(vals[i][i] + p[i] >= vals[i][k] + p[k] for i in range(v.n) for k in range(v.n))


@given(st.fractions(max_denominator=10**6))
def test_rational_roundtrip(x):
    assert parse_rational(format_rational(x)) == x


@settings(max_examples=150, deadline=None)
@given(allocated())
def test_le_iff_no_positive_cycle(case):
    v, x = case
    cycle = positive_cycle(build(v, x))
    assert (cycle is None) == (oracles.brute_force_le(v, x) is None)


@settings(max_examples=150, deadline=None)
@given(allocated())
def test_witness_strictly_improves(case):
    v, x = case
    report = subsidy_report(v, x)
    if not report.locally_efficient:
        assert oracles.welfare(v, x, report.witness) > oracles.welfare(v, x)


@settings(max_examples=150, deadline=None)
@given(allocated(le=True))
def test_minimum_payments(case):
    v, x = case
    report = subsidy_report(v, x)
    p = report.payments
    assert min(p) == 0 and all(q >= 0 for q in p)
    assert envy_free_with(v, x, p)
    assert report.total <= v.m * (v.n - 1)
    for i in range(v.n):
        if p[i] > 0:
            lowered = list(p)
            lowered[i] -= min(DELTA, p[i])
            assert not envy_free_with(v, x, lowered)


@settings(max_examples=150, deadline=None)
@given(allocated(le=True))
def test_floyd_warshall_matches_enumeration(case):
    v, x = case
    g = build(v, x)
    assert heaviest_paths(g) == oracles.brute_force_paths(g)


@settings(max_examples=60, deadline=None)
@given(instances(classes=tuple(POLICY_FOR), max_n=3, max_m=5))
def test_policies_keep_every_prefix_le(v):
    t = allocators.run_policy(v, POLICY_FOR[v.class_tag])
    assert t.proven
    assert every_prefix_le(v, t)
    assert all(s.le and s.slack >= 0 for s in t.steps)


@settings(max_examples=100, deadline=None)
@given(allocated())
def test_json_roundtrip(case):
    v, x = case
    assert Allocation.from_json(x.to_json()) == x
    back = from_json(v.to_json())
    for i in range(v.n):
        assert back.value(i, x.bundles[i]) == v.value(i, x.bundles[i])
