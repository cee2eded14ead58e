from fractions import Fraction as F

import pytest

from online_subsidy import adversaries
from online_subsidy.envy_graph import (
    EnvyGraph,
    build,
    cycle_to_witness,
    heaviest_paths,
    min_subsidy,
    positive_cycle,
    subsidy_report,
)
from online_subsidy.model import Allocation, PositiveCycleError
from online_subsidy.valuations import BudgetAdditive


def single_good(n):
    return adversaries.identical_monotone_hard(n), Allocation.from_assignment(n, [0])


def test_single_good_graph():
    v, x = single_good(3)
    g = build(v, x)
    assert g.w(1, 0) == g.w(2, 0) == 1
    assert g.w(0, 1) == g.w(0, 2) == -1
    assert g.w(1, 2) == g.w(2, 1) == 0
    report = min_subsidy(g)
    assert report.ell == (0, 1, 1) and report.total == 2


def test_empty_allocation():
    v, _ = single_good(3)
    g = build(v, Allocation.empty(3))
    assert all(g.w(i, k) == 0 for i in range(3) for k in range(3))
    assert min_subsidy(g).ell == (0, 0, 0)
    assert positive_cycle(g) is None


def test_table2_pair():
    v = adversaries.additive_table2(2, 2, F(1, 2))
    x = Allocation.from_assignment(2, [0, 0])
    g = build(v, x)
    assert g.w(1, 0) == F(27, 16)
    report = min_subsidy(g)
    assert report.ell == (0, F(27, 16))
    assert report.total >= 2 * 1 - F(1, 2)


def budget_play():
    eps = F(1, 10)
    v = BudgetAdditive([1 - eps, 1], [[1 - eps, 1 - 2 * eps], [1 - eps, F(1, 2)]])
    return v, Allocation.from_assignment(2, [0, 0])


def test_budget_play_has_positive_cycle():
    v, x = budget_play()
    g = build(v, x)
    cycle = positive_cycle(g)
    assert sorted(cycle) == [0, 1]
    assert g.cycle_weight(cycle) == F(1, 10)
    with pytest.raises(PositiveCycleError) as err:
        min_subsidy(g)
    assert sorted(err.value.cycle) == [0, 1]
    report = subsidy_report(v, x)
    assert not report.locally_efficient and report.total is None
    assert report.witness == (1, 0)


def test_cycle_to_witness_follows_arcs():
    # agent i on the cycle takes the bundle of its successor
    assert cycle_to_witness(4, [0, 2, 3]) == (2, 1, 3, 0)


def test_zero_graph():
    g = EnvyGraph(((F(0),) * 3,) * 3)
    assert positive_cycle(g) is None
    assert heaviest_paths(g) == (0, 0, 0)


def test_zero_weight_cycle_is_allowed():
    g = EnvyGraph(((F(0), F(1)), (F(-1), F(0))))
    assert positive_cycle(g) is None
    assert heaviest_paths(g) == (1, 0)
