"""Online allocation policies that keep every prefix locally efficient.

Every policy has the signature ``policy(state, item) -> agent``.  Ties in
any argmax/argmin go to the lowest agent index.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from online_subsidy.engine import run_online
from online_subsidy.model import InputError, OnlineState, Policy, Transcript
from online_subsidy.valuations import RankOne, Valuation


def _argmax(scores: Sequence[Fraction]) -> int:
    best = 0
    for i, s in enumerate(scores):
        if s > scores[best]:
            best = i
    return best


def _argmin(scores: Sequence[Fraction], among: Sequence[int]) -> int:
    best = among[0]
    for i in among:
        if scores[i] < scores[best]:
            best = i
    return best


def max_marginal(state: OnlineState, item: int) -> int:
    """Give the item to the agent whose value rises the most.

    Maximizes welfare online for additive and SPLC valuations.
    """
    return _argmax([state.marginal(i) for i in range(state.n)])


def max_singleton(state: OnlineState, item: int) -> int:
    """Give the item to the agent with the highest value for it alone (k-demand)."""
    return _argmax(state.item_values())


def item_type(state: OnlineState, item: int) -> tuple[Fraction, ...]:
    return tuple(state.singleton(i, item) for i in range(state.n))


def type_round_robin(state: OnlineState, item: int) -> int:
    """The c-th copy of a value vector goes to the agent ranked c-th for it.

    Ranking is by value, highest first, cycling once all agents are served.
    """
    kind = item_type(state, item)
    seen = sum(1 for j in state.allocation.arrived if item_type(state, j) == kind)
    order = sorted(range(state.n), key=lambda i: (-kind[i], i))
    return order[seen % state.n]


def weight_order(valuation: RankOne) -> list[int]:
    """Agents by nonincreasing weight; the ladder runs along this order."""
    return sorted(range(valuation.n), key=lambda i: (-valuation.weights[i], i))


def rank_one_ladder(state: OnlineState, item: int) -> int:
    """Fill the first rung whose base-value sum trails its neighbour by 1 or more.

    With ``q(X)`` the base value of a bundle, and agents ordered by weight,
    if some rung ``p`` has ``q(X_p) >= q(X_{p+1}) + 1`` the item goes to
    rung ``p + 1``; otherwise to the top rung.
    """
    val = state.valuation
    if not isinstance(val, RankOne):
        raise InputError("the ladder policy needs rank-one valuations")
    order = weight_order(val)
    qs = [val.base(state.bundles[a]) for a in order]
    for p in range(len(order) - 1):
        if qs[p] >= qs[p + 1] + 1:
            return order[p + 1]
    return order[0]


def ladder_holds(valuation: RankOne, bundles: Sequence[frozenset[int]]) -> bool:
    """Base-value sums are nonincreasing along the weight order, with at most
    one adjacent gap of 1 or more and that gap at most 2."""
    qs = [valuation.base(bundles[a]) for a in weight_order(valuation)]
    gaps = [a - b for a, b in zip(qs, qs[1:])]
    if any(g < 0 for g in gaps):
        return False
    big = [g for g in gaps if g >= 1]
    return len(big) <= 1 and all(g <= 2 for g in big)


def greedy_min_value(state: OnlineState, item: int) -> int:
    """Among agents who want the item, pick the one whose bundle is worth least to it.

    An item nobody wants goes to agent 0; it changes no bundle value.
    """
    interested = [i for i in range(state.n) if state.singleton(i) > 0]
    if not interested:
        return 0
    own = [state.own_value(i) for i in range(state.n)]
    return _argmin(own, interested)


def min_value(state: OnlineState, item: int) -> int:
    """Give the item to the agent with the least valuable bundle (identical valuations)."""
    own = [state.own_value(i) for i in range(state.n)]
    return _argmin(own, list(range(state.n)))


def always(agent: int) -> Policy:
    """Test subject: hand every item to the same agent."""

    def policy(state: OnlineState, item: int) -> int:
        return agent

    policy.__name__ = f"always-{agent}"
    return policy


class Scripted:
    """Test subject replaying a fixed list of choices, one per arrival."""

    def __init__(self, choices: Sequence[int]):
        self.choices = tuple(choices)
        self.name = "scripted-" + "".join(map(str, self.choices))

    def __call__(self, state: OnlineState, item: int) -> int:
        t = state.allocation.m
        if t >= len(self.choices):
            raise InputError(f"script has no choice for arrival {t}")
        return self.choices[t]


# -- registry ---------------------------------------------------------------

ADDITIVE_TAGS = frozenset({"additive", "splc", "k-valued", "rank-one", "restricted-additive", "binary-additive"})


def _k(valuation: Valuation) -> int:
    return getattr(valuation, "k")


@dataclass(frozen=True)
class PolicyInfo:
    name: str
    choose: Policy
    proven_for: frozenset
    bound: Callable[[Valuation, int], Fraction]

    def proven(self, valuation: Valuation) -> bool:
        return valuation.class_tag in self.proven_for


POLICIES: dict[str, PolicyInfo] = {
    p.name: p
    for p in (
        PolicyInfo("max-marginal", max_marginal, ADDITIVE_TAGS, lambda v, m: Fraction(m * (v.n - 1))),
        PolicyInfo("max-singleton", max_singleton, frozenset({"k-demand"}), lambda v, m: Fraction(_k(v) * (v.n - 1))),
        PolicyInfo("type-round-robin", type_round_robin, frozenset({"k-valued"}), lambda v, m: Fraction(v.n**2 * _k(v) ** v.n)),
        PolicyInfo("rank-one", rank_one_ladder, frozenset({"rank-one"}), lambda v, m: Fraction(v.n * (v.n + 1), 2) - 1),
        PolicyInfo(
            "greedy-min-value",
            greedy_min_value,
            frozenset({"restricted-additive", "binary-additive"}),
            lambda v, m: Fraction(v.n * (v.n - 1), 2),
        ),
        PolicyInfo("min-value", min_value, frozenset({"identical-monotone"}), lambda v, m: Fraction(v.n - 1)),
    )
}


def get_policy(name: str) -> PolicyInfo:
    try:
        return POLICIES[name]
    except KeyError:
        raise InputError(f"unknown policy {name!r}; expected one of {', '.join(POLICIES)}") from None


def run_policy(valuation: Valuation, name: str) -> Transcript:
    """Run a registered policy on a static instance, recording per-step bounds.

    Outside its proven classes the transcript is flagged unproven and carries
    no bound.
    """
    info = get_policy(name)
    proven = info.proven(valuation)
    return run_online(valuation, info.choose, name=info.name, proven=proven, bound=info.bound if proven else None)
