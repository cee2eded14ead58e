"""Sequential driver that feeds arriving items to a policy and records a transcript."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from online_subsidy.envy_graph import subsidy_report
from online_subsidy.model import Allocation, InputError, OnlineState, Policy, Step, Transcript
from online_subsidy.valuations import Valuation

BoundFn = Callable[[Valuation, int], Fraction]


class OnlineRun:
    """One play: items are offered one at a time, possibly under a valuation
    that an adaptive adversary extends between arrivals.
    """

    def __init__(self, n: int, policy: Policy, *, name: str = "", proven: bool = True, bound: Optional[BoundFn] = None):
        self.n = n
        self.policy = policy
        self.name = name or getattr(policy, "name", getattr(policy, "__name__", "policy"))
        self.proven = proven
        self.bound = bound
        self.allocation = Allocation.empty(n)
        self.steps: list[Step] = []
        self.valuations: list[Valuation] = []

    def offer(self, valuation: Valuation, item: Optional[int] = None) -> int:
        """Reveal the next item under ``valuation`` and let the policy place it."""
        if valuation.n != self.n:
            raise InputError("valuation agent count changed mid-run")
        item = self.allocation.m if item is None else item
        state = OnlineState(valuation, self.allocation, item)
        agent = self.policy(state, item)
        if not (isinstance(agent, int) and 0 <= agent < self.n):
            raise InputError(f"policy returned invalid agent {agent!r}")
        self.allocation = self.allocation.with_item(agent, item)
        report = subsidy_report(valuation, self.allocation)
        bound = self.bound(valuation, self.allocation.m) if self.bound is not None else None
        self.steps.append(Step(item, state.item_values(), agent, report, bound))
        self.valuations.append(valuation)
        return agent

    @property
    def last_report(self):
        return self.steps[-1].report if self.steps else None

    def transcript(self) -> Transcript:
        return Transcript(self.n, tuple(self.steps), self.name, self.proven)


def run_online(valuation: Valuation, policy: Policy, **kwargs) -> Transcript:
    """Feed the items of a static instance in arrival order."""
    run = OnlineRun(valuation.n, policy, **kwargs)
    for j in range(valuation.m):
        run.offer(valuation, j)
    return run.transcript()
