"""Shared domain types: allocations, online state, subsidy reports, transcripts."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Iterable, Optional, Sequence

from online_subsidy.rational import format_rational

if TYPE_CHECKING:
    from online_subsidy.valuations import Valuation


class InputError(ValueError):
    """Malformed instance, allocation or parameter."""


class CapabilityError(RuntimeError):
    """A brute-force enumeration would exceed its configured cap."""


class PositiveCycleError(ValueError):
    """The envy graph has a positive-weight cycle, so no subsidy can remove envy."""

    def __init__(self, cycle: Sequence[int]):
        self.cycle = tuple(cycle)
        super().__init__(f"envy graph has a positive cycle through agents {list(self.cycle)}")


Bundle = frozenset
# witness[i] is the index of the bundle agent i receives after reassignment
Permutation = tuple


@dataclass(frozen=True)
class Allocation:
    """A partition of the arrived items into ``n`` bundles.

    ``arrived`` keeps the arrival order; ``bundles[i]`` is agent ``i``'s set.
    """

    bundles: tuple[frozenset[int], ...]
    arrived: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        bundles = tuple(frozenset(b) for b in self.bundles)
        object.__setattr__(self, "bundles", bundles)
        object.__setattr__(self, "arrived", tuple(self.arrived))
        if not bundles:
            raise InputError("an allocation needs at least one agent")
        seen: set[int] = set()
        for b in bundles:
            if seen & b:
                raise InputError(f"bundles overlap on items {sorted(seen & b)}")
            seen |= b
        if len(set(self.arrived)) != len(self.arrived):
            raise InputError("an item arrived twice")
        if seen != set(self.arrived):
            raise InputError("bundles do not cover exactly the arrived items")

    @classmethod
    def empty(cls, n: int) -> Allocation:
        return cls(tuple(frozenset() for _ in range(n)), ())

    @classmethod
    def from_bundles(cls, bundles: Iterable[Iterable[int]]) -> Allocation:
        """Build from bundles alone; arrival order is taken to be ascending item id."""
        bs = tuple(frozenset(b) for b in bundles)
        return cls(bs, tuple(sorted(set().union(*bs))))

    @classmethod
    def from_assignment(cls, n: int, owners: Sequence[int]) -> Allocation:
        """``owners[j]`` is the agent holding item ``j``."""
        bundles: list[set[int]] = [set() for _ in range(n)]
        for item, agent in enumerate(owners):
            if not 0 <= agent < n:
                raise InputError(f"agent {agent} out of range for n={n}")
            bundles[agent].add(item)
        return cls(tuple(frozenset(b) for b in bundles), tuple(range(len(owners))))

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def m(self) -> int:
        return len(self.arrived)

    def owner(self, item: int) -> int:
        for i, b in enumerate(self.bundles):
            if item in b:
                return i
        raise InputError(f"item {item} is not allocated")

    def with_item(self, agent: int, item: int) -> Allocation:
        if not 0 <= agent < self.n:
            raise InputError(f"agent {agent} out of range for n={self.n}")
        if item in self.arrived:
            raise InputError(f"item {item} already allocated")
        bundles = list(self.bundles)
        bundles[agent] = bundles[agent] | {item}
        return Allocation(tuple(bundles), self.arrived + (item,))

    def permuted(self, witness: Sequence[int]) -> Allocation:
        """Agent ``i`` receives bundle ``witness[i]``."""
        return Allocation(tuple(self.bundles[witness[i]] for i in range(self.n)), self.arrived)

    def to_json(self) -> dict:
        return {"bundles": [sorted(b) for b in self.bundles], "arrived": list(self.arrived)}

    @classmethod
    def from_json(cls, data: dict) -> Allocation:
        if "bundles" not in data:
            raise InputError("allocation JSON needs a 'bundles' list")
        if "arrived" in data:
            return cls(tuple(frozenset(b) for b in data["bundles"]), tuple(data["arrived"]))
        return cls.from_bundles(data["bundles"])


@dataclass(frozen=True)
class SubsidyReport:
    """Minimum envy-eliminating subsidy of one allocation.

    When the allocation is locally efficient, ``ell[i]`` is the heaviest
    (possibly empty) path weight from agent ``i`` in the envy graph and the
    payments equal it.  Otherwise ``ell``, ``payments`` and ``total`` are
    ``None`` and ``witness`` holds a welfare-improving reassignment.
    """

    ell: Optional[tuple[Fraction, ...]]
    witness: Optional[Permutation] = None

    @property
    def locally_efficient(self) -> bool:
        return self.witness is None

    @property
    def payments(self) -> Optional[tuple[Fraction, ...]]:
        return self.ell

    @property
    def total(self) -> Optional[Fraction]:
        if self.ell is None:
            return None
        return sum(self.ell, Fraction(0))

    def to_json(self) -> dict:
        out: dict = {"locally_efficient": self.locally_efficient}
        if self.ell is not None:
            out["ell"] = [format_rational(x) for x in self.ell]
            out["payments"] = [format_rational(x) for x in self.ell]
            out["total"] = format_rational(self.total)
        if self.witness is not None:
            out["witness"] = list(self.witness)
        return out


@dataclass(frozen=True)
class OnlineState:
    """What a policy sees when ``item`` arrives.

    Value queries are restricted to bundles of already-arrived items plus the
    arriving one; the number of future items is never exposed.
    """

    valuation: "Valuation"
    allocation: Allocation
    item: int

    @property
    def n(self) -> int:
        return self.allocation.n

    @property
    def bundles(self) -> tuple[frozenset[int], ...]:
        return self.allocation.bundles

    def _check_revealed(self, bundle: Iterable[int]) -> frozenset[int]:
        b = frozenset(bundle)
        visible = set(self.allocation.arrived) | {self.item}
        hidden = b - visible
        if hidden:
            raise InputError(f"items {sorted(hidden)} have not arrived yet")
        return b

    def value(self, agent: int, bundle: Iterable[int]) -> Fraction:
        return self.valuation.value(agent, self._check_revealed(bundle))

    def own_value(self, agent: int) -> Fraction:
        return self.valuation.value(agent, self.bundles[agent])

    def singleton(self, agent: int, item: Optional[int] = None) -> Fraction:
        item = self.item if item is None else item
        return self.value(agent, frozenset((item,)))

    def marginal(self, agent: int) -> Fraction:
        """Gain to ``agent`` from adding the arriving item to its own bundle."""
        return self.valuation.marginal(agent, self.bundles[agent], self.item)

    def item_values(self) -> tuple[Fraction, ...]:
        return tuple(self.singleton(i) for i in range(self.n))


Policy = Callable[[OnlineState, int], int]


@dataclass(frozen=True)
class Step:
    item: int
    values: tuple[Fraction, ...]
    agent: int
    report: SubsidyReport
    bound: Optional[Fraction] = None

    @property
    def le(self) -> bool:
        return self.report.locally_efficient

    @property
    def slack(self) -> Optional[Fraction]:
        if self.bound is None or self.report.total is None:
            return None
        return self.bound - self.report.total

    def to_json(self) -> dict:
        out = {
            "item": self.item,
            "values": [format_rational(v) for v in self.values],
            "agent": self.agent,
            "le": self.le,
            "report": self.report.to_json(),
        }
        if self.bound is not None:
            out["bound"] = format_rational(self.bound)
        if self.slack is not None:
            out["slack"] = format_rational(self.slack)
        return out


@dataclass(frozen=True)
class Transcript:
    """Ordered record of an online run; step ``t`` adds exactly one item."""

    n: int
    steps: tuple[Step, ...] = ()
    policy: str = ""
    proven: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        items = [s.item for s in self.steps]
        if len(set(items)) != len(items):
            raise InputError("transcript allocates an item twice")
        for s in self.steps:
            if not 0 <= s.agent < self.n:
                raise InputError(f"step assigns item {s.item} to unknown agent {s.agent}")

    def __len__(self) -> int:
        return len(self.steps)

    def prefix(self, t: int) -> Transcript:
        return Transcript(self.n, self.steps[:t], self.policy, self.proven)

    def allocation(self, t: Optional[int] = None) -> Allocation:
        alloc = Allocation.empty(self.n)
        for s in self.steps[: len(self.steps) if t is None else t]:
            alloc = alloc.with_item(s.agent, s.item)
        return alloc

    @property
    def final_report(self) -> SubsidyReport:
        if not self.steps:
            return SubsidyReport(tuple(Fraction(0) for _ in range(self.n)))
        return self.steps[-1].report

    @property
    def all_le(self) -> bool:
        return all(s.le for s in self.steps)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"step": t + 1, **s.to_json()}, sort_keys=True) for t, s in enumerate(self.steps)]
        return "\n".join(lines) + ("\n" if lines else "")

