"""Valuation profiles for all supported classes.

A profile covers every agent at once (rank-one valuations only make sense
as a profile).  Each profile answers ``value(agent, bundle)`` and
``marginal(agent, bundle, item)`` exactly, and ``check()`` returns a
:class:`Violation` describing the first broken class invariant, or ``None``.

Items are ``0 .. m-1`` in arrival order, agents ``0 .. n-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

from online_subsidy.model import InputError
from online_subsidy.rational import ONE, ZERO, format_rational, parse_rational

MAX_TABLE_ITEMS = 12


@dataclass(frozen=True)
class Violation:
    """A broken class invariant.  ``sets`` holds the offending bundles, if any."""

    kind: str
    detail: str
    agent: Optional[int] = None
    sets: tuple[frozenset[int], ...] = ()

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "detail": self.detail,
            "agent": self.agent,
            "sets": [sorted(s) for s in self.sets],
        }


def mask_of(bundle: Iterable[int]) -> int:
    mask = 0
    for j in bundle:
        mask |= 1 << j
    return mask


def set_of(mask: int) -> frozenset[int]:
    return frozenset(j for j in range(mask.bit_length()) if mask >> j & 1)


def _unit(x: Fraction) -> bool:
    return ZERO <= x <= ONE


class Valuation:
    """Base class.  Subclasses implement ``_value`` on validated frozensets."""

    class_tag = "abstract"
    n: int
    m: int

    def value(self, agent: int, bundle: Iterable[int]) -> Fraction:
        b = frozenset(bundle)
        self._check_query(agent, b)
        if not b:
            return ZERO
        return self._value(agent, b)

    def marginal(self, agent: int, bundle: Iterable[int], item: int) -> Fraction:
        b = frozenset(bundle)
        if item in b:
            raise InputError(f"item {item} is already in the bundle")
        return self.value(agent, b | {item}) - self.value(agent, b)

    def singleton(self, agent: int, item: int) -> Fraction:
        return self.value(agent, (item,))

    def _check_query(self, agent: int, bundle: frozenset[int]) -> None:
        if not 0 <= agent < self.n:
            raise InputError(f"unknown agent {agent} (n={self.n})")
        for j in bundle:
            if not (isinstance(j, int) and 0 <= j < self.m):
                raise InputError(f"unknown item {j!r} (m={self.m})")

    def _value(self, agent: int, bundle: frozenset[int]) -> Fraction:
        raise NotImplementedError

    def check(self) -> Optional[Violation]:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"n": self.n, "class": self.class_tag, "params": self._params_json(), "items": self._items_json()}

    def _params_json(self) -> dict:
        return {}

    def _items_json(self) -> list:
        return []


def _as_matrix(values: Sequence[Sequence], n: Optional[int] = None) -> tuple[tuple[Fraction, ...], ...]:
    rows = tuple(tuple(parse_rational(v) for v in row) for row in values)
    width = {len(r) for r in rows}
    if len(width) > 1:
        raise InputError("item value rows have different lengths")
    if n is not None and rows and width != {n}:
        raise InputError(f"each item needs one value per agent (n={n})")
    return rows


class Additive(Valuation):
    """``values[j][i]`` is agent ``i``'s value for item ``j``; bundles sum."""

    class_tag = "additive"

    def __init__(self, values: Sequence[Sequence], n: Optional[int] = None):
        self.values = _as_matrix(values, n)
        if n is None:
            if not self.values:
                raise InputError("n is required when there are no items")
            n = len(self.values[0])
        self.n = n
        self.m = len(self.values)

    def _value(self, agent, bundle):
        return sum((self.values[j][agent] for j in bundle), ZERO)

    def _check_singletons(self) -> Optional[Violation]:
        for j, row in enumerate(self.values):
            for i, v in enumerate(row):
                if not _unit(v):
                    return Violation("range", f"value {format_rational(v)} of item {j} outside [0, 1]", i, (frozenset({j}),))
        return None

    def check(self):
        return self._check_singletons()

    def _items_json(self):
        return [[format_rational(v) for v in row] for row in self.values]

    @classmethod
    def _from_json(cls, n, params, items):
        return cls(items, n)


class KValued(Additive):
    """Additive, with every value of agent ``i`` drawn from ``palettes[i]``."""

    class_tag = "k-valued"

    def __init__(self, k: int, palettes: Sequence[Sequence], values: Sequence[Sequence], n: Optional[int] = None):
        self.k = int(k)
        self.palettes = tuple(tuple(sorted({parse_rational(a) for a in p}, reverse=True)) for p in palettes)
        super().__init__(values, n if n is not None else len(self.palettes))
        if len(self.palettes) != self.n:
            raise InputError("one palette per agent is required")

    def check(self):
        if self.k < 1:
            return Violation("parameter", "k must be positive")
        for i, p in enumerate(self.palettes):
            if len(p) > self.k:
                return Violation("palette", f"agent {i} has {len(p)} distinct palette values, more than k={self.k}", i)
            for a in p:
                if not _unit(a):
                    return Violation("range", f"palette value {format_rational(a)} outside [0, 1]", i)
        for j, row in enumerate(self.values):
            for i, v in enumerate(row):
                if v not in self.palettes[i]:
                    return Violation("palette", f"value {format_rational(v)} of item {j} not in agent {i}'s palette", i, (frozenset({j}),))
        return None

    def _params_json(self):
        return {"k": self.k, "palettes": [[format_rational(a) for a in p] for p in self.palettes]}

    @classmethod
    def _from_json(cls, n, params, items):
        return cls(params["k"], params["palettes"], items, n)


class KDemand(Additive):
    """Bundle value is the sum of its ``k`` largest singleton values."""

    class_tag = "k-demand"

    def __init__(self, k: int, values: Sequence[Sequence], n: Optional[int] = None):
        self.k = int(k)
        super().__init__(values, n)

    def _value(self, agent, bundle):
        top = sorted((self.values[j][agent] for j in bundle), reverse=True)[: self.k]
        return sum(top, ZERO)

    def check(self):
        if self.k < 1:
            return Violation("parameter", "k must be positive")
        return self._check_singletons()

    def _params_json(self):
        return {"k": self.k}

    @classmethod
    def _from_json(cls, n, params, items):
        return cls(params["k"], items, n)


class BudgetAdditive(Additive):
    """Additive value capped at a per-agent budget."""

    class_tag = "budget-additive"

    def __init__(self, budgets: Sequence, values: Sequence[Sequence], n: Optional[int] = None):
        self.budgets = tuple(parse_rational(b) for b in budgets)
        super().__init__(values, n if n is not None else len(self.budgets))
        if len(self.budgets) != self.n:
            raise InputError("one budget per agent is required")

    def _value(self, agent, bundle):
        return min(super()._value(agent, bundle), self.budgets[agent])

    def check(self):
        for i, b in enumerate(self.budgets):
            # budgets may be fixed before the number of items is known
            if b <= 0:
                return Violation("parameter", f"budget {format_rational(b)} must be positive", i)
        return self._check_singletons()

    def _params_json(self):
        return {"budgets": [format_rational(b) for b in self.budgets]}

    @classmethod
    def _from_json(cls, n, params, items):
        return cls(params["budgets"], items, n)


class RankOne(Valuation):
    """``v_i(X) = weights[i] * sum(base_values[j] for j in X)``."""

    class_tag = "rank-one"

    def __init__(self, weights: Sequence, base_values: Sequence):
        self.weights = tuple(parse_rational(w) for w in weights)
        self.base_values = tuple(parse_rational(q) for q in base_values)
        self.n = len(self.weights)
        self.m = len(self.base_values)

    def base(self, bundle: Iterable[int]) -> Fraction:
        return sum((self.base_values[j] for j in bundle), ZERO)

    def _value(self, agent, bundle):
        return self.weights[agent] * self.base(bundle)

    def check(self):
        for i, w in enumerate(self.weights):
            if not _unit(w):
                return Violation("range", f"weight {format_rational(w)} outside [0, 1]", i)
        for j, q in enumerate(self.base_values):
            if not _unit(q):
                return Violation("range", f"base value {format_rational(q)} of item {j} outside [0, 1]", None, (frozenset({j}),))
        return None

    def _params_json(self):
        return {"weights": [format_rational(w) for w in self.weights]}

    def _items_json(self):
        return [format_rational(q) for q in self.base_values]

    @classmethod
    def _from_json(cls, n, params, items):
        v = cls(params["weights"], items)
        if v.n != n:
            raise InputError("weights length does not match n")
        return v


class RestrictedAdditive(Valuation):
    """Additive with ``v_i({g})`` either 0 or the common ``item_values[g]``.

    ``interest[i][g]`` says whether agent ``i`` wants item ``g``.  With
    ``binary=True`` every ``item_values[g]`` must be 1.
    """

    def __init__(self, item_values: Sequence, interest: Sequence[Sequence[bool]], binary: bool = False):
        self.item_values = tuple(parse_rational(u) for u in item_values)
        self.interest = tuple(tuple(bool(x) for x in row) for row in interest)
        self.binary = binary
        self.n = len(self.interest)
        self.m = len(self.item_values)
        if any(len(row) != self.m for row in self.interest):
            raise InputError("interest rows must have one entry per item")

    @classmethod
    def binary_additive(cls, interest: Sequence[Sequence[bool]]) -> RestrictedAdditive:
        m = len(interest[0]) if interest else 0
        return cls([ONE] * m, interest, binary=True)

    @property
    def class_tag(self):
        return "binary-additive" if self.binary else "restricted-additive"

    def _value(self, agent, bundle):
        row = self.interest[agent]
        return sum((self.item_values[j] for j in bundle if row[j]), ZERO)

    def check(self):
        for j, u in enumerate(self.item_values):
            if not _unit(u):
                return Violation("range", f"item value {format_rational(u)} outside [0, 1]", None, (frozenset({j}),))
            if self.binary and u != ONE:
                return Violation("binary", f"binary-additive item {j} has value {format_rational(u)}", None, (frozenset({j}),))
        return None

    def _items_json(self):
        out = []
        for j, u in enumerate(self.item_values):
            rec: dict = {"interested": [i for i in range(self.n) if self.interest[i][j]]}
            if not self.binary:
                rec["u"] = format_rational(u)
            out.append(rec)
        return out

    @classmethod
    def _from_json(cls, n, params, items, binary=False):
        values = [ONE if binary else parse_rational(rec.get("u", 1)) for rec in items]
        interest = [[i in set(rec["interested"]) for rec in items] for i in range(n)]
        return cls(values, interest, binary=binary)


class SPLC(Valuation):
    """Separable piecewise-linear concave valuations.

    ``item_types[j]`` is the type of item ``j``; ``segments[i][t][l]`` is
    agent ``i``'s value for the ``(l+1)``-th copy of type ``t`` it holds.
    """

    class_tag = "splc"

    def __init__(self, item_types: Sequence[int], segments: Sequence[Sequence[Sequence]]):
        self.item_types = tuple(int(t) for t in item_types)
        self.segments = tuple(tuple(tuple(parse_rational(x) for x in seg) for seg in per_agent) for per_agent in segments)
        self.n = len(self.segments)
        self.m = len(self.item_types)
        n_types = {len(s) for s in self.segments}
        if len(n_types) > 1:
            raise InputError("every agent needs segments for the same number of types")
        self.n_types = n_types.pop() if n_types else 0
        for t in self.item_types:
            if not 0 <= t < self.n_types:
                raise InputError(f"item type {t} has no segments")

    def copies(self, t: int) -> int:
        return sum(1 for x in self.item_types if x == t)

    def _value(self, agent, bundle):
        counts: dict[int, int] = {}
        for j in bundle:
            t = self.item_types[j]
            counts[t] = counts.get(t, 0) + 1
        total = ZERO
        for t, c in counts.items():
            seg = self.segments[agent][t]
            if c > len(seg):
                raise InputError(f"agent {agent} has only {len(seg)} segments for type {t}")
            total += sum(seg[:c], ZERO)
        return total

    def check(self):
        for i, per_agent in enumerate(self.segments):
            for t, seg in enumerate(per_agent):
                for a, b in zip(seg, seg[1:]):
                    if b > a:
                        return Violation("concavity", f"agent {i} type {t} segments increase", i)
                if any(not _unit(x) for x in seg):
                    return Violation("range", f"agent {i} type {t} has a segment outside [0, 1]", i)
                if len(seg) < self.copies(t):
                    return Violation("segments", f"agent {i} type {t} has fewer segments than copies", i)
        return None

    def _params_json(self):
        return {"segments": [[[format_rational(x) for x in seg] for seg in per_agent] for per_agent in self.segments]}

    def _items_json(self):
        return list(self.item_types)

    @classmethod
    def _from_json(cls, n, params, items):
        v = cls(items, params["segments"])
        if v.n != n:
            raise InputError("segments length does not match n")
        return v


class Table(Valuation):
    """Explicit per-agent value tables indexed by item bitmask (``m <= 12``).

    Optional flags assert extra structure that ``check`` verifies
    exhaustively: ``submodular``, ``supermodular``, ``binary`` (marginals in
    {0, 1}) and ``identical`` (all agents share one table).
    """

    def __init__(
        self,
        m: int,
        tables: Sequence[Sequence],
        *,
        submodular: bool = False,
        supermodular: bool = False,
        binary: bool = False,
        identical: bool = False,
    ):
        if not 0 <= m <= MAX_TABLE_ITEMS:
            raise InputError(f"table valuations support at most {MAX_TABLE_ITEMS} items")
        self.m = m
        self.tables = tuple(tuple(parse_rational(x) for x in t) for t in tables)
        self.n = len(self.tables)
        for t in self.tables:
            if len(t) != 1 << m:
                raise InputError(f"a table over {m} items needs {1 << m} entries")
        self.submodular = submodular
        self.supermodular = supermodular
        self.binary = binary
        self.identical = identical

    @classmethod
    def from_sets(cls, m: int, entries: Sequence[dict], **flags) -> Table:
        """``entries[i]`` maps bundles (iterables of items) to agent ``i``'s nonzero values."""
        tables = []
        for per_agent in entries:
            t = [ZERO] * (1 << m)
            for bundle, v in per_agent.items():
                t[mask_of(bundle)] = parse_rational(v)
            tables.append(t)
        return cls(m, tables, **flags)

    @classmethod
    def from_valuation(cls, valuation: Valuation, **flags) -> Table:
        """Tabulate any valuation over its (at most 12) items."""
        m = valuation.m
        if m > MAX_TABLE_ITEMS:
            raise InputError(f"cannot tabulate {m} items")
        tables = [[valuation.value(i, set_of(s)) for s in range(1 << m)] for i in range(valuation.n)]
        return cls(m, tables, **flags)

    @property
    def class_tag(self):
        if self.identical:
            return "identical-monotone"
        if self.supermodular:
            return "table-supermodular"
        return "table"

    def value(self, agent, bundle):
        b = frozenset(bundle)
        self._check_query(agent, b)
        return self.tables[agent][mask_of(b)]

    def check(self):
        full = 1 << self.m
        for i, t in enumerate(self.tables):
            if t[0] != ZERO:
                return Violation("normalization", "empty bundle has nonzero value", i, (frozenset(),))
            for s in range(full):
                for g in range(self.m):
                    if s >> g & 1:
                        continue
                    d = t[s | 1 << g] - t[s]
                    if d < 0:
                        return Violation("monotonicity", "adding an item lowers the value", i, (set_of(s), set_of(s | 1 << g)))
                    if d > 1:
                        return Violation("marginal", "a marginal exceeds 1", i, (set_of(s), set_of(s | 1 << g)))
                    if self.binary and d not in (ZERO, ONE):
                        return Violation("binary", "a marginal is neither 0 nor 1", i, (set_of(s), set_of(s | 1 << g)))
            if self.submodular or self.supermodular:
                bad = _curvature_violation(t, self.m, supermodular=self.supermodular)
                if bad is not None:
                    kind = "supermodularity" if self.supermodular else "submodularity"
                    return Violation(kind, "pairwise marginal inequality fails", i, bad)
        if self.identical:
            for i, t in enumerate(self.tables[1:], start=1):
                if t != self.tables[0]:
                    diff = next(s for s in range(full) if t[s] != self.tables[0][s])
                    return Violation("identical", f"agent {i} differs from agent 0", i, (set_of(diff),))
        return None

    def _params_json(self):
        tables = []
        for t in self.tables:
            tables.append([{"set": sorted(set_of(s)), "value": format_rational(v)} for s, v in enumerate(t) if v != 0])
        flags = {f: True for f in ("submodular", "supermodular", "binary", "identical") if getattr(self, f)}
        return {"m": self.m, "tables": tables, **flags}

    def _items_json(self):
        return list(range(self.m))

    @classmethod
    def _from_json(cls, n, params, items, **forced):
        m = params.get("m", len(items))
        entries = [{tuple(e["set"]): e["value"] for e in per_agent} for per_agent in params["tables"]]
        flags = {f: bool(params.get(f, False)) for f in ("submodular", "supermodular", "binary", "identical")}
        flags.update(forced)
        if flags["identical"] and len(entries) == 1:
            entries = entries * n
        v = cls.from_sets(m, entries, **flags)
        if v.n != n:
            raise InputError("number of tables does not match n")
        return v


def _curvature_violation(t: Sequence[Fraction], m: int, supermodular: bool) -> Optional[tuple[frozenset[int], ...]]:
    # v(S+g+h) - v(S+h) against v(S+g) - v(S) for every S and g, h outside S
    for s in range(1 << m):
        free = [g for g in range(m) if not s >> g & 1]
        for g, h in combinations(free, 2):
            sg, sh = s | 1 << g, s | 1 << h
            later = t[sg | 1 << h] - t[sh]
            earlier = t[sg] - t[s]
            if (later < earlier) if supermodular else (later > earlier):
                return (set_of(s), set_of(sg), set_of(sh), set_of(sg | 1 << h))
    return None


class Matroid(Valuation):
    """Matroid-rank valuations given by explicit bases over ``m <= 12`` items."""

    class_tag = "matroid-rank"

    def __init__(self, m: int, bases: Sequence[Sequence[Iterable[int]]]):
        if not 0 <= m <= MAX_TABLE_ITEMS:
            raise InputError(f"matroid valuations support at most {MAX_TABLE_ITEMS} items")
        self.m = m
        self.bases = tuple(tuple(sorted({frozenset(b) for b in per_agent}, key=sorted)) for per_agent in bases)
        self.n = len(self.bases)

    def rank(self, agent: int, bundle: Iterable[int]) -> int:
        b = frozenset(bundle)
        return max((len(b & base) for base in self.bases[agent]), default=0)

    def _value(self, agent, bundle):
        return Fraction(self.rank(agent, bundle))

    def restrict(self, m: int) -> Matroid:
        """The matroid restricted to items ``0 .. m-1``."""
        ground = frozenset(range(m))
        out = []
        for per_agent in self.bases:
            r = max((len(b & ground) for b in per_agent), default=0)
            out.append([b & ground for b in per_agent if len(b & ground) == r])
        return Matroid(m, out)

    def check(self):
        for i, per_agent in enumerate(self.bases):
            if not per_agent:
                return Violation("matroid", "no bases given", i)
            for b in per_agent:
                if any(not 0 <= j < self.m for j in b):
                    return Violation("matroid", "basis uses an unknown item", i, (b,))
            sizes = {len(b) for b in per_agent}
            if len(sizes) > 1:
                small = min(per_agent, key=len)
                large = max(per_agent, key=len)
                return Violation("matroid", "bases differ in size", i, (small, large))
            family = set(per_agent)
            for b1 in per_agent:
                for b2 in per_agent:
                    for x in b1 - b2:
                        if not any((b1 - {x}) | {y} in family for y in b2 - b1):
                            return Violation("basis-exchange", f"no exchange for item {x}", i, (b1, b2))
        return None

    def _params_json(self):
        return {"m": self.m, "bases": [[sorted(b) for b in per_agent] for per_agent in self.bases]}

    def _items_json(self):
        return list(range(self.m))

    @classmethod
    def _from_json(cls, n, params, items):
        v = cls(params.get("m", len(items)), params["bases"])
        if v.n != n:
            raise InputError("number of base families does not match n")
        return v


def matroid_from_table(table: Table, agent: int) -> list[frozenset[int]]:
    """Bases of the matroid whose rank function is ``table``'s agent table.

    Independent sets are those with value equal to their size; the bases are
    the largest of them.  Only meaningful for binary submodular tables.
    """
    t = table.tables[agent]
    indep = [s for s in range(1 << table.m) if t[s] == bin(s).count("1")]
    r = max(bin(s).count("1") for s in indep)
    return [set_of(s) for s in indep if bin(s).count("1") == r]


def validate(valuation: Valuation) -> Optional[Violation]:
    """Check every class invariant of ``valuation``; ``None`` means valid."""
    return valuation.check()


_LOADERS = {
    "additive": Additive._from_json,
    "k-valued": KValued._from_json,
    "k-demand": KDemand._from_json,
    "budget-additive": BudgetAdditive._from_json,
    "rank-one": RankOne._from_json,
    "restricted-additive": RestrictedAdditive._from_json,
    "binary-additive": lambda n, p, it: RestrictedAdditive._from_json(n, p, it, binary=True),
    "splc": SPLC._from_json,
    "table": Table._from_json,
    "table-supermodular": lambda n, p, it: Table._from_json(n, p, it, supermodular=True),
    "identical-monotone": lambda n, p, it: Table._from_json(n, p, it, identical=True),
    "matroid-rank": Matroid._from_json,
}

CLASS_TAGS = tuple(_LOADERS)


def from_json(data: dict) -> Valuation:
    """Load an instance ``{"n", "class", "params", "items"}``."""
    try:
        n = int(data["n"])
        tag = data["class"]
    except KeyError as exc:
        raise InputError(f"instance JSON is missing {exc.args[0]!r}") from None
    if n < 1:
        raise InputError("n must be at least 1")
    if tag not in _LOADERS:
        raise InputError(f"unknown valuation class {tag!r}; expected one of {', '.join(CLASS_TAGS)}")
    try:
        return _LOADERS[tag](n, data.get("params", {}), data.get("items", []))
    except KeyError as exc:
        raise InputError(f"{tag} instance is missing parameter {exc.args[0]!r}") from None
