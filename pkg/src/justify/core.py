"""Domain vocabulary shared by every other module.

Alternatives are plain strings. Menus are frozensets of alternatives and are
always rendered in sorted token order, so two datasets that list the same
menus in a different order serialize identically.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType
from typing import Any

Menu = frozenset
Pair = tuple[str, str]

CONSTRAINT_KINDS = (
    "exclusion",
    "exclusion-from-below",
    "revealed-exclusion",
    "replacement-derived",
)


class DatasetError(ValueError):
    """Raised when raw input cannot be turned into a valid dataset."""

    def __init__(self, defects: list[Defect]):
        self.defects = defects
        super().__init__("; ".join(str(d) for d in defects) or "invalid dataset")


class NotChoiceFunctionError(ValueError):
    """Raised by routines that need a single chosen item per menu."""


def menu(items: Iterable[str]) -> frozenset[str]:
    return frozenset(items)


def sorted_menu(items: Iterable[str]) -> list[str]:
    return sorted(items)


def menu_key(items: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(items))


def menu_sort_key(items: Iterable[str]) -> tuple[int, tuple[str, ...]]:
    """Order menus by size, then lexicographically."""
    t = menu_key(items)
    return (len(t), t)


def all_menus(domain: Iterable[str], min_size: int = 2) -> list[frozenset[str]]:
    items = sorted(domain)
    out = []
    for k in range(min_size, len(items) + 1):
        out.extend(frozenset(c) for c in combinations(items, k))
    return out


# ----------------------------------------------------------------- orders


@dataclass(frozen=True)
class WeakOrder:
    """A complete, transitive ranking given as tiers; earlier tiers are better."""

    tiers: tuple[frozenset[str], ...]
    _rank: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        tiers = tuple(frozenset(t) for t in self.tiers)
        rank: dict[str, int] = {}
        for i, tier in enumerate(tiers):
            if not tier:
                raise ValueError("weak order has an empty tier")
            for x in tier:
                if x in rank:
                    raise ValueError(f"item {x!r} appears in two tiers")
                rank[x] = i
        object.__setattr__(self, "tiers", tiers)
        object.__setattr__(self, "_rank", MappingProxyType(rank))

    @classmethod
    def from_ranking(cls, ranking: Iterable[str]) -> WeakOrder:
        return cls(tuple(frozenset([x]) for x in ranking))

    @classmethod
    def parse(cls, text: str) -> WeakOrder:
        """Parse ``"a>b=c>d"`` (``=`` joins indifferent items)."""
        tiers = []
        for chunk in text.split(">"):
            names = [s.strip() for s in chunk.split("=") if s.strip()]
            if not names:
                raise ValueError(f"cannot parse preference {text!r}")
            tiers.append(frozenset(names))
        return cls(tuple(tiers))

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._rank)

    def rank(self, x: str) -> int:
        return self._rank[x]

    def weakly_prefers(self, x: str, y: str) -> bool:
        return self._rank[x] <= self._rank[y]

    def prefers(self, x: str, y: str) -> bool:
        return self._rank[x] < self._rank[y]

    def indifferent(self, x: str, y: str) -> bool:
        return self._rank[x] == self._rank[y]

    def weakly_above_all(self, x: str, items: Iterable[str]) -> bool:
        """``x ≿ S`` in the set convention: x is weakly better than each item."""
        return all(self.weakly_prefers(x, y) for y in items)

    def best(self, items: Iterable[str]) -> frozenset[str]:
        items = list(items)
        if not items:
            return frozenset()
        top = min(self._rank[x] for x in items)
        return frozenset(x for x in items if self._rank[x] == top)

    def is_strict(self) -> bool:
        return all(len(t) == 1 for t in self.tiers)

    def to_total(self) -> TotalOrder:
        if not self.is_strict():
            raise ValueError("weak order has ties")
        return TotalOrder(tuple(next(iter(t)) for t in self.tiers))

    def to_json(self) -> list[list[str]]:
        return [sorted(t) for t in self.tiers]

    def __str__(self) -> str:
        return ">".join("=".join(sorted(t)) for t in self.tiers)


@dataclass(frozen=True)
class TotalOrder:
    """A strict ranking of the whole domain, best first."""

    ranking: tuple[str, ...]
    _rank: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ranking = tuple(self.ranking)
        rank = {x: i for i, x in enumerate(ranking)}
        if len(rank) != len(ranking):
            raise ValueError("total order lists an item twice")
        object.__setattr__(self, "ranking", ranking)
        object.__setattr__(self, "_rank", MappingProxyType(rank))

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self.ranking)

    def rank(self, x: str) -> int:
        return self._rank[x]

    def prefers(self, x: str, y: str) -> bool:
        return self._rank[x] < self._rank[y]

    def weakly_prefers(self, x: str, y: str) -> bool:
        return self._rank[x] <= self._rank[y]

    def top(self, items: Iterable[str]) -> str:
        return min(items, key=self._rank.__getitem__)

    def restrict(self, items: Iterable[str]) -> tuple[str, ...]:
        keep = set(items)
        return tuple(x for x in self.ranking if x in keep)

    def as_weak(self) -> WeakOrder:
        return WeakOrder.from_ranking(self.ranking)

    def to_json(self) -> list[str]:
        return list(self.ranking)

    def __str__(self) -> str:
        return ">".join(self.ranking)


# ------------------------------------------------------------- relations


def transitive_closure(pairs: Iterable[Pair]) -> frozenset[Pair]:
    """Smallest transitive relation containing ``pairs``.

    Cycles show up as reflexive pairs ``(x, x)`` in the result.
    """
    succ: dict[str, set[str]] = {}
    for x, y in pairs:
        succ.setdefault(x, set()).add(y)
    out = set()
    for start in succ:
        seen: set[str] = set()
        stack = list(succ[start])
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            stack.extend(succ.get(y, ()))
        out.update((start, y) for y in seen)
    return frozenset(out)


def is_acyclic(pairs: Iterable[Pair]) -> bool:
    return not any(x == y for x, y in transitive_closure(pairs))


def find_cycle(pairs: Iterable[Pair]) -> list[str] | None:
    """Return one directed cycle ``[x1, ..., xk, x1]`` or None."""
    succ: dict[str, list[str]] = {}
    for x, y in sorted(set(pairs)):
        succ.setdefault(x, []).append(y)
    color: dict[str, int] = {}
    parent: dict[str, str] = {}

    for root in sorted(succ):
        if color.get(root):
            continue
        stack: list[tuple[str, Iterator[str]]] = [(root, iter(succ.get(root, [])))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                continue
            state = color.get(nxt, 0)
            if state == 0:
                color[nxt] = 1
                parent[nxt] = node
                stack.append((nxt, iter(succ.get(nxt, []))))
            elif state == 1:
                cycle = [nxt]
                cur = node
                while cur != nxt:
                    cycle.append(cur)
                    cur = parent[cur]
                cycle.append(nxt)
                cycle.reverse()
                return cycle
    return None


def is_extension(order: TotalOrder | WeakOrder, pairs: Iterable[Pair]) -> bool:
    """True iff every ``(x, y)`` in ``pairs`` has x strictly above y."""
    return all(order.prefers(x, y) for x, y in pairs)


def linear_extension(domain: Iterable[str], pairs: Iterable[Pair]) -> TotalOrder | None:
    """Topological sort of ``pairs`` over ``domain``; ties broken by token order.

    Returns None when the relation has a cycle.
    """
    items = sorted(domain)
    below: dict[str, set[str]] = {x: set() for x in items}
    indeg = {x: 0 for x in items}
    for x, y in set(pairs):
        if x == y:
            return None
        if y not in below[x]:
            below[x].add(y)
            indeg[y] += 1
    ready = sorted(x for x in items if indeg[x] == 0)
    out: list[str] = []
    while ready:
        x = ready.pop(0)
        out.append(x)
        for y in sorted(below[x]):
            indeg[y] -= 1
            if indeg[y] == 0:
                ready.append(y)
        ready.sort()
    if len(out) != len(items):
        return None
    return TotalOrder(tuple(out))


@dataclass(frozen=True)
class DominanceRelation:
    """Exogenous strict dominance; stored transitively closed."""

    pairs: frozenset[Pair] = frozenset()

    def __post_init__(self) -> None:
        closed = transitive_closure(self.pairs)
        for x, y in closed:
            if x == y:
                raise ValueError(f"dominance relation is cyclic at {x!r}")
        object.__setattr__(self, "pairs", closed)

    @property
    def items(self) -> frozenset[str]:
        return frozenset(x for p in self.pairs for x in p)

    def dominates(self, x: str, y: str) -> bool:
        return (x, y) in self.pairs

    def dominated_in(self, menu: Iterable[str]) -> frozenset[str]:
        m = set(menu)
        return frozenset(y for x, y in self.pairs if x in m and y in m)

    def to_json(self) -> list[list[str]]:
        return [list(p) for p in sorted(self.pairs)]

    def __bool__(self) -> bool:
        return bool(self.pairs)


@dataclass(frozen=True, order=True)
class MenuItemConstraint:
    """Every admissible justification ranks some element of ``menu`` above ``excluded``."""

    menu: frozenset[str]
    excluded: str
    kind: str = "exclusion"

    def __post_init__(self) -> None:
        object.__setattr__(self, "menu", frozenset(self.menu))
        if self.excluded in self.menu:
            raise ValueError("excluded item belongs to its own menu")
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}")

    def satisfied_by(self, order: TotalOrder) -> bool:
        r = order.rank(self.excluded)
        return any(order.rank(b) < r for b in self.menu)

    def sort_key(self) -> tuple:
        return (self.excluded, menu_sort_key(self.menu), self.kind)

    def to_json(self) -> dict[str, Any]:
        return {"menu": sorted(self.menu), "excluded": self.excluded}


def sort_constraints(cons: Iterable[MenuItemConstraint]) -> list[MenuItemConstraint]:
    return sorted(set(cons), key=MenuItemConstraint.sort_key)


def prune_constraints(cons: Iterable[MenuItemConstraint]) -> list[MenuItemConstraint]:
    """Drop constraints implied by another with a smaller menu for the same item."""
    by_item: dict[str, list[frozenset[str]]] = {}
    for c in cons:
        by_item.setdefault(c.excluded, []).append(c.menu)
    kind = {(c.excluded, c.menu): c.kind for c in cons}
    out = []
    for item, menus in by_item.items():
        uniq = sorted(set(menus), key=menu_sort_key)
        kept: list[frozenset[str]] = []
        for m in uniq:
            if not any(k <= m for k in kept):
                kept.append(m)
        out.extend(MenuItemConstraint(m, item, kind[(item, m)]) for m in kept)
    return sort_constraints(out)


def witness_order(
    domain: Iterable[str],
    constraints: Iterable[MenuItemConstraint],
    target: str | None = None,
    menu: Iterable[str] = (),
) -> TotalOrder | None:
    """Build a total order satisfying every constraint, optionally with
    ``target`` above the rest of ``menu``.

    The order is grown from the top. An item may be placed once each of its
    constraints already has a menu element placed above it; placing items only
    ever unlocks more items, so the greedy pass fails exactly when no valid
    order exists. Before the target is placed, only items outside ``menu`` are
    eligible. Ties go to token order.
    """
    constraints = list(constraints)
    universe = set(domain) | set(menu) | {c.excluded for c in constraints}
    for c in constraints:
        universe |= c.menu
    if target is not None:
        universe.add(target)
    items = sorted(universe)
    needs: dict[str, list[frozenset[str]]] = {x: [] for x in items}
    for c in constraints:
        needs[c.excluded].append(c.menu)
    blocked = set(menu) - {target} if target is not None else set()

    placed: list[str] = []
    placed_set: set[str] = set()
    remaining = list(items)

    def eligible(x: str) -> bool:
        return all(not m.isdisjoint(placed_set) for m in needs[x])

    def place(x: str) -> None:
        placed.append(x)
        placed_set.add(x)
        remaining.remove(x)

    if target is not None:
        while target not in placed_set:
            if eligible(target):
                place(target)
                break
            nxt = next((x for x in remaining if x not in blocked and x != target and eligible(x)), None)
            if nxt is None:
                return None
            place(nxt)
    while remaining:
        nxt = next((x for x in remaining if eligible(x)), None)
        if nxt is None:
            return None
        place(nxt)
    return TotalOrder(tuple(placed))


# --------------------------------------------------------------- datasets


@dataclass(frozen=True)
class Defect:
    rule: str
    menu: tuple[str, ...] | None = None
    detail: str = ""

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"rule": self.rule}
        if self.menu is not None:
            out["menu"] = list(self.menu)
        if self.detail:
            out["detail"] = self.detail
        return out

    def __str__(self) -> str:
        where = f" at {{{','.join(self.menu)}}}" if self.menu is not None else ""
        extra = f" ({self.detail})" if self.detail else ""
        return f"{self.rule}{where}{extra}"


@dataclass(frozen=True)
class ValidationReport:
    defects: tuple[Defect, ...]
    dataset: ChoiceDataset | None = None

    @property
    def ok(self) -> bool:
        return not self.defects

    def to_json(self) -> dict[str, Any]:
        return {"status": "ok" if self.ok else "invalid", "defects": [d.to_json() for d in self.defects]}


@dataclass(frozen=True)
class ChoiceDataset:
    """Observed choices: a finite map from menus to nonempty chosen subsets.

    Singleton menus are always treated as observed with the only possible
    choice, whether or not they are listed.
    """

    domain: tuple[str, ...]
    observations: Mapping[frozenset[str], frozenset[str]]
    true_preference: WeakOrder | None = None
    dominance: DominanceRelation | None = None

    def __post_init__(self) -> None:
        obs = {frozenset(k): frozenset(v) for k, v in dict(self.observations).items()}
        object.__setattr__(self, "domain", tuple(sorted(set(self.domain))))
        object.__setattr__(self, "observations", MappingProxyType(obs))
        report = _check(self.domain, obs, self.true_preference, self.dominance)
        if report:
            raise DatasetError(report)

    @classmethod
    def from_choices(
        cls,
        choices: Mapping[Iterable[str], Iterable[str] | str],
        domain: Iterable[str] | None = None,
        true_preference: WeakOrder | None = None,
        dominance: DominanceRelation | None = None,
    ) -> ChoiceDataset:
        """Convenience constructor; a bare string choice means a singleton."""
        obs: dict[frozenset[str], frozenset[str]] = {}
        for m, c in choices.items():
            obs[frozenset(m)] = frozenset([c]) if isinstance(c, str) else frozenset(c)
        dom = set(domain) if domain is not None else set().union(*obs) if obs else set()
        return cls(tuple(dom), obs, true_preference, dominance)

    @property
    def menus(self) -> list[frozenset[str]]:
        return sorted(self.observations, key=menu_sort_key)

    def observed(self, m: Iterable[str]) -> bool:
        m = frozenset(m)
        return len(m) == 1 or m in self.observations

    def choice(self, m: Iterable[str]) -> frozenset[str] | None:
        m = frozenset(m)
        if len(m) == 1:
            return m
        return self.observations.get(m)

    def single(self, m: Iterable[str]) -> str | None:
        c = self.choice(m)
        if c is None:
            return None
        if len(c) != 1:
            raise NotChoiceFunctionError(f"menu {menu_key(m)} has {len(c)} chosen items")
        return next(iter(c))

    def is_choice_function(self) -> bool:
        return all(len(c) == 1 for c in self.observations.values())

    def require_choice_function(self) -> None:
        for m in self.menus:
            if len(self.observations[m]) != 1:
                raise NotChoiceFunctionError(
                    f"choice correspondence at {{{','.join(sorted(m))}}}: this analysis needs one chosen item per menu"
                )

    def with_choices(self, updates: Mapping[Iterable[str], Iterable[str] | str]) -> ChoiceDataset:
        obs = dict(self.observations)
        for m, c in updates.items():
            obs[frozenset(m)] = frozenset([c]) if isinstance(c, str) else frozenset(c)
        return ChoiceDataset(self.domain, obs, self.true_preference, self.dominance)

    def restricted(self, menus: Iterable[Iterable[str]]) -> ChoiceDataset:
        keep = {frozenset(m) for m in menus}
        obs = {m: c for m, c in self.observations.items() if m in keep}
        return ChoiceDataset(self.domain, obs, self.true_preference, self.dominance)

    def replace(self, **changes: Any) -> ChoiceDataset:
        fields = {
            "domain": self.domain,
            "observations": self.observations,
            "true_preference": self.true_preference,
            "dominance": self.dominance,
        }
        fields.update(changes)
        return ChoiceDataset(**fields)

    def supersets_index(self) -> dict[str, set[frozenset[str]]]:
        """Map each item to the observed menus containing it."""
        idx: dict[str, set[frozenset[str]]] = {x: set() for x in self.domain}
        for m in self.observations:
            for x in m:
                idx[x].add(m)
        return idx

    def observed_supersets(self, a: Iterable[str], index: dict[str, set[frozenset[str]]] | None = None) -> list[frozenset[str]]:
        a = frozenset(a)
        idx = index if index is not None else self.supersets_index()
        sets = [idx[x] for x in a]
        if not sets:
            return []
        common = set.intersection(*sets)
        return sorted(common, key=menu_sort_key)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "domain": list(self.domain),
            "observations": [{"menu": sorted(m), "choice": sorted(self.observations[m])} for m in self.menus],
        }
        if self.true_preference is not None:
            out["true_preference"] = self.true_preference.to_json()
        if self.dominance is not None:
            out["dominance"] = self.dominance.to_json()
        return out

    @classmethod
    def from_json(cls, raw: Any) -> ChoiceDataset:
        report = validate_dataset(raw)
        if not report.ok:
            raise DatasetError(list(report.defects))
        assert report.dataset is not None
        return report.dataset


def _check(
    domain: tuple[str, ...],
    obs: Mapping[frozenset[str], frozenset[str]],
    pref: WeakOrder | None,
    dom: DominanceRelation | None,
) -> list[Defect]:
    defects = []
    dset = set(domain)
    for m in sorted(obs, key=menu_sort_key):
        key = menu_key(m)
        c = obs[m]
        if not m:
            defects.append(Defect("empty menu", key))
            continue
        if not m <= dset:
            defects.append(Defect("menu outside domain", key, ",".join(sorted(m - dset))))
        if not c:
            defects.append(Defect("empty choice", key))
        elif not c <= m:
            defects.append(Defect("choice outside menu", key, ",".join(sorted(c - m))))
    if pref is not None and pref.domain != dset:
        defects.append(Defect("true preference does not cover the domain"))
    if dom is not None and not dom.items <= dset:
        defects.append(Defect("dominance outside domain", None, ",".join(sorted(dom.items - dset))))
    return defects


def validate_dataset(raw: Any) -> ValidationReport:
    """Check a parsed JSON dataset; defects are returned, never raised."""
    defects: list[Defect] = []
    if not isinstance(raw, Mapping):
        return ValidationReport((Defect("dataset must be a JSON object"),))
    unknown = set(raw) - {"domain", "observations", "true_preference", "dominance"}
    for k in sorted(unknown):
        defects.append(Defect("unknown key", None, k))
    domain = raw.get("domain")
    if not isinstance(domain, list) or not all(isinstance(x, str) and x for x in domain):
        defects.append(Defect("domain must be a list of nonempty strings"))
        domain = []
    elif len(set(domain)) != len(domain):
        defects.append(Defect("duplicate item in domain"))
    observations = raw.get("observations")
    if not isinstance(observations, list):
        defects.append(Defect("observations must be a list"))
        observations = []

    obs: dict[frozenset[str], frozenset[str]] = {}
    for i, entry in enumerate(observations):
        if not isinstance(entry, Mapping) or not isinstance(entry.get("menu"), list) or not isinstance(entry.get("choice"), list):
            defects.append(Defect("malformed observation", None, f"index {i}"))
            continue
        items, chosen = entry["menu"], entry["choice"]
        if not all(isinstance(x, str) for x in items + chosen):
            defects.append(Defect("malformed observation", None, f"index {i}"))
            continue
        m, c = frozenset(items), frozenset(chosen)
        key = menu_key(m)
        if len(m) != len(items):
            defects.append(Defect("duplicate item in menu", key))
        if m in obs:
            if obs[m] != c:
                defects.append(Defect("contradictory duplicate observation", key))
            continue
        obs[m] = c

    pref = None
    if raw.get("true_preference") is not None:
        tiers = raw["true_preference"]
        try:
            if not isinstance(tiers, list) or not all(isinstance(t, list) for t in tiers):
                raise ValueError("true_preference must be a list of tiers")
            pref = WeakOrder(tuple(frozenset(t) for t in tiers))
        except ValueError as exc:
            defects.append(Defect("malformed true preference", None, str(exc)))

    dom = None
    if raw.get("dominance") is not None:
        pairs = raw["dominance"]
        try:
            if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
                raise ValueError("dominance must be a list of [dominator, dominated] pairs")
            if any(p[0] == p[1] for p in pairs):
                raise ValueError("dominance must be irreflexive")
            dom = DominanceRelation(frozenset((p[0], p[1]) for p in pairs))
        except ValueError as exc:
            defects.append(Defect("malformed dominance", None, str(exc)))

    defects.extend(_check(tuple(sorted(set(domain))), obs, pref, dom))
    if defects:
        return ValidationReport(tuple(defects))
    return ValidationReport((), ChoiceDataset(tuple(domain), obs, pref, dom))
