"""Axiom checks when the true preference is known.

All checks work on partial data: an instance of an axiom is tested only when
every menu it mentions was observed. Each checker returns a :class:`Findings`
list of violations that also carries how many instances were tested and how
many were skipped for lack of data.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterable
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

from . import _kernels, forward
from .core import (
    ChoiceDataset,
    DominanceRelation,
    MenuItemConstraint,
    TotalOrder,
    WeakOrder,
    menu_sort_key,
    prune_constraints,
    sort_constraints,
    witness_order,
)

DEFAULT_ENUMERATION_LIMIT = 7
ISA_EXACT_CAP = 12


def enumeration_limit(default: int = DEFAULT_ENUMERATION_LIMIT) -> int:
    raw = os.environ.get("JUSTIFY_MAX_ENUM")
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"JUSTIFY_MAX_ENUM must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class Violation:
    """A failed instance of an axiom; ``witness`` names the menus and items involved."""

    axiom: str
    witness: dict[str, Any]
    message: str

    def to_json(self) -> dict[str, Any]:
        return {"axiom": self.axiom, "witness": self.witness, "message": self.message}

    def sort_key(self) -> tuple[str, str]:
        return (self.axiom, json.dumps(self.witness, sort_keys=True))


class Findings(list):
    """Violations plus coverage counters."""

    def __init__(self, violations: Iterable[Violation] = (), checked: int = 0, vacuous: int = 0, notes: Iterable[str] = ()):
        super().__init__(sorted(violations, key=Violation.sort_key))
        self.checked = checked
        self.vacuous = vacuous
        self.notes = list(notes)

    def coverage(self) -> dict[str, Any]:
        out: dict[str, Any] = {"checked": self.checked, "vacuous": self.vacuous}
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def __add__(self, other):  # type: ignore[override]
        if isinstance(other, Findings):
            return Findings(list(self) + list(other), self.checked + other.checked, self.vacuous + other.vacuous, self.notes + other.notes)
        return Findings(list(self) + list(other), self.checked, self.vacuous, self.notes)


def _m(items: Iterable[str]) -> list[str]:
    return sorted(items)


def _fmt(items: Iterable[str]) -> str:
    return "{" + ",".join(sorted(items)) + "}"


# ------------------------------------------------------------- exclusion


def excludes(data: ChoiceDataset, pref: WeakOrder, a: Iterable[str], b: str) -> bool | None:
    """Does menu ``a`` exclude ``b``? None when ``a ∪ {b}`` was not observed."""
    a = frozenset(a)
    if b in a:
        raise ValueError(f"{b!r} belongs to the menu")
    chosen = data.choice(a | {b})
    if chosen is None:
        return None
    return b not in chosen and pref.weakly_above_all(b, chosen)


def excludes_from_below(data: ChoiceDataset, pref: WeakOrder, a: Iterable[str], b: str) -> bool | None:
    """Like :func:`excludes`, but ``b`` must be weakly better than every item of ``a``."""
    a = frozenset(a)
    if b in a:
        raise ValueError(f"{b!r} belongs to the menu")
    if not pref.weakly_above_all(b, a):
        return False
    chosen = data.choice(a | {b})
    if chosen is None:
        return None
    return b not in chosen


def underline_set(data: ChoiceDataset, pref: WeakOrder, a: Iterable[str]) -> frozenset[str] | None:
    """Chosen items of ``a`` plus the items strictly worse than all of them."""
    a = frozenset(a)
    chosen = data.choice(a)
    if chosen is None:
        return None
    worse = {x for x in a if all(pref.prefers(c, x) for c in chosen)}
    return chosen | worse


def exclusion_constraints(data: ChoiceDataset, pref: WeakOrder) -> list[MenuItemConstraint]:
    """One constraint per observed exclusion: ``menu \\ {b}`` excludes ``b``."""
    out = []
    for s in data.menus:
        chosen = data.choice(s)
        for b in sorted(s - chosen):
            if pref.weakly_above_all(b, chosen):
                out.append(MenuItemConstraint(s - {b}, b, "exclusion"))
    return sort_constraints(out)


def from_below_constraints(data: ChoiceDataset, pref: WeakOrder) -> list[MenuItemConstraint]:
    """Exclusion constraints with each menu shrunk to its underline set."""
    out = []
    for s in data.menus:
        chosen = data.choice(s)
        low = underline_set(data, pref, s)
        assert low is not None
        for b in sorted(s - chosen):
            if pref.weakly_above_all(b, chosen):
                out.append(MenuItemConstraint(low, b, "exclusion-from-below"))
    return sort_constraints(out)


# ---------------------------------------------------------------- checks


def check_optimization(data: ChoiceDataset, pref: WeakOrder) -> Findings:
    violations = []
    for s in data.menus:
        chosen = data.choice(s)
        if len({pref.rank(x) for x in chosen}) > 1:
            violations.append(
                Violation(
                    "Optimization",
                    {"A": _m(s), "chosen": _m(chosen)},
                    f"chosen items {_fmt(chosen)} from {_fmt(s)} are not indifferent",
                )
            )
    return Findings(violations, checked=len(data.menus))


def check_iua(data: ChoiceDataset, pref: WeakOrder) -> Findings:
    """Irrelevance of unjustifiable alternatives.

    Whenever ``a`` is weakly better than the choice from ``A`` yet unchosen,
    removing ``a`` from any observed ``B ⊇ A`` must leave the choice unchanged.
    """
    index = data.supersets_index()
    violations = []
    checked = vacuous = 0
    for a_menu in data.menus:
        chosen = data.choice(a_menu)
        for a in sorted(a_menu - chosen):
            if not pref.weakly_above_all(a, chosen):
                continue
            for b_menu in data.observed_supersets(a_menu, index):
                rest = b_menu - {a}
                if not data.observed(rest):
                    vacuous += 1
                    continue
                checked += 1
                cb, cr = data.choice(b_menu), data.choice(rest)
                if cb != cr:
                    violations.append(
                        Violation(
                            "IUA",
                            {"A": _m(a_menu), "a": a, "B": _m(b_menu)},
                            f"{a} is unjustifiable against {_fmt(a_menu - {a})} but removing it from "
                            f"{_fmt(b_menu)} changes the choice from {_fmt(cb)} to {_fmt(cr)}",
                        )
                    )
    return Findings(violations, checked, vacuous)


def observed_subsets(data: ChoiceDataset, b: frozenset[str], min_size: int = 2) -> list[frozenset[str]]:
    """Observed menus contained in ``b`` (including ``b`` itself)."""
    if 2 ** len(b) < len(data.observations):
        out = []
        items = sorted(b)
        for k in range(min_size, len(items) + 1):
            for combo in combinations(items, k):
                s = frozenset(combo)
                if s in data.observations:
                    out.append(s)
        return out
    return sorted((s for s in data.observations if s <= b and len(s) >= min_size), key=menu_sort_key)


def submaximal_set(data: ChoiceDataset, pref: WeakOrder, dominance: DominanceRelation | None, b: Iterable[str]) -> frozenset[str]:
    """Items of ``b`` dominated inside ``b`` or excluded by an observed part of ``b``.

    With partial data this under-approximates the full set.
    """
    b = frozenset(b)
    out = set(dominance.dominated_in(b)) if dominance is not None else set()
    for s in observed_subsets(data, b):
        chosen = data.choice(s)
        for x in s - chosen:
            if pref.weakly_above_all(x, chosen):
                out.add(x)
    return frozenset(out)


def _removable_sets(items: list[str], cap: int = ISA_EXACT_CAP) -> Iterable[frozenset[str]]:
    if len(items) <= cap:
        for k in range(1, len(items) + 1):
            for combo in combinations(items, k):
                yield frozenset(combo)
    else:
        for k in (1, 2):
            for combo in combinations(items, k):
                yield frozenset(combo)


def check_isa(data: ChoiceDataset, pref: WeakOrder, dominance: DominanceRelation | None) -> Findings:
    """Irrelevance of submaximal alternatives."""
    violations = []
    checked = vacuous = 0
    notes = []
    for b_menu in data.menus:
        sub = sorted(submaximal_set(data, pref, dominance, b_menu))
        if len(sub) > ISA_EXACT_CAP:
            notes.append(f"{_fmt(b_menu)}: {len(sub)} submaximal items, only singletons and pairs removed")
        for a in _removable_sets(sub):
            rest = b_menu - a
            if not rest:
                continue
            if not data.observed(rest):
                vacuous += 1
                continue
            checked += 1
            cb, cr = data.choice(b_menu), data.choice(rest)
            if cb != cr:
                violations.append(
                    Violation(
                        "ISA",
                        {"A": _m(a), "B": _m(b_menu)},
                        f"removing submaximal items {_fmt(a)} from {_fmt(b_menu)} changes the choice "
                        f"from {_fmt(cb)} to {_fmt(cr)}",
                    )
                )
    return Findings(violations, checked, vacuous, notes)


# ---------------------------------------------------------------- fitting


@dataclass
class KnownPreferenceFit:
    """Outcome of fitting justifications to data under a given true preference."""

    status: str
    true_preference: WeakOrder
    constraints: list[MenuItemConstraint]
    model: forward.Model | None = None
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "fit"

    def to_json(self) -> dict[str, Any]:
        count = len(self.model.justifications) if isinstance(self.model, forward.JustifiabilityModel) else None
        return {
            "status": self.status,
            "true_preference": self.true_preference.to_json(),
            "exclusions": [c.to_json() for c in self.constraints],
            "justification_count": count,
            "violations": [v.to_json() for v in self.violations],
        }


def consistent_orders(domain: Iterable[str], constraints: Iterable[MenuItemConstraint]):
    """All total orders over ``domain`` meeting every constraint, lexicographically."""
    items = sorted(domain)
    index = {x: i for i, x in enumerate(items)}
    cons = list(constraints)
    ranks = _kernels.permutation_ranks(len(items))
    masks = [sum(1 << index[x] for x in c.menu) for c in cons]
    excl = [index[c.excluded] for c in cons]
    keep = _kernels.consistent_mask(ranks, masks, excl)
    out = []
    for row in ranks[keep]:
        ranking = [""] * len(items)
        for i, r in enumerate(row):
            ranking[r] = items[i]
        out.append(TotalOrder(tuple(ranking)))
    return out


def dominance_constraints(dominance: DominanceRelation | None) -> list[MenuItemConstraint]:
    if dominance is None:
        return []
    return [MenuItemConstraint(frozenset([x]), y, "exclusion") for x, y in sorted(dominance.pairs)]


def build_model(pref: WeakOrder, constraints: list[MenuItemConstraint], limit: int | None = None) -> forward.Model | None:
    """Explicit model when the domain is small enough, constraint model otherwise.

    Returns None when no order satisfies the constraints.
    """
    limit = enumeration_limit() if limit is None else limit
    domain = pref.domain
    if len(domain) <= limit:
        orders = consistent_orders(domain, constraints)
        if not orders:
            return None
        return forward.JustifiabilityModel(pref, tuple(orders))
    if witness_order(domain, constraints) is None:
        return None
    return forward.ConstraintModel(pref, tuple(constraints))


def fit_known_preference(
    data: ChoiceDataset,
    pref: WeakOrder,
    dominance: DominanceRelation | None = None,
    limit: int | None = None,
) -> KnownPreferenceFit:
    """Take every order consistent with the observed exclusions (and strict
    dominance, if given) as the justification set, then confirm it
    reproduces the data."""
    violations: list[Violation] = list(check_optimization(data, pref)) + list(check_iua(data, pref))
    if dominance is not None:
        violations += list(check_isa(data, pref, dominance))
    cons = prune_constraints(exclusion_constraints(data, pref))
    if violations:
        return KnownPreferenceFit("reject", pref, cons, None, violations)
    model = build_model(pref, cons + dominance_constraints(dominance), limit)
    if model is None:
        v = Violation("consistency", {}, "no total order satisfies every exclusion constraint")
        return KnownPreferenceFit("reject", pref, cons, None, [v])
    bad = forward.mismatches(model, data)
    if bad:
        vs = [
            Violation("reproduction", {"A": _m(m)}, f"fitted model does not reproduce the choice from {_fmt(m)}")
            for m in bad
        ]
        return KnownPreferenceFit("reject", pref, cons, model, vs)
    return KnownPreferenceFit("fit", pref, cons, model, [])
