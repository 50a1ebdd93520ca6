"""Analysis when the true preference is not observed.

Works on choice functions (one chosen item per menu). Two choice patterns
carry all the information about the justifications:

* a *cycle* ``(x1, x2, x3)``: x1 beats x2 in pairs, x2 is chosen from the
  triple, and x3 beats x1 in pairs;
* an *almost-WARP set*: a menu that is not a cycle, on whose proper subsets
  choice obeys WARP, but whose own choice is beaten in pairs by some member.

From these we derive revealed exclusions, the revealed preference P, the
exclusion-irrelevance check, and the canonical (maximal) representation.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

from . import forward
from .axioms import Findings, Violation, _removable_sets, build_model, observed_subsets
from .core import (
    ChoiceDataset,
    DominanceRelation,
    MenuItemConstraint,
    TotalOrder,
    find_cycle,
    linear_extension,
    menu_sort_key,
    sort_constraints,
    transitive_closure,
    witness_order,
)

Triple = tuple[str, str, str]


class FitError(ValueError):
    """Raised when a canonical object is requested for data that has none."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(v.message for v in violations))


def _fmt(items: Iterable[str]) -> str:
    return "{" + ",".join(sorted(items)) + "}"


def _pair(data: ChoiceDataset, x: str, y: str) -> str | None:
    return data.single((x, y))


# ----------------------------------------------------------------- cycles


def _cycle_of(data: ChoiceDataset, triple: frozenset[str]) -> Triple | None:
    mid = data.single(triple)
    if mid is None:
        return None
    y, z = sorted(triple - {mid})
    for first, last in ((y, z), (z, y)):
        if _pair(data, first, mid) == first and _pair(data, first, last) == last:
            return (first, mid, last)
    return None


def detect_cycles(data: ChoiceDataset) -> list[Triple]:
    """Every ordered triple matching the cycle pattern on observed menus."""
    data.require_choice_function()
    out = []
    for m in data.menus:
        if len(m) == 3:
            cyc = _cycle_of(data, m)
            if cyc is not None:
                out.append(cyc)
    return sorted(out)


def chain_closure(data: ChoiceDataset, cycles: list[Triple] | None = None) -> frozenset[tuple[str, str]]:
    """Transitive closure of the cycle relation: ``x1 C x2 C x3`` per cycle."""
    cycles = detect_cycles(data) if cycles is None else cycles
    base = set()
    for a, b, c in cycles:
        base.add((a, b))
        base.add((b, c))
    return transitive_closure(base)


def is_chain(data: ChoiceDataset, seq: Iterable[str]) -> bool:
    """Literal chain test: every interior item sits in a cycle with its
    neighbours, or both neighbouring triples around it are cycles."""
    seq = list(seq)
    if len(seq) < 3 or len(set(seq)) != len(seq):
        return False
    cycles = set(detect_cycles(data))

    def cyc(i: int) -> bool:
        return 0 <= i - 1 and i + 1 < len(seq) and (seq[i - 1], seq[i], seq[i + 1]) in cycles

    for i in range(1, len(seq) - 1):
        if not (cyc(i) or (cyc(i - 1) and cyc(i + 1))):
            return False
    return True


# ------------------------------------------------------------ almost-WARP


def _pairwise_consistent(data: ChoiceDataset, s: frozenset[str]) -> bool:
    x = data.single(s)
    return all(_pair(data, x, y) == x for y in s - {x})


def _all_subsets_observed(data: ChoiceDataset, a: frozenset[str]) -> bool:
    items = sorted(a)
    return all(
        frozenset(c) in data.observations for k in range(2, len(items)) for c in combinations(items, k)
    )


def almost_warp_scan(data: ChoiceDataset) -> tuple[list[frozenset[str]], int]:
    """Almost-WARP menus and the number of candidates skipped for missing subsets."""
    data.require_choice_function()
    consistent = {m: _pairwise_consistent(data, m) for m in data.menus if len(m) >= 3 and _all_subsets_observed(data, m)}
    found = []
    skipped = 0
    for m in data.menus:
        if len(m) < 3:
            continue
        if m not in consistent:
            skipped += 1
            continue
        if consistent[m]:
            continue
        if len(m) == 3 and _cycle_of(data, m) is not None:
            continue
        items = sorted(m)
        proper_ok = all(
            consistent[frozenset(c)] for k in range(3, len(items)) for c in combinations(items, k)
        )
        if proper_ok:
            found.append(m)
    return sorted(found, key=menu_sort_key), skipped


def detect_almost_warp(data: ChoiceDataset) -> list[frozenset[str]]:
    return almost_warp_scan(data)[0]


# ------------------------------------------------------- revealed exclusion


def revealed_exclusions(
    data: ChoiceDataset,
    closure: frozenset[tuple[str, str]] | None = None,
    almost_warp: list[frozenset[str]] | None = None,
) -> list[MenuItemConstraint]:
    """Pairs (B, a) such that a is revealed excluded by B."""
    data.require_choice_function()
    closure = chain_closure(data) if closure is None else closure
    almost_warp = detect_almost_warp(data) if almost_warp is None else almost_warp
    out = []
    for m in almost_warp:
        chosen = data.single(m)
        for a in sorted(m - {chosen}):
            if _pair(data, a, chosen) == a:
                out.append(MenuItemConstraint(m - {a}, a, "revealed-exclusion"))
    for a, b in sorted(closure):
        if a != b and _pair(data, a, b) == b:
            out.append(MenuItemConstraint(frozenset([b]), a, "revealed-exclusion"))
    return sort_constraints(out)


def revealed_P(data: ChoiceDataset) -> tuple[frozenset[tuple[str, str]], bool]:
    """Revealed preference P and whether it is acyclic.

    If adding ``a`` to an observed ``B`` changes the choice, then for each
    observed ``A ∪ {a}`` with ``A ⊆ B`` whose choice is not ``a``, that choice
    is revealed preferred to ``a``.
    """
    data.require_choice_function()
    pairs = set()
    for s in data.menus:
        subs = observed_subsets(data, s)
        for a in sorted(s):
            rest = s - {a}
            if not data.observed(rest) or data.single(rest) == data.single(s):
                continue
            for t in subs:
                if a in t:
                    x = data.single(t)
                    if x != a:
                        pairs.add((x, a))
    rel = frozenset(pairs)
    return rel, find_cycle(rel) is None


def _excluded_within(cons_by_item: dict[str, list[frozenset[str]]], b: frozenset[str]) -> set[str]:
    return {a for a in b if any(s <= b for s in cons_by_item.get(a, ()))}


def irrelevance_check(
    data: ChoiceDataset,
    removable: dict[str, list[frozenset[str]]],
    axiom: str,
    judged: ChoiceDataset | None = None,
) -> Findings:
    """Shared engine for the exclusion-irrelevance checks.

    ``removable[a]`` lists menus S such that a is irrelevant whenever
    ``S ∪ {a}`` lies inside the menu under test. Choices are compared in
    ``judged`` (defaults to ``data``).
    """
    judged = data if judged is None else judged
    violations = []
    checked = vacuous = 0
    notes = []
    for b in judged.menus:
        cand = sorted(_excluded_within(removable, b))
        if len(cand) > 12:
            notes.append(f"{_fmt(b)}: {len(cand)} removable items, only singletons and pairs removed")
        for a in _removable_sets(cand):
            rest = b - a
            if not rest:
                continue
            if not judged.observed(rest):
                vacuous += 1
                continue
            checked += 1
            cb, cr = judged.single(b), judged.single(rest)
            if cb != cr:
                violations.append(
                    Violation(
                        axiom,
                        {"A": sorted(a), "B": sorted(b)},
                        f"removing {_fmt(a)} from {_fmt(b)} changes the choice from {cb} to {cr}",
                    )
                )
    return Findings(violations, checked, vacuous, notes)


def _by_item(cons: Iterable[MenuItemConstraint]) -> dict[str, list[frozenset[str]]]:
    out: dict[str, list[frozenset[str]]] = {}
    for c in cons:
        out.setdefault(c.excluded, []).append(c.menu)
    return out


def check_iea(data: ChoiceDataset, exclusions: list[MenuItemConstraint] | None = None) -> Findings:
    """Irrelevance of excluded alternatives: items revealed excluded by part of
    a menu can be removed together without changing the choice."""
    data.require_choice_function()
    exclusions = revealed_exclusions(data) if exclusions is None else exclusions
    return irrelevance_check(data, _by_item(exclusions), "IEA")


# -------------------------------------------------------------- relations


@dataclass(frozen=True)
class RevealedRelations:
    cycles: tuple[Triple, ...]
    chain_closure: frozenset[tuple[str, str]]
    P: frozenset[tuple[str, str]]
    P_acyclic: bool
    almost_warp: tuple[frozenset[str], ...]
    exclusions: tuple[MenuItemConstraint, ...]
    skipped_candidates: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "cycles": [list(c) for c in self.cycles],
            "chain_closure": [list(p) for p in sorted(self.chain_closure)],
            "P": [list(p) for p in sorted(self.P)],
            "P_acyclic": self.P_acyclic,
            "almost_warp": [sorted(m) for m in self.almost_warp],
            "exclusions": [c.to_json() for c in self.exclusions],
        }


def relations(data: ChoiceDataset) -> RevealedRelations:
    data.require_choice_function()
    cycles = detect_cycles(data)
    closure = chain_closure(data, cycles)
    aw, skipped = almost_warp_scan(data)
    excl = revealed_exclusions(data, closure, aw)
    p, acyclic = revealed_P(data)
    return RevealedRelations(tuple(cycles), closure, p, acyclic, tuple(aw), tuple(excl), skipped)


# ------------------------------------------------------------ canonical fit


def canonical_true_preference(data: ChoiceDataset, rel: RevealedRelations | None = None) -> TotalOrder:
    """Chain closure first, then pairwise choice on pairs the chains leave open.

    Pairs left open by both (unobserved pairs) are ordered by token.
    """
    rel = relations(data) if rel is None else rel
    violations = list(check_iea(data, list(rel.exclusions)))
    if violations:
        raise FitError(violations)
    chain = {(a, b) for a, b in rel.chain_closure if a != b}
    both = sorted((a, b) for a, b in chain if (b, a) in chain and a < b)
    if both:
        a, b = both[0]
        raise FitError([Violation("chain", {"pair": [a, b]}, f"chains rank {a} above {b} and {b} above {a}")])
    pairs = set(chain)
    items = list(data.domain)
    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            if (a, b) in chain or (b, a) in chain:
                continue
            w = _pair(data, a, b)
            if w is not None:
                pairs.add((w, b if w == a else a))
    order = linear_extension(data.domain, pairs)
    if order is None:
        cyc = find_cycle(pairs) or []
        raise FitError([Violation("preference cycle", {"cycle": cyc}, "chain and pairwise rankings form a cycle: " + ">".join(cyc))])
    return order


def canonical_model(data: ChoiceDataset, enumeration_limit: int | None = None) -> forward.Model:
    """Canonical true preference with every order consistent with revealed
    exclusion; explicit up to the enumeration limit, constraint-based beyond."""
    rel = relations(data)
    pref = canonical_true_preference(data, rel)
    model = build_model(pref.as_weak(), list(rel.exclusions), enumeration_limit)
    if model is None:
        raise FitError([Violation("consistency", {}, "no order is consistent with revealed exclusion")])
    return model


@dataclass
class FitReport:
    status: str
    true_preference: TotalOrder | None
    exclusions: list[MenuItemConstraint]
    model: forward.Model | None
    relations: RevealedRelations | None
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "fit"

    def to_json(self) -> dict[str, Any]:
        count = len(self.model.justifications) if isinstance(self.model, forward.JustifiabilityModel) else None
        return {
            "status": self.status,
            "true_preference": self.true_preference.to_json() if self.true_preference is not None else [],
            "exclusions": [c.to_json() for c in self.exclusions],
            "justification_count": count,
            "violations": [v.to_json() for v in self.violations],
        }


def fit(data: ChoiceDataset, enumeration_limit: int | None = None) -> FitReport:
    """Fit the canonical representation or return the violations that block it."""
    data.require_choice_function()
    rel = relations(data)
    excl = list(rel.exclusions)
    iea = list(check_iea(data, excl))
    if iea:
        return FitReport("reject", None, excl, None, rel, iea)
    if not rel.P_acyclic:
        cyc = find_cycle(rel.P) or []
        v = Violation("Acyclicity", {"cycle": cyc}, "revealed preference has a cycle: " + ">".join(cyc))
        return FitReport("reject", None, excl, None, rel, [v])
    try:
        pref = canonical_true_preference(data, rel)
    except FitError as exc:
        return FitReport("reject", None, excl, None, rel, exc.violations)
    model = build_model(pref.as_weak(), excl, enumeration_limit)
    if model is None:
        v = Violation("consistency", {}, "no order is consistent with revealed exclusion")
        return FitReport("reject", pref, excl, None, rel, [v])
    bad = forward.mismatches(model, data)
    if bad:
        vs = [
            Violation("reproduction", {"A": sorted(m)}, f"canonical model does not reproduce the choice from {_fmt(m)}")
            for m in bad
        ]
        return FitReport("reject", pref, excl, model, rel, vs)
    return FitReport("fit", pref, excl, model, rel, [])


def witness_justification(
    constraints: Iterable[MenuItemConstraint],
    target: str,
    menu: Iterable[str],
    dominance: DominanceRelation | None = None,
    domain: Iterable[str] = (),
) -> TotalOrder | None:
    """An order meeting every constraint (and strict dominance) that ranks
    ``target`` above the rest of ``menu``, or None if there is none."""
    menu = frozenset(menu)
    if target not in menu:
        raise ValueError("target must belong to the menu")
    cons = list(constraints)
    if dominance is not None:
        cons += [MenuItemConstraint(frozenset([x]), y) for x, y in sorted(dominance.pairs)]
    dom = set(domain) | (dominance.items if dominance is not None else set())
    return witness_order(dom, cons, target, menu)
