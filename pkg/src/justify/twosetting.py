"""Two environments, low and high pressure, sharing one true preference.

Under pressure fewer orders count as justifications, so the high-pressure
set of justifications is nested in the low-pressure one. An item is
*replaced* in a menu when low pressure picks it and high pressure does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from . import forward
from .axioms import (
    Findings,
    KnownPreferenceFit,
    Violation,
    build_model,
    check_iua,
    consistent_orders,
    fit_known_preference,
)
from .core import (
    ChoiceDataset,
    MenuItemConstraint,
    TotalOrder,
    find_cycle,
    linear_extension,
    sort_constraints,
)
from .revealed import (
    FitError,
    _by_item,
    canonical_true_preference,
    check_iea,
    irrelevance_check,
    relations,
)

NESTING_ENUMERATION_LIMIT = 5


class WarpError(ValueError):
    """The low-pressure choices do not satisfy WARP."""


@dataclass(frozen=True)
class PairedDataset:
    low: ChoiceDataset
    high: ChoiceDataset

    def __post_init__(self) -> None:
        if self.low.domain != self.high.domain:
            raise ValueError("low and high datasets must share a domain")
        self.low.require_choice_function()
        self.high.require_choice_function()

    @property
    def domain(self) -> tuple[str, ...]:
        return self.low.domain

    def common_menus(self) -> list[frozenset[str]]:
        return [m for m in self.low.menus if m in self.high.observations]

    def coverage_notes(self) -> list[str]:
        only_low = sum(1 for m in self.low.menus if m not in self.high.observations)
        only_high = sum(1 for m in self.high.menus if m not in self.low.observations)
        notes = []
        if only_low:
            notes.append(f"{only_low} menus observed only under low pressure")
        if only_high:
            notes.append(f"{only_high} menus observed only under high pressure")
        return notes


def replaced_items(paired: PairedDataset) -> list[tuple[frozenset[str], str]]:
    """Menus where the low-pressure choice is not chosen under high pressure."""
    out = []
    for m in paired.common_menus():
        a = paired.low.single(m)
        if a != paired.high.single(m):
            out.append((m, a))
    return out


def _replacement_map(paired: PairedDataset) -> dict[str, list[frozenset[str]]]:
    out: dict[str, list[frozenset[str]]] = {}
    for m, a in replaced_items(paired):
        out.setdefault(a, []).append(m - {a})
    return out


def check_irea(paired: PairedDataset, low_exclusions: list[MenuItemConstraint] | None = None) -> Findings:
    """Items revealed excluded under low pressure, or replaced, inside a menu
    can be dropped together without changing the high-pressure choice."""
    if low_exclusions is None:
        low_exclusions = list(relations(paired.low).exclusions)
    removable = _by_item(low_exclusions)
    for a, menus in _replacement_map(paired).items():
        removable.setdefault(a, []).extend(menus)
    found = irrelevance_check(paired.low, removable, "IREA", judged=paired.high)
    found.notes.extend(paired.coverage_notes())
    return found


def replacement_constraints(
    paired: PairedDataset, low_exclusions: list[MenuItemConstraint]
) -> list[MenuItemConstraint]:
    """Replacement pairs (Z, z) where no item of Z is itself revealed excluded
    under low pressure by part of Z ∪ {z}."""
    by_item = _by_item(low_exclusions)
    out = []
    for m, z in replaced_items(paired):
        rest = m - {z}
        if any(s <= m for x in rest for s in by_item.get(x, ())):
            continue
        out.append(MenuItemConstraint(rest, z, "replacement-derived"))
    return sort_constraints(out)


@dataclass
class TwoSettingFit:
    status: str
    true_preference: TotalOrder | None
    low_constraints: list[MenuItemConstraint]
    high_constraints: list[MenuItemConstraint]
    low_model: forward.Model | None = None
    high_model: forward.Model | None = None
    nested: bool | None = None
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "fit"

    def to_json(self) -> dict[str, Any]:
        def count(m: forward.Model | None) -> int | None:
            return len(m.justifications) if isinstance(m, forward.JustifiabilityModel) else None

        return {
            "status": self.status,
            "true_preference": self.true_preference.to_json() if self.true_preference is not None else [],
            "low_constraints": [c.to_json() for c in self.low_constraints],
            "high_constraints": [c.to_json() for c in self.high_constraints],
            "low_justification_count": count(self.low_model),
            "high_justification_count": count(self.high_model),
            "nested": self.nested,
            "violations": [v.to_json() for v in self.violations],
        }


def nested_by_enumeration(domain, high: list[MenuItemConstraint], low: list[MenuItemConstraint]) -> bool:
    hi = set(consistent_orders(domain, high))
    lo = set(consistent_orders(domain, low))
    return hi <= lo


def fit_two_setting(paired: PairedDataset, enumeration_limit: int | None = None) -> TwoSettingFit:
    """Shared true preference with nested justification sets, or the violations
    that rule it out."""
    rel = relations(paired.low)
    low_c = list(rel.exclusions)
    violations = list(check_iea(paired.low, low_c)) + list(check_irea(paired, low_c))
    if violations:
        return TwoSettingFit("reject", None, low_c, [], violations=violations)
    if not rel.P_acyclic:
        cyc = find_cycle(rel.P) or []
        v = Violation("Acyclicity", {"cycle": cyc}, "revealed preference has a cycle: " + ">".join(cyc))
        return TwoSettingFit("reject", None, low_c, [], violations=[v])
    try:
        pref = canonical_true_preference(paired.low, rel)
    except FitError as exc:
        return TwoSettingFit("reject", None, low_c, [], violations=exc.violations)
    high_c = sort_constraints(low_c + replacement_constraints(paired, low_c))
    weak = pref.as_weak()
    low_m = build_model(weak, low_c, enumeration_limit)
    high_m = build_model(weak, high_c, enumeration_limit)
    if low_m is None or high_m is None:
        v = Violation("consistency", {}, "no order is consistent with the constraints of one setting")
        return TwoSettingFit("reject", pref, low_c, high_c, low_m, high_m, violations=[v])
    # every low constraint is also a high constraint, so nesting holds by implication
    nested = set(low_c) <= set(high_c)
    if len(paired.domain) <= NESTING_ENUMERATION_LIMIT:
        nested = nested and nested_by_enumeration(paired.domain, high_c, low_c)
    bad = [("low", m) for m in forward.mismatches(low_m, paired.low)]
    bad += [("high", m) for m in forward.mismatches(high_m, paired.high)]
    if bad:
        vs = [
            Violation("reproduction", {"setting": s, "A": sorted(m)}, f"{s}-pressure model does not reproduce the choice from {sorted(m)}")
            for s, m in bad
        ]
        return TwoSettingFit("reject", pref, low_c, high_c, low_m, high_m, nested, vs)
    return TwoSettingFit("fit", pref, low_c, high_c, low_m, high_m, nested, [])


def warp_preference(data: ChoiceDataset) -> TotalOrder:
    """The order revealed by a WARP-consistent choice function.

    Raises WarpError when some menu's choice loses a pairwise comparison,
    pairwise choices cycle, or a needed pair is unobserved.
    """
    data.require_choice_function()
    pairs = set()
    for m in data.menus:
        x = data.single(m)
        for y in sorted(m - {x}):
            w = data.single((x, y))
            if w is None:
                raise WarpError(f"pair {{{x},{y}}} is not observed")
            if w != x:
                raise WarpError(f"{x} is chosen from {sorted(m)} but {y} is chosen from {{{x},{y}}}")
            pairs.add((x, y))
    order = linear_extension(data.domain, pairs)
    if order is None:
        raise WarpError("pairwise choices form a cycle: " + ">".join(find_cycle(pairs) or []))
    return order


def fit_given_warp_low(paired: PairedDataset, enumeration_limit: int | None = None) -> KnownPreferenceFit:
    """Read the true preference off WARP-consistent low-pressure choices, then
    fit the high-pressure choices with that preference known."""
    pref = warp_preference(paired.low).as_weak()
    found = check_iua(paired.high, pref)
    if found:
        return KnownPreferenceFit("reject", pref, [], None, list(found))
    return fit_known_preference(paired.high, pref, None, enumeration_limit)
