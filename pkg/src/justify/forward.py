"""Forward evaluation: turn a true preference and a set of justifications into
predicted choices.

An item is *justified* in a menu when some justification ranks it first
there; the decision maker then picks the truly best justified items.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import _kernels
from .core import (
    ChoiceDataset,
    DominanceRelation,
    MenuItemConstraint,
    TotalOrder,
    WeakOrder,
    menu_key,
    witness_order,
)


def _check_menu(model_domain: frozenset[str], m: Iterable[str]) -> frozenset[str]:
    m = frozenset(m)
    if not m:
        raise ValueError("empty menu")
    if not m <= model_domain:
        raise ValueError(f"menu items outside the model domain: {sorted(m - model_domain)}")
    return m


@dataclass(frozen=True)
class JustifiabilityModel:
    """A true preference plus an explicit, nonempty list of justifications."""

    true_preference: WeakOrder
    justifications: tuple[TotalOrder, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)
    _ranks: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        orders = tuple(sorted(set(self.justifications), key=lambda o: o.ranking))
        if not orders:
            raise ValueError("a model needs at least one justification")
        dom = self.true_preference.domain
        for o in orders:
            if o.domain != dom:
                raise ValueError("justification domain differs from the true preference domain")
        items = sorted(dom)
        index = {x: i for i, x in enumerate(items)}
        ranks = np.array([[o.rank(x) for x in items] for o in orders], dtype=np.int64)
        object.__setattr__(self, "justifications", orders)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_ranks", ranks)

    @property
    def domain(self) -> frozenset[str]:
        return self.true_preference.domain

    def justified_set(self, m: Iterable[str]) -> frozenset[str]:
        return self.justified_sets([m])[0]

    def justified_sets(self, menus: Sequence[Iterable[str]]) -> list[frozenset[str]]:
        """Batch version of :meth:`justified_set`."""
        menus = [_check_menu(self.domain, m) for m in menus]
        if not menus:
            return []
        items = sorted(self.domain)
        masks = [sum(1 << self._index[x] for x in m) for m in menus]
        top = _kernels.top_bits(self._ranks, masks)
        union = _kernels.union_bits(top, np.ones(self._ranks.shape[0], dtype=bool))
        return [frozenset(items[i] for i in range(len(items)) if (int(b) >> i) & 1) for b in union]

    def choose(self, m: Iterable[str]) -> frozenset[str]:
        return self.true_preference.best(self.justified_set(m))

    def to_json(self) -> dict[str, Any]:
        return {
            "true_preference": self.true_preference.to_json(),
            "justifications": [o.to_json() for o in self.justifications],
        }

    @classmethod
    def from_json(cls, raw: Any) -> JustifiabilityModel:
        if not isinstance(raw, dict) or "true_preference" not in raw or "justifications" not in raw:
            raise ValueError("model JSON needs 'true_preference' and 'justifications'")
        pref = WeakOrder(tuple(frozenset(t) for t in raw["true_preference"]))
        orders = tuple(TotalOrder(tuple(o)) for o in raw["justifications"])
        return cls(pref, orders)


@dataclass(frozen=True)
class ConstraintModel:
    """A model whose justifications are every order meeting a constraint list.

    Used when listing the orders explicitly would be too large. Membership in
    the justified set is decided by constructing a witness order.
    """

    true_preference: WeakOrder
    constraints: tuple[MenuItemConstraint, ...]

    @property
    def domain(self) -> frozenset[str]:
        return self.true_preference.domain

    def justified_set(self, m: Iterable[str]) -> frozenset[str]:
        m = _check_menu(self.domain, m)
        return frozenset(x for x in m if witness_order(self.domain, self.constraints, x, m) is not None)

    def justified_sets(self, menus: Sequence[Iterable[str]]) -> list[frozenset[str]]:
        return [self.justified_set(m) for m in menus]

    def choose(self, m: Iterable[str]) -> frozenset[str]:
        return self.true_preference.best(self.justified_set(m))

    def to_json(self) -> dict[str, Any]:
        return {
            "true_preference": self.true_preference.to_json(),
            "constraints": [c.to_json() for c in self.constraints],
        }


Model = JustifiabilityModel | ConstraintModel


def justified_set(model: Model, m: Iterable[str]) -> frozenset[str]:
    return model.justified_set(m)


def choose(model: Model, m: Iterable[str]) -> frozenset[str]:
    return model.choose(m)


def is_d_monotone(
    obj: TotalOrder | WeakOrder | Sequence[float],
    dominance: DominanceRelation,
    mode: str = "strict",
    items: Sequence[str] | None = None,
) -> bool:
    """Check that every dominance pair is respected.

    ``obj`` may be an order or a utility vector; a vector needs ``items`` to
    name its coordinates.
    """
    if mode not in ("strict", "weak"):
        raise ValueError("mode must be 'strict' or 'weak'")
    if isinstance(obj, (TotalOrder, WeakOrder)):
        if mode == "strict":
            return all(obj.prefers(x, y) for x, y in dominance.pairs)
        return all(obj.weakly_prefers(x, y) for x, y in dominance.pairs)
    if items is None:
        raise ValueError("a utility vector needs item names")
    u = dict(zip(items, obj, strict=True))
    if mode == "strict":
        return all(u[x] > u[y] for x, y in dominance.pairs)
    return all(u[x] >= u[y] for x, y in dominance.pairs)


def mismatches(model: Model, data: ChoiceDataset) -> list[frozenset[str]]:
    """Observed menus where the model's prediction differs from the data."""
    menus = data.menus
    predicted = model.justified_sets(menus)
    return [m for m, j in zip(menus, predicted) if model.true_preference.best(j) != data.choice(m)]


def generate_dataset(
    model: Model,
    menus: Iterable[Iterable[str]],
    include_preference: bool = False,
) -> ChoiceDataset:
    """Apply the model to each menu; repeated menus collapse to one observation."""
    uniq = sorted({frozenset(m) for m in menus}, key=lambda m: (len(m), menu_key(m)))
    justified = model.justified_sets(uniq)
    obs = {m: model.true_preference.best(j) for m, j in zip(uniq, justified)}
    pref = model.true_preference if include_preference else None
    return ChoiceDataset(tuple(sorted(model.domain)), obs, pref)
