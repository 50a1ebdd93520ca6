"""Brute-force ground truth for small domains, plus seeded generators.

The oracle works on bitmasks and does not use the constraint machinery of
the other modules. Given a true preference, an order is *safe* when in every
observed menu it ranks first either a chosen item or an item strictly worse
than the choice. Any justification set of any representation consists of
safe orders, and adding safe orders never hurts. So a representation exists
iff the safe orders together justify every chosen item. At n = 3 this
shortcut is confirmed against all 63 nonempty sets of orders.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product
from math import factorial
from typing import Any

import numpy as np

from . import forward
from .axioms import check_iua, check_optimization
from .core import ChoiceDataset, TotalOrder, WeakOrder, all_menus
from .eucase.lottery import EUModel, PrizeSpace

ORDER_CAP = 8
CANDIDATE_CAP = 4
MAXIMAL_CAP = 7


def enumerate_orders(domain: Iterable[str]) -> Iterator[TotalOrder]:
    """All total orders of the domain in lexicographic order of their rankings."""
    items = sorted(set(domain))
    if len(items) > ORDER_CAP:
        raise ValueError(f"order enumeration is capped at {ORDER_CAP} items")
    for perm in permutations(items):
        yield TotalOrder(perm)


# ------------------------------------------------------------ bitmask engine


@lru_cache(maxsize=8)
def _tops(n: int) -> np.ndarray:
    """tops[k, mask] = index of the item order k ranks first in mask (-1 for 0)."""
    perms = np.array(list(permutations(range(n))), dtype=np.int64).reshape(-1, n)
    ranks = np.empty_like(perms)
    ranks[np.arange(perms.shape[0])[:, None], perms] = np.arange(n)
    out = np.full((perms.shape[0], 1 << n), -1, dtype=np.int64)
    for mask in range(1, 1 << n):
        bits = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        out[:, mask] = np.where(bits, ranks, n + 1).argmin(axis=1)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class _Encoded:
    items: tuple[str, ...]
    menus: np.ndarray
    choices: np.ndarray

    @classmethod
    def of(cls, data: ChoiceDataset) -> _Encoded:
        items = tuple(sorted(data.domain))
        idx = {x: i for i, x in enumerate(items)}
        menus = [sum(1 << idx[x] for x in m) for m in data.menus]
        choices = [sum(1 << idx[x] for x in data.choice(m)) for m in data.menus]
        return cls(items, np.array(menus, dtype=np.int64), np.array(choices, dtype=np.int64))

    def tiers(self, pref: WeakOrder) -> np.ndarray:
        return np.array([pref.rank(x) for x in self.items], dtype=np.int64)


def _chosen_tier(enc: _Encoded, tiers: np.ndarray) -> np.ndarray | None:
    """Tier of the chosen items per menu, or None if some choice mixes tiers."""
    out = []
    for c in enc.choices:
        ts = {int(tiers[i]) for i in range(len(enc.items)) if (c >> i) & 1}
        if len(ts) != 1:
            return None
        out.append(ts.pop())
    return np.array(out, dtype=np.int64)


def safe_orders(enc: _Encoded, tiers: np.ndarray) -> np.ndarray | None:
    """Mask of safe orders (None when the choice data mixes tiers)."""
    chosen = _chosen_tier(enc, tiers)
    if chosen is None:
        return None
    top = _tops(len(enc.items))[:, enc.menus]
    in_choice = ((enc.choices[None, :] >> top) & 1).astype(bool)
    worse = tiers[top] > chosen[None, :]
    return np.all(in_choice | worse, axis=1)


def _justified_union(enc: _Encoded, mask: np.ndarray) -> np.ndarray:
    top = _tops(len(enc.items))[mask][:, enc.menus]
    if top.shape[0] == 0:
        return np.zeros(enc.menus.shape[0], dtype=np.int64)
    return np.bitwise_or.reduce(np.left_shift(1, top), axis=0)


def _reproduces(enc: _Encoded, tiers: np.ndarray, mask: np.ndarray) -> bool:
    """Forward evaluation of (tiers, selected orders) against every observation."""
    union = _justified_union(enc, mask)
    n = len(enc.items)
    for j, u in enumerate(union):
        if u == 0:
            return False
        members = [i for i in range(n) if (int(u) >> i) & 1]
        best = min(int(tiers[i]) for i in members)
        chosen = sum(1 << i for i in members if tiers[i] == best)
        if chosen != enc.choices[j]:
            return False
    return True


def _maximal_works(enc: _Encoded, tiers: np.ndarray) -> np.ndarray | None:
    safe = safe_orders(enc, tiers)
    if safe is None or not safe.any():
        return None
    return safe if _reproduces(enc, tiers, safe) else None


def _exhaustive_works(enc: _Encoded, tiers: np.ndarray) -> bool:
    count = _tops(len(enc.items)).shape[0]
    for bits in range(1, 1 << count):
        mask = np.array([(bits >> k) & 1 for k in range(count)], dtype=bool)
        if _reproduces(enc, tiers, mask):
            return True
    return False


def _order_of(items: tuple[str, ...], k: int) -> TotalOrder:
    perm = list(permutations(range(len(items))))[k]
    return TotalOrder(tuple(items[i] for i in perm))


@dataclass
class BruteForceResult:
    representable: bool
    model: forward.JustifiabilityModel | None = None
    true_preference: WeakOrder | None = None
    working_preferences: list[WeakOrder] = field(default_factory=list)
    exhaustive_agrees: bool | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "representable": self.representable,
            "true_preference": None if self.true_preference is None else self.true_preference.to_json(),
            "justification_count": None if self.model is None else len(self.model.justifications),
            "exhaustive_agrees": self.exhaustive_agrees,
        }


def brute_force_representable(data: ChoiceDataset, true_pref: WeakOrder | None = None) -> BruteForceResult:
    """Decide representability by brute force.

    With a true preference, domains up to seven items are handled through the
    maximal safe set. Without one, every strict order of at most four items is
    tried as the true preference. At three items the answer is also checked
    against all 63 nonempty justification sets.
    """
    n = len(data.domain)
    if true_pref is None and n > CANDIDATE_CAP:
        raise ValueError(f"unknown-preference search is capped at {CANDIDATE_CAP} items")
    if n > MAXIMAL_CAP:
        raise ValueError(f"brute force is capped at {MAXIMAL_CAP} items")
    enc = _Encoded.of(data)
    prefs = [true_pref] if true_pref is not None else [o.as_weak() for o in enumerate_orders(data.domain)]
    result = BruteForceResult(False)
    exhaustive_any = False
    for pref in prefs:
        tiers = enc.tiers(pref)
        mask = _maximal_works(enc, tiers)
        if n == 3:
            ex = _exhaustive_works(enc, tiers)
            exhaustive_any |= ex
            if ex != (mask is not None):
                result.exhaustive_agrees = False
        if mask is not None:
            result.working_preferences.append(pref)
            if not result.representable:
                orders = tuple(_order_of(enc.items, k) for k in np.flatnonzero(mask))
                result.representable = True
                result.true_preference = pref
                result.model = forward.JustifiabilityModel(pref, orders)
    if n == 3 and result.exhaustive_agrees is None:
        result.exhaustive_agrees = exhaustive_any == result.representable
    return result


def union_of_justifications(data: ChoiceDataset) -> list[TotalOrder]:
    """Every order used by some representation, over all strict true preferences."""
    enc = _Encoded.of(data)
    seen = np.zeros(_tops(len(enc.items)).shape[0], dtype=bool)
    for pref in (o.as_weak() for o in enumerate_orders(data.domain)):
        mask = _maximal_works(enc, enc.tiers(pref))
        if mask is not None:
            seen |= mask
    return [_order_of(enc.items, k) for k in np.flatnonzero(seen)]


def spot_check_subsets(data: ChoiceDataset, pref: WeakOrder, count: int = 10_000, seed: int = 0) -> int:
    """Random justification sets that reproduce the data although the maximal
    safe set does not; the count should be zero."""
    enc = _Encoded.of(data)
    tiers = enc.tiers(pref)
    if _maximal_works(enc, tiers) is not None:
        return 0
    rng = np.random.default_rng(seed)
    k = _tops(len(enc.items)).shape[0]
    bad = 0
    for _ in range(count):
        mask = rng.random(k) < rng.random()
        if mask.any() and _reproduces(enc, tiers, mask):
            bad += 1
    return bad


# ------------------------------------------------------------- generators


def enumerate_choice_functions(domain: Iterable[str]) -> Iterator[ChoiceDataset]:
    """All 24 choice functions on the menus of a three-item domain."""
    items = sorted(set(domain))
    if len(items) != 3:
        raise ValueError("choice-function enumeration needs exactly three items")
    menus = all_menus(items)
    for picks in product(*(sorted(m) for m in menus)):
        yield ChoiceDataset.from_choices(dict(zip((tuple(sorted(m)) for m in menus), picks)), items)


def item_names(n: int) -> list[str]:
    return [chr(ord("a") + i) for i in range(n)]


def random_choice_function(rng: np.random.Generator, n: int) -> ChoiceDataset:
    items = item_names(n)
    obs = {}
    for m in all_menus(items):
        ms = sorted(m)
        obs[tuple(ms)] = ms[int(rng.integers(len(ms)))]
    return ChoiceDataset.from_choices(obs, items)


def random_model(seed: int, domain_size: int, justification_count: int) -> forward.JustifiabilityModel:
    """Seeded random model with a strict true preference."""
    rng = np.random.default_rng(seed)
    items = item_names(domain_size)
    orders = list(permutations(items))
    if not 1 <= justification_count <= len(orders):
        raise ValueError("justification count out of range")
    pref = TotalOrder(tuple(items[i] for i in rng.permutation(domain_size)))
    picks = rng.choice(len(orders), size=justification_count, replace=False)
    return forward.JustifiabilityModel(pref.as_weak(), tuple(TotalOrder(orders[i]) for i in sorted(picks)))


def random_nested_models(seed: int, domain_size: int) -> tuple[forward.JustifiabilityModel, forward.JustifiabilityModel]:
    """Low- and high-pressure models sharing a strict true preference, with the
    high-pressure justifications a subset of the low-pressure ones."""
    rng = np.random.default_rng(seed)
    low = random_model(seed, domain_size, int(rng.integers(1, min(12, factorial(domain_size)) + 1)))
    keep = rng.random(len(low.justifications)) < 0.5
    keep[int(rng.integers(len(keep)))] = True
    high = tuple(o for o, k in zip(low.justifications, keep) if k)
    return low, forward.JustifiabilityModel(low.true_preference, high)


def random_eu_model(seed: int, prize_count: int, vertex_count: int) -> EUModel:
    """Seeded EU model; monotonicity is enforced by rejection sampling."""
    rng = np.random.default_rng(seed)
    names = [f"z{i}" for i in range(prize_count)]
    pairs = {(names[-1], names[0])}
    for i in range(1, prize_count):
        for j in range(i):
            if rng.random() < 0.3:
                pairs.add((names[i], names[j]))
    prizes = PrizeSpace.of(names, pairs)
    while True:
        u = rng.random(prize_count)
        if prizes.is_monotone(u, strict=True):
            break
    verts = []
    while len(verts) < vertex_count:
        m = rng.random(prize_count)
        if prizes.is_monotone(m):
            verts.append(m)
    return EUModel(u, np.array(verts), prizes)


def fosd_by_upsets(p: Iterable[float], q: Iterable[float], prizes: PrizeSpace, tol: float = 1e-12) -> bool:
    """Dominance via up-sets: p puts at least as much mass as q on every set
    of prizes closed under dominance, and p differs from q."""
    p, q = np.asarray(list(p), dtype=float), np.asarray(list(q), dtype=float)
    if np.allclose(p, q, atol=1e-10):
        return False
    return all(p[list(u)].sum() >= q[list(u)].sum() - tol for u in prizes.up_sets() if u)


# ----------------------------------------------------------------- sweeps


@dataclass
class SweepReport:
    name: str
    instances_checked: int = 0
    agreements: int = 0
    counterexamples: list[dict[str, Any]] = field(default_factory=list)
    seed: int | None = None

    def record(self, data: ChoiceDataset, expected: Any, got: Any, extra: dict | None = None) -> None:
        self.instances_checked += 1
        if expected == got:
            self.agreements += 1
        else:
            entry = {"dataset": data.to_json(), "expected": expected, "got": got}
            if extra:
                entry.update(extra)
            self.counterexamples.append(entry)

    @property
    def ok(self) -> bool:
        return not self.counterexamples and self.agreements == self.instances_checked

    def to_json(self) -> dict[str, Any]:
        return {
            "sweep": self.name,
            "seed": self.seed,
            "instances_checked": self.instances_checked,
            "agreements": self.agreements,
            "counterexamples": self.counterexamples,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def sweep_iua_equivalence(n: int = 3) -> SweepReport:
    """Known preference: IUA and Optimization hold iff brute force finds a model."""
    rep = SweepReport(f"known-preference equivalence, n={n}")
    items = item_names(n)
    for data in enumerate_choice_functions(items):
        for order in enumerate_orders(items):
            pref = order.as_weak()
            got = not check_iua(data, pref) and not check_optimization(data, pref)
            expected = brute_force_representable(data, pref).representable
            rep.record(data, expected, got, {"true_preference": order.to_json()})
    return rep


def sweep_iea_equivalence(n: int = 3) -> SweepReport:
    """Unknown preference: IEA holds iff brute force finds a model."""
    from .revealed import check_iea

    rep = SweepReport(f"unknown-preference equivalence, n={n}")
    for data in enumerate_choice_functions(item_names(n)):
        rep.record(data, brute_force_representable(data).representable, not check_iea(data))
    return rep


def random_corpus(count: int, n: int = 4, seed: int = 0) -> list[ChoiceDataset]:
    rng = np.random.default_rng(seed)
    return [random_choice_function(rng, n) for _ in range(count)]


def model_corpus(count: int, n: int = 4, seed: int = 0) -> list[ChoiceDataset]:
    """Full choice functions generated by random models, all representable."""
    rng = np.random.default_rng(seed)
    menus = all_menus(item_names(n))
    out = []
    for _ in range(count):
        k = int(rng.integers(1, 5))
        model = random_model(int(rng.integers(2**31)), n, k)
        out.append(forward.generate_dataset(model, menus))
    return out


def sweep_random_fit(count: int = 1000, n: int = 4, seed: int = 0) -> SweepReport:
    """Canonical fit succeeds iff the brute-force search does; on success the
    canonical preference extends the revealed preference P."""
    from .revealed import fit, revealed_P

    rep = SweepReport(f"random fit equivalence, n={n}", seed=seed)
    for data in random_corpus(count, n, seed) + model_corpus(count // 4, n, seed):
        report = fit(data)
        expected = brute_force_representable(data).representable
        rep.record(data, expected, report.ok)
        if report.ok:
            p_rel, _ = revealed_P(data)
            pref = report.true_preference
            if not all(pref.prefers(a, b) for a, b in p_rel):
                rep.counterexamples.append({"dataset": data.to_json(), "expected": "extends P", "got": pref.to_json()})
    return rep


def sweep_revealed_exclusion(corpus: Iterable[ChoiceDataset]) -> SweepReport:
    """For representable data: a is revealed excluded by part of B iff no
    justification of any representation ranks a above all of B."""
    from .revealed import fit

    rep = SweepReport("revealed exclusion equivalence")
    for data in corpus:
        report = fit(data)
        if not report.ok:
            continue
        orders = union_of_justifications(data)
        items = sorted(data.domain)
        for m in all_menus(items, min_size=1):
            for a in items:
                if a in m:
                    continue
                got = any(c.excluded == a and c.menu <= m for c in report.exclusions)
                expected = not any(all(o.prefers(a, b) for b in m) for o in orders)
                rep.record(data, expected, got, {"B": sorted(m), "a": a})
    return rep


def sweep_second_best(corpus: Iterable[ChoiceDataset]) -> SweepReport:
    """On almost-WARP sets the full-set choice is second best under the
    canonical preference; a third-or-worse choice must fail IEA."""
    from .revealed import check_iea, detect_almost_warp, fit

    rep = SweepReport("almost-WARP second-best")
    for data in corpus:
        sets = detect_almost_warp(data)
        if not sets:
            continue
        report = fit(data)
        iea_fails = bool(check_iea(data))
        for a in sets:
            chosen = data.single(a)
            pairwise = sorted(a, key=lambda x: -sum(data.single((x, y)) == x for y in a if y != x))
            position = pairwise.index(chosen)
            if position >= 2:
                rep.record(data, True, iea_fails, {"A": sorted(a), "case": "third or worse"})
            elif report.ok:
                restricted = [x for x in report.true_preference.ranking if x in a]
                rep.record(data, chosen, restricted[1], {"A": sorted(a), "case": "representable"})
    return rep
