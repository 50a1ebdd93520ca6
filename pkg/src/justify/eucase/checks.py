"""Behavioural checks for the expected-utility case on lottery datasets."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Sequence
from itertools import combinations
from typing import Any

import numpy as np
from scipy.optimize import linprog

from ..axioms import Findings, Violation, check_iua, check_optimization
from ..core import ChoiceDataset, WeakOrder
from .geometry import fosd
from .lottery import TIE_TOL, Lottery, LotteryDataset, lottery_matrix

MIXTURE_PAIR_CAP = 500


def _tokens(lotteries: Sequence[Lottery]) -> dict[Lottery, str]:
    width = len(str(len(lotteries)))
    return {a: f"L{i:0{width}d}" for i, a in enumerate(lotteries)}


def utility_order(lotteries: Sequence[Lottery], u: np.ndarray, names: dict[Lottery, str]) -> WeakOrder:
    """Weak order of lotteries by expected utility, ties within tolerance."""
    vals = sorted(((float(a.vec @ u), names[a]) for a in lotteries), key=lambda t: (-t[0], t[1]))
    tiers: list[list[str]] = []
    last = None
    for v, name in vals:
        if last is not None and last - v <= TIE_TOL:
            tiers[-1].append(name)
        else:
            tiers.append([name])
            last = v
    return WeakOrder(tuple(frozenset(t) for t in tiers))


def tokenized(data: LotteryDataset) -> tuple[ChoiceDataset, dict[Lottery, str]]:
    """The dataset with each lottery replaced by a string token."""
    lots = data.lotteries()
    names = _tokens(lots)
    obs = {frozenset(names[a] for a in m): frozenset(names[a] for a in c) for m, c in data.observations}
    return ChoiceDataset(tuple(names.values()), obs), names


def _detokenize(obj: Any, back: dict[str, Lottery]) -> Any:
    if isinstance(obj, str) and obj in back:
        return back[obj].to_json()
    if isinstance(obj, list):
        return [_detokenize(x, back) for x in obj]
    if isinstance(obj, dict):
        return {k: _detokenize(v, back) for k, v in obj.items()}
    return obj


def _in_hull(q: Lottery, menu: Sequence[Lottery]) -> bool:
    if q in menu:
        return True
    if len(menu) == 2:
        # segment: project q onto the line through the two lotteries
        a, d = menu[0].vec, menu[1].vec - menu[0].vec
        t = float(d @ (q.vec - a)) / float(d @ d)
        return -1e-9 <= t <= 1 + 1e-9 and bool(np.allclose(a + t * d, q.vec, atol=1e-9))
    x = lottery_matrix(menu)
    a_eq = np.vstack([x.T, np.ones((1, len(menu)))])
    b_eq = np.append(q.vec, 1.0)
    res = linprog(np.zeros(len(menu)), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * len(menu), method="highs")
    return res.status == 0


# ------------------------------------------------------------ independence


def _direction_key(a: Lottery, b: Lottery) -> tuple[tuple[float, ...], float, Lottery, Lottery]:
    d = a.vec - b.vec
    nz = np.flatnonzero(np.abs(d) > TIE_TOL)
    if d[nz[0]] < 0:
        a, b, d = b, a, -d
    length = float(np.linalg.norm(d))
    return tuple(np.round(d / length, 8) + 0.0), length, a, b


def _mixture_base(hi: tuple[Lottery, Lottery], lo: tuple[Lottery, Lottery], alpha: float) -> bool:
    """Whether lo = alpha * hi + (1 - alpha) * r for some lottery r."""
    r = (lo[0].vec - alpha * hi[0].vec) / (1 - alpha)
    return bool(r.min() >= -1e-9)


def check_independence(data: LotteryDataset) -> Findings:
    """Mixing a menu with a common lottery must mix the choice the same way.

    Binary menus whose differences point the same way are mixtures of one
    another whenever the implied common lottery exists.
    """
    groups: dict[tuple[float, ...], list] = defaultdict(list)
    for (a, b), c in data.binary():
        key, length, hi_a, hi_b = _direction_key(a, b)
        groups[key].append((length, hi_a, hi_b, c))
    violations = []
    checked = vacuous = 0
    for key in sorted(groups):
        items = sorted(groups[key], key=lambda t: (t[0], t[1]))
        for (l1, a1, b1, c1), (l2, a2, b2, c2) in combinations(items, 2):
            if l2 - l1 <= TIE_TOL:
                continue
            alpha = l1 / l2
            if not _mixture_base((a2, b2), (a1, b1), alpha):
                vacuous += 1
                continue
            checked += 1
            if (a2 in c2, b2 in c2) != (a1 in c1, b1 in c1):
                violations.append(
                    Violation(
                        "Independence",
                        {"A": [a2.to_json(), b2.to_json()], "mixed": [a1.to_json(), b1.to_json()], "alpha": round(alpha, 12)},
                        "mixing a binary menu with a common lottery changed which side is chosen",
                    )
                )
    notes = []
    larger = [(m, c) for m, c in data.observations if len(m) > 2]
    if larger:
        notes.append(f"{len(larger)} menus with more than two lotteries are not compared for mixtures")
    return Findings(violations, checked, vacuous, notes)


# ------------------------------------------------------------ monotonicity


def _dominance_candidates(data: LotteryDataset):
    ups = [sorted(u) for u in data.prizes.up_sets() if u]
    for m, c in data.observations:
        x = lottery_matrix(m)
        mass = np.array([x[:, u].sum(axis=1) for u in ups]).T  # lotteries × up-sets
        for i, j in ((i, j) for i in range(len(m)) for j in range(len(m)) if i != j):
            if np.all(mass[i] >= mass[j] - 1e-12) and fosd(m[i], m[j], data.prizes):
                yield m, c, m[i], m[j]


def check_monotonicity(data: LotteryDataset, true_utility: np.ndarray | None = None) -> Findings:
    """A dominated lottery is irrelevant: dropping it never changes the choice.

    With a true utility, also require it to rank every dominance pair strictly.
    """
    violations = []
    checked = vacuous = 0
    if true_utility is not None and not data.prizes.is_monotone(true_utility, strict=True):
        violations.append(
            Violation("Monotonicity", {"true_utility": [float(x) for x in true_utility]}, "true utility does not strictly respect prize dominance")
        )
    index = data.index()
    for m, c, p, q in _dominance_candidates(data):
        rest = frozenset(m) - {q}
        cr = rest if len(rest) == 1 else index.get(rest)
        if cr is None:
            vacuous += 1
            continue
        checked += 1
        if cr != c:
            violations.append(
                Violation(
                    "Monotonicity",
                    {"A": [a.to_json() for a in m], "dominant": p.to_json(), "dominated": q.to_json()},
                    "removing a dominated lottery changed the choice",
                )
            )
    return Findings(violations, checked, vacuous)


# --------------------------------------------------------------- convexity


def check_convexity(data: LotteryDataset, true_utility: np.ndarray) -> Findings:
    """If some mixture of A beats p pairwise while no better than p, p is not
    chosen from A ∪ {p}. Membership in B(p) is read from observed binary
    menus; unobserved comparisons count as undecided."""
    u = np.asarray(true_utility, dtype=float)
    beats: dict[Lottery, list[Lottery]] = defaultdict(list)
    for (a, b), c in data.binary():
        for p, q in ((a, b), (b, a)):
            if c == frozenset([q]) and q.vec @ u <= p.vec @ u + TIE_TOL:
                beats[p].append(q)
    violations = []
    checked = vacuous = 0
    covered = 0
    for m, c in data.observations:
        if len(m) < 3:
            continue
        for p in m:
            rest = [a for a in m if a != p]
            hit = next((q for q in beats.get(p, ()) if _in_hull(q, rest)), None)
            if p in c:
                if hit is None:
                    vacuous += 1
                    continue
                checked += 1
                violations.append(
                    Violation(
                        "Convexity",
                        {"A": [a.to_json() for a in rest], "p": p.to_json(), "mixture": hit.to_json()},
                        "a mixture of the menu beats p pairwise while no better than p, yet p is chosen",
                    )
                )
            elif all(p.vec @ u >= x.vec @ u - TIE_TOL for x in c):
                # rest excludes p: a witnessing mixture is expected but may be unobserved
                covered += hit is not None
    notes = [f"{covered} exclusions matched by an observed mixture in B(p)"] if covered else []
    return Findings(violations, checked, vacuous, notes)


# --------------------------------------------------------------- combined


def check_eu_axioms(
    data: LotteryDataset, true_utility: Sequence[float] | None = None
) -> dict[str, Findings]:
    """Run every EU check; keys name the axioms.

    Optimization, IUA and Convexity need a true utility (argument or the one
    stored in the dataset); without it they are skipped with a note.
    """
    u = true_utility if true_utility is not None else data.true_utility
    u = None if u is None else np.asarray(u, dtype=float)
    out: dict[str, Findings] = {}
    if u is not None:
        tok, names = tokenized(data)
        back = {v: k for k, v in names.items()}
        pref = utility_order(data.lotteries(), u, names)
        for name, found in (("Optimization", check_optimization(tok, pref)), ("IUA", check_iua(tok, pref))):
            out[name] = Findings(
                [Violation(v.axiom, _detokenize(v.witness, back), v.message) for v in found],
                found.checked,
                found.vacuous,
                found.notes,
            )
        out["Convexity"] = check_convexity(data, u)
    else:
        skipped = Findings(notes=["no true utility given"])
        out["Optimization"] = out["IUA"] = out["Convexity"] = skipped
    out["Independence"] = check_independence(data)
    out["Monotonicity"] = check_monotonicity(data, u)
    return out


def all_violations(results: dict[str, Findings]) -> list[Violation]:
    return [v for k in sorted(results) for v in results[k]]
