"""Choice and cone geometry for expected-utility justifications.

For an anchor lottery p, B(p) holds the lotteries that are no better than p
yet beat it in a binary choice, NB(p) the other lotteries no better than p,
and W(p) the lotteries at least as good as p that lose to it. Every set is a
cone at p determined by the direction q − p.
"""

from __future__ import annotations

import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .cones import check_size, cone_generators, in_cone, zero_sum_basis
from .lottery import (
    EPS,
    TIE_TOL,
    BSample,
    EUModel,
    Lottery,
    LotteryDataset,
    PrizeSpace,
    as_lottery,
    lottery_matrix,
    normalize,
)

B, NB, W, BETTER_CHOSEN, UNKNOWN = "B", "NB", "W", "better-chosen", "unknown"
SHRINK = 1e-7


class NumericError(RuntimeError):
    """A linear program that should always be solvable failed."""


def _lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, bounds=None):
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status not in (0, 2):
        raise NumericError(f"LP failed with status {res.status}: {res.message}")
    return res


# ------------------------------------------------------------------- FOSD


def fosd(p: Lottery, q: Lottery, prizes: PrizeSpace) -> bool:
    """Whether p first-order dominates q under a partial prize ranking.

    Decided by a transportation program: q's mass must be movable onto p's
    using only moves from a prize to itself or to a dominating prize.
    """
    p, q = as_lottery(p), as_lottery(q)
    n = prizes.size
    if len(p) != n or len(q) != n:
        raise ValueError("lottery length differs from the number of prizes")
    if p == q:
        return False
    arcs = [(i, i) for i in range(n)] + prizes.index_pairs()
    a_eq = np.zeros((2 * n, len(arcs)))
    for k, (i, j) in enumerate(arcs):
        a_eq[i, k] = 1.0
        a_eq[n + j, k] = 1.0
    b_eq = np.concatenate([p.vec, q.vec])
    res = _lp(np.zeros(len(arcs)), a_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * len(arcs))
    return res.status == 0


# ------------------------------------------------------------------ choice


def _hull_tops(vertices: np.ndarray, x: np.ndarray, i: int) -> bool:
    """Whether some point of the vertex hull ranks row i of x weakly first."""
    others = np.delete(x, i, axis=0)
    diffs = vertices @ (x[i] - others).T  # k × (rows - 1)
    k = vertices.shape[0]
    # variables: weights (k), t ; maximize t subject to weighted diff ≥ t
    a_ub = np.hstack([-diffs.T, np.ones((diffs.shape[1], 1))])
    b_ub = np.zeros(diffs.shape[1])
    a_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    c = np.zeros(k + 1)
    c[-1] = -1.0
    res = _lp(c, a_ub, b_ub, a_eq, [1.0], [(0, None)] * k + [(None, 1.0)])
    return res.status == 0 and -res.fun >= -TIE_TOL


def justified(model: EUModel, menu: Sequence[Lottery]) -> list[bool]:
    """Per lottery, whether some justifiable utility ranks it first in the menu.

    Vertices decide binary menus; larger menus need the whole hull, checked
    by a small LP when no vertex already tops the lottery.
    """
    x = lottery_matrix(menu)
    vals = model.vertices @ x.T
    tops = vals >= vals.max(axis=1, keepdims=True) - TIE_TOL
    out = list(np.any(tops, axis=0))
    if len(menu) > 2:
        for i, ok in enumerate(out):
            if not ok:
                out[i] = _hull_tops(model.vertices, x, i)
    return [bool(v) for v in out]


def eu_choose(model: EUModel, menu: Iterable[Lottery]) -> frozenset[Lottery]:
    menu = sorted({as_lottery(a) for a in menu})
    if not menu:
        raise ValueError("empty menu")
    if len(menu[0]) != model.n:
        raise ValueError("lottery length differs from the model")
    ok = justified(model, menu)
    cand = [a for a, j in zip(menu, ok) if j]
    util = lottery_matrix(cand) @ model.true_utility
    best = util.max()
    return frozenset(a for a, v in zip(cand, util) if v >= best - TIE_TOL)


def classify_many(model: EUModel, p: Lottery, qs: Sequence[Lottery]) -> list[str]:
    d = lottery_matrix(qs) - p.vec
    ud = d @ model.true_utility
    md = d @ model.vertices.T
    worse = ud <= TIE_TOL
    all_pos = np.all(md > TIE_TOL, axis=1)
    all_neg = np.all(md < -TIE_TOL, axis=1)
    out = []
    for w, ap, an, up in zip(worse, all_pos, all_neg, ud):
        if w and ap:
            out.append(B)
        elif w:
            out.append(NB)
        elif up >= -TIE_TOL and an:
            out.append(W)
        else:
            out.append(BETTER_CHOSEN)
    return out


def classify(model: EUModel, p: Lottery, q: Lottery) -> str:
    """Class of q relative to the anchor p: B, NB, W or better-chosen."""
    p, q = as_lottery(p), as_lottery(q)
    if p == q:
        raise ValueError("classification needs two distinct lotteries")
    return classify_many(model, p, [q])[0]


def b_sample(model: EUModel, p: Lottery, qs: Iterable[Lottery]) -> BSample:
    qs = [q for q in qs if q != p]
    return BSample(p, tuple(zip(qs, classify_many(model, p, qs))))


# ------------------------------------------------------- co(A) ∩ B(p)


@dataclass(frozen=True)
class CoIntersection:
    intersects: bool
    weights: tuple[float, ...] | None
    margin: float

    def to_json(self) -> dict:
        return {
            "intersects": self.intersects,
            "weights": None if self.weights is None else [round(w, 12) + 0.0 for w in self.weights],
            "margin": self.margin,
        }


def co_intersect_b(model: EUModel, menu: Sequence[Lottery], p: Lottery) -> CoIntersection:
    """Whether some mixture of the menu lies in B(p).

    Maximizes the smallest utility gain of the mixture over p across the
    vertices, keeping the mixture no better than p for the true utility.
    """
    p = as_lottery(p)
    menu = [as_lottery(a) for a in menu]
    if p in menu:
        raise ValueError("p must not belong to the menu")
    x = lottery_matrix(menu)
    gain = model.vertices @ (x - p.vec).T  # k × |A|
    k, a = gain.shape
    a_ub = np.vstack(
        [
            np.hstack([-gain, np.ones((k, 1))]),
            np.append((x - p.vec) @ model.true_utility, 0.0)[None, :],
        ]
    )
    b_ub = np.append(np.zeros(k), TIE_TOL)
    a_eq = np.append(np.ones(a), 0.0)[None, :]
    c = np.zeros(a + 1)
    c[-1] = -1.0
    res = _lp(c, a_ub, b_ub, a_eq, [1.0], [(0, None)] * a + [(None, None)])
    if res.status != 0:
        return CoIntersection(False, None, float("-inf"))
    t = -float(res.fun)
    weights = tuple(float(w) for w in res.x[:a])
    return CoIntersection(t > EPS, weights, t)


# --------------------------------------------------------------- polytopes


def _sub(rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(rows)
    return rows @ zero_sum_basis(rows.shape[1])


def _monotone_sub(prizes: PrizeSpace | None, n: int) -> np.ndarray:
    if prizes is None:
        return np.zeros((0, n - 1))
    return _sub(prizes.monotone_rows())


def _closure_b_generators(model: EUModel) -> np.ndarray:
    """Generators of the closed cone {d : u·d ≤ 0, m·d ≥ 0 for every vertex}."""
    verts = model.vertices[np.linalg.norm(model.vertices, axis=1) > TIE_TOL]
    rows = np.vstack([_sub(verts), -_sub(model.true_utility)]) if verts.size else -_sub(model.true_utility)
    return cone_generators(rows, model.n - 1)


def maximal_polytope(model: EUModel, p: Lottery | None = None) -> np.ndarray:
    """Vertices of the largest set of weakly monotone utilities inducing the
    same B(p): every monotone normal that weakly favours the closure of B(p)."""
    check_size(model.n)
    n = model.n
    k = _closure_b_generators(model)
    rows = np.vstack([k, _monotone_sub(model.prizes, n)]) if k.size else _monotone_sub(model.prizes, n)
    gens = cone_generators(rows, n - 1)
    return gens @ zero_sum_basis(n).T


def minimal_polytope(model: EUModel, p: Lottery | None = None) -> np.ndarray:
    """Vertices that cannot be written as a nonnegative combination of the
    other kept vertices and −u; dropping any of them would change B(p)."""
    check_size(model.n)
    verts = [v for v in model.vertices if np.linalg.norm(v) > TIE_TOL]
    neg_u = -model.true_utility
    keep: list[np.ndarray] = []
    for i, v in enumerate(verts):
        others = keep + verts[i + 1 :] + [neg_u]
        if not in_cone(v, np.array(others)):
            keep.append(v)
    if not keep:
        keep = verts[:1]
    return np.array(keep)


def construct_polytope(sample: BSample, true_utility: Sequence[float], prizes: PrizeSpace) -> EUModel:
    """Justifiable utilities read off a sample of B(p).

    Takes the monotone utilities weakly favouring every sampled B direction
    (an outer approximation that tightens as the sample grows), then nudges
    each vertex toward the middle of the cone by 1e-7 so sampled points are
    strictly preferred to p, as membership in B(p) requires.
    """
    n = prizes.size
    check_size(n)
    mono = _monotone_sub(prizes, n)
    dirs = [q.vec - sample.anchor.vec for q in sample.of_class(B)]
    if not dirs:
        warnings.warn("B(p) sample is empty; returning the full weakly monotone cone", stacklevel=2)
        rows = mono
    else:
        rows = np.vstack([_sub(np.array(dirs)), mono])
    gens = cone_generators(rows, n - 1)
    if gens.shape[0] == 0:
        raise ValueError("no weakly monotone utility favours every sampled B(p) direction")
    centre = gens.sum(axis=0)
    norm = np.linalg.norm(centre)
    if norm > TIE_TOL:
        gens = gens + SHRINK * centre / norm
    verts = gens @ zero_sum_basis(n).T
    return EUModel(np.asarray(true_utility, dtype=float), verts, prizes)


# ------------------------------------------------------- comparative statics


@dataclass(frozen=True)
class Strictness:
    relation: str
    witness: Lottery | None
    margin: float

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "witness": None if self.witness is None else self.witness.to_json(),
            "margin": self.margin,
        }


def _gap_direction(a: EUModel, b: EUModel, p: Lottery) -> tuple[np.ndarray | None, float]:
    """A direction in B_a(p) but outside B_b(p), with its margin."""
    n = a.n
    best_d, best_t = None, 0.0
    bounds = [(0.0 if p.probs[i] <= TIE_TOL else -1.0, 1.0) for i in range(n)] + [(None, 1.0)]
    for v in b.vertices:
        # variables d (n), t ; maximize t
        a_ub = np.vstack(
            [
                np.hstack([-a.vertices, np.ones((a.vertices.shape[0], 1))]),
                np.append(a.true_utility, 0.0)[None, :],
                np.append(v, 0.0)[None, :],
            ]
        )
        b_ub = np.zeros(a_ub.shape[0])
        a_eq = np.append(np.ones(n), 0.0)[None, :]
        c = np.zeros(n + 1)
        c[-1] = -1.0
        res = _lp(c, a_ub, b_ub, a_eq, [0.0], bounds)
        if res.status == 0 and -res.fun > best_t:
            best_t, best_d = -float(res.fun), res.x[:n]
    if best_t > EPS:
        return best_d, best_t
    return None, best_t


def _step_into_simplex(p: Lottery, d: np.ndarray) -> Lottery:
    neg = d < -TIE_TOL
    s = 1.0 if not neg.any() else float(np.min(p.vec[neg] / -d[neg]))
    return Lottery(tuple(p.vec + 0.5 * min(s, 1.0) * d))


def compare_strictness(model1: EUModel, model2: EUModel, p: Lottery) -> Strictness:
    """Compare B_1(p) and B_2(p). A larger B(p) means fewer justifications,
    so model 1 is stricter when B_1(p) strictly contains B_2(p)."""
    p = as_lottery(p)
    if not np.allclose(model1.true_utility, model2.true_utility, atol=1e-9):
        raise ValueError("the models have different true utilities")
    d12, t12 = _gap_direction(model1, model2, p)
    d21, t21 = _gap_direction(model2, model1, p)
    if d12 is not None and d21 is None:
        return Strictness("1-stricter", _step_into_simplex(p, d12), t12)
    if d21 is not None and d12 is None:
        return Strictness("2-stricter", _step_into_simplex(p, d21), t21)
    if d12 is None and d21 is None:
        return Strictness("equal", None, max(t12, t21))
    return Strictness("incomparable", _step_into_simplex(p, d12), min(t12, t21))


# -------------------------------------------------------------- utilities


def joint_prediction(
    model: EUModel, a: Iterable[Lottery], b: Iterable[Lottery]
) -> set[tuple[Lottery, Lottery]]:
    """Pairs (x, y) whose even mixture is chosen from the mixed menu ½A + ½B."""
    a = sorted({as_lottery(x) for x in a})
    b = sorted({as_lottery(y) for y in b})
    if not a or not b:
        raise ValueError("empty menu")
    mixes = {(x, y): x.mix(y, 0.5) for x in a for y in b}
    chosen = eu_choose(model, set(mixes.values()))
    return {pair for pair, m in mixes.items() if m in chosen}


def eu_generate(
    model: EUModel,
    menus: Iterable[Iterable[Lottery]],
    prizes: PrizeSpace | None = None,
    include_utility: bool = True,
) -> LotteryDataset:
    prizes = prizes or model.prizes
    if prizes is None:
        raise ValueError("a prize space is needed to build a dataset")
    obs = []
    seen = set()
    for m in menus:
        m = tuple(sorted({as_lottery(x) for x in m}))
        if m in seen or len(m) < 2:
            continue
        seen.add(m)
        obs.append((m, eu_choose(model, m)))
    u = np.array(model.raw["true_utility"]) if include_utility else None
    return LotteryDataset(prizes, tuple(obs), u)


def binary_menus(p: Lottery, qs: Iterable[Lottery]) -> list[tuple[Lottery, Lottery]]:
    return [(p, q) for q in qs if q != p]


def utility_angle(u: Sequence[float], v: Sequence[float]) -> float:
    """Angle in degrees between two utilities after mean-centring."""
    a, b = normalize(u), normalize(v)
    return float(np.degrees(np.arccos(np.clip(a @ b, -1.0, 1.0))))
