"""Identify the true utility from binary choices around an anchor lottery.

Choosing both lotteries from {p, q} reveals indifference, so tie directions
span the indifference hyperplane. The sign is the one that makes the sampled
B(p) convex. When the lotteries q with p ∈ c({p, q}) form a half-space, a
single justification explains everything and the true utility is only
pinned down to a family.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import Delaunay, QhullError

from .cones import cone_generators, zero_sum_basis
from .geometry import BETTER_CHOSEN, NB, B, W
from .lottery import (
    EPS,
    TIE_TOL,
    BSample,
    Lottery,
    LotteryDataset,
    PrizeSpace,
    normalize,
)

BOUNDARY_TOL = 1e-9


class IdentificationError(ValueError):
    """The data cannot single out a true utility or a family of them."""


@dataclass
class Recovery:
    direction: np.ndarray
    unique: bool
    anchor: Lottery
    candidates: list[np.ndarray] = field(default_factory=list)
    ties: int = 0
    orientation_conflicts: tuple[int, int] | None = None
    prizes: PrizeSpace | None = None
    # family constraints: (direction, +1) needs u·d > 0, (direction, -1) needs u·d ≤ 0
    boundary: list[tuple[np.ndarray, int]] = field(default_factory=list)
    tie_dirs: np.ndarray | None = None

    def admits(self, u: np.ndarray, tol: float = 1e-7) -> bool:
        """Whether a utility belongs to the recovered set of candidates."""
        v = normalize(u)
        if self.unique:
            return bool(v @ self.direction >= 1 - tol)
        if self.prizes is not None and not self.prizes.is_monotone(v, strict=True):
            return False
        if self.tie_dirs is not None and self.tie_dirs.size and np.max(np.abs(self.tie_dirs @ v)) > tol:
            return False
        for d, sign in self.boundary:
            if sign > 0 and not v @ d > tol:
                return False
            if sign < 0 and not v @ d <= tol:
                return False
        return True

    def to_json(self) -> dict[str, Any]:
        r = lambda a: [round(float(x), 12) + 0.0 for x in a]
        return {
            "utility_direction": r(self.direction),
            "unique": self.unique,
            "anchor": self.anchor.to_json(),
            "ties": self.ties,
            "orientation_conflicts": None if self.orientation_conflicts is None else list(self.orientation_conflicts),
            "candidates": [r(c) for c in self.candidates],
        }


def _anchor(data: LotteryDataset) -> Lottery:
    counts = Counter(x for (a, b), _ in data.binary() for x in (a, b))
    if not counts:
        raise IdentificationError("no binary observations")
    top = max(counts.values())
    return min(x for x, k in counts.items() if k == top)


def _labelled(data: LotteryDataset, p: Lottery) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Directions q − p split into ties, q-only choices and p-only choices."""
    ties, qs, ps = [], [], []
    for (a, b), c in data.binary():
        if p not in (a, b):
            continue
        q = b if a == p else a
        d = q.vec - p.vec
        if len(c) == 2:
            ties.append(d)
        elif q in c:
            qs.append(d)
        else:
            ps.append(d)
    n = len(p)
    as_arr = lambda rows: np.array(rows) if rows else np.zeros((0, n))
    return as_arr(ties), as_arr(qs), as_arr(ps)


def _inside_count(points: np.ndarray, hull_pts: np.ndarray) -> int:
    """How many points lie in the convex hull of hull_pts."""
    if points.shape[0] == 0 or hull_pts.shape[0] == 0:
        return 0
    dim = hull_pts.shape[1]
    if hull_pts.shape[0] > dim:
        try:
            tri = Delaunay(hull_pts)
            return int(np.sum(tri.find_simplex(points, tol=1e-12) >= 0))
        except QhullError:
            pass
    count = 0
    a_eq = np.vstack([hull_pts.T, np.ones((1, hull_pts.shape[0]))])
    for x in points:
        res = linprog(np.zeros(hull_pts.shape[0]), A_eq=a_eq, b_eq=np.append(x, 1.0), bounds=[(0, None)] * hull_pts.shape[0], method="highs")
        count += res.status == 0
    return count


def _conflicts(u: np.ndarray, qs: np.ndarray, ps: np.ndarray, basis: np.ndarray) -> int:
    """NB points lying inside the hull of the B points that u would induce."""
    b_pts = qs[qs @ u < -TIE_TOL] @ basis
    nb_pts = ps[ps @ u < -TIE_TOL] @ basis
    return _inside_count(nb_pts, b_pts)


def _unit(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def recover_true_preference(
    data: LotteryDataset,
    anchor: Lottery | None = None,
    samples: int = 200,
    seed: int = 0,
) -> Recovery:
    """Recover the true utility direction from binary choices around ``anchor``."""
    p = anchor if anchor is not None else _anchor(data)
    n = data.prizes.size
    basis = zero_sum_basis(n)
    ties, qs, ps = _labelled(data, p)
    if ties.shape[0] + qs.shape[0] + ps.shape[0] == 0:
        raise IdentificationError("no binary observations contain the anchor")

    if ties.shape[0]:
        sub = ties @ basis
        _, s, vt = np.linalg.svd(sub)
        rank = int(np.sum(s > 1e-9 * max(1.0, s[0])))
        if rank < n - 2:
            raise IdentificationError(f"tie directions span {rank} dimensions, {n - 2} needed")
        u = normalize(vt[-1] @ basis.T)
        c_pos = _conflicts(u, qs, ps, basis)
        c_neg = _conflicts(-u, qs, ps, basis)
        if c_neg < c_pos or (c_neg == c_pos and data.prizes.is_monotone(-u, strict=True) and not data.prizes.is_monotone(u, strict=True)):
            u = -u
        return Recovery(u, True, p, [u], ties.shape[0], (c_pos, c_neg), data.prizes, [], _unit(ties))

    # no indifference observed: is {q : p ∈ c({p, q})} a half-space?
    rows = np.vstack([qs, -ps]) @ basis
    gens = cone_generators(rows, n - 1)
    if gens.shape[0] == 0:
        raise IdentificationError("no indifference observed and the choice pattern is not a half-space")
    unit_q, unit_p = _unit(qs), _unit(ps)
    best, best_hits = None, -1
    for g in gens:
        w = g @ basis.T
        hits = int(np.sum(np.abs(unit_q @ w) <= BOUNDARY_TOL) + np.sum(np.abs(unit_p @ w) <= BOUNDARY_TOL))
        if hits > best_hits:
            best, best_hits = w, hits
    boundary = [(d, 1) for d in unit_q[np.abs(unit_q @ best) <= BOUNDARY_TOL]]
    boundary += [(d, -1) for d in unit_p[np.abs(unit_p @ best) <= BOUNDARY_TOL]]
    centre = _central_member(data.prizes, boundary, n)
    if centre is None:
        raise IdentificationError("no strictly monotone utility is consistent with the boundary choices")
    rec = Recovery(centre, False, p, [centre], 0, None, data.prizes, boundary, np.zeros((0, n)))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        cand = normalize(rng.standard_normal(n - 1) @ basis.T)
        if rec.admits(cand):
            rec.candidates.append(cand)
    return rec


def _central_member(prizes: PrizeSpace, boundary: list[tuple[np.ndarray, int]], n: int) -> np.ndarray | None:
    """Utility maximizing the smallest strict margin among family constraints."""
    strict = [r for r in prizes.monotone_rows()] + [d for d, s in boundary if s > 0]
    weak = [-d for d, s in boundary if s < 0]
    a_ub = [np.append(-r, 1.0) for r in strict] + [np.append(-r, 0.0) for r in weak]
    a_eq = np.append(np.ones(n), 0.0)[None, :]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.array(a_ub), b_ub=np.zeros(len(a_ub)), A_eq=a_eq, b_eq=[0.0], bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    if res.status != 0 or -res.fun <= EPS:
        return None
    return normalize(res.x[:n])


def observed_sample(data: LotteryDataset, anchor: Lottery, true_utility: np.ndarray) -> BSample:
    """Label each lottery compared with the anchor in an observed binary menu."""
    u = np.asarray(true_utility, dtype=float)
    out = []
    for (a, b), c in data.binary():
        if anchor not in (a, b):
            continue
        q = b if a == anchor else a
        if (q.vec - anchor.vec) @ u <= TIE_TOL:
            out.append((q, B if c == frozenset([q]) else NB))
        else:
            out.append((q, W if c == frozenset([anchor]) else BETTER_CHOSEN))
    return BSample(anchor, tuple(sorted(out)))
