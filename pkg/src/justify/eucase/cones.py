"""Small polyhedral cones in the zero-sum subspace.

Utilities and lottery differences are compared only through inner products
with vectors summing to zero, so everything here lives in the subspace
orthogonal to the all-ones vector, written in an orthonormal basis.
Dimensions stay tiny (at most three for four prizes), which makes a direct
enumeration of extreme rays exact enough and simple.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.optimize import nnls
from scipy.spatial import ConvexHull, QhullError

ZERO_TOL = 1e-9
MAX_PRIZES = 4


class UnsupportedSizeError(ValueError):
    """Cone enumeration is limited to small prize sets."""


@lru_cache(maxsize=8)
def zero_sum_basis(n: int) -> np.ndarray:
    """Orthonormal basis (n × n-1, Helmert columns) of the zero-sum subspace."""
    q = np.zeros((n, n - 1))
    for j in range(1, n):
        q[:j, j - 1] = 1.0
        q[j, j - 1] = -j
        q[:, j - 1] /= np.sqrt(j * (j + 1))
    q.setflags(write=False)
    return q


def to_sub(v: np.ndarray) -> np.ndarray:
    v = np.atleast_2d(v)
    return v @ zero_sum_basis(v.shape[1])


def from_sub(y: np.ndarray, n: int) -> np.ndarray:
    return np.atleast_2d(y) @ zero_sum_basis(n).T


def _unit_rows(a: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return a.reshape(0, a.shape[-1] if a.ndim == 2 else 0)
    norms = np.linalg.norm(a, axis=1)
    keep = norms > ZERO_TOL
    return a[keep] / norms[keep, None]


def _dedupe(rows: list[np.ndarray]) -> np.ndarray:
    seen: dict[tuple[float, ...], np.ndarray] = {}
    for r in rows:
        r = r / np.linalg.norm(r)
        seen.setdefault(tuple(np.round(r, 8) + 0.0), r)
    if not seen:
        return np.zeros((0, 0))
    return np.array([seen[k] for k in sorted(seen)])


def _pointed_rays(a: np.ndarray) -> list[np.ndarray]:
    """Extreme rays of {y : a y ≥ 0} when a has full column rank."""
    d = a.shape[1]
    if d == 1:
        return [s * np.ones(1) for s in (1.0, -1.0) if np.all(a @ (s * np.ones(1)) >= -ZERO_TOL)]
    out = []
    for rows in combinations(range(a.shape[0]), d - 1):
        sub = a[list(rows)]
        _, s, vt = np.linalg.svd(sub)
        if np.sum(s > ZERO_TOL) != d - 1:
            continue
        r = vt[-1]
        for sign in (1.0, -1.0):
            if np.all(a @ (sign * r) >= -ZERO_TOL):
                out.append(sign * r)
    return out


def reduce_generators(g: np.ndarray) -> np.ndarray:
    """Drop generators that are not extreme rays of cone(g), when the cone is
    pointed and a hull of a cross-section can be taken; otherwise return g."""
    g = _unit_rows(g)
    if g.shape[0] <= g.shape[1] + 1:
        return g
    if g.shape[1] == 1:
        return np.unique(np.sign(g), axis=0)
    c = g.mean(axis=0)
    if np.linalg.norm(c) < ZERO_TOL:
        return g
    c = c / np.linalg.norm(c)
    h = g @ c
    if np.any(h <= 1e-6):
        return g
    section = g / h[:, None]
    # coordinates within the hyperplane c·x = 1
    _, _, vt = np.linalg.svd(c[None, :])
    coords = section @ vt[1:].T
    if coords.shape[1] == 1:
        keep = {int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))}
        return g[sorted(keep)]
    try:
        hull = ConvexHull(coords)
    except QhullError:
        return g
    return g[sorted(hull.vertices)]


def cone_generators(a: np.ndarray, dim: int) -> np.ndarray:
    """Generators of {y ∈ R^dim : a y ≥ 0}: ± a basis of its lineality space
    plus the extreme rays of the pointed part. Rows are unit vectors."""
    a = _unit_rows(np.asarray(a, dtype=float).reshape(-1, dim))
    if a.shape[0] == 0:
        eye = np.eye(dim)
        return np.vstack([eye, -eye])
    a = reduce_generators(a)
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > ZERO_TOL))
    lineality = vt[rank:]
    rowspace = vt[:rank]
    gens = [s_ * l for l in lineality for s_ in (1.0, -1.0)]
    if rank:
        for y in _pointed_rays(a @ rowspace.T):
            gens.append(y @ rowspace)
    if not gens:
        return np.zeros((0, dim))
    return _dedupe(gens)


def dual_generators(g: np.ndarray, dim: int) -> np.ndarray:
    """Generators of the dual cone {f : f·x ≥ 0 for every x in cone(g)}."""
    return cone_generators(g, dim)


def in_cone(v: np.ndarray, g: np.ndarray, tol: float = 1e-9) -> bool:
    """Whether v is a nonnegative combination of the rows of g."""
    if g.shape[0] == 0:
        return bool(np.linalg.norm(v) <= tol)
    _, resid = nnls(g.T, v)
    return bool(resid <= tol * max(1.0, np.linalg.norm(v)))


def check_size(n: int) -> None:
    if n > MAX_PRIZES:
        raise UnsupportedSizeError(f"cone computations support at most {MAX_PRIZES} prizes, got {n}")
