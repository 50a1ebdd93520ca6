"""Array kernels for the combinatorial hot loops.

Orders are stored as rank matrices: ``ranks[k, i]`` is the position of item
``i`` in order ``k`` (0 is best). Menus are bitmasks over item indices.

Each kernel has a numba version and a numpy version. Numba is used when it
imports and ``JUSTIFY_NO_NUMBA`` is unset or ``0``.
"""

from __future__ import annotations

import os
from functools import lru_cache
from itertools import permutations

import numpy as np

_DISABLED = os.environ.get("JUSTIFY_NO_NUMBA", "0") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


@lru_cache(maxsize=16)
def permutation_ranks(n: int) -> np.ndarray:
    """Rank matrix of all n! orders of ``range(n)`` in lexicographic order."""
    perms = np.array(list(permutations(range(n))), dtype=np.int64).reshape(-1, n)
    ranks = np.empty_like(perms)
    rows = np.arange(perms.shape[0])[:, None]
    ranks[rows, perms] = np.arange(n)
    ranks.setflags(write=False)
    return ranks


def _consistent_numpy(ranks: np.ndarray, menus: np.ndarray, excluded: np.ndarray) -> np.ndarray:
    n_orders, n = ranks.shape
    ok = np.ones(n_orders, dtype=np.bool_)
    bits = (menus[:, None] >> np.arange(n)) & 1
    for k in range(menus.shape[0]):
        inside = bits[k].astype(bool)
        if not inside.any():
            ok[:] = False
            break
        best = ranks[:, inside].min(axis=1)
        ok &= best < ranks[:, excluded[k]]
    return ok


def _top_bits_numpy(ranks: np.ndarray, menus: np.ndarray) -> np.ndarray:
    n = ranks.shape[1]
    bits = ((menus[:, None] >> np.arange(n)) & 1).astype(bool)
    big = n + 1
    out = np.empty((ranks.shape[0], menus.shape[0]), dtype=np.int64)
    for j in range(menus.shape[0]):
        masked = np.where(bits[j], ranks, big)
        out[:, j] = np.left_shift(1, masked.argmin(axis=1))
    return out


def _union_bits_numpy(top_bits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    chosen = top_bits[mask]
    if chosen.shape[0] == 0:
        return np.zeros(top_bits.shape[1], dtype=np.int64)
    return np.bitwise_or.reduce(chosen, axis=0)


if HAS_NUMBA:

    @njit(cache=True)
    def _consistent_numba(ranks, menus, excluded):  # pragma: no cover - compiled
        n_orders, n = ranks.shape
        out = np.ones(n_orders, dtype=np.bool_)
        for k in range(n_orders):
            for c in range(menus.shape[0]):
                ra = ranks[k, excluded[c]]
                hit = False
                m = menus[c]
                for i in range(n):
                    if (m >> i) & 1 and ranks[k, i] < ra:
                        hit = True
                        break
                if not hit:
                    out[k] = False
                    break
        return out

    @njit(cache=True)
    def _top_bits_numba(ranks, menus):  # pragma: no cover - compiled
        n_orders, n = ranks.shape
        out = np.empty((n_orders, menus.shape[0]), dtype=np.int64)
        for k in range(n_orders):
            for j in range(menus.shape[0]):
                m = menus[j]
                best = n + 1
                arg = -1
                for i in range(n):
                    if (m >> i) & 1 and ranks[k, i] < best:
                        best = ranks[k, i]
                        arg = i
                out[k, j] = np.int64(1) << arg
        return out

    @njit(cache=True)
    def _union_bits_numba(top_bits, mask):  # pragma: no cover - compiled
        out = np.zeros(top_bits.shape[1], dtype=np.int64)
        for k in range(top_bits.shape[0]):
            if mask[k]:
                for j in range(top_bits.shape[1]):
                    out[j] |= top_bits[k, j]
        return out


def _as_i64(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=np.int64))


def consistent_mask(ranks: np.ndarray, menus, excluded, use_numba: bool | None = None) -> np.ndarray:
    """Boolean mask of orders that rank some menu item above the excluded item,
    for every (menu, excluded) constraint."""
    use = HAS_NUMBA if use_numba is None else (use_numba and HAS_NUMBA)
    menus, excluded = _as_i64(menus), _as_i64(excluded)
    if menus.shape[0] == 0:
        return np.ones(ranks.shape[0], dtype=bool)
    if use:
        return _consistent_numba(_as_i64(ranks), menus, excluded)
    return _consistent_numpy(ranks, menus, excluded)


def top_bits(ranks: np.ndarray, menus, use_numba: bool | None = None) -> np.ndarray:
    """``out[k, j]`` is the bit of the item order k ranks first in menu j."""
    use = HAS_NUMBA if use_numba is None else (use_numba and HAS_NUMBA)
    menus = _as_i64(menus)
    if use:
        return _top_bits_numba(_as_i64(ranks), menus)
    return _top_bits_numpy(ranks, menus)


def union_bits(top: np.ndarray, mask: np.ndarray, use_numba: bool | None = None) -> np.ndarray:
    """Per menu, the bitmask of items ranked first by some selected order."""
    use = HAS_NUMBA if use_numba is None else (use_numba and HAS_NUMBA)
    if use:
        return _union_bits_numba(_as_i64(top), np.ascontiguousarray(mask, dtype=np.bool_))
    return _union_bits_numpy(top, np.asarray(mask, dtype=bool))
