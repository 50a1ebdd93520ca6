"""Lotteries over a finite prize set, Bernoulli utilities and EU models."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import product
from typing import Any

import numpy as np

from ..core import DatasetError, Defect, DominanceRelation

PROB_TOL = 1e-12
KEY_DIGITS = 10
# tie tolerance on normalized utilities and unit-simplex lotteries
TIE_TOL = 1e-9
# margin used to realize strict inequalities in feasibility programs
EPS = 1e-7


def normalize(v: Sequence[float]) -> np.ndarray:
    """Mean-centred, unit-norm copy of ``v``; a constant vector maps to zero."""
    a = np.asarray(v, dtype=float)
    a = a - a.mean()
    n = np.linalg.norm(a)
    return a / n if n > TIE_TOL else np.zeros_like(a)


@dataclass(frozen=True)
class PrizeSpace:
    prizes: tuple[str, ...]
    dominance: DominanceRelation

    def __post_init__(self) -> None:
        if len(self.prizes) < 2 or len(set(self.prizes)) != len(self.prizes):
            raise ValueError("need at least two distinct prizes")
        if not self.dominance.pairs:
            raise ValueError("at least one pair of prizes must be dominance-ranked")
        if not self.dominance.items <= set(self.prizes):
            raise ValueError("dominance mentions unknown prizes")

    @classmethod
    def of(cls, prizes: Iterable[str], pairs: Iterable[tuple[str, str]]) -> PrizeSpace:
        return cls(tuple(prizes), DominanceRelation(frozenset(tuple(p) for p in pairs)))

    @property
    def size(self) -> int:
        return len(self.prizes)

    def index_pairs(self) -> list[tuple[int, int]]:
        idx = {z: i for i, z in enumerate(self.prizes)}
        return sorted((idx[x], idx[y]) for x, y in self.dominance.pairs)

    def monotone_rows(self) -> np.ndarray:
        """Rows r with r·m ≥ 0 meaning m is weakly monotone on one pair."""
        rows = np.zeros((len(self.dominance.pairs), self.size))
        for k, (i, j) in enumerate(self.index_pairs()):
            rows[k, i], rows[k, j] = 1.0, -1.0
        return rows

    def is_monotone(self, m: Sequence[float], strict: bool = False) -> bool:
        m = np.asarray(m, dtype=float)
        gaps = self.monotone_rows() @ m
        return bool(np.all(gaps > TIE_TOL)) if strict else bool(np.all(gaps >= -TIE_TOL))

    def up_sets(self) -> list[frozenset[int]]:
        """Every up-closed set of prize indices (sets closed under dominance)."""
        above = {i: set() for i in range(self.size)}
        for i, j in self.index_pairs():
            above[j].add(i)
        out = []
        for bits in product((0, 1), repeat=self.size):
            s = {i for i, b in enumerate(bits) if b}
            if all(above[j] <= s for j in s):
                out.append(frozenset(s))
        return out

    def to_json(self) -> dict[str, Any]:
        return {"prizes": list(self.prizes), "prize_dominance": self.dominance.to_json()}


@dataclass(frozen=True, eq=False)
class Lottery:
    """A probability vector over the prize list."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        p = tuple(float(x) for x in self.probs)
        if len(p) < 2 or not all(math.isfinite(x) for x in p):
            raise ValueError("a lottery needs at least two finite probabilities")
        if min(p) < -PROB_TOL:
            raise ValueError(f"negative probability in {p}")
        if abs(sum(p) - 1.0) > PROB_TOL * 10 * len(p):
            raise ValueError(f"probabilities sum to {sum(p)!r}, not 1")
        object.__setattr__(self, "probs", tuple(max(x, 0.0) + 0.0 for x in p))

    @classmethod
    def degenerate(cls, n: int, i: int) -> Lottery:
        return cls(tuple(1.0 if j == i else 0.0 for j in range(n)))

    def key(self) -> tuple[float, ...]:
        return tuple(round(x, KEY_DIGITS) + 0.0 for x in self.probs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Lottery) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __lt__(self, other: Lottery) -> bool:
        return self.key() < other.key()

    def __len__(self) -> int:
        return len(self.probs)

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.probs)

    def is_interior(self) -> bool:
        return min(self.probs) > PROB_TOL

    def mix(self, other: Lottery, alpha: float) -> Lottery:
        """``alpha * self + (1 - alpha) * other``."""
        return Lottery(tuple(alpha * a + (1 - alpha) * b for a, b in zip(self.probs, other.probs, strict=True)))

    def shifted(self, d: Sequence[float]) -> Lottery | None:
        """``self + d`` if that is still a lottery, else None."""
        v = self.vec + np.asarray(d, dtype=float)
        if v.min() < -PROB_TOL:
            return None
        return Lottery(tuple(v))

    def to_json(self) -> list[float]:
        return [round(x, 12) + 0.0 for x in self.probs]

    def __repr__(self) -> str:
        return "Lottery(" + ", ".join(f"{x:.4g}" for x in self.probs) + ")"


def as_lottery(x: Lottery | Sequence[float]) -> Lottery:
    return x if isinstance(x, Lottery) else Lottery(tuple(x))


def lottery_matrix(menu: Sequence[Lottery]) -> np.ndarray:
    return np.array([a.probs for a in menu], dtype=float)


def simplex_grid(n: int, step: float = 0.05) -> list[Lottery]:
    """Barycentric grid with the given step (231 points for n = 3, step 0.05)."""
    k = round(1 / step)
    if abs(k * step - 1) > 1e-9:
        raise ValueError("step must divide 1")
    out = []

    def rec(prefix: list[int], left: int) -> None:
        if len(prefix) == n - 1:
            out.append(Lottery(tuple(x / k for x in prefix + [left])))
            return
        for i in range(left + 1):
            rec(prefix + [i], left - i)

    rec([], k)
    return sorted(out)


def lattice_around(p: Lottery, step: float = 0.02, radius: int | None = None) -> list[Lottery]:
    """Lotteries ``p + step * z`` for integer vectors z summing to zero.

    Keeps every such point inside the simplex (at most ``radius`` steps per
    coordinate when given), excluding p itself.
    """
    n = len(p)
    v = p.vec
    lo = [-math.floor(v[i] / step + 1e-9) for i in range(n)]
    hi = [math.floor((1 - v[i]) / step + 1e-9) for i in range(n)]
    if radius is not None:
        lo = [max(a, -radius) for a in lo]
        hi = [min(b, radius) for b in hi]
    out = []
    for z in product(*(range(a, b + 1) for a, b in zip(lo[:-1], hi[:-1]))):
        last = -sum(z)
        if not lo[-1] <= last <= hi[-1] or (last == 0 and not any(z)):
            continue
        q = p.shifted(step * np.array(z + (last,), dtype=float))
        if q is not None:
            out.append(q)
    return sorted(out)


@dataclass(frozen=True, eq=False)
class EUModel:
    """True utility plus the vertices of a polytope of justifiable utilities.

    All vectors are stored mean-centred and unit-norm. Comparisons between
    lotteries only involve differences, which sum to zero, so centring loses
    nothing and scaling preserves every ranking.
    """

    true_utility: np.ndarray
    vertices: np.ndarray
    prizes: PrizeSpace | None = None
    raw: dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        u_raw = np.asarray(self.true_utility, dtype=float)
        v_raw = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v_raw.size == 0:
            raise ValueError("a model needs at least one vertex")
        if v_raw.shape[1] != u_raw.shape[0]:
            raise ValueError("vertices and true utility have different lengths")
        if not (np.all(np.isfinite(u_raw)) and np.all(np.isfinite(v_raw))):
            raise ValueError("utilities must be finite")
        if self.prizes is not None:
            if self.prizes.size != u_raw.shape[0]:
                raise ValueError("utility length differs from the number of prizes")
            if not self.prizes.is_monotone(u_raw, strict=True):
                raise ValueError("true utility must strictly respect prize dominance")
            for m in v_raw:
                if not self.prizes.is_monotone(m):
                    raise ValueError(f"vertex {list(m)} is not weakly monotone")
        u = normalize(u_raw)
        if not np.any(u):
            raise ValueError("true utility must not be constant")
        seen = {}
        for m in v_raw:
            nm = normalize(m)
            seen.setdefault(tuple(np.round(nm, KEY_DIGITS) + 0.0), nm)
        verts = np.array([seen[k] for k in sorted(seen)])
        object.__setattr__(self, "raw", {"true_utility": u_raw.tolist(), "vertices": v_raw.tolist()})
        object.__setattr__(self, "true_utility", u)
        object.__setattr__(self, "vertices", verts)

    @property
    def n(self) -> int:
        return self.true_utility.shape[0]

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "true_utility": [round(float(x), 12) + 0.0 for x in self.true_utility],
            "vertices": [[round(float(x), 12) + 0.0 for x in m] for m in self.vertices],
        }
        if self.prizes is not None:
            out.update(self.prizes.to_json())
        return out

    @classmethod
    def from_json(cls, raw: Any, prizes: PrizeSpace | None = None) -> EUModel:
        if not isinstance(raw, dict) or "true_utility" not in raw or "vertices" not in raw:
            raise ValueError("EU model JSON needs 'true_utility' and 'vertices'")
        if prizes is None and "prizes" in raw:
            prizes = PrizeSpace.of(raw["prizes"], raw.get("prize_dominance", []))
        return cls(np.array(raw["true_utility"], dtype=float), np.array(raw["vertices"], dtype=float), prizes)


@dataclass(frozen=True)
class BSample:
    """Lotteries around an anchor, each labelled by its binary comparison with it."""

    anchor: Lottery
    classified: tuple[tuple[Lottery, str], ...]

    def of_class(self, label: str) -> list[Lottery]:
        return [q for q, c in self.classified if c == label]

    def to_json(self) -> dict[str, Any]:
        return {"anchor": self.anchor.to_json(), "classified": [[q.to_json(), c] for q, c in self.classified]}


@dataclass(frozen=True)
class LotteryDataset:
    """Observed choices from menus of lotteries."""

    prizes: PrizeSpace
    observations: tuple[tuple[tuple[Lottery, ...], frozenset[Lottery]], ...]
    true_utility: np.ndarray | None = None

    def __post_init__(self) -> None:
        defects = []
        merged: dict[frozenset[Lottery], frozenset[Lottery]] = {}
        for menu, choice in self.observations:
            ms = frozenset(menu)
            where = "menu " + str([x.to_json() for x in sorted(ms)])
            if any(len(a) != self.prizes.size for a in ms):
                defects.append(Defect("lottery length", None, f"{where}: lotteries must have {self.prizes.size} entries"))
                continue
            if not choice:
                defects.append(Defect("empty choice", None, f"{where}: choice must be nonempty"))
            elif not choice <= ms:
                defects.append(Defect("choice outside menu", None, f"{where}: chosen lottery not in menu"))
            if ms in merged and merged[ms] != choice:
                defects.append(Defect("contradictory duplicate observation", None, f"{where}: observed with two different choices"))
            merged[ms] = choice
        if defects:
            raise DatasetError(defects)
        obs = tuple((tuple(sorted(m)), merged[m]) for m in sorted(merged, key=lambda m: (len(m), sorted(m))))
        object.__setattr__(self, "observations", obs)
        if self.true_utility is not None:
            u = np.asarray(self.true_utility, dtype=float)
            if u.shape != (self.prizes.size,):
                raise DatasetError([Defect("true utility", None, "true utility length differs from prizes")])
            object.__setattr__(self, "true_utility", u)

    def choice(self, menu: Iterable[Lottery]) -> frozenset[Lottery] | None:
        ms = frozenset(menu)
        if len(ms) == 1:
            return ms
        for m, c in self.observations:
            if frozenset(m) == ms:
                return c
        return None

    def index(self) -> dict[frozenset[Lottery], frozenset[Lottery]]:
        return {frozenset(m): c for m, c in self.observations}

    def lotteries(self) -> list[Lottery]:
        return sorted({a for m, _ in self.observations for a in m})

    def binary(self) -> list[tuple[tuple[Lottery, Lottery], frozenset[Lottery]]]:
        return [((m[0], m[1]), c) for m, c in self.observations if len(m) == 2]

    def to_json(self) -> dict[str, Any]:
        out = self.prizes.to_json()
        out["observations"] = [
            {"menu": [a.to_json() for a in m], "choice": [a.to_json() for a in sorted(c)]} for m, c in self.observations
        ]
        if self.true_utility is not None:
            out["true_utility"] = [float(x) for x in self.true_utility]
        return out

    @classmethod
    def from_json(cls, raw: Any) -> LotteryDataset:
        defects = []
        if not isinstance(raw, dict):
            raise DatasetError([Defect("dataset shape", None, "EU dataset must be a JSON object")])
        unknown = sorted(set(raw) - {"prizes", "prize_dominance", "observations", "true_utility"})
        for k in unknown:
            defects.append(Defect("unknown key", None, f"unexpected key {k!r}"))
        try:
            prizes = PrizeSpace.of(raw["prizes"], [tuple(p) for p in raw.get("prize_dominance", [])])
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(defects + [Defect("prizes", None, str(exc))]) from None
        obs = []
        for i, o in enumerate(raw.get("observations", [])):
            try:
                menu = tuple(Lottery(tuple(a)) for a in o["menu"])
                choice = frozenset(Lottery(tuple(a)) for a in o["choice"])
                if len(set(menu)) != len(menu):
                    defects.append(Defect("duplicate item in menu", None, f"observation {i} repeats a lottery"))
                    continue
                if not menu:
                    defects.append(Defect("empty menu", None, f"observation {i} has an empty menu"))
                    continue
                obs.append((menu, choice))
            except (KeyError, TypeError, ValueError) as exc:
                defects.append(Defect("malformed observation", None, f"observation {i}: {exc}"))
        if defects:
            raise DatasetError(defects)
        u = raw.get("true_utility")
        return cls(prizes, tuple(obs), None if u is None else np.array(u, dtype=float))
