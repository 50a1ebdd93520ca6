from __future__ import annotations

from collections import defaultdict
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

from justify.core import ChoiceDataset, DominanceRelation, TotalOrder, WeakOrder
from justify.eucase import (
    EUModel,
    Lottery,
    PrizeSpace,
    b_sample,
    eu_generate,
    lattice_around,
)
from justify.forward import JustifiabilityModel

FIXTURES = Path(__file__).parent / "fixtures"

# criterion number -> [(ok, detail)], filled by the acceptance tests
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = defaultdict(list)

EX1_BASE = {("a", "b"): "a", ("a", "d"): "a", ("a", "b", "d"): "b"}
EX3 = {("a1", "a2"): "a1", ("a2", "b1"): "a2", ("a1", "b1"): "b1", ("a1", "a2", "b1"): "a2"}
EX3_HIGH = {("a1", "a2"): "a1", ("a1", "b1"): "b1", ("a1", "a2", "b1"): "b1"}

CENTRE = Lottery((1 / 3, 1 / 3, 1 / 3))
L9 = Lottery((0.1, 0.0, 0.9))


def abd_data(bd_choice: str) -> ChoiceDataset:
    return ChoiceDataset.from_choices({**EX1_BASE, ("b", "d"): bd_choice}, "abd", WeakOrder.parse("a>b>d"))


def cycle_data() -> ChoiceDataset:
    return ChoiceDataset.from_choices(EX3, ["a1", "a2", "b1"])


def cycle_high(b1a2_choice: str) -> ChoiceDataset:
    return ChoiceDataset.from_choices({**EX3_HIGH, ("a2", "b1"): b1a2_choice}, ["a1", "a2", "b1"])


def triple_only_winner(e1e2_choice: str) -> ChoiceDataset:
    """n is picked from the triple, never from a pair."""
    obs = {("n", "e1"): "e1", ("n", "e2"): "e2", ("n", "e1", "e2"): "n", ("e1", "e2"): e1e2_choice}
    return ChoiceDataset.from_choices(obs, ["n", "e1", "e2"])


def late_switch() -> ChoiceDataset:
    """Pairwise w > x > y > z, WARP on every triple, x chosen from the full set."""
    order = "wxyz"
    obs = {}
    for k in (2, 3):
        for m in combinations(order, k):
            obs[m] = m[0]
    obs[tuple(order)] = "x"
    return ChoiceDataset.from_choices(obs, order)


def compromise(xyz_choice: str) -> ChoiceDataset:
    """x = 5 to self, y = 6 to a peer, z = 1 to everyone; y dominates x."""
    obs = {("x", "y"): "y", ("x", "z"): "x", ("y", "z"): "y", ("x", "y", "z"): xyz_choice}
    return ChoiceDataset.from_choices(obs, "xyz", WeakOrder.parse("x>z>y"), DominanceRelation(frozenset({("y", "x")})))


def b1_over_a1_model() -> JustifiabilityModel:
    orders = ("a1 a2 b1", "a1 b1 a2", "a2 a1 b1", "a2 b1 a1", "b1 a1 a2", "b1 a2 a1")
    keep = [TotalOrder(tuple(o.split())) for o in orders]
    keep = [o for o in keep if o.prefers("b1", "a1")]
    return JustifiabilityModel(WeakOrder.parse("a1>a2>b1"), tuple(keep))


PRIZES = PrizeSpace.of(["z0", "z1", "z2"], [("z2", "z0")])
U = np.array([0.0, 0.2, 2.0])


def eu_model(vertices) -> EUModel:
    return EUModel(U, np.array(vertices, dtype=float), PRIZES)


def redundant_vertex_model() -> EUModel:
    return eu_model([[0, 2, 2], [0, 1, 2]])


def tie_model() -> EUModel:
    """Same utility; u lies inside the vertex cone, so binary menus show ties."""
    return eu_model([[0, 1, 2], [0, 0, 1]])


def grid_menus(p: Lottery, step: float = 0.02, triples: int = 300, seed: int = 0):
    qs = [q for q in lattice_around(p, step) if q != p]
    rng = np.random.default_rng(seed)
    menus = [(p, q) for q in qs]
    for _ in range(triples):
        i, j = rng.choice(len(qs), size=2, replace=False)
        menus.append((p, qs[i], qs[j]))
    return qs, menus


@pytest.fixture(scope="session")
def f_grid():
    model = redundant_vertex_model()
    qs, menus = grid_menus(CENTRE)
    return model, qs, eu_generate(model, menus)


@pytest.fixture(scope="session")
def g_grid():
    model = tie_model()
    qs, menus = grid_menus(CENTRE, triples=0)
    return model, qs, eu_generate(model, menus)


@pytest.fixture(scope="session")
def f_l9_sample():
    model = redundant_vertex_model()
    qs = [q for q in lattice_around(L9, 0.02) if q != L9]
    return model, qs, b_sample(model, L9, qs)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d}: {verdict}  " + "; ".join(d for _, d in parts))
