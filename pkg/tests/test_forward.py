from itertools import permutations

import numpy as np
import pytest
from conftest import b1_over_a1_model, cycle_data

from justify import forward
from justify.axioms import check_iua, check_optimization
from justify.core import DominanceRelation, TotalOrder, WeakOrder, all_menus
from justify.oracle import random_model


def test_b1_over_a1_justified_sets():
    m = b1_over_a1_model()
    assert m.justified_set({"a1", "b1"}) == {"b1"}
    assert m.justified_set({"a1", "a2"}) == {"a1", "a2"}
    assert m.justified_set({"a2"}) == {"a2"}


def test_snyder_choices():
    m = b1_over_a1_model()
    assert m.choose({"a2", "b1"}) == {"a2"}
    assert m.choose({"a1", "a2", "b1"}) == {"a2"}
    assert m.choose({"a1", "b1"}) == {"b1"}


def test_empty_menu_and_foreign_items_rejected():
    m = b1_over_a1_model()
    with pytest.raises(ValueError):
        m.choose(set())
    with pytest.raises(ValueError):
        m.choose({"a1", "zz"})


def test_generate_reproduces_cycle():
    assert forward.generate_dataset(b1_over_a1_model(), all_menus(["a1", "a2", "b1"])) == cycle_data()


def test_unconstrained_model_maximizes_preference():
    pref = WeakOrder.parse("c>a>b")
    model = forward.JustifiabilityModel(pref, tuple(TotalOrder(p) for p in permutations("abc")))
    data = forward.generate_dataset(model, all_menus("abc"))
    assert all(data.choice(m) == pref.best(m) for m in data.menus)


def test_single_justification_maximizes_it():
    j = TotalOrder(tuple("bca"))
    model = forward.JustifiabilityModel(WeakOrder.parse("a>b>c"), (j,))
    data = forward.generate_dataset(model, all_menus("abc"))
    assert all(data.single(m) == j.top(m) for m in data.menus)


def test_ties_in_true_preference_return_all_best():
    model = forward.JustifiabilityModel(WeakOrder.parse("a=b>c"), tuple(TotalOrder(p) for p in permutations("abc")))
    assert model.choose("abc") == {"a", "b"}


def test_d_monotone():
    d = DominanceRelation(frozenset({("z2", "z0")}))
    assert not forward.is_d_monotone(TotalOrder(("z0", "z1", "z2")), d)
    assert forward.is_d_monotone(TotalOrder(("z0", "z1")), DominanceRelation())
    assert forward.is_d_monotone([0, 0.2, 2], d, items=["z0", "z1", "z2"])
    assert forward.is_d_monotone(WeakOrder.parse("z2=z0>z1"), d, mode="weak")
    assert not forward.is_d_monotone(WeakOrder.parse("z2=z0>z1"), d, mode="strict")


def test_strictly_monotone_justifications_never_pick_dominated():
    d = DominanceRelation(frozenset({("a", "b")}))
    orders = tuple(TotalOrder(p) for p in permutations("abcd") if p.index("a") < p.index("b"))
    assert all(forward.is_d_monotone(o, d) for o in orders)
    model = forward.JustifiabilityModel(WeakOrder.parse("b>c>d>a"), orders)
    for m in all_menus("abcd"):
        if {"a", "b"} <= m:
            assert "b" not in model.justified_set(m)


@pytest.mark.parametrize("seed", range(40))
def test_generated_data_meets_necessary_axioms(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    model = random_model(seed, n, int(rng.integers(1, 6)))
    data = forward.generate_dataset(model, all_menus(sorted(model.domain)))
    for m in data.menus:
        chosen = data.choice(m)
        assert chosen and chosen <= model.justified_set(m) <= m
    assert not check_iua(data, model.true_preference)
    assert not check_optimization(data, model.true_preference)
