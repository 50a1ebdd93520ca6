from itertools import permutations

import numpy as np
import pytest
from conftest import abd_data, compromise, cycle_data

from justify import forward
from justify.axioms import (
    build_model,
    check_isa,
    check_iua,
    check_optimization,
    excludes,
    excludes_from_below,
    exclusion_constraints,
    fit_known_preference,
    from_below_constraints,
    submaximal_set,
    underline_set,
)
from justify.core import (
    ChoiceDataset,
    DominanceRelation,
    TotalOrder,
    WeakOrder,
    all_menus,
)
from justify.oracle import random_model

PREF1 = WeakOrder.parse("a>b>d")


def test_excludes_on_flip_data():
    data = abd_data("b")
    assert excludes(data, PREF1, {"b", "d"}, "a") is True
    assert excludes(data, PREF1, {"d"}, "a") is False
    assert excludes(data, PREF1, {"a"}, "b") is False
    with pytest.raises(ValueError):
        excludes(data, PREF1, {"a", "b"}, "a")


def test_excludes_unknown_when_unobserved():
    data = ChoiceDataset.from_choices({("a", "b"): "a"}, "abd")
    assert excludes(data, PREF1, {"b", "d"}, "a") is None


def test_exclusion_from_below():
    data = abd_data("b")
    assert excludes_from_below(data, PREF1, {"b", "d"}, "a") is True
    assert excludes_from_below(data, PREF1, {"b"}, "a") is False
    # {a,d} excludes b (b beats the chosen d), but a sits above b
    data = ChoiceDataset.from_choices({("a", "b", "d"): "d"}, "abd")
    assert excludes(data, PREF1, {"a", "d"}, "b") is True
    assert excludes_from_below(data, PREF1, {"a", "d"}, "b") is False


def test_underline_set():
    data = abd_data("b")
    assert underline_set(data, PREF1, {"a", "b", "d"}) == {"b", "d"}
    assert underline_set(data, PREF1, {"a", "b"}) == {"a", "b"}
    assert underline_set(data, PREF1, {"d"}) == {"d"}


def test_from_below_constraints_use_underline_sets():
    cons = from_below_constraints(abd_data("b"), PREF1)
    assert [(sorted(c.menu), c.excluded) for c in cons] == [(["b", "d"], "a")]
    assert [(sorted(c.menu), c.excluded) for c in exclusion_constraints(abd_data("b"), PREF1)] == [(["b", "d"], "a")]


def test_optimization():
    assert not check_optimization(cycle_data(), WeakOrder.parse("a1>a2>b1"))
    bad = ChoiceDataset.from_choices({("p", "q"): ("p", "q")}, "pq")
    assert len(check_optimization(bad, WeakOrder.parse("p>q"))) == 1
    assert not check_optimization(bad, WeakOrder.parse("p=q"))


def test_iua_flip():
    assert not check_iua(abd_data("b"), PREF1)
    found = check_iua(abd_data("d"), PREF1)
    witnesses = [v.witness for v in found]
    assert {"A": ["a", "b", "d"], "a": "a", "B": ["a", "b", "d"]} in witnesses


def test_iua_vacuous_without_data():
    data = ChoiceDataset.from_choices({("a", "b"): "a", ("a", "d"): "a", ("a", "b", "d"): "b"}, "abd")
    found = check_iua(data, PREF1)
    assert not found and found.vacuous > 0


def test_iua_monotone_in_data():
    data = abd_data("d")
    fewer = data.restricted([m for m in data.menus if len(m) == 2] + [frozenset("abd")])
    assert len(check_iua(fewer, PREF1)) <= len(check_iua(data, PREF1))
    smaller = data.restricted([frozenset("ab"), frozenset("abd")])
    assert len(check_iua(smaller, PREF1)) <= len(check_iua(data, PREF1))


def test_submaximal_set_with_dominance():
    data = compromise("y")
    assert "x" in submaximal_set(data, data.true_preference, data.dominance, {"x", "y", "z"})
    assert submaximal_set(data, data.true_preference, None, {"y"}) == frozenset()


def test_submaximal_set_from_two_element_exclusion():
    data = ChoiceDataset.from_choices({("a", "b", "c"): "b"}, "abcd")
    assert "a" in submaximal_set(data, WeakOrder.parse("a>b>c>d"), None, {"a", "b", "c", "d"})


def test_isa_compromise():
    assert not check_isa(compromise("y"), compromise("y").true_preference, compromise("y").dominance)
    bad = compromise("z")
    assert check_isa(bad, bad.true_preference, bad.dominance)


def test_isa_without_dominance_or_exclusions():
    data = ChoiceDataset.from_choices({("a", "b"): "a", ("a", "b", "c"): "a"}, "abc")
    assert not check_isa(data, WeakOrder.parse("a>b>c"), None)


@pytest.mark.parametrize("seed", range(15))
def test_d_monotone_models_pass_isa(seed):
    rng = np.random.default_rng(seed)
    items = list("abcde")
    dom = DominanceRelation(frozenset({("a", "b"), ("c", "d")}))
    orders = [TotalOrder(p) for p in permutations(items) if forward.is_d_monotone(TotalOrder(p), dom)]
    pick = rng.choice(len(orders), size=int(rng.integers(1, 8)), replace=False)
    pref = WeakOrder.from_ranking(items[i] for i in rng.permutation(5))
    model = forward.JustifiabilityModel(pref, tuple(orders[i] for i in pick))
    data = forward.generate_dataset(model, all_menus(items))
    assert not check_isa(data, pref, dom)


def test_known_preference_fit_on_cycle():
    res = fit_known_preference(cycle_data(), WeakOrder.parse("a1>a2>b1"))
    assert res.ok and res.to_json()["justification_count"] == 3
    assert [(sorted(c.menu), c.excluded) for c in res.constraints] == [(["b1"], "a1")]


def test_known_preference_fit_rejects_iua_failure():
    res = fit_known_preference(abd_data("d"), PREF1)
    assert res.status == "reject" and all(v.axiom == "IUA" for v in res.violations)


def test_build_model_switches_to_constraints_above_limit():
    model = random_model(3, 5, 4)
    data = forward.generate_dataset(model, all_menus(sorted(model.domain)))
    explicit = fit_known_preference(data, model.true_preference, limit=7).model
    implicit = fit_known_preference(data, model.true_preference, limit=3).model
    assert isinstance(explicit, forward.JustifiabilityModel)
    assert isinstance(implicit, forward.ConstraintModel)
    for m in data.menus:
        assert explicit.justified_set(m) == implicit.justified_set(m)
    assert build_model(model.true_preference, [], limit=7) is not None
