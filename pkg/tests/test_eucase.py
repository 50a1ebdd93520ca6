import json
import warnings

import numpy as np
import pytest
from conftest import CENTRE, L9, PRIZES, U, eu_model, redundant_vertex_model

from justify.eucase import (
    BETTER_CHOSEN,
    NB,
    B,
    BSample,
    EUModel,
    IdentificationError,
    Lottery,
    LotteryDataset,
    PrizeSpace,
    UnsupportedSizeError,
    W,
    b_sample,
    check_eu_axioms,
    check_independence,
    check_monotonicity,
    classify,
    classify_many,
    co_intersect_b,
    compare_strictness,
    construct_polytope,
    eu_choose,
    eu_generate,
    fosd,
    joint_prediction,
    lattice_around,
    maximal_polytope,
    minimal_polytope,
    normalize,
    recover_true_preference,
    simplex_grid,
    utility_angle,
)
from justify.eucase.checks import all_violations
from justify.eucase.cones import cone_generators, in_cone, zero_sum_basis

D0, D1, D2 = (Lottery(tuple(np.eye(3)[i])) for i in range(3))


def lot(*p):
    return Lottery(tuple(float(x) for x in p))


# ----------------------------------------------------------------- lotteries


def test_lottery_validation_and_equality():
    with pytest.raises(ValueError):
        lot(0.5, 0.6, 0.0)
    with pytest.raises(ValueError):
        lot(-0.1, 0.6, 0.5)
    assert lot(0.1, 0.2, 0.7) == lot(0.1 + 1e-13, 0.2, 0.7 - 1e-13)
    assert D1 == Lottery.degenerate(3, 1) and CENTRE.is_interior() and not D1.is_interior()


def test_model_normalizes_vertices():
    m = redundant_vertex_model()
    assert np.allclose(m.vertices.sum(axis=1), 0) and np.allclose(np.linalg.norm(m.vertices, axis=1), 1)
    assert np.isclose(np.linalg.norm(m.true_utility), 1)
    assert EUModel.from_json(m.to_json(), PRIZES).to_json() == m.to_json()


def test_model_rejects_non_monotone():
    with pytest.raises(ValueError):
        EUModel(U, np.array([[2.0, 1.0, 0.0]]), PRIZES)
    with pytest.raises(ValueError):
        EUModel(np.array([2.0, 1.0, 0.0]), np.array([[0, 1, 2.0]]), PRIZES)


def test_grids():
    assert len(simplex_grid(3, 0.5)) == 6
    pts = lattice_around(CENTRE, 0.1)
    assert CENTRE not in pts and all(np.isclose(sum(p.probs), 1) for p in pts)


def test_dataset_json_round_trip():
    data = eu_generate(redundant_vertex_model(), [(D1, lot(0.7, 0, 0.3))])
    raw = data.to_json()
    assert raw["prizes"] == ["z0", "z1", "z2"] and raw["prize_dominance"] == [["z2", "z0"]]
    assert LotteryDataset.from_json(json.loads(json.dumps(raw))).to_json() == raw


# -------------------------------------------------------------------- cones


def test_zero_sum_basis_is_orthonormal():
    q = zero_sum_basis(4)
    assert np.allclose(q.T @ q, np.eye(3)) and np.allclose(q.sum(axis=0), 0)


def test_cone_generators_of_orthant():
    g = cone_generators(np.eye(2), 2)
    assert sorted(map(tuple, np.round(g, 9))) == [(0.0, 1.0), (1.0, 0.0)]
    assert in_cone(np.array([2.0, 3.0]), g) and not in_cone(np.array([-1.0, 1.0]), g)


def test_cone_generators_with_lineality():
    g = cone_generators(np.array([[1.0, 0.0, 0.0]]), 3)
    assert in_cone(np.array([0.0, -5.0, 2.0]), g) and not in_cone(np.array([-1.0, 0.0, 0.0]), g)


def test_size_cap():
    prizes = PrizeSpace.of([f"z{i}" for i in range(5)], [("z4", "z0")])
    m = EUModel(np.arange(5.0), np.array([np.arange(5.0)]), prizes)
    with pytest.raises(UnsupportedSizeError):
        maximal_polytope(m, Lottery(tuple([0.2] * 5)))


# -------------------------------------------------------------------- fosd


def test_fosd_examples():
    assert fosd(D2, D0, PRIZES)
    assert not fosd(D1, D0, PRIZES)
    assert fosd(lot(0, 0.5, 0.5), lot(0.5, 0.5, 0), PRIZES)
    assert not fosd(D2, D2, PRIZES)


# ------------------------------------------------------------------ choice


def test_eu_choose_examples():
    f = redundant_vertex_model()
    assert eu_choose(f, [D1, lot(0.7, 0, 0.3)]) == {D1}
    assert eu_choose(f, [D1, lot(0.5, 0, 0.5)]) == {lot(0.5, 0, 0.5)}
    assert eu_choose(f, [D1, lot(0.7, 0, 0.3), lot(0.5, 0, 0.5)]) == {lot(0.5, 0, 0.5)}
    assert eu_choose(f, [L9, D1, D2]) == {D2}
    with pytest.raises(ValueError):
        eu_choose(f, [])


def test_never_chooses_dominated():
    f = redundant_vertex_model()
    rng = np.random.default_rng(1)
    pts = simplex_grid(3, 0.1)
    for _ in range(200):
        menu = [pts[i] for i in rng.choice(len(pts), size=3, replace=False)]
        for c in eu_choose(f, menu):
            assert not any(fosd(a, c, PRIZES) for a in menu)


def test_classify_examples():
    f = redundant_vertex_model()
    assert classify(f, lot(0.7, 0, 0.3), D1) == B
    assert classify(f, D1, lot(0.7, 0, 0.3)) == W
    # same utility as p, and m2 ties the two lotteries
    assert classify(f, D1, lot(0.9, 0, 0.1)) in (NB, B)
    assert classify(f, lot(0.9, 0, 0.1), D2) == BETTER_CHOSEN
    with pytest.raises(ValueError):
        classify(f, D1, D1)


def test_classify_tie_is_nb():
    m = eu_model([[0, 1, 2]])
    p = lot(0.2, 0.4, 0.4)
    u = normalize(U)
    d = np.cross(u, np.ones(3))
    q = Lottery(tuple(p.vec + 0.05 * d / np.linalg.norm(d)))
    if m.vertices[0] @ (q.vec - p.vec) > 0:
        q = Lottery(tuple(p.vec - 0.05 * d / np.linalg.norm(d)))
    assert classify(m, p, q) == NB


def test_co_intersection_examples():
    f = redundant_vertex_model()
    hit = co_intersect_b(f, [lot(0, 0.15, 0.85)], L9)
    assert hit.intersects
    mix = co_intersect_b(f, [D1, D2], L9)
    assert mix.intersects and 1 / 9 - 1e-7 <= mix.weights[0] < 0.2
    assert not co_intersect_b(f, [lot(0.7, 0, 0.3)], D1).intersects


# -------------------------------------------------------------- polytopes


def test_minimal_polytope_drops_redundant_vertex():
    f = redundant_vertex_model()
    m1 = normalize([0, 2, 2])
    mn = minimal_polytope(f, L9)
    assert not any(np.allclose(v, m1, atol=1e-6) for v in mn)
    assert any(np.allclose(v, normalize([0, 1, 2]), atol=1e-6) for v in mn)


def test_maximal_polytope_contains_model():
    f = redundant_vertex_model()
    mx = maximal_polytope(f, CENTRE)
    for v in f.vertices:
        assert in_cone(v @ zero_sum_basis(3), mx @ zero_sum_basis(3), tol=1e-6)


def test_construct_from_empty_sample_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        m = construct_polytope(BSample(CENTRE, ()), U, PRIZES)
    assert caught and all(PRIZES.is_monotone(v) for v in m.vertices)


def test_construct_is_anchor_independent(f_l9_sample):
    f, _, _ = f_l9_sample
    p2 = lot(0.3, 0.3, 0.4)
    qs1 = [q for q in lattice_around(L9, 0.02) if q != L9]
    qs2 = [q for q in lattice_around(p2, 0.02) if q != p2]
    m1 = construct_polytope(b_sample(f, L9, qs1), U, PRIZES)
    m2 = construct_polytope(b_sample(f, p2, qs2), U, PRIZES)
    probe = [q for q in lattice_around(CENTRE, 0.03) if q != CENTRE]
    a, b = classify_many(m1, CENTRE, probe), classify_many(m2, CENTRE, probe)
    assert sum(x != y for x, y in zip(a, b)) <= 0.02 * len(probe)


# ------------------------------------------------------------- comparison


def test_compare_strictness_examples():
    strict = eu_model([[0, 1, 2]])
    loose = eu_model([[0, 1, 2], [0.5, 1, 2]])
    res = compare_strictness(strict, loose, CENTRE)
    assert res.relation == "1-stricter"
    stated = Lottery(tuple(CENTRE.vec + np.array([-0.1, 0.15, -0.05])))
    assert classify(strict, CENTRE, stated) == B and classify(loose, CENTRE, stated) == NB
    assert classify(strict, CENTRE, res.witness) == B and classify(loose, CENTRE, res.witness) != B
    assert compare_strictness(strict, strict, CENTRE).relation == "equal"
    assert compare_strictness(redundant_vertex_model(), eu_model([[0, 1, 2]]), CENTRE).relation == "equal"
    with pytest.raises(ValueError):
        compare_strictness(strict, EUModel(np.array([0, 1, 2.0]), np.array([[0, 1, 2.0]]), PRIZES), CENTRE)


def test_joint_prediction():
    f = redundant_vertex_model()
    assert joint_prediction(f, [CENTRE], [CENTRE]) == {(CENTRE, CENTRE)}
    assert joint_prediction(f, [D1], [D2]) == {(D1, D2)}
    half = lot(0.5, 0, 0.5)
    pairs = joint_prediction(f, [D1, half], [D1])
    mixed = {x.mix(D1, 0.5): (x, D1) for x in (D1, half)}
    assert pairs == {mixed[c] for c in eu_choose(f, list(mixed))}


# ------------------------------------------------------------------ checks


def test_generated_data_passes_checks_on_coarse_grid():
    f = redundant_vertex_model()
    pts = simplex_grid(3, 0.05)
    rng = np.random.default_rng(0)
    menus = [(CENTRE, q) for q in pts] + [tuple(pts[i] for i in rng.choice(len(pts), 3, replace=False)) for _ in range(100)]
    data = eu_generate(f, menus)
    assert not all_violations(check_eu_axioms(data))


def test_independence_violation():
    p, q = lot(0.2, 0.4, 0.4), lot(0.2, 0.2, 0.6)
    q2 = p.mix(q, 0.5)
    obs = (((p, q), frozenset([q])), ((p, q2), frozenset([p])))
    data = LotteryDataset(PRIZES, obs)
    found = check_independence(data)
    assert found and found[0].axiom == "Independence"


def test_monotonicity_violation():
    obs = (((D0, D1, D2), frozenset([D1])), ((D1, D2), frozenset([D2])))
    data = LotteryDataset(PRIZES, obs)
    found = check_monotonicity(data)
    assert found and found[0].axiom == "Monotonicity"


def test_checks_without_utility_are_skipped():
    data = eu_generate(redundant_vertex_model(), [(D1, D2)], include_utility=False)
    res = check_eu_axioms(data)
    assert res["IUA"].notes == ["no true utility given"]


# ---------------------------------------------------------------- recovery


def test_recovery_unique_with_ties(g_grid):
    _, _, data = g_grid
    rec = recover_true_preference(data, CENTRE)
    assert rec.unique and utility_angle(rec.direction, U) < 1e-6
    assert rec.admits(U)


def test_recovery_half_space_family(f_grid):
    _, _, data = f_grid
    rec = recover_true_preference(data, CENTRE)
    assert not rec.unique and rec.admits(U)
    assert all(rec.admits(c) for c in rec.candidates)
    assert not rec.admits([0, 1, 0]) and not rec.admits(-U)


def test_recovery_needs_observations():
    data = eu_generate(redundant_vertex_model(), [(D1, D2)])
    with pytest.raises(IdentificationError):
        recover_true_preference(data, CENTRE)


def test_segment_membership_matches_lp():
    from scipy.optimize import linprog

    from justify.eucase.checks import _in_hull

    rng = np.random.default_rng(0)
    for _ in range(500):
        a, b = (Lottery(tuple(rng.dirichlet(np.ones(3)))) for _ in range(2))
        t = rng.uniform(-0.3, 1.3)
        v = t * a.vec + (1 - t) * b.vec
        q = Lottery(tuple(v)) if v.min() >= 0 else Lottery(tuple(rng.dirichlet(np.ones(3))))
        x = np.array([a.vec, b.vec])
        res = linprog(np.zeros(2), A_eq=np.vstack([x.T, np.ones((1, 2))]), b_eq=np.append(q.vec, 1), bounds=[(0, None)] * 2)
        assert (res.status == 0) == _in_hull(q, [a, b])
