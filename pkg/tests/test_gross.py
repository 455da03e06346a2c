from types import SimpleNamespace

import pytest

from gzsums.gross import (
    ActionContext, GrossPoint, TransitivityError, canonical_embedding, cm_points, distribution_survey,
    galois_act, optimal_embeddings, red,
)
from gzsums.gzsum import coset_representatives
from gzsums.ringclass import QuadraticOrder, compose, principal_form, tower


def _ctx(inst, n):
    S = inst.classes
    return ActionContext(S, QuadraticOrder(inst.d_K, inst.p ** n), S.order.algebra.disc * 2)


def test_embedding_counts(flagship):
    S = flagship.classes
    for n, h in ((1, 4), (2, 12)):
        order = QuadraticOrder(-67, 3 ** n)
        assert len(optimal_embeddings(order, S)) == h
        # both orientations at the ramified prime
        assert len(optimal_embeddings(order, S, oriented=False)) == 2 * h


def test_eisenstein_integers_embed_in_disc_2(classes2):
    assert len(optimal_embeddings(QuadraticOrder(-3, 1), classes2)) > 0


def test_split_ramified_prime_is_obstructed(classes11):
    # 11 splits in Q(sqrt -7)
    assert optimal_embeddings(QuadraticOrder(-7, 3), classes11) == []
    with pytest.raises(TransitivityError):
        cm_points(classes11, tower(-7, 3, 1), 1)


@pytest.mark.parametrize("n", [1, 2])
def test_simple_transitivity(flagship, n):
    orb = flagship.orbit(n)
    G = orb.group
    assert len(orb.points) == G.order == len({P.key() for P in orb.points})
    assert orb.point(G.identity) == orb.base
    ctx = _ctx(flagship, n)
    for g in G.generators:
        images = [galois_act(g, P, ctx) for P in orb.points]
        assert len({P.key() for P in images}) == G.order      # a permutation
        gv = G.log(g)
        for v, img in zip(G.elements, images):
            assert orb.element_of(img) == G.add(gv, v)
            if gv != G.identity:
                assert img != orb.points[G.elements.index(v)]   # no fixed points


def test_identity_acts_trivially(flagship):
    orb = flagship.orbit(2)
    ctx = _ctx(flagship, 2)
    e = principal_form(orb.group.disc)
    for P in orb.points:
        assert galois_act(e, P, ctx) == P


def test_action_is_homomorphism(flagship):
    n = 1
    orb = flagship.orbit(n)
    G = orb.group
    ctx = _ctx(flagship, n)
    P = orb.base
    for u in G.elements:
        for v in G.elements:
            f, g = G.form(u), G.form(v)
            assert galois_act(compose(f, g), P, ctx) == galois_act(f, galois_act(g, P, ctx), ctx)


@pytest.mark.parametrize("n", [1, 2])
def test_minimal_polynomial_and_optimality(flagship, n):
    orb = flagship.orbit(n)
    order = QuadraticOrder(-67, 3 ** n)
    A = flagship.classes.order.algebra
    for P in orb.points:
        x = P.embedding
        O = flagship.classes.left_orders[P.class_index]
        assert A.trd(x) == order.trace_generator and A.nrd(x) == order.norm_generator
        assert x in O.lattice
        assert tuple(c / 3 for c in x) not in O.lattice
        assert canonical_embedding(O, x) == x


def test_reduction_multiset(flagship):
    assert sorted(flagship.orbit(1).red_values()) == [0, 0, 0, 1]
    assert sorted(flagship.orbit(2).red_values()) == [0] * 9 + [1] * 3
    assert red(GrossPoint(1, (0, 0, 0, 0), 0)) == 1


def test_survey_levels(flagship, flagship_n3):
    orb0 = flagship.orbit(0)
    s0 = distribution_survey(orb0, [orb0.group.identity], 2)
    assert s0["coverage"] == "1/2" and not s0["surjective"]
    expected = {1: ("3/4", False), 2: ("1", True), 3: ("1", True)}
    for n, (cov, surj) in expected.items():
        inst = flagship_n3
        G = inst.tower.G(n)
        subs = inst.subgroups(n)
        reps = coset_representatives(G, subs.G0, subs.G1)
        out = distribution_survey(inst.orbit(n), reps, len(inst.classes))
        assert (out["coverage"], out["surjective"]) == (cov, surj)


def test_survey_single_class():
    G = tower(-67, 3, 1).G(1)
    fake = SimpleNamespace(n=1, group=G, by_element={v: GrossPoint(0, (0, 0, 0, 0), 1) for v in G.elements})
    out = distribution_survey(fake, [G.identity], 1)
    assert out["surjective"] and out["target"] == 1
