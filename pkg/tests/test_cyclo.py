import pytest
from hypothesis import given, settings, strategies as st

from gzsums.cyclo import (
    BottomedOut, CyclotomicInteger, absolute_norm, all_lambda_contexts, cyc_add, cyc_conj, cyc_mul,
    cyclotomic_poly, euler_phi, is_bottomed, lambda_context, ord_lambda, ord_lambda_ladder,
    residue_one, residue_reduce, residue_trace, residue_zero,
)
from gzsums.numerics import valuation
from samples import sample_pairs

Z = CyclotomicInteger


def zeta(M, k=1):
    return Z.root(M, k)


def test_ring_relations():
    assert cyc_add(zeta(3), zeta(3, 2)) == Z.from_int(3, -1)
    a = Z(12, (1, 2, 3, 4))
    assert cyc_conj(a, 1) == a
    assert cyc_mul(zeta(12, 5), zeta(12, 7)) == Z.from_int(12, 1)
    one_minus = Z.from_int(3, 1) - zeta(3)
    assert one_minus * one_minus.conj(2) == Z.from_int(3, 3)
    assert absolute_norm(one_minus) == 3
    with pytest.raises(ValueError):
        a.conj(3)


def test_lift_between_levels():
    assert zeta(3).lift(12) == zeta(12, 4)
    assert (zeta(3) + zeta(4)).M == 12
    with pytest.raises(ValueError):
        zeta(12).lift(18)


def test_cyclotomic_polys():
    assert cyclotomic_poly(3) == (1, 1, 1)
    assert cyclotomic_poly(12) == (1, 0, -1, 0, 1)
    assert [euler_phi(m) for m in (3, 9, 12, 36)] == [2, 6, 4, 12]


def test_contexts():
    c = lambda_context(5, 12, 3)
    assert (c.f_res, c.e_ram) == (2, 1) and c.mu_p_in_residue and c.residue_order == 25
    c = lambda_context(3, 9, 3)
    assert (c.e_ram, c.f_res) == (6, 1)
    with pytest.raises(ValueError):
        lambda_context(5, 15, 3)
    assert lambda_context(7, 36, 3) == lambda_context(7, 36, 3)
    assert len(all_lambda_contexts(5, 12, 3)) == 2


def test_valuation_examples():
    c = lambda_context(3, 3, 3)
    assert ord_lambda(Z.from_int(3, 3), c) == 2
    assert ord_lambda(Z.from_int(3, 1) - zeta(3), c) == 1
    c5 = lambda_context(5, 3, 3)
    assert ord_lambda(zeta(3) - 1, c5) == 0
    assert ord_lambda(Z.from_int(3, 25), c5) == 2
    assert ord_lambda(Z.from_int(3, 0), c5) == BottomedOut(12)
    assert not BottomedOut(3)


def test_bottomed_out_and_ladder():
    c = lambda_context(5, 12, 3, Kcap=3)
    big = Z.from_int(12, 5 ** 4)
    assert is_bottomed(ord_lambda(big, c))
    assert ord_lambda_ladder(big, c) == 4


@pytest.mark.parametrize("M,l,a,b", sample_pairs(count=36))
def test_valuation_is_additive(M, l, a, b):
    for ctx in all_lambda_contexts(l, M, 3, Kcap=16):
        va, vb = ord_lambda(a, ctx), ord_lambda(b, ctx)
        assert ord_lambda(a * b, ctx) == va + vb
        s = a + b
        if not s.is_zero():
            vs = ord_lambda(s, ctx)
            assert vs >= min(va, vb)
            if va != vb:
                assert vs == min(va, vb)


@pytest.mark.parametrize("M,l,a,b", sample_pairs(seed=7, count=24))
def test_norm_compatibility(M, l, a, b):
    total = 0
    for ctx in all_lambda_contexts(l, M, 3, Kcap=16):
        total += ctx.f_res * ord_lambda(a, ctx)
    assert total == valuation(absolute_norm(a), l)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=4, max_size=4))
def test_residue_zero_iff_positive_valuation(coeffs):
    ctx = lambda_context(5, 12, 3)
    a = Z(12, tuple(coeffs))
    if a.is_zero():
        return
    assert residue_reduce(a, ctx).is_zero() == (ord_lambda(a, ctx) >= 1)


def test_residue_basics():
    ctx = lambda_context(5, 12, 3)
    assert residue_reduce(Z.from_int(12, 5), ctx).is_zero()
    assert residue_reduce(Z.from_int(12, 1), ctx) == residue_one(ctx)
    x = residue_reduce(zeta(12), ctx)
    assert x ** 12 == residue_one(ctx) and x ** 6 != residue_one(ctx)
    assert residue_reduce(zeta(12) * zeta(12, 3), ctx) == x * residue_reduce(zeta(12, 3), ctx)
    with pytest.raises(ValueError):
        residue_reduce(zeta(12), ctx, r=0)
    deep = residue_reduce(Z.from_int(12, 30), ctx, r=2)
    assert not deep.is_zero()


def test_residue_trace():
    ctx = lambda_context(5, 36, 3)
    one = residue_one(ctx)
    assert residue_trace(one, 3) == one * 3
    z9 = residue_reduce(zeta(36, 4), ctx)    # primitive 9th root, not in F_25
    assert residue_trace(z9, 3, q=25).is_zero()
    z3 = residue_reduce(zeta(36, 12), ctx)   # cube root, already in F_25
    assert residue_trace(z3, 3, q=25) == z3 * 3
    assert residue_trace(z9, 1) == z9
    assert residue_trace(residue_zero(ctx), 5).is_zero()
