import cmath
from fractions import Fraction

import pytest

from gzsums.brandt import CURVE_11A, EllipticCurve
from gzsums.cyclo import CyclotomicInteger, is_bottomed, residue_reduce
from gzsums.gross import red
from gzsums.gzsum import (
    ConductorMismatch, HypothesisFailure, TraceParameters, UnsupportedConfiguration, base_field_degree,
    build_instance, chi0_characters, embed_local, equivariance_holds, gz_average,
    gz_sum, in_M0, kernel_elements, main_theorem_scan, matrix_check_kP, matrix_check_lambda_factorization,
    mu_nu_experiment, primitive_characters, primitive_characters_over, psi_m_sum, psi_mD_sum,
    reduced_term_count, root_of_unity_traces, trace_direct, trace_identity_check,
    unit_char_sum, unit_char_sum_brute, unit_char_sum_labelled, valuation_table,
)
from gzsums.ringclass import characters, decompose, is_primitive


def to_complex(a: CyclotomicInteger) -> complex:
    z = cmath.exp(2j * cmath.pi / a.M)
    return sum(c * z ** k for k, c in enumerate(a.coeffs))


def direct_sum(inst, n, chi, w):
    """sum_sigma chi(sigma) theta(red(sigma . x)) in floating point, straight from the orbit."""
    orb = inst.orbit(n)
    G = orb.group
    E = chi.exponent
    total = 0
    for s in G.elements:
        P = orb.point(G.add(s, w))
        total += cmath.exp(2j * cmath.pi * chi.value(s) / E) * inst.theta.values[red(P)]
    return total


def test_instance_data(flagship, flagship7):
    assert flagship.theta.values == (2, -3)
    assert flagship.M == 12 and flagship.ctx.f_res == 2
    assert (flagship.mu.mu, flagship.mu.achieving_prime, flagship.nu) == (2, 3, 1)
    assert (flagship7.mu.mu, flagship7.nu) == (1, 0)
    assert flagship.summary()["lambda"]["l"] == 5


def test_instance_errors(classes11):
    with pytest.raises(HypothesisFailure):
        build_instance(CURVE_11A, -7, 3, 5, 1, classes=classes11)
    curve33 = EllipticCurve(1, 1, 0, -11, 0, 33)
    with pytest.raises(UnsupportedConfiguration):
        build_instance(curve33, -67, 3, 5, 1)


@pytest.mark.parametrize("n", [1, 2])
def test_sum_matches_floating_point(flagship, n):
    orb = flagship.orbit(n)
    for chi in characters(orb.group):
        for w, P in zip(orb.group.elements, orb.points):
            v = gz_sum(P, chi, flagship, check_conductor=False)
            assert abs(to_complex(v.value) - direct_sum(flagship, n, chi, w)) < 1e-9


def test_conductor_check(flagship):
    P = flagship.orbit(2).base
    G = flagship.tower.G(2)
    imprimitive = [c for c in characters(G) if not is_primitive(c, flagship.tower, 2)]
    assert len(imprimitive) == 4
    with pytest.raises(ConductorMismatch):
        gz_sum(P, imprimitive[1], flagship)
    with pytest.raises(ConductorMismatch):
        gz_sum(P, characters(flagship.tower.G(1))[1], flagship)


@pytest.mark.parametrize("n", [1, 2])
def test_equivariance(flagship, n):
    for chi in characters(flagship.tower.G(n)):
        assert equivariance_holds(flagship, n, chi)


def test_constant_theta_is_orthogonal(flagship):
    flat = flagship.with_theta((1, 1))
    for n in (1, 2):
        for chi in primitive_characters(n, flat):
            for P in flat.orbit(n).points:
                v = gz_sum(P, chi, flat)
                assert v.value.is_zero() and is_bottomed(v.valuation)


def test_average_is_sum(flagship):
    n = 2
    P = flagship.orbit(n).points[5]
    for chi0 in chi0_characters(n, flagship):
        chis = primitive_characters_over(chi0, n, flagship)
        assert len(chis) == 2
        total = CyclotomicInteger.from_int(flagship.M, 0)
        for chi in chis:
            total = total + gz_sum(P, chi, flagship).value
        assert gz_average(P, chi0, n, flagship).value == total


def test_valuations_bounded_below_by_nu(flagship):
    for n in (1, 2):
        for chi in primitive_characters(n, flagship):
            for P in flagship.orbit(n).points:
                v = gz_sum(P, chi, flagship).valuation
                assert is_bottomed(v) or v >= flagship.nu


def test_trivial_character_at_level_one(flagship):
    # theta sums to 3 * 2 - 3 = 3 over the level-1 orbit: a 5-adic unit, below nu
    P = flagship.orbit(1).base
    trivial = characters(flagship.tower.G(1))[0]
    v = gz_sum(P, trivial, flagship, check_conductor=False)
    assert v.value == CyclotomicInteger.from_int(flagship.M, 3)
    assert v.valuation == 0 < flagship.nu


def test_kernel_routes_and_term_counts(flagship_n3):
    inst = flagship_n3
    elems, route = kernel_elements(2, 1, inst)
    assert route == "labels" and len(elems) == 3
    elems, route = kernel_elements(3, 2, inst)
    assert route == "torsion" and len(elems) == 9
    assert reduced_term_count(2, 1, inst) == 2 * 2 * 3
    assert reduced_term_count(3, 1, inst) == 2 * 2 * 3


def test_reduced_sum_unfolds(flagship):
    # the two-step sum over G0/G1, G1/G2 and Z unfolds to the full sum over G0 x Z
    n = 2
    G = flagship.tower.G(n)
    subs = flagship.subgroups(n)
    orb = flagship.orbit(n)
    P = orb.points[3]
    w = orb.element_of(P)
    for chi in primitive_characters(n, flagship):
        chi0, chi1 = decompose(chi, G, subs)
        inner = [psi_m_sum(orb.point(G.add(t, w)), chi1, 1, flagship) for t in sorted(subs.G1)]
        via = psi_mD_sum(P, chi0, chi1, 1, flagship)
        expect = CyclotomicInteger.from_int(flagship.M, 0)
        for t, part in zip(sorted(subs.G1), inner):
            expect = expect + CyclotomicInteger.root(flagship.M, chi0.value(t) * flagship.M // chi0.exponent) * part
        assert via == expect


def test_trace_parameters(flagship):
    for chi0 in chi0_characters(2, flagship):
        p = TraceParameters.build(chi0, flagship)
        assert p.r == max(1, p.o) and p.m == p.r and p.k_exponent == flagship.mu.mu
        assert base_field_degree(chi0, flagship) == 2


def test_trace_identity_flagship(flagship):
    for n in (1, 2):
        for chi in primitive_characters(n, flagship):
            for P in flagship.orbit(n).points:
                rep = trace_identity_check(P, chi, flagship)
                assert rep.equal, rep.to_dict()


def test_trace_identity_sensitive_to_m(flagship):
    unequal = 0
    for chi in primitive_characters(2, flagship):
        for P in flagship.orbit(2).points:
            unequal += not trace_identity_check(P, chi, flagship, m=0).equal
    assert unequal > 0


def test_trace_direct_degree_one(flagship):
    # at level 1 the complement is trivial: the trace is the reduction of the sum itself
    for chi in primitive_characters(1, flagship):
        for P in flagship.orbit(1).points:
            v = gz_sum(P, chi, flagship).value
            assert trace_direct(P, chi, flagship) == residue_reduce(v, flagship.ctx)


def test_root_of_unity_traces():
    rows = root_of_unity_traces(5, 2, 3, 27)
    assert len(rows) == 27
    for r in rows:
        assert r["trace_zero"] != r["in_base"]
        if r["in_base"]:
            assert r["trace_is_degree_times_root"]


@pytest.mark.parametrize("p,m", [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)])
def test_unit_char_sum_closed_form(p, m):
    pm = p ** m
    for a in range(-pm, 2 * pm):
        for twist in (1, p - 1):
            assert unit_char_sum_brute(a, m, p, twist) == CyclotomicInteger.from_int(pm, unit_char_sum(a, m, p))
    with pytest.raises(ValueError):
        unit_char_sum_brute(1, m, p, p)


def test_unit_char_sum_through_labels(flagship):
    G = flagship.tower.G(2)
    subs = flagship.subgroups(2)
    for chi in primitive_characters(2, flagship):
        _, chi1 = decompose(chi, G, subs)
        for a in range(3):
            got = unit_char_sum_labelled(a, 1, chi1, 2, flagship)
            assert got == CyclotomicInteger.from_int(flagship.M, unit_char_sum(a, 1, 3))


TR, NW = -67, 1139


@pytest.mark.parametrize("delta", [0, 1])
def test_matrix_kP(delta):
    for n in range(delta, 5):
        assert matrix_check_kP(n, delta, 3, TR, NW)
    if delta:
        with pytest.raises(ValueError):
            matrix_check_kP(0, 1, 3, TR, NW)


@pytest.mark.parametrize("delta", [0, 1])
def test_matrix_lambda_factorization(delta):
    for m in (1, 2):
        for n in range(max(delta, m), 5):
            for a in range(3 ** m):
                assert matrix_check_lambda_factorization(a, n, m, delta, 3, TR, NW)
                if a:
                    assert not matrix_check_lambda_factorization(a, n, m, delta, 3, TR, NW, perturb=1)
    with pytest.raises(ValueError):
        matrix_check_lambda_factorization(1, 1, 2, 0, 3, TR, NW)


def test_local_embedding():
    w = embed_local(0, 1, TR, NW)
    # omega satisfies x^2 - Tr x + N = 0
    sq = [[sum(w[i][k] * w[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    assert all(sq[i][j] - TR * w[i][j] + NW * (i == j) == 0 for i in range(2) for j in range(2))
    assert in_M0(((Fraction(1), Fraction(9)), (Fraction(2), Fraction(1))), 3, 1)
    assert not in_M0(((Fraction(1), Fraction(1, 3)), (Fraction(0), Fraction(1))), 3, 0)


@pytest.mark.parametrize("n", [1, 2])
def test_main_scan(flagship, n):
    for chi0 in chi0_characters(n, flagship):
        out = main_theorem_scan(chi0, n, flagship)
        assert out["exists_y"]
        assert out["min"] < out["params"]["k_exponent"]


def test_mu_nu_experiment(flagship):
    out = mu_nu_experiment(flagship, (1,))
    assert out["mu"] == 2 and out["nu"] == 1 and out["nu_plus_one_equals_mu"]
    assert out["histograms"] == {"1": {"1": 12}}


def test_valuation_table(flagship):
    rows = valuation_table(flagship, [1, 2])
    assert len(rows) == 12 + 96
    assert len(set(rows)) == len(rows)
    assert rows == sorted(rows)
    assert all(r[4] == "1" for r in rows)
