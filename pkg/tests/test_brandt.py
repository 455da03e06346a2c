import pytest

from gzsums.brandt import (
    CURVE_11A, EllipticCurve, NormClassSet, ThetaForm, aq_pointcount, brandt_matrix,
    hecke_eigenforms, hypothesis_checks, is_eisenstein_mod, is_exceptional_mod, is_self_adjoint,
    mu_constant, norm_class_set, nu_constant, with_eigenvalues,
)
from gzsums.cyclo import lambda_context
from gzsums.numerics import primes_up_to

PRIMES = (2, 3, 5, 7, 13)


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


@pytest.fixture(scope="module")
def brandt11(classes11):
    return {q: brandt_matrix(classes11, q) for q in PRIMES}


def test_row_sums(brandt11):
    for q, B in brandt11.items():
        assert all(sum(row) == q + 1 for row in B.matrix)


def test_known_matrix(brandt11):
    # weights (2, 3) in class order; B_2 has eigenvalues 3 and -2
    B = brandt11[2].as_lists()
    tr = B[0][0] + B[1][1]
    det = B[0][0] * B[1][1] - B[0][1] * B[1][0]
    assert (tr, det) == (1, -6)


def test_commutation(brandt11):
    for q in PRIMES:
        for r in PRIMES:
            A, B = brandt11[q].as_lists(), brandt11[r].as_lists()
            assert matmul(A, B) == matmul(B, A)


def test_square_recursion(classes11, brandt11):
    for q in (2, 3):
        Bq = brandt11[q].as_lists()
        sq = matmul(Bq, Bq)
        expect = [[sq[i][j] - q * (i == j) for j in range(len(sq))] for i in range(len(sq))]
        assert brandt_matrix(classes11, q * q).as_lists() == expect


def test_self_adjoint(classes11, brandt11):
    for B in brandt11.values():
        assert is_self_adjoint(B, classes11.weights)


def test_disc2_has_no_cusp_forms(classes2):
    B = brandt_matrix(classes2, 3)
    assert B.as_lists() == [[4]]
    assert hecke_eigenforms([B], classes2.weights) == []


def test_eigenform_matches_point_counts(classes11):
    mats = [brandt_matrix(classes11, q) for q in (2, 3, 5, 7)]
    forms = hecke_eigenforms(mats, classes11.weights)
    assert len(forms) == 1
    theta = with_eigenvalues(forms[0], classes11, primes_up_to(50))
    assert theta.a(2) == -2 and theta.a(3) == -1
    for q in primes_up_to(50):
        if q != 11:
            assert theta.a(q) == aq_pointcount(CURVE_11A, q)
    with pytest.raises(KeyError):
        theta.a(11)


def test_point_counts():
    assert [aq_pointcount(CURVE_11A, q) for q in (2, 3, 5, 7, 13)] == [-2, -1, 1, -2, 4]
    with pytest.raises(ValueError):
        aq_pointcount(CURVE_11A, 11)
    assert CURVE_11A.discriminant == -161051


def test_eigenforms_need_input():
    with pytest.raises(ValueError):
        hecke_eigenforms([])


@pytest.mark.parametrize("l,mu,prime,nu", [(5, 2, 3, 1), (7, 1, 2, 0)])
def test_mu_nu(classes11, l, mu, prime, nu):
    mats = [brandt_matrix(classes11, q) for q in (2, 3)]
    theta = with_eigenvalues(hecke_eigenforms(mats, classes11.weights)[0], classes11, primes_up_to(100))
    ctx = lambda_context(l, 12, 3)
    res = mu_constant(theta, ctx, 11, -67, 3, 100)
    assert res.mu == mu
    if l == 5:
        assert res.achieving_prime == prime
    assert nu_constant(theta, ctx, norm_class_set(classes11)) == nu
    assert nu < mu


def test_mu_bound_without_primes(classes11):
    theta = ThetaForm((2, -3), {})
    with pytest.raises(ValueError):
        mu_constant(theta, lambda_context(5, 12, 3), 11, -67, 3, 0)


def test_norm_classes_trivial(classes11, classes2):
    for S in (classes11, classes2):
        N = norm_class_set(S)
        assert len(N.elements) == 1 and N.fibres() == [list(range(len(S)))]


def test_eisenstein_predicates():
    ctx = lambda_context(5, 12, 3)
    one = NormClassSet(("1",), (0, 0))
    assert is_eisenstein_mod((2, -3), 1, ctx, one)
    assert not is_eisenstein_mod((2, -3), 2, ctx, one)
    assert not is_eisenstein_mod((1, 2), 1, ctx, one)
    # synthetic two-element N_H with two singleton orbits
    two = NormClassSet(("a", "b"), (0, 0, 1, 1))
    phi = (1, 6, 0, 2)
    assert not is_eisenstein_mod(phi, 1, ctx, two)
    assert is_exceptional_mod(phi, 1, ctx, two, [[0], [1]])
    assert not is_exceptional_mod(phi, 1, ctx, two, [[0, 1]])
    assert not is_exceptional_mod(phi, 2, ctx, two, [[0], [1]])
    with pytest.raises(ValueError):
        nu_constant(ThetaForm((4, 4)), ctx, one)


def test_hypotheses():
    rep = hypothesis_checks(CURVE_11A, -67, 3, 5)
    assert rep.ok and rep.S_ram == ("inf", 11)
    bad = hypothesis_checks(CURVE_11A, -7, 3, 5)
    assert not bad.s_even and not bad.ok
    assert not hypothesis_checks(CURVE_11A, -67, 67, 5).p_unramified


def test_discriminant_formula():
    E = EllipticCurve(0, 0, 0, -1, 0, 32)   # y^2 = x^3 - x
    assert E.discriminant == 64
