from fractions import Fraction

from hypothesis import given, settings, strategies as st

from gzsums.numerics import (
    det, hnf, hnf_basis, kronecker_symbol, lagrange_reduce, mat_mul, quad_value, short_vectors,
    snf, solve_integer, vectors_of_norm,
)

UNIT4 = [[2 if i == j else 0 for j in range(4)] for i in range(4)]
# trace form of the Hurwitz order in (-1,-1): basis 1, i, j, (1+i+j+k)/2
HURWITZ = [[2, 0, 0, 1], [0, 2, 0, 1], [0, 0, 2, 1], [1, 1, 1, 2]]


def test_kronecker_examples():
    assert kronecker_symbol(-67, 11) == -1
    assert kronecker_symbol(17, 1) == 1
    assert kronecker_symbol(4, 7) == 1
    assert kronecker_symbol(-67, 2) == -1
    assert kronecker_symbol(-7, 11) == 1


@given(st.integers(-200, 200), st.integers(-200, 200), st.integers(1, 60))
def test_kronecker_multiplicative_top(a, b, n):
    assert kronecker_symbol(a * b, n) == kronecker_symbol(a, n) * kronecker_symbol(b, n)


@given(st.integers(-300, 300).filter(lambda a: a % 4 in (0, 1)), st.integers(1, 40), st.integers(1, 40))
def test_kronecker_multiplicative_bottom(a, m, n):
    assert kronecker_symbol(a, m * n) == kronecker_symbol(a, m) * kronecker_symbol(a, n)


def test_kronecker_matches_euler_for_odd_primes():
    for q in (3, 5, 7, 11, 13, 67):
        for a in range(-40, 40):
            e = pow(a % q, (q - 1) // 2, q)
            expect = 0 if a % q == 0 else (1 if e == 1 else -1)
            assert kronecker_symbol(a, q) == expect


def test_short_vectors_unit_lattice():
    vs = short_vectors(UNIT4, 1)
    nonzero = [v for v in vs if any(v)]
    assert len(nonzero) == 8
    assert all(sum(abs(c) for c in v) == 1 for v in nonzero)
    assert short_vectors(UNIT4, 0) == [(0, 0, 0, 0)]


def test_short_vectors_hurwitz_units():
    nonzero = [v for v in short_vectors(HURWITZ, 1) if any(v)]
    assert len(nonzero) == 24


def test_short_vectors_brute_force_box():
    G = [[4, 1, 0, 1], [1, 6, 2, 0], [0, 2, 8, 1], [1, 0, 1, 10]]
    got = set(short_vectors(G, 9))
    rng = range(-4, 5)
    box = {(a, b, c, d) for a in rng for b in rng for c in rng for d in rng
           if quad_value(G, (a, b, c, d)) <= 9}
    assert got == box


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 6))
def test_short_vectors_symmetric_and_monotone(bound):
    a = short_vectors(HURWITZ, bound)
    b = short_vectors(HURWITZ, bound + 1)
    assert set(a) <= set(b)
    assert {tuple(-c for c in v) for v in a} == set(a)
    half = short_vectors(HURWITZ, bound, all_signs=False)
    assert 2 * (len(half) - 1) == len(a) - 1


def test_vectors_of_norm_exact():
    assert len(vectors_of_norm(UNIT4, 1)) == 8
    assert len(vectors_of_norm(UNIT4, 2)) == 24


def test_lagrange_reduce_preserves_lattice():
    G = [[10, 7, 0, 0], [7, 6, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]]
    R, T = lagrange_reduce(G)
    assert abs(det(T)) == 1
    Tt = [list(r) for r in zip(*T)]
    assert mat_mul(mat_mul(T, G), Tt) == [list(r) for r in R] or mat_mul(mat_mul(Tt, G), T) == [list(r) for r in R]


def test_hnf_examples():
    I = [[1, 0], [0, 1]]
    assert hnf_basis(I) == I
    H = hnf_basis([[2, 0], [0, 3], [1, 1]])
    assert 6 % abs(det(H)) == 0
    assert all(not any(r) for r in hnf([[0, 0], [0, 0]]))


small = st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(small)
def test_hnf_same_row_lattice(M):
    H = hnf_basis(M)
    for row in M:
        if any(row):
            assert solve_integer(H, row) is not None
    for row in H:
        assert solve_integer(hnf_basis(M), row) is not None
        # H rows lie in the span of M
        assert solve_integer(hnf_basis([r for r in M if any(r)]), row) is not None


def test_snf_examples():
    D, U, V = snf([[2, 0], [0, 3]])
    assert [D[0][0], D[1][1]] == [1, 6]
    D, U, V = snf([[2, 4], [6, 8]])
    assert [D[0][0], D[1][1]] == [2, 4]
    D, _, _ = snf([[1, 0], [0, 1]])
    assert D == [[1, 0], [0, 1]]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-12, 12), min_size=3, max_size=3), min_size=3, max_size=3))
def test_snf_factorisation(M):
    D, U, V = snf(M)
    assert mat_mul(mat_mul(U, M), V) == D
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    diag = [D[i][i] for i in range(3)]
    assert all(D[i][j] == 0 for i in range(3) for j in range(3) if i != j)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) or (a != 0 and b % a == 0)


def test_quad_value_is_half_gram():
    assert quad_value(UNIT4, (1, 1, 0, 0)) == 2
    assert quad_value(HURWITZ, (0, 0, 0, 1)) == Fraction(1)
