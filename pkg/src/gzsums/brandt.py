"""Brandt matrices, the rational eigenform, and the Eisenstein constants mu and nu."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

import sympy

from .numerics import factorize, kronecker_symbol, primes_up_to, quad_value, short_vectors, vectors_of_norm
from .quat import (
    IdealClassSet, conj_lattice, gram_matrix, lattice_product,
)


# ------------------------------------------------------------------ curves

@dataclass(frozen=True)
class EllipticCurve:
    """Long Weierstrass model [a1, a2, a3, a4, a6] with its conductor."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int

    @property
    def coefficients(self) -> tuple[int, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def discriminant(self) -> int:
        a1, a2, a3, a4, a6 = self.coefficients
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


CURVE_11A = EllipticCurve(0, -1, 1, -10, -20, 11)


def aq_pointcount(curve: EllipticCurve, q: int) -> int:
    """a_q = q + 1 - #E(F_q) by enumerating the affine points."""
    if curve.discriminant % q == 0:
        raise ValueError(f"{q} is a prime of bad reduction")
    a1, a2, a3, a4, a6 = (c % q for c in curve.coefficients)
    count = 1
    for x in range(q):
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % q
        for y in range(q):
            if (y * y + a1 * x * y + a3 * y - rhs) % q == 0:
                count += 1
    return q + 1 - count


# --------------------------------------------------------------- matrices

@dataclass(frozen=True)
class BrandtMatrix:
    q: int
    matrix: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.matrix)

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.matrix]


def _count_entry(S: IdealClassSet, i: int, j: int, m: int) -> int:
    A = S.order.algebra
    I, J = S.reps[i], S.reps[j]
    L = lattice_product(A, I.lattice, conj_lattice(A, J.lattice))
    G = gram_matrix(A, L, I.nrd * J.nrd)
    return len(vectors_of_norm(G, m))


def _column(args) -> list[int]:
    S, j, m = args
    return [_count_entry(S, i, j, m) for i in range(len(S))]


def brandt_counts(S: IdealClassSet, m: int, jobs: int = 1) -> list[list[int]]:
    """Raw counts #{y in I_i conj(I_j) : nrd(y) = m nrd(I_i) nrd(I_j)}."""
    h = len(S)
    tasks = [(S, j, m) for j in range(h)]
    if jobs > 1 and h > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cols = list(pool.map(_column, tasks))
    else:
        cols = [_column(t) for t in tasks]
    return [[cols[j][i] for j in range(h)] for i in range(h)]


def brandt_matrix(S: IdealClassSet, q: int, jobs: int = 1) -> BrandtMatrix:
    """Brandt matrix for the norm q (q need not be prime; all elements are counted)."""
    counts = brandt_counts(S, q, jobs)
    rows = []
    for i, row in enumerate(counts):
        out = []
        for j, c in enumerate(row):
            w = S.weights[j]
            if c % (2 * w):
                raise ArithmeticError("count not divisible by 2w; class data inconsistent")
            out.append(c // (2 * w))
        rows.append(tuple(out))
    return BrandtMatrix(q, tuple(rows))


def is_self_adjoint(B: BrandtMatrix, weights: Sequence[int]) -> bool:
    M = B.matrix
    h = len(M)
    return all(M[i][j] * weights[j] == M[j][i] * weights[i] for i in range(h) for j in range(h))


# -------------------------------------------------------------- eigenforms

@dataclass(frozen=True)
class ThetaForm:
    values: tuple[int, ...]
    eigenvalues: dict = field(default_factory=dict, compare=False, hash=False)

    def a(self, q: int) -> int:
        if q not in self.eigenvalues:
            raise KeyError(f"eigenvalue a_{q} not computed")
        return self.eigenvalues[q]


def _primitive(vec) -> tuple[int, ...]:
    den = 1
    for x in vec:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return tuple(-x for x in ints) if lead < 0 else tuple(ints)


def hecke_eigenforms(matrices: Sequence[BrandtMatrix], weights: Sequence[int] | None = None,
                     dropped: list | None = None) -> list[ThetaForm]:
    """Rational simultaneous eigenvectors orthogonal to the constants.

    Orthogonality is for the weighted pairing sum x_i y_i / w_i.  Eigenspaces
    with irrational eigenvalues are skipped; pass a list as `dropped` to
    collect (q, irreducible factor) for each of them.
    """
    if not matrices:
        raise ValueError("need at least one Brandt matrix")
    h = len(matrices[0])
    if weights is None:
        weights = [1] * h
    # basis of the complement of the constants
    constraint = sympy.Matrix([[sympy.Rational(1, w) for w in weights]])
    spaces = [sympy.Matrix.hstack(*constraint.nullspace())] if h > 1 else []
    systems: list[tuple[sympy.Matrix, dict]] = [(V, {}) for V in spaces]
    for B in matrices:
        Bm = sympy.Matrix(B.matrix)
        refined = []
        for V, eig in systems:
            # matrix of B on the column space of V
            coeffs = (V.T * V).inv() * V.T * Bm * V
            x = sympy.Symbol("x")
            poly = sympy.Poly(coeffs.charpoly(x).as_expr(), x)
            for factor, _mult in sympy.factor_list(poly.as_expr())[1]:
                fp = sympy.Poly(factor, x)
                if fp.degree() != 1:
                    if dropped is not None:
                        dropped.append((B.q, str(factor)))
                    continue
                root = -fp.all_coeffs()[1] / fp.all_coeffs()[0]
                kernel = (coeffs - root * sympy.eye(coeffs.shape[0])).nullspace()
                W = V * sympy.Matrix.hstack(*kernel)
                refined.append((W, {**eig, B.q: int(root)}))
        systems = refined
    out = []
    for V, eig in systems:
        if V.shape[1] != 1:
            continue
        out.append(ThetaForm(_primitive(list(V[:, 0])), dict(eig)))
    return sorted(out, key=lambda t: t.values)


def eigenvalue(S: IdealClassSet, theta_values: Sequence[int], q: int) -> int:
    """a_q read off one row of the Brandt matrix."""
    i = next(k for k, v in enumerate(theta_values) if v)
    h = len(S)
    row = [_count_entry(S, i, j, q) // (2 * S.weights[j]) for j in range(h)]
    s = sum(r * t for r, t in zip(row, theta_values))
    if s % theta_values[i]:
        raise ArithmeticError("vector is not an eigenvector")
    return s // theta_values[i]


def with_eigenvalues(theta: ThetaForm, S: IdealClassSet, primes) -> ThetaForm:
    eig = dict(theta.eigenvalues)
    bad = S.order.algebra.disc * S.order.level
    for q in primes:
        if q not in eig and bad % q:
            eig[q] = eigenvalue(S, theta.values, q)
    return ThetaForm(theta.values, eig)


# ------------------------------------------------------------- norm classes

@dataclass(frozen=True)
class NormClassSet:
    """The finite set N_H with the map c from ideal classes."""

    elements: tuple
    c_map: tuple[int, ...]

    def fibres(self) -> list[list[int]]:
        return [[i for i, c in enumerate(self.c_map) if c == z] for z in range(len(self.elements))]


def norm_class_set(S: IdealClassSet, search_norm: int = 400) -> NormClassSet:
    """Compute N_H for Q: trivial exactly when nrd hits every local unit class.

    Checked at 2 (mod 8) and at each prime of disc*level (mod l) using the
    reduced norms of short elements; other primes are split and unramified.
    """
    R = S.order
    A = R.algebra
    primes = sorted(set(factorize(2 * A.disc * R.level)))
    G = R.gram()
    bound = 16
    while True:
        norms = {quad_value(G, v) for v in short_vectors(G, bound, all_signs=False)}
        missing = []
        for ell in primes:
            mod = 8 if ell == 2 else ell
            units = {u for u in range(mod) if gcd(u, mod) == 1}
            hit = {int(n) % mod for n in norms if gcd(int(n), mod) == 1}
            if hit != units:
                missing.append(ell)
        if not missing:
            break
        if bound >= search_norm:
            raise NotImplementedError(f"reduced norm not surjective at {missing}; N_H nontrivial")
        bound = min(2 * bound, search_norm)
    return NormClassSet(("1",), tuple(0 for _ in range(len(S))))


# --------------------------------------------------------- Eisenstein data

def _ord(ctx, n: int) -> int | None:
    return None if n == 0 else ctx.ord_rational(n)


def is_eisenstein_mod(phi: Sequence[int], r: int, ctx, N: NormClassSet) -> bool:
    """phi mod lambda^r is constant on each fibre of c."""
    for fib in N.fibres():
        base = phi[fib[0]] if fib else 0
        for i in fib:
            v = _ord(ctx, phi[i] - base)
            if v is not None and v < r:
                return False
    return True


def is_exceptional_mod(phi: Sequence[int], r: int, ctx, N: NormClassSet,
                       orbit_data: Sequence[Sequence[int]]) -> bool:
    """Some Galois orbit in N_H has phi constant mod lambda^r on each of its fibres.

    orbit_data lists orbits as lists of indices into N.elements.
    """
    fibres = N.fibres()

    def constant(fib):
        return all((v := _ord(ctx, phi[i] - phi[fib[0]])) is None or v >= r for i in fib)

    return any(all(constant(fibres[z]) for z in orbit if fibres[z]) for orbit in orbit_data)


def nu_constant(theta: ThetaForm, ctx, N: NormClassSet) -> int:
    """Largest r with theta Eisenstein mod lambda^r."""
    best = None
    for fib in N.fibres():
        for i in fib:
            v = _ord(ctx, theta.values[i] - theta.values[fib[0]])
            if v is not None:
                best = v if best is None else min(best, v)
    if best is None:
        raise ValueError("constant function: Eisenstein vectors are excluded")
    return best


@dataclass(frozen=True)
class MuResult:
    mu: int
    achieving_prime: int
    bound: int
    valuations: dict


def mu_constant(theta: ThetaForm, ctx, N: int, D: int, p: int, bound: int) -> MuResult:
    """min over primes v <= bound, v not dividing N*D, of ord(a_v - 1 - v) + 1.

    The achieving prime is the least odd minimiser when one exists.
    """
    primes = [v for v in primes_up_to(bound) if N % v and D % v]
    if not primes:
        raise ValueError(f"no admissible prime up to {bound}")
    vals = {}
    for v in primes:
        diff = theta.a(v) - 1 - v
        if diff:
            vals[v] = ctx.ord_rational(diff)
    if not vals:
        raise ValueError("a_v = 1 + v for all admissible v; raise the bound")
    low = min(vals.values())
    minimisers = [v for v in primes if vals.get(v) == low]
    odd = [v for v in minimisers if v % 2]
    return MuResult(low + 1, (odd or minimisers)[0], bound, vals)


def lambda_unit_entry(theta: ThetaForm, ctx) -> bool:
    return any(v and ctx.ord_rational(v) == 0 for v in theta.values)


# ---------------------------------------------------------------- hypotheses

@dataclass(frozen=True)
class HypothesisReport:
    non_exceptional: bool
    coprime_level: bool
    s_even: bool
    unit_inert_prime: bool
    p_unramified: bool
    S_ram: tuple
    details: dict

    @property
    def ok(self) -> bool:
        return (self.non_exceptional and self.coprime_level and self.s_even
                and self.unit_inert_prime and self.p_unramified)


def hypothesis_checks(curve: EllipticCurve, K_disc: int, p: int, l: int, bound: int = 100) -> HypothesisReport:
    N = curve.conductor
    fac = factorize(N)
    N_prime = N // p ** fac.get(p, 0)
    inert = [q for q in primes_up_to(bound)
             if N % q and kronecker_symbol(K_disc, q) == -1]
    aq = {q: aq_pointcount(curve, q) for q in inert}
    non_exc = next((q for q in inert if aq[q] != 0), None)
    unit = next((q for q in inert if aq[q] % l), None)
    S_ram = ["inf"] + [q for q, e in sorted(fac.items())
                       if q != p and kronecker_symbol(K_disc, q) == -1 and e % 2]
    return HypothesisReport(
        non_exceptional=non_exc is not None,
        coprime_level=gcd(N_prime, K_disc) == 1,
        s_even=len(S_ram) % 2 == 0,
        unit_inert_prime=unit is not None,
        p_unramified=K_disc % p != 0 and p % 2 == 1,
        S_ram=tuple(S_ram),
        details={"witness_nonzero": non_exc, "witness_unit": unit, "N_prime": N_prime},
    )
