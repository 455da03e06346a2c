"""Exact integer and lattice primitives.

Everything here is arbitrary precision. Matrices are plain lists of lists of
ints (or Fractions where noted) and functions never mutate their inputs.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence

IntMatrix = list[list[int]]


# ---------------------------------------------------------------- arithmetic

def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // gcd(out, x) if x else 0
    return abs(out)


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer (or Fraction)."""
    if isinstance(n, Fraction):
        return valuation(n.numerator, p) - valuation(n.denominator, p)
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for k in range(2, isqrt(bound) + 1):
        if sieve[k]:
            sieve[k * k::k] = bytearray(len(sieve[k * k::k]))
    return [k for k in range(bound + 1) if sieve[k]]


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorisation of |n| (desk-scale inputs only)."""
    n = abs(n)
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a|n)."""
    if n == 0:
        raise ValueError("kronecker_symbol needs n != 0")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol for odd n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def multiplicative_order(a: int, m: int) -> int:
    if m == 1:
        return 1
    if gcd(a, m) != 1:
        raise ValueError(f"{a} is not a unit mod {m}")
    k, x = 1, a % m
    while x != 1:
        x = x * a % m
        k += 1
    return k


def crt(residues: Sequence[int], moduli: Sequence[int]) -> tuple[int, int]:
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        g, u, _ = xgcd(m, n)
        if (r - x) % g:
            raise ValueError("incompatible congruences")
        x += m * ((r - x) // g * u % (n // g))
        m = lcm(m, n)
        x %= m
    return x, m


# ------------------------------------------------------------------ matrices

def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in A]


def transpose(A: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in zip(*A)]


def det(A: Sequence[Sequence]) -> Fraction | int:
    """Determinant by fraction-free Gaussian elimination (Bareiss)."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(r) for r in A]
    if any(isinstance(x, Fraction) for r in M for x in r):
        M = [[Fraction(x) for x in r] for r in M]
        sign, out = 1, Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if M[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                M[c], M[piv] = M[piv], M[c]
                sign = -sign
            out *= M[c][c]
            for r in range(c + 1, n):
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
        return sign * out
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            piv = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if piv is None:
                return 0
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def hnf(M: Sequence[Sequence[int]]) -> IntMatrix:
    """Row Hermite normal form; same shape as M with zero rows at the bottom.

    Pivots are positive, entries above a pivot lie in [0, pivot).
    """
    A = [list(r) for r in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    r = 0
    for c in range(cols):
        if r == rows:
            break
        # gcd-reduce column c among rows r.. into row r
        for i in range(r + 1, rows):
            if A[i][c] == 0:
                continue
            g, x, y = xgcd(A[r][c], A[i][c])
            a, b = A[r][c] // g, A[i][c] // g
            A[r], A[i] = (
                [x * u + y * v for u, v in zip(A[r], A[i])],
                [-b * u + a * v for u, v in zip(A[r], A[i])],
            )
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-u for u in A[r]]
        piv = A[r][c]
        for i in range(r):
            q = A[i][c] // piv
            if q:
                A[i] = [u - q * v for u, v in zip(A[i], A[r])]
        r += 1
    return A


def hnf_basis(M: Sequence[Sequence[int]]) -> IntMatrix:
    """Nonzero rows of the HNF: a canonical basis of the row lattice."""
    return [row for row in hnf(M) if any(row)]


def snf(M: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: returns (D, U, V) with U*M*V = D, d1 | d2 | ..."""
    A = [list(r) for r in M]
    m = len(A)
    n = len(A[0]) if m else 0
    U, V = identity(m), identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for R in (A, V):
            for row in R:
                row[i], row[j] = row[j], row[i]

    for t in range(min(m, n)):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            done = True
            for i in range(t + 1, m):
                q = A[i][t] // A[t][t]
                if q:
                    A[i] = [u - q * v for u, v in zip(A[i], A[t])]
                    U[i] = [u - q * v for u, v in zip(U[i], U[t])]
                if A[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = A[t][j] // A[t][t]
                if q:
                    for R in (A, V):
                        for row in R:
                            row[j] -= q * row[t]
                if A[t][j]:
                    done = False
            if not done:
                continue
            # divisibility condition
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            i, _ = bad
            A[t] = [u + v for u, v in zip(A[t], A[i])]
            U[t] = [u + v for u, v in zip(U[t], U[i])]
        if t < m and t < n and A[t][t] < 0:
            A[t] = [-u for u in A[t]]
            U[t] = [-u for u in U[t]]
    return A, U, V


def solve_integer(basis: Sequence[Sequence[int]], v: Sequence[int]) -> list[int] | None:
    """Integer coefficients c with c*basis = v, or None (basis rows independent)."""
    sol = solve_rational(basis, [Fraction(x) for x in v])
    if sol is None or any(x.denominator != 1 for x in sol):
        return None
    return [int(x) for x in sol]


def solve_rational(basis: Sequence[Sequence], v: Sequence) -> list[Fraction] | None:
    """Rational c with c*basis = v for independent rows, or None if v is outside the span."""
    k = len(basis)
    n = len(v)
    # augmented system: columns are basis rows, rows are coordinates
    A = [[Fraction(basis[r][c]) for r in range(k)] + [Fraction(v[c])] for c in range(n)]
    piv_cols = []
    row = 0
    for col in range(k):
        piv = next((r for r in range(row, n) if A[r][col] != 0), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        inv = 1 / A[row][col]
        A[row] = [x * inv for x in A[row]]
        for r in range(n):
            if r != row and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[row])]
        piv_cols.append(col)
        row += 1
    if any(A[r][k] != 0 for r in range(row, n)):
        return None
    sol = [Fraction(0)] * k
    for r, col in enumerate(piv_cols):
        sol[col] = A[r][k]
    return sol


def lattice_intersection(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> IntMatrix:
    """Basis (HNF) of the intersection of two full-rank integer row lattices."""
    n = len(A[0])
    # kernel of [A; -B] over Z via HNF of the augmented matrix [A | I ; -B | 0]
    rows = [list(a) + [int(i == j) for j in range(len(A))] for i, a in enumerate(A)]
    rows += [[-x for x in b] + [0] * len(A) for b in B]
    H = hnf(rows)
    out = []
    for row in H:
        if all(x == 0 for x in row[:n]) and any(row[n:]):
            coeffs = row[n:]
            out.append([sum(c * a[j] for c, a in zip(coeffs, A)) for j in range(n)])
    return hnf_basis(out)


# ------------------------------------------------------------------ lattices

def check_gram(G: Sequence[Sequence]) -> None:
    n = len(G)
    for i in range(n):
        if len(G[i]) != n:
            raise ValueError("Gram matrix not square")
        for j in range(n):
            if G[i][j] != G[j][i]:
                raise ValueError("Gram matrix not symmetric")
    for k in range(1, n + 1):
        if det([row[:k] for row in G[:k]]) <= 0:
            raise ValueError("Gram matrix not positive definite")


def quad_value(G: Sequence[Sequence], v: Sequence[int]) -> Fraction:
    """v^T G v / 2."""
    n = len(v)
    s = sum(G[i][j] * v[i] * v[j] for i in range(n) for j in range(n))
    return Fraction(s, 2)


def lagrange_reduce(G: Sequence[Sequence]) -> tuple[list[list], IntMatrix]:
    """Pairwise size reduction of a Gram matrix.

    Returns (G', T) with G' = T G T^t, T unimodular (rows give the new basis
    in terms of the old one).  Repeats until no pair reduction shrinks a
    diagonal entry.
    """
    n = len(G)
    G = [list(r) for r in G]
    T = identity(n)
    changed = True
    while changed:
        changed = False
        order = sorted(range(n), key=lambda i: G[i][i])
        for a in order:
            for b in order:
                if a == b or G[b][b] == 0:
                    continue
                q = round(Fraction(G[a][b]) / Fraction(G[b][b]))
                if q == 0:
                    continue
                new_aa = G[a][a] - 2 * q * G[a][b] + q * q * G[b][b]
                if new_aa >= G[a][a]:
                    continue
                # basis vector a -> a - q b
                T[a] = [x - q * y for x, y in zip(T[a], T[b])]
                for k in range(n):
                    if k != a:
                        G[a][k] -= q * G[b][k]
                        G[k][a] = G[a][k]
                G[a][a] = new_aa
                changed = True
    return G, T


def _ldl(G: Sequence[Sequence]) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Q(x) = sum_i q_i (x_i + sum_{j>i} mu_ij x_j)^2 with Q(x) = x^T G x / 2."""
    n = len(G)
    A = [[Fraction(G[i][j], 2) for j in range(n)] for i in range(n)]
    q = [Fraction(0)] * n
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        q[i] = A[i][i]
        if q[i] <= 0:
            raise ValueError("Gram matrix not positive definite")
        for j in range(i + 1, n):
            mu[i][j] = A[i][j] / q[i]
        for j in range(i + 1, n):
            for k in range(j, n):
                A[j][k] -= q[i] * mu[i][j] * mu[i][k]
                A[k][j] = A[j][k]
    return q, mu


def _floor_upper(y: Fraction, R: Fraction) -> int:
    """Largest integer t with t <= y + sqrt(R) (R >= 0)."""
    s = isqrt(R.numerator // R.denominator)
    t = (y + s + 1).__floor__()
    while t > y and (t - y) ** 2 > R:
        t -= 1
    return t


def _ceil_lower(y: Fraction, R: Fraction) -> int:
    """Smallest integer t with t >= y - sqrt(R) (R >= 0)."""
    s = isqrt(R.numerator // R.denominator)
    t = (y - s - 1).__ceil__()
    while t < y and (y - t) ** 2 > R:
        t += 1
    return t


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    a, b = isqrt(x.numerator), isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


def _enumerate(G: Sequence[Sequence], bound, exact: bool) -> list[tuple[int, ...]]:
    n = len(G)
    bound = Fraction(bound)
    if bound < 0:
        return []
    Gr, T = lagrange_reduce(G)
    q, mu = _ldl(Gr)
    found: list[tuple[int, ...]] = []
    x = [0] * n

    def rec(i: int, remaining: Fraction) -> None:
        centre = -sum(mu[i][j] * x[j] for j in range(i + 1, n))
        R = remaining / q[i]
        if i == 0 and exact:
            r = _rational_sqrt(R)
            if r is None:
                return
            for t in sorted({centre + r, centre - r}):
                if t.denominator == 1:
                    x[0] = int(t)
                    found.append(tuple(x))
            return
        lo, hi = _ceil_lower(centre, R), _floor_upper(centre, R)
        for t in range(lo, hi + 1):
            x[i] = t
            rest = remaining - q[i] * (t - centre) ** 2
            if i == 0:
                found.append(tuple(x))
            else:
                rec(i - 1, rest)
        x[i] = 0

    rec(n - 1, bound)
    # back to the original basis: v = x T
    out = [tuple(sum(xi * T[i][k] for i, xi in enumerate(v)) for k in range(n)) for v in found]
    return out


def short_vectors(G: Sequence[Sequence], bound, *, all_signs: bool = True,
                  exact: bool = False) -> list[tuple[int, ...]]:
    """Vectors v with v^T G v / 2 <= bound (or == bound when exact=True).

    With all_signs=False only one of each pair ±v is returned (the one whose
    first nonzero coordinate is positive) and 0 is kept.  Output is sorted
    lexicographically.
    """
    found = _enumerate(G, bound, exact)
    if not all_signs:
        found = [v for v in found if next((c for c in v if c), 1) > 0]
    return sorted(set(found))


def vectors_of_norm(G: Sequence[Sequence], value) -> list[tuple[int, ...]]:
    """All v with v^T G v / 2 == value, solving the last coordinate exactly."""
    return short_vectors(G, value, exact=True)
