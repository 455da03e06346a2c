"""Definite quaternion algebras over Q, Eichler orders and right ideal classes."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import gcd, isqrt
from typing import Iterable, Sequence

from .numerics import (
    det, factorize, hnf_basis, is_prime, kronecker_symbol, lcm, solve_integer,
    vectors_of_norm,
)

Quat = tuple[Fraction, Fraction, Fraction, Fraction]


def as_quat(xs: Iterable) -> Quat:
    return tuple(Fraction(x) for x in xs)  # type: ignore[return-value]


# ------------------------------------------------------------ Hilbert symbols

def hilbert_symbol(a: int, b: int, p) -> int:
    """Local Hilbert symbol (a, b)_p; p is a prime or the string 'inf'."""
    if a == 0 or b == 0:
        raise ValueError("hilbert_symbol needs nonzero arguments")
    if p in ("inf", None) or p == float("inf"):
        return -1 if a < 0 and b < 0 else 1
    alpha, u = _split(a, p)
    beta, v = _split(b, p)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omega = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * kronecker_symbol(u, p) ** beta * kronecker_symbol(v, p) ** alpha


def _split(n: int, p: int) -> tuple[int, int]:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k, n


def ramified_primes(a: int, b: int) -> frozenset[int]:
    cands = set(factorize(2 * a * b))
    return frozenset(q for q in cands if hilbert_symbol(a, b, q) == -1)


# ------------------------------------------------------------------- algebra

@dataclass(frozen=True)
class QuaternionAlgebra:
    """Q<i, j> with i^2 = a, j^2 = b, ij = -ji."""

    a: int
    b: int
    ram_finite: frozenset[int] = field(default=frozenset())

    def __post_init__(self):
        if not self.ram_finite:
            object.__setattr__(self, "ram_finite", ramified_primes(self.a, self.b))

    @property
    def definite(self) -> bool:
        return self.a < 0 and self.b < 0

    @property
    def disc(self) -> int:
        out = 1
        for q in self.ram_finite:
            out *= q
        return out

    def mul(self, x: Sequence, y: Sequence) -> Quat:
        a, b = self.a, self.b
        x0, x1, x2, x3 = x
        y0, y1, y2, y3 = y
        return (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        )

    def nrd(self, x: Sequence):
        x0, x1, x2, x3 = x
        return x0 * x0 - self.a * x1 * x1 - self.b * x2 * x2 + self.a * self.b * x3 * x3

    @staticmethod
    def trd(x: Sequence):
        return 2 * x[0]

    @staticmethod
    def conj(x: Sequence) -> Quat:
        return (x[0], -x[1], -x[2], -x[3])

    def inverse(self, x: Sequence) -> Quat:
        n = Fraction(self.nrd(x))
        return tuple(c / n for c in self.conj(x))  # type: ignore[return-value]

    def bilinear(self, x: Sequence, y: Sequence):
        """trd(x * conj(y))."""
        return 2 * (x[0] * y[0] - self.a * x[1] * y[1] - self.b * x[2] * y[2]
                    + self.a * self.b * x[3] * y[3])


def algebra_from_ramification(primes: Iterable[int], search_bound: int = 200) -> QuaternionAlgebra:
    """Definite algebra ramified exactly at the given primes and infinity."""
    ram = frozenset(primes)
    if not ram or len(ram) % 2 == 0:
        raise ValueError("need an odd, nonempty set of finite ramified primes")
    if any(not is_prime(q) for q in ram):
        raise ValueError("ramification set must consist of primes")
    D = 1
    for q in ram:
        D *= q
    for m in range(1, search_bound + 1):
        for k in range(1, m + 1):
            if ramified_primes(-k, -m) == ram:
                return QuaternionAlgebra(-k, -m, ram)
    raise RuntimeError(f"no algebra found with |a|,|b| <= {search_bound}")


# ------------------------------------------------------------------ lattices

@dataclass(frozen=True)
class Lattice:
    """Full-rank Z-lattice in B, stored as HNF integer rows over a denominator."""

    rows: tuple[tuple[int, ...], ...]
    den: int

    @classmethod
    def from_elements(cls, elems: Iterable[Sequence]) -> "Lattice":
        elems = [as_quat(e) for e in elems]
        d = lcm(*[c.denominator for e in elems for c in e]) or 1
        ints = [[int(c * d) for c in e] for e in elems]
        rows = hnf_basis(ints)
        if len(rows) != 4:
            raise ValueError("elements do not span a full-rank lattice")
        g = d
        for r in rows:
            for c in r:
                g = gcd(g, c)
        rows = [[c // g for c in r] for r in rows]
        return cls(tuple(tuple(r) for r in rows), d // g)

    def basis(self) -> list[Quat]:
        return [tuple(Fraction(c, self.den) for c in r) for r in self.rows]  # type: ignore[misc]

    def coords(self, x: Sequence) -> list[int] | None:
        scaled = [Fraction(c) * self.den for c in x]
        if any(c.denominator != 1 for c in scaled):
            return None
        return solve_integer(self.rows, [int(c) for c in scaled])

    def __contains__(self, x) -> bool:
        return self.coords(x) is not None

    def contains_lattice(self, other: "Lattice") -> bool:
        return all(b in self for b in other.basis())

    def covolume(self) -> Fraction:
        return Fraction(abs(det([list(r) for r in self.rows])), self.den ** 4)

    def scale(self, c) -> "Lattice":
        c = Fraction(c)
        return Lattice.from_elements([[c * x for x in b] for b in self.basis()])

    def __add__(self, other: "Lattice") -> "Lattice":
        return Lattice.from_elements(self.basis() + other.basis())


def lattice_product(A: QuaternionAlgebra, L: Lattice | Sequence[Sequence],
                    M: Lattice | Sequence[Sequence]) -> Lattice:
    xs = L.basis() if isinstance(L, Lattice) else [as_quat(x) for x in L]
    ys = M.basis() if isinstance(M, Lattice) else [as_quat(y) for y in M]
    return Lattice.from_elements([A.mul(x, y) for x in xs for y in ys])


def conj_lattice(A: QuaternionAlgebra, L: Lattice) -> Lattice:
    return Lattice.from_elements([A.conj(b) for b in L.basis()])


def gram_matrix(A: QuaternionAlgebra, L: Lattice, scale=1) -> list[list[Fraction]]:
    """G_kl = trd(b_k conj(b_l)) / scale, so v^T G v / 2 = nrd / scale."""
    B = L.basis()
    s = Fraction(scale)
    return [[Fraction(A.bilinear(x, y)) / s for y in B] for x in B]


def reduced_disc(A: QuaternionAlgebra, L: Lattice) -> Fraction:
    d = abs(det(gram_matrix(A, L)))
    num, den = isqrt(d.numerator), isqrt(d.denominator)
    if num * num != d.numerator or den * den != d.denominator:
        raise ValueError("discriminant is not a square")
    return Fraction(num, den)


def is_ring(A: QuaternionAlgebra, L: Lattice) -> bool:
    one = (1, 0, 0, 0)
    if one not in L:
        return False
    B = L.basis()
    return all(A.mul(x, y) in L for x in B for y in B)


# -------------------------------------------------------------------- orders

@dataclass(frozen=True)
class QuatOrder:
    algebra: QuaternionAlgebra
    lattice: Lattice
    level: int = 1

    @property
    def basis(self) -> list[Quat]:
        return self.lattice.basis()

    @cached_property
    def disc(self) -> int:
        d = reduced_disc(self.algebra, self.lattice)
        if d.denominator != 1:
            raise ValueError("non-integral order")
        return int(d)

    def gram(self, scale=1):
        return gram_matrix(self.algebra, self.lattice, scale)

    def units(self) -> list[Quat]:
        G = self.gram()
        B = self.basis
        return [_combine(B, v) for v in vectors_of_norm(G, 1)]


def _combine(basis: Sequence[Sequence], v: Sequence[int]) -> Quat:
    return tuple(sum(c * b[k] for c, b in zip(v, basis)) for k in range(4))  # type: ignore[return-value]


def _closure(A: QuaternionAlgebra, elems: list, target_disc: int) -> Lattice | None:
    """Smallest ring containing elems, or None if it stops being integral."""
    L = Lattice.from_elements(elems)
    for _ in range(20):
        B = L.basis()
        if any(Fraction(A.trd(x)).denominator != 1 or Fraction(A.nrd(x)).denominator != 1 for x in B):
            return None
        new = Lattice.from_elements(B + [A.mul(x, y) for x in B for y in B])
        if new == L:
            d = reduced_disc(A, L)
            if d.denominator != 1 or d < target_disc:
                return None
            return L
        L = new
        if reduced_disc(A, L) < target_disc:
            return None
    return None


def maximal_order(A: QuaternionAlgebra) -> QuatOrder:
    """Maximal order, grown from Z<1, i, j, ij> by saturation at excess primes."""
    if not A.definite:
        raise ValueError("maximal_order expects a definite algebra")
    D = A.disc
    L = Lattice.from_elements([(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)])
    while True:
        d = reduced_disc(A, L)
        if d == D:
            return QuatOrder(A, L, 1)
        excess = int(d) // D
        ell = min(factorize(excess))
        B = L.basis()
        grown = None
        for cs in product(range(ell), repeat=4):
            if not any(cs):
                continue
            x = tuple(sum(Fraction(c, ell) * b[k] for c, b in zip(cs, B)) for k in range(4))
            if Fraction(A.trd(x)).denominator != 1 or Fraction(A.nrd(x)).denominator != 1:
                continue
            cand = _closure(A, B + [x], D)
            if cand is not None:
                grown = cand
                break
        if grown is None:
            raise RuntimeError(f"saturation failed at {ell}")
        L = grown


def eichler_order(Omax: QuatOrder, M: int, search_norm: int = 400) -> QuatOrder:
    """Eichler order Z + O*alpha + M*O of level M inside a maximal order."""
    A = Omax.algebra
    if M < 1:
        raise ValueError("level must be positive")
    if gcd(M, A.disc) != 1:
        raise ValueError("level must be coprime to the discriminant")
    if M == 1:
        return Omax
    primes = sorted(factorize(M))
    B = Omax.basis
    G = Omax.gram()
    scaled = [Omax.lattice.scale(ell) for ell in primes]
    for n in range(M, search_norm * M + 1, M):
        for v in vectors_of_norm(G, n):
            alpha = _combine(B, v)
            if any(alpha in S for S in scaled):
                continue
            gens = [(1, 0, 0, 0)] + [A.mul(b, alpha) for b in B] + [[M * c for c in b] for b in B]
            L = Lattice.from_elements(gens)
            if reduced_disc(A, L) == A.disc * M and is_ring(A, L):
                return QuatOrder(A, L, M)
    raise RuntimeError(f"no Eichler order of level {M} found (primes {primes})")


# -------------------------------------------------------------------- ideals

@dataclass(frozen=True)
class RightIdeal:
    order: QuatOrder
    lattice: Lattice
    nrd: Fraction

    @classmethod
    def from_elements(cls, R: QuatOrder, elems) -> "RightIdeal":
        L = Lattice.from_elements(elems)
        ratio = L.covolume() / R.lattice.covolume()
        n = _fourth_root(ratio)
        return cls(R, L, n)

    @property
    def basis(self) -> list[Quat]:
        return self.lattice.basis()

    def is_right_stable(self) -> bool:
        A = self.order.algebra
        return all(A.mul(x, r) in self.lattice for x in self.basis for r in self.order.basis)

    def left_order(self) -> QuatOrder:
        A = self.order.algebra
        L = lattice_product(A, self.lattice, conj_lattice(A, self.lattice)).scale(1 / self.nrd)
        return QuatOrder(A, L, self.order.level)

    def left_mul(self, x: Sequence) -> "RightIdeal":
        A = self.order.algebra
        L = Lattice.from_elements([A.mul(x, b) for b in self.basis])
        return RightIdeal(self.order, L, self.nrd * Fraction(A.nrd(x)))


def _fourth_root(x: Fraction) -> Fraction:
    def root4(n):
        r = isqrt(isqrt(n))
        while r ** 4 < n:
            r += 1
        return r if r ** 4 == n else None
    a, b = root4(x.numerator), root4(x.denominator)
    if a is None or b is None:
        raise ValueError("index is not a fourth power; not an invertible ideal")
    return Fraction(a, b)


def find_equivalence(I: RightIdeal, J: RightIdeal) -> Quat | None:
    """x with J = x*I, or None.  Searches J*conj(I) for nrd = nrd(I) nrd(J)."""
    A = I.order.algebra
    L = lattice_product(A, J.lattice, conj_lattice(A, I.lattice))
    target = I.nrd * J.nrd
    G = gram_matrix(A, L, target)
    vs = vectors_of_norm(G, 1)
    if not vs:
        return None
    y = _combine(L.basis(), vs[-1])
    return tuple(c / I.nrd for c in y)  # type: ignore[return-value]


def ideal_equivalent(I: RightIdeal, J: RightIdeal) -> bool:
    if I.order.lattice != J.order.lattice:
        raise ValueError("ideals must share the right order")
    return find_equivalence(I, J) is not None


def unit_weight(O: QuatOrder) -> int:
    """|O^* / {±1}|."""
    return len(O.units()) // 2


def neighbours(I: RightIdeal, q: int) -> list[RightIdeal]:
    """The q+1 right ideals J in I with I/J cyclic of order q (q-neighbours)."""
    R = I.order
    A = R.algebra
    B = I.basis
    qI = [[q * c for c in b] for b in B]
    out: list[RightIdeal] = []
    seen = set()
    for cs in product(range(q), repeat=4):
        lead = next((c for c in cs if c), 0)
        if lead != 1:
            continue
        alpha = _combine(B, cs)
        ratio = Fraction(A.nrd(alpha)) / I.nrd
        if ratio.denominator != 1 or ratio.numerator % q:
            continue
        gens = [A.mul(alpha, r) for r in R.basis] + qI
        L = Lattice.from_elements(gens)
        if L in seen:
            continue
        seen.add(L)
        out.append(RightIdeal(R, L, I.nrd * q))
    return out


def eichler_mass(D: int, M: int) -> Fraction:
    m = Fraction(1, 12)
    for q in factorize(D):
        m *= q - 1
    for q, e in factorize(M).items():
        m *= q ** (e - 1) * (q + 1)
    return m


@dataclass(frozen=True)
class IdealClassSet:
    order: QuatOrder
    reps: tuple[RightIdeal, ...]
    left_orders: tuple[QuatOrder, ...]
    weights: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.reps)

    def class_of(self, I: RightIdeal) -> tuple[int, Quat]:
        """Index i and u with reps[i] = u * I."""
        for k, J in enumerate(self.reps):
            u = find_equivalence(I, J)
            if u is not None:
                return k, u
        raise ValueError("ideal not equivalent to any representative")

    def to_json(self) -> dict:
        A = self.order.algebra
        enc = lambda L: {"rows": [[str(c) for c in r] for r in L.rows], "den": str(L.den)}
        return {
            "algebra": {"a": str(A.a), "b": str(A.b), "ram": [str(q) for q in sorted(A.ram_finite)]},
            "order": {"basis": enc(self.order.lattice), "level": str(self.order.level)},
            "classes": [
                {"basis": enc(I.lattice), "nrd": str(I.nrd), "weight": str(w)}
                for I, w in zip(self.reps, self.weights)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "IdealClassSet":
        alg = data["algebra"]
        A = QuaternionAlgebra(int(alg["a"]), int(alg["b"]), frozenset(int(q) for q in alg["ram"]))
        dec = lambda d: Lattice(tuple(tuple(int(c) for c in r) for r in d["rows"]), int(d["den"]))
        R = QuatOrder(A, dec(data["order"]["basis"]), int(data["order"]["level"]))
        reps = tuple(RightIdeal(R, dec(c["basis"]), Fraction(c["nrd"])) for c in data["classes"])
        weights = tuple(int(c["weight"]) for c in data["classes"])
        return cls(R, reps, tuple(I.left_order() for I in reps), weights)


def _auxiliary_prime(n: int) -> int:
    q = 2
    while n % q == 0:
        q += 1
        while not is_prime(q):
            q += 1
    return q


def right_ideal_classes(R: QuatOrder, max_steps: int = 10000) -> IdealClassSet:
    """Representatives of right R-ideal classes by q-neighbour search, mass certified."""
    A = R.algebra
    if not A.definite:
        raise ValueError("definite orders only")
    q = _auxiliary_prime(A.disc * R.level)
    target = eichler_mass(A.disc, R.level)
    unit = RightIdeal(R, R.lattice, Fraction(1))
    reps = [unit]
    lefts = [R]
    weights = [unit_weight(R)]
    mass = Fraction(1, weights[0])
    queue = [unit]
    steps = 0
    while queue and mass < target:
        I = queue.pop(0)
        for J in neighbours(I, q):
            steps += 1
            if steps > max_steps:
                raise RuntimeError("neighbour search exceeded its step budget")
            if any(ideal_equivalent(J, K) for K in reps):
                continue
            O = J.left_order()
            w = unit_weight(O)
            reps.append(J)
            lefts.append(O)
            weights.append(w)
            mass += Fraction(1, w)
            queue.append(J)
            if mass >= target:
                break
    return IdealClassSet(R, tuple(reps), tuple(lefts), tuple(weights))


def mass_check(S: IdealClassSet) -> Fraction:
    """sum 1/w_i minus the Eichler mass; zero certifies completeness."""
    R = S.order
    return sum((Fraction(1, w) for w in S.weights), Fraction(0)) - eichler_mass(R.algebra.disc, R.level)
