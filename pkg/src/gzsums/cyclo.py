"""Cyclotomic integers and valuations at a fixed prime above l.

Elements of Z[zeta_M] are stored in the power basis modulo Phi_M.  A prime
lambda above l is fixed by choosing an irreducible factor of Phi_{M'} mod l
(M' the prime-to-l part of M) and Hensel-lifting it; when l = p divides M the
p-power part contributes a totally ramified Eisenstein layer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Sequence

import sympy

from .numerics import valuation, xgcd


# ------------------------------------------------------- integer polynomials
# polynomials are tuples/lists of coefficients, lowest degree first

def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def pmul(a: Sequence[int], b: Sequence[int], m: int | None = None) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    if m:
        out = [c % m for c in out]
    return _trim(out)


def padd(a: Sequence[int], b: Sequence[int], m: int | None = None) -> list[int]:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
    if m:
        out = [c % m for c in out]
    return _trim(out)


def psub(a: Sequence[int], b: Sequence[int], m: int | None = None) -> list[int]:
    return padd(a, [-c for c in b], m)


def pdivmod(a: Sequence[int], b: Sequence[int], m: int | None = None) -> tuple[list[int], list[int]]:
    """Division by b; b must be monic when m is None, or have a unit leading coefficient mod m."""
    a = list(a)
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    lead_inv = 1 if b[-1] == 1 else pow(b[-1], -1, m) if m else None
    if lead_inv is None:
        raise ValueError("divisor must be monic over Z")
    db = len(b) - 1
    q = [0] * max(len(a) - db, 0)
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] * lead_inv
        if m:
            c %= m
        if c:
            q[k - db] = c
            for j in range(db + 1):
                a[k - db + j] -= c * b[j]
        if m:
            a = [x % m for x in a]
    r = a[:db]
    if m:
        r = [x % m for x in r]
    return _trim(q), _trim(r)


def pmod(a, b, m=None) -> list[int]:
    return pdivmod(a, b, m)[1]


def pgcdex(a: Sequence[int], b: Sequence[int], l: int) -> tuple[list[int], list[int], list[int]]:
    """(g, s, t) with s a + t b = g monic gcd over F_l."""
    r0, r1 = _trim([c % l for c in a]), _trim([c % l for c in b])
    s0, s1, t0, t1 = [1], [], [], [1]
    while r1:
        q, r = pdivmod(r0, r1, l)
        r0, r1 = r1, r
        s0, s1 = s1, psub(s0, pmul(q, s1, l), l)
        t0, t1 = t1, psub(t0, pmul(q, t1, l), l)
    inv = pow(r0[-1], -1, l)
    return [c * inv % l for c in r0], [c * inv % l for c in s0], [c * inv % l for c in t0]


@lru_cache(maxsize=None)
def cyclotomic_poly(M: int) -> tuple[int, ...]:
    """Phi_M, lowest degree first."""
    num = [-1] + [0] * (M - 1) + [1]
    for d in range(1, M):
        if M % d == 0:
            num, r = pdivmod(num, cyclotomic_poly(d))
            if r:
                raise ArithmeticError("cyclotomic division not exact")
    return tuple(num)


def euler_phi(M: int) -> int:
    return len(cyclotomic_poly(M)) - 1


@lru_cache(maxsize=None)
def _power_table(M: int) -> tuple[tuple[int, ...], ...]:
    """x^k mod Phi_M for 0 <= k < M, each as a length-phi(M) vector."""
    phi = cyclotomic_poly(M)
    n = len(phi) - 1
    rows = []
    cur = [1] + [0] * (n - 1)
    for _ in range(M):
        rows.append(tuple(cur))
        # multiply by x
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi[:n])]
    return tuple(rows)


# ----------------------------------------------------- cyclotomic integers

@dataclass(frozen=True)
class CyclotomicInteger:
    M: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != euler_phi(self.M):
            raise ValueError("coefficient vector has the wrong length")

    @classmethod
    def from_group_ring(cls, M: int, buf: Sequence[int]) -> "CyclotomicInteger":
        """Reduce sum_k buf[k] zeta_M^k (k taken mod M)."""
        table = _power_table(M)
        n = euler_phi(M)
        out = [0] * n
        for k, c in enumerate(buf):
            if c:
                row = table[k % M]
                for i in range(n):
                    if row[i]:
                        out[i] += c * row[i]
        return cls(M, tuple(out))

    @classmethod
    def from_int(cls, M: int, n: int) -> "CyclotomicInteger":
        return cls(M, (n,) + (0,) * (euler_phi(M) - 1))

    @classmethod
    def root(cls, M: int, k: int) -> "CyclotomicInteger":
        return cls(M, _power_table(M)[k % M])

    def lift(self, M: int) -> "CyclotomicInteger":
        if M == self.M:
            return self
        if M % self.M:
            raise ValueError(f"cannot lift from {self.M} to {M}")
        step = M // self.M
        buf = [0] * M
        for k, c in enumerate(self.coeffs):
            buf[k * step] += c
        return CyclotomicInteger.from_group_ring(M, buf)

    def _common(self, other):
        if isinstance(other, int):
            return self, CyclotomicInteger.from_int(self.M, other)
        if other.M == self.M:
            return self, other
        M = self.M * other.M // gcd(self.M, other.M)
        return self.lift(M), other.lift(M)

    def __add__(self, other):
        a, b = self._common(other)
        return CyclotomicInteger(a.M, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInteger(self.M, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicInteger(self.M, tuple(other * x for x in self.coeffs))
        a, b = self._common(other)
        buf = [0] * a.M
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        buf[(i + j) % a.M] += x * y
        return CyclotomicInteger.from_group_ring(a.M, buf)

    __rmul__ = __mul__

    def conj(self, s: int) -> "CyclotomicInteger":
        """Apply zeta -> zeta^s."""
        if gcd(s, self.M) != 1:
            raise ValueError("conjugation exponent must be prime to M")
        buf = [0] * self.M
        for k, c in enumerate(self.coeffs):
            buf[k * s % self.M] += c
        return CyclotomicInteger.from_group_ring(self.M, buf)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def as_polynomial(self) -> list[int]:
        return _trim(list(self.coeffs))


def cyc_add(a: CyclotomicInteger, b: CyclotomicInteger) -> CyclotomicInteger:
    return a + b


def cyc_mul(a: CyclotomicInteger, b: CyclotomicInteger) -> CyclotomicInteger:
    return a * b


def cyc_conj(a: CyclotomicInteger, s: int) -> CyclotomicInteger:
    return a.conj(s)


def absolute_norm(a: CyclotomicInteger) -> int:
    """N_{Q(zeta_M)/Q}(a) as the resultant of Phi_M and the representing polynomial."""
    x = sympy.Symbol("x")
    phi = sympy.Poly(list(reversed(cyclotomic_poly(a.M))), x)
    poly = a.as_polynomial()
    if not poly:
        return 0
    A = sympy.Poly(list(reversed(poly)), x)
    return int(sympy.resultant(phi, A))


# ------------------------------------------------------------ valuations

@dataclass(frozen=True)
class BottomedOut:
    """The element vanishes to the working precision; its valuation is at least `bound`."""

    bound: int

    def __bool__(self) -> bool:
        return False


def is_bottomed(v) -> bool:
    return isinstance(v, BottomedOut)


def _factors_mod(poly: Sequence[int], l: int) -> list[tuple[int, ...]]:
    """Monic irreducible factors of poly mod l, sorted (high degree coefficient first)."""
    x = sympy.Symbol("x")
    P = sympy.Poly(list(reversed(poly)), x, modulus=l)
    out = []
    for fac, mult in P.factor_list()[1]:
        if mult != 1:
            raise ArithmeticError("polynomial is not squarefree mod l")
        cs = [int(c) % l for c in reversed(fac.all_coeffs())]
        inv = pow(cs[-1], -1, l)
        out.append(tuple(c * inv % l for c in cs))
    return sorted(out, key=lambda f: (len(f), tuple(reversed(f))))


def hensel_lift(poly: Sequence[int], g: Sequence[int], l: int, K: int) -> list[int]:
    """Lift the monic factor g of poly mod l to a factor mod l^K (poly monic, squarefree mod l)."""
    h, r = pdivmod([c % l for c in poly], list(g), l)
    if r:
        raise ValueError("g does not divide the polynomial mod l")
    one, s, t = pgcdex(g, h, l)
    if one != [1]:
        raise ValueError("factors are not coprime mod l")
    g, h = list(g), list(h)
    mod = l
    for _ in range(1, K):
        err = psub(list(poly), pmul(g, h))
        if any(c % mod for c in err):
            raise ArithmeticError("Hensel invariant broken")
        e = [(c // mod) % l for c in err]
        Q, sigma = pdivmod(pmul(e, t, l), g, l)
        tau = padd(pmul(Q, h, l), pmul(e, s, l), l)
        g = padd(g, [mod * c for c in sigma])
        h = padd(h, [mod * c for c in tau])
        mod *= l
    return [c % mod for c in g]


@dataclass(frozen=True)
class LambdaContext:
    l: int
    M: int
    p: int
    Kcap: int
    Mprime: int
    t: int
    factor: tuple[int, ...]          # irreducible factor of Phi_{M'} mod l
    lifted: tuple[int, ...]          # its lift mod l^Kcap
    eis_poly: tuple[int, ...] | None
    e_ram: int
    f_res: int
    factor_index: int = 0
    _xpow: tuple = field(default=(), repr=False, compare=False)
    _ypow: tuple = field(default=(), repr=False, compare=False)
    _crt: tuple = field(default=(1, 0), repr=False, compare=False)

    @property
    def modulus(self) -> int:
        return self.l ** self.Kcap

    @property
    def mu_p_in_residue(self) -> bool:
        return (self.l ** self.f_res - 1) % self.p == 0

    @property
    def residue_order(self) -> int:
        return self.l ** self.f_res

    def ord_rational(self, n) -> int:
        return self.e_ram * valuation(n, self.l)

    def with_precision(self, Kcap: int) -> "LambdaContext":
        return lambda_context(self.l, self.M, self.p, Kcap, self.factor_index)

    def describe(self) -> dict:
        return {"l": self.l, "M": self.M, "p": self.p, "Kcap": self.Kcap,
                "factor": list(self.factor), "factor_index": self.factor_index,
                "e_ram": self.e_ram, "f_res": self.f_res}


def lambda_context(l: int, M: int, p: int, Kcap: int = 12, factor_index: int = 0) -> LambdaContext:
    """Fix the prime lambda above l in Z[zeta_M]; the least factor is the default."""
    if M % l == 0 and l != p:
        raise ValueError(f"l = {l} divides M = {M} but is not the prime p = {p}")
    t = valuation(M, l) if M % l == 0 else 0
    pt = l ** t if t else 1
    Mp = M // pt
    factors = _factors_mod(cyclotomic_poly(Mp), l)
    g = factors[factor_index]
    lifted = tuple(hensel_lift(cyclotomic_poly(Mp), g, l, Kcap))
    f_res = len(g) - 1
    e_ram = pt - pt // l if t else 1
    mod = l ** Kcap
    xpow = []
    cur = [1]
    for _ in range(Mp):
        xpow.append(tuple(cur + [0] * (f_res - len(cur))))
        cur = pmod(pmul(cur, [0, 1]), lifted, mod)
    eis = None
    ypow: list[tuple[int, ...]] = [(1,)]
    if t:
        # Phi_{p^t}(1 + y)
        phi = cyclotomic_poly(pt)
        eis_l = [0]
        shift = [1]
        for c in phi:
            eis_l = padd(eis_l, [c * s for s in shift])
            shift = pmul(shift, [1, 1])
        eis = tuple(eis_l)
        ypow = []
        cur = [1]
        for _ in range(pt):
            ypow.append(tuple(c % mod for c in cur) + (0,) * (e_ram - len(cur)))
            cur = pmod(pmul(cur, [1, 1]), eis)
    g_, u, v = xgcd(pt, Mp)  # u*pt + v*Mp = 1
    return LambdaContext(l, M, p, Kcap, Mp, t, tuple(g), lifted, eis, e_ram, f_res,
                         factor_index, tuple(xpow), tuple(ypow), (u % Mp if Mp > 1 else 0, v % pt if pt > 1 else 0))


def all_lambda_contexts(l: int, M: int, p: int, Kcap: int = 12) -> list[LambdaContext]:
    t = valuation(M, l) if M % l == 0 else 0
    Mp = M // l ** t
    n = len(_factors_mod(cyclotomic_poly(Mp), l))
    return [lambda_context(l, M, p, Kcap, i) for i in range(n)]


def _local_coords(a: CyclotomicInteger, ctx: LambdaContext) -> list[list[int]]:
    """Coordinates c[i][r] of a = sum c[i][r] X^r y^i, modulo l^Kcap."""
    if ctx.M % a.M:
        raise ValueError(f"element of Q(zeta_{a.M}) is not in Q(zeta_{ctx.M})")
    a = a.lift(ctx.M)
    mod = ctx.modulus
    e, f = ctx.e_ram, ctx.f_res
    u, v = ctx._crt
    Mp, pt = ctx.Mprime, (ctx.l ** ctx.t if ctx.t else 1)
    c = [[0] * f for _ in range(e)]
    for k, coef in enumerate(a.coeffs):
        if not coef:
            continue
        xr = ctx._xpow[(u * k) % Mp if Mp > 1 else 0]
        ys = ctx._ypow[(v * k) % pt if pt > 1 else 0]
        for i, yc in enumerate(ys):
            if yc:
                row = c[i]
                w = coef * yc
                for r, xc in enumerate(xr):
                    if xc:
                        row[r] += w * xc
    return [[x % mod for x in row] for row in c]


def ord_lambda(a: CyclotomicInteger, ctx: LambdaContext):
    """Valuation at lambda normalised so that ord(l) = e_ram, or BottomedOut."""
    if a.is_zero():
        return BottomedOut(ctx.e_ram * ctx.Kcap)
    c = _local_coords(a, ctx)
    best = None
    for i, row in enumerate(c):
        for x in row:
            if x:
                val = ctx.e_ram * valuation(x, ctx.l) + i
                best = val if best is None else min(best, val)
    if best is None:
        return BottomedOut(ctx.e_ram * ctx.Kcap)
    return best


def ord_lambda_ladder(a: CyclotomicInteger, ctx: LambdaContext, doublings: int = 1):
    """ord_lambda, doubling the precision after a BottomedOut result."""
    v = ord_lambda(a, ctx)
    for _ in range(doublings):
        if not is_bottomed(v) or a.is_zero():
            break
        ctx = ctx.with_precision(2 * ctx.Kcap)
        v = ord_lambda(a, ctx)
    return v


# ----------------------------------------------------------- residue fields

@dataclass(frozen=True)
class ResidueElement:
    """Element of E_l / lambda^r; for r = 1 an element of F_l[X]/(factor)."""

    ctx: LambdaContext = field(repr=False, compare=False)
    r: int
    coeffs: tuple

    @property
    def key(self) -> tuple:
        return (self.ctx.l, self.ctx.factor, self.r, self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, ResidueElement) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def _need_field(self):
        if self.r != 1:
            raise ValueError("field operations need r = 1")

    def __add__(self, other: "ResidueElement") -> "ResidueElement":
        self._need_field()
        l = self.ctx.l
        return ResidueElement(self.ctx, 1, tuple((a + b) % l for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other):
        self._need_field()
        l, f = self.ctx.l, self.ctx.f_res
        if isinstance(other, int):
            return ResidueElement(self.ctx, 1, tuple(a * other % l for a in self.coeffs))
        prod = pmod(pmul(self.coeffs, other.coeffs, l), self.ctx.factor, l)
        return ResidueElement(self.ctx, 1, tuple(prod + [0] * (f - len(prod))))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ResidueElement":
        out = residue_one(self.ctx)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return not any(x for part in self.coeffs for x in (part if isinstance(part, tuple) else (part,)))

    def as_list(self) -> list:
        return [list(p) if isinstance(p, tuple) else p for p in self.coeffs]


def residue_zero(ctx: LambdaContext) -> ResidueElement:
    return ResidueElement(ctx, 1, (0,) * ctx.f_res)


def residue_one(ctx: LambdaContext) -> ResidueElement:
    return ResidueElement(ctx, 1, (1,) + (0,) * (ctx.f_res - 1))


def residue_reduce(a: CyclotomicInteger, ctx: LambdaContext, r: int = 1) -> ResidueElement:
    """Image of a in E_l / lambda^r."""
    if r < 1 or r > ctx.Kcap * ctx.e_ram:
        raise ValueError("r out of range for the working precision")
    c = _local_coords(a, ctx)
    l, e = ctx.l, ctx.e_ram
    if r == 1:
        return ResidueElement(ctx, 1, tuple(x % l for x in c[0]))
    parts = []
    for i in range(min(r, e)):
        k = -(-(r - i) // e)
        parts.append(tuple(x % l ** k for x in c[i]))
    return ResidueElement(ctx, r, tuple(parts))


def residue_trace(x: ResidueElement, degree: int, q: int | None = None) -> ResidueElement:
    """x + x^q + ... + x^(q^(degree-1)) with q = |E_lambda| by default."""
    q = q or x.ctx.residue_order
    out = residue_zero(x.ctx)
    cur = x
    for _ in range(degree):
        out = out + cur
        cur = cur ** q
    return out
