"""Binary quadratic forms, ring class groups of p-power conductor, and their characters."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import gcd, isqrt
from typing import Iterable, NamedTuple, Sequence

from .numerics import (
    factorize, hnf_basis, is_prime, lattice_intersection, snf, valuation, xgcd,
)

Vec = tuple[int, ...]


# ---------------------------------------------------------------- orders

def is_fundamental(d: int) -> bool:
    if d % 4 == 1:
        return all(e == 1 for e in factorize(d).values())
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and all(e == 1 for e in factorize(m).values())
    return False


@dataclass(frozen=True)
class QuadraticOrder:
    """Order of conductor c in Q(sqrt(d_K)), with basis 1, c*omega."""

    field_disc: int
    conductor: int = 1

    def __post_init__(self):
        if self.field_disc >= 0 or not is_fundamental(self.field_disc):
            raise ValueError(f"{self.field_disc} is not a negative fundamental discriminant")

    @property
    def disc(self) -> int:
        return self.field_disc * self.conductor ** 2

    @property
    def trace_omega(self) -> int:
        """Tr(omega) for omega = (d_K + sqrt d_K)/2."""
        return self.field_disc

    @property
    def norm_omega(self) -> int:
        d = self.field_disc
        return (d * d - d) // 4

    @property
    def trace_generator(self) -> int:
        return self.conductor * self.field_disc

    @property
    def norm_generator(self) -> int:
        return self.conductor ** 2 * self.norm_omega


# ----------------------------------------------------------------- forms

class FormClass(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y


def reduce_form(a: int, b: int, c: int) -> FormClass:
    """Unique reduced form properly equivalent to (a, b, c)."""
    if b * b - 4 * a * c >= 0 or a <= 0:
        raise ValueError("need a positive definite form")
    while True:
        if not (-a < b <= a):
            # normalise b into (-a, a]
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return FormClass(a, b, c)


def transform(f: FormClass, M: Sequence[Sequence[int]]) -> FormClass:
    """f o M for M = [[x, z], [y, w]] (columns are the new basis)."""
    (x, z), (y, w) = M
    a, b, c = f
    return FormClass(f(x, y), 2 * a * x * z + b * (x * w + y * z) + 2 * c * y * w, f(z, w))


def compose(f: FormClass, g: FormClass) -> FormClass:
    """Gauss composition of primitive forms of equal discriminant."""
    D = f.disc
    if g.disc != D:
        raise ValueError("discriminants differ")
    a1, b1, _ = f
    a2, b2, _ = g
    s = (b1 + b2) // 2
    g1, u1, v1 = xgcd(a1, a2)
    e, x, w = xgcd(g1, s)
    u, v = u1 * x, v1 * x
    a3 = a1 * a2 // (e * e)
    B = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + D) // 2) // e
    B %= 2 * a3
    return reduce_form(a3, B, (B * B - D) // (4 * a3))


def inverse(f: FormClass) -> FormClass:
    return reduce_form(f.a, -f.b, f.c)


def principal_form(D: int) -> FormClass:
    b = D % 2
    return FormClass(1, b, (b - D) // 4)


def reduced_forms(D: int) -> list[FormClass]:
    """All primitive reduced forms of discriminant D < 0."""
    out = []
    amax = isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            out.append(FormClass(a, b, c))
    return out


def prime_form(D: int, q: int) -> FormClass | None:
    """A form (q, b, c) of discriminant D, if q is represented."""
    for b in range(0, 2 * q):
        if (b * b - D) % (4 * q) == 0:
            c = (b * b - D) // (4 * q)
            if gcd(gcd(q, b), c) == 1:
                return reduce_form(q, b, c)
    return None


def coprime_representative(f: FormClass, m: int) -> FormClass:
    """A form equivalent to f whose first coefficient is coprime to m."""
    bound = 1
    while True:
        for x in range(-bound, bound + 1):
            for y in range(0, bound + 1):
                if gcd(x, y) != 1 or (y == 0 and x != 1):
                    continue
                if gcd(f(x, y), m) == 1:
                    _, w, mz = xgcd(x, y)  # x*w + y*(mz) = 1
                    return transform(f, [[x, -mz], [y, w]])
        bound += 1


# ---------------------------------------------------------- class groups

@dataclass(frozen=True)
class RingClassGroup:
    """Form class group of a discriminant, in Smith coordinates."""

    disc: int
    invariants: tuple[int, ...]
    generators: tuple[FormClass, ...]
    table: dict = field(compare=False, hash=False, repr=False)  # reduced form -> vector

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariants:
            out *= d
        return out

    @property
    def exponent(self) -> int:
        return self.invariants[-1] if self.invariants else 1

    @property
    def identity(self) -> Vec:
        return tuple(0 for _ in self.invariants)

    @cached_property
    def elements(self) -> list[Vec]:
        return sorted(self.table.values())

    @cached_property
    def _forms(self) -> dict:
        return {v: f for f, v in self.table.items()}

    def form(self, v: Vec) -> FormClass:
        return self._forms[tuple(v)]

    def log(self, f: FormClass) -> Vec:
        return self.table[reduce_form(*f)]

    def add(self, u: Vec, v: Vec) -> Vec:
        return tuple((a + b) % d for a, b, d in zip(u, v, self.invariants))

    def neg(self, u: Vec) -> Vec:
        return tuple(-a % d for a, d in zip(u, self.invariants))

    def sub(self, u: Vec, v: Vec) -> Vec:
        return self.add(u, self.neg(v))

    def mul(self, k: int, u: Vec) -> Vec:
        return tuple(k * a % d for a, d in zip(u, self.invariants))

    def element_order(self, u: Vec) -> int:
        k, cur = 1, tuple(u)
        while cur != self.identity:
            cur = self.add(cur, u)
            k += 1
        return k

    def span(self, gens: Iterable[Vec]) -> frozenset:
        out = {self.identity}
        frontier = [self.identity]
        gens = [tuple(g) for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.add(x, g)
                    if y not in out:
                        out.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(out)

    def summary(self) -> dict:
        return {
            "disc": self.disc,
            "order": self.order,
            "cyclic_factors": list(self.invariants),
            "generators": [list(g) for g in self.generators],
        }


def class_group(D: int) -> RingClassGroup:
    """Structure of the form class group of discriminant D via prime forms and SNF."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError("discriminant must be negative and 0 or 1 mod 4")
    forms = reduced_forms(D)
    h = len(forms)
    ident = principal_form(D)
    # pick prime forms until they generate
    gens: list[FormClass] = []
    reached = {ident}
    q = 1
    while len(reached) < h:
        q += 1
        if not is_prime(q):
            continue
        f = prime_form(D, q)
        if f is None or f in reached:
            continue
        gens.append(f)
        reached = _closure(reached, f)
    k = len(gens)
    if k == 0:
        return RingClassGroup(D, (), (), {ident: ()})
    # exponent vectors by BFS, relations from collisions
    vec = {ident: (0,) * k}
    frontier = [ident]
    relations = []
    while frontier:
        nxt = []
        for f in frontier:
            for i, g in enumerate(gens):
                e = list(vec[f])
                e[i] += 1
                h_ = compose(f, g)
                if h_ in vec:
                    rel = [a - b for a, b in zip(e, vec[h_])]
                    if any(rel):
                        relations.append(rel)
                else:
                    vec[h_] = tuple(e)
                    nxt.append(h_)
        frontier = nxt
    R = hnf_basis(relations)
    Dm, _U, V = snf(R)
    diag = [Dm[i][i] for i in range(k)]
    keep = [i for i in range(k) if diag[i] > 1]
    invariants = tuple(diag[i] for i in keep)
    table = {}
    for f, e in vec.items():
        y = [sum(e[r] * V[r][c] for r in range(k)) for c in range(k)]
        table[f] = tuple(y[i] % diag[i] for i in keep)
    if len(set(table.values())) != h:
        raise ArithmeticError("class group coordinates are not injective")
    inv_table = {v: f for f, v in table.items()}
    generators = tuple(inv_table[tuple(int(i == j) for j in range(len(keep)))] for i in range(len(keep)))
    return RingClassGroup(D, invariants, generators, table)


def _closure(reached: set, g: FormClass) -> set:
    out = set(reached)
    frontier = list(out)
    while frontier:
        nxt = []
        for f in frontier:
            h = compose(f, g)
            if h not in out:
                out.add(h)
                nxt.append(h)
        frontier = nxt
    return out


def class_number(D: int) -> int:
    return len(reduced_forms(D))


# ------------------------------------------------------------------ towers

def lower_form(f: FormClass, p: int) -> FormClass:
    """Image of a form of disc D p^2 under the map to disc D (extension of ideals)."""
    g = coprime_representative(f, 2 * p) if f.a % p == 0 else f
    a, b, _ = g
    D = g.disc // (p * p)
    # B = b / p mod 2a keeps B^2 = D mod 4a since p is odd and prime to a
    B = (b * pow(p, -1, 2 * a)) % (2 * a) if a > 1 else D % 2
    return reduce_form(a, B, (B * B - D) // (4 * a))


@dataclass
class RingClassTower:
    """G(0), G(1), ... for conductors p^n of Q(sqrt d_K), grown on demand."""

    d_K: int
    p: int
    groups: list = field(default_factory=list)
    transitions: list = field(default_factory=list)  # transitions[n]: images of G(n) gens in G(n-1)

    def __post_init__(self):
        if self.p % 2 == 0 or not is_prime(self.p) or self.d_K % self.p == 0:
            raise ValueError("p must be an odd prime not dividing d_K")
        if not self.groups:
            self.groups.append(class_group(self.d_K))
            self.transitions.append(None)

    def G(self, n: int) -> RingClassGroup:
        while len(self.groups) <= n:
            k = len(self.groups)
            Gk = class_group(self.d_K * self.p ** (2 * k))
            prev = self.groups[-1]
            images = [prev.log(lower_form(g, self.p)) for g in Gk.generators]
            self.groups.append(Gk)
            self.transitions.append(images)
            _check_transition(Gk, prev, images, self.p)
        return self.groups[n]

    def project(self, v: Vec, n: int, k: int = 1) -> Vec:
        """Image of v in G(n) under G(n) -> G(n-k)."""
        self.G(n)
        for level in range(n, n - k, -1):
            imgs = self.transitions[level]
            target = self.groups[level - 1]
            out = target.identity
            for c, img in zip(v, imgs):
                out = target.add(out, target.mul(c, img))
            v = out
        return v

    def kernel(self, n: int, k: int = 1) -> frozenset:
        G = self.G(n)
        ident = self.groups[n - k].identity
        return frozenset(v for v in G.elements if self.project(v, n, k) == ident)

    @cached_property
    def stable_level(self) -> int:
        """Least n >= 1 after which each step of the tower has index exactly p.

        Checked through two further levels.
        """
        n = 1
        while True:
            if all(self.G(k + 1).order == self.p * self.G(k).order for k in range(n, n + 2)):
                return n
            n += 1
            if n > 6:
                raise RuntimeError("tower did not stabilise by level 6")

    def summary(self, n_max: int) -> dict:
        return {
            "d_K": self.d_K, "p": self.p,
            "levels": [self.G(n).summary() for n in range(n_max + 1)],
            "stable_level": self.stable_level,
        }


def _check_transition(G: RingClassGroup, H: RingClassGroup, images, p: int) -> None:
    for d, img in zip(G.invariants, images):
        if H.mul(d, img) != H.identity:
            raise ArithmeticError("transition is not well defined")
    image = H.span(images)
    if len(image) != H.order:
        raise ArithmeticError("transition is not surjective")
    for v in G.elements:
        direct = H.log(lower_form(G.form(v), p))
        lin = H.identity
        for c, img in zip(v, images):
            lin = H.add(lin, H.mul(c, img))
        if direct != lin:
            raise ArithmeticError("transition is not a homomorphism")


def tower(d_K: int, p: int, n_max: int) -> RingClassTower:
    T = RingClassTower(d_K, p)
    T.G(n_max)
    return T


# --------------------------------------------------------------- subgroups

def torsion_G0(T: RingClassTower, n: int) -> frozenset:
    """Image in G(n) of the torsion of the tower.

    With e the exponent of G(n), the e-torsion of G(n+k) maps onto the
    torsion image plus a p-part that dies once k >= v_p(e).  The projection
    is taken there and checked to be unchanged one level further up.
    """
    ns = T.stable_level
    if n < ns:
        raise ValueError(f"level {n} is below the stabilisation level {ns}; use n >= {ns}")
    G = T.G(n)
    e = G.exponent
    k = valuation(e, T.p)

    def image(k):
        Gk = T.G(n + k)
        gens = []
        for i, d in enumerate(Gk.invariants):
            v = tuple(d // gcd(d, e) if j == i else 0 for j in range(len(Gk.invariants)))
            gens.append(T.project(v, n + k, k) if k else v)
        return G.span(gens)

    out = image(k)
    if image(k + 1) != out:
        raise RuntimeError("torsion image did not stabilise")
    return out


def genus_G1(T: RingClassTower, n: int) -> tuple[frozenset, list[Vec]]:
    """Subgroup generated by the ramified prime classes, with the generators."""
    G = T.G(n)
    D = G.disc
    gens = []
    for Q in sorted(factorize(T.d_K)):
        if Q == T.p:
            continue
        f = prime_form(D, Q)
        if f is None:
            raise ArithmeticError(f"no prime form above {Q}")
        gens.append(G.log(f))
    return G.span(gens), gens


def f2_rank(G: RingClassGroup, gens: Sequence[Vec]) -> int:
    size = len(G.span(gens))
    r = 0
    while (1 << r) < size:
        r += 1
    return r


@dataclass(frozen=True)
class TowerSubgroups:
    n: int
    G0: frozenset
    G1: frozenset
    G2: frozenset
    C: frozenset
    C_generator: Vec
    split: dict = field(compare=False, hash=False, repr=False)  # element -> (g0, c)

    def kernel_part(self, G: RingClassGroup, m: int, p: int) -> list[Vec]:
        """C[p^m], the elements of the complement killed by p^m."""
        return sorted(v for v in self.C if G.mul(p ** m, v) == G.identity)


def tower_subgroups(T: RingClassTower, n: int) -> TowerSubgroups:
    G = T.G(n)
    G0 = torsion_G0(T, n)
    G1, _ = genus_G1(T, n)
    G2 = frozenset({G.identity})
    if not G1 <= G0:
        raise ArithmeticError("genus subgroup is not torsion")
    h = G.order // len(G0)
    gen = None
    for v in G.elements:
        if G.element_order(v) == h:
            span = G.span([v])
            if span & G0 == {G.identity}:
                gen = v
                break
    if gen is None:
        raise ValueError(f"G(n) does not split as G0 x H at level {n}")
    C = G.span([gen])
    split = {}
    for g0 in G0:
        for c in C:
            split[G.add(g0, c)] = (g0, c)
    if len(split) != G.order:
        raise ArithmeticError("G0 and C do not span G(n)")
    return TowerSubgroups(n, G0, G1, G2, C, gen, split)


@dataclass(frozen=True)
class ZSubgroup:
    n: int
    m: int
    elements: frozenset
    labels: dict = field(compare=False, hash=False)  # a mod p^m -> element


def _ideal_of_element(order: QuadraticOrder, alpha: tuple[int, int]) -> FormClass:
    """Form of the O_c-ideal alpha*O_K intersected with O_c (alpha prime to c)."""
    T, N = order.trace_omega, order.norm_omega
    x, y = alpha  # alpha = x + y*omega
    # alpha*omega = x*omega + y*omega^2 = -y*N + (x + y*T) omega
    L1 = [[x, y], [-y * N, x + y * T]]
    c = order.conductor
    L = lattice_intersection(hnf_basis(L1), [[1, 0], [0, c]])
    return form_of_lattice(order, L)


def form_of_lattice(order: QuadraticOrder, basis: Sequence[Sequence[int]]) -> FormClass:
    """Binary form of a lattice of O_c given in (1, omega) coordinates."""
    T, N = order.trace_omega, order.norm_omega
    (x1, y1), (x2, y2) = basis
    det_ = x1 * y2 - x2 * y1
    if det_ < 0:
        x2, y2 = -x2, -y2
        det_ = -det_
    c = order.conductor
    if det_ % c:
        raise ValueError("lattice not contained in the order")
    norm_ideal = det_ // c

    def nm(x, y):
        return x * x + T * x * y + N * y * y

    # Tr(alpha * conj(beta)) for alpha = x1 + y1 w, beta = x2 + y2 w
    tr = 2 * x1 * x2 + T * (x1 * y2 + x2 * y1) + 2 * N * y1 * y2
    a, b, cc = nm(x1, y1), -tr, nm(x2, y2)
    if a % norm_ideal or b % norm_ideal or cc % norm_ideal:
        raise ArithmeticError("form coefficients not divisible by the ideal norm")
    return reduce_form(a // norm_ideal, b // norm_ideal, cc // norm_ideal)


def lattice_of_form(order: QuadraticOrder, f: FormClass) -> list[list[int]]:
    """(1, omega)-coordinates of a, (-b + sqrt D)/2 for the ideal of f."""
    a, b, _ = f
    c = order.conductor
    d = order.field_disc
    # sqrt(D) = c sqrt(d_K) = c (2 omega - d_K)
    return [[a, 0], [(-b - c * d) // 2, c]]


def Z_subgroup(T: RingClassTower, n: int, m: int) -> ZSubgroup:
    """ker(G(n) -> G(n-m)) with the labelling a -> class of (1 + a p^(n-m) omega)."""
    if n < 2 * m:
        raise ValueError("labelling needs n >= 2m")
    G = T.G(n)
    ker = T.kernel(n, m)
    pm = T.p ** m
    if len(ker) != pm:
        raise ArithmeticError(f"kernel has order {len(ker)}, expected {pm}")
    order = QuadraticOrder(T.d_K, T.p ** n)
    labels = {}
    for a in range(pm):
        f = _ideal_of_element(order, (1, a * T.p ** (n - m)))
        labels[a] = G.log(f)
    if set(labels.values()) != set(ker):
        raise ArithmeticError("labels do not exhaust the kernel")
    return ZSubgroup(n, m, ker, labels)


# --------------------------------------------------------------- characters

@dataclass(frozen=True)
class RingClassCharacter:
    """chi(v) = exp(2 pi i * value(v) / exponent) with value(v) = sum c_i v_i E/d_i."""

    invariants: tuple[int, ...]
    coeffs: tuple[int, ...]

    @property
    def exponent(self) -> int:
        return self.invariants[-1] if self.invariants else 1

    def value(self, v: Sequence[int]) -> int:
        E = self.exponent
        return sum(c * x * (E // d) for c, x, d in zip(self.coeffs, v, self.invariants)) % E

    @property
    def order(self) -> int:
        E = self.exponent
        g = E
        for c, d in zip(self.coeffs, self.invariants):
            g = gcd(g, c * (E // d))
        return E // g

    def is_trivial(self) -> bool:
        return not any(self.coeffs)

    def __mul__(self, other: "RingClassCharacter") -> "RingClassCharacter":
        return RingClassCharacter(self.invariants, tuple((a + b) % d for a, b, d in zip(self.coeffs, other.coeffs, self.invariants)))

    def __pow__(self, k: int) -> "RingClassCharacter":
        return RingClassCharacter(self.invariants, tuple(k * a % d for a, d in zip(self.coeffs, self.invariants)))

    def label(self) -> str:
        return "chi[" + ",".join(str(c) for c in self.coeffs) + "]"


def characters(G: RingClassGroup) -> list[RingClassCharacter]:
    out = [()]
    for d in G.invariants:
        out = [c + (k,) for c in out for k in range(d)]
    return [RingClassCharacter(G.invariants, c) for c in out]


def character_from_values(G: RingClassGroup, gen_values: Sequence[int]) -> RingClassCharacter:
    """Character with prescribed values (in Z/exponent) on the generators."""
    E = G.exponent
    coeffs = []
    for val, d in zip(gen_values, G.invariants):
        step = E // d
        if val % step:
            raise ValueError("value incompatible with the generator order")
        coeffs.append(val // step % d)
    return RingClassCharacter(G.invariants, tuple(coeffs))


def decompose(chi: RingClassCharacter, G: RingClassGroup, subs: TowerSubgroups):
    """(chi0', chi1) with chi = chi0' chi1, chi0' trivial on C and chi1 trivial on G0."""
    basis = [tuple(int(i == j) for j in range(len(G.invariants))) for i in range(len(G.invariants))]
    v0 = [chi.value(subs.split[e][0]) for e in basis]
    v1 = [chi.value(subs.split[e][1]) for e in basis]
    return character_from_values(G, v0), character_from_values(G, v1)


def restrict_values(chi: RingClassCharacter, elements: Iterable[Vec]) -> tuple:
    return tuple(chi.value(v) for v in sorted(elements))


def is_primitive(chi: RingClassCharacter, T: RingClassTower, n: int) -> bool:
    """chi does not factor through G(n-1)."""
    if n == 0:
        return True
    return any(chi.value(v) for v in T.kernel(n, 1))


def g0_characters(G: RingClassGroup, subs: TowerSubgroups) -> list[RingClassCharacter]:
    """Characters chi0' of G(n) trivial on the complement: the dual of G0."""
    return [chi for chi in characters(G) if all(chi.value(c) == 0 for c in subs.C)]


def complement_characters(G: RingClassGroup, subs: TowerSubgroups) -> list[RingClassCharacter]:
    """Characters chi1 of G(n) trivial on G0: the dual of H(n)."""
    return [chi for chi in characters(G) if all(chi.value(g) == 0 for g in subs.G0)]


def P_set(T: RingClassTower, n: int, chi0: RingClassCharacter, subs: TowerSubgroups) -> list[RingClassCharacter]:
    """Primitive characters of G(n) whose restriction to G0 is chi0."""
    G = T.G(n)
    target = restrict_values(chi0, subs.G0)
    return [chi for chi in characters(G)
            if restrict_values(chi, subs.G0) == target and is_primitive(chi, T, n)]
