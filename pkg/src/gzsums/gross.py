"""CM points of p-power conductor on a definite quaternion order, and the class group action.

A point is a pair (i, x): an ideal class representative I_i and an element
x in its left order O_i with x = phi(c * omega) for an optimal embedding phi
of the quadratic order of conductor c.  Points are taken up to conjugation by
O_i^*, and at each ramified prime of the algebra only one of the two local
orientations is kept, so that the points form a single free orbit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .numerics import factorize, hnf_basis, kronecker_symbol, vectors_of_norm
from .quat import IdealClassSet, Lattice, QuatOrder, Quat, RightIdeal
from .ringclass import (
    FormClass, QuadraticOrder, RingClassGroup, RingClassTower, coprime_representative,
)


@dataclass(frozen=True)
class GrossPoint:
    class_index: int
    embedding: Quat
    conductor_exponent: int

    def key(self) -> tuple:
        return (self.class_index, self.embedding)


# ------------------------------------------------------------ embeddings

def _trace_zero_lattice(O: QuatOrder) -> list[Quat]:
    """Basis of {2z - trd(z) : z in O}, a rank-3 lattice of pure quaternions."""
    A = O.algebra
    imgs = []
    for b in O.basis:
        t = A.trd(b)
        imgs.append((2 * b[0] - t, 2 * b[1], 2 * b[2], 2 * b[3]))
    den = 1
    for v in imgs:
        for c in v[1:]:
            den = den * Fraction(c).denominator // _gcd(den, Fraction(c).denominator)
    rows = hnf_basis([[int(Fraction(c) * den) for c in v[1:]] for v in imgs])
    return [(Fraction(0),) + tuple(Fraction(c, den) for c in r) for r in rows]  # type: ignore[misc]


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def _coords(O: QuatOrder, x: Sequence) -> tuple[int, ...] | None:
    c = O.lattice.coords(x)
    return None if c is None else tuple(c)


def canonical_embedding(O: QuatOrder, x: Quat, units: Sequence[Quat] | None = None) -> Quat:
    """Representative of the O^*-conjugacy class of x with least coordinates."""
    A = O.algebra
    units = units if units is not None else O.units()
    best = None
    for u in units:
        y = A.mul(A.mul(u, x), A.inverse(u))
        c = _coords(O, y)
        if c is None:
            raise ArithmeticError("conjugate left the order")
        if best is None or c < best[0]:
            best = (c, y)
    return best[1]


def _is_optimal(O: QuatOrder, x: Quat, c: int) -> bool:
    for ell in factorize(c):
        if tuple(v / ell for v in x) in O.lattice:
            return False
    return True


@dataclass(frozen=True)
class Orientation:
    """Reference data fixing one of the two local embeddings at each ramified prime."""

    refs: tuple  # (ell, z) with z in the base order, z mod P generating the residue field

    @classmethod
    def build(cls, R: QuatOrder) -> "Orientation":
        A = R.algebra
        refs = []
        for ell in sorted(A.ram_finite):
            z = _reference_element(R, ell)
            refs.append((ell, z))
        return cls(tuple(refs))

    def is_oriented(self, A, x: Quat) -> bool:
        T, N = A.trd(x), A.nrd(x)
        for ell, z in self.refs:
            root = _least_root(A, z, int(T), int(N), ell)
            diff = tuple(x[k] - root[0] * (k == 0) - root[1] * z[k] for k in range(4))
            if Fraction(A.nrd(diff)).numerator % ell:
                return False
        return True


def _reference_element(R: QuatOrder, ell: int) -> Quat:
    A = R.algebra
    for b in sorted(R.basis):
        t, n = int(A.trd(b)), int(A.nrd(b))
        if all((x * x - t * x + n) % ell for x in range(ell)):
            return b
    # combinations of two basis vectors
    B = R.basis
    for i in range(4):
        for j in range(4):
            z = tuple(B[i][k] + B[j][k] for k in range(4))
            t, n = int(A.trd(z)), int(A.nrd(z))
            if all((x * x - t * x + n) % ell for x in range(ell)):
                return z
    raise ArithmeticError(f"no residue field generator found at {ell}")


def _least_root(A, z: Quat, T: int, N: int, ell: int) -> tuple[int, int]:
    """Least (a, b) with a + b*zbar a root of X^2 - T X + N in F_ell[zbar]."""
    tz, nz = int(A.trd(z)), int(A.nrd(z))
    # zbar^2 = tz*zbar - nz
    for a in range(ell):
        for b in range(ell):
            # (a + b z)^2 = a^2 + 2ab z + b^2 (tz z - nz)
            c0 = a * a - b * b * nz
            c1 = 2 * a * b + b * b * tz
            r0 = (c0 - T * a + N) % ell
            r1 = (c1 - T * b) % ell
            if r0 == 0 and r1 == 0:
                return a, b
    raise ArithmeticError("minimal polynomial has no root in the residue field")


def optimal_embeddings(O_c: QuadraticOrder, S: IdealClassSet, oriented: bool = True) -> list[GrossPoint]:
    """Optimal embeddings of O_c into every left order, up to unit conjugation."""
    A = S.order.algebra
    for ell in A.ram_finite:
        if kronecker_symbol(O_c.field_disc, ell) != -1:
            return []
    T, N = O_c.trace_generator, O_c.norm_generator
    target = 4 * N - T * T
    orient = Orientation.build(S.order) if oriented else None
    fac = factorize(O_c.conductor)
    if len(fac) > 1:
        raise ValueError("conductor must be a prime power")
    n = sum(fac.values())
    out = []
    for i, O in enumerate(S.left_orders):
        L = _trace_zero_lattice(O)
        G = [[Fraction(A.bilinear(x, y)) for y in L] for x in L]
        units = O.units()
        seen = set()
        for v in vectors_of_norm(G, target):
            y = tuple(sum(cf * b[k] for cf, b in zip(v, L)) for k in range(4))
            x = tuple((y[k] + (T if k == 0 else 0)) / 2 for k in range(4))
            if x not in O.lattice or not _is_optimal(O, x, O_c.conductor):
                continue
            if orient is not None and not orient.is_oriented(A, x):
                continue
            xc = canonical_embedding(O, x, units)
            if xc in seen:
                continue
            seen.add(xc)
            out.append(GrossPoint(i, xc, n))
    return sorted(out, key=lambda P: (P.class_index, _coords(S.left_orders[P.class_index], P.embedding)))


# ----------------------------------------------------------------- action

@dataclass
class ActionContext:
    S: IdealClassSet
    order: QuadraticOrder
    avoid: int  # first coefficients of forms are taken prime to this
    units: list = field(default_factory=list)

    def __post_init__(self):
        if not self.units:
            self.units = [O.units() for O in self.S.left_orders]


def galois_act(sigma: FormClass, x: GrossPoint, ctx: ActionContext) -> GrossPoint:
    """Point represented by phi(J_sigma) * I_x, moved back to a representative."""
    S = ctx.S
    A = S.order.algebra
    f = coprime_representative(sigma, ctx.avoid) if _gcd(sigma.a, ctx.avoid) != 1 else sigma
    a, b, _ = f
    c, d = ctx.order.conductor, ctx.order.field_disc
    xq = x.embedding
    shift = Fraction(b + c * d, 2)
    second = (xq[0] - shift, xq[1], xq[2], xq[3])
    I = S.reps[x.class_index]
    gens = [tuple(a * v for v in beta) for beta in I.basis]
    gens += [A.mul(second, beta) for beta in I.basis]
    Iprime = RightIdeal(S.order, Lattice.from_elements(gens), I.nrd * a)
    j, u = S.class_of(Iprime)
    new = A.mul(A.mul(u, xq), A.inverse(u))
    O = S.left_orders[j]
    if new not in O.lattice:
        raise ArithmeticError("transported embedding is not integral")
    return GrossPoint(j, canonical_embedding(O, new, ctx.units[j]), x.conductor_exponent)


def red(x: GrossPoint) -> int:
    return x.class_index


@dataclass(frozen=True)
class CMOrbit:
    """All oriented CM points of one conductor, indexed through the regular action."""

    n: int
    group: RingClassGroup
    base: GrossPoint
    points: tuple                       # points[k] = elements[k] . base
    index_of: dict = field(compare=False, hash=False)   # point key -> element vector
    action_table: dict = field(compare=False, hash=False)  # (generator idx, element) -> element

    def point(self, sigma: Sequence[int]) -> GrossPoint:
        return self.points[self.group.elements.index(tuple(sigma))]

    @property
    def by_element(self) -> dict:
        return dict(zip(self.group.elements, self.points))

    def element_of(self, x: GrossPoint) -> tuple:
        return self.index_of[x.key()]

    def act(self, sigma: Sequence[int], tau: Sequence[int]) -> tuple:
        """Element labelling sigma.(tau.base)."""
        return self.group.add(tuple(sigma), tuple(tau))

    def red_values(self) -> list[int]:
        return [red(P) for P in self.points]

    def summary(self) -> dict:
        return {
            "n": self.n,
            "points": [{"class_index": P.class_index, "embedding": [str(c) for c in P.embedding],
                        "element": list(g)} for g, P in zip(self.group.elements, self.points)],
            "action": {str(list(k)): [list(self.action_table[(k_i, g)]) for g in self.group.elements]
                       for k_i, k in enumerate(self.group.generators)},
        }


class TransitivityError(RuntimeError):
    pass


def cm_points(S: IdealClassSet, T: RingClassTower, n: int, check: bool = True) -> CMOrbit:
    """The level-n CM points as the orbit of the least enumerated point."""
    G = T.G(n)
    order = QuadraticOrder(T.d_K, T.p ** n)
    A = S.order.algebra
    avoid = A.disc * max(2, S.order.level)
    ctx = ActionContext(S, order, avoid)
    enumerated = optimal_embeddings(order, S)
    if not enumerated:
        raise TransitivityError("no optimal embeddings: local obstruction")
    base = enumerated[0]
    points = [galois_act(G.form(v), base, ctx) for v in G.elements]
    index_of = {}
    for v, P in zip(G.elements, points):
        if P.key() in index_of:
            raise TransitivityError(f"action not free at level {n}: {len(set(index_of))} distinct of {G.order}")
        index_of[P.key()] = v
    if {P.key() for P in enumerated} != set(index_of):
        raise TransitivityError(
            f"action not transitive at level {n}: orbit {len(index_of)}, enumerated {len(enumerated)}")
    table = {}
    for gi, g in enumerate(G.generators):
        gv = G.log(g)
        for v, P in zip(G.elements, points):
            if check:
                img = galois_act(g, P, ctx)
                w = index_of.get(img.key())
                if w != G.add(gv, v):
                    raise TransitivityError("action is not compatible with the group law")
            table[(gi, v)] = G.add(gv, v)
    return CMOrbit(n, G, base, tuple(points), index_of, table)


def distribution_survey(orbit: CMOrbit, reps: Sequence[Sequence[int]], h: int) -> dict:
    """Coverage of M_H^R by the tuples (red(tau.y))_tau over the orbit."""
    G = orbit.group
    by = orbit.by_element
    tuples = set()
    for y in G.elements:
        tuples.add(tuple(red(by[G.add(tuple(t), y)]) for t in reps))
    total = h ** len(reps)
    return {
        "n": orbit.n,
        "representatives": [list(r) for r in reps],
        "classes": h,
        "covered": len(tuples),
        "target": total,
        "coverage": str(Fraction(len(tuples), total)),
        "surjective": len(tuples) == total,
    }
