"""Gross-Zagier sums a(x, chi) on the flagship-style instances, and the experiments built on them.

Every sum is an exact element of Z[zeta_M] for the instance modulus M; the
lambda-adic valuations come from the context fixed at build time.
"""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, Sequence

from .brandt import (
    EllipticCurve, HypothesisReport, MuResult, NormClassSet, ThetaForm, aq_pointcount,
    brandt_matrix, hecke_eigenforms, hypothesis_checks, lambda_unit_entry, mu_constant, norm_class_set,
    nu_constant, with_eigenvalues,
)
from .cyclo import (
    CyclotomicInteger, LambdaContext, ResidueElement, is_bottomed, lambda_context,
    ord_lambda_ladder, residue_reduce, residue_trace, residue_zero,
)
from .gross import CMOrbit, cm_points, red
from .numerics import factorize, kronecker_symbol, lcm, multiplicative_order, primes_up_to, valuation
from .quat import (
    IdealClassSet, algebra_from_ramification, eichler_order, maximal_order, right_ideal_classes,
)
from .ringclass import (
    RingClassCharacter, RingClassGroup, RingClassTower, TowerSubgroups, Vec, Z_subgroup,
    characters, complement_characters, decompose, g0_characters, is_primitive, tower,
    tower_subgroups,
)


class HypothesisFailure(ValueError):
    """The standing hypotheses fail for the requested data."""

    def __init__(self, report: HypothesisReport):
        self.report = report
        failed = [k for k in ("non_exceptional", "coprime_level", "s_even", "unit_inert_prime", "p_unramified")
                  if not getattr(report, k)]
        super().__init__("hypotheses failed: " + ", ".join(failed))


class ConductorMismatch(ValueError):
    pass


class UnsupportedConfiguration(ValueError):
    pass


# ---------------------------------------------------------------- instance

@dataclass
class GZInstance:
    curve: EllipticCurve
    d_K: int
    p: int
    l: int
    n_max: int
    delta: int
    hypotheses: HypothesisReport
    classes: IdealClassSet
    theta: ThetaForm
    tower: RingClassTower
    ctx: LambdaContext
    norm_classes: NormClassSet
    mu: MuResult
    nu: int
    _orbits: dict = field(default_factory=dict, repr=False)
    _subs: dict = field(default_factory=dict, repr=False)
    _psi: dict = field(default_factory=dict, repr=False)

    @property
    def M(self) -> int:
        return self.ctx.M

    def orbit(self, n: int) -> CMOrbit:
        if n not in self._orbits:
            if n > self.n_max:
                raise ValueError(f"level {n} exceeds n_max = {self.n_max}")
            self._orbits[n] = cm_points(self.classes, self.tower, n)
        return self._orbits[n]

    def subgroups(self, n: int) -> TowerSubgroups:
        if n not in self._subs:
            self._subs[n] = tower_subgroups(self.tower, n)
        return self._subs[n]

    def psi(self, n: int) -> dict:
        """Element of G(n) -> theta(red(element . base point))."""
        if n not in self._psi:
            orb = self.orbit(n)
            self._psi[n] = {v: self.theta.values[red(P)] for v, P in zip(orb.group.elements, orb.points)}
        return self._psi[n]

    def with_theta(self, values: Sequence[int]) -> "GZInstance":
        """Same instance with theta replaced (used for synthetic test functions)."""
        return replace(self, theta=ThetaForm(tuple(values), dict(self.theta.eigenvalues)),
                       _orbits=self._orbits, _subs=self._subs, _psi={})

    def summary(self) -> dict:
        return {
            "curve": list(self.curve.coefficients), "conductor": self.curve.conductor,
            "d_K": self.d_K, "p": self.p, "l": self.l, "n_max": self.n_max, "delta": self.delta,
            "classes": len(self.classes), "weights": list(self.classes.weights),
            "theta": list(self.theta.values), "mu": self.mu.mu, "mu_prime": self.mu.achieving_prime,
            "nu": self.nu, "lambda": self.ctx.describe(),
        }


def _matching_form(S: IdealClassSet, curve: EllipticCurve) -> ThetaForm:
    bad = S.order.algebra.disc * S.order.level * curve.conductor
    probe = [q for q in primes_up_to(50) if bad % q][:4]
    mats = [brandt_matrix(S, q) for q in probe]
    for form in hecke_eigenforms(mats, S.weights):
        if all(form.a(q) == aq_pointcount(curve, q) for q in probe):
            return form
    raise ArithmeticError("no rational eigenform matches the curve")


def build_instance(curve: EllipticCurve, d_K: int, p: int, l: int, n_max: int = 2, *,
                   Kcap: int = 12, mu_bound: int = 100, classes: IdealClassSet | None = None,
                   factor_index: int = 0) -> GZInstance:
    """Validate the data and assemble everything the sums need."""
    hyp = hypothesis_checks(curve, d_K, p, l, mu_bound)
    if not hyp.ok:
        raise HypothesisFailure(hyp)
    N = curve.conductor
    delta = valuation(N, p)
    if delta:
        raise UnsupportedConfiguration("levels divisible by p are not supported")
    ram = sorted(q for q in hyp.S_ram if q != "inf")
    D_B = 1
    for q in ram:
        D_B *= q
    level = N // D_B
    for q in factorize(level):
        if kronecker_symbol(d_K, q) != 1:
            raise UnsupportedConfiguration(f"prime {q} of the Eichler level does not split in K")
    if classes is None:
        A = algebra_from_ramification(ram)
        R = eichler_order(maximal_order(A), level)
        classes = right_ideal_classes(R)
    theta = _matching_form(classes, curve)
    theta = with_eigenvalues(theta, classes, primes_up_to(mu_bound))
    T = tower(d_K, p, n_max)
    M = lcm(p, T.G(n_max).exponent)
    ctx = lambda_context(l, M, p, Kcap, factor_index)
    if not lambda_unit_entry(theta, ctx):
        raise UnsupportedConfiguration("theta has no lambda-adic unit entry")
    NH = norm_class_set(classes)
    mu = mu_constant(theta, ctx, N, d_K, p, mu_bound)
    nu = nu_constant(theta, ctx, NH)
    return GZInstance(curve, d_K, p, l, n_max, delta, hyp, classes, theta, T, ctx, NH, mu, nu)


# ------------------------------------------------------------------ values

@dataclass(frozen=True)
class GZValue:
    value: CyclotomicInteger
    valuation: object   # int or BottomedOut
    chi: str
    x: str


def element_label(v: Sequence[int]) -> str:
    return "(" + ",".join(str(c) for c in v) + ")"


def _char_root(chi: RingClassCharacter, v: Vec, M: int) -> int:
    """Exponent k with chi(v) = zeta_M^k."""
    E = chi.exponent
    if M % E:
        raise ValueError(f"character exponent {E} does not divide the modulus {M}")
    return chi.value(v) * (M // E) % M


def _group_ring_sum(terms: Iterable[tuple[int, int]], M: int) -> CyclotomicInteger:
    buf = [0] * M
    for k, c in terms:
        buf[k % M] += c
    return CyclotomicInteger.from_group_ring(M, buf)


def _divide_exact(a: CyclotomicInteger, d: int) -> CyclotomicInteger:
    if d == 1:
        return a
    if any(c % d for c in a.coeffs):
        raise ArithmeticError(f"sum not divisible by |G2| = {d}")
    return CyclotomicInteger(a.M, tuple(c // d for c in a.coeffs))


def _point_element(x, inst: GZInstance) -> tuple[int, Vec]:
    n = x.conductor_exponent
    return n, inst.orbit(n).element_of(x)


def gz_sum(x, chi: RingClassCharacter, inst: GZInstance, *, check_conductor: bool = True) -> GZValue:
    """a(x, chi) = sum over G(n) of chi(sigma) psi(sigma.x), divided by |G2|.

    The conductor check insists on chi primitive of level n; pass
    check_conductor=False to evaluate characters of smaller conductor
    pulled back to G(n).
    """
    n, w = _point_element(x, inst)
    G = inst.tower.G(n)
    if chi.invariants != G.invariants:
        raise ConductorMismatch("character is not a character of G(n) for the point's level")
    if check_conductor and not is_primitive(chi, inst.tower, n):
        raise ConductorMismatch(f"character has conductor smaller than p^{n}")
    psi = inst.psi(n)
    M = inst.M
    val = _group_ring_sum(((_char_root(chi, s, M), psi[G.add(s, w)]) for s in G.elements), M)
    val = _divide_exact(val, len(inst.subgroups(n).G2) if n >= inst.tower.stable_level else 1)
    return GZValue(val, ord_lambda_ladder(val, inst.ctx), chi.label(), element_label(w))


def gz_average(x, chi0: RingClassCharacter, n: int, inst: GZInstance) -> GZValue:
    """b(x, chi0): sum of a(x, chi) over the primitive chi restricting to chi0 on G0."""
    chars = primitive_characters_over(chi0, n, inst)
    if not chars:
        raise ValueError("no primitive character induces chi0 at this level")
    total = CyclotomicInteger.from_int(inst.M, 0)
    for chi in chars:
        total = total + gz_sum(x, chi, inst).value
    _, w = _point_element(x, inst)
    return GZValue(total, ord_lambda_ladder(total, inst.ctx), "avg:" + chi0.label(), element_label(w))


def primitive_characters_over(chi0: RingClassCharacter, n: int, inst: GZInstance) -> list[RingClassCharacter]:
    G = inst.tower.G(n)
    subs = inst.subgroups(n)
    target = [chi0.value(g) * (G.exponent // chi0.exponent) % G.exponent for g in sorted(subs.G0)]
    out = []
    for chi in characters(G):
        vals = [chi.value(g) for g in sorted(subs.G0)]
        if vals == target and is_primitive(chi, inst.tower, n):
            out.append(chi)
    return out


# -------------------------------------------------------- reduced sums

def coset_representatives(G: RingClassGroup, group: Iterable[Vec], sub: Iterable[Vec]) -> list[Vec]:
    """Least element of each coset of sub in group."""
    sub = sorted(sub)
    seen: set = set()
    reps = []
    for g in sorted(group):
        if g in seen:
            continue
        reps.append(g)
        seen.update(G.add(g, h) for h in sub)
    return reps


def kernel_elements(n: int, m: int, inst: GZInstance) -> tuple[list[Vec], str]:
    """The p^m-torsion of the complement, through the unit labels when n >= 2m.

    Returns the elements (label order when labelled) and which route was used.
    """
    G = inst.tower.G(n)
    subs = inst.subgroups(n)
    part = subs.kernel_part(G, m, inst.p)
    if n >= 2 * m and m <= n:
        Z = Z_subgroup(inst.tower, n, m)
        labelled = [Z.labels[a] for a in sorted(Z.labels)]
        if sorted(labelled) == part:
            return labelled, "labels"
    return part, "torsion"


def psi_m_sum(x, chi1: RingClassCharacter, m: int, inst: GZInstance) -> CyclotomicInteger:
    """sum over tau in Z(n, m) of chi1(tau) psi(tau.x)."""
    n, w = _point_element(x, inst)
    return _psi_m(n, w, chi1, m, inst)


def _psi_m(n: int, w: Vec, chi1: RingClassCharacter, m: int, inst: GZInstance) -> CyclotomicInteger:
    G = inst.tower.G(n)
    psi = inst.psi(n)
    elems, _ = kernel_elements(n, m, inst)
    return _group_ring_sum(((_char_root(chi1, t, inst.M), psi[G.add(t, w)]) for t in elems), inst.M)


def _psi_mD(n: int, w: Vec, chi0, chi1, m: int, inst: GZInstance) -> CyclotomicInteger:
    G = inst.tower.G(n)
    subs = inst.subgroups(n)
    total = CyclotomicInteger.from_int(inst.M, 0)
    for t in coset_representatives(G, subs.G1, subs.G2):
        part = _psi_m(n, G.add(t, w), chi1, m, inst)
        total = total + CyclotomicInteger.root(inst.M, _char_root(chi0, t, inst.M)) * part
    return total


def psi_mD_sum(x, chi0: RingClassCharacter, chi1: RingClassCharacter, m: int, inst: GZInstance) -> CyclotomicInteger:
    """sum over tau in G1/G2 of chi0(tau) psi_m(tau.x)."""
    n, w = _point_element(x, inst)
    return _psi_mD(n, w, chi0, chi1, m, inst)


def _reduced_sum(n: int, w: Vec, chi0, chi1, m: int, inst: GZInstance) -> CyclotomicInteger:
    """sum over sigma in G0/G1 of chi0(sigma) psi_{m,D}(sigma.x), with the 1/|G2| normalisation."""
    G = inst.tower.G(n)
    subs = inst.subgroups(n)
    total = CyclotomicInteger.from_int(inst.M, 0)
    for s in coset_representatives(G, subs.G0, subs.G1):
        part = _psi_mD(n, G.add(s, w), chi0, chi1, m, inst)
        total = total + CyclotomicInteger.root(inst.M, _char_root(chi0, s, inst.M)) * part
    return _divide_exact(total, len(subs.G2))


# ------------------------------------------------------------------- traces

@dataclass(frozen=True)
class TraceParameters:
    o: int
    r: int
    e: int
    f: int
    m: int
    s: int | None
    k_exponent: int

    @classmethod
    def build(cls, chi0: RingClassCharacter, inst: GZInstance) -> "TraceParameters":
        o = valuation(chi0.order, inst.p) if chi0.order > 1 else 0
        r = max(1, o)
        e = f = 1
        m = e * r
        if inst.l == inst.p:
            s = inst.ctx.e_ram
            k = s * m * f + inst.mu.mu
        else:
            s = None
            k = inst.mu.mu
        return cls(o, r, e, f, m, s, k)


def base_field_degree(chi0: RingClassCharacter, inst: GZInstance) -> int:
    """Degree over F_l of the residue field generated by the values of chi0 and mu_p."""
    l, p = inst.l, inst.p
    if l == p:
        k = chi0.order
        return multiplicative_order(l, k) if k > 1 else 1
    return multiplicative_order(l, lcm(p, chi0.order))


def trace_degree(chi1: RingClassCharacter, q: int) -> int:
    return multiplicative_order(q, chi1.order) if chi1.order > 1 else 1


def _split_character(chi: RingClassCharacter, n: int, inst: GZInstance):
    G = inst.tower.G(n)
    return decompose(chi, G, inst.subgroups(n))


def trace_direct(x, chi: RingClassCharacter, inst: GZInstance, *, base_degree: int | None = None) -> ResidueElement:
    """Frobenius-orbit trace of a(x, chi) from E_lambda(chi1) down to E_lambda."""
    n, _ = _point_element(x, inst)
    chi0, chi1 = _split_character(chi, n, inst)
    f = base_degree if base_degree is not None else base_field_degree(chi0, inst)
    q = inst.l ** f
    if inst.l != inst.p and (q - 1) % inst.p:
        raise UnsupportedConfiguration("the base residue field does not contain the p-th roots of unity")
    if inst.l == inst.p:
        d = 1
    else:
        d = trace_degree(chi1, q)
    out = residue_zero(inst.ctx)
    for i in range(d):
        conj = chi0 * chi1 ** (q ** i)
        out = out + residue_reduce(gz_sum(x, conj, inst, check_conductor=False).value, inst.ctx)
    return out


def trace_reduced(x, chi0: RingClassCharacter, chi1: RingClassCharacter, inst: GZInstance, *,
                  m: int | None = None, base_degree: int | None = None) -> ResidueElement:
    """[E_lambda(chi1):E_lambda] times the two-step reduced sum, modulo lambda."""
    n, w = _point_element(x, inst)
    if n < inst.tower.stable_level:
        raise ValueError(f"level {n} is below the stabilisation level")
    params = TraceParameters.build(chi0, inst)
    m = params.m if m is None else m
    f = base_degree if base_degree is not None else base_field_degree(chi0, inst)
    q = inst.l ** f
    d = 1 if inst.l == inst.p else trace_degree(chi1, q)
    total = _reduced_sum(n, w, chi0, chi1, m, inst)
    return residue_reduce(total, inst.ctx) * d


def reduced_term_count(n: int, m: int, inst: GZInstance) -> int:
    subs = inst.subgroups(n)
    G = inst.tower.G(n)
    elems, _ = kernel_elements(n, m, inst)
    g0g1 = len(coset_representatives(G, subs.G0, subs.G1))
    g1g2 = len(coset_representatives(G, subs.G1, subs.G2))
    return g0g1 * g1g2 * len(elems)


@dataclass(frozen=True)
class TraceReport:
    x: str
    chi0: str
    chi1: str
    m: int
    degree: int
    base_degree: int
    lhs: tuple
    rhs: tuple
    equal: bool

    def to_dict(self) -> dict:
        return {"x": self.x, "chi0": self.chi0, "chi1": self.chi1, "m": self.m, "degree": self.degree,
                "base_degree": self.base_degree, "lhs": list(self.lhs), "rhs": list(self.rhs),
                "equal": self.equal}


def trace_identity_check(x, chi: RingClassCharacter, inst: GZInstance, *, m: int | None = None) -> TraceReport:
    """Compare the character-side trace with the reduced two-step sum."""
    n, w = _point_element(x, inst)
    chi0, chi1 = _split_character(chi, n, inst)
    params = TraceParameters.build(chi0, inst)
    mm = params.m if m is None else m
    f = base_field_degree(chi0, inst)
    d = 1 if inst.l == inst.p else trace_degree(chi1, inst.l ** f)
    lhs = trace_direct(x, chi, inst)
    rhs = trace_reduced(x, chi0, chi1, inst, m=mm)
    return TraceReport(element_label(w), chi0.label(), chi1.label(), mm, d, f,
                       lhs.coeffs, rhs.coeffs, lhs == rhs)


def root_of_unity_traces(l: int, base_degree: int, p: int, max_order: int) -> list[dict]:
    """Traces of every root of unity of p-power order <= max_order down to F_{l^base_degree}.

    Each row records whether the trace vanishes and whether the root lies in the base field.
    """
    top = 1
    while top * p <= max_order:
        top *= p
    ctx = lambda_context(l, top, p, Kcap=1)
    if ctx.f_res % base_degree:
        raise UnsupportedConfiguration("base field is not contained in the residue field")
    q = l ** base_degree
    rows = []
    k = 1
    while k <= top:
        for i in range(k):
            if k > 1 and i % p == 0:
                continue
            zeta = residue_reduce(CyclotomicInteger.root(top, i * (top // k)), ctx)
            deg = multiplicative_order(q, k) if k > 1 else 1
            tr = residue_trace(zeta, deg, q)
            rows.append({"order": k, "exponent": i, "degree": deg, "in_base": deg == 1,
                         "trace_zero": tr.is_zero(), "trace_is_degree_times_root": tr == zeta * deg})
        k *= p
    return rows


# -------------------------------------------------------- character sum lemma

def unit_char_sum(a: int, m: int, p: int) -> int:
    """sum over u in (Z/p^m)^* of chi1(tau_{ua}) for chi1 primitive on Z/p^m."""
    pm = p ** m
    a %= pm
    if a == 0:
        return p ** (m - 1) * (p - 1)
    if a % p ** (m - 1) == 0:
        return -p ** (m - 1)
    return 0


def unit_char_sum_brute(a: int, m: int, p: int, chi_twist: int = 1) -> CyclotomicInteger:
    """Direct sum of zeta_{p^m}^(chi_twist * u * a) over the units u."""
    pm = p ** m
    if chi_twist % p == 0:
        raise ValueError("twist must be a unit so that the character stays primitive")
    return _group_ring_sum(((chi_twist * u * a, 1) for u in range(pm) if u % p), pm)


def unit_char_sum_labelled(a: int, m: int, chi1: RingClassCharacter, n: int, inst: GZInstance) -> CyclotomicInteger:
    """The same sum taken through the unit labels of Z(n, m) in the class group."""
    Z = Z_subgroup(inst.tower, n, m)
    pm = inst.p ** m
    return _group_ring_sum(((_char_root(chi1, Z.labels[u * a % pm], inst.M), 1)
                            for u in range(pm) if u % inst.p), inst.M)


# ------------------------------------------------------------ local matrices

Mat = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]


def _mm(A, B) -> Mat:
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))  # type: ignore[return-value]


def _inv(A) -> Mat:
    d = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    return ((A[1][1] / d, -A[0][1] / d), (-A[1][0] / d, A[0][0] / d))


def _frac(rows) -> Mat:
    return tuple(tuple(Fraction(c) for c in r) for r in rows)  # type: ignore[return-value]


def embed_local(a, b, tr_omega: int, n_omega: int) -> Mat:
    """Matrix of a + b*omega in the fixed local embedding."""
    return _frac([[a + b * tr_omega, b], [-b * n_omega, a]])


def in_M0(A: Mat, p: int, delta: int) -> bool:
    """Integral at p with upper-right entry divisible by p^delta."""
    for row in A:
        for c in row:
            if c.denominator % p == 0:
                return False
    b = A[0][1]
    return b == 0 or valuation(b, p) >= delta


def matrix_check_kP(n: int, delta: int, p: int, tr_omega: int, n_omega: int) -> bool:
    """k^-1 tau k lies in M0(p^delta) exactly when p^n divides b, for every b mod p^(n+1)."""
    if n < delta:
        raise ValueError("need n >= delta")
    k = _frac([[p ** (n - delta), 0], [0, 1]])
    kinv = _inv(k)
    for a in range(p):
        for b in range(p ** (n + 1)):
            conj = _mm(_mm(kinv, embed_local(a, b, tr_omega, n_omega)), k)
            shown = _frac([[a + b * tr_omega, Fraction(b) * Fraction(p) ** (delta - n)],
                           [-b * Fraction(p) ** (n - delta) * n_omega, a]])
            if conj != shown:
                return False
            if in_M0(conj, p, delta) != (b % p ** n == 0):
                return False
    return True


def matrix_check_lambda_factorization(a: int, n: int, m: int, delta: int, p: int, tr_omega: int, n_omega: int,
                                      *, perturb: int = 0) -> bool:
    """lambda_a k = k U L with U unipotent upper and L lower triangular, exactly.

    perturb is added to the lower-left entry of L, for sensitivity checks.
    """
    if n < m:
        raise ValueError("need n >= m")
    P = Fraction(p)
    t = a * P ** (n - m)
    lam = _frac([[1 + t * tr_omega, t], [-t * n_omega, 1]])
    k = _frac([[P ** (n - delta), 0], [0, 1]])
    upper = _frac([[1, a * P ** (delta - m)], [0, 1]])
    lower = _frac([[1 + t * tr_omega + a * a * P ** (2 * n - 2 * m) * n_omega, 0],
                   [-a * P ** (2 * n - m - delta) * n_omega + perturb, 1]])
    middle = _frac([[1 + t * tr_omega, a * P ** (delta - m)], [-a * P ** (2 * n - m - delta) * n_omega, 1]])
    lhs = _mm(lam, k)
    return lhs == _mm(k, middle) and lhs == _mm(k, _mm(upper, lower))


# -------------------------------------------------------------- experiments

def _pmap(fn: Callable, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _val_key(v) -> str:
    return f">={v.bound}" if is_bottomed(v) else str(v)


def faithful_complement_characters(n: int, inst: GZInstance) -> list[RingClassCharacter]:
    G = inst.tower.G(n)
    subs = inst.subgroups(n)
    size = len(subs.C)
    out = [chi for chi in complement_characters(G, subs) if chi.order == size]
    return out


def _scan_one(chi1: RingClassCharacter, chi0: RingClassCharacter, n: int, m: int, inst: GZInstance) -> dict:
    G = inst.tower.G(n)
    vals = {}
    for y in G.elements:
        s = _reduced_sum(n, y, chi0, chi1, m, inst)
        vals[y] = ord_lambda_ladder(s, inst.ctx)
    return {"chi1": chi1.label(), "values": {element_label(y): _val_key(v) for y, v in vals.items()},
            "finite": [v for v in vals.values() if not is_bottomed(v)]}


def main_theorem_scan(chi0: RingClassCharacter, n: int, inst: GZInstance, *, jobs: int = 1) -> dict:
    """Valuations of the reduced sum over the whole level-n orbit, for every faithful chi1."""
    params = TraceParameters.build(chi0, inst)
    chis = faithful_complement_characters(n, inst)
    rows = _pmap(partial(_scan_one, chi0=chi0, n=n, m=params.m, inst=inst), chis, jobs)
    per = []
    allvals = Counter()
    for row in rows:
        fin = row.pop("finite")
        hist = Counter(row["values"].values())
        allvals.update(hist)
        low = min(fin) if fin else None
        per.append({"chi1": row["chi1"], "min": low, "max": max(fin) if fin else None,
                    "histogram": dict(sorted(hist.items())),
                    "exists_y": low is not None and low < params.k_exponent,
                    "values": row["values"]})
    finite_all = [r["min"] for r in per if r["min"] is not None]
    return {
        "n": n, "chi0": chi0.label(), "chi0_order": chi0.order,
        "params": {"o": params.o, "r": params.r, "m": params.m, "s": params.s, "k_exponent": params.k_exponent},
        "min": min(finite_all) if finite_all else None,
        "max": max(r["max"] for r in per if r["max"] is not None) if finite_all else None,
        "histogram": dict(sorted(allvals.items())),
        "exists_y": all(r["exists_y"] for r in per),
        "per_chi1": per,
    }


def chi0_characters(n: int, inst: GZInstance) -> list[RingClassCharacter]:
    """Characters of G0 trivial on G2, realised as characters of G(n) trivial on the complement."""
    G = inst.tower.G(n)
    subs = inst.subgroups(n)
    return [chi for chi in g0_characters(G, subs) if all(chi.value(g) == 0 for g in subs.G2)]


def primitive_characters(n: int, inst: GZInstance) -> list[RingClassCharacter]:
    return [chi for chi in characters(inst.tower.G(n)) if is_primitive(chi, inst.tower, n)]


def _table_rows_for(chi: RingClassCharacter, n: int, inst: GZInstance) -> list[tuple]:
    chi0, chi1 = _split_character(chi, n, inst)
    params = TraceParameters.build(chi0, inst)
    orb = inst.orbit(n)
    rows = []
    for P in orb.points:
        v = gz_sum(P, chi, inst)
        rows.append((n, chi0.label(), chi1.label(), v.x, _val_key(v.valuation),
                     int(is_bottomed(v.valuation)), inst.mu.mu, inst.nu, params.k_exponent))
    return rows


TABLE_HEADER = ("n", "chi0", "chi1", "x", "ord_lambda", "bottomed", "mu", "nu", "k_exponent")


def valuation_table(inst: GZInstance, n_range: Iterable[int], *, jobs: int = 1) -> list[tuple]:
    """Rows of ord_lambda(a(x, chi)) for every point and primitive character."""
    rows: list[tuple] = []
    for n in n_range:
        chis = primitive_characters(n, inst)
        for block in _pmap(partial(_table_rows_for, n=n, inst=inst), chis, jobs):
            rows.extend(block)
    return sorted(rows)


def mu_nu_experiment(inst: GZInstance, n_range: Iterable[int] = (1,)) -> dict:
    """mu, nu, whether nu + 1 = mu, and the valuation histograms of the sums."""
    hist = {}
    for n in n_range:
        c = Counter(r[4] for r in valuation_table(inst, [n]))
        hist[str(n)] = dict(sorted(c.items()))
    return {"mu": inst.mu.mu, "mu_prime": inst.mu.achieving_prime, "nu": inst.nu,
            "nu_plus_one_equals_mu": inst.nu + 1 == inst.mu.mu, "histograms": hist}


def equivariance_holds(inst: GZInstance, n: int, chi: RingClassCharacter) -> bool:
    """a(gamma.x, chi) = chi(gamma)^-1 a(x, chi) for every point x and generator gamma."""
    orb = inst.orbit(n)
    G = orb.group
    gens = [tuple(int(i == j) for j in range(len(G.invariants))) for i in range(len(G.invariants))]
    for x in orb.points:
        ax = gz_sum(x, chi, inst, check_conductor=False).value
        w = orb.element_of(x)
        for g in gens:
            moved = orb.point(G.add(g, w))
            lhs = gz_sum(moved, chi, inst, check_conductor=False).value
            rhs = CyclotomicInteger.root(inst.M, -_char_root(chi, g, inst.M)) * ax
            if lhs != rhs:
                return False
    return True
