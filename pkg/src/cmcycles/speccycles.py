"""Multiplicities of arithmetic special cycles over imaginary quadratic class fields.

The central objects are weighted point counts Z(m, a, mu) attached to a
positive rational m, a fractional ideal a, and a torsion element mu of the
quotient d^{-1}a/a (d the different).  The count is supported at a single
rational prime p, read off an odd-cardinality obstruction set, and distributes
over the primes of the class field (or of the genus subfield) according to
ideal-class representation numbers.  This module computes those per-prime
multiplicities exactly:

* ``cycle_multiplicity_prime_disc`` -- the closed form available when |D| is
  prime, indexed relative to the unique prime fixed by complex conjugation.
* ``cycle_multiplicity_genus`` -- the genus-field formula for general odd D,
  indexed by cosets modulo the two-torsion of the class group.
* ``rho0`` -- the underlying lattice-point count with a residue condition.
* ``arakelov_degree`` -- the log-weighted total degree of the cycle.

All values are exact ``Fraction`` instances; halves are intrinsic and never
rounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional, Union

from .localsym import diff_set, kappa_and_p0, nu_p, o_m, ord_p
from .quadarith import (
    ClassGroup,
    FractionalIdealRep,
    QuadElement,
    class_group,
    different_ideal,
    factorize,
    is_prime,
    prime_ideal_above,
    rho,
    rho_genus,
    splitting_type,
)

__all__ = [
    "MuElement",
    "CycleMultiplicity",
    "LambdaDatum",
    "cycle_multiplicity_prime_disc",
    "cycle_multiplicity_genus",
    "cycle_multiplicities",
    "rho0",
    "arakelov_degree",
    "base_point_ideal",
    "ramification_factor",
    "transport_ideal",
    "mu_coset_representatives",
    "lambda_candidates",
    "debug_report",
]


def _disc_int(D) -> int:
    return int(getattr(D, "value", D))


@dataclass(frozen=True)
class MuElement:
    """Torsion element mu = (n + r*sqrt(D)) / (2*sqrt(D)) of d^{-1}n_0/n_0.

    Here n_0 is the level ideal of norm N.  The pair (n, r) pins mu only up
    to the lattice; the derived quantities below are the ones that matter.
    """

    n: int
    r: int
    D: int
    N: int

    def __post_init__(self):
        object.__setattr__(self, "D", _disc_int(self.D))
        if self.D >= 0:
            raise ValueError("discriminant must be negative")
        if self.N <= 0:
            raise ValueError("level must be positive")

    def q_value(self) -> Fraction:
        """Norm of mu divided by N; well defined modulo integers."""
        return Fraction(self.n * self.n - self.r * self.r * self.D, 4 * abs(self.D) * self.N)

    def norm(self) -> Fraction:
        return Fraction(self.n * self.n - self.r * self.r * self.D, 4 * abs(self.D))

    def negated(self) -> "MuElement":
        return MuElement(-self.n, -self.r, self.D, self.N)

    def as_element(self) -> QuadElement:
        # (n + r sqrt(D)) / (2 sqrt(D)) = r/2 + (n / 2D) sqrt(D)
        return QuadElement.of(Fraction(self.r, 2), Fraction(self.n, 2 * self.D), self.D)

    def shifts_to_integer(self, m) -> bool:
        return (Fraction(m) + self.q_value()).denominator == 1


@dataclass(frozen=True)
class CycleMultiplicity:
    """Per-label multiplicities of one special cycle at its supporting prime."""

    m: Fraction
    ideal: FractionalIdealRep
    mu: MuElement
    p: Optional[int]
    per_class: dict

    def total(self) -> Fraction:
        return sum(self.per_class.values(), Fraction(0))


@dataclass(frozen=True)
class LambdaDatum:
    """Residue datum for rho0: a declared generator of d^{-1}c/c plus kappa.

    The norm congruence N(element) = -kappa (mod N(c)) is validated by rho0,
    never repaired; callers choose among the finitely many valid generators.
    """

    element: QuadElement
    kappa: Fraction

    def __post_init__(self):
        object.__setattr__(self, "kappa", Fraction(self.kappa))


def _class_index(cg: ClassGroup, label: Union[int, str]) -> int:
    if isinstance(label, str):
        return cg.index_of_label(label)
    idx = int(label)
    if not 0 <= idx < cg.h:
        raise ValueError(f"class index {idx} out of range")
    return idx


def ramification_factor(p: int, D) -> int:
    """2 when p ramifies and |D| is composite, else 1 (debug bookkeeping)."""
    D = _disc_int(D)
    if splitting_type(D, p) == "ramified" and not is_prime(abs(D)):
        return 2
    return 1


def base_point_ideal(p: int, D, cache_dir=None) -> FractionalIdealRep:
    """The auxiliary ideal c0 attached to the supporting prime p.

    Built from the smallest valid auxiliary split prime: c0 = p0*d in the
    inert case and c0 = p0*q^{-1}*d in the ramified case, with q the ramified
    prime above p and d the different.  Only the ideal class is used
    downstream, but the ideal itself is returned for lattice work.
    """
    D = _disc_int(D)
    kind = splitting_type(D, p)
    if kind == "split":
        raise ValueError(f"{p} splits for discriminant {D}")
    _, p0 = kappa_and_p0(p, D)
    aux = prime_ideal_above(p0, D)
    c0 = aux * different_ideal(D)
    if kind == "ramified":
        c0 = c0 * prime_ideal_above(p, D).inverse()
    return c0


def _conjugation_shift(cg: ClassGroup, c0_idx: int) -> Optional[int]:
    """Smallest class s with s^2 equal to c0 modulo two-torsion, if any.

    Twisting labels by s places the distinguished label at the prime fixed
    by complex conjugation whenever such a prime exists.
    """
    cosets = cg.cosets_mod_two_torsion()
    coset_of = {}
    for cs in cosets:
        for i in cs:
            coset_of[i] = min(cs)
    want = coset_of[c0_idx]
    for s in range(cg.h):
        if coset_of[cg.compose(s, s)] == want:
            return s
    return None


def cycle_multiplicity_prime_disc(m, ideal: FractionalIdealRep, mu: MuElement,
                                  b: Union[int, str], cache_dir=None) -> Fraction:
    """Multiplicity at the b-indexed prime when |D| is an odd prime.

    The label b = principal names the unique prime fixed by complex
    conjugation; general labels act through the class group.  Returns zero
    whenever the obstruction set is not a singleton or m does not shift mu
    into the integer lattice.
    """
    D = ideal.d
    l = abs(D)
    if not is_prime(l) or l % 4 != 3:
        raise ValueError(f"requires prime |D| = 3 mod 4, got D = {D}")
    m = Fraction(m)
    if m <= 0:
        return Fraction(0)
    d = diff_set(m, ideal.norm(), D)
    if not d.is_single or not mu.shifts_to_integer(m):
        return Fraction(0)
    p = d.prime
    cg = class_group(D, cache_dir=cache_dir)
    b_idx = _class_index(cg, b)
    target = cg.compose(cg.class_of_ideal(ideal), cg.inv(cg.power(b_idx, 2)))
    count = rho(m * l / p, target, D, cache_dir=cache_dir)
    if count == 0:
        return Fraction(0)
    return Fraction(2) ** (o_m(m, D) - 1) * nu_p(m, p, D) * count


def cycle_multiplicity_genus(m, ideal: FractionalIdealRep, mu: MuElement,
                             c: Union[int, str], cache_dir=None) -> Fraction:
    """Multiplicity at the c-indexed prime of the genus subfield, odd D.

    The value depends on c only through its coset modulo the two-torsion of
    the class group.  Labels are normalized so that, whenever the auxiliary
    class c0 has a square root, the distinguished label sits at the prime
    fixed by complex conjugation; for prime |D| this reproduces
    ``cycle_multiplicity_prime_disc`` label by label.
    """
    D = ideal.d
    if D % 2 == 0:
        raise ValueError(f"requires odd discriminant, got D = {D}")
    m = Fraction(m)
    if m <= 0:
        raise ValueError("m must be positive")
    d = diff_set(m, ideal.norm(), D)
    if not d.is_single:
        raise ValueError(f"obstruction set {d.primes} is not a singleton")
    if not mu.shifts_to_integer(m):
        return Fraction(0)
    p = d.prime
    cg = class_group(D, cache_dir=cache_dir)
    c_idx = _class_index(cg, c)
    c0_idx = cg.class_of_ideal(base_point_ideal(p, D, cache_dir=cache_dir))
    shift = _conjugation_shift(cg, c0_idx)
    target = cg.compose(c0_idx, cg.class_of_ideal(ideal))
    target = cg.compose(target, cg.inv(cg.power(c_idx, 2)))
    if shift is not None:
        target = cg.compose(target, cg.inv(cg.power(shift, 2)))
    count = rho(m * abs(D) / p, target, D, cache_dir=cache_dir)
    if count == 0:
        return Fraction(0)
    return Fraction(2) ** (o_m(m, D) - 1) * nu_p(m, p, D) * count


def cycle_multiplicities(m, ideal: FractionalIdealRep, mu: MuElement,
                         cache_dir=None) -> CycleMultiplicity:
    """Per-label multiplicities for one cycle; empty support when obstructed.

    Prime |D| uses class labels relative to the conjugation-fixed prime;
    composite odd |D| uses coset labels for the genus subfield.
    """
    D = ideal.d
    m = Fraction(m)
    cg = class_group(D, cache_dir=cache_dir)
    prime_disc = is_prime(abs(D)) and abs(D) % 4 == 3
    if prime_disc:
        labels = list(cg.labels)
    else:
        labels = [cg.coset_label(min(cs)) for cs in cg.cosets_mod_two_torsion()]
    d = diff_set(m, ideal.norm(), D)
    if not d.is_single or not mu.shifts_to_integer(m):
        return CycleMultiplicity(m, ideal, mu, None,
                                 {lab: Fraction(0) for lab in labels})
    per = {}
    for lab in labels:
        if prime_disc:
            per[lab] = cycle_multiplicity_prime_disc(m, ideal, mu, lab,
                                                     cache_dir=cache_dir)
        else:
            per[lab] = cycle_multiplicity_genus(m, ideal, mu, lab,
                                                cache_dir=cache_dir)
    return CycleMultiplicity(m, ideal, mu, d.prime, per)


def transport_ideal(ideal: FractionalIdealRep, h: Union[int, str],
                    cg: ClassGroup) -> FractionalIdealRep:
    """Image of the ideal under the inverse twist by h: h^{-1} hbar ideal."""
    h_idx = _class_index(cg, h)
    rep = cg.ideal_for_class(h_idx)
    return rep.inverse() * rep.conj() * ideal


# ---------------------------------------------------------------------------
# lattice counts


def _norm_form(e1: QuadElement, e2: QuadElement):
    a = e1.norm()
    c = e2.norm()
    b = (e1 * e2.conj()).trace()
    return a, b, c


def _lattice_points_of_norm(e1: QuadElement, e2: QuadElement, n: Fraction):
    """All x = u*e1 + v*e2 with N(x) = n; the norm form is positive definite."""
    a, b, c = _norm_form(e1, e2)
    det = 4 * a * c - b * b
    if det <= 0:
        raise ValueError("degenerate lattice basis")
    # u^2 <= 4 c n / det and v^2 <= 4 a n / det
    ub = _isqrt_ceil(Fraction(4) * c * n / det)
    vb = _isqrt_ceil(Fraction(4) * a * n / det)
    out = []
    for u in range(-ub, ub + 1):
        for v in range(-vb, vb + 1):
            if a * u * u + b * u * v + c * v * v == n:
                out.append(e1 * Fraction(u) + e2 * Fraction(v))
    return out


def _isqrt_ceil(x: Fraction) -> int:
    if x < 0:
        return 0
    num, den = x.numerator, x.denominator
    r = isqrt(num // den)
    while Fraction(r * r) < x:
        r += 1
    return r


def _coset_representatives(big: FractionalIdealRep, small: FractionalIdealRep):
    """Representatives of big/small for a finite-index sublattice small of big."""
    f1, f2 = big.basis()
    # coordinates of small's basis in terms of big's basis
    mat = []
    for e in small.basis():
        mat.append(_coords_in_basis(e, f1, f2))
    (a11, a12), (a21, a22) = mat
    for entry in (a11, a12, a21, a22):
        if Fraction(entry).denominator != 1:
            raise ValueError("not a sublattice")
    det = abs(int(a11 * a22 - a12 * a21))
    if det == 0:
        raise ValueError("not a finite-index sublattice")
    # column HNF bounds: enumerate the box and filter duplicates mod small
    seen = set()
    reps = []
    for i in range(det):
        for j in range(det):
            x = f1 * Fraction(i) + f2 * Fraction(j)
            key = _coset_key(x, small)
            if key not in seen:
                seen.add(key)
                reps.append(x)
        if len(reps) == det:
            break
    if len(reps) != det:
        raise RuntimeError("coset enumeration incomplete")
    return reps


def _coords_in_basis(x: QuadElement, f1: QuadElement, f2: QuadElement):
    # solve x = u f1 + v f2 over the rationals
    a1, b1 = 2 * f1.u, 2 * f1.v
    a2, b2 = 2 * f2.u, 2 * f2.v
    xu, xv = 2 * x.u, 2 * x.v
    det = a1 * b2 - a2 * b1
    if det == 0:
        raise ValueError("degenerate basis")
    u = (xu * b2 - xv * a2) / det
    v = (a1 * xv - b1 * xu) / det
    return u, v


def _coset_key(x: QuadElement, lattice: FractionalIdealRep):
    f1, f2 = lattice.basis()
    u, v = _coords_in_basis(x, f1, f2)
    return (u - u.__floor__(), v - v.__floor__())


def mu_coset_representatives(ideal: FractionalIdealRep, cache_dir=None):
    """Representatives of d^{-1}a / a as explicit elements; |D| of them."""
    D = ideal.d
    big = different_ideal(D).inverse() * ideal
    return _coset_representatives(big, ideal)


def _ramified_support(c0: FractionalIdealRep):
    """The supporting prime p when c0 encodes a ramified case, else None.

    N(c0)/|D| is the auxiliary prime p0 in the inert case and p0/p in the
    ramified one, so a denominator pins down p without extra arguments.
    """
    t = c0.norm() / abs(c0.d)
    return t.denominator if t.denominator > 1 else None


def lambda_candidates(c0: FractionalIdealRep, kappa, limit: int = 1000000):
    """Valid residue data for rho0 at this c0, one per +-1 pair.

    Inert support: generators of d^{-1}c0/c0 with norm = -kappa mod N(c0).
    Ramified support: the congruence forces an integral norm, which no full
    generator has; the datum instead vanishes at the ramified prime and
    generates the quotient away from it.
    """
    D = c0.d
    kappa = Fraction(kappa)
    nc0 = c0.norm()
    skip = _ramified_support(c0)
    out = []
    seen = set()
    for x in mu_coset_representatives(c0):
        if _coset_key(x, c0) in seen or _coset_key(-x, c0) in seen:
            continue
        if not _generates_quotient(x, c0, D, skip=skip):
            continue
        if ((x.norm() + kappa) / nc0).denominator != 1:
            continue
        seen.add(_coset_key(x, c0))
        out.append(x)
    return out


def _generates_quotient(x: QuadElement, c0: FractionalIdealRep, D: int,
                        skip: Optional[int] = None) -> bool:
    dk_inv = different_ideal(D).inverse()
    big = dk_inv * c0
    if not _contains(big, x):
        return False
    for q in factorize(abs(D)):
        sub = prime_ideal_above(q, D) * big
        if q == skip:
            # ramified supporting prime: component must vanish, not generate
            if not _contains(sub, x):
                return False
        elif _contains(sub, x):
            return False
    return True


def _contains(I: FractionalIdealRep, x: QuadElement) -> bool:
    return x in I


def rho0(n, ideal: FractionalIdealRep, mu, lam: LambdaDatum,
         c0: FractionalIdealRep, cache_dir=None) -> int:
    """Exact count of x in c0^{-1} abar of norm n with lam.element * x + mu
    landing in the ideal a.

    mu may be a MuElement or a raw QuadElement in d^{-1}a.  The residue datum
    must generate d^{-1}c_a/c_a for c_a = a abar^{-1} c0 and satisfy
    N(element) = -kappa mod N(c_a); anything else is rejected.
    """
    D = ideal.d
    n = Fraction(n)
    if n <= 0:
        return 0
    c_a = ideal * ideal.conj().inverse() * c0
    if not _generates_quotient(lam.element, c_a, D, skip=_ramified_support(c_a)):
        raise ValueError("residue datum does not generate d^{-1}c/c")
    if ((lam.element.norm() + lam.kappa) / c_a.norm()).denominator != 1:
        raise ValueError("residue datum fails its norm congruence")
    lattice = c0.inverse() * ideal.conj()
    e1, e2 = lattice.basis()
    mu_elt = mu.as_element() if isinstance(mu, MuElement) else mu
    if mu_elt not in different_ideal(D).inverse() * ideal:
        raise ValueError("mu does not lie in d^{-1} times the ideal")
    count = 0
    for x in _lattice_points_of_norm(e1, e2, n):
        if (lam.element * x + mu_elt) in ideal:
            count += 1
    return count


def arakelov_degree(m, ideal: FractionalIdealRep, mu: MuElement,
                    cache_dir=None):
    """Total log-weighted degree as a list of (p, coefficient of log p)."""
    D = ideal.d
    m = Fraction(m)
    if m <= 0:
        return []
    d = diff_set(m, ideal.norm(), D)
    if not d.is_single or not mu.shifts_to_integer(m):
        return []
    p = d.prime
    cg = class_group(D, cache_dir=cache_dir)
    c0_idx = cg.class_of_ideal(base_point_ideal(p, D, cache_dir=cache_dir))
    target = cg.compose(c0_idx, cg.class_of_ideal(ideal))
    count = rho_genus(m * abs(D) / p, cg.genus_of(target), D, cache_dir=cache_dir)
    if count == 0:
        return []
    coeff = Fraction(2) ** (o_m(m, D) - 1) * (ord_p(m, p) + 1) * count
    return [(p, coeff)]


def _frac_str(x) -> str:
    return str(Fraction(x))


def debug_report(m, ideal: FractionalIdealRep, mu: MuElement,
                 cache_dir=None) -> dict:
    """JSON-ready trace of one multiplicity computation, exact throughout."""
    D = ideal.d
    m = Fraction(m)
    cm = cycle_multiplicities(m, ideal, mu, cache_dir=cache_dir)
    cg = class_group(D, cache_dir=cache_dir)
    report = {
        "inputs": {
            "m": _frac_str(m),
            "ideal": {"scale": _frac_str(ideal.scale), "a": ideal.a,
                      "b": ideal.b, "disc": ideal.d},
            "mu": {"n": mu.n, "r": mu.r},
        },
        "diff": list(diff_set(m, ideal.norm(), D).primes),
        "o_m": o_m(m, D),
        "integral_shift": mu.shifts_to_integer(m),
        "per_class": [],
    }
    if cm.p is not None:
        p = cm.p
        report["p"] = p
        report["nu_p"] = _frac_str(nu_p(m, p, D))
        report["ramification_factor"] = ramification_factor(p, D)
        report["rho_argument"] = _frac_str(m * abs(D) / p)
    for lab in sorted(cm.per_class):
        report["per_class"].append({"label": lab,
                                    "value": _frac_str(cm.per_class[lab])})
    return report
