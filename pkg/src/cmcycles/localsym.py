"""Local Hilbert symbols over Q and the local invariants of a rational
number relative to an imaginary quadratic discriminant.

Everything is exact: symbols are computed from the classical closed forms
(quadratic residues away from 2, the epsilon/omega exponents at 2, signs at
the archimedean place), never from floating point or from solution search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

INF = math.inf


def _as_int_disc(D) -> int:
    v = getattr(D, "value", D)
    return int(v)


def ord_p(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    n, d = x.numerator, x.denominator
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(x, p: int) -> Fraction:
    """x / p^ord_p(x)."""
    return Fraction(x) / Fraction(p) ** ord_p(x, p)


def _legendre_rational(u: Fraction, p: int) -> int:
    """Legendre symbol of a p-adic unit written as a fraction, odd p."""
    num = u.numerator % p
    den = u.denominator % p
    r = num * pow(den, -1, p) % p
    s = pow(r, (p - 1) // 2, p)
    return 1 if s == 1 else -1


def _unit_mod8(u: Fraction) -> int:
    num = u.numerator % 8
    den = u.denominator % 8
    return num * pow(den, -1, 8) % 8


def hilbert_symbol(a, b, place) -> int:
    """Hilbert symbol (a, b)_v over Q; v is a prime or math.inf / 'inf'."""
    a = Fraction(a)
    b = Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("hilbert symbol needs nonzero arguments")
    if place in ("inf", "oo", INF):
        return -1 if (a < 0 and b < 0) else 1
    p = int(place)
    if p < 2:
        raise ValueError(f"not a place: {place!r}")
    alpha, beta = ord_p(a, p), ord_p(b, p)
    u, v = unit_part(a, p), unit_part(b, p)
    if p == 2:
        um, vm = _unit_mod8(u), _unit_mod8(v)
        eps_u, eps_v = (um - 1) // 2 % 2, (vm - 1) // 2 % 2
        om_u, om_v = (um * um - 1) // 8 % 2, (vm * vm - 1) // 8 % 2
        e = eps_u * eps_v + alpha * om_v + beta * om_u
        return -1 if e % 2 else 1
    e = alpha * beta * ((p - 1) // 2)
    s = (-1) ** (e % 2)
    if beta % 2:
        s *= _legendre_rational(u, p)
    if alpha % 2:
        s *= _legendre_rational(v, p)
    return s


def _prime_factors(n: int) -> set[int]:
    n = abs(n)
    out = set()
    for p in (2, 3):
        while n % p == 0:
            out.add(p)
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out.add(p)
                n //= p
        f += 6
    if n > 1:
        out.add(n)
    return out


@dataclass(frozen=True)
class DiffResult:
    """The finite places where -m*scale fails to be a local norm from
    Q(sqrt(disc)).

    The set always has odd cardinality and every member is non-split in the
    field; a value can only sit in the support of the corresponding cycle
    when the set is a single prime.
    """

    m: Fraction
    scale: Fraction
    disc: int
    primes: tuple[int, ...]

    @property
    def is_single(self) -> bool:
        return len(self.primes) == 1

    @property
    def prime(self) -> int:
        if not self.is_single:
            raise ValueError(f"Diff set {self.primes} is not a single prime")
        return self.primes[0]


def diff_set(m, scale, D) -> DiffResult:
    """Finite primes p with (-m*scale, D)_p = -1.

    m must be a positive rational, scale a positive rational (an ideal
    norm), D a negative fundamental discriminant.
    """
    m = Fraction(m)
    scale = Fraction(scale)
    D = _as_int_disc(D)
    if m <= 0:
        raise ValueError("m must be positive")
    if scale <= 0:
        raise ValueError("scale must be positive")
    if D >= 0:
        raise ValueError("discriminant must be negative")
    s = m * scale
    cand = {2} | _prime_factors(D)
    cand |= _prime_factors(s.numerator) | _prime_factors(s.denominator)
    primes = tuple(sorted(p for p in cand if hilbert_symbol(-s, D, p) == -1))
    if len(primes) % 2 == 0:
        # the archimedean symbol of (-s, D) is -1, so parity must be odd
        raise AssertionError(f"Diff parity violated for m={m}, scale={scale}, D={D}")
    return DiffResult(m=m, scale=scale, disc=D, primes=primes)


def _kronecker_prime(D: int, p: int) -> int:
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    r = pow(D % p, (p - 1) // 2, p)
    return 0 if r == 0 else (1 if r == 1 else -1)


def nu_p(m, p: int, D) -> Fraction:
    """Local multiplicity of m at a non-split prime p.

    Inert p: (ord_p(m) + 1) / 2.  Ramified p: ord_p(m * |D|).
    """
    m = Fraction(m)
    D = _as_int_disc(D)
    k = _kronecker_prime(D, p)
    if k == 1:
        raise ValueError(f"{p} splits for discriminant {D}; no local multiplicity")
    if k == -1:
        return Fraction(ord_p(m, p) + 1, 2)
    return Fraction(ord_p(m * abs(D), p))


def o_m(m, D) -> int:
    """Number of primes dividing D at which m * |D| has positive valuation."""
    m = Fraction(m)
    D = _as_int_disc(D)
    return sum(1 for p in _prime_factors(D) if ord_p(m * abs(D), p) > 0)


def kappa_and_p0(p: int, D) -> tuple[int, int]:
    """The auxiliary split prime p0 and the scaling integer kappa_p.

    p must be non-split in Q(sqrt(D)).  p0 is the smallest prime not
    dividing 2 p D such that the symbol (D, -p*p0)_v (p inert), or
    (D, -p0)_v (p ramified), is -1 exactly at v in {p, infinity}.  kappa_p
    is p*p0 for inert p and p0 for ramified p.
    """
    D = _as_int_disc(D)
    k = _kronecker_prime(D, p)
    if k == 1:
        raise ValueError(f"{p} splits for discriminant {D}")
    inert = k == -1
    q = 3
    while True:
        if _is_small_prime(q) and (2 * p * D) % q != 0:
            t = -p * q if inert else -q
            places = sorted({2, p, q} | _prime_factors(D))
            ok = all(
                (hilbert_symbol(D, t, v) == -1) == (v == p) for v in places
            )
            if ok and hilbert_symbol(D, t, INF) == -1:
                if _kronecker_prime(D, q) != 1:
                    raise AssertionError(f"auxiliary prime {q} is not split")
                return (p * q if inert else q), q
        q += 2
        if q > 10 ** 6:
            raise AssertionError(f"no auxiliary prime found for p={p}, D={D}")


def _is_small_prime(n: int) -> bool:
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
