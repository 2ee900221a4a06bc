"""Valuation engine for CM values of modular functions with Heegner divisors.

Divisors are finite rational combinations of level-N Heegner classes.  The
engine unfolds them into special-cycle terms, evaluates each term through the
exact class-group formulas, and aggregates per-prime, per-class valuation
profiles.  A level-1 specialization reproduces the classical singular-moduli
factorizations.  Everything here is exact rational arithmetic; floating point
never enters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple

from .localsym import ord_p
from .quadarith import Discriminant, is_prime, is_squarefree, FractionalIdealRep
from .speccycles import MuElement, cycle_multiplicities


class ImproperIntersectionError(ValueError):
    """Raised when the CM point lies on the divisor itself.

    This happens exactly when some admissible index n satisfies n^2 = d*D,
    making the product of discriminants a perfect square; the function value
    is then 0 or infinite and no valuation profile exists.
    """


# ---------------------------------------------------------------------------
# divisor data


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class HeegnerDivisor:
    """Finite rational combination of Heegner classes on a level-N curve.

    Keys are pairs (d, r) with d a negative integer, r an integer residue
    modulo 2N, subject to d = r^2 mod 4N.  Coefficients are rationals; zero
    coefficients are dropped so the zero divisor has empty support.
    """

    def __init__(self, N: int, coeffs=None):
        N = int(N)
        if N < 1 or not is_squarefree(N):
            raise ValueError(f"level must be a positive squarefree integer, got {N}")
        self.N = N
        merged: Dict[Tuple[int, int], Fraction] = {}
        for (d, r), c in dict(coeffs or {}).items():
            d, r = int(d), int(r)
            if d >= 0:
                raise ValueError(f"divisor key d must be negative, got {d}")
            if (d - r * r) % (4 * N) != 0:
                raise ValueError(f"key ({d}, {r}) violates d = r^2 mod {4 * N}")
            key = (d, r % (2 * N))
            merged[key] = merged.get(key, Fraction(0)) + _frac(c)
        self.coeffs = {k: v for k, v in sorted(merged.items()) if v != 0}

    def __eq__(self, other) -> bool:
        return (isinstance(other, HeegnerDivisor) and self.N == other.N
                and self.coeffs == other.coeffs)

    def __repr__(self) -> str:
        return f"HeegnerDivisor(N={self.N}, coeffs={self.coeffs})"

    def __add__(self, other: "HeegnerDivisor") -> "HeegnerDivisor":
        if self.N != other.N:
            raise ValueError("cannot add divisors of different levels")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return HeegnerDivisor(self.N, out)

    def scaled(self, q) -> "HeegnerDivisor":
        q = _frac(q)
        return HeegnerDivisor(self.N, {k: q * v for k, v in self.coeffs.items()})

    def reflected(self) -> "HeegnerDivisor":
        """The divisor with every key (d, r) replaced by (d, -r)."""
        return HeegnerDivisor(self.N, {(d, -r): c for (d, r), c in self.coeffs.items()})

    def to_json_dict(self) -> dict:
        return {
            "N": self.N,
            "coeffs": [{"d": d, "r": r, "c": str(c)}
                       for (d, r), c in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "HeegnerDivisor":
        coeffs = {(int(e["d"]), int(e["r"])): Fraction(e["c"])
                  for e in obj.get("coeffs", [])}
        return cls(int(obj["N"]), coeffs)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "HeegnerDivisor":
        return cls.from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# term enumeration


class Term(NamedTuple):
    d: int
    r: int
    n: int
    m: Fraction
    mu: MuElement


def _check_level_data(N: int, D: int, rho: int) -> None:
    disc = Discriminant(D)
    if disc.value % 2 == 0:
        raise ValueError(f"discriminant must be odd, got {D}")
    if (rho * rho - D) % (4 * N) != 0:
        raise ValueError(f"rho^2 = D mod {4 * N} fails for rho={rho}, D={D}")


def enumerate_terms(N: int, D: int, rho: int,
                    divisor: HeegnerDivisor) -> List[Term]:
    """Unfold a divisor into special-cycle terms at the CM point for (D, rho).

    For each key (d, r) the indices n run over the residue class rho*r mod 2N
    with n^2 < d*D; each yields a positive rational m = (dD - n^2)/(4N|D|)
    and a residue element mu.  An index with n^2 = d*D exactly aborts the
    whole computation, since the CM point then lies on the divisor.
    """
    N = int(N)
    D = int(D)
    rho = int(rho)
    _check_level_data(N, D, rho)
    if divisor.N != N:
        raise ValueError(f"divisor has level {divisor.N}, expected {N}")
    out: List[Term] = []
    for (d, r), c in sorted(divisor.coeffs.items()):
        prod = d * D
        bound = math.isqrt(prod)
        res = (rho * r) % (2 * N)
        start = -bound + ((res - (-bound)) % (2 * N))
        for n in range(start, bound + 1, 2 * N):
            if n * n == prod:
                raise ImproperIntersectionError(
                    f"n = {n} hits n^2 = d*D = {prod} for key ({d}, {r})")
            m = Fraction(prod - n * n, 4 * N * abs(D))
            out.append(Term(d, r, n, m, MuElement(n, r, D, N)))
    return out


# ---------------------------------------------------------------------------
# valuation profiles


@dataclass
class ValuationProfile:
    """Per-prime, per-class-label valuations of one CM value.

    Labels are reduced-form strings for prime discriminants (full class
    group) and two-torsion coset labels otherwise, both relative to the
    distinguished base prime fixed by conjugation when one exists.  The
    stored numbers are exact orders of the value itself, not of a power.
    """

    D: int
    rho: int
    N: int
    per_prime: Dict[int, Dict[str, Fraction]]
    note: str = "orders of the value itself at labeled primes"

    def is_zero(self) -> bool:
        return all(v == 0 for by in self.per_prime.values() for v in by.values())

    def _cleaned(self) -> Dict[int, Dict[str, Fraction]]:
        return {p: by for p, by in self.per_prime.items()
                if any(v != 0 for v in by.values())}

    def __eq__(self, other) -> bool:
        # a prime whose orders all vanish carries the same information as an
        # absent prime, so equality ignores such entries
        return (isinstance(other, ValuationProfile)
                and (self.D, self.rho, self.N) == (other.D, other.rho, other.N)
                and self._cleaned() == other._cleaned())

    def __add__(self, other: "ValuationProfile") -> "ValuationProfile":
        if (self.D, self.rho, self.N) != (other.D, other.rho, other.N):
            raise ValueError("profiles belong to different CM points")
        per: Dict[int, Dict[str, Fraction]] = {}
        for src in (self.per_prime, other.per_prime):
            for p, by in src.items():
                acc = per.setdefault(p, {lab: Fraction(0) for lab in by})
                for lab, v in by.items():
                    acc[lab] = acc.get(lab, Fraction(0)) + v
        return ValuationProfile(self.D, self.rho, self.N, per, self.note)

    def scaled(self, q) -> "ValuationProfile":
        q = _frac(q)
        return ValuationProfile(
            self.D, self.rho, self.N,
            {p: {lab: q * v for lab, v in by.items()}
             for p, by in self.per_prime.items()},
            self.note)

    def to_json_dict(self) -> dict:
        return {
            "D": self.D,
            "rho": self.rho,
            "primes": [
                {"p": p, "by_class": [{"label": lab, "ord": str(v)}
                                      for lab, v in self.per_prime[p].items()]}
                for p in sorted(self.per_prime)
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict, N: int = 1) -> "ValuationProfile":
        per = {}
        for entry in obj.get("primes", []):
            per[int(entry["p"])] = {e["label"]: Fraction(e["ord"])
                                    for e in entry["by_class"]}
        return cls(int(obj["D"]), int(obj["rho"]), N, per)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def valuations(N: int, D: int, rho: int, divisor: HeegnerDivisor,
               cache_dir: Optional[str] = None) -> ValuationProfile:
    """Exact valuation profile of the CM value attached to (N, D, rho).

    Sums w_k * c(d, r) times the per-class cycle multiplicities over all
    enumerated terms.  Terms whose obstruction set is not a single prime
    contribute nothing; a divisor with no admissible terms yields the empty
    (all-zero) profile.
    """
    terms = enumerate_terms(N, D, rho, divisor)
    level_ideal = FractionalIdealRep.make(1, N, rho, D)
    w = Discriminant(D).unit_count
    per_prime: Dict[int, Dict[str, Fraction]] = {}
    for term in terms:
        c = divisor.coeffs[(term.d, term.r)]
        cm = cycle_multiplicities(term.m, level_ideal, term.mu,
                                  cache_dir=cache_dir)
        if cm.p is None:
            continue
        acc = per_prime.setdefault(cm.p, {lab: Fraction(0) for lab in cm.per_class})
        for lab, v in cm.per_class.items():
            acc[lab] += w * c * v
    return ValuationProfile(D, rho, N, per_prime)


def gz_dorman_level1(D: int, rho: int, d: int,
                     cache_dir: Optional[str] = None) -> ValuationProfile:
    """Level-1 specialization: valuations of the classical CM-difference value.

    d must be a negative discriminant coprime to D.  The half coefficient
    accounts for the index pairs (n, -n) falling into a single residue class
    at level 1, matching the classical singular-moduli factorizations.
    """
    D = int(D)
    d = int(d)
    Discriminant(D)
    if d >= 0 or d % 4 not in (0, 1):
        raise ValueError(f"d must be a negative discriminant, got {d}")
    if math.gcd(d, D) != 1:
        raise ValueError(f"gcd(d, D) = {math.gcd(d, D)} > 1")
    r = 0 if d % 4 == 0 else 1
    divisor = HeegnerDivisor(1, {(d, r): Fraction(1, 2)})
    return valuations(1, D, rho, divisor, cache_dir=cache_dir)


# ---------------------------------------------------------------------------
# exact q-series


class ExactQSeries:
    """Truncated q-expansion with rational coefficients and exponents.

    Exponents live on the (1/den)-integer grid; coefficients are faithful
    for exponents strictly below trunc.  A finite principal part (negative
    exponents) is allowed.
    """

    def __init__(self, den: int, coeffs, trunc):
        den = int(den)
        if den < 1:
            raise ValueError("denominator must be positive")
        self.den = den
        self.trunc = _frac(trunc)
        clean: Dict[Fraction, Fraction] = {}
        for e, c in dict(coeffs).items():
            e, c = _frac(e), _frac(c)
            if den % e.denominator != 0:
                raise ValueError(f"exponent {e} off the 1/{den} grid")
            if c != 0 and e < self.trunc:
                clean[e] = c
        self.coeffs = dict(sorted(clean.items()))

    def __repr__(self) -> str:
        head = ", ".join(f"q^{e}: {c}" for e, c in list(self.coeffs.items())[:4])
        return f"ExactQSeries(den={self.den}, trunc={self.trunc}, [{head}...])"

    def is_zero(self) -> bool:
        return not self.coeffs

    def order(self) -> Optional[Fraction]:
        return min(self.coeffs) if self.coeffs else None

    def a(self, e) -> Fraction:
        e = _frac(e)
        if e >= self.trunc:
            raise ValueError(f"exponent {e} is beyond truncation {self.trunc}")
        return self.coeffs.get(e, Fraction(0))

    def restricted(self, trunc) -> "ExactQSeries":
        trunc = _frac(trunc)
        if trunc > self.trunc:
            raise ValueError("cannot extend truncation")
        return ExactQSeries(self.den, self.coeffs, trunc)

    def _virtual_order(self) -> Fraction:
        return self.order() if self.coeffs else self.trunc

    def __add__(self, other: "ExactQSeries") -> "ExactQSeries":
        den = self.den * other.den // math.gcd(self.den, other.den)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, Fraction(0)) + c
        return ExactQSeries(den, out, min(self.trunc, other.trunc))

    def __neg__(self) -> "ExactQSeries":
        return ExactQSeries(self.den, {e: -c for e, c in self.coeffs.items()},
                            self.trunc)

    def __sub__(self, other: "ExactQSeries") -> "ExactQSeries":
        return self + (-other)

    def scale(self, q) -> "ExactQSeries":
        q = _frac(q)
        return ExactQSeries(self.den, {e: q * c for e, c in self.coeffs.items()},
                            self.trunc)

    def shifted(self, e0) -> "ExactQSeries":
        """Multiply by q^e0."""
        e0 = _frac(e0)
        den = self.den * e0.denominator // math.gcd(self.den, e0.denominator)
        return ExactQSeries(den, {e + e0: c for e, c in self.coeffs.items()},
                            self.trunc + e0)

    def __mul__(self, other: "ExactQSeries") -> "ExactQSeries":
        den = self.den * other.den // math.gcd(self.den, other.den)
        trunc = min(self.trunc + other._virtual_order(),
                    other.trunc + self._virtual_order())
        out: Dict[Fraction, Fraction] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if e < trunc:
                    out[e] = out.get(e, Fraction(0)) + c1 * c2
        return ExactQSeries(den, out, trunc)

    def inverse(self) -> "ExactQSeries":
        if self.is_zero():
            raise ZeroDivisionError("cannot invert the zero series")
        v = self.order()
        u0 = self.coeffs[v]
        # normalized tail h = self/(u0 q^v) = 1 + ..., invert recursively
        rel = {e - v: c / u0 for e, c in self.coeffs.items()}
        span = self.trunc - v
        inv: Dict[Fraction, Fraction] = {Fraction(0): Fraction(1)}
        step = Fraction(1, self.den)
        k = step
        while k < span:
            s = Fraction(0)
            for e, c in rel.items():
                if 0 < e <= k:
                    b = inv.get(k - e)
                    if b:
                        s += c * b
            if s:
                inv[k] = -s
            k += step
        shifted = {e - v: c / u0 for e, c in inv.items()}
        return ExactQSeries(self.den, shifted, span - v)

    def __truediv__(self, other: "ExactQSeries") -> "ExactQSeries":
        return self * other.inverse()

    def log(self) -> "ExactQSeries":
        """Logarithm of a series with constant term 1.

        Uses the derivative relation L'S = S' solved coefficient by
        coefficient on the grid actually occupied by the support.
        """
        if self.a(0) != 1 or (self.coeffs and min(self.coeffs) < 0):
            raise ValueError("log requires constant term 1 and no principal part")
        den = 1
        for e in self.coeffs:
            den = den * e.denominator // math.gcd(den, e.denominator)
        step = Fraction(1, den)
        out: Dict[Fraction, Fraction] = {}
        e = step
        while e < self.trunc:
            s = e * self.coeffs.get(e, Fraction(0))
            for e1, c1 in out.items():
                if e1 < e:
                    c2 = self.coeffs.get(e - e1)
                    if c2:
                        s -= e1 * c1 * c2
            if s:
                out[e] = s / e
            e += step
        return ExactQSeries(den, out, self.trunc)

    def __pow__(self, k: int) -> "ExactQSeries":
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        base = self
        # the unit seed is exact, so give it slack; each multiplication then
        # tightens the truncation to the correct value on its own
        result = ExactQSeries(self.den, {Fraction(0): Fraction(1)},
                              self.trunc + abs(self._virtual_order()) * k + 1)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result


def fourier_content(series: ExactQSeries, p: int) -> int:
    """Minimum p-adic order over all stored coefficients of a nonzero series."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if series.is_zero():
        raise ValueError("content of the zero series is undefined")
    return min(ord_p(c, p) for c in series.coeffs.values())


# ---------------------------------------------------------------------------
# classical series builders


def eta_series(mult: int, trunc) -> ExactQSeries:
    """q-expansion of the eta function at mult*z, via the pentagonal sum."""
    mult = int(mult)
    if mult < 1:
        raise ValueError("multiplier must be positive")
    trunc = _frac(trunc)
    lead = Fraction(mult, 24)
    coeffs: Dict[Fraction, Fraction] = {}
    k = 0
    while True:
        hit = False
        for kk in ((k, -k) if k else (0,)):
            g = kk * (3 * kk - 1) // 2
            e = lead + mult * g
            if e < trunc:
                coeffs[e] = Fraction(-1) ** abs(kk)
                hit = True
        if not hit and k > 0:
            break
        k += 1
    return ExactQSeries(24, coeffs, trunc)


def theta_series(a: int, b: int, c: int, trunc) -> ExactQSeries:
    """Theta series of the positive binary form [a, b, c], integer exponents."""
    disc = b * b - 4 * a * c
    if disc >= 0 or a <= 0:
        raise ValueError(f"[{a}, {b}, {c}] is not positive definite")
    trunc = _frac(trunc)
    bound = math.ceil(trunc)
    coeffs: Dict[Fraction, Fraction] = {}
    xmax = math.isqrt(4 * c * bound // abs(disc)) + 1
    ymax = math.isqrt(4 * a * bound // abs(disc)) + 1
    for x in range(-xmax, xmax + 1):
        for y in range(-ymax, ymax + 1):
            v = a * x * x + b * x * y + c * y * y
            if v < trunc:
                e = Fraction(v)
                coeffs[e] = coeffs.get(e, Fraction(0)) + 1
    return ExactQSeries(1, coeffs, trunc)


def hauptmodul47_series(trunc) -> ExactQSeries:
    """Expansion of the distinguished genus-zero generator at level 47.

    Built as (theta[1,1,12] - theta[2,-1,6]) / (2 eta(z) eta(47z)) plus the
    constant 1; the result starts q^{-1} + 1 + q + 2q^2 + ...
    """
    trunc = _frac(trunc)
    inner = trunc + 6
    th = theta_series(1, 1, 12, inner) - theta_series(2, -1, 6, inner)
    den = eta_series(1, inner) * eta_series(47, inner)
    quot = th / den.scale(2)
    one = ExactQSeries(1, {Fraction(0): Fraction(1)}, quot.trunc)
    out = quot + one
    if out.trunc < trunc:
        raise ValueError("internal margin too small")
    return out.restricted(trunc)


def j_series(trunc) -> ExactQSeries:
    """Expansion of the classical j-function: E4^3 / Delta."""
    trunc = _frac(trunc)
    inner = int(math.ceil(trunc)) + 4
    sigma3 = [0] * (inner + 1)
    for d in range(1, inner + 1):
        for n in range(d, inner + 1, d):
            sigma3[n] += d ** 3
    e4 = ExactQSeries(1, {Fraction(n): (1 if n == 0 else 240 * sigma3[n])
                          for n in range(inner)}, inner)
    delta = eta_series(1, inner) ** 24
    out = (e4 ** 3) / delta
    if out.trunc < trunc:
        raise ValueError("internal margin too small")
    return out.restricted(trunc)
