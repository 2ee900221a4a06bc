"""Binary quadratic forms, ideal lattices and class groups of imaginary
quadratic orders of fundamental discriminant.

Forms [a, b, c] are positive definite and primitive.  Ideals of the maximal
order with discriminant D < 0 are stored as scaled standard lattices

    scale * ( a Z + (b + sqrt(D))/2 Z ),   4a | b*b - D,

which is enough to multiply, invert, conjugate and test membership without
any floating point.  Class groups are built by composing the reduced forms
through ideal multiplication and are cached per discriminant.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, isqrt


# ---------------------------------------------------------------------------
# elementary number theory helpers


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of n >= 1 by trial division."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = factorize(n)
    return len(f) == 1 and sum(f.values()) == 1


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for e in factorize(abs(n)).values())


def sqrt_mod_prime(a: int, p: int) -> int | None:
    """A square root of a mod p, or None when a is a non-residue."""
    a %= p
    if p == 2:
        return a
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def kronecker_prime(D: int, p: int) -> int:
    """Kronecker symbol (D | p) for prime p."""
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    r = pow(D % p, (p - 1) // 2, p)
    if r == 0:
        return 0
    return 1 if r == 1 else -1


def splitting_type(D: int, p: int) -> str:
    """'split', 'inert' or 'ramified' for the rational prime p in Q(sqrt(D))."""
    s = kronecker_prime(D, p)
    if s == 1:
        return "split"
    if s == -1:
        return "inert"
    return "ramified"


def is_fundamental(D: int) -> bool:
    """Whether D < 0 is a fundamental discriminant."""
    if D >= 0:
        return False
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def _as_disc_int(D) -> int:
    return D.value if isinstance(D, Discriminant) else int(D)


@dataclass(frozen=True)
class Discriminant:
    """A negative fundamental discriminant with its standard invariants."""

    value: int

    def __post_init__(self):
        if self.value >= 0 or self.value % 4 not in (0, 1):
            raise ValueError(f"{self.value} is not a negative discriminant")
        if not is_fundamental(self.value):
            raise ValueError(f"{self.value} is not fundamental")

    @property
    def abs(self) -> int:
        return -self.value

    @property
    def unit_count(self) -> int:
        """Number of units of the maximal order (6, 4 or 2)."""
        return {-3: 6, -4: 4}.get(self.value, 2)

    @property
    def class_number(self) -> int:
        return class_group(self.value).h

    def __int__(self) -> int:
        return self.value


# ---------------------------------------------------------------------------
# binary quadratic forms


@dataclass(frozen=True)
class BinaryQF:
    """Integral binary quadratic form a x^2 + b x y + c y^2."""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def is_positive_definite(self) -> bool:
        return self.disc < 0 and self.a > 0

    def is_primitive(self) -> bool:
        return gcd(gcd(self.a, self.b), self.c) == 1

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        return (-a < b <= a <= c) and not (a == c and b < 0)

    def label(self) -> str:
        """Canonical class label: the reduced representative as '[a,b,c]'."""
        r = reduce_form(self)
        return f"[{r.a},{r.b},{r.c}]"

    def transform(self, x: int, r: int, y: int, s: int) -> "BinaryQF":
        """Right action of the matrix [[x, r], [y, s]] with det 1."""
        if x * s - r * y != 1:
            raise ValueError("transform matrix must have determinant 1")
        a, b, c = self.a, self.b, self.c
        a2 = a * x * x + b * x * y + c * y * y
        b2 = 2 * a * x * r + b * (x * s + r * y) + 2 * c * y * s
        c2 = a * r * r + b * r * s + c * s * s
        return BinaryQF(a2, b2, c2)

    def root(self) -> tuple[Fraction, Fraction]:
        """The point (-b + sqrt(disc)) / (2a) as (real part, imag coeff).

        Returns (u, t) with the root u + t*sqrt(|disc|)*i in the upper half
        plane, both exact rationals.
        """
        return Fraction(-self.b, 2 * self.a), Fraction(1, 2 * self.a)


def reduce_form(q: BinaryQF) -> BinaryQF:
    """The reduced representative of the proper equivalence class of q."""
    if not q.is_positive_definite():
        raise ValueError("reduction expects a positive definite form")
    a, b, c = q.a, q.b, q.c
    while True:
        if -a < b <= a <= c:
            if a == c and b < 0:
                b = -b
            return BinaryQF(a, b, c)
        if b > a or b <= -a:
            t = (a - b) // (2 * a)
            b2 = b + 2 * t * a
            c = a * t * t + b * t + c
            b = b2
        if a > c:
            a, b, c = c, -b, a


def principal_form(D: int) -> BinaryQF:
    D = _as_disc_int(D)
    if D % 4 == 0:
        return BinaryQF(1, 0, -D // 4)
    return BinaryQF(1, 1, (1 - D) // 4)


def reduced_forms(D: int) -> list[BinaryQF]:
    """All primitive reduced forms of discriminant D, sorted by (a, b, c)."""
    D = _as_disc_int(D)
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError("need a negative discriminant")
    forms = []
    amax = isqrt(abs(D) // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if a == c and b < 0:
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            forms.append(BinaryQF(a, b, c))
    forms.sort(key=lambda f: (f.a, f.b, f.c))
    return forms


def represent_coprime(q: BinaryQF, M: int) -> BinaryQF:
    """An equivalent form whose leading coefficient is coprime to M.

    The returned form is properly equivalent to q (same class) but usually
    not reduced.
    """
    if gcd(q.a, M) == 1:
        return q
    for bound in range(1, 64):
        for x in range(-bound, bound + 1):
            for y in range(-bound, bound + 1):
                if max(abs(x), abs(y)) != bound:
                    continue
                if gcd(x, y) != 1:
                    continue
                if gcd(q(x, y), M) != 1:
                    continue
                g, al, be = xgcd(x, y)
                # det of [[x, -be], [y, al]] is x*al + y*be = 1
                return q.transform(x, -be, y, al)
    raise ValueError(f"no value coprime to {M} found for {q}")


# ---------------------------------------------------------------------------
# elements of the quadratic field


@dataclass(frozen=True)
class QuadElement:
    """Element u + v*sqrt(d) of Q(sqrt(d)), u and v exact rationals."""

    u: Fraction
    v: Fraction
    d: int

    @staticmethod
    def of(u, v, d) -> "QuadElement":
        return QuadElement(Fraction(u), Fraction(v), _as_disc_int(d))

    def conj(self) -> "QuadElement":
        return QuadElement(self.u, -self.v, self.d)

    def norm(self) -> Fraction:
        return self.u * self.u - self.d * self.v * self.v

    def trace(self) -> Fraction:
        return 2 * self.u

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def __add__(self, other: "QuadElement") -> "QuadElement":
        return QuadElement(self.u + other.u, self.v + other.v, self.d)

    def __sub__(self, other: "QuadElement") -> "QuadElement":
        return QuadElement(self.u - other.u, self.v - other.v, self.d)

    def __neg__(self) -> "QuadElement":
        return QuadElement(-self.u, -self.v, self.d)

    def __mul__(self, other):
        if isinstance(other, QuadElement):
            if other.d != self.d:
                raise ValueError("mixed discriminants")
            return QuadElement(
                self.u * other.u + self.d * self.v * other.v,
                self.u * other.v + self.v * other.u,
                self.d,
            )
        w = Fraction(other)
        return QuadElement(self.u * w, self.v * w, self.d)

    __rmul__ = __mul__

    def inverse(self) -> "QuadElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadElement(self.u / n, -self.v / n, self.d)


# ---------------------------------------------------------------------------
# ideal lattices


def _hnf2(vecs: list[tuple[int, int]]) -> tuple[int, int, int]:
    """Hermite form of the lattice spanned by integer vectors.

    Returns (m, w, g) with lattice = Z*(m, 0) + Z*(w, g), m, g >= 0.
    A rank deficient input gives m == 0 or g == 0.
    """
    g, w = 0, 0
    xs: list[int] = []
    for x, y in vecs:
        if y == 0:
            if x:
                xs.append(x)
            continue
        if g == 0:
            g, w = (y, x) if y > 0 else (-y, -x)
            continue
        d, s, t = xgcd(g, y)
        nw = s * w + t * x
        xs.append(x * (g // d) - w * (y // d))
        g, w = d, nw
    m = 0
    for x in xs:
        m = gcd(m, x)
    if m and g:
        w %= m  # canonical position of the off diagonal entry
    return m, w, g


def _compose_int(a1: int, b1: int, a2: int, b2: int, D: int) -> tuple[int, int, int]:
    """Product of integral ideals (a1, b1) and (a2, b2), integer arithmetic.

    Ideals are a Z + (b + sqrt(D))/2 Z.  Returns (s, A, B) with the product
    equal to s * (A Z + (B + sqrt(D))/2 Z).
    """
    vecs = [
        (2 * a1 * a2, 0),
        (a1 * b2, a1),
        (a2 * b1, a2),
        ((b1 * b2 + D) // 2, (b1 + b2) // 2),
    ]
    m, w, g = _hnf2(vecs)
    if not m or not g:
        raise ValueError("ideal product degenerated")
    if m % (2 * g) or w % g:
        raise ValueError("product lattice is not a standard ideal")
    A, B = m // (2 * g), w // g
    B = _normalize_b(B, A)
    if (B * B - D) % (4 * A):
        raise ValueError("product lattice is not a module over the maximal order")
    return g, A, B


def _normalize_b(b: int, a: int) -> int:
    """Reduce b modulo 2a into the window (-a, a]."""
    b %= 2 * a
    if b > a:
        b -= 2 * a
    return b


@dataclass(frozen=True)
class FractionalIdealRep:
    """Fractional ideal scale * (a Z + (b + sqrt(d))/2 Z) of the maximal order."""

    scale: Fraction
    a: int
    b: int
    d: int

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.a <= 0:
            raise ValueError("leading coefficient must be positive")
        if (self.b * self.b - self.d) % (4 * self.a):
            raise ValueError("lattice is not stable under the maximal order")

    @staticmethod
    def make(scale, a: int, b: int, d) -> "FractionalIdealRep":
        d = _as_disc_int(d)
        return FractionalIdealRep(Fraction(scale), a, _normalize_b(b, a), d)

    @staticmethod
    def unit_ideal(d) -> "FractionalIdealRep":
        d = _as_disc_int(d)
        return FractionalIdealRep.make(1, 1, d % 2, d)

    @staticmethod
    def from_form(q: BinaryQF) -> "FractionalIdealRep":
        """The ideal a Z + (-b + sqrt(D))/2 Z attached to the form [a, b, c]."""
        return FractionalIdealRep.make(1, q.a, -q.b, q.disc)

    def to_form(self) -> BinaryQF:
        """The form of the primitive part, inverse of from_form on classes."""
        return BinaryQF(self.a, -self.b, (self.b * self.b - self.d) // (4 * self.a))

    def norm(self) -> Fraction:
        return self.scale * self.scale * self.a

    def conj(self) -> "FractionalIdealRep":
        return FractionalIdealRep.make(self.scale, self.a, -self.b, self.d)

    def inverse(self) -> "FractionalIdealRep":
        return FractionalIdealRep.make(1 / (self.scale * self.a), self.a, -self.b, self.d)

    def basis(self) -> tuple[QuadElement, QuadElement]:
        e1 = QuadElement.of(self.scale * self.a, 0, self.d)
        e2 = QuadElement.of(self.scale * self.b / 2, self.scale / 2, self.d)
        return e1, e2

    def __contains__(self, elt: QuadElement) -> bool:
        if elt.d != self.d:
            return False
        t = 2 * elt.v / self.scale
        if t.denominator != 1:
            return False
        s = (2 * elt.u / self.scale - t * self.b) / (2 * self.a)
        return s.denominator == 1

    def __mul__(self, other):
        if isinstance(other, QuadElement):
            e1, e2 = self.basis()
            return FractionalIdealRep.from_vectors([e1 * other, e2 * other], self.d)
        if not isinstance(other, FractionalIdealRep):
            return NotImplemented
        if other.d != self.d:
            raise ValueError("mixed discriminants")
        s, A, B = _compose_int(self.a, self.b, other.a, other.b, self.d)
        return FractionalIdealRep.make(self.scale * other.scale * s, A, B, self.d)

    def __pow__(self, e: int) -> "FractionalIdealRep":
        if e < 0:
            return (self ** (-e)).inverse()
        out = FractionalIdealRep.unit_ideal(self.d)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    @staticmethod
    def from_vectors(vecs: list[QuadElement], d) -> "FractionalIdealRep":
        """Standard form of the lattice spanned by the given elements.

        The span must be a rank 2 module over the maximal order of
        discriminant d, otherwise ValueError.
        """
        d = _as_disc_int(d)
        halves = [(2 * e.u, 2 * e.v) for e in vecs]  # element = (x + y sqrt(d))/2
        L = 1
        for x, y in halves:
            L = L * x.denominator // gcd(L, x.denominator)
            L = L * y.denominator // gcd(L, y.denominator)
        ints = [(int(x * L), int(y * L)) for x, y in halves]
        m, w, g = _hnf2(ints)
        if not m or not g:
            raise ValueError("vectors do not span a rank 2 lattice")
        if m % (2 * g) or w % g:
            raise ValueError("lattice is not a standard ideal lattice")
        A, B = m // (2 * g), w // g
        return FractionalIdealRep.make(Fraction(g, L), A, B, d)

    def is_integral(self) -> bool:
        return self.scale.denominator == 1


def prime_ideal_above(p: int, D) -> FractionalIdealRep:
    """A distinguished prime ideal of norm p; p must not be inert.

    For ramified p the result is the unique prime above p.  For split p the
    result is the factor with normalized 0 <= b; its conjugate is the other.
    """
    D = _as_disc_int(D)
    if kronecker_prime(D, p) == -1:
        raise ValueError(f"{p} is inert for discriminant {D}")
    if p == 2:
        for b in (0, 1, 2):
            if (b * b - D) % 8 == 0:
                return FractionalIdealRep.make(1, 2, b, D)
        raise ValueError("no ideal of norm 2 found")
    t = sqrt_mod_prime(D, p)
    assert t is not None
    b = t if (t - D) % 2 == 0 else t + p
    q = FractionalIdealRep.make(1, p, b, D)
    if q.b < 0:
        q = q.conj()
    return q


def different_ideal(D) -> FractionalIdealRep:
    """The different, the principal ideal generated by sqrt(D)."""
    D = _as_disc_int(D)
    return FractionalIdealRep.unit_ideal(D) * QuadElement.of(0, 1, D)


# ---------------------------------------------------------------------------
# class groups


def _sym2_unit(u: int, v: int) -> int:
    """Hilbert symbol at 2 of two odd integers (no 2-adic valuation part)."""
    e = ((u - 1) // 2) * ((v - 1) // 2)
    return -1 if e % 2 else 1


def _genus_char(m: int, D: int, p: int) -> int:
    """Genus character value (m, D)_p for m > 0 coprime to 2D, p | D."""
    if p == 2:
        beta = 0
        v = D
        while v % 2 == 0:
            beta += 1
            v //= 2
        s = _sym2_unit(m, v)
        if beta % 2 and m % 8 in (3, 5):
            s = -s
        return s
    return 1 if pow(m % p, (p - 1) // 2, p) == 1 else -1


class ClassGroup:
    """The form class group of a fundamental discriminant D < 0.

    Classes are indexed 0..h-1 in the lexicographic order of their reduced
    forms; index 0 is always the principal class.  The composition table is
    built once through ideal multiplication.
    """

    def __init__(self, D: int, table: list[list[int]] | None = None):
        D = _as_disc_int(D)
        if not is_fundamental(D):
            raise ValueError(f"{D} is not a negative fundamental discriminant")
        self.disc = D
        self.forms = reduced_forms(D)
        self.h = len(self.forms)
        self.labels = [f"[{f.a},{f.b},{f.c}]" for f in self.forms]
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._form_index = {(f.a, f.b, f.c): i for i, f in enumerate(self.forms)}
        pf = reduce_form(principal_form(D))
        self.identity = self._form_index[(pf.a, pf.b, pf.c)]
        if self.identity != 0:
            raise AssertionError("principal class is not the first label")
        self.table = table if table is not None else self._build_table()
        self.inverse_idx = [
            self._form_index[self._reduced_key(BinaryQF(f.a, -f.b, f.c))]
            for f in self.forms
        ]
        self._genus = None

    def _reduced_key(self, q: BinaryQF) -> tuple[int, int, int]:
        r = reduce_form(q)
        return (r.a, r.b, r.c)

    def _build_table(self) -> list[list[int]]:
        t = [[0] * self.h for _ in range(self.h)]
        ideals = [(f.a, -f.b) for f in self.forms]
        for i in range(self.h):
            a1, b1 = ideals[i]
            for j in range(i, self.h):
                a2, b2 = ideals[j]
                _, A, B = _compose_int(a1, b1, a2, b2, self.disc)
                k = self._form_index[self._reduced_key(BinaryQF(A, -B, (B * B - self.disc) // (4 * A)))]
                t[i][j] = k
                t[j][i] = k
        return t

    # -- group operations on indices

    def compose(self, i: int, j: int) -> int:
        return self.table[i][j]

    def inv(self, i: int) -> int:
        return self.inverse_idx[i]

    def power(self, i: int, e: int) -> int:
        if e < 0:
            return self.power(self.inv(i), -e)
        out, base = self.identity, i
        while e:
            if e & 1:
                out = self.compose(out, base)
            base = self.compose(base, base)
            e >>= 1
        return out

    # -- conversions

    def index_of_label(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ValueError(f"unknown class label {label!r} for D={self.disc}")

    def class_of_form(self, q: BinaryQF) -> int:
        if q.disc != self.disc:
            raise ValueError("form has the wrong discriminant")
        if not q.is_primitive():
            raise ValueError("form is not primitive")
        key = self._reduced_key(q)
        return self._form_index[key]

    def class_of_ideal(self, I: FractionalIdealRep) -> int:
        if I.d != self.disc:
            raise ValueError("ideal has the wrong discriminant")
        return self.class_of_form(I.to_form())

    def ideal_for_class(self, i: int, coprime_to: int = 1) -> FractionalIdealRep:
        """An integral ideal in class i with norm coprime to coprime_to."""
        q = self.forms[i]
        if coprime_to > 1:
            q = represent_coprime(q, coprime_to)
        return FractionalIdealRep.from_form(q)

    # -- structure

    def two_torsion(self) -> list[int]:
        return [i for i in range(self.h) if self.compose(i, i) == self.identity]

    def cosets_mod_two_torsion(self) -> list[list[int]]:
        """Cosets of the 2-torsion subgroup, each sorted, in label order."""
        tt = self.two_torsion()
        seen = set()
        cosets = []
        for i in range(self.h):
            if i in seen:
                continue
            cs = sorted({self.compose(i, t) for t in tt})
            seen.update(cs)
            cosets.append(cs)
        cosets.sort(key=lambda cs: cs[0])
        return cosets

    def coset_label(self, i: int) -> str:
        """Label of the 2-torsion coset containing class i."""
        tt = self.two_torsion()
        rep = min(self.compose(i, t) for t in tt)
        return self.labels[rep]

    def _represent_coprime_value(self, q: BinaryQF, M: int) -> int:
        for bound in range(1, 64):
            for x in range(-bound, bound + 1):
                for y in range(-bound, bound + 1):
                    if max(abs(x), abs(y)) != bound:
                        continue
                    v = q(x, y)
                    if v > 0 and gcd(v, M) == 1:
                        return v
        raise ValueError("no represented value coprime to the modulus found")

    def genus_characters(self) -> dict[int, list[int]]:
        """Genus character values, one row of +-1 per prime dividing D."""
        if self._genus is None:
            ps = sorted(factorize(abs(self.disc)))
            rows = {p: [0] * self.h for p in ps}
            for i, q in enumerate(self.forms):
                m = self._represent_coprime_value(q, 2 * self.disc)
                for p in ps:
                    rows[p][i] = _genus_char(m, self.disc, p)
            self._genus = rows
        return self._genus

    def genus_of(self, i: int) -> dict[int, int]:
        return {p: row[i] for p, row in self.genus_characters().items()}

    def realized_genus_vectors(self) -> set[tuple[int, ...]]:
        chars = self.genus_characters()
        ps = sorted(chars)
        return {tuple(chars[p][i] for p in ps) for i in range(self.h)}

    # -- serialization

    def to_dict(self) -> dict:
        return {
            "disc": self.disc,
            "forms": [[f.a, f.b, f.c] for f in self.forms],
            "table": self.table,
        }

    @staticmethod
    def from_dict(data: dict) -> "ClassGroup":
        D = data["disc"]
        cg = ClassGroup(D, table=[list(row) for row in data["table"]])
        stored = [tuple(f) for f in data["forms"]]
        if stored != [(f.a, f.b, f.c) for f in cg.forms]:
            raise ValueError("cached class group is inconsistent")
        return cg


_CG_CACHE: dict[int, ClassGroup] = {}
_CG_LOCK = threading.Lock()


def class_group(D, cache_dir: str | None = None) -> ClassGroup:
    """The class group for D, from the in-memory or on-disk cache.

    Safe for concurrent callers; a race at worst builds the group twice and
    keeps one copy.
    """
    D = _as_disc_int(D)
    with _CG_LOCK:
        cg = _CG_CACHE.get(D)
    if cg is not None:
        return cg
    if cache_dir:
        path = os.path.join(cache_dir, f"clgroup_{abs(D)}.json")
        try:
            with open(path, "r", encoding="utf-8") as fh:
                cg = ClassGroup.from_dict(json.load(fh))
        except (OSError, ValueError, KeyError):
            cg = None
    if cg is None:
        cg = ClassGroup(D)
        if cache_dir:
            _write_cache(cache_dir, cg)
    with _CG_LOCK:
        return _CG_CACHE.setdefault(D, cg)


def _write_cache(cache_dir: str, cg: ClassGroup) -> None:
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"clgroup_{abs(cg.disc)}.json")
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(cg.to_dict(), fh, sort_keys=True)
        os.replace(tmp, path)
    except OSError:
        try:
            os.unlink(tmp)
        except OSError:
            pass


def clear_class_group_cache() -> None:
    with _CG_LOCK:
        _CG_CACHE.clear()


# ---------------------------------------------------------------------------
# ideal counting


def rho(n, cls, D, cache_dir: str | None = None) -> int:
    """Number of integral ideals of norm n in the given ideal class.

    n may be any rational; the count is 0 unless n is a positive integer.
    cls is a class index or a class label.
    """
    cg = class_group(D, cache_dir)
    if isinstance(cls, str):
        cls = cg.index_of_label(cls)
    n = Fraction(n)
    if n <= 0 or n.denominator != 1:
        return 0
    n = int(n)
    counts = {cg.identity: 1}
    for p, e in sorted(factorize(n).items()):
        typ = splitting_type(cg.disc, p)
        if typ == "inert":
            if e % 2:
                return 0
            continue
        pi = cg.class_of_ideal(prime_ideal_above(p, cg.disc))
        if typ == "ramified":
            shift = cg.power(pi, e)
            counts = {cg.compose(i, shift): v for i, v in counts.items()}
            continue
        nxt: dict[int, int] = {}
        for i in range(e + 1):
            shift = cg.power(pi, 2 * i - e)
            for j, v in counts.items():
                k = cg.compose(j, shift)
                nxt[k] = nxt.get(k, 0) + v
        counts = nxt
    return counts.get(cls, 0)


def rho_genus(n, genus: dict[int, int], D, cache_dir: str | None = None) -> int:
    """Number of integral ideals of norm n whose class lies in a genus.

    genus maps each prime dividing D to the required character value.
    """
    cg = class_group(D, cache_dir)
    chars = cg.genus_characters()
    ps = sorted(chars)
    if sorted(genus) != ps:
        raise ValueError(f"genus vector must assign exactly the primes {ps}")
    vec = tuple(genus[p] for p in ps)
    if any(v not in (1, -1) for v in vec):
        raise ValueError("genus character values must be +-1")
    if vec not in cg.realized_genus_vectors():
        raise ValueError("inconsistent genus character vector")
    total = 0
    for i in range(cg.h):
        if tuple(chars[p][i] for p in ps) == vec:
            total += rho(n, i, D, cache_dir)
    return total


# ---------------------------------------------------------------------------
# CM point representatives


@dataclass(frozen=True)
class HeegnerRep:
    """One representative form [aN, b, c] with b = rho mod 2N, plus its class.

    The attached CM point is the root (-b + sqrt(D)) / (2 aN) in the upper
    half plane.
    """

    form: BinaryQF
    label: str

    def root(self) -> tuple[Fraction, Fraction]:
        return self.form.root()


def heegner_reps(D, N: int, rho_res: int, cache_dir: str | None = None) -> list[HeegnerRep]:
    """Class representatives among forms [a, b, c] with N | a, b = rho mod 2N.

    Exactly one representative per ideal class, principal class first, the
    rest in label order.  Requires rho_res^2 = D mod 4N.
    """
    D = _as_disc_int(D)
    if N < 1:
        raise ValueError("level must be positive")
    if not is_fundamental(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")
    if (rho_res * rho_res - D) % (4 * N):
        raise ValueError(f"rho={rho_res} is not a square root of D mod 4N")
    cg = class_group(D, cache_dir)
    base = FractionalIdealRep.make(1, N, rho_res, D)
    out = []
    for i in range(cg.h):
        ai = cg.ideal_for_class(i, coprime_to=N)
        prod = ai * base
        if prod.scale != 1:
            raise AssertionError("representative ideal is not primitive")
        A, B = prod.a, prod.b
        if (B - rho_res) % (2 * N):
            raise AssertionError("stored square root drifted mod 2N")
        q = BinaryQF(A, B, (B * B - D) // (4 * A))
        out.append(HeegnerRep(form=q, label=cg.labels[i]))
    return out
