"""Brute-force oracles shared by the test modules.

Everything here is deliberately naive: search, enumeration, and
first-principles counting, independent of the library's own algorithms.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from math import gcd, isqrt

from cmcycles.quadarith import BinaryQF, FractionalIdealRep, factorize


def sl2_equivalent(q1: BinaryQF, q2: BinaryQF, state_cap: int = 200000) -> bool:
    """Whether q1 and q2 are SL2(Z)-equivalent, by breadth-first search over
    the generator moves S: (a,b,c) -> (c,-b,a) and T^{+-1}."""
    if q1.disc != q2.disc:
        return False
    bound = 4 * max(abs(v) for q in (q1, q2) for v in (q.a, q.b, q.c)) + 50
    start = (q1.a, q1.b, q1.c)
    target = (q2.a, q2.b, q2.c)
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == target:
            return True
        a, b, c = cur
        nxt = [
            (c, -b, a),
            (a, b + 2 * a, a + b + c),
            (a, b - 2 * a, a - b + c),
        ]
        for st in nxt:
            if abs(st[0]) > bound or abs(st[2]) > bound:
                continue
            if st not in seen:
                seen.add(st)
                queue.append(st)
        if len(seen) > state_cap:
            raise RuntimeError("sl2 search exceeded state cap")
    return target in seen


def gamma0_equivalent(q1: BinaryQF, q2: BinaryQF, N: int, bound: int = 12) -> bool:
    """Small-entry search for gamma in Gamma0(N) with q1 . gamma = q2."""
    if q1.disc != q2.disc:
        return False
    targets = (q2.a, q2.b, q2.c)
    for y in (0, N, -N, 2 * N, -2 * N):
        for x in range(-bound, bound + 1):
            for s in range(-bound, bound + 1):
                if y == 0:
                    if x * s != 1:
                        continue
                    for r in range(-bound, bound + 1):
                        t = q1.transform(x, r, y, s)
                        if (t.a, t.b, t.c) == targets:
                            return True
                else:
                    num = x * s - 1
                    if num % y:
                        continue
                    r = num // y
                    t = q1.transform(x, r, y, s)
                    if (t.a, t.b, t.c) == targets:
                        return True
    return False


def rho_class_counts(n: int, cg) -> list[int]:
    """Ideal counts of norm n per class, by direct divisor enumeration.

    Every integral ideal is m * (primitive ideal of norm a) with n = a*m^2,
    and primitive ideals of norm a correspond to b mod 2a, b^2 = D mod 4a.
    """
    D = cg.disc
    counts = [0] * cg.h
    m = 1
    while m * m <= n:
        if n % (m * m) == 0:
            a = n // (m * m)
            for b in range(-a + 1, a + 1):
                if (b * b - D) % (4 * a) == 0:
                    ideal = FractionalIdealRep.make(1, a, b, D)
                    counts[cg.class_of_ideal(ideal)] += 1
        m += 1
    return counts


def _squarefree_int(x: Fraction) -> int:
    """An integer with the same square class as the rational x."""
    n = x.numerator * x.denominator
    if n == 0:
        raise ValueError("zero has no square class")
    sign = 1 if n > 0 else -1
    n = abs(n)
    out = 1
    for p, e in factorize(n).items():
        if e % 2:
            out *= p
    return sign * out


def hilbert_oracle(a, b, place) -> int:
    """Hilbert symbol by brute solvability search for z^2 = a x^2 + b y^2.

    Only intended for small inputs and p in {2, 3, 5, 7}; the modulus p^k
    with k = 6 (p = 2) or k = 3 (odd p) is sufficient for squarefree
    integer coefficients.
    """
    a = _squarefree_int(Fraction(a))
    b = _squarefree_int(Fraction(b))
    if place in ("inf", "oo", float("inf")):
        return 1 if (a > 0 or b > 0) else -1
    p = int(place)
    k = 6 if p == 2 else 3
    pk = p**k
    squares = {z * z % pk for z in range(pk)}
    for x in range(pk):
        ax2 = a * x * x
        for y in range(pk):
            if x % p == 0 and y % p == 0:
                continue
            if (ax2 + b * y * y) % pk in squares:
                return 1
    return -1


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in factorize(n).items():
        out = [d * p**i for d in out for i in range(e + 1)]
    return sorted(out)
