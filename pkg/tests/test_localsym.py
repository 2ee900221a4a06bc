"""Tests for Hilbert symbols, obstruction sets and local multiplicities."""

import math
import random
from fractions import Fraction

import pytest

from cmcycles.localsym import (
    diff_set,
    hilbert_symbol,
    kappa_and_p0,
    nu_p,
    o_m,
    ord_p,
    unit_part,
)

import oracles


# ---------------------------------------------------------------------------
# hilbert symbols


def test_hilbert_archimedean():
    assert hilbert_symbol(-1, -1, "inf") == -1
    assert hilbert_symbol(-1, 2, "inf") == 1
    assert hilbert_symbol(3, 5, "inf") == 1
    assert hilbert_symbol(Fraction(-1, 3), Fraction(-2, 7), math.inf) == -1


def test_hilbert_classical_values():
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(2, 3, 3) == -1
    assert hilbert_symbol(3, 3, 3) == -1
    assert hilbert_symbol(5, 5, 5) == 1
    assert hilbert_symbol(2, 7, 7) == 1


def test_hilbert_zero_rejected():
    with pytest.raises(ValueError):
        hilbert_symbol(0, 3, 2)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_hilbert_against_oracle(p):
    vals = [-6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 10]
    for a in vals:
        for b in vals:
            assert hilbert_symbol(a, b, p) == oracles.hilbert_oracle(a, b, p), (a, b, p)


def test_hilbert_properties_random():
    rng = random.Random(23)
    places = ["inf", 2, 3, 5, 7, 11, 13]

    def rand_rat():
        num = rng.choice([s for s in range(-40, 41) if s != 0])
        den = rng.randrange(1, 30)
        return Fraction(num, den)

    for _ in range(300):
        a, b, c = rand_rat(), rand_rat(), rand_rat()
        v = rng.choice(places)
        assert hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v)
        assert hilbert_symbol(a * c * c, b, v) == hilbert_symbol(a, b, v)
        assert (
            hilbert_symbol(a * c, b, v)
            == hilbert_symbol(a, b, v) * hilbert_symbol(c, b, v)
        )
        assert hilbert_symbol(a, -a, v) == 1
        if a != 1:
            assert hilbert_symbol(a, 1 - a, v) == 1


def test_hilbert_product_formula():
    rng = random.Random(31)
    for _ in range(200):
        a = rng.choice([s for s in range(-50, 51) if s != 0])
        b = rng.choice([s for s in range(-50, 51) if s != 0])
        ps = {2}
        for x in (a, b):
            d = abs(x)
            f = 2
            while f * f <= d:
                while d % f == 0:
                    ps.add(f)
                    d //= f
                f += 1
            if d > 1:
                ps.add(d)
        prod = hilbert_symbol(a, b, "inf")
        for p in sorted(ps):
            prod *= hilbert_symbol(a, b, p)
        assert prod == 1, (a, b)


# ---------------------------------------------------------------------------
# valuations of rationals


def test_ord_and_unit():
    assert ord_p(12, 2) == 2
    assert ord_p(Fraction(5, 8), 2) == -3
    assert ord_p(Fraction(9, 5), 3) == 2
    assert unit_part(Fraction(5, 8), 2) == Fraction(5, 1)
    assert unit_part(-12, 2) == -3


# ---------------------------------------------------------------------------
# obstruction sets


def test_diff_examples():
    d = diff_set(Fraction(6, 107), 47, -107)
    assert d.primes == (2,)
    assert d.is_single and d.prime == 2
    # 47 is a norm from Q(sqrt(-107)), so the scale must not matter here
    for p in (2, 47, 107):
        assert hilbert_symbol(47, -107, p) == 1
    assert diff_set(1, 1, -7).primes == (7,)
    assert diff_set(Fraction(5, 7), 1, -7).primes == (5,)
    assert diff_set(Fraction(3, 7), 1, -7).primes == (3,)


def test_diff_parity_and_nonsplit():
    rng = random.Random(5)
    from cmcycles.quadarith import splitting_type

    for D in (-7, -23, -107, -84):
        for _ in range(60):
            m = Fraction(rng.randrange(1, 80), rng.choice([1, abs(D)]))
            scale = rng.choice([1, 2, 3, 5, 47])
            d = diff_set(m, scale, D)
            assert len(d.primes) % 2 == 1
            for p in d.primes:
                assert splitting_type(D, p) != "split"


def test_diff_rejects_bad_args():
    with pytest.raises(ValueError):
        diff_set(0, 1, -23)
    with pytest.raises(ValueError):
        diff_set(-3, 1, -23)


# ---------------------------------------------------------------------------
# local multiplicities


def test_nu_values():
    assert nu_p(Fraction(6, 107), 2, -107) == Fraction(1)  # inert, ord 1
    assert nu_p(Fraction(3, 7), 3, -7) == Fraction(1)
    assert nu_p(Fraction(9, 1), 7, -7) == Fraction(1)  # ramified: ord_7(9*7) = 1
    assert nu_p(Fraction(75, 7), 3, -7) == Fraction(1)
    assert nu_p(Fraction(45, 7), 5, -7) == Fraction(1)
    assert nu_p(Fraction(69, 7), 3, -7) == Fraction(1)
    assert nu_p(125, 5, -107) == Fraction(2)  # inert: (3+1)/2
    assert nu_p(Fraction(107, 1), 107, -107) == Fraction(2)


def test_nu_split_rejected():
    with pytest.raises(ValueError):
        nu_p(3, 3, -107)


def test_o_values():
    assert o_m(Fraction(6, 107), -107) == 0
    assert o_m(1, -107) == 1
    assert o_m(Fraction(9, 1), -7) == 1
    assert o_m(1, -15) == 2
    assert o_m(Fraction(1, 15), -15) == 0
    assert o_m(3, -15) == 2
    assert o_m(Fraction(1, 3), -15) == 1
    assert o_m(Fraction(1, 5), -15) == 1


# ---------------------------------------------------------------------------
# auxiliary split prime


def test_kappa_inert_case():
    kappa, p0 = kappa_and_p0(2, -107)
    assert (kappa, p0) == (6, 3)
    # p0 really satisfies the defining conditions
    t = -2 * p0
    assert hilbert_symbol(-107, t, 2) == -1
    assert hilbert_symbol(-107, t, "inf") == -1
    for v in (p0, 107):
        assert hilbert_symbol(-107, t, v) == 1
    from cmcycles.quadarith import splitting_type

    assert splitting_type(-107, p0) == "split"


def test_kappa_ramified_case():
    kappa, p0 = kappa_and_p0(7, -7)
    assert kappa == p0
    t = -p0
    assert hilbert_symbol(-7, t, 7) == -1
    assert hilbert_symbol(-7, t, "inf") == -1
    assert hilbert_symbol(-7, t, 2) == 1
    from cmcycles.quadarith import splitting_type

    assert splitting_type(-7, p0) == "split"


def test_kappa_split_rejected():
    with pytest.raises(ValueError):
        kappa_and_p0(3, -107)
