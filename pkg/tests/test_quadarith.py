"""Tests for binary quadratic forms, ideals, class groups and counts."""

import random
from fractions import Fraction

import pytest

from cmcycles.quadarith import (
    BinaryQF,
    ClassGroup,
    Discriminant,
    FractionalIdealRep,
    QuadElement,
    class_group,
    clear_class_group_cache,
    different_ideal,
    heegner_reps,
    is_fundamental,
    kronecker_prime,
    prime_ideal_above,
    principal_form,
    reduce_form,
    reduced_forms,
    represent_coprime,
    rho,
    rho_genus,
    splitting_type,
)

import oracles


def fundamental_discs(bound):
    return [-n for n in range(3, bound + 1) if is_fundamental(-n)]


# ---------------------------------------------------------------------------
# discriminants


def test_discriminant_validation():
    with pytest.raises(ValueError):
        Discriminant(-5)  # 3 mod 4
    with pytest.raises(ValueError):
        Discriminant(-12)  # -12/4 = -3 is 1 mod 4
    with pytest.raises(ValueError):
        Discriminant(7)
    assert Discriminant(-3).unit_count == 6
    assert Discriminant(-4).unit_count == 4
    assert Discriminant(-7).unit_count == 2
    assert Discriminant(-23).class_number == 3


def test_splitting_type():
    assert splitting_type(-107, 2) == "inert"  # -107 = 5 mod 8
    assert splitting_type(-107, 3) == "split"
    assert splitting_type(-107, 107) == "ramified"
    assert splitting_type(-7, 2) == "split"  # -7 = 1 mod 8


# ---------------------------------------------------------------------------
# reduction


def test_reduce_examples():
    assert reduce_form(BinaryQF(1, 1, 6)) == BinaryQF(1, 1, 6)
    q = reduce_form(BinaryQF(12, 13, 4))
    assert q.disc == -23 and q.is_reduced()
    assert oracles.sl2_equivalent(BinaryQF(12, 13, 4), q)
    # [47,41,9] has disc -11 and h(-11) = 1, so it reduces to the principal form
    assert BinaryQF(47, 41, 9).disc == -11
    assert reduce_form(BinaryQF(47, 41, 9)) == BinaryQF(1, 1, 3)
    assert oracles.sl2_equivalent(BinaryQF(47, 41, 9), BinaryQF(1, 1, 3))


def test_reduce_random_orbits():
    rng = random.Random(7)
    for D in (-23, -47, -107, -120, -163):
        for q in reduced_forms(D):
            cur = q
            for _ in range(8):
                move = rng.randrange(3)
                if move == 0:
                    cur = BinaryQF(cur.c, -cur.b, cur.a)
                elif move == 1:
                    cur = cur.transform(1, 1, 0, 1)
                else:
                    cur = cur.transform(1, -1, 0, 1)
            assert reduce_form(cur) == q
            assert reduce_form(reduce_form(cur)) == q  # idempotent


def test_reduce_rejects_indefinite():
    with pytest.raises(ValueError):
        reduce_form(BinaryQF(1, 5, 1))


# ---------------------------------------------------------------------------
# ideals


@pytest.mark.parametrize("D", [-23, -107, -84, -120, -163, -4, -8])
def test_form_ideal_roundtrip(D):
    cg = class_group(D)
    for i, q in enumerate(cg.forms):
        I = FractionalIdealRep.from_form(q)
        assert I.norm() == q.a
        assert cg.class_of_ideal(I) == i
        assert cg.class_of_form(I.to_form()) == i


@pytest.mark.parametrize("D", [-23, -107, -84])
def test_ideal_arithmetic(D):
    cg = class_group(D)
    one = FractionalIdealRep.unit_ideal(D)
    rng = random.Random(3)
    ideals = [FractionalIdealRep.from_form(q) for q in cg.forms]
    for I in ideals:
        assert (I * I.inverse()) == one
        J = I * I.conj()
        assert J.a == 1 and J.scale == I.norm()  # I Ibar = N(I) O
        for e in I.basis():
            assert e in I
        # stability under the maximal order
        w = QuadElement.of(Fraction(D, 2), Fraction(1, 2), D)
        for e in I.basis():
            assert w * e in I
    for _ in range(20):
        I, J = rng.choice(ideals), rng.choice(ideals)
        assert (I * J).norm() == I.norm() * J.norm()


def test_ideal_membership():
    I = FractionalIdealRep.make(1, 3, 1, -107)
    assert QuadElement.of(3, 0, -107) in I
    assert QuadElement.of(Fraction(1, 2), Fraction(1, 2), -107) in I
    assert QuadElement.of(1, 0, -107) not in I
    assert QuadElement.of(Fraction(1, 2), Fraction(1, 3), -107) not in I


@pytest.mark.parametrize("D", [-23, -107, -84, -8])
def test_prime_ideals(D):
    for p in (2, 3, 5, 7, 11, 13):
        if kronecker_prime(D, p) == -1:
            with pytest.raises(ValueError):
                prime_ideal_above(p, D)
            continue
        P = prime_ideal_above(p, D)
        assert P.norm() == p
        prod = P * P.conj()
        assert prod.a == 1 and prod.scale == p
        if splitting_type(D, p) == "ramified":
            assert P == P.conj()


def test_different_ideal():
    for D in (-23, -107, -84):
        dk = different_ideal(D)
        assert dk.norm() == abs(D)
        # sqrt(D) itself lies in the ideal
        assert QuadElement.of(0, 1, D) in dk


def test_from_vectors_rejects_rank_deficient():
    with pytest.raises(ValueError):
        FractionalIdealRep.from_vectors(
            [QuadElement.of(1, 0, -23), QuadElement.of(2, 0, -23)], -23
        )


# ---------------------------------------------------------------------------
# class groups


def test_class_numbers_examples():
    assert class_group(-23).h == 3
    assert class_group(-107).h == 3
    assert class_group(-3).h == 1
    assert class_group(-4).h == 1
    assert class_group(-47).h == 5


def test_group_laws_sample():
    for D in (-23, -107, -84, -120, -163, -231):
        cg = class_group(D)
        e = cg.identity
        for i in range(cg.h):
            assert cg.compose(i, e) == i
            assert cg.compose(i, cg.inv(i)) == e
            for j in range(cg.h):
                assert cg.compose(i, j) == cg.compose(j, i)
                for k in range(cg.h):
                    assert cg.compose(cg.compose(i, j), k) == cg.compose(
                        i, cg.compose(j, k)
                    )


def test_inverse_is_flipped_form():
    cg = class_group(-107)
    for i, q in enumerate(cg.forms):
        j = cg.class_of_form(BinaryQF(q.a, -q.b, q.c))
        assert cg.inv(i) == j


def test_labels_sorted_and_principal_first():
    cg = class_group(-107)
    assert cg.labels == ["[1,1,27]", "[3,-1,9]", "[3,1,9]"]
    assert cg.identity == 0
    assert cg.labels[0] == principal_form(-107).label()


def test_class_group_rejects_non_fundamental():
    with pytest.raises(ValueError):
        ClassGroup(-12)


def test_class_group_cache_roundtrip(tmp_path):
    clear_class_group_cache()
    cg1 = class_group(-47, cache_dir=str(tmp_path))
    assert (tmp_path / "clgroup_47.json").exists()
    clear_class_group_cache()
    cg2 = class_group(-47, cache_dir=str(tmp_path))
    assert cg1.table == cg2.table and cg1.labels == cg2.labels
    clear_class_group_cache()


# ---------------------------------------------------------------------------
# rho


def test_rho_trivial():
    for D in (-23, -107):
        cg = class_group(D)
        assert rho(1, 0, D) == 1
        for i in range(1, cg.h):
            assert rho(1, i, D) == 0
    assert rho(Fraction(3, 7), 0, -23) == 0
    assert rho(0, 0, -23) == 0


def test_rho_107_profile():
    cg = class_group(-107)
    vals = [rho(3, i, -107) for i in range(cg.h)]
    assert vals == [0, 1, 1]
    assert vals == oracles.rho_class_counts(3, cg)


def test_rho_23_norm2():
    cg = class_group(-23)
    vals = [rho(2, i, -23) for i in range(cg.h)]
    assert sum(vals) == 2
    assert vals == oracles.rho_class_counts(2, cg)


@pytest.mark.parametrize("D", [-23, -107, -84, -39])
def test_rho_against_oracle(D):
    cg = class_group(D)
    for n in range(1, 60):
        expect = oracles.rho_class_counts(n, cg)
        got = [rho(n, i, D) for i in range(cg.h)]
        assert got == expect, (D, n)


# ---------------------------------------------------------------------------
# genus theory


@pytest.mark.parametrize("D", [-23, -107, -84, -120, -39, -4, -8, -20])
def test_genus_characters(D):
    cg = class_group(D)
    chars = cg.genus_characters()
    ps = sorted(chars)
    # multiplicativity on all pairs
    for i in range(cg.h):
        for j in range(cg.h):
            k = cg.compose(i, j)
            for p in ps:
                assert chars[p][k] == chars[p][i] * chars[p][j]
    # product over p | D is trivial on every class
    for i in range(cg.h):
        prod = 1
        for p in ps:
            prod *= chars[p][i]
        assert prod == 1
    # number of genera is 2^(t-1)
    assert len(cg.realized_genus_vectors()) == 2 ** (len(ps) - 1)
    assert len(cg.two_torsion()) == 2 ** (len(ps) - 1)


def test_rho_genus_identity():
    for D in (-23, -107, -84):
        cg = class_group(D)
        genera = []
        for vec in sorted(cg.realized_genus_vectors()):
            ps = sorted(cg.genus_characters())
            genera.append(dict(zip(ps, vec)))
        for n in range(1, 51):
            total = sum(rho(n, i, D) for i in range(cg.h))
            by_genus = sum(rho_genus(n, g, D) for g in genera)
            # summing each genus once covers all classes once
            assert by_genus == total, (D, n)


def test_rho_genus_107():
    cg = class_group(-107)
    assert rho_genus(3, cg.genus_of(0), -107) == 2
    assert rho_genus(1, cg.genus_of(0), -107) == 1


def test_rho_genus_inconsistent():
    cg = class_group(-107)  # h odd, single genus
    bad = {p: -v for p, v in cg.genus_of(0).items()}
    with pytest.raises(ValueError):
        rho_genus(3, bad, -107)
    with pytest.raises(ValueError):
        rho_genus(3, {3: 1}, -107)


# ---------------------------------------------------------------------------
# representatives


def test_represent_coprime():
    rng = random.Random(11)
    for D in (-23, -107, -84):
        for q in reduced_forms(D):
            for M in (47, 2 * 3 * 5, 94):
                q2 = represent_coprime(q, M)
                from math import gcd

                assert gcd(q2.a, M) == 1
                assert q2.disc == D
                assert oracles.sl2_equivalent(q, q2)


def test_heegner_reps_examples():
    reps = heegner_reps(-23, 47, 27)
    assert len(reps) == 3
    assert (reps[0].form.a, reps[0].form.b, reps[0].form.c) == (47, 27, 4)
    assert reps[0].label == "[1,1,6]"
    reps107 = heegner_reps(-107, 47, 9)
    assert len(reps107) == 3
    assert (reps107[0].form.a, reps107[0].form.b, reps107[0].form.c) == (47, 9, 1)
    one = heegner_reps(-7, 1, 1)
    assert [(r.form.a, r.form.b, r.form.c) for r in one] == [(1, 1, 2)]


@pytest.mark.parametrize("D,N,r", [(-23, 47, 27), (-107, 47, 9), (-84, 5, 4), (-39, 5, 1)])
def test_heegner_reps_invariants(D, N, r):
    cg = class_group(D)
    reps = heegner_reps(D, N, r)
    assert len(reps) == cg.h
    assert [x.label for x in reps] == cg.labels
    for x in reps:
        q = x.form
        assert q.disc == D
        assert q.a % N == 0
        assert (q.b - r) % (2 * N) == 0
        assert q.is_positive_definite() and q.is_primitive()
    # pairwise Gamma0(N)-inequivalent (small-matrix search finds nothing)
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            assert not oracles.gamma0_equivalent(reps[i].form, reps[j].form, N, bound=8)


def test_heegner_reps_congruence_error():
    with pytest.raises(ValueError):
        heegner_reps(-23, 47, 1)
