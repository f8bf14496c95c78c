from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from orbitforge import (
    BracketCoefficients,
    ExtractionFailedError,
    InadmissibleSeedError,
    Parametrization,
    PreconditionError,
    adapted_positive_system,
    bivector_from_coefficients,
    build_root_system,
    classify_good_pair,
    extract_parametrization,
    from_parametrization,
    good_bracket_family,
    kks,
    make_levi,
    phi_M,
    schouten,
    solve_ff,
    standard_positive,
    tangent_basis,
    verify_ff,
)
from orbitforge.levi import qadd
from orbitforge.moduli import recursion_paths
from orbitforge.multivec import phi_bracket_residual

from conftest import CATALOG, entry_id, levi_of
from oracles import coth_rational_solution, random_rational

LEVIS = {entry_id(e): levi_of(e) for e in CATALOG}
A2 = LEVIS["A2{}"]


def test_solve_ff_examples():
    sol = solve_ff(A2, None, {(1, 0): Fraction(2), (0, 1): Fraction(3)}, 1)
    assert sol.c((1, 1)) == Fraction(7, 5)
    a3 = make_levi(build_root_system("A3"), [])
    paths = recursion_paths(a3, standard_positive(a3), [1, 2, 3], 1)
    assert paths[(1, 1, 0)] == [1]
    assert paths[(0, 1, 1)] == [Fraction(7, 5)]
    assert len(paths[(1, 1, 1)]) == 2 and set(paths[(1, 1, 1)]) == {1}
    with pytest.raises(InadmissibleSeedError) as err:
        solve_ff(A2, None, [2, -2], 1)
    assert err.value.pair == ((1, 0), (0, 1))


@pytest.mark.parametrize("key", list(LEVIS))
def test_recursion_matches_coth_oracle(key):
    levi = LEVIS[key]
    rng = random.Random(17)
    K = Fraction(3, 2)
    for _ in range(10):
        xs = [Fraction(rng.randint(2, 9), rng.randint(1, 1)) ** rng.choice((1, -1)) for _ in levi.simple_quasiroots]
        expected = coth_rational_solution(xs, levi.positive_quasiroots, K)
        if expected is None:
            continue
        seeds = [expected[q] for q in levi.simple_quasiroots]
        try:
            sol = solve_ff(levi, None, seeds, K)
        except InadmissibleSeedError:
            continue
        assert {q: sol.c(q) for q in levi.positive_quasiroots} == expected


@pytest.mark.parametrize("key", list(LEVIS))
def test_recursion_at_k_zero_is_kks(key):
    levi = LEVIS[key]
    rng = random.Random(4)
    for _ in range(5):
        lam = [Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in levi.simple_quasiroots]
        sol = solve_ff(levi, None, [1 / x for x in lam], 0)
        assert sol.c == kks(levi, lam)


@pytest.mark.parametrize("key", list(LEVIS))
def test_path_independence_and_properties(key):
    levi = LEVIS[key]
    ps = standard_positive(levi)
    rng = random.Random(23)
    K = Fraction(1)
    checked = 0
    while checked < 100:
        seeds = [random_rational(rng) for _ in ps.simple]
        try:
            paths = recursion_paths(levi, ps, seeds, K)
            sol = solve_ff(levi, ps, seeds, K)
        except InadmissibleSeedError:
            continue
        checked += 1
        assert all(len(set(v)) == 1 for v in paths.values())
        c = sol.c
        for a, b in levi.composable:
            # zero denominators only between values +-K
            if c(a) + c(b) == 0:
                assert abs(c(a)) == K
            # the value K is closed under addition
            if c(a) == K and c(b) == K:
                assert c(qadd(a, b)) == K


@pytest.mark.parametrize("key", list(LEVIS))
def test_admissible_fraction(key):
    levi = LEVIS[key]
    rng = random.Random(31)
    ok = 0
    for _ in range(200):
        try:
            sol = solve_ff(levi, None, [random_rational(rng) for _ in levi.simple_quasiroots], 1)
        except InadmissibleSeedError:
            continue
        ok += 1
        assert verify_ff(levi, sol.c, 1)
    assert ok / 200 >= 0.9


def test_verify_ff_examples():
    assert verify_ff(A2, BracketCoefficients.constant(A2, Fraction(5)), 5)
    v = verify_ff(A2, BracketCoefficients.from_tuple(A2, [1, 1, 5]), 1)
    assert not v and ((1, 0), (0, 1)) in v.violations and not v.residual_zero


def test_parametrization_examples():
    p = Parametrization(frozenset(A2.quasiroots), frozenset(), (math.log(3), math.log(2)), 1)
    c = from_parametrization(A2, p)
    for got, want in zip(c.as_tuple(), (2, 3, 1.4)):
        assert abs(got - want) < 1e-12
    p = Parametrization(frozenset(), frozenset(A2.positive_quasiroots), (), Fraction(2))
    assert from_parametrization(A2, p) == BracketCoefficients.constant(A2, Fraction(2))
    p = Parametrization(frozenset(A2.quasiroots), frozenset(), (Fraction(1), Fraction(1)), 0)
    assert from_parametrization(A2, p).as_tuple() == (1, 1, Fraction(1, 2))


def test_extraction_examples():
    c = BracketCoefficients.from_tuple(A2, [Fraction(2), Fraction(3), Fraction(7, 5)])
    p = extract_parametrization(A2, c, 1)
    assert p.psi == frozenset(A2.quasiroots) and not p.b
    assert abs(p.lam[0] - math.log(3)) < 1e-9 and abs(p.lam[1] - math.log(2)) < 1e-9
    p = extract_parametrization(A2, BracketCoefficients.constant(A2, Fraction(1)), 1)
    assert not p.psi and p.b == frozenset(A2.positive_quasiroots) and p.lam == ()
    a1 = LEVIS["A1{}"]
    with pytest.raises(ExtractionFailedError):
        extract_parametrization(a1, BracketCoefficients(a1, {(1,): Fraction(1, 2)}), 1)
    with pytest.raises(PreconditionError):
        extract_parametrization(A2, BracketCoefficients.from_tuple(A2, [1, 1, 5]), 1)


@pytest.mark.parametrize("key", ["A2{}", "A3{2}", "B2{}", "G2{}"])
def test_parametrization_round_trip(key):
    levi = LEVIS[key]
    rng = random.Random(8)
    for _ in range(20):
        K = rng.uniform(0.5, 2.0)
        lam = tuple(rng.uniform(0.2, 2.0) for _ in levi.simple_quasiroots)
        p = Parametrization(frozenset(levi.quasiroots), frozenset(), lam, K)
        c = from_parametrization(levi, p)
        assert verify_ff(levi, c, K)
        back = from_parametrization(levi, extract_parametrization(levi, c, K))
        assert max(abs(back(q) - c(q)) for q in levi.quasiroots) < 1e-9


def test_mixed_parametrization():
    # psi = +-a1 on A2, the value-K coset is the class of a2 (which also holds a1+a2)
    psi = frozenset({(1, 0), (-1, 0)})
    from orbitforge import quotient_by

    quot = quotient_by(A2, psi)
    b = frozenset({quot.image((0, 1))})
    p = Parametrization(psi, b, (0.7, 0.0), 1.5)
    c = from_parametrization(A2, p)
    assert c((0, 1)) == c((1, 1)) == 1.5
    assert verify_ff(A2, c, 1.5)
    q = extract_parametrization(A2, c, 1.5)
    assert q.psi == psi and q.b == b


def test_tangent_basis_examples():
    c = BracketCoefficients.constant(A2, Fraction(1))
    basis = tangent_basis(A2, c, 1)
    assert [d.as_tuple() for d in basis] == [(1, 0, 0), (0, 1, 0)]
    a1 = LEVIS["A1{}"]
    assert [d.as_tuple() for d in tangent_basis(a1, BracketCoefficients.constant(a1, Fraction(1)), 1)] == [(1,)]
    bad = BracketCoefficients(A2, {(1, 0): Fraction(1), (1, 1): Fraction(1), (0, 1): Fraction(-1)})
    with pytest.raises(PreconditionError):
        tangent_basis(A2, bad, 1)
    good = BracketCoefficients(A2, bad.values, adapted_positive_system(A2, bad, 1))
    assert len(tangent_basis(A2, good, 1)) == 2


@pytest.mark.parametrize("entry", CATALOG, ids=entry_id)
def test_tangent_basis_size_is_b2(entry):
    levi = levi_of(entry)
    rng = random.Random(12)
    while True:
        try:
            sol = solve_ff(levi, None, [random_rational(rng, nonzero=True) for _ in levi.simple_quasiroots], 1)
            break
        except InadmissibleSeedError:
            pass
    assert len(tangent_basis(levi, sol.c, 1)) == entry["b2"]


def test_good_pair_classification():
    cases = {
        ("A3", (2,)): True,
        ("A3", ()): True,
        ("B2", (2,)): True,
        ("B2", (1,)): False,
        ("B2", ()): False,
        ("G2", ()): False,
        ("G2", (1,)): False,
        ("G2", (2,)): False,
        ("D4", (2,)): False,
        ("D4", (1, 3, 4)): False,
        ("D4", (2, 3, 4)): True,
        ("C3", (1, 2)): True,
        ("C3", (2, 3)): False,
    }
    for (t, gamma), want in cases.items():
        v = classify_good_pair(build_root_system(t), gamma)
        assert v.good is want, (t, gamma)
        assert "removed" in v.certificate
    v = classify_good_pair(build_root_system("B2"), ())
    assert v.certificate["highest_root_coefficients"] == {"a1": 1, "a2": 2}


def test_good_family_a2():
    fam = good_bracket_family(A2, [1, 1], 1)
    assert fam.f0.as_tuple() == (1, -1, 0)
    assert all(fam.checks.values())
    f0b, sb = bivector_from_coefficients(fam.f0), bivector_from_coefficients(fam.s)
    assert schouten(f0b, f0b) == -phi_M(A2)  # calibrated K^2 phi_M with K = 1
    assert schouten(f0b, sb).is_zero()
    for t in (0, 1, -1, Fraction(3, 7), Fraction(-3, 7)):
        for sign in (1, -1):
            m = fam.member(sign, t)
            assert phi_bracket_residual(A2, m, 1).is_zero()


@pytest.mark.parametrize("key", ["A1{}", "A2{1}", "A3{2}", "A3{1,3}", "B2{2}"])
def test_good_family_other_pairs(key):
    levi = LEVIS[key]
    fam = good_bracket_family(levi, [Fraction(1)] * len(levi.simple_quasiroots), Fraction(2))
    assert all(fam.checks.values())
    assert verify_ff(levi, fam.f0, 2)


def test_good_family_requires_good_pair():
    with pytest.raises(PreconditionError):
        good_bracket_family(LEVIS["B2{}"], [1, 1], 1)
