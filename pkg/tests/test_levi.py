from __future__ import annotations

import random
from fractions import Fraction

import pytest

from orbitforge import (
    BracketCoefficients,
    DegenerateOrbitError,
    ParameterError,
    PreconditionError,
    ResourceError,
    adapted_positive_system,
    betti_numbers,
    build_root_system,
    make_levi,
    quotient_by,
    standard_positive,
    subset_classify,
)
from orbitforge.levi import qadd

from conftest import CATALOG, entry_id, levi_of
from oracles import macdonald_betti


def A2(gamma=()):
    return make_levi(build_root_system("A2"), gamma)


def test_full_flag_a2():
    levi = A2()
    assert len(levi.quasiroots) == 6
    assert all(len(f) == 1 for f in levi.classes.values())
    assert levi.simple_quasiroots == [(1, 0), (0, 1)]


def test_cp2_fibers():
    levi = A2([1])
    assert set(levi.quasiroots) == {(1,), (-1,)}
    assert set(levi.fiber((1,))) == {(0, 1), (1, 1)}
    assert levi.dim_m == 4


def test_grassmannian_fiber():
    levi = make_levi(build_root_system("A3"), [1, 3])
    assert set(levi.quasiroots) == {(1,), (-1,)}
    assert len(levi.fiber((1,))) == 4


def test_gamma_equal_to_pi_is_degenerate():
    with pytest.raises(DegenerateOrbitError):
        make_levi(build_root_system("A2"), [1, 2])
    with pytest.raises(ParameterError):
        make_levi(build_root_system("A2"), [3])


@pytest.mark.parametrize("entry", CATALOG, ids=entry_id)
def test_levi_invariants(entry):
    levi = levi_of(entry)
    rs = levi.rs
    assert levi.dim_m == entry["dim_m"] == sum(len(f) for f in levi.classes.values())
    assert len(levi.levi_roots) + levi.dim_m == rs.n_roots
    for q in levi.quasiroots:
        assert sorted(levi.fiber(tuple(-x for x in q))) == sorted(rs.neg(r) for r in levi.fiber(q))
    # levi roots are exactly the roots in span(gamma)
    assert all(all(r[i] == 0 for i in levi.free) for r in levi.levi_roots)
    ps = standard_positive(levi)
    assert subset_classify(levi, ps.positives).kind == "semilinear"
    assert len(ps.simple) == rs.rank - len(levi.gamma) == entry["b2"]
    for q in ps.positives:
        assert all(x >= 0 for x in ps.coords[q])
    for a, b in levi.composable:
        assert levi.bracket_span_holds(a, b)


def test_subset_classify_examples():
    levi = A2()
    assert subset_classify(levi, [(1, 0), (-1, 0)]).kind == "linear"
    assert subset_classify(levi, [(1, 0), (0, 1), (1, 1)]).kind == "semilinear"
    v = subset_classify(levi, [(1, 0), (0, 1), (-1, -1)])
    assert v.kind == "neither" and v.witness == ((1, 0), (0, 1))
    with pytest.raises(ParameterError):
        subset_classify(levi, [(2, 0)])


def test_quotient_examples():
    levi = A2()
    q = quotient_by(levi, [])
    assert len(q.elements) == 6 and all(len(f) == 1 for f in q.fibers.values())
    q = quotient_by(levi, [(1, 0), (-1, 0)])
    assert len(q.elements) == 2
    assert q.image((0, 1)) == q.image((1, 1)) and q.image((1, 0)) is None
    assert quotient_by(levi, levi.quasiroots).elements == ()
    with pytest.raises(PreconditionError):
        quotient_by(levi, [(1, 0)])


def test_standard_positive_examples():
    ps = standard_positive(A2())
    assert set(ps.positives) == {(1, 0), (0, 1), (1, 1)} and set(ps.simple) == {(1, 0), (0, 1)}
    ps = standard_positive(A2([1]))
    assert ps.positives == ((1,),) and ps.simple == ((1,),)
    ps = standard_positive(make_levi(build_root_system("B2"), []))
    assert len(ps.positives) == 4 and len(ps.simple) == 2


def test_adapted_system_for_constant():
    levi = A2()
    c = BracketCoefficients.constant(levi, Fraction(1))
    ps = adapted_positive_system(levi, c, 1)
    assert set(ps.positives) == set(levi.positive_quasiroots)


def test_adapted_system_removes_zero_denominators():
    levi = A2()
    K = Fraction(2)
    # values K on the semilinear set {(1,0), (1,1), (0,-1)}
    c = BracketCoefficients(levi, {(1, 0): K, (1, 1): K, (0, 1): -K})
    ps = adapted_positive_system(levi, c, K)
    assert subset_classify(levi, ps.positives).kind == "semilinear"
    for a in ps.positives:
        for b in ps.positives:
            if qadd(a, b) in levi.qset:
                assert c(a) + c(b) != 0
    assert set(ps.positives) == {(1, 0), (1, 1), (0, -1)}


def test_adapted_system_generic_and_rank_one():
    levi = A2()
    c = BracketCoefficients(levi, {(1, 0): Fraction(2), (0, 1): Fraction(3), (1, 1): Fraction(7, 5)})
    ps = adapted_positive_system(levi, c, 1)
    assert subset_classify(levi, ps.positives).kind == "semilinear"
    a1 = make_levi(build_root_system("A1"), [])
    ps = adapted_positive_system(a1, BracketCoefficients(a1, {(1,): Fraction(-3)}), 1)
    assert ps.positives in (((1,),), ((-1,),))
    bad = BracketCoefficients(levi, {(1, 0): 1, (0, 1): 1, (1, 1): 5})
    with pytest.raises(PreconditionError):
        adapted_positive_system(levi, bad, 1)


@pytest.mark.parametrize("entry", CATALOG, ids=entry_id)
def test_betti_numbers_match_macdonald(entry):
    rs = build_root_system(entry["type"])
    b = betti_numbers(rs, entry["gamma"])
    assert b == macdonald_betti(rs.positive_roots, entry["gamma"]) == entry["betti"]
    assert b[0] == 1 and b[1] == entry["b2"]


def test_betti_examples_and_limit():
    assert betti_numbers(build_root_system("A2"), []) == [1, 2, 2, 1]
    assert betti_numbers(build_root_system("A2"), [1]) == [1, 1, 1]
    assert betti_numbers(build_root_system("A1"), []) == [1, 1]
    assert sum(betti_numbers(build_root_system("D4"), [2])) == 96
    with pytest.raises(ResourceError):
        betti_numbers(build_root_system("F4"), [], limit=100)


def test_json_keys():
    d = A2([1]).to_json()
    assert d["gamma"] == [1] and set(d["quasiroots"]) == {"1", "-1"}
    d = A2().to_json()
    assert "1,1" in d["quasiroots"] and d["simple_quasiroots"] == ["1,0", "0,1"]
