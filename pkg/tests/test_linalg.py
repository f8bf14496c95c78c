from __future__ import annotations

from fractions import Fraction

from hypothesis import given, settings, strategies as st

from orbitforge import linalg

fractions = st.fractions(min_value=-6, max_value=6, max_denominator=6)


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_cols).flatmap(
        lambda n: st.lists(st.lists(fractions, min_size=n, max_size=n), min_size=1, max_size=max_rows)
    )


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_bareiss_rank_equals_rref_rank(rows):
    assert linalg.rank(rows) == len(linalg.rref(rows)[1])


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_kernel_vectors_are_annihilated(rows):
    n = len(rows[0])
    basis, free = linalg.kernel(rows, n)
    assert len(basis) == n - linalg.rank(rows)
    for v, f in zip(basis, free):
        assert all(sum(a * x for a, x in zip(r, v)) == 0 for r in rows)
        assert [v[g] for g in free] == [Fraction(int(g == f)) for g in free]


@settings(max_examples=100, deadline=None)
@given(matrices(), st.data())
def test_solve_consistent_systems(rows, data):
    n = len(rows[0])
    x = data.draw(st.lists(fractions, min_size=n, max_size=n))
    rhs = [sum(a * b for a, b in zip(r, x)) for r in rows]
    sol = linalg.solve(rows, rhs)
    assert sol is not None
    assert [sum(a * b for a, b in zip(r, sol)) for r in rows] == rhs


def test_inconsistent_and_span():
    assert linalg.solve([[1, 1], [2, 2]], [1, 3]) is None
    assert linalg.in_span([[1, 2]], [2, 4])
    assert not linalg.in_span([[1, 2]], [2, 5])
    assert linalg.rank([[0, 0]]) == 0
