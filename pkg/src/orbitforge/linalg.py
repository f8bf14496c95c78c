"""Exact linear algebra over the rationals.

Ranks use fraction-free (Bareiss) elimination on integer matrices; solves
use reduced row echelon form over ``Fraction``; kernels use sparse
incremental elimination, which suits the very sparse invariance systems.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

Matrix = List[List[Fraction]]


def _integer_rows(rows: Sequence[Sequence]) -> List[List[int]]:
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        den = lcm(*(x.denominator for x in row)) if row else 1
        out.append([int(x * den) for x in row])
    return out


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank by Bareiss elimination."""
    m = [r for r in _integer_rows(rows) if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    prev = 1
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][col]
        for i in range(r + 1, len(m)):
            a = m[i][col]
            row_i, row_r = m[i], m[r]
            m[i] = [(p * row_i[k] - a * row_r[k]) // prev for k in range(ncols)]
        prev = p
        r += 1
        if r == len(m):
            break
    return r


def rref(rows: Sequence[Sequence], ncols: Optional[int] = None) -> Tuple[Matrix, List[int]]:
    m = [[Fraction(x) for x in row] for row in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def kernel(rows: Sequence, ncols: int) -> Tuple[Matrix, List[int]]:
    """Kernel basis together with its free columns.

    Rows may be dense sequences or sparse ``{column: value}`` dicts.  Each
    basis vector is 1 at its own free column and 0 at the others, so the
    coordinates of a kernel element are its entries at the free columns.
    """
    # incremental sparse elimination; pivot rows stay fully reduced
    pivots: Dict[int, Dict[int, Fraction]] = {}
    for row in rows:
        items = row.items() if isinstance(row, dict) else enumerate(row)
        r = {c: Fraction(x) for c, x in items if x}
        for c in [c for c in r if c in pivots]:
            f = r.get(c)
            if not f:
                continue
            for k, y in pivots[c].items():
                v = r.get(k, 0) - f * y
                if v:
                    r[k] = v
                else:
                    r.pop(k, None)
        if not r:
            continue
        p = min(r)
        inv = 1 / r[p]
        r = {k: v * inv for k, v in r.items()}
        for other in pivots.values():
            f = other.get(p)
            if f:
                for k, y in r.items():
                    v = other.get(k, 0) - f * y
                    if v:
                        other[k] = v
                    else:
                        other.pop(k, None)
        pivots[p] = r
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for p, row in pivots.items():
            if f in row:
                v[p] = -row[f]
        basis.append(v)
    return basis, free


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis of ``{x : A x = 0}``; each vector is 1 at its own free column, 0 at the others."""
    return kernel(rows, ncols)[0]


def solve(rows: Sequence[Sequence], rhs: Sequence) -> Optional[List[Fraction]]:
    """One solution of ``A x = b`` (free variables set to 0), or None if inconsistent."""
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    reduced, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        x[p] = row[ncols]
    return x


def in_span(vectors: Sequence[Sequence], v: Sequence) -> bool:
    if not vectors:
        return not any(v)
    return rank(list(vectors) + [list(v)]) == rank(vectors)
