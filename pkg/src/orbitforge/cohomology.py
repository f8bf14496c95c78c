"""Invariant polyvectors ``C^k = (Lambda^k m)^l`` and the complexes ``(C, [[f, .]])``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import ParameterError, PreconditionError, ResourceError
from .levi import LeviDatum
from .moduli import verify_ff
from .multivec import BracketCoefficients, Multivector, ad_action, bivector_from_coefficients, schouten

MONOMIAL_LIMIT = 400_000  # stored weight-zero monomials per degree
VISIT_LIMIT = 500_000  # search nodes in the pruned enumeration
SUBSET_LIMIT = 10**12  # k-subsets of m beyond which no search is attempted


@dataclass
class ChainBasis:
    levi: LeviDatum
    degree: int
    monomials: List[Tuple[int, ...]]  # weight-zero k-vectors, columns of the vectors below
    vectors: List[List[Fraction]]
    free: List[int]  # coordinate of a kernel element = its entries at these columns
    basis: List[Multivector]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def coordinates(self, v: Multivector) -> List[Fraction]:
        """Coordinates of an invariant k-vector; raises if ``v`` is not in the span."""
        pos = self._positions()
        coords = [Fraction(v.terms.get(self.monomials[c], 0)) for c in self.free]
        check: Dict[Tuple[int, ...], Fraction] = {}
        for x, vec in zip(coords, self.vectors):
            if x:
                for i, y in enumerate(vec):
                    if y:
                        check[self.monomials[i]] = check.get(self.monomials[i], 0) + x * y
        for key in set(check) | set(v.terms):
            if key not in pos or check.get(key, 0) != v.terms.get(key, 0):
                raise PreconditionError("multivector is not in the span of the invariant basis")
        return coords

    def _positions(self) -> Dict[Tuple[int, ...], int]:
        if not hasattr(self, "_pos"):
            self._pos = {m: i for i, m in enumerate(self.monomials)}
        return self._pos


_BASIS_CACHE: Dict[Tuple[int, int], Tuple[LeviDatum, ChainBasis]] = {}


def _weight_zero_monomials(levi: LeviDatum, k: int) -> List[Tuple[int, ...]]:
    rs = levi.rs
    idx = levi.m_indices
    n = len(idx)
    if comb(n, k) > SUBSET_LIMIT:
        raise ResourceError(f"Lambda^{k} of a {n}-dimensional m is beyond the resource limit")
    if comb(n, k) > MONOMIAL_LIMIT:
        # too many subsets to scan; search with pruning on partial weights
        return _weight_zero_pruned(levi, k)
    roots = [rs.roots[i] for i in idx]
    out = []
    for combo in combinations(range(n), k):
        if not any(sum(roots[j][t] for j in combo) for t in range(rs.rank)):
            out.append(tuple(idx[j] for j in combo))
    return out


def _weight_zero_pruned(levi: LeviDatum, k: int) -> List[Tuple[int, ...]]:
    rs = levi.rs
    idx = levi.m_indices
    roots = [rs.roots[i] for i in idx]
    n = len(idx)
    # suffix[j][t]: how far roots j.. can still move coordinate t
    suffix = [[0] * rs.rank for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        suffix[j] = [a + abs(b) for a, b in zip(suffix[j + 1], roots[j])]
    out: List[Tuple[int, ...]] = []
    visited = [0]

    def rec(start: int, chosen: List[int], weight: List[int]) -> None:
        visited[0] += 1
        if visited[0] > VISIT_LIMIT:
            raise ResourceError("weight-zero enumeration exceeds the resource limit")
        if len(chosen) == k:
            if not any(weight):
                out.append(tuple(idx[j] for j in chosen))
                if len(out) > MONOMIAL_LIMIT:
                    raise ResourceError("weight-zero stratum exceeds the resource limit")
            return
        for j in range(start, n - (k - len(chosen)) + 1):
            w = [a + b for a, b in zip(weight, roots[j])]
            if any(abs(x) > b for x, b in zip(w, suffix[j + 1])):
                continue
            chosen.append(j)
            rec(j + 1, chosen, w)
            chosen.pop()

    rec(0, [], [0] * rs.rank)
    return out


def invariant_chain_basis(levi: LeviDatum, k: int) -> ChainBasis:
    if not 0 <= k <= levi.dim_m:
        raise ParameterError(f"degree {k} outside 0..{levi.dim_m}")
    hit = _BASIS_CACHE.get((id(levi), k))
    if hit is not None and hit[0] is levi:
        return hit[1]
    rs = levi.rs
    monomials = _weight_zero_monomials(levi, k)
    ncols = len(monomials)
    rows: List[Dict[int, Fraction]] = []
    gens = []
    for i in sorted(levi.gamma):
        a = rs.simple_roots[i - 1]
        gens += [rs.index[a], rs.index[rs.neg(a)]]
    for x in gens:
        # one sparse row per target monomial of weight +-gamma
        images: Dict[Tuple[int, ...], Dict[int, Fraction]] = {}
        for col, mono in enumerate(monomials):
            img = ad_action(x, Multivector(levi, k, {mono: Fraction(1)}))
            for key, c in img.terms.items():
                row = images.setdefault(key, {})
                row[col] = row.get(col, 0) + c
        rows.extend(images.values())
    vectors, free = linalg.kernel(rows, ncols)
    basis = [
        Multivector(levi, k, {monomials[i]: x for i, x in enumerate(vec) if x}) for vec in vectors
    ]
    cb = ChainBasis(levi, k, monomials, vectors, free, basis)
    _BASIS_CACHE[(id(levi), k)] = (levi, cb)
    return cb


def _require_solution(levi: LeviDatum, f: BracketCoefficients, K) -> None:
    if not verify_ff(levi, f, K):
        raise PreconditionError("f does not lie in X_{K^2}")


def _delta(levi: LeviDatum, f: BracketCoefficients, k: int) -> List[List[Fraction]]:
    src = invariant_chain_basis(levi, k)
    rows_n = invariant_chain_basis(levi, k + 1).dimension if k + 1 <= levi.dim_m else 0
    if rows_n == 0 or src.dimension == 0:
        return [[Fraction(0)] * src.dimension for _ in range(rows_n)]
    dst = invariant_chain_basis(levi, k + 1)
    F = bivector_from_coefficients(f)
    cols = [dst.coordinates(schouten(F, u)) for u in src.basis]
    return [[cols[j][i] for j in range(len(cols))] for i in range(rows_n)]


def delta_matrix(levi: LeviDatum, f: BracketCoefficients, K, k: int) -> List[List[Fraction]]:
    """Matrix of ``u -> [[f, u]]`` from ``C^k`` to ``C^{k+1}`` in the chain bases."""
    _require_solution(levi, f, K)
    return _delta(levi, f, k)


@dataclass
class CohomologyProfile:
    dims: List[int]
    chain_dims: List[int]
    f: BracketCoefficients
    K: object

    def euler_chains(self) -> int:
        return sum((-1) ** k * d for k, d in enumerate(self.chain_dims))

    def euler_cohomology(self) -> int:
        return sum((-1) ** k * d for k, d in enumerate(self.dims))

    def to_json(self) -> dict:
        from .rootsystem import frac_str

        return {
            "chain_dims": self.chain_dims,
            "h_dims": self.dims,
            "f": self.f.to_json(),
            "K": frac_str(self.K) if isinstance(self.K, (int, Fraction)) else repr(self.K),
        }


def cohomology_dims(levi: LeviDatum, f: BracketCoefficients, K, max_degree: Optional[int] = None) -> CohomologyProfile:
    """``dim H^k(M, delta_f)`` for ``k = 0..max_degree`` (default: all degrees)."""
    _require_solution(levi, f, K)
    top = levi.dim_m if max_degree is None else min(max_degree, levi.dim_m)
    chain_dims = [invariant_chain_basis(levi, k).dimension for k in range(top + 1)]
    ranks = []
    for k in range(top + 1):
        ranks.append(linalg.rank(_delta(levi, f, k)) if k < levi.dim_m else 0)
    dims = [chain_dims[k] - ranks[k] - (ranks[k - 1] if k else 0) for k in range(top + 1)]
    return CohomologyProfile(dims, chain_dims, f, K)


def pencil_cohomology(
    levi: LeviDatum,
    f0: BracketCoefficients,
    lam,
    samples: Sequence[Tuple[object, object]],
    K,
    max_degree: Optional[int] = None,
) -> List[CohomologyProfile]:
    """Profiles along ``f_{h,t} = h f0 + t s`` (with ``K`` replaced by ``h K``)."""
    from .multivec import kks

    s = kks(levi, lam)
    out = []
    for h, t in samples:
        h, t = Fraction(h), Fraction(t)
        if h == 0 and t == 0:
            raise ParameterError("the pencil sample (0, 0) is excluded")
        f = h * f0 + t * s
        out.append(cohomology_dims(levi, f, h * K, max_degree))
    return out
