"""Orbit data ``(g, Gamma)``: Levi roots, the complement ``m`` and quasiroots.

``Gamma`` is given by 1-based Bourbaki indices.  A quasiroot is stored as the
restriction of a root's coefficient vector to the coordinates outside
``Gamma``; this restriction is injective on classes, so no coset
representatives are needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .errors import (
    DegenerateOrbitError,
    InternalInconsistencyError,
    ParameterError,
    PreconditionError,
    ResourceError,
)
from .rootsystem import Root, RootSystem, frac_str

Quasiroot = Tuple[int, ...]

WEYL_LIMIT = 20000


def qkey(q: Sequence) -> str:
    """Canonical string encoding of a quasiroot (comma-joined coordinates)."""
    return ",".join(frac_str(x) if isinstance(x, Fraction) else str(x) for x in q)


def qadd(a: Sequence, b: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def qneg(a: Sequence) -> tuple:
    return tuple(-x for x in a)


@dataclass(frozen=True)
class PositiveSystem:
    """A semilinear set of positive quasiroots with its simple quasiroots.

    ``coords[q]`` is the unique nonnegative integer decomposition of ``q`` over
    ``simple``.
    """

    positives: Tuple[Quasiroot, ...]
    simple: Tuple[Quasiroot, ...]
    coords: Mapping[Quasiroot, Tuple[int, ...]] = field(repr=False)

    def height(self, q: Quasiroot) -> int:
        return sum(self.coords[q])

    def __contains__(self, q: object) -> bool:
        return q in self.coords


@dataclass(frozen=True)
class SubsetVerdict:
    kind: str  # "linear", "semilinear" or "neither"
    witness: Optional[Tuple[tuple, tuple]] = None


class LeviDatum:
    """The pair ``(g, Gamma)`` together with the quasiroot combinatorics."""

    def __init__(self, rs: RootSystem, gamma: Iterable[int]) -> None:
        gamma = frozenset(int(i) for i in gamma)
        if any(not 1 <= i <= rs.rank for i in gamma):
            raise ParameterError(f"gamma {sorted(gamma)} outside 1..{rs.rank}")
        if len(gamma) == rs.rank:
            raise DegenerateOrbitError("gamma equals all simple roots: the orbit is a point")
        self.rs = rs
        self.gamma: FrozenSet[int] = gamma
        self.free: Tuple[int, ...] = tuple(i for i in range(rs.rank) if i + 1 not in gamma)
        self.levi_roots: List[Root] = [r for r in rs.roots if not any(r[i] for i in self.free)]
        self.m_roots: List[Root] = [r for r in rs.roots if any(r[i] for i in self.free)]
        self.m_set = frozenset(self.m_roots)
        self.m_indices: List[int] = sorted(rs.index[r] for r in self.m_roots)
        self.dim_m = len(self.m_roots)

        classes: Dict[Quasiroot, List[Root]] = {}
        for r in self.m_roots:
            classes.setdefault(self.project(r), []).append(r)
        pos = sorted((q for q in classes if sum(q) > 0), key=lambda q: (sum(q), qneg(q)))
        self.positive_quasiroots: List[Quasiroot] = pos
        self.quasiroots: List[Quasiroot] = pos + [qneg(q) for q in pos]
        self.qset = frozenset(self.quasiroots)
        self.classes: Dict[Quasiroot, Tuple[Root, ...]] = {q: tuple(classes[q]) for q in self.quasiroots}
        r = len(self.free)
        self.simple_quasiroots: List[Quasiroot] = [tuple(int(i == j) for j in range(r)) for i in range(r)]
        self.composable: List[Tuple[Quasiroot, Quasiroot]] = [
            (a, b) for a in self.quasiroots for b in self.quasiroots if qadd(a, b) in self.qset
        ]
        # root-level triples (a, b) with a, b, a+b in m, used by the trivector formulas
        self.root_pairs: List[Tuple[Root, Root]] = []
        for a in self.m_roots:
            for b in self.m_roots:
                s = rs.add(a, b)
                if s is not None and s in self.m_set:
                    self.root_pairs.append((a, b))

    def project(self, r: Sequence[int]) -> Quasiroot:
        return tuple(r[i] for i in self.free)

    def label(self) -> str:
        g = ",".join(str(i) for i in sorted(self.gamma))
        return f"{self.rs.type}{{{g}}}"

    def fiber(self, q: Quasiroot) -> Tuple[Root, ...]:
        return self.classes[tuple(q)]

    def check_quasiroot(self, q: Sequence) -> Quasiroot:
        q = tuple(q)
        if q not in self.qset:
            raise ParameterError(f"{q} is not a quasiroot of {self.label()}")
        return q

    def bracket_span_holds(self, a: Quasiroot, b: Quasiroot) -> bool:
        """``[m_a, m_b]`` spans ``m_{a+b}`` (checked on structure constants)."""
        target = set(self.classes[qadd(a, b)])
        hit = set()
        for x in self.classes[a]:
            for y in self.classes[b]:
                s = self.rs.add(x, y)
                if s is not None and s in target and self.rs.N(x, y):
                    hit.add(s)
        return hit == target

    def to_json(self) -> dict:
        return {
            "type": str(self.rs.type),
            "gamma": sorted(self.gamma),
            "dim_m": self.dim_m,
            "quasiroots": {qkey(q): [list(r) for r in self.classes[q]] for q in self.quasiroots},
            "simple_quasiroots": [qkey(q) for q in self.simple_quasiroots],
        }

    def __repr__(self) -> str:
        return f"LeviDatum({self.label()})"


def make_levi(rs: RootSystem, gamma: Iterable[int]) -> LeviDatum:
    return LeviDatum(rs, gamma)


# -- subsets of a symmetric vector set --------------------------------------


def _is_linear(universe: Sequence[tuple], subset: Iterable[tuple]) -> bool:
    subset = set(subset)
    basis = list(subset)
    for q in universe:
        if q not in subset and linalg.in_span(basis, q):
            return False
    return True


def _semilinear_witness(universe: Sequence[tuple], subset: Iterable[tuple]) -> Optional[Tuple[tuple, tuple]]:
    subset = set(subset)
    uset = set(universe)
    ordered = [q for q in universe if q in subset]
    for x in ordered:
        for y in ordered:
            s = qadd(x, y)
            if s in uset and s not in subset:
                return (x, y)
    for x in ordered:
        if qneg(x) in subset:
            return (x, qneg(x))
    for x in universe:
        if x not in subset and qneg(x) not in subset:
            return (x, qneg(x))
    return None


def classify_subset(universe: Sequence[tuple], subset: Iterable[tuple]) -> SubsetVerdict:
    subset = set(subset)
    if _is_linear(universe, subset):
        return SubsetVerdict("linear")
    witness = _semilinear_witness(universe, subset)
    if witness is None:
        return SubsetVerdict("semilinear")
    return SubsetVerdict("neither", witness)


def subset_classify(levi: LeviDatum, S: Iterable[Sequence[int]]) -> SubsetVerdict:
    S = {levi.check_quasiroot(q) for q in S}
    return classify_subset(levi.quasiroots, S)


@dataclass(frozen=True)
class Quotient:
    """``Q / Psi``: nonzero images of ``Q`` under the projection along ``span(Psi)``."""

    elements: Tuple[tuple, ...]
    projection: Mapping[tuple, Optional[tuple]]
    fibers: Mapping[tuple, Tuple[tuple, ...]]

    def image(self, q: tuple) -> Optional[tuple]:
        return self.projection[q]


def _quotient_map(psi: Sequence[tuple], dim: int) -> List[List[Fraction]]:
    """Integer rows whose common kernel is ``span(psi)``."""
    if not psi:
        return [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    rows = linalg.nullspace([list(q) for q in psi], dim)
    out = []
    for row in rows:
        den = 1
        for x in row:
            den = den * x.denominator // _gcd(den, x.denominator)
        out.append([Fraction(int(x * den)) for x in row])
    return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def quotient_set(universe: Sequence[tuple], psi: Iterable[tuple]) -> Quotient:
    psi = sorted(set(psi))
    dim = len(universe[0]) if universe else 0
    rows = _quotient_map(psi, dim)
    projection: Dict[tuple, Optional[tuple]] = {}
    fibers: Dict[tuple, List[tuple]] = {}
    for q in universe:
        img = tuple(sum((r * x for r, x in zip(row, q)), Fraction(0)) for row in rows)
        img = tuple(int(x) if x.denominator == 1 else x for x in img)
        if not any(img):
            projection[q] = None
            continue
        projection[q] = img
        fibers.setdefault(img, []).append(q)
    elems = tuple(sorted(fibers, key=lambda v: (-_first_sign(v), tuple(abs(x) for x in v), v)))
    return Quotient(elems, projection, {k: tuple(v) for k, v in fibers.items()})


def _first_sign(v: tuple) -> int:
    for x in v:
        if x:
            return 1 if x > 0 else -1
    return 0


def quotient_by(levi: LeviDatum, psi: Iterable[Sequence[int]]) -> Quotient:
    psi = {levi.check_quasiroot(q) for q in psi}
    if not _is_linear(levi.quasiroots, psi):
        raise PreconditionError("psi is not a linear subset")
    return quotient_set(levi.quasiroots, psi)


# -- positive systems -------------------------------------------------------


def positive_system_from(universe: Sequence[tuple], positives: Iterable[tuple]) -> PositiveSystem:
    """Simple elements and decompositions of a semilinear set."""
    positives = set(positives)
    sums = {qadd(a, b) for a in positives for b in positives}
    simple = sorted((q for q in positives if q not in sums), key=lambda q: (sum(q), qneg(q)))
    cols = [list(s) for s in simple]
    if cols and linalg.rank(cols) < len(cols):
        raise InternalInconsistencyError("simple elements are linearly dependent")
    coords: Dict[tuple, Tuple[int, ...]] = {}
    for q in positives:
        rows = [[c[i] for c in cols] for i in range(len(q))]
        x = linalg.solve(rows, list(q))
        if x is None or any(v.denominator != 1 or v < 0 for v in x):
            raise InternalInconsistencyError(f"no unique nonnegative decomposition of {q}")
        coords[q] = tuple(int(v) for v in x)
    order = sorted(positives, key=lambda q: (sum(coords[q]), qneg(q)))
    return PositiveSystem(tuple(order), tuple(simple), coords)


def standard_positive(levi: LeviDatum) -> PositiveSystem:
    ps = positive_system_from(levi.quasiroots, levi.positive_quasiroots)
    assert list(ps.simple) == levi.simple_quasiroots
    return ps


def _pm_sign(x, K, tol: float = 1e-9) -> int:
    """+1 if x == K, -1 if x == -K, else 0 (exact for rationals)."""
    if isinstance(x, Fraction) and isinstance(K, (Fraction, int)):
        return 1 if x == K else (-1 if x == -K else 0)
    if abs(x - K) <= tol * max(1.0, abs(K)):
        return 1
    if abs(x + K) <= tol * max(1.0, abs(K)):
        return -1
    return 0


def ff_violations(levi: LeviDatum, value, K, tol: Optional[float] = None) -> List[Tuple[Quasiroot, Quasiroot]]:
    """Pairs (a, b) with a+b a quasiroot where ``c(a+b)(c(a)+c(b)) = c(a)c(b) + K^2`` fails.

    ``value`` maps a quasiroot to its coefficient.  Exact unless ``tol`` is given.
    """
    bad = []
    for a, b in levi.composable:
        ca, cb, cs = value(a), value(b), value(qadd(a, b))
        lhs = cs * (ca + cb)
        rhs = ca * cb + K * K
        if tol is None:
            if lhs != rhs:
                bad.append((a, b))
        elif abs(lhs - rhs) > tol * max(1.0, abs(rhs)):
            bad.append((a, b))
    return bad


def adapted_positive_system(levi: LeviDatum, c, K) -> PositiveSystem:
    """A positive system on which the recursion for ``c`` has no zero denominators.

    Positives are ``{q : xi(q) > 0}`` with ``xi = eta o proj + eps * height``,
    where ``eta`` is positive on the cosets carrying the value ``K``.
    """
    if K == 0:
        raise ParameterError("K must be nonzero")
    value = c.value
    exact = all(isinstance(value(q), Fraction) for q in levi.quasiroots)
    if ff_violations(levi, value, K, None if exact else 1e-9):
        raise PreconditionError("coefficients do not solve the phi-bracket equations")
    psi = [q for q in levi.quasiroots if _pm_sign(value(q), K) == 0]
    if not _is_linear(levi.quasiroots, psi):
        raise InternalInconsistencyError("set where c != +-K is not linear")
    quot = quotient_set(levi.quasiroots, psi)
    y_cls = set()
    for img, members in quot.fibers.items():
        signs = {_pm_sign(value(q), K) for q in members}
        if len(signs) != 1:
            raise InternalInconsistencyError("c is not constant on a coset of the quotient")
        if signs == {1}:
            y_cls.add(img)
    if classify_subset(quot.elements, y_cls).kind != "semilinear" and quot.elements:
        raise InternalInconsistencyError("cosets with value K do not form a semilinear set")

    eta: Optional[List[Fraction]] = None
    if quot.elements:
        ysys = positive_system_from(quot.elements, y_cls)
        eta = linalg.solve([list(s) for s in ysys.simple], [Fraction(1)] * len(ysys.simple))
        if eta is None or any(_dot(eta, y) <= 0 for y in y_cls):
            raise InternalInconsistencyError("no positive functional on the value-K cosets")
    outside = [abs(_dot(eta, quot.projection[q])) for q in levi.quasiroots if quot.projection[q] is not None]
    max_h = max(abs(sum(q)) for q in levi.quasiroots)
    eps = (min(outside) if outside else Fraction(1)) / (2 * max_h + 1)

    def xi(q: Quasiroot) -> Fraction:
        img = quot.projection[q]
        base = _dot(eta, img) if img is not None else Fraction(0)
        return base + eps * sum(q)

    positives = [q for q in levi.quasiroots if xi(q) > 0]
    ps = positive_system_from(levi.quasiroots, positives)
    for a in ps.positives:
        for b in ps.positives:
            if qadd(a, b) in levi.qset and value(a) + value(b) == 0:
                raise InternalInconsistencyError(f"adapted system still has zero denominator at {(a, b)}")
    return ps


def _dot(u: Optional[Sequence], v: Sequence) -> Fraction:
    if u is None:
        return Fraction(0)
    return sum((Fraction(a) * b for a, b in zip(u, v)), Fraction(0))


# -- Betti numbers of G/P ---------------------------------------------------


def betti_numbers(rs: RootSystem, gamma: Iterable[int], limit: int = WEYL_LIMIT) -> List[int]:
    """Even-degree Betti numbers of ``G/P_Gamma`` from minimal coset representatives.

    The cosets ``W/W_Gamma`` are the Weyl orbit of ``sum of fundamental weights
    outside Gamma``; the minimal representative of ``w`` has length equal to
    the number of positive roots on which ``w(lambda)`` is negative.
    """
    levi = LeviDatum(rs, gamma)
    n = rs.rank
    start = tuple(0 if i + 1 in levi.gamma else 1 for i in range(n))
    # alpha_j in fundamental-weight coordinates is column j of the Cartan matrix
    alpha = [tuple(rs.cartan_matrix[i][j] for i in range(n)) for j in range(n)]
    coroots = [rs.coroot_coords(a) for a in rs.positive_roots]
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for mu in frontier:
            for j in range(n):
                if mu[j]:
                    nu = tuple(m - mu[j] * a for m, a in zip(mu, alpha[j]))
                    if nu not in seen:
                        seen.add(nu)
                        nxt.append(nu)
                        if len(seen) > limit:
                            raise ResourceError(f"Weyl orbit exceeds {limit} points")
        frontier = nxt
    counts: Dict[int, int] = {}
    for mu in seen:
        length = sum(1 for cv in coroots if sum(c * m for c, m in zip(cv, mu)) < 0)
        counts[length] = counts.get(length, 0) + 1
    top = max(counts)
    return [counts.get(i, 0) for i in range(top + 1)]
