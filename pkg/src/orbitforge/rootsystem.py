"""Simple root systems with a Chevalley basis.

Roots are integer coefficient vectors over the simple roots, numbered as in
Bourbaki.  The basis of ``g`` is indexed by integers: the roots come first
(positive roots ordered by height and then lexicographically, followed by the
negative roots in the same order), then the Cartan elements ``h_1..h_rank``.

Structure constants come from Carter's extraspecial-pair algorithm with
``N = +(p + 1)`` on every extraspecial pair.  They satisfy
``N(-a, -b) = -N(a, b)``, so ``e_a -> -e_{-a}``, ``h -> -h`` is an
automorphism (the Cartan involution).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

from .errors import ParameterError

Root = Tuple[int, ...]
LinComb = Dict[int, int]

_TYPE_RE = re.compile(r"^\s*([A-Ga-g])\s*_?\s*(\d+)\s*$")


@dataclass(frozen=True, order=True)
class SimpleType:
    series: str
    rank: int

    def __post_init__(self) -> None:
        legal = {
            "A": self.rank >= 1,
            "B": self.rank >= 2,
            "C": self.rank >= 3,
            "D": self.rank >= 4,
            "E": self.rank in (6, 7, 8),
            "F": self.rank == 4,
            "G": self.rank == 2,
        }
        if not legal.get(self.series, False):
            raise ParameterError(f"illegal simple type {self.series}{self.rank}")

    @classmethod
    def parse(cls, text: str) -> "SimpleType":
        m = _TYPE_RE.match(text)
        if not m:
            raise ParameterError(f"cannot parse simple type {text!r}")
        return cls(m.group(1).upper(), int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.series}{self.rank}"


def _simple_gram(t: SimpleType) -> List[List[Fraction]]:
    """Gram matrix of the simple roots, long roots of squared length 2."""
    n = t.rank
    g = [[Fraction(0)] * n for _ in range(n)]

    def link(i: int, j: int, value: Fraction) -> None:
        g[i][j] = g[j][i] = value

    norms = [Fraction(2)] * n
    edges: List[Tuple[int, int]] = []
    s = t.series
    if s == "A":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif s == "B":
        edges = [(i, i + 1) for i in range(n - 1)]
        norms[n - 1] = Fraction(1)
    elif s == "C":
        edges = [(i, i + 1) for i in range(n - 1)]
        norms = [Fraction(1)] * (n - 1) + [Fraction(2)]
    elif s == "D":
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    elif s == "E":
        # 1-3-4-5-6-7-8 with 2 attached to 4
        edges = [(0, 2), (1, 3), (2, 3)] + [(i, i + 1) for i in range(3, n - 1)]
    elif s == "F":
        edges = [(0, 1), (1, 2), (2, 3)]
        norms = [Fraction(2), Fraction(2), Fraction(1), Fraction(1)]
    elif s == "G":
        edges = [(0, 1)]
        norms = [Fraction(2, 3), Fraction(2)]
    for i in range(n):
        g[i][i] = norms[i]
    for i, j in edges:
        # adjacent simple roots: <a_l^v, a_s> = -1 for the longer root a_l
        link(i, j, -max(norms[i], norms[j]) / 2)
    return g


class RootSystem:
    """Roots, Chevalley structure constants and Killing pairings of a simple type."""

    def __init__(self, type: SimpleType) -> None:
        self.type = type
        self.rank = type.rank
        self.gram = _simple_gram(type)
        n = self.rank
        self.cartan_matrix: List[List[int]] = [
            [int(2 * self.gram[i][j] / self.gram[i][i]) for j in range(n)] for i in range(n)
        ]
        pos = _positive_roots(self.cartan_matrix)
        pos.sort(key=lambda r: (sum(r), tuple(-x for x in r)))
        self.positive_roots: List[Root] = pos
        self.roots: List[Root] = pos + [tuple(-x for x in r) for r in pos]
        self.index: Dict[Root, int] = {r: i for i, r in enumerate(self.roots)}
        self.n_pos = len(pos)
        self.n_roots = len(self.roots)
        self.dim = self.n_roots + n
        self.highest_root: Root = max(pos, key=sum)
        self._n_cache: Dict[Tuple[int, int], int] = {}
        self._extraspecial = self._find_extraspecial()
        self.n_table: Dict[Tuple[Root, Root], int] = {}
        for i, a in enumerate(self.roots):
            for j, b in enumerate(self.roots):
                s = self.add(a, b)
                if s is not None and s in self.index:
                    self.n_table[(a, b)] = self._n(i, j)
        self.bracket_table: List[List[LinComb]] = self._build_brackets()
        self.killing_pairing: Dict[Root, Fraction] = {
            r: self._killing(self.index[r], self.index[self.neg(r)]) for r in self.roots
        }

    # -- root arithmetic -------------------------------------------------
    @staticmethod
    def add(a: Sequence[int], b: Sequence[int]) -> Root | None:
        s = tuple(x + y for x, y in zip(a, b))
        return None if not any(s) else s

    @staticmethod
    def neg(a: Sequence[int]) -> Root:
        return tuple(-x for x in a)

    def is_root(self, v: Sequence[int]) -> bool:
        return tuple(v) in self.index

    def inner(self, a: Sequence[int], b: Sequence[int]) -> Fraction:
        n = self.rank
        return sum(
            (a[i] * b[j] * self.gram[i][j] for i in range(n) for j in range(n) if a[i] and b[j]),
            Fraction(0),
        )

    def height(self, a: Sequence[int]) -> int:
        return sum(a)

    def is_positive(self, a: Sequence[int]) -> bool:
        return sum(a) > 0

    def coroot_coords(self, a: Sequence[int]) -> Tuple[int, ...]:
        """Coefficients of the coroot of ``a`` over the simple coroots."""
        na = self.inner(a, a)
        out = []
        for j, c in enumerate(a):
            v = c * self.gram[j][j] / na
            assert v.denominator == 1
            out.append(int(v))
        return tuple(out)

    def pairing(self, a: Sequence[int], i: int) -> int:
        """``a(h_i)``, the value of the root on the i-th simple coroot."""
        return sum(c * self.cartan_matrix[i][j] for j, c in enumerate(a))

    # -- structure constants --------------------------------------------
    def _find_extraspecial(self) -> Dict[int, Tuple[int, int, int]]:
        ext: Dict[int, Tuple[int, int, int]] = {}
        for k in range(self.n_pos):
            xi = self.roots[k]
            for i in range(k):
                rest = tuple(x - y for x, y in zip(xi, self.roots[i]))
                j = self.index.get(rest)
                if j is not None and j < self.n_pos:
                    ext[k] = (i, j, self._string_down(i, j) + 1)
                    break
        return ext

    def _string_down(self, i: int, j: int) -> int:
        """Largest p with ``roots[j] - p * roots[i]`` a root."""
        a, b = self.roots[i], self.roots[j]
        p = 0
        while tuple(y - (p + 1) * x for x, y in zip(a, b)) in self.index:
            p += 1
        return p

    def _n(self, i: int, j: int) -> int:
        key = (i, j)
        if key in self._n_cache:
            return self._n_cache[key]
        a, b = self.roots[i], self.roots[j]
        s = self.add(a, b)
        if s is None or s not in self.index:
            val = 0
        elif i < self.n_pos and j < self.n_pos:
            val = self._n_positive(i, j, self.index[s])
        elif i >= self.n_pos and j >= self.n_pos:
            val = -self._n(self.index[self.neg(a)], self.index[self.neg(b)])
        else:
            c = self.neg(s)
            ci = self.index[c]
            # N(a,b)/(c,c) = N(b,c)/(a,a) = N(c,a)/(b,b) for a+b+c = 0;
            # pick the pair whose members share a sign
            if self.is_positive(c) == self.is_positive(a):
                val = self.inner(c, c) / self.inner(b, b) * self._n(ci, i)
            else:
                val = self.inner(c, c) / self.inner(a, a) * self._n(j, ci)
            assert Fraction(val).denominator == 1
            val = int(val)
        self._n_cache[key] = val
        return val

    def _n_positive(self, i: int, j: int, k: int) -> int:
        g, d, n_ext = self._extraspecial[k]
        if (i, j) == (g, d):
            return n_ext
        if (i, j) == (d, g):
            return -n_ext
        a, b, xi = self.roots[i], self.roots[j], self.roots[k]
        gam = self.roots[g]
        mg, md = self.index[self.neg(gam)], self.index[self.neg(self.roots[d])]
        total = Fraction(0)
        bg = tuple(x - y for x, y in zip(b, gam))
        if bg in self.index:
            total += Fraction(self._n(j, mg) * self._n(i, md)) / self.inner(bg, bg)
        ag = tuple(x - y for x, y in zip(a, gam))
        if ag in self.index:
            total += Fraction(self._n(mg, i) * self._n(j, md)) / self.inner(ag, ag)
        val = self.inner(xi, xi) / n_ext * total
        assert val.denominator == 1, (a, b, val)
        return int(val)

    def N(self, a: Sequence[int], b: Sequence[int]) -> int:
        """Structure constant with ``[e_a, e_b] = N(a, b) e_{a+b}`` (0 if a+b is no root)."""
        return self.n_table.get((tuple(a), tuple(b)), 0)

    # -- the bracket ----------------------------------------------------
    def _build_brackets(self) -> List[List[LinComb]]:
        n, nr = self.rank, self.n_roots
        table: List[List[LinComb]] = [[{} for _ in range(self.dim)] for _ in range(self.dim)]
        for i, a in enumerate(self.roots):
            for j, b in enumerate(self.roots):
                s = self.add(a, b)
                if s is None:
                    table[i][j] = {nr + k: c for k, c in enumerate(self.coroot_coords(a)) if c}
                elif s in self.index:
                    table[i][j] = {self.index[s]: self.n_table[(a, b)]}
            for k in range(n):
                v = self.pairing(a, k)
                if v:
                    table[nr + k][i] = {i: v}
                    table[i][nr + k] = {i: -v}
        return table

    def bracket(self, x: int, y: int) -> LinComb:
        return self.bracket_table[x][y]

    def basis_label(self, x: int) -> str:
        if x < self.n_roots:
            return "e" + _fmt_root(self.roots[x])
        return f"h{x - self.n_roots + 1}"

    def root_index(self, a: Sequence[int]) -> int:
        return self.index[tuple(a)]

    def cartan_index(self, i: int) -> int:
        """Basis index of ``h_i`` for 1-based ``i``."""
        if not 1 <= i <= self.rank:
            raise ParameterError(f"cartan index {i} outside 1..{self.rank}")
        return self.n_roots + i - 1

    def theta(self, x: int) -> Tuple[int, int]:
        """Cartan involution on a basis index: returns (sign, image index)."""
        if x < self.n_roots:
            return -1, self.index[self.neg(self.roots[x])]
        return -1, x

    def _killing(self, x: int, y: int) -> Fraction:
        # tr(ad x ad y) = sum_z coefficient of z in [x, [y, z]]
        tr = 0
        for z in range(self.dim):
            for w, c in self.bracket_table[y][z].items():
                tr += c * self.bracket_table[x][w].get(z, 0)
        return Fraction(tr)

    def killing(self, x: int, y: int) -> Fraction:
        return self._killing(x, y)

    def kappa(self, a: Sequence[int]) -> Fraction:
        """``kappa(e_a, e_{-a})``."""
        return self.killing_pairing[tuple(a)]

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        return {
            "type": str(self.type),
            "rank": self.rank,
            "cartan_matrix": self.cartan_matrix,
            "roots": [list(r) for r in self.roots],
            "highest_root": list(self.highest_root),
            "n_table": [[list(a), list(b), v] for (a, b), v in sorted(self.n_table.items())],
            "killing_pairing": [[list(r), frac_str(k)] for r, k in sorted(self.killing_pairing.items())],
        }

    def __repr__(self) -> str:
        return f"RootSystem({self.type})"

    @cached_property
    def simple_roots(self) -> List[Root]:
        return [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]


def _positive_roots(cartan: List[List[int]]) -> List[Root]:
    n = len(cartan)
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    found = set(simple)
    layer = list(simple)
    while layer:
        nxt = []
        for r in layer:
            for i in range(n):
                # p: how far down the a_i-string through r goes
                p = 0
                while True:
                    down = tuple(x - (p + 1) * (k == i) for k, x in enumerate(r))
                    if down in found:
                        p += 1
                    else:
                        break
                q = p - sum(c * cartan[i][j] for j, c in enumerate(r))
                if q > 0:
                    up = tuple(x + (k == i) for k, x in enumerate(r))
                    if up not in found:
                        found.add(up)
                        nxt.append(up)
        layer = nxt
    return list(found)


def build_root_system(type: SimpleType | str) -> RootSystem:
    if isinstance(type, str):
        type = SimpleType.parse(type)
    return _cached_root_system(type)


_CACHE: Dict[SimpleType, RootSystem] = {}


def _cached_root_system(t: SimpleType) -> RootSystem:
    rs = _CACHE.get(t)
    if rs is None:
        rs = _CACHE[t] = RootSystem(t)
    return rs


def lie_bracket(rs: RootSystem, x: int, y: int) -> Dict[int, Fraction]:
    """Bracket of two basis elements as a rational linear combination."""
    return {k: Fraction(v) for k, v in rs.bracket(x, y).items()}


def cartan_involution(rs: RootSystem, v):
    """Apply the Cartan involution ``E_a -> -E_{-a}`` to a multivector.

    In the Chevalley basis this is ``e_a -> -e_{-a}``, ``h_i -> -h_i``; the
    normalization factors drop out because ``kappa`` is symmetric in ``a``.
    """
    terms: Dict[Tuple[int, ...], Fraction] = {}
    for basis, coeff in v.terms.items():
        sign = 1
        image = []
        for x in basis:
            s, y = rs.theta(x)
            sign *= s
            image.append(y)
        key, perm_sign = sort_with_sign(image)
        if key is None:
            continue
        terms[key] = terms.get(key, Fraction(0)) + sign * perm_sign * coeff
    return v.with_terms(terms)


def sort_with_sign(items: Sequence[int]) -> Tuple[Tuple[int, ...] | None, int]:
    """Sort indices, returning the permutation sign; ``None`` on a repeat."""
    arr = list(items)
    sign = 1
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
        if j > 0 and arr[j - 1] == arr[j]:
            return None, 0
    return tuple(arr), sign


def frac_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_frac(text: str | int | Fraction) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str) or not re.fullmatch(r"\s*[+-]?\d+(\s*/\s*[+-]?\d+)?\s*", text):
        raise ParameterError(f"malformed rational {text!r}")
    try:
        return Fraction(text.replace(" ", ""))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"malformed rational {text!r}") from exc


def _fmt_root(r: Root) -> str:
    return "(" + ",".join(str(x) for x in r) + ")"
