"""Moduli of invariant phi-brackets and good brackets on ``G/L``.

A coefficient map ``c`` lies in ``X_{K^2}`` when

    c(a+b) (c(a) + c(b)) = c(a) c(b) + K^2

for every pair of quasiroots whose sum is a quasiroot.  Solutions are built
recursively from values on simple quasiroots, parametrized by
``K coth(K lambda / 2)`` on a linear subset, and intersected with the
kernel of ``[[., s]]`` for the KKS bracket ``s`` to get good brackets.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import linalg
from .errors import (
    ExtractionFailedError,
    InadmissibleSeedError,
    InternalInconsistencyError,
    ParameterError,
    PreconditionError,
)
from .levi import (
    LeviDatum,
    PositiveSystem,
    Quasiroot,
    _is_linear,
    _pm_sign,
    classify_subset,
    ff_violations,
    positive_system_from,
    qadd,
    qkey,
    qneg,
    quotient_set,
    standard_positive,
)
from .multivec import (
    BracketCoefficients,
    bivector_from_coefficients,
    kks,
    linear_form_values,
    phi_bracket_residual,
    schouten,
)
from .rootsystem import RootSystem

FLOAT_TOL = 1e-9


@dataclass
class FFSolution:
    levi: LeviDatum
    positive: PositiveSystem
    K: object
    c: BracketCoefficients
    seeds: Dict[Quasiroot, object]


def _decompositions(levi: LeviDatum, ps: PositiveSystem, q: Quasiroot) -> List[Tuple[Quasiroot, Quasiroot]]:
    out = []
    pos = {p: i for i, p in enumerate(ps.positives)}
    for a in ps.positives:
        b = tuple(x - y for x, y in zip(q, a))
        # each unordered split once
        if b in ps and pos[a] < pos[b] and qadd(a, b) == q:
            out.append((a, b))
    return out


def _seed_map(ps: PositiveSystem, seeds: Union[Mapping, Sequence]) -> Dict[Quasiroot, object]:
    if isinstance(seeds, Mapping):
        out = {tuple(k): v for k, v in seeds.items()}
    else:
        out = dict(zip(ps.simple, seeds))
        if len(seeds) != len(ps.simple):
            raise ParameterError(f"expected {len(ps.simple)} seeds")
    if set(out) != set(ps.simple):
        raise ParameterError("seeds must be given exactly on the simple quasiroots")
    return {q: _exact(v) for q, v in out.items()}


def _exact(v):
    return Fraction(v) if isinstance(v, int) else v


def recursion_paths(
    levi: LeviDatum, ps: PositiveSystem, seeds: Union[Mapping, Sequence], K, rule=None
) -> Dict[Quasiroot, List[object]]:
    """Value of every positive quasiroot through every split ``q = a + b``.

    Raises InadmissibleSeedError on the first zero denominator.  ``rule`` maps
    ``(known values, a, b)`` to the value at ``a+b`` (default: the
    phi-bracket recursion).
    """
    seeds = _seed_map(ps, seeds)
    K = _exact(K)
    vals: Dict[Quasiroot, object] = dict(seeds)
    paths: Dict[Quasiroot, List[object]] = {q: [v] for q, v in seeds.items()}
    K2 = K * K
    for q in ps.positives:
        if q in vals:
            continue
        splits = _decompositions(levi, ps, q)
        if not splits:
            raise InternalInconsistencyError(f"{qkey(q)} has no split into positive quasiroots")
        results = []
        for a, b in splits:
            if rule is not None:
                results.append(rule(vals, a, b))
                continue
            den = vals[a] + vals[b]
            if den == 0:
                raise InadmissibleSeedError(
                    f"zero denominator c({qkey(a)}) + c({qkey(b)}) = 0", (a, b)
                )
            results.append((vals[a] * vals[b] + K2) / den)
        vals[q] = results[0]
        paths[q] = results
    return paths


def solve_ff(
    levi: LeviDatum,
    positive: Optional[PositiveSystem],
    seeds: Union[Mapping, Sequence],
    K,
) -> FFSolution:
    """Recursive solution of the phi-bracket equations from values on simple quasiroots.

    Every split of every positive quasiroot is evaluated; disagreement between
    splits, or any vanishing ``c(a) + c(b)`` for positive a, b with a+b a
    quasiroot, is an error.
    """
    ps = positive or standard_positive(levi)
    paths = recursion_paths(levi, ps, seeds, K)
    vals = {}
    for q, options in paths.items():
        if any(o != options[0] for o in options[1:]):
            raise InternalInconsistencyError(f"recursion paths disagree at {qkey(q)}")
        vals[q] = options[0]
    for a in ps.positives:
        for b in ps.positives:
            if qadd(a, b) in levi.qset and vals[a] + vals[b] == 0:
                raise InadmissibleSeedError(f"zero denominator at ({qkey(a)}, {qkey(b)})", (a, b))
    c = BracketCoefficients(levi, vals, ps)
    return FFSolution(levi, ps, K, c, _seed_map(ps, seeds))


@dataclass
class FFVerdict:
    ok: bool
    violations: List[Tuple[Quasiroot, Quasiroot]]
    residual_zero: bool

    def __bool__(self) -> bool:
        return self.ok


def verify_ff(levi: LeviDatum, c: BracketCoefficients, K, tol: Optional[float] = None) -> FFVerdict:
    """Check the equations pairwise and, independently, through ``[[f, f]] - K^2 phi_M``."""
    if tol is None and not c.is_exact():
        tol = FLOAT_TOL
    bad = ff_violations(levi, c.value, K, tol)
    residual = phi_bracket_residual(levi, c, K)
    if tol is None:
        res_ok = residual.is_zero()
    else:
        scale = max(1.0, max(abs(v) for v in c.values.values()) ** 2, abs(K) ** 2)
        res_ok = residual.max_abs() <= tol * scale
    return FFVerdict(not bad and res_ok, bad, res_ok)


# -- coth parametrization ---------------------------------------------------


@dataclass
class Parametrization:
    """``(Psi, B, lambda, K)``.

    ``lam`` is a linear functional on the quasiroot coordinates (one value per
    simple quasiroot of the standard system); only its values on ``Psi``
    matter.  It is empty when ``Psi`` is.
    """

    psi: FrozenSet[Quasiroot]
    b: FrozenSet[tuple]
    lam: Tuple
    K: object
    residual: float = 0.0

    def lam_at(self, q: Sequence) -> object:
        if not self.lam:
            return 0
        return sum(x * l for x, l in zip(q, self.lam))

    def to_json(self) -> dict:
        return {
            "psi": sorted(qkey(q) for q in self.psi),
            "b": sorted(qkey(q) for q in self.b),
            "lambda_approx": [float(x) if not isinstance(x, complex) else repr(x) for x in self.lam],
            "K": str(self.K),
            "residual_approx": self.residual,
        }


def _check_parametrization(levi: LeviDatum, p: Parametrization):
    psi = set(p.psi)
    for q in psi:
        levi.check_quasiroot(q)
    if not _is_linear(levi.quasiroots, psi):
        raise ParameterError("psi is not a linear subset")
    quot = quotient_set(levi.quasiroots, psi)
    if p.K == 0:
        if p.b:
            raise ParameterError("B must be empty when K = 0")
    elif quot.elements:
        if not set(p.b) <= set(quot.elements):
            raise ParameterError("B is not a subset of the quotient")
        if classify_subset(quot.elements, p.b).kind != "semilinear":
            raise ParameterError("B is not semilinear in the quotient")
    for q in psi:
        lam = p.lam_at(q)
        if lam == 0:
            raise ParameterError(f"lambda vanishes on {qkey(q)}")
        if p.K != 0:
            # lambda must avoid (2 pi i / K) Z
            k = complex(lam) * complex(p.K) / (2j * math.pi)
            if abs(k - round(k.real)) < 1e-12:
                raise ParameterError(f"lambda({qkey(q)}) lies in (2 pi i / K) Z")
    return quot


def _coth_value(K, lam):
    if isinstance(lam, complex) or isinstance(K, complex):
        return complex(K) / cmath.tanh(complex(K) * lam / 2)
    return float(K) / math.tanh(float(K) * float(lam) / 2)


def from_parametrization(levi: LeviDatum, p: Parametrization) -> BracketCoefficients:
    quot = _check_parametrization(levi, p)
    values = {}
    for q in levi.positive_quasiroots:
        if q in p.psi:
            lam = p.lam_at(q)
            if p.K == 0:
                values[q] = Fraction(1) / lam if isinstance(lam, (int, Fraction)) else 1 / lam
            else:
                values[q] = _coth_value(p.K, lam)
        elif p.K == 0:
            values[q] = Fraction(0)
        else:
            img = quot.projection[q]
            values[q] = p.K if img in p.b else -p.K
    return BracketCoefficients(levi, values)


def _basis_among(vectors: Sequence[tuple]) -> List[tuple]:
    basis: List[tuple] = []
    for v in vectors:
        if not linalg.in_span(basis, v):
            basis.append(v)
    return basis


def extract_parametrization(levi: LeviDatum, c: BracketCoefficients, K, tol: float = FLOAT_TOL) -> Parametrization:
    """Recover ``(Psi, B, lambda)`` from a solution (real lambda, principal branch)."""
    if K == 0:
        raise ParameterError("K must be nonzero")
    if not verify_ff(levi, c, K):
        raise PreconditionError("coefficients do not solve the phi-bracket equations")
    psi = frozenset(q for q in levi.quasiroots if _pm_sign(c.value(q), K, tol) == 0)
    if not _is_linear(levi.quasiroots, psi):
        raise InternalInconsistencyError("set where c != +-K is not linear")
    quot = quotient_set(levi.quasiroots, psi)
    b = frozenset(img for img, members in quot.fibers.items() if _pm_sign(c.value(members[0]), K, tol) == 1)
    if quot.elements and classify_subset(quot.elements, b).kind != "semilinear":
        raise InternalInconsistencyError("value-K cosets are not semilinear")
    if not psi:
        return Parametrization(psi, b, (), K, 0.0)

    Kf = float(K)
    lam_of: Dict[Quasiroot, float] = {}
    for q in psi:
        x = Kf / float(c.value(q))
        if not -1.0 < x < 1.0:
            raise ExtractionFailedError(f"c({qkey(q)}) has no real preimage under K coth(K x / 2)")
        lam_of[q] = 2.0 * math.atanh(x) / Kf
    ordered = [q for q in levi.quasiroots if q in psi]
    basis = _basis_among(ordered)
    A = np.array([[float(x) for x in q] for q in basis])
    y = np.array([lam_of[q] for q in basis])
    lam, *_ = np.linalg.lstsq(A, y, rcond=None)
    # measure additivity on the values: atanh is ill-conditioned as c -> K
    residual = max(abs(_coth_value(Kf, float(np.dot(lam, q))) - float(c.value(q))) for q in psi)
    if residual > tol * max(1.0, abs(Kf)):
        raise ExtractionFailedError(f"lambda is not additive on psi (residual {residual:.3g})")
    return Parametrization(psi, b, tuple(float(x) for x in lam), K, residual)


# -- tangent space of X_{K^2} ------------------------------------------------


def tangent_basis(levi: LeviDatum, c: BracketCoefficients, K) -> List[BracketCoefficients]:
    """Solutions ``d`` of the linearized equations, one per simple quasiroot.

    Built from unit seeds by ``d(a+b) = (d(a)(c(b)-c(a+b)) + d(b)(c(a)-c(a+b))) / (c(a)+c(b))``
    and each checked against ``[[f, d]] = 0``.
    """
    if K == 0:
        raise ParameterError("K must be nonzero")
    ps = c.positive
    for a in ps.positives:
        for b in ps.positives:
            if qadd(a, b) in levi.qset and c.value(a) + c.value(b) == 0:
                raise PreconditionError(
                    f"positive system not adapted: c({qkey(a)}) + c({qkey(b)}) = 0; use adapted_positive_system"
                )
    exact = c.is_exact()

    def rule(vals, a, b):
        s = qadd(a, b)
        ca, cb, cs = c.value(a), c.value(b), c.value(s)
        return (vals[a] * (cb - cs) + vals[b] * (ca - cs)) / (ca + cb)

    f = bivector_from_coefficients(c)
    basis = []
    for simple in ps.simple:
        seeds = {s: (Fraction(int(s == simple)) if exact else float(s == simple)) for s in ps.simple}
        paths = recursion_paths(levi, ps, seeds, K, rule=rule)
        vals = {}
        for q, options in paths.items():
            if any(not _close(o, options[0], exact) for o in options[1:]):
                raise InternalInconsistencyError(f"tangent recursion paths disagree at {qkey(q)}")
            vals[q] = options[0]
        d = BracketCoefficients(levi, vals, ps)
        br = schouten(f, bivector_from_coefficients(d))
        if (exact and not br.is_zero()) or (not exact and br.max_abs() > FLOAT_TOL):
            raise InternalInconsistencyError("tangent vector is not closed under [[f, .]]")
        basis.append(d)
    return basis


def _close(a, b, exact: bool) -> bool:
    return a == b if exact else abs(a - b) <= FLOAT_TOL * max(1.0, abs(b))


# -- good brackets ------------------------------------------------------------


@dataclass
class GoodVerdict:
    good: bool
    certificate: dict

    def to_json(self) -> dict:
        return {"good": self.good, "certificate": self.certificate}


def classify_good_pair(rs: RootSystem, gamma) -> GoodVerdict:
    gamma = frozenset(int(i) for i in gamma)
    if len(gamma) >= rs.rank or any(not 1 <= i <= rs.rank for i in gamma):
        raise ParameterError("gamma must be a proper subset of the simple roots")
    removed = [i + 1 for i in range(rs.rank) if i + 1 not in gamma]
    coeffs = {f"a{i}": rs.highest_root[i - 1] for i in removed}
    if rs.type.series == "A":
        return GoodVerdict(True, {"reason": "type A", "removed": removed, "highest_root_coefficients": coeffs})
    good = len(removed) in (1, 2) and all(v == 1 for v in coeffs.values())
    return GoodVerdict(
        good,
        {
            "reason": "one or two removed roots, each with coefficient 1 in the highest root"
            if good
            else "removed roots violate the count or coefficient-1 condition",
            "removed": removed,
            "highest_root_coefficients": coeffs,
        },
    )


@dataclass
class GoodFamily:
    """The good brackets ``+-f0 + t s`` for the KKS bracket ``s`` and a fixed K."""

    levi: LeviDatum
    f0: BracketCoefficients
    s: BracketCoefficients
    K: object
    lam: Tuple
    checks: Dict[str, bool] = field(default_factory=dict)

    def member(self, sign: int, t) -> BracketCoefficients:
        return sign * self.f0 + t * self.s

    def to_json(self) -> dict:
        return {
            "f0": self.f0.to_json(),
            "s": self.s.to_json(),
            "K": str(self.K),
            "components": ["+f0 + t s", "-f0 + t s"],
            "verification": self.checks,
        }


def _positive_triples(levi: LeviDatum) -> List[Tuple[Quasiroot, Quasiroot]]:
    rs = levi.rs
    seen = []
    for a, b in levi.root_pairs:
        if rs.is_positive(a) and rs.is_positive(b):
            pair = tuple(sorted((levi.project(a), levi.project(b))))
            if pair not in seen:
                seen.append(pair)
    return seen


def _signed_var(levi: LeviDatum, q: Quasiroot) -> Tuple[int, int]:
    pos = levi.positive_quasiroots
    if q in levi.qset and sum(q) > 0:
        return 1, pos.index(q)
    return -1, pos.index(qneg(q))


def _commutant_kernel(levi: LeviDatum, s: BracketCoefficients) -> List[List[Fraction]]:
    """Basis of ``{c : [[c, s]] = 0}`` among invariant bivectors (standard-positive coordinates)."""
    n = len(levi.positive_quasiroots)
    rows = []
    for a, b in _positive_triples(levi):
        ab = qadd(a, b)
        row = [Fraction(0)] * n
        sa, sb, ss = s.value(a), s.value(b), s.value(ab)
        # [[c, s]] coefficient is symmetric bilinear; linear in c with d = s fixed
        for q, coef in ((a, sb - ss), (b, sa - ss), (ab, -(sa + sb))):
            sign, i = _signed_var(levi, q)
            row[i] += sign * coef
        rows.append(row)
    return linalg.nullspace(rows, n)


def _quadratic_residuals(levi: LeviDatum, vec: Sequence, K) -> List:
    c = dict(zip(levi.positive_quasiroots, vec))
    out = []
    for a, b in _positive_triples(levi):
        ca, cb, cs = c[a], c[b], c[qadd(a, b)]
        out.append(cs * (ca + cb) - ca * cb - K * K)
    return out


def _rational_sqrt(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


def _solve_on_kernel(levi: LeviDatum, s_vec: List[Fraction], kernel: List[List[Fraction]], K) -> List[Fraction]:
    # complement of s inside the kernel
    comp = []
    span = [s_vec]
    for v in kernel:
        if not linalg.in_span(span, v):
            comp.append(v)
            span.append(v)
    if not comp:
        raise InternalInconsistencyError("kernel of [[., s]] contains only multiples of s")
    if len(comp) == 1:
        g = comp[0]
        q = _quadratic_residuals(levi, g, Fraction(0))
        # residual(a g) = a^2 q - K^2 on every triple
        mus = {Fraction(K * K) / x for x in q if x != 0}
        if len(mus) != 1 or any(x == 0 for x in q):
            raise InternalInconsistencyError("quadratic condition has no solution on the kernel")
        a = _rational_sqrt(mus.pop())
        if a is None:
            raise InternalInconsistencyError("good bracket is not rational for this lambda and K")
        return [a * x for x in g]
    return _numeric_kernel_solution(levi, comp, K)


def _numeric_kernel_solution(levi: LeviDatum, comp: List[List[Fraction]], K) -> List[Fraction]:
    from scipy.optimize import least_squares

    G = np.array([[float(x) for x in v] for v in comp])
    Kf = float(K)

    def resid(a):
        vec = a @ G
        return np.array(_quadratic_residuals(levi, list(vec), Kf), dtype=float)

    rng = random.Random(0)
    for _ in range(50):
        x0 = np.array([rng.uniform(-2, 2) for _ in comp])
        sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.max(np.abs(sol.fun)) > 1e-8:
            continue
        for bound in (10, 100, 1000, 10**4, 10**6):
            a = [Fraction(float(x)).limit_denominator(bound) for x in sol.x]
            vec = [sum((ai * v[i] for ai, v in zip(a, comp)), Fraction(0)) for i in range(len(comp[0]))]
            if not any(_quadratic_residuals(levi, vec, Fraction(K))):
                return vec
    raise InternalInconsistencyError("no exact good bracket found on the kernel")


def good_bracket_family(levi: LeviDatum, lam, K, t_samples: Sequence = (0, 1, -1, Fraction(3, 7), Fraction(-3, 7))) -> GoodFamily:
    """Good brackets compatible with the KKS bracket of ``lam``, verified exactly."""
    if K == 0:
        raise ParameterError("K must be nonzero")
    verdict = classify_good_pair(levi.rs, levi.gamma)
    if not verdict.good:
        raise PreconditionError(f"{levi.label()} is not a good pair")
    K = Fraction(K) if isinstance(K, (int, Fraction)) else K
    s = kks(levi, lam)
    lam_t = tuple(linear_form_values(levi, lam)[q] for q in levi.simple_quasiroots)
    if not _positive_triples(levi):
        f0 = BracketCoefficients.constant(levi, K)
    else:
        s_vec = list(s.as_tuple())
        kernel = _commutant_kernel(levi, s)
        f0 = BracketCoefficients.from_tuple(levi, _solve_on_kernel(levi, s_vec, kernel, K))
        f0 = _normalize_family_rep(levi, f0, s)
    checks = _verify_good(levi, f0, s, K, t_samples)
    if not all(checks.values()):
        raise InternalInconsistencyError(f"good bracket failed verification: {checks}")
    return GoodFamily(levi, f0, s, K, lam_t, checks)


def _normalize_family_rep(levi: LeviDatum, f0: BracketCoefficients, s: BracketCoefficients) -> BracketCoefficients:
    """Shift along ``s`` so the top positive quasiroot gets 0, then fix the sign."""
    top = levi.positive_quasiroots[-1]
    f0 = f0 + (-f0.value(top) / s.value(top)) * s
    first = next((v for v in f0.as_tuple() if v != 0), 1)
    return -f0 if first < 0 else f0


def _verify_good(levi, f0, s, K, t_samples) -> Dict[str, bool]:
    fb, sb = bivector_from_coefficients(f0), bivector_from_coefficients(s)
    checks = {
        "f0_phi_bracket": phi_bracket_residual(levi, f0, K).is_zero(),
        "f0_commutes_with_s": schouten(fb, sb).is_zero(),
        "s_poisson": schouten(sb, sb).is_zero(),
    }
    closure = True
    for sign in (1, -1):
        for t in t_samples:
            member = sign * f0 + Fraction(t) * s
            mb = bivector_from_coefficients(member)
            closure &= phi_bracket_residual(levi, member, K).is_zero() and schouten(mb, sb).is_zero()
    checks["t_shift_closure"] = closure
    return checks
