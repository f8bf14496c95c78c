"""``orbitforge`` command line: JSON reports on stdout, diagnostics on stderr.

Exit codes: 0 success, 1 usage error (bad flags, malformed rationals, illegal
type or gamma), 2 domain error (inadmissible seeds, pair not good, failed
extraction, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources
from typing import Any, Dict, List, Optional, Sequence

from .cohomology import cohomology_dims, pencil_cohomology
from .errors import OrbitForgeError, ParameterError
from .levi import LeviDatum, betti_numbers, make_levi, qkey, standard_positive
from .moduli import (
    Parametrization,
    classify_good_pair,
    extract_parametrization,
    from_parametrization,
    good_bracket_family,
    solve_ff,
    verify_ff,
)
from .multivec import BracketCoefficients, phi_bracket_residual, verify_cybe
from .rootsystem import build_root_system, frac_str, parse_frac

log = logging.getLogger("orbitforge")


class UsageError(Exception):
    pass


# -- argument parsing --------------------------------------------------------


def parse_gamma(text: str) -> List[int]:
    text = (text or "").strip()
    if not text:
        return []
    try:
        return sorted(int(x) for x in text.split(","))
    except ValueError:
        raise ParameterError(f"malformed gamma {text!r}; expected comma-separated indices") from None


def parse_scalar(text, allow_float: bool = False):
    """Rational string ``p`` or ``p/q``; decimals and floats only when ``allow_float``."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        if allow_float:
            return text
        raise ParameterError(f"float {text!r} where a rational string is required")
    try:
        return parse_frac(str(text))
    except ParameterError:
        if allow_float:
            try:
                return float(text)
            except ValueError:
                pass
        raise


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{what} is not valid JSON: {exc}") from None


def parse_quasiroot_key(levi: LeviDatum, key: str):
    """``a<i>`` (i-th simple quasiroot) or comma-joined coordinates."""
    key = key.strip()
    if key.startswith("a") and key[1:].isdigit():
        i = int(key[1:])
        if not 1 <= i <= len(levi.simple_quasiroots):
            raise ParameterError(f"no simple quasiroot {key}")
        return levi.simple_quasiroots[i - 1]
    try:
        q = tuple(int(x) for x in key.split(","))
    except ValueError:
        raise ParameterError(f"malformed quasiroot key {key!r}") from None
    return levi.check_quasiroot(q)


def parse_value_map(levi: LeviDatum, text: str, what: str, allow_float: bool = False) -> Dict:
    data = _load_json(text, what)
    if not isinstance(data, dict):
        raise ParameterError(f"{what} must be a JSON object")
    return {parse_quasiroot_key(levi, k): parse_scalar(v, allow_float) for k, v in data.items()}


def parse_vector(text: str, what: str, allow_float: bool = False) -> List:
    text = text.strip()
    items = _load_json(text, what) if text.startswith("[") else text.split(",")
    if not isinstance(items, list):
        raise ParameterError(f"{what} must be a list")
    return [parse_scalar(x, allow_float) for x in items]


def parse_seeds(levi: LeviDatum, text: str):
    """A JSON object keyed by simple quasiroot, or a list in simple-quasiroot order."""
    if text.strip().startswith("{"):
        return parse_value_map(levi, text, "--seeds")
    seeds = parse_vector(text, "--seeds")
    if len(seeds) != len(levi.simple_quasiroots):
        raise ParameterError(f"--seeds needs {len(levi.simple_quasiroots)} values")
    return seeds


def parse_samples(text: str) -> List[tuple]:
    data = _load_json(text, "--samples")
    if not isinstance(data, list) or any(not isinstance(p, list) or len(p) != 2 for p in data):
        raise ParameterError("--samples must be a JSON list of [h, t] pairs")
    return [(parse_scalar(h), parse_scalar(t)) for h, t in data]


def _levi(args) -> LeviDatum:
    if not args.type:
        raise UsageError("--type is required")
    return make_levi(build_root_system(args.type), parse_gamma(args.gamma))


def _coefficients(levi: LeviDatum, args, allow_float: bool = False) -> BracketCoefficients:
    if not args.coeffs:
        raise UsageError("--coeffs is required")
    vals = parse_value_map(levi, args.coeffs, "--coeffs", allow_float)
    return BracketCoefficients(levi, vals)


def _coeff_payload(c: BracketCoefficients) -> Dict[str, Any]:
    if c.is_exact():
        return {"c": c.to_json()}
    return {"c_approx": {qkey(q): float(c.value(q)) for q in c.levi.positive_quasiroots}}


# -- commands ----------------------------------------------------------------


def cmd_root_system(args):
    rs = build_root_system(args.type)
    result = rs.to_json()
    result["counts"] = {"positive_roots": rs.n_pos, "roots": rs.n_roots, "dimension": rs.dim}
    return result, None


def cmd_orbit(args):
    levi = _levi(args)
    ps = standard_positive(levi)
    result = levi.to_json()
    result["label"] = levi.label()
    result["positive_quasiroots"] = [qkey(q) for q in ps.positives]
    result["betti"] = betti_numbers(levi.rs, levi.gamma)
    return result, None


def cmd_solve_ff(args):
    levi = _levi(args)
    K = parse_scalar(args.K)
    if not args.seeds:
        raise UsageError("--seeds is required")
    sol = solve_ff(levi, None, parse_seeds(levi, args.seeds), K)
    verdict = verify_ff(levi, sol.c, K)
    checks = {"ff_pairwise": not verdict.violations, "schouten_residual_zero": verdict.residual_zero}
    return {"c": sol.c.to_json(), "K": frac_str(K)}, checks


def cmd_verify_ff(args):
    levi = _levi(args)
    K = parse_scalar(args.K, allow_float=True)
    c = _coefficients(levi, args, allow_float=True)
    verdict = verify_ff(levi, c, K)
    result = {
        "ok": verdict.ok,
        "violations": [[qkey(a), qkey(b)] for a, b in verdict.violations],
    }
    return result, {"ff_pairwise": not verdict.violations, "schouten_residual_zero": verdict.residual_zero}


def cmd_parametrize(args):
    levi = _levi(args)
    K = parse_scalar(args.K, allow_float=True)
    if args.coeffs:
        c = _coefficients(levi, args, allow_float=True)
        p = extract_parametrization(levi, c, K)
        back = from_parametrization(levi, p)
        err = max((abs(float(back.value(q)) - float(c.value(q))) for q in levi.positive_quasiroots), default=0.0)
        return {"direction": "backward", "parametrization": p.to_json(), "roundtrip_error_approx": err}, {
            "roundtrip_within_tolerance": err <= 1e-9 * max(1.0, max(abs(float(v)) for v in c.values.values()))
        }
    if args.lam is None:
        raise UsageError("parametrize needs --lambda (forward) or --coeffs (backward)")
    lam = tuple(parse_vector(args.lam, "--lambda", allow_float=True))
    if args.psi is None:
        psi = frozenset(levi.quasiroots)
    else:
        keys = _load_json(args.psi, "--psi")
        psi = frozenset(parse_quasiroot_key(levi, k) for k in keys) if keys else frozenset()
        psi = psi | frozenset(tuple(-x for x in q) for q in psi)
    b = frozenset()
    if args.b:
        b = frozenset(tuple(int(x) for x in k.split(",")) for k in _load_json(args.b, "--b"))
    p = Parametrization(psi, b, lam if psi else (), K)
    c = from_parametrization(levi, p)
    verdict = verify_ff(levi, c, K)
    return {"direction": "forward", **_coeff_payload(c)}, {
        "ff_pairwise": not verdict.violations,
        "schouten_residual_zero": verdict.residual_zero,
    }


def cmd_good(args):
    levi = _levi(args)
    verdict = classify_good_pair(levi.rs, levi.gamma)
    result: Dict[str, Any] = verdict.to_json()
    checks = None
    if verdict.good and not args.no_family:
        K = parse_scalar(args.K)
        lam = parse_vector(args.lam, "--lambda") if args.lam else [Fraction(1)] * len(levi.simple_quasiroots)
        fam = good_bracket_family(levi, lam, K)
        result["family"] = fam.to_json()
        checks = dict(fam.checks)
    return result, checks


def cmd_cohomology(args):
    levi = _levi(args)
    K = parse_scalar(args.K)
    if args.samples:
        if args.lam is None:
            raise UsageError("pencil mode needs --lambda")
        lam = parse_vector(args.lam, "--lambda")
        fam = good_bracket_family(levi, lam, K)
        profiles = pencil_cohomology(levi, fam.f0, lam, parse_samples(args.samples), K, args.max_degree)
        samples = parse_samples(args.samples)
        out = []
        for (h, t), prof in zip(samples, profiles):
            out.append({"h": frac_str(h), "t": frac_str(t), **prof.to_json()})
        checks = dict(fam.checks)
        checks["h2_equals_b2"] = all(
            len(p.dims) > 2 and p.dims[2] == len(levi.simple_quasiroots) for p in profiles
        )
        return {"mode": "pencil", "f0": fam.f0.to_json(), "profiles": out}, checks
    if args.coeffs:
        c = _coefficients(levi, args)
    elif args.seeds:
        c = solve_ff(levi, None, parse_seeds(levi, args.seeds), K).c
    else:
        c = BracketCoefficients.constant(levi, K)
    prof = cohomology_dims(levi, c, K, args.max_degree)
    checks = {"verify_ff": True}
    if args.max_degree is None:
        checks["euler_characteristic"] = prof.euler_chains() == prof.euler_cohomology()
    return {"mode": "single", **prof.to_json()}, checks


def cmd_verify_cybe(args):
    rs = build_root_system(args.type)
    phi, ok = verify_cybe(rs)
    return {"invariant": ok, "r_bracket": phi.to_json()}, {"ad_invariant": ok}


def load_catalog() -> List[dict]:
    text = resources.files("orbitforge").joinpath("data/catalog.json").read_text()
    return json.loads(text)["entries"]


def catalog_key(entry: dict) -> str:
    return f"{entry['type']}{{{','.join(str(i) for i in entry['gamma'])}}}"


def check_catalog_entry(entry: dict) -> Dict[str, Any]:
    levi = make_levi(build_root_system(entry["type"]), entry["gamma"])
    good = classify_good_pair(levi.rs, levi.gamma).good
    betti = betti_numbers(levi.rs, levi.gamma)
    c = BracketCoefficients.constant(levi, Fraction(1))
    h2 = cohomology_dims(levi, c, 1, max_degree=2).dims[2]
    checks = {
        "dim_m": levi.dim_m == entry["dim_m"],
        "good": good == entry["good"],
        "betti": betti == entry["betti"],
        "h2": h2 == entry["b2"],
        "calibrated_phi": phi_bracket_residual(levi, c, 1).is_zero(),
    }
    return {"key": catalog_key(entry), "good": good, "betti": betti, "h2": h2, "checks": checks}


def cmd_catalog(args):
    entries = load_catalog()
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(check_catalog_entry, entries))
    else:
        rows = [check_catalog_entry(e) for e in entries]
    rows.sort(key=lambda r: r["key"])
    checks = {r["key"]: all(r["checks"].values()) for r in rows}
    return {"entries": rows}, checks


COMMANDS = {
    "root-system": cmd_root_system,
    "orbit": cmd_orbit,
    "solve-ff": cmd_solve_ff,
    "verify-ff": cmd_verify_ff,
    "parametrize": cmd_parametrize,
    "good": cmd_good,
    "cohomology": cmd_cohomology,
    "verify-cybe": cmd_verify_cybe,
    "catalog": cmd_catalog,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orbitforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--type", required=name not in ("catalog",))
        p.add_argument("--gamma", default="")
        p.add_argument("--K", default="1")
        p.add_argument("--seeds")
        p.add_argument("--coeffs")
        p.add_argument("--lambda", dest="lam")
        p.add_argument("--psi")
        p.add_argument("--b")
        p.add_argument("--samples")
        p.add_argument("--max-degree", type=int)
        p.add_argument("--no-family", action="store_true")
        p.add_argument("--out")
        p.add_argument("--jobs", type=int, default=1)
    return parser


def _request_echo(args) -> Dict[str, Any]:
    skip = {"command", "out", "jobs"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v not in (None, False)}


def run(argv: Optional[Sequence[str]] = None) -> tuple:
    """Execute one command; returns ``(exit code, report dict)``."""
    parser = build_parser()
    started = time.perf_counter()
    report: Dict[str, Any] = {}
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        report["command"] = args.command
        report["request"] = _request_echo(args)
        log.info("running %s", args.command)
        result, checks = COMMANDS[args.command](args)
        report["result"] = result
        if checks is not None:
            report["verification"] = {"checks": checks, "verified": all(checks.values())}
        code = 0
    except (UsageError, ParameterError) as exc:
        report["error"] = {"kind": "usage", "type": type(exc).__name__, "message": str(exc)}
        code = 1
    except OrbitForgeError as exc:
        report["error"] = {"kind": "domain", "type": type(exc).__name__, "message": str(exc)}
        code = 2
    log.debug("exit code %d", code)
    report["timing"] = {"elapsed_approx": round(time.perf_counter() - started, 6)}
    report["exit_code"] = code
    return code, report


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("ORBITFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    code, report = run(argv)
    if "error" in report:
        print(f"orbitforge: {report['error']['message']}", file=sys.stderr)
    text = json.dumps(report, sort_keys=True, indent=2)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--out")
    out = pre.parse_known_args(argv)[0].out if code != 1 else None
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        log.info("report written to %s", out)
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
