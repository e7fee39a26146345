"""
Command-line front end.

Exit codes: ``0`` success, ``2`` usage or input error, ``3`` numerical
failure (derivation did not converge, or a verified rule failed).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import mpmath

from . import asymptotic as asy
from .blocks import DerivationError
from .homotopy import HomotopyConfig, TraceError, derive_rule
from .quadrature import QuadratureRule, verify
from .rulefile import RuleFile, RuleFileError, format_decimal, load, load_knots, save
from .spline import KnotVector, SplineSpace, open_uniform, optimal_node_count

__all__ = ["main", "build_parser", "compare_report", "EXIT_OK", "EXIT_USAGE", "EXIT_NUMERIC"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

#: Digits shown in printed tables.
TABLE_DIGITS = 20
#: Element count of the derived rule that supplies boundary data for composition.
BOUNDARY_ELEMENTS = {(4, 0): 32, (6, 1): 16}


class UsageError(Exception):
    pass


# =============================================================================
# Parser
# =============================================================================
def _default_precision() -> str:
    mode = os.environ.get("GG_PRECISION", "double").strip().lower()
    return mode if mode in ("double", "extended") else "double"


def _add_space_args(p: argparse.ArgumentParser, knots: bool = True):
    p.add_argument("--degree", "-d", type=int, required=True, help="even spline degree")
    p.add_argument("--continuity", "-c", type=int, required=True, help="interior continuity")
    p.add_argument("--elements", "-n", type=int, help="number of uniform elements")
    p.add_argument("--domain", type=float, nargs=2, metavar=("A", "B"), help="domain [A, B]")
    if knots:
        p.add_argument("--knots", type=Path, help="JSON knot file (breakpoints, multiplicities)")


def _add_run_args(p: argparse.ArgumentParser):
    p.add_argument("--steps", type=int, default=HomotopyConfig.steps, help="continuation steps per trace")
    p.add_argument("--epsilon", type=float, default=HomotopyConfig.vanish_threshold,
                   help="node-removal threshold relative to the mean element length")
    p.add_argument("--precision", choices=("double", "extended"), default=None,
                   help="arithmetic for the final rule (default: $GG_PRECISION or double)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussgalerkin",
        description="Optimal quadrature rules for even-degree spline spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="derive a rule and print or save it")
    _add_space_args(g)
    _add_run_args(g)
    g.add_argument("--asymptotic", action="store_true",
                   help="compose from boundary data and the periodic pattern (uniform only)")
    g.add_argument("--out", type=Path, help="JSON rule file; a .csv companion is written alongside")
    g.add_argument("--format", choices=("table", "csv"), default="table")

    v = sub.add_parser("verify", help="check a rule file")
    v.add_argument("file", type=Path)

    c = sub.add_parser("compare", help="node counts versus element-wise Gauss-Legendre")
    _add_space_args(c, knots=False)

    a = sub.add_parser("asymptotic", help="print the periodic constants")
    a.add_argument("--degree", "-d", type=int, required=True)
    a.add_argument("--continuity", "-c", type=int, required=True)
    a.add_argument("--precision", choices=("double", "extended"), default=None)
    a.add_argument("--out", type=Path, help="write the constants as JSON")

    t = sub.add_parser("trace-log", help="derive a rule and emit one JSON line per continuation step")
    _add_space_args(t)
    _add_run_args(t)
    t.add_argument("--out", type=Path, help="log file (default: stdout)")
    return parser


# =============================================================================
# Helpers
# =============================================================================
def _check_pair(d: int, c: int):
    if d < 2 or d % 2:
        raise UsageError(f"degree must be even and at least 2, got {d}")
    if not 0 <= c < d:
        raise UsageError(f"continuity must satisfy 0 <= c < d, got c={c}, d={d}")


def _target(args) -> KnotVector:
    kv = _target_knots(args)
    if kv.n_elements < 2:
        raise UsageError("a single element is a polynomial space; use Gauss-Legendre")
    if args.continuity % 2 and kv.n_elements % 2:
        raise UsageError("odd continuity needs an even number of elements")
    return kv


def _target_knots(args) -> KnotVector:
    _check_pair(args.degree, args.continuity)
    knots = getattr(args, "knots", None)
    if knots is not None:
        if args.elements is not None:
            raise UsageError("give either --elements or --knots")
        return load_knots(knots, args.degree, args.continuity)
    if args.elements is None:
        raise UsageError("give --elements or --knots")
    if args.elements < 1:
        raise UsageError("--elements must be positive")
    dom = tuple(args.domain) if args.domain else (0.0, float(args.elements))
    if not dom[1] > dom[0]:
        raise UsageError("domain must satisfy A < B")
    return open_uniform(args.degree, args.continuity, args.elements, dom)


def _config(args) -> HomotopyConfig:
    try:
        return HomotopyConfig(steps=args.steps, vanish_threshold=args.epsilon,
                              precision_mode=args.precision or _default_precision())
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _asym_rule(d: int, c: int, dps: int = 40) -> asy.AsymptoticRule:
    if (d, c) == (4, 0):
        return asy.solve_asymptotic_4_0(dps)
    if (d, c) == (6, 1):
        return asy.solve_asymptotic_6_1(dps)
    raise UsageError(f"no asymptotic rule for (d, c) = ({d}, {c}); available: (4, 0), (6, 1)")


def _print_rule(rule: QuadratureRule, fmt: str, out=None):
    out = out if out is not None else sys.stdout
    if rule.extended:
        with mpmath.workdps(40):
            pairs = [(format_decimal(t, TABLE_DIGITS), format_decimal(w, TABLE_DIGITS))
                     for t, w in zip(rule.nodes_mp, rule.weights_mp)]
    else:
        pairs = [(repr(float(t)), repr(float(w))) for t, w in zip(rule.nodes, rule.weights)]
    if fmt == "csv":
        print("node,weight", file=out)
        for t, w in pairs:
            print(f"{t},{w}", file=out)
        return
    width = max(len(t) for t, _ in pairs)
    print(f"{'i':>4}  {'node':<{width}}  weight", file=out)
    for i, (t, w) in enumerate(pairs, 1):
        print(f"{i:>4}  {t:<{width}}  {w}", file=out)


def _derive(args, kv: KnotVector, cfg: HomotopyConfig, log=None) -> QuadratureRule:
    if getattr(args, "asymptotic", False):
        return _compose(args.degree, args.continuity, kv, cfg)
    return derive_rule(args.degree, args.continuity, kv, cfg, log=log)


def _compose(d: int, c: int, kv: KnotVector, cfg: HomotopyConfig) -> QuadratureRule:
    if not kv.is_uniform():
        raise UsageError("--asymptotic needs a uniform knot vector")
    asym = _asym_rule(d, c)
    nb = BOUNDARY_ELEMENTS[(d, c)]
    boundary = derive_rule(d, c, None, cfg, n_elements=nb)
    depth = asy.boundary_depth(boundary, asym)
    n = kv.n_elements
    if n % 2 or n < 2 * depth + 1:
        raise UsageError(f"--asymptotic needs an even element count of at least {2 * depth + 2}")
    return asy.compose_finite(asym, boundary, n, (kv.a, kv.b), depth)


# =============================================================================
# Commands
# =============================================================================
def cmd_generate(args) -> int:
    kv = _target(args)
    cfg = _config(args)
    rule = _derive(args, kv, cfg)
    rep = verify(rule)
    consts = None
    if getattr(args, "asymptotic", False):
        consts = _asym_rule(args.degree, args.continuity).as_dict()
    rf = RuleFile.from_rule(rule, args.continuity, consts, cfg.extended_dps)
    _print_rule(rule, args.format)
    print(f"# nodes {rule.m} ({rule.kind}), residual norm {rep.norm:.3e}, "
          f"max residual {rep.max_residual:.3e}", file=sys.stderr)
    if args.out is not None:
        for p in save(rf, args.out):
            print(f"# wrote {p}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    rf = load(args.file)
    rule = rf.to_rule()
    rep = verify(rule)
    mark = {True: "PASS", False: "FAIL"}
    print(f"file            {args.file}")
    print(f"space           degree {rule.space.degree}, {rule.space.knots.n_elements} elements, "
          f"dimension {rule.space.dimension}")
    print(f"max residual    {rep.max_residual:.3e}")
    print(f"residual norm   {rep.norm:.3e}")
    print(f"exact           {mark[rep.exact]}")
    print(f"optimal         {mark[rep.optimal]} ({rule.m} nodes, optimum {rep.expected_nodes} "
          f"{rep.expected_kind})")
    print(f"positive        {mark[rep.positive]}")
    print(f"overall         {mark[rep.passed]}")
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def compare_report(d: int, c: int, n_elements: int | None = None) -> dict:
    """
    Node counts of the optimal rule against element-wise Gauss-Legendre with
    ``ceil((d + 1) / 2)`` points per element.

    Without ``n_elements`` only the asymptotic per-element figures are given
    (available for ``(4, 0)`` and ``(6, 1)``).
    """
    _check_pair(d, c)
    classical = math.ceil((d + 1) / 2)
    out = {"degree": d, "continuity": c, "classical_per_element": classical}
    if n_elements is not None:
        if c % 2 and n_elements % 2:
            raise UsageError("odd continuity needs an even number of elements")
        m, kind = optimal_node_count(SplineSpace(d, open_uniform(d, c, n_elements)))
        ratio = m / (n_elements * classical)
        out.update(elements=n_elements, optimal=m, kind=kind, classical=n_elements * classical,
                   ratio_1d=ratio, ratio_3d=ratio**3)
    if (d, c) in BOUNDARY_ELEMENTS:
        per = {(4, 0): 2.0, (6, 1): 2.5}[(d, c)]
        out.update(asymptotic_per_element=per, asymptotic_ratio_1d=per / classical,
                   asymptotic_ratio_3d=(per / classical) ** 3)
    return out


def cmd_compare(args) -> int:
    r = compare_report(args.degree, args.continuity, args.elements)
    print(f"degree {r['degree']}, continuity {r['continuity']}")
    if "optimal" in r:
        print(f"elements            {r['elements']}")
        print(f"optimal nodes       {r['optimal']} ({r['kind']})")
        print(f"classical nodes     {r['classical']} ({r['classical_per_element']} per element)")
        print(f"1D ratio            {r['ratio_1d']:.4f}")
        print(f"3D ratio            {r['ratio_3d']:.4f}")
    if "asymptotic_per_element" in r:
        print(f"asymptotic nodes per element {r['asymptotic_per_element']:g} vs "
              f"{r['classical_per_element']} classical")
        print(f"asymptotic 1D ratio {r['asymptotic_ratio_1d']:.4f}")
        print(f"asymptotic 3D ratio {r['asymptotic_ratio_3d']:.4f}")
    elif "optimal" not in r:
        raise UsageError("give --elements (no asymptotic rule for this pair)")
    return EXIT_OK


def cmd_asymptotic(args) -> int:
    _check_pair(args.degree, args.continuity)
    mode = args.precision or _default_precision()
    digits = 40 if mode == "extended" else TABLE_DIGITS
    asym = _asym_rule(args.degree, args.continuity, dps=max(digits + 10, 40))
    closed = (asy.closed_form_4_0 if asym.c == 0 else asy.closed_form_6_1)(max(digits + 10, 40))
    print(f"asymptotic rule ({asym.d}, {asym.c}), values per unit element length")
    print(f"{'':4}{'numeric':<{digits + 8}}closed form")
    for key, val in asym.as_dict().items():
        print(f"{key:<4}{mpmath.nstr(val, digits):<{digits + 8}}{mpmath.nstr(closed[key], digits)}")
    if args.out is not None:
        with mpmath.workdps(digits + 10):
            doc = {"degree": asym.d, "continuity": asym.c,
                   "constants": {k: format_decimal(v, digits) for k, v in asym.as_dict().items()}}
        args.out.write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_trace_log(args) -> int:
    kv = _target(args)
    cfg = _config(args)
    stream = open(args.out, "w") if args.out is not None else sys.stdout
    try:
        def log(rec):
            stream.write(json.dumps(rec) + "\n")
        rule = derive_rule(args.degree, args.continuity, kv, cfg, log=log)
    finally:
        if stream is not sys.stdout:
            stream.close()
    print(f"# final rule: {rule.m} nodes, residual norm {verify(rule).norm:.3e}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "asymptotic": cmd_asymptotic,
    "trace-log": cmd_trace_log,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, RuleFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TraceError as exc:
        print(f"error: continuation failed at step {exc.step} (residual {exc.residual:.3e}): {exc}",
              file=sys.stderr)
        return EXIT_NUMERIC
    except DerivationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # output piped into a reader that closed early
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
