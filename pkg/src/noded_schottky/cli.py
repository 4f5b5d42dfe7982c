"""Command-line entry point: ``noded-schottky {check,sweep,limitset,witness}``.

Exit codes: 0 pass, 1 check failed, 2 usage or I/O error, 3 no witness
found within the budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .family import (
    NODED_POINT,
    Membership,
    ParameterPoint,
    domain_membership,
    evaluate_pinch,
    expected_pinch_kinds,
    generators,
    mirror_relation_table,
    mirrors,
    symmetry_report,
    w_orbit_check,
)
from .limitset import DEFAULT_SAMPLE_BUDGET, DEFAULT_VIEWPORT, limit_set_sample, render
from .moebius import CLASSIFY_TOL
from .witness import DEFAULT_SEARCH_BUDGET, witness_search

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NO_WITNESS = 0, 1, 2, 3
DEFAULT_SEED = 0
NODED_TOKEN = "noded"
PINCH_LABELS = ("g1", "g2", "g3", "g4", "g5", "g6")
CSV_COLUMNS = (["p", "r", "in_F"]
               + [f"t2_re_{g}" for g in PINCH_LABELS]
               + [f"t2_im_{g}" for g in PINCH_LABELS]
               + [f"length_{g}" for g in PINCH_LABELS])


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing

def _param(which: str):
    exact = NODED_POINT.p if which == "p" else NODED_POINT.r

    def parse(text: str) -> float:
        if text.strip().lower() == NODED_TOKEN:
            return exact
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number or {NODED_TOKEN!r}, got {text!r}")
        if not math.isfinite(value):
            raise argparse.ArgumentTypeError(f"{which} must be finite")
        return value

    return parse


def parse_point(text: str) -> ParameterPoint:
    """``"p,r"`` or the token ``noded``."""
    if text.strip().lower() == NODED_TOKEN:
        return NODED_POINT
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected 'p,r' or {NODED_TOKEN!r}, got {text!r}")
    try:
        return ParameterPoint(_param("p")(parts[0]), _param("r")(parts[1]))
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc))


def parse_grid(text: str) -> list[ParameterPoint]:
    """``"p0:p1:n,r0:r1:m"``: an n-by-m grid, p varying slowest."""
    try:
        pspec, rspec = text.split(",")
        p0, p1, n = pspec.split(":")
        r0, r1, m = rspec.split(":")
        ps = np.linspace(float(p0), float(p1), int(n))
        rs = np.linspace(float(r0), float(r1), int(m))
    except ValueError:
        raise UsageError(f"grid must look like 'p0:p1:n,r0:r1:m', got {text!r}")
    if len(ps) == 0 or len(rs) == 0:
        raise UsageError("grid is empty")
    return [ParameterPoint(float(p), float(r)) for p in ps for r in rs]


def parse_path(start: str, end: str, steps: int) -> list[ParameterPoint]:
    """Straight segment with ``steps`` samples including both endpoints."""
    if steps < 1:
        raise UsageError("steps must be at least 1")
    a, b = parse_point(start), parse_point(end)
    out = []
    for k in range(steps):
        t = k / (steps - 1) if steps > 1 else 1.0
        if k == steps - 1:
            out.append(b)
        else:
            out.append(ParameterPoint(a.p + t * (b.p - a.p), a.r + t * (b.r - a.r)))
    return out


def parse_viewport(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4 or not (vals[1] > vals[0] and vals[3] > vals[2]):
        raise UsageError(f"viewport must be 'xmin,xmax,ymin,ymax' with positive area, got {text!r}")
    return vals


# --------------------------------------------------------------------------
# payloads

def _cx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _num(x: float):
    return float(x) if math.isfinite(x) else None


def check_report(pt: ParameterPoint, tol: float = CLASSIFY_TOL) -> dict:
    """Every structural check at one parameter point, as a JSON-ready dict."""
    member = domain_membership(pt)
    report = {
        "p": pt.p,
        "r": pt.r,
        "membership": {
            "status": member.status.value,
            "violated": member.violated,
            "active": list(member.active),
        },
        "mirror_table": None,
        "symmetry": None,
        "orbit": None,
        "pinch": None,
        "verdict": "fail",
    }
    if not member.admissible:
        return report
    system = mirrors(pt)
    table = mirror_relation_table(system)
    report["mirror_table"] = {
        "passed": table.passed,
        "pairs": [{
            "pair": [c.i, c.j],
            "expected": c.expected,
            "relation": c.relation.kind.value,
            "inversive_product": c.relation.inversive_product,
            "angle": c.relation.angle,
            "passed": c.passed,
        } for c in table.checks],
    }
    sym = symmetry_report(system)
    report["symmetry"] = {
        "passed": all(s.passed for s in sym),
        "relations": [{"name": s.name, "distance": s.distance, "passed": s.passed} for s in sym],
    }
    orbit = w_orbit_check(system)
    report["orbit"] = {"passed": orbit.passed, "max_deviation": orbit.max_deviation}
    rows = evaluate_pinch(generators(system), tol)
    expected = expected_pinch_kinds(pt)
    pinch_ok = all(row.map_class.kind is kind for row, kind in zip(rows, expected))
    report["pinch"] = {
        "passed": pinch_ok,
        "rows": [{
            "label": row.label,
            "word": list(row.word),
            "trace_squared": _cx(row.trace_squared),
            "class": row.map_class.kind.value,
            "expected": kind.value,
            "translation_length": _num(row.translation_length),
        } for row, kind in zip(rows, expected)],
    }
    ok = table.passed and report["symmetry"]["passed"] and orbit.passed and pinch_ok
    report["verdict"] = "pass" if ok else "fail"
    return report


def _g(x: float) -> str:
    return format(x + 0.0, ".17g")


def sweep_rows(points, tol: float = CLASSIFY_TOL) -> list[list[str]]:
    rows = []
    for pt in points:
        member = domain_membership(pt)
        row = [_g(pt.p), _g(pt.r), "true" if member.admissible else "false"]
        if member.admissible:
            pinch = evaluate_pinch(generators(pt), tol)
            row += [_g(x.trace_squared.real) for x in pinch]
            row += [_g(x.trace_squared.imag) for x in pinch]
            row += [_g(x.translation_length) for x in pinch]
        else:
            row += [""] * 18
        rows.append(row)
    return rows


def sweep_csv(points, tol: float = CLASSIFY_TOL) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(sweep_rows(points, tol))
    return buf.getvalue()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str | bytes, out: str | None) -> None:
    if out is None:
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text)
        return
    try:
        with open(out, "wb") as fh:
            fh.write(text if isinstance(text, bytes) else text.encode("utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}")


def _point(args) -> ParameterPoint:
    if args.p is None or args.r is None:
        raise UsageError("--p and --r are required")
    return ParameterPoint(args.p, args.r)


# --------------------------------------------------------------------------
# subcommands

def cmd_check(args) -> int:
    report = check_report(_point(args), args.tol)
    _emit(_dump(report), args.out)
    return EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL


def cmd_sweep(args) -> int:
    if args.grid and (args.path_from or args.path_to):
        raise UsageError("give either --grid or --path-from/--path-to, not both")
    if args.grid:
        points = parse_grid(args.grid)
    elif args.path_from and args.path_to:
        points = parse_path(args.path_from, args.path_to, args.steps)
    else:
        raise UsageError("sweep needs --grid or both --path-from and --path-to")
    _emit(sweep_csv(points, args.tol), args.out)
    return EXIT_PASS


def cmd_limitset(args) -> int:
    pt = _point(args)
    if domain_membership(pt).status is Membership.OUTSIDE:
        print(f"warning: {pt} lies outside the parameter domain", file=sys.stderr)
    viewport = parse_viewport(args.viewport)
    if args.depth < 0:
        raise UsageError("depth must be non-negative")
    sample = limit_set_sample(generators(pt), args.depth, args.budget, args.seed, workers=args.workers)
    if args.depth == 0:
        print("warning: depth 0 gives an empty sample; writing an empty image", file=sys.stderr)
    data = render(sample, viewport, args.format)
    _emit(data, args.out)
    print(f"points {len(sample)} merged {sample.merged} visited {sample.words_visited} "
          f"skipped_near_parabolic {sample.near_parabolic} partial {str(sample.partial).lower()}",
          file=sys.stderr)
    return EXIT_PASS


def cmd_witness(args) -> int:
    pt = _point(args)
    if domain_membership(pt).status is Membership.OUTSIDE:
        print(f"warning: {pt} lies outside the parameter domain", file=sys.stderr)
    ms = mirrors(pt) if 0 < pt.p < 1 and 0 < pt.r < 1 else None
    report = witness_search(generators(ms if ms is not None else pt), args.budget, args.seed,
                            mirror_system=ms)
    _emit(_dump(report.to_dict(p=pt.p, r=pt.r)), args.out)
    return EXIT_PASS if report.found else EXIT_NO_WITNESS


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noded-schottky",
        description="Checks, sweeps, limit-set pictures and classical-witness search "
                    "for the two-parameter rank-3 noded Schottky family.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, point=True):
        if point:
            p.add_argument("--p", type=_param("p"), help=f"parameter p (number or '{NODED_TOKEN}')")
            p.add_argument("--r", type=_param("r"), help=f"parameter r (number or '{NODED_TOKEN}')")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--tol", type=float, default=CLASSIFY_TOL,
                       help="parabolic/elliptic classification band")

    p = sub.add_parser("check", help="run every structural check at one point (JSON)")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser(
        "sweep", help="pinch-word traces over a grid or a path (CSV)",
        description="CSV columns, in order: " + ", ".join(CSV_COLUMNS)
        + ". Floats carry 17 significant digits; rows outside the domain leave trace columns empty.")
    common(p, point=False)
    p.add_argument("--grid", help="'p0:p1:n,r0:r1:m'")
    p.add_argument("--path-from", help="'p,r' or 'noded'")
    p.add_argument("--path-to", help="'p,r' or 'noded'")
    p.add_argument("--steps", type=int, default=50, help="path samples including both ends")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limitset", help="render a limit-set sample (SVG or PPM)")
    common(p)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--budget", type=int, default=DEFAULT_SAMPLE_BUDGET)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--viewport", default=",".join(str(v) for v in DEFAULT_VIEWPORT),
                   help="'xmin,xmax,ymin,ymax'")
    p.add_argument("--format", choices=("svg", "ppm"), default="svg")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_limitset)

    p = sub.add_parser("witness", help="search for a classical Schottky circle system (JSON)")
    common(p)
    p.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET,
                   help="objective evaluations")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_witness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"noded-schottky: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
