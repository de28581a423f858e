"""Command-line interface.

Subcommands: classify, hopf, cycle, portrait, scan.  Exit codes: 0 success,
2 invalid arguments (with usage on stderr), 1 analysis failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .local import hopf_analysis, lyapunov_procedural
from .model import Params, classify_case, discriminants, finite_singular_points
from .numerics import (
    GridSpec,
    IntegrationFailure,
    IntegratorConfig,
    NoReturnError,
    conjecture_scan,
    detect_limit_cycle,
    scan_to_csv,
)
from .portrait import build_portrait, render_svg, write_report


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kportrait",
        description=(
            "Classify and render the global dynamics of the cubic predator-prey "
            "system x' = x(-x^2 + (1-b)x - y + b), y' = y((c-delta)x - delta*b) "
            "on the positive quarter of the Poincare disc."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cls = sub.add_parser("classify", help="case, region and portrait letter")
    cls.add_argument("--b", required=True)
    cls.add_argument("--c", required=True)
    cls.add_argument("--delta", required=True)
    cls.add_argument(
        "--exact",
        action="store_true",
        help="treat inputs as exact rationals (fractions like 3/10 are accepted)",
    )
    cls.set_defaults(func=_cmd_classify)

    hop = sub.add_parser("hopf", help="Hopf data at the critical parameter b0")
    hop.add_argument("--c", required=True)
    hop.add_argument("--delta", required=True)
    hop.set_defaults(func=_cmd_hopf)

    cyc = sub.add_parser("cycle", help="limit-cycle detection via the return map")
    cyc.add_argument("--b", required=True)
    cyc.add_argument("--c", required=True)
    cyc.add_argument("--delta", required=True)
    cyc.set_defaults(func=_cmd_cycle)

    por = sub.add_parser("portrait", help="build the portrait; write SVG and JSON")
    por.add_argument("--b", required=True)
    por.add_argument("--c", required=True)
    por.add_argument("--delta", required=True)
    por.add_argument("--out", help="SVG output path")
    por.add_argument("--report", help="JSON report output path")
    por.set_defaults(func=_cmd_portrait)

    scn = sub.add_parser("scan", help="no-cycle evidence scan over a parameter grid")
    scn.add_argument(
        "--grid",
        required=True,
        help="bmin:bmax:n,cmin:cmax:n,dmin:dmax:n (KPORTRAIT_THREADS overrides --jobs)",
    )
    scn.add_argument("--jobs", type=int, default=1)
    scn.add_argument("--out", required=True, help="CSV output path")
    scn.set_defaults(func=_cmd_scan)
    return parser


def _parse_value(parser: argparse.ArgumentParser, name: str, text: str, exact: bool):
    try:
        return Fraction(text) if exact else float(text)
    except (ValueError, ZeroDivisionError):
        parser.error(f"argument --{name}: invalid number {text!r}")


def _params(parser: argparse.ArgumentParser, ns: argparse.Namespace, exact: bool = False) -> Params:
    b = _parse_value(parser, "b", ns.b, exact)
    c = _parse_value(parser, "c", ns.c, exact)
    d = _parse_value(parser, "delta", ns.delta, exact)
    try:
        return Params(b, c, d)
    except ValueError as err:
        parser.error(str(err))
        raise AssertionError("unreachable")


def _cmd_classify(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> int:
    p = _params(parser, ns, exact=ns.exact)
    label = classify_case(p)
    disc = discriminants(p)
    print(
        f"case {label.case} (region {label.region}): portrait {label.portrait} [{label.status}]"
    )
    if label.boundary:
        print("boundary: " + ", ".join(label.boundary))
    print(f"A = {disc.A} ({float(disc.A)!r})")
    print(f"B = {disc.B} ({float(disc.B)!r})")
    for q in finite_singular_points(p):
        x, y = q.location
        print(f"{q.name}: {q.kind} at ({float(x)!r}, {float(y)!r})")
    return 0


def _cmd_hopf(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> int:
    c = _parse_value(parser, "c", ns.c, False)
    d = _parse_value(parser, "delta", ns.delta, False)
    if c <= 0 or d <= 0:
        parser.error("c and delta must be positive")
    hd = hopf_analysis(c, d)
    ell1_proc = lyapunov_procedural(c, d)
    b0 = float(hd.b0)
    print(f"b0 = {b0!r}")
    print(f"dmu/db(b0) = {hd.dmu_db_at_b0!r}")
    print(f"omega(b0) = {hd.omega_at(b0)!r}")
    print(f"g20 = {hd.g20.real!r} + {hd.g20.imag!r}i")
    print(f"g11 = {hd.g11.real!r} + {hd.g11.imag!r}i")
    print(f"g21 = {hd.g21.real!r} + {hd.g21.imag!r}i")
    print(f"ell1 = {hd.ell1!r}")
    print(f"ell1 (from-scratch cross-check) = {ell1_proc!r}")
    return 0


def _cmd_cycle(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> int:
    p = _params(parser, ns)
    res = detect_limit_cycle(p)
    if res.found:
        print("cycle found")
        print(f"section_x = {res.section_x!r}")
        print(f"period = {res.period!r}")
        print(f"multiplier = {res.multiplier!r}")
        print(f"encloses_P2 = {res.encloses_p2}")
    else:
        print(f"no cycle: {res.detail}")
    return 0


def _cmd_portrait(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> int:
    p = _params(parser, ns)
    report = build_portrait(p)
    print(
        f"portrait {report.portrait_letter} [{report.status}] "
        f"(case {report.label.case}, region {report.label.region})"
    )
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if ns.out:
        with open(ns.out, "w") as fh:
            fh.write(render_svg(report))
        print(f"svg written to {ns.out}")
    if ns.report:
        with open(ns.report, "w") as fh:
            fh.write(write_report(report))
        print(f"report written to {ns.report}")
    return 0


def _parse_grid(parser: argparse.ArgumentParser, text: str) -> GridSpec:
    axes = text.split(",")
    if len(axes) != 3:
        parser.error("grid needs three axes: bmin:bmax:n,cmin:cmax:n,dmin:dmax:n")
    spec = []
    for ax in axes:
        parts = ax.split(":")
        if len(parts) != 3:
            parser.error(f"bad grid axis {ax!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            parser.error(f"bad grid axis {ax!r}")
        if n < 1 or lo <= 0 or hi < lo:
            parser.error(f"bad grid axis {ax!r}")
        spec.append((lo, hi, n))
    return GridSpec(b=spec[0], c=spec[1], delta=spec[2])


def _cmd_scan(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> int:
    grid = _parse_grid(parser, ns.grid)
    if ns.jobs < 1:
        parser.error("--jobs must be at least 1")
    rows = conjecture_scan(grid, IntegratorConfig(), jobs=ns.jobs)
    scan_to_csv(rows, ns.out)
    counts: dict[str, int] = {}
    for r in rows:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    summary = ", ".join(f"{k}: {v}" for k, v in sorted(counts.items())) or "no cells in scope"
    print(f"{len(rows)} cells scanned ({summary}); csv written to {ns.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return ns.func(parser, ns)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except (ValueError, NoReturnError, IntegrationFailure, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def console() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console()
