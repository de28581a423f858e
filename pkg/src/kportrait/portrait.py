"""Global portrait assembly, SVG rendering and the JSON report.

A portrait is drawn on the positive quarter of the Poincare disc: the affine
quadrant maps through (x, y) / sqrt(1 + x^2 + y^2), the quarter circle is the
image of infinity.  The portrait letter is decided by classification alone;
the integrated orbits corroborate it and any mismatch is surfaced as a
warning, never silently resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .compactify import InfinitePoint, family_infinite_points
from .local import DulacReport, dulac_check, hopf_analysis
from .model import (
    CaseLabel,
    Params,
    SingularPoint,
    classify_case,
    discriminants,
    finite_singular_points,
)
from .numerics import (
    CycleResult,
    IntegrationFailure,
    IntegratorConfig,
    NoReturnError,
    Orbit,
    cycle_loop,
    detect_limit_cycle,
    integrate,
    interior_point,
    point_polyline_distance,
)

__all__ = [
    "DiscProjection",
    "OrbitTrace",
    "HopfSummary",
    "PortraitReport",
    "SvgStyle",
    "build_portrait",
    "render_svg",
    "write_report",
    "report_to_dict",
]


@dataclass(frozen=True)
class DiscProjection:
    """Projection of the affine quadrant into the closed quarter disc."""

    def project(self, x: float, y: float) -> tuple[float, float]:
        r = math.sqrt(1.0 + x * x + y * y)
        return x / r, y / r

    def project_array(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        r = np.sqrt(1.0 + pts[:, 0] ** 2 + pts[:, 1] ** 2)
        return pts / r[:, None]

    @property
    def viewport(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return ((0.0, 1.0), (0.0, 1.0))


@dataclass
class OrbitTrace:
    """An integrated curve with its limit-set bookkeeping.

    ``points`` are affine coordinates ordered by increasing true time, so
    separately integrated backward halves are reversed before storage.
    """

    role: str  # axis, separatrix, representative
    origin: str
    stability: Optional[str]
    alpha_limit: str
    omega_limit: str
    points: np.ndarray


@dataclass
class HopfSummary:
    b0: float
    dmu_db_at_b0: float
    mu: float
    omega: Optional[float]
    ell1: float


@dataclass
class PortraitReport:
    params: Params
    label: CaseLabel
    finite_points: list[SingularPoint]
    infinite_points: list[InfinitePoint]
    hopf: Optional[HopfSummary]
    cycle: Optional[CycleResult]
    dulac: DulacReport
    separatrices: list[OrbitTrace]
    representatives: list[OrbitTrace]
    cycle_points: Optional[np.ndarray]
    portrait_letter: str
    status: str
    warnings: list[str]


def _thin(points: np.ndarray, target: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) <= target:
        return pts
    idx = np.linspace(0, len(pts) - 1, target).round().astype(int)
    return pts[idx]


def build_portrait(
    p: Params,
    cfg: Optional[IntegratorConfig] = None,
    representatives: int = 8,
    seed_offset: float = 1e-6,
    thin_to: int = 600,
) -> PortraitReport:
    """Classify, integrate the separatrix skeleton and representative orbits,
    and assemble the full report.

    Integration failures become warnings; classification always completes.
    The representative seeds sit on a geometric ladder along the section ray
    when the interior point exists, on a diagonal ladder otherwise.
    """
    cfg = cfg or IntegratorConfig()
    label = classify_case(p)
    pts = finite_singular_points(p)
    inf_pts = family_infinite_points(p)
    warnings: list[str] = []
    b, c, d = float(p.b), float(p.c), float(p.delta)

    disc = discriminants(p)
    if label.case == 4:
        warnings.append(
            "classification-sources-conflict: B >= 0 with A < 0 is a region where "
            "the headline sign rule and the case analysis disagree; the case "
            "analysis (portrait C) is used"
        )

    hopf: Optional[HopfSummary] = None
    if float(disc.B) < 0.0 and c > d:
        try:
            hd = hopf_analysis(c, d)
            omega: Optional[float] = None
            try:
                omega = hd.omega_at(b)
            except ValueError:
                pass
            hopf = HopfSummary(
                b0=float(hd.b0),
                dmu_db_at_b0=hd.dmu_db_at_b0,
                mu=hd.mu_at(b),
                omega=omega,
                ell1=hd.ell1,
            )
        except ValueError as err:
            warnings.append(f"hopf-analysis-unavailable: {err}")

    dulac = dulac_check(p)

    cycle: Optional[CycleResult] = None
    cycle_pts: Optional[np.ndarray] = None
    if label.case in (3, 5):
        try:
            cycle = detect_limit_cycle(p, cfg)
            if cycle.found:
                cycle_pts = cycle_loop(p, cycle, cfg)
        except (NoReturnError, IntegrationFailure) as err:
            warnings.append(f"cycle-detection-failed: {err}")

    names = {q.name: (float(q.location[0]), float(q.location[1])) for q in pts}

    def run(start, direction: str) -> Optional[Orbit]:
        try:
            return integrate(p, start, direction, cfg)
        except IntegrationFailure as err:
            warnings.append(f"integration-failure: {direction} orbit from {start}")
            return err.orbit
        except ValueError as err:
            warnings.append(f"orbit-rejected: {err}")
            return None

    def limit_of(orbit: Optional[Orbit]) -> str:
        if orbit is None or not orbit.samples:
            return "unresolved"
        if orbit.terminal == "converged-to-point":
            return orbit.detail
        if orbit.terminal == "escaped":
            _, ch, (u, _v) = orbit.samples[-1]
            if ch == "U1" and abs(u) < 0.5:
                return "O1"
            if ch == "U2":
                return "O2"
            return "infinity"
        if orbit.terminal == "chart-boundary-loop":
            return "O2"
        _, ch, (ax, ay) = orbit.samples[-1]
        if ch == "affine":
            if cycle is not None and cycle.found and cycle_pts is not None:
                if point_polyline_distance((ax, ay), cycle_pts) <= 0.02:
                    return "cycle"
            for name, (qx, qy) in names.items():
                if math.hypot(ax - qx, ay - qy) <= 1e-3:
                    return name
            # still settling (slow foci, saddle-node centre directions):
            # accept a close and strictly shrinking approach
            affine = [s for s in orbit.samples if s[1] == "affine"]
            mid = affine[(3 * len(affine)) // 4][2]
            for name, (qx, qy) in names.items():
                d_end = math.hypot(ax - qx, ay - qy)
                d_mid = math.hypot(mid[0] - qx, mid[1] - qy)
                if d_end <= 0.05 and d_end <= 0.9 * d_mid:
                    return name
        return "unresolved"

    def trace(role: str, origin: str, stability: Optional[str], start) -> OrbitTrace:
        fwd = run(start, "forward")
        bwd = run(start, "backward")
        parts = []
        if bwd is not None and bwd.samples:
            parts.append(bwd.affine_points()[::-1])
        if fwd is not None and fwd.samples:
            parts.append(fwd.affine_points())
        points = np.vstack(parts) if parts else np.empty((0, 2))
        return OrbitTrace(
            role=role,
            origin=origin,
            stability=stability,
            alpha_limit=limit_of(bwd),
            omega_limit=limit_of(fwd),
            points=_thin(points, thin_to),
        )

    separatrices: list[OrbitTrace] = [
        trace("axis", "P0", "unstable", (seed_offset, 0.0)),
        trace("axis", "P0", "stable", (0.0, seed_offset)),
    ]
    if label.case >= 2:
        # direction into the open quadrant along the non-contracting eigenvector
        lam_u = max(c - d - b * d, 0.0)
        vx, vy = -1.0, b + 1.0 + lam_u
        nrm = math.hypot(vx, vy)
        start = (1.0 + seed_offset * vx / nrm, seed_offset * vy / nrm)
        stability = "center" if label.case == 2 else "unstable"
        separatrices.append(trace("separatrix", "P1", stability, start))

    rep_traces: list[OrbitTrace] = []
    if "P2" in names:
        x2, y2 = interior_point(p)
        x_hi = x2 + 0.8 * (1.0 - x2) if x2 < 1.0 else 2.0 * x2
        for k in range(representatives):
            xk = x2 + (x_hi - x2) * 0.55**k
            rep_traces.append(trace("representative", f"section+{xk - x2:.6g}", None, (xk, y2)))
    else:
        r_lo, r_hi = 0.15, 4.0
        for k in range(representatives):
            rk = r_lo * (r_hi / r_lo) ** (k / max(representatives - 1, 1))
            s = rk / math.sqrt(2.0)
            rep_traces.append(trace("representative", f"diagonal r={rk:.6g}", None, (s, s)))

    expected_omega = {"A": "P1", "B": "cycle", "C": "P2"}[label.portrait]
    mismatched = [tr for tr in rep_traces if tr.omega_limit != expected_omega]
    if mismatched:
        warnings.append(
            "portrait-corroboration-mismatch: "
            f"{len(mismatched)} representative orbit(s) did not reach {expected_omega}"
        )

    return PortraitReport(
        params=p,
        label=label,
        finite_points=pts,
        infinite_points=inf_pts,
        hopf=hopf,
        cycle=cycle,
        dulac=dulac,
        separatrices=separatrices,
        representatives=rep_traces,
        cycle_points=None if cycle_pts is None else _thin(cycle_pts, thin_to),
        portrait_letter=label.portrait,
        status=label.status,
        warnings=warnings,
    )


@dataclass(frozen=True)
class SvgStyle:
    size: int = 640
    margin: float = 48.0
    orbit_color: str = "#4477aa"
    separatrix_color: str = "#111111"
    cycle_color: str = "#cc3311"
    skeleton_color: str = "#000000"
    point_size: float = 5.0


def _fmt_px(v: float) -> str:
    return f"{v:.2f}"


def render_svg(report: PortraitReport, style: Optional[SvgStyle] = None) -> str:
    """Deterministic SVG 1.1 document of the quarter-disc portrait."""
    st = style or SvgStyle()
    proj = DiscProjection()
    scale = st.size - 2.0 * st.margin

    def to_px(x: float, y: float) -> tuple[float, float]:
        dx, dy = proj.project(float(x), float(y))
        return st.margin + dx * scale, st.size - st.margin - dy * scale

    def polyline(points, cls: str) -> str:
        if len(points) < 2:
            return ""
        coords = " ".join(
            f"{_fmt_px(px)},{_fmt_px(py)}" for px, py in (to_px(q[0], q[1]) for q in points)
        )
        return f'<polyline class="{cls}" points="{coords}" />'

    def arrow(points) -> str:
        if len(points) < 4:
            return ""
        mid = len(points) // 2
        x0, y0 = to_px(*points[mid - 1])
        x1, y1 = to_px(*points[mid])
        dx, dy = x1 - x0, y1 - y0
        nrm = math.hypot(dx, dy)
        if nrm < 1e-9:
            return ""
        ux, uy = dx / nrm, dy / nrm
        px, py = -uy, ux
        a = 4.5
        tip = (x1 + a * ux, y1 + a * uy)
        left = (x1 - a * ux + 0.6 * a * px, y1 - a * uy + 0.6 * a * py)
        right = (x1 - a * ux - 0.6 * a * px, y1 - a * uy - 0.6 * a * py)
        pts = " ".join(f"{_fmt_px(u)},{_fmt_px(v)}" for u, v in (tip, left, right))
        return f'<polygon class="arrow" points="{pts}" />'

    def glyph(name: str, kind: str, x: float, y: float) -> str:
        px, py = to_px(x, y)
        r = st.point_size
        title = f"<title>{name}: {kind}</title>"
        if kind == "saddle":
            return (
                f'<g class="pt saddle" data-name="{name}" data-kind="{kind}">{title}'
                f'<line x1="{_fmt_px(px - r)}" y1="{_fmt_px(py - r)}" x2="{_fmt_px(px + r)}" y2="{_fmt_px(py + r)}"/>'
                f'<line x1="{_fmt_px(px - r)}" y1="{_fmt_px(py + r)}" x2="{_fmt_px(px + r)}" y2="{_fmt_px(py - r)}"/>'
                "</g>"
            )
        if kind == "saddle-node":
            return (
                f'<g class="pt saddle-node" data-name="{name}" data-kind="{kind}">{title}'
                f'<circle cx="{_fmt_px(px)}" cy="{_fmt_px(py)}" r="{_fmt_px(r)}" fill="none"/>'
                f'<path d="M {_fmt_px(px)} {_fmt_px(py - r)} A {_fmt_px(r)} {_fmt_px(r)} 0 0 1 {_fmt_px(px)} {_fmt_px(py + r)} Z"/>'
                "</g>"
            )
        stable = kind in ("stable-node", "stable-focus", "weak-stable-focus")
        fill = "#000000" if stable else "#ffffff"
        extra = ""
        if kind in ("stable-focus", "unstable-focus", "weak-stable-focus"):
            extra = (
                f'<circle cx="{_fmt_px(px)}" cy="{_fmt_px(py)}" r="{_fmt_px(r + 2.5)}" '
                'fill="none" stroke-dasharray="2,2"/>'
            )
        if kind == "degenerate":
            return (
                f'<g class="pt degenerate" data-name="{name}" data-kind="{kind}">{title}'
                f'<rect x="{_fmt_px(px - r)}" y="{_fmt_px(py - r)}" width="{_fmt_px(2 * r)}" height="{_fmt_px(2 * r)}" fill="#ffffff"/>'
                "</g>"
            )
        return (
            f'<g class="pt" data-name="{name}" data-kind="{kind}">{title}'
            f'<circle cx="{_fmt_px(px)}" cy="{_fmt_px(py)}" r="{_fmt_px(r)}" fill="{fill}"/>'
            f"{extra}</g>"
        )

    p = report.params
    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{st.size}" height="{st.size}" viewBox="0 0 {st.size} {st.size}">'
    )
    parts.append(
        "<desc>Positive quarter of the Poincare disc; the arc is the image of infinity.</desc>"
    )
    parts.append(
        "<style>"
        f"polyline{{fill:none;stroke:{st.orbit_color};stroke-width:1.1}}"
        f"polyline.separatrix{{stroke:{st.separatrix_color};stroke-width:2.0}}"
        f"polyline.axis{{stroke:{st.skeleton_color};stroke-width:2.0}}"
        f"polyline.cycle{{stroke:{st.cycle_color};stroke-width:2.4}}"
        f"polyline.skeleton{{stroke:{st.skeleton_color};stroke-width:1.6}}"
        f"path.skeleton{{fill:none;stroke:{st.skeleton_color};stroke-width:1.6}}"
        f".pt circle,.pt line,.pt rect,.pt path{{stroke:#000000;stroke-width:1.4}}"
        f".arrow{{fill:{st.orbit_color};stroke:none}}"
        "text{font-family:monospace;font-size:13px}"
        "text.status-conjectured{fill:#aa3300;font-weight:bold}"
        "</style>"
    )

    # skeleton: the two axes and the arc at infinity
    ox, oy = to_px(0.0, 0.0)
    xe, ye = st.margin + scale, st.size - st.margin
    parts.append(
        f'<polyline class="skeleton" points="{_fmt_px(ox)},{_fmt_px(oy)} {_fmt_px(xe)},{_fmt_px(ye)}" />'
    )
    parts.append(
        f'<polyline class="skeleton" points="{_fmt_px(ox)},{_fmt_px(oy)} {_fmt_px(st.margin)},{_fmt_px(st.size - st.margin - scale)}" />'
    )
    parts.append(
        f'<path class="skeleton" d="M {_fmt_px(xe)} {_fmt_px(ye)} '
        f'A {_fmt_px(scale)} {_fmt_px(scale)} 0 0 0 {_fmt_px(st.margin)} {_fmt_px(st.size - st.margin - scale)}" />'
    )

    for tr in report.representatives:
        parts.append(polyline(tr.points, "representative"))
        parts.append(arrow(tr.points))
    for tr in report.separatrices:
        parts.append(polyline(tr.points, tr.role))
        parts.append(arrow(tr.points))
    if report.cycle_points is not None and len(report.cycle_points) > 1:
        closed = np.vstack([report.cycle_points, report.cycle_points[:1]])
        parts.append(polyline(closed, "cycle"))

    for q in report.finite_points:
        parts.append(glyph(q.name, q.kind, float(q.location[0]), float(q.location[1])))
    for q in report.infinite_points:
        name = "O1" if q.chart == "U1" else "O2"
        if q.chart == "U1":
            px, py = st.margin + scale, st.size - st.margin
        else:
            px, py = st.margin, st.size - st.margin - scale
        kind = q.kind
        title = f"{name}: {kind}"
        if q.sector_data is not None:
            title += (
                f"; one {q.sector_data.sector} sector in the quadrant, separatrices "
                f"{q.sector_data.separatrices[0]} and {q.sector_data.separatrices[1]}"
            )
        fill = "#ffffff" if kind == "unstable-node" else "#dddddd"
        parts.append(
            f'<g class="pt infinite" data-name="{name}" data-kind="{kind}">'
            f"<title>{title}</title>"
            f'<circle cx="{_fmt_px(px)}" cy="{_fmt_px(py)}" r="{_fmt_px(st.point_size)}" fill="{fill}"/>'
            "</g>"
        )

    cap1 = f"b={float(p.b):.6g} c={float(p.c):.6g} delta={float(p.delta):.6g}"
    cap2 = (
        f"case {report.label.case} (region {report.label.region}) "
        f"portrait {report.portrait_letter}"
    )
    parts.append(f'<text x="{_fmt_px(st.margin)}" y="20">{cap1}</text>')
    parts.append(f'<text x="{_fmt_px(st.margin)}" y="36">{cap2}</text>')
    status_cls = "status-conjectured" if report.status == "conjectured" else "status-proven"
    parts.append(
        f'<text class="{status_cls}" x="{_fmt_px(st.size - st.margin - 140)}" y="20">'
        f"{report.status.upper()}</text>"
    )
    parts.append("</svg>")
    return "\n".join(s for s in parts if s)


def _trace_dict(tr: OrbitTrace) -> dict:
    return {
        "role": tr.role,
        "origin": tr.origin,
        "stability": tr.stability,
        "alpha_limit": tr.alpha_limit,
        "omega_limit": tr.omega_limit,
        "points": [[float(x), float(y)] for x, y in np.asarray(tr.points, dtype=float)],
    }


def report_to_dict(report: PortraitReport) -> dict:
    """Schema version 1; stable field order; cycle is null rather than absent."""
    p = report.params
    exact = None
    if p.is_exact:
        bq, cq, dq = p.exact_triple()
        exact = {"b": str(bq), "c": str(cq), "delta": str(dq)}
    cyc = None
    if report.cycle is not None:
        cyc = {
            "found": report.cycle.found,
            "section_x": report.cycle.section_x,
            "period": report.cycle.period,
            "multiplier": report.cycle.multiplier,
            "encloses_P2": report.cycle.encloses_p2,
            "detail": report.cycle.detail,
        }
    hopf = None
    if report.hopf is not None:
        hopf = {
            "b0": report.hopf.b0,
            "dmu_db_at_b0": report.hopf.dmu_db_at_b0,
            "mu": report.hopf.mu,
            "omega": report.hopf.omega,
            "ell1": report.hopf.ell1,
        }
    return {
        "schema_version": "1",
        "params": {
            "b": float(p.b),
            "c": float(p.c),
            "delta": float(p.delta),
            "exact": exact,
        },
        "case": {
            "case": report.label.case,
            "region": report.label.region,
            "portrait": report.label.portrait,
            "status": report.label.status,
            "boundary": list(report.label.boundary),
        },
        "finite_singular_points": [
            {
                "name": q.name,
                "chart": q.chart,
                "x": float(q.location[0]),
                "y": float(q.location[1]),
                "kind": q.kind,
                "eigenvalues": None
                if q.eigenvalues is None
                else [[z.real, z.imag] for z in q.eigenvalues],
            }
            for q in report.finite_points
        ],
        "infinite_singular_points": [
            {
                "name": "O1" if q.chart == "U1" else "O2",
                "chart": q.chart,
                "u": float(q.location[0]),
                "v": float(q.location[1]),
                "kind": q.kind,
                "sector": None
                if q.sector_data is None
                else {
                    "sector": q.sector_data.sector,
                    "separatrices": list(q.sector_data.separatrices),
                },
            }
            for q in report.infinite_points
        ],
        "hopf": hopf,
        "cycle": cyc,
        "dulac": {
            "applicable": report.dulac.applicable,
            "margin": report.dulac.margin,
            "conclusion": report.dulac.conclusion,
        },
        "separatrices": [_trace_dict(tr) for tr in report.separatrices],
        "representative_orbits": [_trace_dict(tr) for tr in report.representatives],
        "cycle_points": None
        if report.cycle_points is None
        else [[float(x), float(y)] for x, y in report.cycle_points],
        "portrait": report.portrait_letter,
        "status": report.status,
        "warnings": list(report.warnings),
    }


def _emit_json(value, out: list[str], indent: int) -> None:
    pad = "  " * indent
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"non-finite number {v!r} in report")
        out.append(format(v, ".17g"))
    elif isinstance(value, str):
        import json as _json

        out.append(_json.dumps(value))
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        out.append("[\n")
        for k, item in enumerate(value):
            out.append(pad + "  ")
            _emit_json(item, out, indent + 1)
            out.append(",\n" if k < len(value) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        items = list(value.items())
        for k, (key, item) in enumerate(items):
            import json as _json

            out.append(pad + "  " + _json.dumps(str(key)) + ": ")
            _emit_json(item, out, indent + 1)
            out.append(",\n" if k < len(items) - 1 else "\n")
        out.append(pad + "}")
    else:
        raise TypeError(f"cannot serialise {type(value)!r}")


def write_report(report: PortraitReport) -> str:
    """JSON text of the report; numbers carry 17 significant digits so they
    round-trip exactly."""
    out: list[str] = []
    _emit_json(report_to_dict(report), out, 0)
    out.append("\n")
    return "".join(out)
