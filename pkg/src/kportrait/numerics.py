"""Orbit integration, return maps, limit-cycle detection and the grid scanner.

Integration uses an embedded Dormand-Prince 5(4) pair with PI-free step
control and FSAL.  When an orbit leaves the ball of radius
``chart_switch_radius`` the state transfers to the compactification chart
whose coordinate dominates (U1 for x, U2 for y) and integration continues on
the charted polynomial field; in a chart the recorded ``time`` is the orbit
parameter of the rescaled flow, which preserves orientation on v > 0.

Section crossings are located by sign-change bisection on controlled
sub-steps, so the event state carries one local error, not an interpolation
error.  The section for return maps is the horizontal ray right of the
interior equilibrium, where upward crossings are provably transversal.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from typing import Callable, Optional

import numpy as np

from .compactify import compactify, chart_transition, family_system
from .model import Params, Point2, finite_singular_points

__all__ = [
    "IntegratorConfig",
    "Orbit",
    "CycleResult",
    "ScanEvidence",
    "GridSpec",
    "StopEvent",
    "IntegrationFailure",
    "NoReturnError",
    "integrate",
    "return_map",
    "return_iterates",
    "detect_limit_cycle",
    "separatrix_section_crossing",
    "interior_point",
    "cycle_loop",
    "cycle_amplitude",
    "conjecture_scan",
    "scan_to_csv",
    "polyline_hausdorff",
    "point_polyline_distance",
]

# Dormand-Prince 5(4) tableau (autonomous form; no time arguments needed).
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168,
    -355 / 33,
    46732 / 5247,
    49 / 176,
    -5103 / 18656,
)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_CONVERGE_DIST2 = 1e-14  # squared distance to an equilibrium that ends an orbit
_V_ESCAPE = 1e-9  # |v| below this in a chart counts as reaching infinity
_O2_RADIUS2 = 1e-4  # ball around the degenerate U2 origin that is never entered
_MAX_SWITCHES = 32
_MAX_SAMPLES = 2_000_000


class IntegrationFailure(RuntimeError):
    """Step-size underflow or sample-budget exhaustion; carries the partial orbit."""

    def __init__(self, message: str, orbit: "Orbit"):
        super().__init__(message)
        self.orbit = orbit


class NoReturnError(RuntimeError):
    """The orbit converged or escaped before recrossing the section."""

    def __init__(self, message: str, orbit: Optional["Orbit"] = None):
        super().__init__(message)
        self.orbit = orbit


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_step: float = 0.5
    max_time: float = 400.0
    chart_switch_radius: float = 10.0
    event_tol: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("abs_tol", "rel_tol", "max_step", "max_time", "event_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.chart_switch_radius > 1:
            raise ValueError("chart_switch_radius must exceed 1")


@dataclass(frozen=True)
class StopEvent:
    """Scalar event on affine coordinates; a sign change stops the orbit.

    ``direction`` +1 accepts only crossings from negative to non-negative,
    -1 the opposite, 0 both.  Crossings before ``min_time`` are ignored.
    """

    fn: Callable[[float, float], float]
    direction: int = 0
    min_time: float = 0.0


@dataclass
class Orbit:
    """Recorded trajectory: (time, chart, point) triples plus a terminal tag.

    Terminal is one of max-time, converged-to-point, escaped, hit-section,
    chart-boundary-loop.  ``detail`` names the limit point when known.
    """

    samples: list[tuple[float, str, tuple[float, float]]]
    terminal: str
    detail: str = ""

    @property
    def final_time(self) -> float:
        return self.samples[-1][0]

    @property
    def final_state(self) -> tuple[float, str, tuple[float, float]]:
        return self.samples[-1]

    def affine_points(self, clamp: float = 1e12) -> np.ndarray:
        """Samples pushed to affine coordinates; chart samples map through
        x = 1/v (U1) or y = 1/v (U2) with v clamped away from zero."""
        pts = []
        for _, chart, (a, b) in self.samples:
            if chart in ("affine", "U3"):
                pts.append((a, b))
                continue
            v = b
            if abs(v) < 1.0 / clamp:
                v = 1.0 / clamp if v >= 0 else -1.0 / clamp
            if chart == "U1":
                pts.append((1.0 / v, a / v))
            else:
                pts.append((a / v, 1.0 / v))
        return np.asarray(pts, dtype=float).reshape(-1, 2)


def _dp_step(f, x, y, h, k1x, k1y):
    """One Dormand-Prince step from (x, y); returns state, error, FSAL stage."""
    k2x, k2y = f(x + h * (_A21 * k1x), y + h * (_A21 * k1y))
    k3x, k3y = f(x + h * (_A31 * k1x + _A32 * k2x), y + h * (_A31 * k1y + _A32 * k2y))
    k4x, k4y = f(
        x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
        y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y),
    )
    k5x, k5y = f(
        x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
        y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y),
    )
    k6x, k6y = f(
        x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
        y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y),
    )
    xn = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
    yn = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
    k7x, k7y = f(xn, yn)
    ex = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
    ey = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
    return xn, yn, ex, ey, k7x, k7y


def _poly_rhs(sys, sgn: float):
    tp = [(i, j, float(c)) for (i, j), c in sys.terms_p().items()]
    tq = [(i, j, float(c)) for (i, j), c in sys.terms_q().items()]

    def f(u: float, v: float) -> tuple[float, float]:
        du = 0.0
        for i, j, c in tp:
            du += c * u**i * v**j
        dv = 0.0
        for i, j, c in tq:
            dv += c * u**i * v**j
        return sgn * du, sgn * dv

    return f


def _as_event(stop) -> Optional[StopEvent]:
    if stop is None or isinstance(stop, StopEvent):
        return stop
    if callable(stop):
        return StopEvent(fn=stop)
    raise TypeError("stop must be None, a callable g(x, y) or a StopEvent")


def _sign_crossed(g0: float, g1: float, direction: int) -> bool:
    if direction > 0:
        return g0 < 0.0 <= g1
    if direction < 0:
        return g0 > 0.0 >= g1
    return (g0 < 0.0 <= g1) or (g0 > 0.0 >= g1)


def _locate_event(rhs, event, x0, y0, t0, h, k1x, k1y, cfg):
    """Bisect the crossing time inside an accepted step.

    Each probe is a single controlled sub-step from the step start, so the
    located state carries one local truncation error rather than an
    interpolation error.
    """
    g0 = event.fn(x0, y0)
    lo, hi = 0.0, h
    tol = cfg.event_tol * max(1.0, abs(t0))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        xm, ym, _, _, _, _ = _dp_step(rhs, x0, y0, mid, k1x, k1y)
        if _sign_crossed(g0, event.fn(xm, ym), event.direction):
            hi = mid
        else:
            lo = mid
    xe, ye, _, _, _, _ = _dp_step(rhs, x0, y0, hi, k1x, k1y)
    return t0 + hi, xe, ye


def integrate(
    p: Params,
    start,
    direction: str = "forward",
    cfg: Optional[IntegratorConfig] = None,
    stop=None,
) -> Orbit:
    """Adaptive trajectory of the family field from ``start``.

    ``start`` must lie in the closed positive quadrant.  The orbit record
    switches charts beyond ``chart_switch_radius`` and terminates on
    max-time, convergence to an equilibrium, escape to infinity, a located
    stop event, or the excluded neighbourhood of the degenerate point at the
    top of the disc.
    """
    cfg = cfg or IntegratorConfig()
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be forward or backward, got {direction!r}")
    if isinstance(start, Point2):
        start = start.as_tuple()
    x, y = float(start[0]), float(start[1])
    if x < 0 or y < 0:
        raise ValueError(f"start {start} is outside the closed positive quadrant")
    event = _as_event(stop)
    sgn = 1.0 if direction == "forward" else -1.0
    b, c, d = float(p.b), float(p.c), float(p.delta)

    def f_affine(u: float, v: float) -> tuple[float, float]:
        return (
            sgn * (u * (-u * u + (1.0 - b) * u - v + b)),
            sgn * (v * ((c - d) * u - d * b)),
        )

    chart_fields: dict[str, Callable] = {}

    def chart_field(chart: str):
        fn = chart_fields.get(chart)
        if fn is None:
            fn = _poly_rhs(compactify(family_system(Params(b, c, d)), chart).system, sgn)
            chart_fields[chart] = fn
        return fn

    # an orbit may pass arbitrarily close to a saddle, so proximity alone
    # must not stop it: stop at points attracting in this time direction,
    # or on an invariant axis while moving toward the point
    equilibria = []
    for q in finite_singular_points(Params(b, c, d)):
        re_parts = [z.real for z in q.eigenvalues] if q.eigenvalues else []
        if q.kind == "saddle-node":
            mode = "always" if sgn > 0 else "axis-only"
        elif re_parts and all(sgn * r < 0 for r in re_parts):
            mode = "always"
        else:
            mode = "axis-only"
        equilibria.append((q.name, float(q.location[0]), float(q.location[1]), mode))

    chart = "affine"
    rhs = f_affine
    t = 0.0
    samples: list[tuple[float, str, tuple[float, float]]] = [(0.0, "affine", (x, y))]
    k1x, k1y = rhs(x, y)
    h = max(1e-10, min(cfg.max_step, 0.01 * max(abs(x), abs(y), 1.0) / max(abs(k1x), abs(k1y), 1e-10)))
    switches = 0
    terminal = ""
    detail = ""
    r2_out = cfg.chart_switch_radius**2
    r2_in = (0.9 * cfg.chart_switch_radius) ** 2
    g_prev = event.fn(x, y) if event is not None else None

    while True:
        if t >= cfg.max_time:
            terminal = "max-time"
            break
        if len(samples) > _MAX_SAMPLES:
            raise IntegrationFailure(
                "sample budget exhausted", Orbit(samples, "failed", "sample-budget")
            )
        h = min(h, cfg.max_step, cfg.max_time - t)

        while True:
            xn, yn, ex, ey, k7x, k7y = _dp_step(rhs, x, y, h, k1x, k1y)
            scx = cfg.abs_tol + cfg.rel_tol * max(abs(x), abs(xn))
            scy = cfg.abs_tol + cfg.rel_tol * max(abs(y), abs(yn))
            err = math.sqrt(0.5 * ((ex / scx) ** 2 + (ey / scy) ** 2))
            if err <= 1.0 and math.isfinite(xn) and math.isfinite(yn):
                break
            if not math.isfinite(err):
                err = 1e6
            h *= max(0.1, min(0.9, 0.9 * err**-0.2))
            if h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationFailure(
                    "step size underflow", Orbit(samples, "failed", "step-underflow")
                )
        tn = t + h

        if event is not None and chart == "affine":
            g_new = event.fn(xn, yn)
            if (
                g_prev is not None
                and tn > event.min_time
                and _sign_crossed(g_prev, g_new, event.direction)
            ):
                te, xe, ye = _locate_event(rhs, event, x, y, t, h, k1x, k1y, cfg)
                samples.append((te, "affine", (xe, ye)))
                terminal = "hit-section"
                break
            g_prev = g_new

        x, y, t = xn, yn, tn
        k1x, k1y = k7x, k7y
        h = h * (5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2)))

        if chart == "affine":
            samples.append((t, "affine", (x, y)))
            hit = ""
            for name, qx, qy in equilibria:
                if (x - qx) ** 2 + (y - qy) ** 2 <= _CONVERGE_DIST2:
                    hit = name
                    break
            if hit:
                terminal, detail = "converged-to-point", hit
                break
            if x * x + y * y > r2_out:
                chart = "U1" if abs(x) >= abs(y) else "U2"
                u, v = chart_transition("U3", chart, (x, y))
                x, y = float(u), float(v)
                samples[-1] = (t, chart, (x, y))
                rhs = chart_field(chart)
                k1x, k1y = rhs(x, y)
                h = min(h, 0.05)
                switches += 1
                g_prev = None
        else:
            samples.append((t, chart, (x, y)))
            if abs(y) <= _V_ESCAPE:
                terminal = "escaped"
                break
            # u = 0 in U2 is the invariant x = 0 ray, a separatrix of the
            # degenerate point at the top of the disc; the cubic-flat field
            # there is never integrated through.
            if chart == "U2" and (x == 0.0 or x * x + y * y <= _O2_RADIUS2):
                terminal = "chart-boundary-loop"
                break
            affine_r2 = (1.0 + x * x) / (y * y)
            if affine_r2 < r2_in:
                ax, ay = chart_transition(chart, "U3", (x, y))
                x, y = float(ax), float(ay)
                chart = "affine"
                samples[-1] = (t, "affine", (x, y))
                rhs = f_affine
                k1x, k1y = rhs(x, y)
                h = min(h, 0.05)
                switches += 1
                if event is not None:
                    g_prev = event.fn(x, y)
            elif abs(x) > 1.25:
                other = "U2" if chart == "U1" else "U1"
                u, v = chart_transition(chart, other, (x, y))
                chart = other
                x, y = float(u), float(v)
                samples[-1] = (t, chart, (x, y))
                rhs = chart_field(chart)
                k1x, k1y = rhs(x, y)
                h = min(h, 0.05)
                switches += 1
        if switches > _MAX_SWITCHES:
            terminal = "chart-boundary-loop"
            break

    return Orbit(samples=samples, terminal=terminal, detail=detail)


def interior_point(p: Params) -> tuple[float, float]:
    """Float coordinates of the interior equilibrium; raises when absent."""
    b, c, d = float(p.b), float(p.c), float(p.delta)
    if not (c > d and 0 < b * d < c - d):
        raise ValueError("no interior equilibrium for these parameters")
    x2 = b * d / (c - d)
    y2 = b * c * (c - d - b * d) / (c - d) ** 2
    return x2, y2


def _section_event(y2: float) -> StopEvent:
    return StopEvent(fn=lambda _x, y: y - y2, direction=+1, min_time=1e-9)


def return_map(
    p: Params, x: float, cfg: Optional[IntegratorConfig] = None
) -> tuple[float, float]:
    """First-return abscissa and time of flight on the ray right of P2.

    On the ray y = y2, x > x2 the flow satisfies y' > 0, so upward crossings
    are transversal and automatically land right of x2.
    """
    cfg = cfg or IntegratorConfig()
    x2, y2 = interior_point(p)
    if not x > x2:
        raise ValueError(f"section abscissa must exceed {x2}, got {x}")
    orbit = integrate(p, (x, y2), "forward", cfg, stop=_section_event(y2))
    if orbit.terminal != "hit-section":
        raise NoReturnError(
            f"orbit did not recross the section ({orbit.terminal} {orbit.detail})".strip(),
            orbit,
        )
    t, _, (xn, _) = orbit.samples[-1]
    return float(xn), float(t)


def return_iterates(
    p: Params, x0: float, count: int, cfg: Optional[IntegratorConfig] = None
) -> tuple[list[float], Optional[NoReturnError]]:
    """Iterate the return map; stops early when the orbit stops returning."""
    xs = [float(x0)]
    for _ in range(count):
        try:
            xn, _ = return_map(p, xs[-1], cfg)
        except NoReturnError as err:
            return xs, err
        xs.append(xn)
    return xs, None


def separatrix_section_crossing(
    p: Params, cfg: Optional[IntegratorConfig] = None, offset: float = 1e-6
) -> tuple[float, float]:
    """First upward section crossing of the unstable separatrix leaving (1, 0).

    The separatrix bounds the cycle (when one exists) from outside, so its
    crossing is a sound outer bracket seed.
    """
    cfg = cfg or IntegratorConfig()
    b, c, d = float(p.b), float(p.c), float(p.delta)
    _, y2 = interior_point(p)
    lam_u = c - d - b * d
    if lam_u <= 0:
        raise ValueError("P1 has no unstable direction into the open quadrant")
    vx, vy = -1.0, b + 1.0 + lam_u
    nrm = math.hypot(vx, vy)
    start = (1.0 + offset * vx / nrm, offset * vy / nrm)
    orbit = integrate(p, start, "forward", cfg, stop=_section_event(y2))
    if orbit.terminal != "hit-section":
        raise NoReturnError(
            f"separatrix did not reach the section ({orbit.terminal})", orbit
        )
    t, _, (xs, _) = orbit.samples[-1]
    return float(xs), float(t)


@dataclass(frozen=True)
class CycleResult:
    """Outcome of the return-map fixed-point search."""

    found: bool
    section_x: Optional[float]
    period: Optional[float]
    multiplier: Optional[float]
    encloses_p2: bool
    detail: str = ""


def detect_limit_cycle(p: Params, cfg: Optional[IntegratorConfig] = None) -> CycleResult:
    """Bracket and refine a fixed point of the section return map.

    Brackets between an inner seed just right of the interior point and the
    separatrix crossing; refines with an Illinois secant until the
    displacement is below 1e-9; the stability multiplier is a central finite
    difference of the return map with step 1e-5 times the cycle offset.
    """
    cfg = cfg or IntegratorConfig()
    x2, _ = interior_point(p)

    try:
        x_outer, _ = separatrix_section_crossing(p, cfg)
    except (NoReturnError, ValueError):
        x_outer = x2 + 0.75 * max(1.0 - x2, x2)
    if x_outer <= x2:
        x_outer = x2 + 0.5

    span = x_outer - x2
    x_in = x2 + max(1e-6, 1e-3 * span)

    def displacement(s: float) -> tuple[float, float]:
        r, tof = return_map(p, s, cfg)
        return r - s, tof

    try:
        d_in, _ = displacement(x_in)
    except NoReturnError:
        return CycleResult(False, None, None, None, False, "inner orbit absorbed by P2")
    if d_in <= 0.0:
        return CycleResult(False, None, None, None, False, "section map contracts toward P2")

    d_out = None
    for _ in range(4):
        try:
            d_out, _ = displacement(x_outer)
        except NoReturnError:
            x_outer = x2 + 0.6 * (x_outer - x2)
            continue
        if d_out < 0.0:
            break
        x_outer = x2 + 1.5 * (x_outer - x2)
    if d_out is None or d_out >= 0.0:
        return CycleResult(False, None, None, None, False, "no outer contraction bracket")

    a, fa = x_in, d_in
    bnd, fb = x_outer, d_out
    root = tof = None
    side = 0
    for _ in range(80):
        s = (a * fb - bnd * fa) / (fb - fa)
        if not (a < s < bnd):
            s = 0.5 * (a + bnd)
        fs, tof_s = displacement(s)
        if abs(fs) <= 1e-9 or bnd - a < 1e-13:
            root, tof = s, tof_s
            break
        if fs > 0.0:
            a, fa = s, fs
            if side == +1:
                fb *= 0.5
            side = +1
        else:
            bnd, fb = s, fs
            if side == -1:
                fa *= 0.5
            side = -1
    if root is None:
        root = 0.5 * (a + bnd)
        _, tof = displacement(root)

    hstep = 1e-5 * (root - x2)
    rp, _ = return_map(p, root + hstep, cfg)
    rm, _ = return_map(p, root - hstep, cfg)
    multiplier = abs((rp - rm) / (2.0 * hstep))
    return CycleResult(True, float(root), float(tof), float(multiplier), True)


def cycle_loop(
    p: Params,
    cycle: CycleResult,
    cfg: Optional[IntegratorConfig] = None,
    max_step: float = 0.2,
) -> np.ndarray:
    """One period of the detected cycle, sampled densely in affine coords."""
    if not cycle.found or cycle.section_x is None:
        raise ValueError("no cycle to sample")
    cfg = replace(cfg or IntegratorConfig(), max_step=max_step)
    _, y2 = interior_point(p)
    orbit = integrate(p, (cycle.section_x, y2), "forward", cfg, stop=_section_event(y2))
    if orbit.terminal != "hit-section":
        raise NoReturnError("cycle sampling failed to close the loop", orbit)
    return orbit.affine_points()


def cycle_amplitude(
    p: Params,
    cycle: Optional[CycleResult] = None,
    cfg: Optional[IntegratorConfig] = None,
) -> float:
    """Largest distance from the cycle to the interior point it encloses."""
    cycle = cycle or detect_limit_cycle(p, cfg)
    if not cycle.found:
        raise ValueError("no limit cycle detected for these parameters")
    loop = cycle_loop(p, cycle, cfg)
    x2, y2 = interior_point(p)
    return float(np.max(np.hypot(loop[:, 0] - x2, loop[:, 1] - y2)))


def _point_segment_distances(points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    d = seg_b - seg_a
    denom = np.einsum("md,md->m", d, d)
    denom = np.where(denom == 0.0, 1.0, denom)
    pa = points[:, None, :] - seg_a[None, :, :]
    tpar = np.clip(np.einsum("nmd,md->nm", pa, d) / denom, 0.0, 1.0)
    proj = seg_a[None, :, :] + tpar[..., None] * d[None, :, :]
    return np.linalg.norm(points[:, None, :] - proj, axis=2)


def _min_dist_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    if len(poly) < 2:
        return np.linalg.norm(points[:, None, :] - poly[None, :, :], axis=2).min(axis=1)
    best = np.full(len(points), np.inf)
    seg_a, seg_b = poly[:-1], poly[1:]
    # chunk the segment axis to bound memory
    for k in range(0, len(seg_a), 512):
        dmat = _point_segment_distances(points, seg_a[k : k + 512], seg_b[k : k + 512])
        best = np.minimum(best, dmat.min(axis=1))
    return best


def polyline_hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two polylines."""
    pa = np.asarray(a, dtype=float).reshape(-1, 2)
    pb = np.asarray(b, dtype=float).reshape(-1, 2)
    return float(max(_min_dist_to_polyline(pa, pb).max(), _min_dist_to_polyline(pb, pa).max()))


def point_polyline_distance(pt, poly) -> float:
    pts = np.asarray([pt], dtype=float)
    return float(_min_dist_to_polyline(pts, np.asarray(poly, dtype=float).reshape(-1, 2))[0])


@dataclass(frozen=True)
class GridSpec:
    """Inclusive linspace grid over (b, c, delta)."""

    b: tuple[float, float, int]
    c: tuple[float, float, int]
    delta: tuple[float, float, int]

    @staticmethod
    def _axis(spec: tuple[float, float, int]) -> list[float]:
        lo, hi, n = spec
        if n < 1:
            raise ValueError("grid axis needs at least one point")
        if n == 1:
            return [float(lo)]
        return [float(lo) + (float(hi) - float(lo)) * k / (n - 1) for k in range(n)]

    def cells(self) -> list[tuple[float, float, float]]:
        return list(product(self._axis(self.b), self._axis(self.c), self._axis(self.delta)))


@dataclass(frozen=True)
class ScanEvidence:
    """Per-cell verdict plus the witnesses needed to reproduce it."""

    b: float
    c: float
    delta: float
    case: int
    verdict: str  # cycle-found, contraction-to-P2, inconclusive
    section_x: Optional[float]
    multiplier: Optional[float]
    seeds: tuple[float, ...]
    iterates: tuple[tuple[float, ...], ...]


def _scan_cell(args) -> ScanEvidence:
    b, c, d, case, cfg = args
    p = Params(b, c, d)
    try:
        x2, _ = interior_point(p)
        try:
            x_outer, _ = separatrix_section_crossing(p, cfg)
        except NoReturnError:
            x_outer = x2 + 0.75 * max(1.0 - x2, x2)
        span = max(x_outer - x2, 1e-4)
        seeds = tuple(x2 + f * span for f in (0.08, 0.35, 0.85))
        iterates = []
        monotone = True
        for s in seeds:
            seq, _err = return_iterates(p, s, 4, cfg)
            iterates.append(tuple(seq))
            for i in range(len(seq) - 1):
                if seq[i + 1] >= seq[i]:
                    monotone = False
        if monotone:
            return ScanEvidence(b, c, d, case, "contraction-to-P2", None, None, seeds, tuple(iterates))
        res = detect_limit_cycle(p, cfg)
        if res.found:
            return ScanEvidence(
                b, c, d, case, "cycle-found", res.section_x, res.multiplier, seeds, tuple(iterates)
            )
        return ScanEvidence(b, c, d, case, "contraction-to-P2", None, None, seeds, tuple(iterates))
    except (IntegrationFailure, NoReturnError, ValueError):
        return ScanEvidence(b, c, d, case, "inconclusive", None, None, (), ())


def _effective_jobs(jobs: int) -> int:
    env = os.environ.get("KPORTRAIT_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, int(jobs))


def conjecture_scan(
    grid: GridSpec, cfg: Optional[IntegratorConfig] = None, jobs: int = 1
) -> list[ScanEvidence]:
    """Run the no-cycle scan over every grid cell in the conjectured zone.

    Cells are filtered to cases 4, 6, 7 with 1 + c - delta - b - b*delta > 0
    and off the boundary surfaces.  Results come back in grid order whatever
    the worker count, so output files are byte-identical across runs.
    """
    from .model import classify_case

    cfg = cfg or IntegratorConfig()
    work = []
    for b, c, d in grid.cells():
        label = classify_case(Params(b, c, d))
        if label.case in (4, 6, 7) and not label.boundary and (1 + c - d - b - b * d) > 0:
            work.append((b, c, d, label.case, cfg))
    jobs = _effective_jobs(jobs)
    if jobs <= 1 or len(work) <= 1:
        return [_scan_cell(args) for args in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_scan_cell, work, chunksize=1))


_CSV_HEADER = ("b", "c", "delta", "case", "verdict", "section_x", "multiplier", "seeds")


def _csv_num(x: Optional[float]) -> str:
    return "" if x is None else format(float(x), ".17g")


def scan_to_csv(rows: list[ScanEvidence], path_or_file) -> None:
    """Write scan evidence as RFC-4180 CSV with a fixed header."""

    def _write(fh) -> None:
        w = csv.writer(fh)
        w.writerow(_CSV_HEADER)
        for r in rows:
            w.writerow(
                [
                    _csv_num(r.b),
                    _csv_num(r.c),
                    _csv_num(r.delta),
                    str(r.case),
                    r.verdict,
                    _csv_num(r.section_x),
                    _csv_num(r.multiplier),
                    ";".join(format(s, ".17g") for s in r.seeds),
                ]
            )

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
