"""Integration, return maps, cycle detection, scanner."""

import io
from dataclasses import replace

import numpy as np
import pytest

from kportrait import (
    GridSpec,
    IntegratorConfig,
    NoReturnError,
    Params,
    StopEvent,
    conjecture_scan,
    cycle_amplitude,
    cycle_loop,
    detect_limit_cycle,
    integrate,
    interior_point,
    polyline_hausdorff,
    return_iterates,
    return_map,
    scan_to_csv,
    separatrix_section_crossing,
    vector_field,
)

P_CASE1 = Params(2.0, 1.0, 1.0)
P_CYCLE = Params(0.5, 1.0, 0.25)
P_DULAC = Params(2.0, 1.0, 0.2)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(abs_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(chart_switch_radius=0.5)


def test_converges_to_global_attractor_case1():
    orbit = integrate(P_CASE1, (0.5, 0.5), "forward")
    assert orbit.terminal == "converged-to-point"
    assert orbit.detail == "P1"
    _, _, (x, y) = orbit.samples[-1]
    assert np.hypot(x - 1.0, y) <= 1e-6
    # oracle: same endpoint under halved tolerances
    tight = IntegratorConfig(abs_tol=5e-11, rel_tol=5e-9)
    orbit2 = integrate(P_CASE1, (0.5, 0.5), "forward", tight)
    assert orbit2.terminal == "converged-to-point" and orbit2.detail == "P1"


def test_orbit_times_increase_and_steps_bounded():
    cfg = IntegratorConfig(max_time=40.0, max_step=0.3)
    orbit = integrate(P_CYCLE, (0.9, 0.6), "forward", cfg)
    times = [s[0] for s in orbit.samples]
    assert all(t1 > t0 for t0, t1 in zip(times, times[1:]))
    for (t0, c0, _), (t1, c1, _) in zip(orbit.samples, orbit.samples[1:]):
        if c0 == c1:
            assert t1 - t0 <= cfg.max_step + 1e-12


def test_axes_are_invariant():
    rng = np.random.default_rng(61)
    cfg = IntegratorConfig(max_time=25.0)
    for _ in range(30):
        p = Params(*(float(v) for v in rng.uniform(0.1, 4.0, 3)))
        x0 = float(rng.uniform(0.01, 5.0))
        orbit = integrate(p, (x0, 0.0), "forward", cfg)
        assert max(abs(s[2][1]) for s in orbit.samples if s[1] == "affine") <= 1e-9
        y0 = float(rng.uniform(0.01, 5.0))
        orbit = integrate(p, (0.0, y0), "forward", cfg)
        assert max(abs(s[2][0]) for s in orbit.samples if s[1] == "affine") <= 1e-9


def test_quadrant_is_invariant():
    rng = np.random.default_rng(67)
    cfg = IntegratorConfig(max_time=60.0)
    for _ in range(20):
        p = Params(*(float(v) for v in rng.uniform(0.1, 3.0, 3)))
        start = (float(rng.uniform(0.05, 3.0)), float(rng.uniform(0.05, 3.0)))
        orbit = integrate(p, start, "forward", cfg)
        for _, chart, (x, y) in orbit.samples:
            if chart == "affine":
                assert x > -1e-9 and y > -1e-9


def test_backward_orbit_escapes_to_o1():
    orbit = integrate(P_CYCLE, (5.0, 5.0), "backward")
    assert orbit.terminal == "escaped"
    _, chart, (u, v) = orbit.samples[-1]
    assert chart == "U1"
    assert abs(u) < 0.1 and abs(v) <= 1e-8  # the unstable node at infinity


def test_backward_y_axis_orbit_stops_before_degenerate_point():
    orbit = integrate(P_CYCLE, (0.0, 2.0), "backward", IntegratorConfig(max_time=100.0))
    assert orbit.terminal == "chart-boundary-loop"
    _, chart, _ = orbit.samples[-1]
    assert chart == "U2"


def test_integrate_rejects_bad_start():
    with pytest.raises(ValueError):
        integrate(P_CYCLE, (-0.1, 0.5))
    with pytest.raises(ValueError):
        integrate(P_CYCLE, (0.1, 0.5), "sideways")


def test_stop_event_transversality():
    x2, y2 = interior_point(P_CYCLE)
    xn, tof = return_map(P_CYCLE, 0.6)
    assert tof > 0
    assert xn > x2
    # the crossing is transversal upward: y' > 0 on the ray right of P2
    dy = vector_field(P_CYCLE, (xn, y2))[1]
    assert dy > 0


def test_return_map_spirals_out_near_p2():
    x2, _ = interior_point(P_CYCLE)
    x = x2 + 1e-6
    xn, _ = return_map(P_CYCLE, x)
    assert xn > x  # unstable focus pushes outward


def test_return_map_contracts_from_outside():
    xn, _ = return_map(P_CYCLE, 0.95)
    assert xn < 0.95


def test_return_map_monotone_decrease_in_dulac_zone():
    x2, _ = interior_point(P_DULAC)
    seq, err = return_iterates(P_DULAC, 0.9, 6)
    assert len(seq) >= 3
    assert all(b < a for a, b in zip(seq, seq[1:]))
    assert all(x > x2 for x in seq)


def test_return_map_requires_interior_point():
    with pytest.raises(ValueError):
        return_map(P_CASE1, 0.7)
    x2, _ = interior_point(P_CYCLE)
    with pytest.raises(ValueError):
        return_map(P_CYCLE, x2 - 0.01)


def test_detect_limit_cycle_case5():
    res = detect_limit_cycle(P_CYCLE)
    assert res.found and res.encloses_p2
    assert 0.0 < res.multiplier < 1.0
    assert res.period > 0
    x2, _ = interior_point(P_CYCLE)
    assert res.section_x > x2
    # the fixed point really is fixed
    xn, _ = return_map(P_CYCLE, res.section_x)
    assert abs(xn - res.section_x) <= 1e-8


def test_detect_limit_cycle_contraction_case6():
    res = detect_limit_cycle(P_DULAC)
    assert not res.found
    assert res.multiplier is None and res.section_x is None
    assert not res.encloses_p2


def test_separatrix_crossing_bounds_cycle_outside():
    res = detect_limit_cycle(P_CYCLE)
    x_sep, _ = separatrix_section_crossing(P_CYCLE)
    assert x_sep > res.section_x


def test_displacement_single_sign_change():
    # uniqueness witness on a coarse scan of the admissible interval
    res = detect_limit_cycle(P_CYCLE)
    x2, _ = interior_point(P_CYCLE)
    x_sep, _ = separatrix_section_crossing(P_CYCLE)
    xs = np.linspace(x2 + 1e-4, x_sep, 40)
    signs = []
    for x in xs:
        xn, _ = return_map(P_CYCLE, float(x))
        signs.append(np.sign(xn - x))
    flips = sum(1 for a, b in zip(signs, signs[1:]) if a != b and a != 0)
    assert flips == 1


def test_cycle_two_sided_convergence():
    res = detect_limit_cycle(P_CYCLE)
    x2, y2 = interior_point(P_CYCLE)
    base = IntegratorConfig()

    def settled_loop(start):
        o1 = integrate(P_CYCLE, start, "forward", replace(base, max_time=450.0))
        assert o1.terminal == "max-time"
        _, chart, pt = o1.samples[-1]
        assert chart == "affine"
        o2 = integrate(P_CYCLE, pt, "forward", replace(base, max_time=60.0, max_step=0.02))
        return o2.affine_points()

    inner = settled_loop((x2 + 0.5 * (res.section_x - x2), y2))
    outer = settled_loop((0.95, y2))
    assert polyline_hausdorff(inner, outer) <= 1e-4


def test_tolerance_robustness_of_cycle():
    res = detect_limit_cycle(P_CYCLE)
    tight = IntegratorConfig(abs_tol=5e-11, rel_tol=5e-9)
    res2 = detect_limit_cycle(P_CYCLE, tight)
    assert abs(res2.section_x - res.section_x) <= 1e-7
    assert abs(res2.multiplier - res.multiplier) <= 1e-4


def test_cycle_amplitude_hopf_scaling():
    amps = {}
    for db in (0.01, 0.0025):
        p = Params(0.6 - db, 1.0, 0.25)
        amps[db] = cycle_amplitude(p)
    ratio = amps[0.01] / amps[0.0025]
    assert ratio == pytest.approx(2.0, rel=0.2)


def test_cycle_loop_closes():
    res = detect_limit_cycle(P_CYCLE)
    loop = cycle_loop(P_CYCLE, res)
    assert len(loop) > 50
    assert np.hypot(*(loop[0] - loop[-1])) <= 1e-6


def test_grid_spec_cells():
    g = GridSpec(b=(0.5, 1.0, 3), c=(1.0, 1.0, 1), delta=(0.1, 0.2, 2))
    cells = g.cells()
    assert len(cells) == 6
    assert cells[0] == (0.5, 1.0, 0.1)
    assert cells[-1] == (1.0, 1.0, 0.2)


def test_conjecture_scan_filters_and_contracts():
    grid = GridSpec(b=(0.65, 1.3, 3), c=(0.9, 1.5, 3), delta=(0.15, 0.4, 3))
    rows = conjecture_scan(grid, jobs=1)
    assert rows, "grid should intersect the conjectured zone"
    for r in rows:
        assert r.case in (4, 6, 7)
        assert 1 + r.c - r.delta - r.b - r.b * r.delta > 0
        assert r.verdict == "contraction-to-P2"
        assert r.seeds and r.iterates
    # cells in cases 1/2/3/5 never appear
    labels = {(r.b, r.c, r.delta) for r in rows}
    from kportrait import classify_case

    for b, c, d in grid.cells():
        if classify_case(Params(b, c, d)).case in (1, 2, 3, 5):
            assert (b, c, d) not in labels


def test_scan_deterministic_across_workers():
    grid = GridSpec(b=(0.7, 1.2, 2), c=(0.9, 1.4, 2), delta=(0.2, 0.35, 2))
    rows1 = conjecture_scan(grid, jobs=1)
    rows2 = conjecture_scan(grid, jobs=3)
    b1, b2 = io.StringIO(), io.StringIO()
    scan_to_csv(rows1, b1)
    scan_to_csv(rows2, b2)
    assert b1.getvalue() == b2.getvalue()
    header = b1.getvalue().splitlines()[0]
    assert header == "b,c,delta,case,verdict,section_x,multiplier,seeds"
    assert b1.getvalue().endswith("\r\n") or b1.getvalue().endswith("\n")


def test_custom_stop_event():
    # terminate on a vertical line crossing
    ev = StopEvent(fn=lambda x, y: x - 0.4, direction=-1, min_time=0.0)
    orbit = integrate(P_CYCLE, (0.9, 0.6), "forward", IntegratorConfig(max_time=60.0), stop=ev)
    assert orbit.terminal == "hit-section"
    _, _, (x, _) = orbit.samples[-1]
    assert abs(x - 0.4) <= 1e-8
