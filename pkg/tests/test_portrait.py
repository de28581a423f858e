"""Portrait assembly, disc projection, SVG and JSON output."""

import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from kportrait import (
    DiscProjection,
    Params,
    SvgStyle,
    build_portrait,
    render_svg,
    report_to_dict,
    write_report,
)


@pytest.fixture(scope="module")
def report_a():
    return build_portrait(Params(2.0, 1.0, 1.0))


@pytest.fixture(scope="module")
def report_b():
    return build_portrait(Params(0.5, 1.0, 0.25))


@pytest.fixture(scope="module")
def report_c():
    return build_portrait(Params(2.0, 1.0, 0.2))


def test_disc_projection_properties():
    proj = DiscProjection()
    rng = np.random.default_rng(71)
    for _ in range(100):
        x, y = rng.uniform(0.0, 50.0, 2)
        px, py = proj.project(x, y)
        assert 0.0 <= px < 1.0 and 0.0 <= py < 1.0
    # strictly increasing projected radius along rays, bounded by 1
    direction = np.array([0.6, 0.8])
    radii = [math.hypot(*proj.project(*(direction * r))) for r in np.linspace(0.1, 200, 50)]
    assert all(r1 > r0 for r0, r1 in zip(radii, radii[1:]))
    assert radii[-1] < 1.0


def test_portrait_a_limits(report_a):
    assert report_a.portrait_letter == "A"
    assert report_a.status == "proven"
    assert report_a.cycle is None
    for tr in report_a.representatives:
        assert tr.alpha_limit == "O1"
        assert tr.omega_limit == "P1"
    assert not any("mismatch" in w for w in report_a.warnings)


def test_portrait_b_limits(report_b):
    assert report_b.portrait_letter == "B"
    assert report_b.cycle is not None and report_b.cycle.found
    assert report_b.cycle_points is not None
    for tr in report_b.representatives:
        assert tr.omega_limit == "cycle"
    # orbits leave either the infinite node or the interior repelling focus
    assert {tr.alpha_limit for tr in report_b.representatives} <= {"O1", "P2"}
    assert not any("mismatch" in w for w in report_b.warnings)


def test_portrait_c_limits(report_c):
    assert report_c.portrait_letter == "C"
    assert report_c.status == "proven"
    for tr in report_c.representatives:
        assert tr.omega_limit == "P2"
    assert not any("mismatch" in w for w in report_c.warnings)


def test_portrait_letter_matches_classification(report_a, report_b, report_c):
    for rep in (report_a, report_b, report_c):
        assert rep.portrait_letter == rep.label.portrait
        assert rep.status == rep.label.status


def test_separatrix_bookkeeping(report_a, report_b):
    # P0's separatrices are the axes in every case
    axis_origins = [tr.origin for tr in report_a.separatrices if tr.role == "axis"]
    assert axis_origins == ["P0", "P0"]
    # portraits B/C carry the P1 separatrix entering the open quadrant
    p1_traces = [tr for tr in report_b.separatrices if tr.origin == "P1"]
    assert len(p1_traces) == 1
    assert p1_traces[0].omega_limit == "cycle"
    # portrait A has no interior saddle connection
    assert not [tr for tr in report_a.separatrices if tr.origin == "P1"]


def test_conjectured_zone_report():
    rep = build_portrait(Params(0.1, 0.1, 0.09))
    assert rep.portrait_letter == "C"
    assert rep.status == "conjectured"
    assert any("classification-sources-conflict" in w for w in rep.warnings)


def test_render_svg_deterministic(report_b):
    s1 = render_svg(report_b)
    s2 = render_svg(report_b)
    assert s1 == s2


def test_render_svg_well_formed(report_a, report_b, report_c):
    for rep, letter in ((report_a, "A"), (report_b, "B"), (report_c, "C")):
        doc = render_svg(rep)
        root = ET.fromstring(doc)
        assert root.tag.endswith("svg")
        assert f"portrait {letter}" in doc
        if letter == "B":
            assert 'class="cycle"' in doc
        else:
            assert 'class="cycle"' not in doc
        # singular point glyphs present
        assert 'data-name="P0"' in doc
        assert 'data-name="O1"' in doc and 'data-name="O2"' in doc


def test_render_svg_empty_orbits_is_valid(report_a):
    import copy

    bare = copy.copy(report_a)
    bare.separatrices = []
    bare.representatives = []
    doc = render_svg(bare)
    root = ET.fromstring(doc)
    assert root.tag.endswith("svg")


def test_render_svg_conjectured_banner():
    rep = build_portrait(Params(0.1, 0.1, 0.09))
    doc = render_svg(rep)
    assert "CONJECTURED" in doc
    assert 'class="status-conjectured"' in doc


def test_render_svg_custom_style(report_c):
    doc = render_svg(report_c, SvgStyle(size=400, cycle_color="#00ff00"))
    assert 'width="400"' in doc


def test_report_schema_totality(report_a, report_b):
    d = report_to_dict(report_a)
    assert d["schema_version"] == "1"
    assert d["cycle"] is None  # null, never absent
    assert d["warnings"] == []
    assert d["hopf"] is None
    db = report_to_dict(report_b)
    assert db["cycle"]["found"] is True
    assert db["hopf"]["b0"] == pytest.approx(0.6)
    order = list(d.keys())
    assert order == list(db.keys())  # stable field ordering


def test_report_round_trip(report_b):
    text = write_report(report_b)
    parsed = json.loads(text)
    ref = report_to_dict(report_b)

    def compare(a, b):
        if isinstance(a, dict):
            assert set(a) == set(b)
            for k in a:
                compare(a[k], b[k])
        elif isinstance(a, (list, tuple)):
            assert len(a) == len(b)
            for u, v in zip(a, b):
                compare(u, v)
        elif isinstance(a, float):
            assert a == b  # 17 significant digits round-trip exactly
        else:
            assert a == b

    compare(parsed, ref)
    # serialise(parse(serialise(x))) is stable
    assert json.loads(text) == json.loads(write_report(report_b))


def test_report_numbers_17_digits(report_b):
    text = write_report(report_b)
    # a full-precision float appears verbatim
    assert format(float(report_b.cycle.section_x), ".17g") in text


def test_exact_params_round_into_report():
    from fractions import Fraction as F

    rep = build_portrait(Params(F(1, 2), F(1), F(1, 4)), representatives=2)
    d = report_to_dict(rep)
    assert d["params"]["exact"] == {"b": "1/2", "c": "1", "delta": "1/4"}
