"""Field, Jacobian, discriminants and case classification."""

from fractions import Fraction as F

import numpy as np
import pytest

from kportrait import (
    Params,
    Point2,
    classify_case,
    discriminants,
    finite_singular_points,
    jacobian,
    vector_field,
)


def random_params(rng, lo=0.05, hi=5.0):
    return Params(*(float(v) for v in rng.uniform(lo, hi, 3)))


def random_rational_params(rng, hi=5):
    vals = []
    for _ in range(3):
        den = int(rng.integers(1, 64))
        num = int(rng.integers(1, hi * den + 1))
        vals.append(F(num, den))
    return Params(*vals)


def test_params_validation():
    with pytest.raises(ValueError):
        Params(-1, 1, 1)
    with pytest.raises(ValueError):
        Params(1, 0, 1)
    with pytest.raises(ValueError):
        Params(1, 1, float("nan"))
    assert Params(F(1, 2), 1, F(1, 4)).is_exact
    assert not Params(0.5, 1, 0.25).is_exact


def test_vector_field_equilibria():
    p = Params(0.5, 1.0, 0.25)
    assert vector_field(p, (0.0, 0.0)) == (0.0, 0.0)
    assert vector_field(p, (1.0, 0.0)) == (0.0, 0.0)
    assert vector_field(p, Point2(1.0, 0.0)) == (0.0, 0.0)


def test_vector_field_vanishes_at_p2_exactly():
    # substitute the closed-form interior point with rational arithmetic
    p = Params(F(1, 2), F(1), F(1, 4))
    b, c, d = p.exact_triple()
    x2 = b * d / (c - d)
    y2 = -b * c * (d + b * d - c) / (c - d) ** 2
    assert (x2, y2) == (F(1, 6), F(5, 9))
    assert vector_field(p, (x2, y2)) == (0, 0)


def test_jacobian_at_axial_points():
    p = Params(0.5, 1.0, 0.25)
    j0 = np.asarray(jacobian(p, (0.0, 0.0)), dtype=float)
    assert np.allclose(j0, [[0.5, 0.0], [0.0, -0.125]])
    j1 = np.asarray(jacobian(p, (1.0, 0.0)), dtype=float)
    eig = sorted(np.linalg.eigvals(j1).real)
    assert eig == pytest.approx([-1.5, 0.625])


def test_jacobian_matches_finite_differences():
    # independent oracle: central differences of the field, step 1e-6
    rng = np.random.default_rng(7)
    h = 1e-6
    for _ in range(50):
        p = random_params(rng)
        x, y = rng.uniform(0.0, 3.0, 2)
        j = np.asarray(jacobian(p, (x, y)), dtype=float)
        fd = np.empty((2, 2))
        for col, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
            fp = vector_field(p, (x + dx, y + dy))
            fm = vector_field(p, (x - dx, y - dy))
            fd[0, col] = (fp[0] - fm[0]) / (2 * h)
            fd[1, col] = (fp[1] - fm[1]) / (2 * h)
        scale = np.abs(j).max() + 1.0
        assert np.abs(j - fd).max() / scale <= 1e-6


def test_discriminants_frozen_values():
    d1 = discriminants(Params(F(1, 2), F(1), F(1, 4)))
    assert d1.A == F(1, 32)
    assert d1.B == F(-359, 256)
    assert float(d1.A) == 0.03125
    assert float(d1.B) == -1.40234375

    d2 = discriminants(Params(F(3, 5), F(1), F(1, 4)))
    assert d2.A == 0

    d3 = discriminants(Params(F(1, 10), F(1, 10), F(9, 100)))
    assert d3.A == F(-81, 100000)
    assert d3.B == F(725, 100000000)
    assert d3.A < 0 < d3.B  # the region {B > 0, A < 0} is nonempty


def test_discriminant_b_signs_eigenvalue_reality():
    # delta*B equals trace^2 - 4 det at P2 up to a positive factor
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 1000:
        p = random_params(rng)
        b, c, d = p.b, p.c, p.delta
        if not (c > d and 0 < b * d < c - d):
            continue
        checked += 1
        x2 = b * d / (c - d)
        y2 = b * c * (c - d - b * d) / (c - d) ** 2
        j = np.asarray(jacobian(p, (x2, y2)), dtype=float)
        tr = j[0, 0] + j[1, 1]
        det = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
        disc = discriminants(p)
        assert ((tr * tr - 4 * det) < 0) == (disc.B < 0)
        # trace sign equals sign(A); determinant strictly positive
        assert np.sign(tr) == np.sign(float(disc.A))
        assert det > 0


def test_finite_points_case1():
    pts = finite_singular_points(Params(2, 1, 1))
    names = [(q.name, q.kind) for q in pts]
    assert names == [("P0", "saddle"), ("P1", "stable-node")]


def test_finite_points_saddle_node_collision():
    pts = finite_singular_points(Params(1, 3, F(3, 2)))
    names = [(q.name, q.kind) for q in pts]
    assert names == [("P0", "saddle"), ("P1", "saddle-node")]


def test_finite_points_case5():
    pts = finite_singular_points(Params(F(1, 2), F(1), F(1, 4)))
    assert [(q.name, q.kind) for q in pts] == [
        ("P0", "saddle"),
        ("P1", "saddle"),
        ("P2", "unstable-focus"),
    ]
    p2 = pts[2]
    assert p2.location == (F(1, 6), F(5, 9))
    lam = p2.eigenvalues
    assert lam[0].imag != 0 and lam[0].real > 0


def test_finite_points_kind_consistent_with_eigenvalues():
    rng = np.random.default_rng(23)
    for _ in range(300):
        p = random_params(rng)
        for q in finite_singular_points(p):
            lam = sorted(q.eigenvalues, key=lambda z: z.real)
            if q.kind == "saddle":
                assert lam[0].real < 0 < lam[1].real
            elif q.kind == "stable-node":
                assert lam[0].real < 0 and lam[1].real < 0 and lam[0].imag == 0
            elif q.kind == "unstable-node":
                assert lam[0].real > 0 and lam[1].real > 0
            elif q.kind == "stable-focus":
                assert lam[0].real < 0 and lam[0].imag != 0
            elif q.kind == "unstable-focus":
                assert lam[0].real > 0 and lam[0].imag != 0
            elif q.kind == "saddle-node":
                assert min(abs(z) for z in lam) <= 1e-9


def test_classify_frozen_examples():
    lab = classify_case(Params(2, 1, 1))
    assert (lab.case, lab.region, lab.portrait, lab.status) == (1, "I", "A", "proven")
    assert lab.boundary == ()

    lab = classify_case(Params(F(1, 2), F(1), F(1, 4)))
    assert (lab.case, lab.region, lab.portrait, lab.status) == (5, "III", "B", "proven")

    lab = classify_case(Params(2, 1, F(1, 5)))
    assert (lab.case, lab.region, lab.portrait, lab.status) == (6, "II-a", "C", "proven")

    lab = classify_case(Params(1, 3, F(3, 2)))
    assert (lab.case, lab.region, lab.portrait) == (2, "S1", "A")
    assert lab.boundary == ("case2-boundary",)

    lab = classify_case(Params(F(3, 5), F(1), F(1, 4)))
    assert (lab.case, lab.region, lab.portrait, lab.status) == (7, "S3", "C", "conjectured")
    assert lab.boundary == ("A-zero",)

    lab = classify_case(Params(F(1, 10), F(1, 10), F(9, 100)))
    assert (lab.case, lab.region, lab.portrait, lab.status) == (4, "II-b", "C", "conjectured")


def test_classify_total_and_deterministic():
    rng = np.random.default_rng(5)
    for _ in range(500):
        p = random_params(rng)
        a = classify_case(p)
        assert a == classify_case(p)
        assert a.case in range(1, 8)
        assert a.region in {"I", "II-a", "II-b", "III", "S1", "S2", "S3"}
        assert a.portrait in {"A", "B", "C"}
        # label invariants
        if a.case in (1, 2):
            assert (a.portrait, a.status) == ("A", "proven")
        elif a.case in (3, 5):
            assert (a.portrait, a.status) == ("B", "proven")
        else:
            assert a.portrait == "C"
            s2 = 1 + p.c - p.delta - p.b - p.b * p.delta
            assert a.status == ("proven" if s2 < 0 else "conjectured")


def test_p1_second_eigenvalue_sign_matches_case():
    rng = np.random.default_rng(13)
    for _ in range(300):
        p = random_params(rng)
        lab = classify_case(p)
        lam2 = p.c - p.delta - p.b * p.delta
        if lab.case == 1:
            assert lam2 < 0
        elif lab.case == 2:
            assert abs(lam2) <= 1e-9
        else:
            assert lam2 > 0


def test_positive_trace_region_is_inside_conjecture_margin():
    # A > 0 forces 1 + c - delta - b - b*delta > 0
    rng = np.random.default_rng(17)
    seen = 0
    while seen < 300:
        p = random_params(rng)
        if discriminants(p).A <= 0:
            continue
        seen += 1
        assert 1 + p.c - p.delta - p.b - p.b * p.delta > 0
    # and the algebraic witness of the implication is positive
    for _ in range(100):
        b, c, d = rng.uniform(0.05, 5.0, 3)
        if c <= d:
            continue
        assert (1 + c - d) * (c + d) - (c - d) * (1 + d) == pytest.approx(
            2 * d + c * (c - d)
        )


def test_boundary_tags_fire_only_on_bands():
    # exact boundaries by construction
    lab = classify_case(Params(F(1, 2), F(3, 2), F(1)))  # b*d = 1/2 = c - d
    assert lab.case == 2 and lab.boundary == ("case2-boundary",)
    # float twin lands inside the epsilon band
    labf = classify_case(Params(0.5, 1.5, 1.0))
    assert labf.case == 2 and labf.boundary == ("case2-boundary",)
    # generic interior point carries no tag
    assert classify_case(Params(0.51, 1.5, 1.0)).boundary == ()


def test_exact_and_float_modes_agree_off_boundaries():
    rng = np.random.default_rng(29)
    for _ in range(500):
        p = random_rational_params(rng)
        le = classify_case(p)
        lf = classify_case(p.as_float())
        if lf.boundary:
            continue  # exact mode is authoritative inside the band
        assert (le.case, le.region, le.portrait, le.status) == (
            lf.case,
            lf.region,
            lf.portrait,
            lf.status,
        )
