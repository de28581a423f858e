"""Parameter triple, vector field, discriminants and case classification.

The family under study is the cubic Kolmogorov predator-prey system

    x' = x(-x^2 + (1 - b)x - y + b),
    y' = y((c - delta)x - delta*b),

with positive parameters (b, c, delta), analysed on the closed positive
quadrant.  Classification runs in exact rational arithmetic whenever the
parameters are rational (int / Fraction) and in double precision with a
relative epsilon band otherwise; the band keeps measure-zero boundary
surfaces from being misread as open-region cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Union

import numpy as np

__all__ = [
    "ZERO_BAND",
    "Params",
    "Point2",
    "Discriminants",
    "SingularPoint",
    "CaseLabel",
    "vector_field",
    "jacobian",
    "discriminants",
    "finite_singular_points",
    "classify_case",
]

Number = Union[int, float, Fraction]

# Relative width of the zero band used for boundary detection in float mode.
ZERO_BAND = 1e-12


def _is_exact(*vals: Number) -> bool:
    return all(isinstance(v, Rational) for v in vals)


@dataclass(frozen=True)
class Params:
    """The positive triple (b, c, delta) driving the whole analysis."""

    b: Number
    c: Number
    delta: Number

    def __post_init__(self) -> None:
        for name in ("b", "c", "delta"):
            v = getattr(self, name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")

    @property
    def is_exact(self) -> bool:
        """True when every parameter is rational, enabling exact classification."""
        return _is_exact(self.b, self.c, self.delta)

    def as_float(self) -> "Params":
        return Params(float(self.b), float(self.c), float(self.delta))

    def exact_triple(self) -> tuple[Fraction, Fraction, Fraction]:
        if not self.is_exact:
            raise ValueError("parameters are not rational")
        return Fraction(self.b), Fraction(self.c), Fraction(self.delta)


@dataclass(frozen=True)
class Point2:
    """A finite point of the phase plane."""

    x: Number
    y: Number

    def __post_init__(self) -> None:
        for v in (self.x, self.y):
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"coordinates must be finite, got {v!r}")

    def as_tuple(self) -> tuple[Number, Number]:
        return (self.x, self.y)


PointLike = Union[Point2, tuple, list]


def _xy(pt: PointLike) -> tuple[Number, Number]:
    if isinstance(pt, Point2):
        return pt.x, pt.y
    x, y = pt
    return x, y


@dataclass(frozen=True)
class Discriminants:
    """The two polynomial discriminants controlling the interior point P2.

    A carries the sign of the trace of the Jacobian at P2, B the sign of its
    eigenvalue discriminant: delta*B equals (trace^2 - 4 det) at P2 up to the
    strictly positive factor (b/(c-delta)^2)^2.
    """

    A: Number
    B: Number


@dataclass(frozen=True)
class SingularPoint:
    """A finite or infinite equilibrium with location, chart and local type."""

    name: str  # P0, P1, P2, O1, O2
    chart: str  # affine, U1, U2
    location: tuple[Number, Number]
    kind: str
    eigenvalues: Optional[tuple[complex, complex]] = None


@dataclass(frozen=True)
class CaseLabel:
    """Case number, parameter-space region, portrait letter and proof status.

    ``boundary`` lists the separating surfaces the parameters sit on: exact
    zeros in exact mode, values inside the epsilon band in float mode.
    """

    case: int
    region: str  # I, II-a, II-b, III, S1, S2, S3
    portrait: str  # A, B, C
    status: str  # proven, conjectured
    boundary: tuple[str, ...] = ()


def vector_field(p: Params, pt: PointLike) -> tuple[Number, Number]:
    """Evaluate the family field at ``pt``; exact when inputs are rational."""
    x, y = _xy(pt)
    dx = x * (-x * x + (1 - p.b) * x - y + p.b)
    dy = y * ((p.c - p.delta) * x - p.delta * p.b)
    return dx, dy


def jacobian(p: Params, pt: PointLike) -> np.ndarray:
    """Partial-derivative matrix of the field at ``pt``.

    Returns an object-dtype array when both parameters and coordinates are
    rational so entries stay exact, a float array otherwise.
    """
    x, y = _xy(pt)
    b, c, d = p.b, p.c, p.delta
    j11 = -3 * x * x + 2 * (1 - b) * x - y + b
    j12 = -x
    j21 = (c - d) * y
    j22 = (c - d) * x - d * b
    if _is_exact(b, c, d, x, y):
        return np.array([[j11, j12], [j21, j22]], dtype=object)
    return np.array([[j11, j12], [j21, j22]], dtype=float)


def discriminants(p: Params) -> Discriminants:
    """Closed forms for A and B; exact rationals for rational parameters.

    B is pinned to the eigenvalue discriminant at P2: with
    S = delta(b+1) + c(b-1) one has A = -delta*S and

        delta*B = A^2 - 4 c delta (c-delta)^2 (c - delta - b delta),

    so eigenvalues at P2 are non-real exactly when B < 0.  At A = 0 this
    reduces to B = -4 c^2 (c-delta)^3 / (c+delta).
    """
    b, c, d = p.b, p.c, p.delta
    A = d * (c - d) - b * d * (c + d)
    S = d * (b + 1) + c * (b - 1)
    B = d * S * S - 4 * c * (c - d) ** 2 * (c - d * (b + 1))
    return Discriminants(A, B)


def _sign(q: Number, scale: Number, exact: bool) -> int:
    """Three-way sign with a relative zero band in float mode."""
    if exact:
        return (q > 0) - (q < 0)
    qf = float(q)
    if abs(qf) <= ZERO_BAND * float(scale):
        return 0
    return 1 if qf > 0 else -1


def _signs(p: Params) -> tuple[int, int, int, int]:
    """Signs of (b*delta - (c-delta), A, B, 1+c-delta-b-b*delta)."""
    b, c, d = p.b, p.c, p.delta
    exact = p.is_exact
    q1 = b * d - (c - d)
    disc = discriminants(p)
    S = d * (b + 1) + c * (b - 1)
    s_q1 = _sign(q1, b * d + abs(c - d), exact)
    s_A = _sign(disc.A, d * abs(c - d) + b * d * (c + d), exact)
    s_B = _sign(
        disc.B, d * S * S + 4 * c * (c - d) ** 2 * abs(c - d * (b + 1)), exact
    )
    s_s2 = _sign(1 + c - d - b - b * d, 1 + c + d + b + b * d, exact)
    return s_q1, s_A, s_B, s_s2


def _p2_location(b: Number, c: Number, d: Number, exact: bool) -> tuple[Number, Number]:
    if exact:
        b, c, d = Fraction(b), Fraction(c), Fraction(d)
    x2 = b * d / (c - d)
    y2 = b * c * (c - d - b * d) / (c - d) ** 2
    return x2, y2


def _sorted_eig(j: np.ndarray) -> tuple[complex, complex]:
    w = sorted(np.linalg.eigvals(np.asarray(j, dtype=float)), key=lambda z: (z.real, z.imag))
    return complex(w[0]), complex(w[1])


def finite_singular_points(p: Params) -> list[SingularPoint]:
    """Equilibria of the family in the closed positive quadrant.

    Always contains P0 = (0,0) (saddle) and P1 = (1,0); P2 is included only
    when it lies strictly inside the open quadrant.  When b*delta = c - delta
    the collision P1 = P2 is reported once, as a saddle-node at (1,0).
    """
    b, c, d = p.b, p.c, p.delta
    exact = p.is_exact
    bf, cf, df = float(b), float(c), float(d)

    pts = [
        SingularPoint(
            "P0", "affine", (0, 0), "saddle", (complex(bf), complex(-df * bf))
        )
    ]

    s_q1, s_A, s_B, _ = _signs(p)
    lam1 = complex(-bf - 1.0)
    lam2 = complex(cf - df - bf * df)
    if s_q1 > 0:
        pts.append(SingularPoint("P1", "affine", (1, 0), "stable-node", (lam1, lam2)))
        return pts
    if s_q1 == 0:
        pts.append(SingularPoint("P1", "affine", (1, 0), "saddle-node", (lam1, 0j)))
        return pts

    pts.append(SingularPoint("P1", "affine", (1, 0), "saddle", (lam1, lam2)))

    loc = _p2_location(b, c, d, exact)
    if s_B < 0:
        kind = {1: "unstable-focus", -1: "stable-focus", 0: "weak-stable-focus"}[s_A]
    else:
        # B >= 0 with A = 0 cannot happen: A = 0 forces B < 0.
        kind = "unstable-node" if s_A > 0 else "stable-node"
    jac = jacobian(p.as_float(), (float(loc[0]), float(loc[1])))
    pts.append(SingularPoint("P2", "affine", loc, kind, _sorted_eig(jac)))
    return pts


def classify_case(p: Params) -> CaseLabel:
    """Map parameters to (case, region, portrait, status, boundary tags).

    Total and deterministic.  Boundary tags fire exactly when the separating
    quantity is zero (exact mode) or within the epsilon band (float mode):
    ``case2-boundary`` for b*delta = c - delta, ``A-zero`` for A = 0 and
    ``B-zero`` for B = 0.
    """
    s_q1, s_A, s_B, s_s2 = _signs(p)

    boundary: list[str] = []
    if s_q1 == 0:
        boundary.append("case2-boundary")
    elif s_q1 < 0:
        if s_A == 0:
            boundary.append("A-zero")
        elif s_B == 0:
            boundary.append("B-zero")

    if s_q1 > 0:
        case = 1
    elif s_q1 == 0:
        case = 2
    elif s_A == 0:
        case = 7
    elif s_B < 0:
        case = 5 if s_A > 0 else 6
    else:
        case = 3 if s_A > 0 else 4

    if s_q1 > 0:
        region = "I"
    elif s_q1 == 0:
        region = "S1"
    elif s_A > 0:
        region = "III"
    elif s_A == 0:
        region = "S3"
    elif s_s2 > 0:
        region = "II-b"
    elif s_s2 == 0:
        region = "S2"
    else:
        region = "II-a"

    if case in (1, 2):
        portrait, status = "A", "proven"
    elif case in (3, 5):
        portrait, status = "B", "proven"
    else:
        portrait = "C"
        status = "proven" if s_s2 < 0 else "conjectured"

    return CaseLabel(case, region, portrait, status, tuple(boundary))
