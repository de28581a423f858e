"""Local analysis at equilibria.

Hyperbolic and semi-hyperbolic classification, the Hopf pipeline for the
interior point of the predator-prey family (critical parameter, frequency,
transversality, quadratic/cubic multilinear forms, first Lyapunov
coefficient), the Dulac-style non-existence test with multiplier 1/x, and
the four cycle-uniqueness conditions.

The first Lyapunov coefficient is computed twice, by independent routes:
``hopf_analysis`` evaluates closed forms, ``lyapunov_procedural`` rebuilds
everything from the translated polynomial system and the eigenproblem.  The
two must agree to high relative accuracy; that cross-check is the main
safeguard of this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Union

import numpy as np

from .compactify import PolySystem, family_system
from .model import Params

__all__ = [
    "NonHyperbolicError",
    "NeedsHigherOrderError",
    "IllConditionedError",
    "HopfData",
    "MultilinearForms",
    "DulacReport",
    "UniquenessReport",
    "classify_hyperbolic",
    "classify_semihyperbolic",
    "hopf_analysis",
    "lyapunov_procedural",
    "dulac_check",
    "uniqueness_check",
]

Number = Union[int, float, Fraction]

# An eigenvalue (or its real part) within this relative band of zero makes
# the equilibrium non-hyperbolic for classification purposes.
HYPERBOLIC_BAND = 1e-10


class NonHyperbolicError(ValueError):
    """Linearisation alone cannot classify this equilibrium."""


class NeedsHigherOrderError(ValueError):
    """The second-order centre-manifold reduction is degenerate."""


class IllConditionedError(RuntimeError):
    """The Hopf eigenproblem residual exceeded tolerance."""


def classify_hyperbolic(j) -> str:
    """Kind of a hyperbolic equilibrium from its Jacobian.

    Raises :class:`NonHyperbolicError` when an eigenvalue, or its real part,
    falls inside the zero band relative to the matrix norm.
    """
    jm = np.asarray(j, dtype=float)
    band = HYPERBOLIC_BAND * max(1e-300, float(np.linalg.norm(jm, np.inf)))
    w = np.linalg.eigvals(jm)
    if any(abs(z) <= band or abs(z.real) <= band for z in w):
        raise NonHyperbolicError(f"eigenvalues {w} are inside the zero band")
    if abs(w[0].imag) > band:
        return "unstable-focus" if w[0].real > 0 else "stable-focus"
    re = sorted(z.real for z in w)
    if re[0] < 0 < re[1]:
        return "saddle"
    return "unstable-node" if re[0] > 0 else "stable-node"


def classify_semihyperbolic(sys: PolySystem, pt, coeff_tol: float = 1e-9) -> str:
    """Classify an equilibrium with exactly one zero eigenvalue.

    Moves to eigen-coordinates (centre direction first), approximates the
    centre manifold to second order and reads the leading coefficient of the
    reduced flow.  A nonzero quadratic coefficient gives a saddle-node; a
    vanishing one raises :class:`NeedsHigherOrderError` rather than guessing.
    """
    x0, y0 = float(pt[0]), float(pt[1])
    shifted = sys.translate(x0, y0)
    f0 = shifted(0.0, 0.0)
    if max(abs(float(f0[0])), abs(float(f0[1]))) > 1e-9:
        raise ValueError(f"{pt} is not an equilibrium of the system")
    jm = np.asarray(shifted.linear_part(), dtype=float)
    band = HYPERBOLIC_BAND * max(1e-300, float(np.linalg.norm(jm, np.inf)))
    w, vecs = np.linalg.eig(jm)
    idx_zero = [k for k in range(2) if abs(w[k]) <= band]
    if len(idx_zero) != 1:
        raise ValueError(f"expected exactly one zero eigenvalue, got {w}")
    kz = idx_zero[0]
    kh = 1 - kz
    if abs(w[kh].imag) > band:
        raise ValueError(f"nonzero eigenvalue {w[kh]} is not real")

    v0 = np.real(vecs[:, kz])
    v1 = np.real(vecs[:, kh])
    m = ((float(v0[0]), float(v1[0])), (float(v0[1]), float(v1[1])))
    local = shifted.linear_change(m)

    # centre-component quadratic coefficient in the centre variable
    a20 = float(local.coeff_p(2, 0))
    scale = max(
        [1.0]
        + [abs(float(c)) for c in local.terms_p().values()]
        + [abs(float(c)) for c in local.terms_q().values()]
    )
    if abs(a20) <= coeff_tol * scale:
        raise NeedsHigherOrderError(
            "second-order centre-manifold term vanishes; higher order needed"
        )
    return "saddle-node"


@dataclass(frozen=True)
class MultilinearForms:
    """Symmetric bilinear and trilinear forms of a field's Taylor expansion.

    Built from the quadratic and cubic coefficients of the two components so
    that F(z) = J z + B(z, z)/2 + C(z, z, z)/6.
    """

    quad: tuple[tuple[float, float, float], tuple[float, float, float]]
    cubic: tuple[tuple[float, float, float, float], tuple[float, float, float, float]]

    @classmethod
    def from_system(cls, sys: PolySystem) -> "MultilinearForms":
        quad = tuple(
            (float(get(2, 0)), float(get(1, 1)), float(get(0, 2)))
            for get in (sys.coeff_p, sys.coeff_q)
        )
        cubic = tuple(
            (float(get(3, 0)), float(get(2, 1)), float(get(1, 2)), float(get(0, 3)))
            for get in (sys.coeff_p, sys.coeff_q)
        )
        return cls(quad, cubic)

    def bform(self, e, h):
        out = []
        for a20, a11, a02 in self.quad:
            out.append(2 * a20 * e[0] * h[0] + a11 * (e[0] * h[1] + e[1] * h[0]) + 2 * a02 * e[1] * h[1])
        return np.array(out)

    def cform(self, e, h, z):
        out = []
        for a30, a21, a12, a03 in self.cubic:
            out.append(
                6 * a30 * e[0] * h[0] * z[0]
                + 2 * a21 * (e[0] * h[0] * z[1] + e[0] * h[1] * z[0] + e[1] * h[0] * z[0])
                + 2 * a12 * (e[0] * h[1] * z[1] + e[1] * h[0] * z[1] + e[1] * h[1] * z[0])
                + 6 * a03 * e[1] * h[1] * z[1]
            )
        return np.array(out)


@dataclass(frozen=True)
class HopfData:
    """Closed-form data of the supercritical Hopf bifurcation in b.

    ``mu_at`` and ``omega_at`` evaluate the real and imaginary part of the
    interior-point eigenvalues as functions of b at fixed (c, delta).
    """

    b0: Number
    mu_at: Callable[[float], float]
    omega_at: Callable[[float], float]
    dmu_db_at_b0: float
    equilibrium: tuple[float, float]
    g20: complex
    g11: complex
    g21: complex
    ell1: float
    p_vec: tuple[complex, complex]
    q_vec: tuple[complex, complex]


def _ab_values(b: float, c: float, d: float) -> tuple[float, float]:
    a = d * (c - d) - b * d * (c + d)
    s = d * (b + 1) + c * (b - 1)
    bb = d * s * s - 4 * c * (c - d) ** 2 * (c - d * (b + 1))
    return a, bb


def hopf_analysis(c: Number, delta: Number) -> HopfData:
    """Closed-form Hopf data at the critical parameter b0 = (c-d)/(c+d).

    Requires c > delta.  With the eigenvector convention q = (-d/(c+d), i w),
    <p, q> = 1, the normal-form coefficients reduce to

        g20 = d^2/(c+d)^2 - d(c-d)/(c+d) - i w,
        g11 = d^2/(c+d)^2,
        g21 = -3 d^2/(c+d)^2,
        ell1 = -d^2 / (w (c+d)^2),

    negative for every admissible pair, so the bifurcation is always
    supercritical.
    """
    if not c > delta:
        raise ValueError("hopf analysis requires c > delta")
    exact = isinstance(c, Rational) and isinstance(delta, Rational)
    if exact:
        b0: Number = (Fraction(c) - Fraction(delta)) / (Fraction(c) + Fraction(delta))
    else:
        b0 = (c - delta) / (c + delta)
    cf, df = float(c), float(delta)
    b0f = float(b0)

    _, bb0 = _ab_values(b0f, cf, df)
    if not bb0 < 0:
        raise ValueError("B(b0) must be negative for a complex pair at b0")

    def mu_at(b: float) -> float:
        a, _ = _ab_values(float(b), cf, df)
        return float(b) * a / (2 * (cf - df) ** 2)

    def omega_at(b: float) -> float:
        _, bb = _ab_values(float(b), cf, df)
        val = -df * bb
        if val <= 0:
            raise ValueError(f"eigenvalues at b={b} are not a complex pair")
        return float(b) * math.sqrt(val) / (2 * (cf - df) ** 2)

    dmu = -df / (2 * (cf - df))
    x2 = df / (cf + df)
    y2 = cf * cf / (cf + df) ** 2
    w = omega_at(b0f)

    gamma = df * df / (cf + df) ** 2
    g20 = complex(gamma - df * (cf - df) / (cf + df), -w)
    g11 = complex(gamma, 0.0)
    g21 = complex(-3.0 * gamma, 0.0)
    ell1 = -gamma / w

    q = (complex(-df / (cf + df), 0.0), complex(0.0, w))
    # p solves A^T p = -i w p with <p, q> = 1; in closed form
    # p = (-(c+d)/(2d), i/(2w)).
    p = (complex(-(cf + df) / (2 * df), 0.0), complex(0.0, 1.0 / (2.0 * w)))
    ip = np.vdot(np.array(p), np.array(q))
    if abs(ip - 1.0) > 1e-12:
        raise IllConditionedError(f"<p, q> = {ip} deviates from 1")

    return HopfData(
        b0=b0,
        mu_at=mu_at,
        omega_at=omega_at,
        dmu_db_at_b0=dmu,
        equilibrium=(x2, y2),
        g20=g20,
        g11=g11,
        g21=g21,
        ell1=ell1,
        p_vec=p,
        q_vec=q,
    )


def _kuznetsov_data(c: float, delta: float, resid_tol: float = 1e-10) -> dict:
    """From-scratch normal-form data at b0: translated system, eigenvectors,
    multilinear forms and the g coefficients."""
    cf, df = float(c), float(delta)
    if not cf > df:
        raise ValueError("requires c > delta")
    b0 = (cf - df) / (cf + df)
    sys = family_system(Params(b0, cf, df))
    x2 = df / (cf + df)
    y2 = cf * cf / (cf + df) ** 2
    shifted = sys.translate(x2, y2)

    a = np.asarray(shifted.linear_part(), dtype=float)
    w = np.linalg.eigvals(a)
    lam = w[np.argmax(w.imag)]
    omega = float(lam.imag)
    if omega <= 0:
        raise IllConditionedError(f"no complex pair at b0; eigenvalues {w}")

    # eigenvector conventions: q = (a12, i w - a11), p ~ (a21, -i w - a11),
    # then p is pinned by <p, q> = 1.  This reproduces a phase with the
    # first component of q real and negative.
    if a[0][1] == 0.0:
        raise IllConditionedError("top-right Jacobian entry vanished")
    q = np.array([a[0][1], 1j * omega - a[0][0]], dtype=complex)
    resid = np.linalg.norm(a @ q - 1j * omega * q)
    if resid > resid_tol * max(1.0, float(np.linalg.norm(a))) * float(np.linalg.norm(q)):
        raise IllConditionedError(f"eigenproblem residual {resid} too large")
    p0 = np.array([a[1][0], -1j * omega - a[0][0]], dtype=complex)
    ip = np.vdot(p0, q)
    if ip == 0:
        raise IllConditionedError("degenerate normalisation <p, q> = 0")
    p = p0 / np.conj(ip)

    forms = MultilinearForms.from_system(shifted)
    g20 = complex(np.vdot(p, forms.bform(q, q)))
    g11 = complex(np.vdot(p, forms.bform(q, np.conj(q))))
    g21 = complex(np.vdot(p, forms.cform(q, q, np.conj(q))))
    ell1 = float((1j * g20 * g11 + omega * g21).real / (2 * omega * omega))
    return {
        "b0": b0,
        "omega": omega,
        "jacobian": a,
        "forms": forms,
        "p": p,
        "q": q,
        "g20": g20,
        "g11": g11,
        "g21": g21,
        "ell1": ell1,
    }


def lyapunov_procedural(c: Number, delta: Number) -> float:
    """First Lyapunov coefficient computed from scratch at b0.

    Independent of :func:`hopf_analysis`: translates the interior point to
    the origin, extracts the multilinear forms from the quadratic and cubic
    terms, solves the eigenproblem for (q, p) with <p, q> = 1, and assembles
    ell1 = Re(i g20 g11 + w g21) / (2 w^2).
    """
    return _kuznetsov_data(float(c), float(delta))["ell1"]


@dataclass(frozen=True)
class DulacReport:
    """Outcome of the divergence test with multiplier 1/x.

    The weighted divergence is Delta(x, y) = 1 + c - d - 2x - b(d + x)/x;
    when 1 + c - d - b - b*d < 0 it is negative on the strip 0 < x <= 1 and
    x' < 0 beyond it, so no periodic orbit fits in the closed quadrant.
    """

    applicable: bool
    margin: float
    bound_expression_value_at: Callable[[float, float], float]
    conclusion: str  # no-periodic-orbits, inconclusive


def dulac_check(p: Params) -> DulacReport:
    b, c, d = float(p.b), float(p.c), float(p.delta)
    margin = 1 + c - d - b - b * d

    def delta_at(x: float, y: float) -> float:
        if x <= 0:
            raise ValueError("the multiplier 1/x needs x > 0")
        return 1 + c - d - 2 * x - b * (d + x) / x

    applicable = margin < 0
    return DulacReport(
        applicable=applicable,
        margin=margin,
        bound_expression_value_at=delta_at,
        conclusion="no-periodic-orbits" if applicable else "inconclusive",
    )


@dataclass(frozen=True)
class UniquenessReport:
    """Instantiation of the four uniqueness conditions for the cycle.

    The Kolmogorov factors are x' = x(f(x) - y) and y' = y(g(x) - lambda)
    with f(x) = -x^2 + (1-b)x + b, g(x) = (c-d)x and lambda = b*d.
    """

    f_coeffs: tuple[Number, Number, Number]  # ascending powers
    g_slope: Number
    a: Number
    lam: Number
    x_star: Number
    x_bar_star: Number
    K: int
    conditions_hold: dict[str, bool]

    @property
    def all_hold(self) -> bool:
        return all(self.conditions_hold.values())


def uniqueness_check(p: Params) -> UniquenessReport:
    """Check conditions (i)-(iv) under the precondition 0 < b*d < c - d.

    All four hold whenever additionally A > 0; condition (iii) x* < a is
    exactly equivalent to A > 0.
    """
    b, c, d = p.b, p.c, p.delta
    if not (0 < b * d < c - d):
        raise ValueError("uniqueness analysis needs 0 < b*delta < c - delta")
    a = (1 - b) / 2 if not p.is_exact else (1 - Fraction(b)) / 2
    lam = b * d
    if p.is_exact:
        x_star = Fraction(b) * Fraction(d) / (Fraction(c) - Fraction(d))
        x_bar_star = 1 - Fraction(b) * Fraction(c) / (Fraction(c) - Fraction(d))
    else:
        x_star = b * d / (c - d)
        x_bar_star = 1 - b * c / (c - d)

    # (iv): d/dx [x f'(x)/(g(x)-lam)] has numerator -2(c-d)x^2 + 4 d b (b-1) x,
    # negative for all x > 0 exactly when b <= 1 (no positive root).
    conditions = {
        "i": c > d,
        "ii": a > 0,
        "iii": x_star < a,
        "iv": c > d and b <= 1,
    }
    return UniquenessReport(
        f_coeffs=(b, 1 - b, -1),
        g_slope=c - d,
        a=a,
        lam=lam,
        x_star=x_star,
        x_bar_star=x_bar_star,
        K=1,
        conditions_hold=conditions,
    )
