"""Construction of the divergence-free unit-norm field that calibrates the
axial hyperplane inside the cone, together with the sharp slope threshold.

The field is assembled pointwise: an (n-1)-form built from a radial potential
and an angular profile is Hodge-dualized, sharped, and pushed to the cone
surface frame; vertical projection extends it to the cone interior.
Feasibility of the profile reduces to a quadratic inequality in the profile
exponent whose boundary case is certified in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .forms import KForm, hodge_star, sharp, wedge
from .geometry import (
    AmbientPoint,
    BasePoint,
    ConeParams,
    DomainError,
    Region,
    classify,
    isometry_frame,
    metric_at,
)

__all__ = [
    "CalibrationParams",
    "FeasibilityReport",
    "slope_threshold",
    "optimal_exponent",
    "feasibility",
    "boundary_certificate",
    "threshold_bisect",
    "profile_eval",
    "angle_map",
    "angle_map_deriv",
    "growth_ratio",
    "radial_coform",
    "angle_coform",
    "potential_form",
    "slice_form",
    "profiled_potential",
    "calibration_form",
    "calibration_form_assembled",
    "frame_coefficients",
    "field_at",
    "fd_step",
]


def slope_threshold(n: int) -> float:
    """Largest cone slope for which the calibration exists, (n-3)/(2 sqrt(n-2)).

    Returns 0 for n = 3 (empty feasible range); n <= 2 is rejected.
    """
    if n <= 2:
        raise DomainError(f"threshold needs n >= 3, got n={n}")
    return 0.5 * (n - 3) / math.sqrt(n - 2)


def optimal_exponent(cone: ConeParams) -> float:
    """Profile exponent minimizing the feasibility quadratic.

    Requires (n-1) > 2 (1 + slope^2); outside that range no positive
    minimizer exists and the regime is infeasible outright.
    """
    n = cone.n
    c = (n - 1) / (2.0 * cone.metric_det)
    if not c > 1.0:
        raise DomainError(
            f"no positive optimal exponent: need (n-1) > 2(1+slope^2), "
            f"got n={n}, slope={cone.slope}"
        )
    return (n - 1) * (c - 1.0)


def _lhs(n: int, gamma, slope_sq):
    """Feasibility quadratic (1 + gamma/(n-1))^2 - (1+gamma)/(1+slope^2).

    Generic in the numeric type: exact when both arguments are rational.
    """
    return (1 + gamma / (n - 1)) ** 2 - (1 + gamma) / (1 + slope_sq)


@dataclass(frozen=True)
class FeasibilityReport:
    """Value and verdict of the feasibility quadratic at one (cone, exponent)."""

    lhs: float
    feasible: bool
    gamma_used: float
    exact_lhs: Fraction | None = None


@dataclass(frozen=True)
class CalibrationParams:
    """Cone plus profile exponent; the exponent defaults to the optimal one."""

    cone: ConeParams
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"profile exponent must be positive, got {self.gamma}")

    @classmethod
    def optimal(cls, cone: ConeParams) -> "CalibrationParams":
        return cls(cone, optimal_exponent(cone))


def feasibility(cone: ConeParams, gamma: float, slope_sq=None) -> FeasibilityReport:
    """Evaluate the feasibility quadratic at a given exponent.

    The verdict is taken from an exact rational evaluation: floats are dyadic
    rationals, so Fraction arithmetic reproduces the inputs exactly, and a
    true rational slope^2 (e.g. at the threshold) can be passed explicitly to
    certify boundary equality.
    """
    if not gamma > 0:
        raise DomainError(f"profile exponent must be positive, got {gamma}")
    sq = slope_sq if slope_sq is not None else cone.slope * cone.slope
    lhs_float = float(_lhs(cone.n, float(gamma), float(sq)))
    exact = _lhs(cone.n, Fraction(gamma), Fraction(sq))
    return FeasibilityReport(
        lhs=lhs_float,
        feasible=exact <= 0,
        gamma_used=float(gamma),
        exact_lhs=exact,
    )


def boundary_certificate(n: int) -> Fraction:
    """Exact feasibility value at slope^2 = (n-3)^2/(4(n-2)), exponent n-3.

    Equality (a zero return value) certifies that the threshold is attained.
    """
    if n < 4:
        raise DomainError(f"boundary certificate needs n >= 4, got n={n}")
    slope_sq = Fraction((n - 3) ** 2, 4 * (n - 2))
    gamma = Fraction(n - 3)
    optimal = (n - 1) * (Fraction(n - 1, 1) / (2 * (1 + slope_sq)) - 1)
    if optimal != gamma:
        raise AssertionError("optimal exponent at the threshold must equal n-3")
    return _lhs(n, gamma, slope_sq)


def threshold_bisect(n: int, tol: float) -> float:
    """Recover the slope threshold by bisecting feasibility at the optimal
    exponent, independently of the closed form."""
    if n < 4:
        raise DomainError(f"feasible slopes exist for n >= 4 only, got n={n}")
    if not tol > 0:
        raise DomainError("tolerance must be positive")

    def feasible(slope: float) -> bool:
        cone = ConeParams(n, slope)
        try:
            gamma = optimal_exponent(cone)
        except DomainError:
            return False
        return feasibility(cone, gamma).feasible

    lo = 1e-12
    hi = math.sqrt((n - 3) / 2.0) * (1.0 - 1e-12)
    if not feasible(lo) or feasible(hi):
        raise AssertionError("bisection bracket invalid")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def profile_eval(u: float, gamma: float) -> tuple[float, float]:
    """Angular profile (1+u^2)^(-gamma/2) and its derivative in u.

    Equals cos^gamma of the angle whose tangent is u; value 1 and derivative
    0 at u = 0.
    """
    if not gamma > 0:
        raise DomainError(f"profile exponent must be positive, got {gamma}")
    w = 1.0 + u * u
    h = w ** (-0.5 * gamma)
    hp = -gamma * u * w ** (-0.5 * gamma - 1.0)
    return h, hp


def angle_map(theta: float, gamma: float) -> float:
    """Comparison angle sgn(theta) * arccos(cos^(1+gamma) theta).

    Odd in theta, vanishing at 0, valued in (-pi/2, pi/2); satisfies
    profile(tan theta) = cos(angle_map(theta)) / cos(theta).
    """
    if not abs(theta) < 0.5 * math.pi:
        raise DomainError(f"angle must lie in (-pi/2, pi/2), got {theta}")
    if not gamma > 0:
        raise DomainError(f"profile exponent must be positive, got {gamma}")
    return math.copysign(math.acos(math.cos(theta) ** (1.0 + gamma)), theta)


def angle_map_deriv(theta: float, gamma: float) -> float:
    """Derivative of the comparison angle; continuously extended at 0."""
    if not abs(theta) < 0.5 * math.pi:
        raise DomainError(f"angle must lie in (-pi/2, pi/2), got {theta}")
    if theta == 0.0:
        return math.sqrt(1.0 + gamma)
    c = math.cos(theta)
    num = (1.0 + gamma) * c**gamma * math.sin(theta)
    den = math.sqrt(1.0 - c ** (2.0 * (1.0 + gamma)))
    return math.copysign(num / den, 1.0)


def growth_ratio(z: float, gamma: float) -> float:
    """Difference quotient (z^(1+gamma) - 1)/(z - 1) on [1, inf).

    Continuously extended to 1 + gamma at z = 1; monotone nondecreasing.
    """
    if z < 1.0:
        raise DomainError(f"ratio defined for z >= 1, got {z}")
    if z == 1.0:
        return 1.0 + gamma
    log_z = math.log(z)
    return math.expm1((1.0 + gamma) * log_z) / math.expm1(log_z)


def radial_coform(x: BasePoint) -> KForm:
    """Differential of rho = |x| in the coordinate cobasis."""
    return KForm(x.n, 1, {(i + 1,): float(x.x[i] / x.rho) for i in range(x.n)})


def angle_coform(x: BasePoint) -> KForm:
    """Differential of theta = arctan(x_1/r); needs x' != 0."""
    if not x.off_axis():
        raise DomainError("angle coordinate is undefined on the plane x' = 0")
    rho2 = x.rho**2
    coeffs = {(1,): x.r / rho2}
    for i in range(1, x.n):
        if x.x[i] != 0.0:
            coeffs[(i + 1,)] = -x.x[0] * x.x[i] / (x.r * rho2)
    return KForm(x.n, 1, coeffs)


def _cross_radial_coform(x: BasePoint) -> KForm:
    """Differential of r = |x'| (the radius transverse to the first axis)."""
    if not x.off_axis():
        raise DomainError("dr is undefined on the plane x' = 0")
    return KForm(
        x.n,
        1,
        {(i + 1,): float(x.x[i] / x.r) for i in range(1, x.n) if x.x[i] != 0.0},
    )


def potential_form(x: BasePoint, cone: ConeParams) -> KForm:
    """Degree (n-2) potential whose exterior derivative is the flat-slice form.

    Coefficients are alternating-signed coordinates over the cobasis forms
    omitting the first axis and one transverse axis; it vanishes on the axis
    plane and has norm r*sqrt(1+slope^2)/(n-1).
    """
    n = x.n
    scale = math.sqrt(cone.metric_det) / (n - 1)
    coeffs = {}
    for i in range(2, n + 1):
        if x.x[i - 1] == 0.0:
            continue
        idx = tuple(j for j in range(2, n + 1) if j != i)
        coeffs[idx] = ((-1.0) ** i) * scale * float(x.x[i - 1])
    return KForm(n, n - 2, coeffs)


def slice_form(cone: ConeParams, n: int | None = None) -> KForm:
    """Constant (n-1)-form sqrt(1+slope^2) dx_2 ^ ... ^ dx_n calibrating the
    flat slice x_1 = 0."""
    n = cone.n if n is None else n
    return KForm(n, n - 1, {tuple(range(2, n + 1)): math.sqrt(cone.metric_det)})


def profiled_potential(x: BasePoint, params: CalibrationParams) -> KForm:
    """Profile value times the potential form (the exact primitive of the
    calibration form)."""
    h, _ = profile_eval(x.u, params.gamma)
    return h * potential_form(x, params.cone)


def calibration_form(x: BasePoint, params: CalibrationParams) -> KForm:
    """Closed-form calibration (n-1)-form on the off-axis chart.

    Assembled as [(h - x_1 h'/((n-1) r)) dr + (h'/(n-1)) dx_1] wedge
    ((n-1)/r) * potential; restricts to the flat-slice form on x_1 = 0.
    """
    if not x.off_axis():
        raise DomainError("calibration form is undefined on the plane x' = 0")
    n = x.n
    h, hp = profile_eval(x.u, params.gamma)
    a = h - x.x[0] * hp / ((n - 1) * x.r)
    b = hp / (n - 1)
    bracket = a * _cross_radial_coform(x) + b * KForm.basis(n, (1,))
    return wedge(bracket, ((n - 1) / x.r) * potential_form(x, params.cone))


def calibration_form_assembled(x: BasePoint, params: CalibrationParams) -> KForm:
    """Independent assembly of the calibration form as dh ^ potential
    + h * slice_form (the product-rule route)."""
    if not x.off_axis():
        raise DomainError("calibration form is undefined on the plane x' = 0")
    n = x.n
    h, hp = profile_eval(x.u, params.gamma)
    dh = (hp / x.r) * KForm.basis(n, (1,)) + (
        -x.x[0] * hp / x.r**2
    ) * _cross_radial_coform(x)
    return wedge(dh, potential_form(x, params.cone)) + h * slice_form(params.cone, n)


def frame_coefficients(x: BasePoint, params: CalibrationParams) -> np.ndarray:
    """Surface-frame components of the calibration vector field at a base point.

    Pipeline: calibration form -> Hodge star -> parity sign (-1)^(n-1) ->
    sharp.  The Euclidean norm of the resulting surface vector equals the
    metric norm of these coefficients.
    """
    m = metric_at(x, params.cone)
    omega = calibration_form(x, params)
    star = hodge_star(omega, m)
    sign = -1.0 if params.cone.n % 2 == 0 else 1.0
    return sign * sharp(star, m)


def field_at(p: AmbientPoint, params: CalibrationParams) -> np.ndarray:
    """Calibration vector field at an ambient point of the cone or its surface.

    The value is the surface field at the vertical projection (x, slope*|x|),
    hence independent of t; points on the axis plane x' = 0, outside the
    closed cone, or at the origin are rejected.
    """
    tag = classify(p, params.cone)
    if tag not in (Region.INTERIOR_OFF_AXIS, Region.SURFACE_OFF_AXIS):
        raise DomainError(f"field undefined at region {tag.value}")
    x = BasePoint(p.x)
    coeff = frame_coefficients(x, params)
    _, frame = isometry_frame(x, params.cone)
    return coeff @ frame


def fd_step(x: BasePoint, base: float = 1e-4) -> float:
    """Default finite-difference step at a base point: base * max(1, rho),
    clamped so the stencil stays strictly off the axis plane and origin."""
    if not x.off_axis():
        raise DomainError("no admissible stencil on the plane x' = 0")
    return min(base * max(1.0, x.rho), 0.4 * x.r, 0.4 * x.rho)
