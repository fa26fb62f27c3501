"""Circular cone geometry: the cone, its lateral surface, adapted coordinates,
the induced metric on the base chart, and the surface frame/normal.

Conventions: ambient points are (x, t) in R^{n+1} with x in R^n; the cone with
slope ``lam`` is {t > lam * |x|}.  On the base chart we write rho = |x|,
r = |(x_2, ..., x_n)| and theta = arctan(x_1 / r); the plane {x' = 0} (where
theta is undefined) is excluded from field evaluation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .forms import MetricAtPoint

__all__ = [
    "DomainError",
    "Region",
    "ConeParams",
    "BasePoint",
    "AmbientPoint",
    "classify",
    "is_inside",
    "is_on_surface",
    "is_off_axis",
    "metric_at",
    "metric_arrays",
    "isometry_frame",
    "surface_normal",
    "sphere_area",
]

#: Relative tolerance band for membership of sampled points on the cone surface.
SURFACE_TOL = 1e-12


class DomainError(ValueError):
    """A point lies outside the domain of the requested quantity."""


class Region(enum.Enum):
    """Mutually exclusive location tags for ambient points relative to the cone.

    ``*_OFF_AXIS`` tags additionally certify x' != 0, the locus where the
    adapted angle coordinate (and the calibration field) is defined.
    """

    ORIGIN = "origin"
    EXTERIOR = "exterior"
    SURFACE = "surface"
    SURFACE_OFF_AXIS = "surface_off_axis"
    INTERIOR = "interior"
    INTERIOR_OFF_AXIS = "interior_off_axis"


@dataclass(frozen=True)
class ConeParams:
    """Dimension and slope of the circular cone {t > slope * |x|} in R^{n+1}."""

    n: int
    slope: float

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"base dimension must be >= 2, got n={self.n}")
        if not self.slope > 0:
            raise DomainError(f"cone slope must be positive, got {self.slope}")

    @property
    def metric_det(self) -> float:
        """Closed-form determinant of the induced base metric, 1 + slope^2."""
        return 1.0 + self.slope * self.slope

    @property
    def aperture(self) -> float:
        """Opening angle of the cone, 2 * arccot(slope)."""
        return 2.0 * math.atan(1.0 / self.slope)


@dataclass(frozen=True)
class BasePoint:
    """Point of the punctured base chart R^n \\ {0}."""

    x: np.ndarray
    _r: float = field(init=False, repr=False)
    _rho: float = field(init=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        if x.ndim != 1 or x.shape[0] < 2:
            raise DomainError("base point must be a vector of >= 2 coordinates")
        object.__setattr__(self, "_r", float(np.linalg.norm(x[1:])))
        object.__setattr__(self, "_rho", float(np.linalg.norm(x)))
        if not self._rho > 0:
            raise DomainError("base point at the origin is excluded")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def rho(self) -> float:
        return self._rho

    @property
    def r(self) -> float:
        return self._r

    @property
    def theta(self) -> float:
        """Angle arctan(x_1 / r); undefined on the axis plane x' = 0."""
        if self._r == 0.0:
            raise DomainError("theta is undefined on the plane x' = 0")
        return math.atan2(self.x[0], self._r)

    @property
    def u(self) -> float:
        """Slope coordinate x_1 / r; undefined on the axis plane x' = 0."""
        if self._r == 0.0:
            raise DomainError("u is undefined on the plane x' = 0")
        return self.x[0] / self._r

    def off_axis(self) -> bool:
        return self._r > 0.0


@dataclass(frozen=True)
class AmbientPoint:
    """Point (x, t) of R^{n+1}."""

    x: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def rho(self) -> float:
        return float(np.linalg.norm(self.x))

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.x[1:]))


def classify(p: AmbientPoint, cone: ConeParams) -> Region:
    """Locate an ambient point relative to the cone and the axis plane.

    Surface membership for sampled points uses the band
    |t - slope*rho| <= SURFACE_TOL * max(1, rho); constructed surface points
    (t set to slope*rho exactly) always satisfy it.
    """
    rho = p.rho
    if rho == 0.0 and p.t == 0.0:
        return Region.ORIGIN
    gap = p.t - cone.slope * rho
    band = SURFACE_TOL * max(1.0, rho)
    off_axis = p.r > 0.0
    if abs(gap) <= band and rho > 0.0:
        return Region.SURFACE_OFF_AXIS if off_axis else Region.SURFACE
    if gap > 0.0:
        return Region.INTERIOR_OFF_AXIS if off_axis else Region.INTERIOR
    return Region.EXTERIOR


def is_inside(p: AmbientPoint, cone: ConeParams) -> bool:
    """Membership in the open cone."""
    return classify(p, cone) in (Region.INTERIOR, Region.INTERIOR_OFF_AXIS)


def is_on_surface(p: AmbientPoint, cone: ConeParams) -> bool:
    """Membership in the punctured lateral surface."""
    return classify(p, cone) in (Region.SURFACE, Region.SURFACE_OFF_AXIS)


def is_off_axis(p: AmbientPoint) -> bool:
    """True away from the 2-plane x' = 0."""
    return p.r > 0.0


def metric_arrays(x: np.ndarray, slope: float) -> tuple[np.ndarray, np.ndarray]:
    """Metric matrix and its closed-form inverse at a raw coordinate vector."""
    x = np.asarray(x, dtype=float)
    rho2 = float(x @ x)
    if not rho2 > 0.0:
        raise DomainError("metric is undefined at the origin")
    lam2 = slope * slope
    outer = np.outer(x, x) / rho2
    g = np.eye(x.shape[0]) + lam2 * outer
    g_inv = np.eye(x.shape[0]) - (lam2 / (1.0 + lam2)) * outer
    return g, g_inv


def metric_at(x: BasePoint, cone: ConeParams) -> MetricAtPoint:
    """Induced metric at a base point.

    The determinant is computed by LU factorization; the closed form
    1 + slope^2 is available as ``cone.metric_det`` for cross-checks.
    """
    g, g_inv = metric_arrays(x.x, cone.slope)
    return MetricAtPoint(g=g, g_inv=g_inv, det_g=float(np.linalg.det(g)))


def isometry_frame(x: BasePoint, cone: ConeParams) -> tuple[np.ndarray, np.ndarray]:
    """Lift of a base point to the lateral surface and the tangent frame there.

    Returns (p, frame) with p = (x, slope*|x|) in R^{n+1} and frame[i] the
    i-th coordinate tangent vector e_i + slope*(x_i/|x|) e_t.  The Euclidean
    Gram matrix of the frame equals ``metric_at(x, cone).g``.
    """
    n = x.n
    point = np.concatenate([x.x, [cone.slope * x.rho]])
    frame = np.zeros((n, n + 1))
    frame[:, :n] = np.eye(n)
    frame[:, n] = cone.slope * x.x / x.rho
    return point, frame


def surface_normal(p: AmbientPoint, cone: ConeParams) -> np.ndarray:
    """Inward unit normal to the lateral surface at a point of it."""
    if not is_on_surface(p, cone):
        raise DomainError("normal is defined on the cone surface only")
    rho = p.rho
    scale = 1.0 / math.sqrt(1.0 + cone.slope**2)
    return scale * np.concatenate([-cone.slope * p.x / rho, [1.0]])


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^dim embedded in R^{dim+1}."""
    if dim < 0:
        raise DomainError(f"sphere dimension must be >= 0, got {dim}")
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / math.gamma((dim + 1) / 2.0)
