"""Surface-flux quadrature for the calibration field.

Three region families bounded away from the axis plane, plus a patch of the
cone surface itself: an axis-aligned box in R^{n+1}, an axisymmetric annular
box (a box in (x_1, r, t) times the transverse sphere), and the lateral
boundary of the axis tube {|x'| = eps} inside the unit ball.  All integrals
use the midpoint rule with the outward normal, so interior flux balance
reads "sum of faces = 0".

For the annular regions the integrand is evaluated at a representative
transverse direction: the field is equivariant under rotations of x' (its
transverse part is parallel to x'), so the sphere factor integrates exactly;
the equivariance itself is asserted by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .calibration import CalibrationParams
from .geometry import DomainError, sphere_area

__all__ = [
    "BoxRegion",
    "RingBoxRegion",
    "TubeRegion",
    "ConePatch",
    "flux_integral",
    "tube_flux_scaling",
]


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned box [lo, hi] in R^{n+1} with closure inside the off-axis
    open cone."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def validate(self, params: CalibrationParams):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        n = params.cone.n
        if lo.size != n + 1 or hi.size != n + 1:
            raise DomainError(f"box bounds must have {n + 1} coordinates")
        if not np.all(lo < hi):
            raise DomainError("box bounds must satisfy lo < hi componentwise")
        far = np.maximum(np.abs(lo[:n]), np.abs(hi[:n]))
        if not lo[n] > params.cone.slope * float(np.linalg.norm(far)):
            raise DomainError("box must lie strictly inside the open cone")
        trans_min = np.where(
            (lo[1:n] <= 0.0) & (hi[1:n] >= 0.0),
            0.0,
            np.minimum(np.abs(lo[1:n]), np.abs(hi[1:n])),
        )
        if not float(np.linalg.norm(trans_min)) > 0.0:
            raise DomainError("box must keep positive distance from the axis plane")


@dataclass(frozen=True)
class RingBoxRegion:
    """Axisymmetric region {(x_1, r, t) in box} x S^{n-2}, r bounded away
    from zero (a spherical shell sector over the transverse radius)."""

    x1: tuple[float, float]
    r: tuple[float, float]
    t: tuple[float, float]

    def validate(self, params: CalibrationParams):
        for name, (a, b) in (("x1", self.x1), ("r", self.r), ("t", self.t)):
            if not a < b:
                raise DomainError(f"ring box range {name} must be increasing")
        if not self.r[0] > 0.0:
            raise DomainError("ring box must keep r > 0")
        rho_max = math.hypot(max(abs(self.x1[0]), abs(self.x1[1])), self.r[1])
        if not self.t[0] > params.cone.slope * rho_max:
            raise DomainError("ring box must lie strictly inside the open cone")


@dataclass(frozen=True)
class TubeRegion:
    """Lateral boundary {|x'| = eps} of the axis tube, inside the unit-scale
    ball and the open cone."""

    eps: float
    ball_radius: float = 1.0

    def validate(self, params: CalibrationParams):
        if not 0.0 < self.eps < self.ball_radius:
            raise DomainError("tube radius must lie in (0, ball radius)")
        det = params.cone.metric_det
        if self.ball_radius**2 / det - self.eps**2 <= 0.0:
            raise DomainError("tube does not intersect the cone inside the ball")


@dataclass(frozen=True)
class ConePatch:
    """Patch of the lateral cone surface over an annulus of base points."""

    x1: tuple[float, float]
    r: tuple[float, float]

    def validate(self, params: CalibrationParams):
        if not self.x1[0] < self.x1[1]:
            raise DomainError("patch x1 range must be increasing")
        if not 0.0 < self.r[0] < self.r[1]:
            raise DomainError("patch must keep r > 0")


def _midpoints(a: float, b: float, count: int) -> np.ndarray:
    h = (b - a) / count
    return a + (np.arange(count) + 0.5) * h


def _field_component(params, pts_x, axis, dim, kind):
    """Component of the chosen field along ambient axis at base points pts_x."""
    if kind == "constant_e1":
        val = 1.0 if axis == 0 else 0.0
        return np.full(pts_x.shape[0], val)
    if kind != "calibration":
        raise DomainError(f"unknown field kind {kind!r}")
    z = backend.field_batch(pts_x, params.cone.slope, params.gamma)
    return z[:, axis]


def _box_flux(params: CalibrationParams, region: BoxRegion, resolution: int, kind: str) -> float:
    lo = np.asarray(region.lo, dtype=float)
    hi = np.asarray(region.hi, dtype=float)
    dim = lo.size
    n = dim - 1
    total = 0.0
    for axis in range(dim):
        free = [a for a in range(dim) if a != axis]
        widths = (hi[free] - lo[free]) / resolution
        cell = float(np.prod(widths))
        mids = [_midpoints(lo[f], hi[f], resolution) for f in free]
        rest = np.stack(
            np.meshgrid(*mids[1:], indexing="ij"), axis=-1
        ).reshape(-1, len(free) - 1)
        pts = np.empty((rest.shape[0], dim))
        for k, f in enumerate(free[1:]):
            pts[:, f] = rest[:, k]
        for side, fixed in ((0, lo[axis]), (1, hi[axis])):
            pts[:, axis] = fixed
            sign = 1.0 if side == 1 else -1.0
            acc = 0.0
            for v in mids[0]:
                pts[:, free[0]] = v
                acc += _field_component(params, pts[:, :n], axis, dim, kind).sum()
            total += sign * acc * cell
    return total


def _ring_points(x1_vals, r_vals, n) -> np.ndarray:
    """Base points at the representative transverse direction (r along x_2)."""
    pts = np.zeros((x1_vals.size, n))
    pts[:, 0] = x1_vals
    pts[:, 1] = r_vals
    return pts


def _ring_box_flux(
    params: CalibrationParams, region: RingBoxRegion, resolution: int, kind: str
) -> float:
    n = params.cone.n
    lam = params.cone.slope
    area = sphere_area(n - 2)
    (a, b), (r0, r1), (t0, t1) = region.x1, region.r, region.t
    mx = _midpoints(a, b, resolution)
    mr = _midpoints(r0, r1, resolution)
    mt = _midpoints(t0, t1, resolution)
    hx, hr, ht = (b - a) / resolution, (r1 - r0) / resolution, (t1 - t0) / resolution

    def z_at(x1_vals, r_vals):
        return backend.field_batch(
            _ring_points(x1_vals, r_vals, n), lam, params.gamma
        )

    total = 0.0
    # x1 faces: normal -/+ e_1, weight area * r^(n-2).
    rr, tt = np.meshgrid(mr, mt, indexing="ij")
    for side, fixed in ((0, a), (1, b)):
        if kind == "constant_e1":
            comp = np.ones(rr.size)
        else:
            comp = z_at(np.full(rr.size, fixed), rr.ravel())[:, 0]
        w = area * rr.ravel() ** (n - 2) * hr * ht
        total += (1.0 if side else -1.0) * float((comp * w).sum())
    # r faces: normal -/+ transverse radial, weight area * r_face^(n-2).
    xx, tt = np.meshgrid(mx, mt, indexing="ij")
    for side, fixed in ((0, r0), (1, r1)):
        if kind == "constant_e1":
            comp = np.zeros(xx.size)
        else:
            comp = z_at(xx.ravel(), np.full(xx.size, fixed))[:, 1]
        w = area * fixed ** (n - 2) * hx * ht
        total += (1.0 if side else -1.0) * float((comp * w).sum())
    # t faces: normal -/+ e_t, weight area * r^(n-2).
    xx, rr = np.meshgrid(mx, mr, indexing="ij")
    for side, fixed in ((0, t0), (1, t1)):
        if kind == "constant_e1":
            comp = np.zeros(xx.size)
        else:
            comp = z_at(xx.ravel(), rr.ravel())[:, n]
        w = area * rr.ravel() ** (n - 2) * hx * hr
        total += (1.0 if side else -1.0) * float((comp * w).sum())
    return total


def _tube_flux(
    params: CalibrationParams,
    region: TubeRegion,
    resolution: tuple[int, int],
    kind: str,
    absolute: bool = False,
) -> float:
    """Flux through the tube's lateral surface, outward from the axis.

    The surface is {(x_1, eps*w, t)} with w on S^{n-2}; its measure is
    eps^(n-2) d(sphere) dx_1 dt and the normal is the transverse radial
    direction.  With ``absolute`` the integrand is |<field, normal>|: the
    signed flux of the calibration field cancels by parity in x_1, while the
    unsigned integral is the quantity the tube-area estimate bounds.
    """
    n = params.cone.n
    lam = params.cone.slope
    eps = region.eps
    radius = region.ball_radius
    x_max = math.sqrt(radius**2 / params.cone.metric_det - eps**2)
    m1, mt = resolution
    x1_vals = _midpoints(-x_max, x_max, m1)
    hx = 2.0 * x_max / m1
    area = sphere_area(n - 2)
    total = 0.0
    for x1 in x1_vals:
        t_lo = lam * math.hypot(x1, eps)
        t_hi = math.sqrt(max(radius**2 - eps**2 - x1**2, 0.0))
        if t_hi <= t_lo:
            continue
        ht = (t_hi - t_lo) / mt
        if kind == "unit_normal":
            comp = np.ones(mt)
        else:
            pts = _ring_points(np.full(mt, x1), np.full(mt, eps), n)
            comp = backend.field_batch(pts, lam, params.gamma)[:, 1]
        if absolute:
            comp = np.abs(comp)
        total += float(comp.sum()) * area * eps ** (n - 2) * hx * ht
    return total


def _cone_patch_flux(
    params: CalibrationParams, region: ConePatch, resolution: int, kind: str
) -> float:
    """Integral of <field, inward surface normal> over a surface patch.

    The patch is the graph t = slope * rho over the base annulus, with area
    element sqrt(1+slope^2) * r^(n-2) * d(sphere) dx_1 dr.
    """
    if kind != "calibration":
        raise DomainError("cone patch flux supports the calibration field only")
    n = params.cone.n
    lam = params.cone.slope
    (a, b), (r0, r1) = region.x1, region.r
    mx = _midpoints(a, b, resolution)
    mr = _midpoints(r0, r1, resolution)
    hx, hr = (b - a) / resolution, (r1 - r0) / resolution
    xx, rr = np.meshgrid(mx, mr, indexing="ij")
    pts = _ring_points(xx.ravel(), rr.ravel(), n)
    z = backend.field_batch(pts, lam, params.gamma)
    rho = np.linalg.norm(pts, axis=1)
    scale = 1.0 / math.sqrt(params.cone.metric_det)
    dots = scale * (
        -lam * np.einsum("ij,ij->i", z[:, :n], pts) / rho + z[:, n]
    )
    area = sphere_area(n - 2)
    weights = math.sqrt(params.cone.metric_det) * area * pts[:, 1] ** (n - 2) * hx * hr
    return float((dots * weights).sum())


def flux_integral(
    region,
    params: CalibrationParams,
    resolution,
    field: str = "calibration",
    absolute: bool = False,
) -> float:
    """Midpoint-rule flux of the chosen field through the region boundary
    (outward normal); for a ConePatch, through the patch itself."""
    region.validate(params)
    if isinstance(region, BoxRegion):
        return _box_flux(params, region, int(resolution), field)
    if isinstance(region, RingBoxRegion):
        return _ring_box_flux(params, region, int(resolution), field)
    if isinstance(region, TubeRegion):
        return _tube_flux(params, region, tuple(resolution), field, absolute=absolute)
    if isinstance(region, ConePatch):
        return _cone_patch_flux(params, region, int(resolution), field)
    raise DomainError(f"unknown flux region {type(region).__name__}")


def tube_flux_scaling(
    params: CalibrationParams,
    eps_list,
    resolution: tuple[int, int],
    field: str = "calibration",
    ball_radius: float = 1.0,
) -> tuple[list[float], float]:
    """Unsigned tube fluxes per eps and the log-log fitted decay exponent."""
    eps_arr = list(eps_list)
    if len(eps_arr) < 2:
        raise DomainError("scaling study needs at least two tube radii")
    fluxes = [
        flux_integral(TubeRegion(e, ball_radius), params, resolution, field, absolute=True)
        for e in eps_arr
    ]
    slope = float(
        np.polyfit(np.log(np.asarray(eps_arr)), np.log(np.asarray(fluxes)), 1)[0]
    )
    return fluxes, slope
