"""Reproducible point sampling on the cone and its base chart.

The radial coordinate is log-uniform (the field and metric identities are
scale-covariant along rays, so this spreads effort across scales); the polar
angle is uniform inside a band that keeps a declared clearance from the axis
plane x' = 0, where the field is undefined.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import ConeParams, DomainError

__all__ = ["base_points", "interior_heights", "surface_heights"]


def base_points(
    rng: np.random.Generator,
    n: int,
    count: int,
    rho_bounds: tuple[float, float] = (0.1, 10.0),
    axis_clearance: float = 1e-3,
    on_slice: bool = False,
) -> np.ndarray:
    """Sample base points with log-uniform radius and r >= clearance * rho.

    With ``on_slice`` the first coordinate is exactly zero (points of the
    hyperplane slice).
    """
    lo, hi = rho_bounds
    if not (0 < lo <= hi):
        raise DomainError(f"invalid radial bounds {rho_bounds}")
    if not 0 < axis_clearance < 1:
        raise DomainError(f"axis clearance must lie in (0, 1), got {axis_clearance}")
    rho = np.exp(rng.uniform(math.log(lo), math.log(hi), size=count))
    if on_slice:
        theta = np.zeros(count)
    else:
        theta_max = math.acos(axis_clearance)
        theta = rng.uniform(-theta_max, theta_max, size=count)
    direction = rng.standard_normal(size=(count, n - 1))
    norms = np.linalg.norm(direction, axis=1)
    # Degenerate draws are measure zero but would divide by zero; redraw as axes.
    bad = norms == 0.0
    if bad.any():
        direction[bad] = 0.0
        direction[bad, 0] = 1.0
        norms[bad] = 1.0
    direction /= norms[:, None]
    xs = np.empty((count, n))
    xs[:, 0] = rho * np.sin(theta)
    xs[:, 1:] = (rho * np.cos(theta))[:, None] * direction
    return xs


def interior_heights(
    rng: np.random.Generator,
    cone: ConeParams,
    xs: np.ndarray,
    offset_range: tuple[float, float] = (0.05, 2.0),
) -> np.ndarray:
    """Heights strictly above the cone surface, offset proportionally to rho."""
    lo, hi = offset_range
    if not (0 < lo <= hi):
        raise DomainError(f"invalid height offsets {offset_range}")
    rho = np.linalg.norm(xs, axis=1)
    return cone.slope * rho + rho * rng.uniform(lo, hi, size=xs.shape[0])


def surface_heights(cone: ConeParams, xs: np.ndarray) -> np.ndarray:
    """Heights exactly on the cone surface."""
    return cone.slope * np.linalg.norm(xs, axis=1)
