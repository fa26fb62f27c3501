"""Identity suites for the cone metric and the Hodge machinery.

The metric suite evaluates every closed-form identity of the base-chart
metric through the generic Gram-determinant engine, vectorized across sample
points (stacked LU determinants, not the closed forms themselves).  The
Hodge suite exercises the star operator's defining properties and the
divergence identity pointwise through the sparse-form engine.

A fault parameter perturbs the inverse metric before the checks run; it
exists as a negative control and must make the affected records fail.
"""

from __future__ import annotations

import math

import numpy as np

from .forms import (
    KForm,
    flat,
    form_inner,
    form_norm,
    hodge_star,
    interior_product,
    multi_indices,
    numeric_divergence,
    numeric_exterior_derivative,
    volume_form,
    wedge,
)
from .geometry import BasePoint, ConeParams, MetricAtPoint, metric_at

__all__ = [
    "metric_identity_stats",
    "frame_identity_stats",
    "hodge_identity_stats",
    "divergence_identity_stats",
]


def _metric_stacks(xs: np.ndarray, slope: float, fault: float = 0.0):
    """Stacked metric and inverse-metric matrices at each sample row."""
    count, n = xs.shape
    rho2 = np.einsum("ij,ij->i", xs, xs)
    outer = xs[:, :, None] * xs[:, None, :] / rho2[:, None, None]
    eye = np.broadcast_to(np.eye(n), (count, n, n))
    lam2 = slope * slope
    g = eye + lam2 * outer
    g_inv = eye - (lam2 / (1.0 + lam2)) * outer
    if fault != 0.0:
        g_inv = g_inv.copy()
        g_inv[:, 0, 0] += fault
    return g, g_inv


def _inner_one_forms(g_inv: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ni,nij,nj->n", a, g_inv, b)


def metric_identity_stats(
    cone: ConeParams,
    xs: np.ndarray,
    fault: float = 0.0,
) -> dict[str, float]:
    """Max absolute errors of the base-metric identities over sample rows.

    Keys: metric_det, metric_inverse, radial_norm, angular_norm,
    radial_angular_orth, potential_norm, adjugate_forms, coordinate_identities.
    """
    count, n = xs.shape
    lam = cone.slope
    lam2 = lam * lam
    g, g_inv = _metric_stacks(xs, lam, fault=fault)
    rho = np.linalg.norm(xs, axis=1)
    r = np.linalg.norm(xs[:, 1:], axis=1)

    stats: dict[str, float] = {}
    det = np.linalg.det(g)
    stats["metric_det"] = float(np.abs(det - cone.metric_det).max())
    prod = np.einsum("nij,njk->nik", g, g_inv)
    stats["metric_inverse"] = float(
        np.abs(prod - np.eye(n)[None, :, :]).max()
    )

    # dρ and dθ in the coordinate cobasis.
    d_rho = xs / rho[:, None]
    d_theta = np.empty_like(xs)
    d_theta[:, 0] = r / rho**2
    d_theta[:, 1:] = -(xs[:, 0] / (r * rho**2))[:, None] * xs[:, 1:]

    norm_rho = np.sqrt(_inner_one_forms(g_inv, d_rho, d_rho))
    stats["radial_norm"] = float(np.abs(norm_rho - 1.0 / math.sqrt(cone.metric_det)).max())
    norm_theta = np.sqrt(_inner_one_forms(g_inv, d_theta, d_theta))
    stats["angular_norm"] = float(np.abs(norm_theta - 1.0 / rho).max())
    stats["radial_angular_orth"] = float(
        np.abs(_inner_one_forms(g_inv, d_rho, d_theta)).max()
    )

    # Potential-form norm via the degree-(n-2) Gram determinants.
    scale = math.sqrt(cone.metric_det) / (n - 1)
    coeff = np.empty((count, n - 1))
    for pos, i in enumerate(range(2, n + 1)):
        coeff[:, pos] = ((-1.0) ** i) * scale * xs[:, i - 1]
    gram = np.empty((count, n - 1, n - 1))
    full = list(range(1, n))  # 0-based columns of the transverse block
    for pi, i in enumerate(range(2, n + 1)):
        rows = [c for c in full if c != i - 1]
        for pj, j in enumerate(range(2, n + 1)):
            cols = [c for c in full if c != j - 1]
            gram[:, pi, pj] = np.linalg.det(g_inv[:, rows][:, :, cols])
    norm_pot_sq = np.einsum("np,npq,nq->n", coeff, gram, coeff)
    norm_pot = np.sqrt(np.maximum(norm_pot_sq, 0.0))
    target = r * math.sqrt(cone.metric_det) / (n - 1)
    stats["potential_norm"] = float(np.abs(norm_pot - target).max())

    # Adjugate closed forms for the same Gram block.
    denom = rho**2 + lam2 * xs[:, 0] ** 2
    det_block_inv = 1.0 + lam2 * r**2 / denom
    adj_err = 0.0
    for pi, i in enumerate(range(2, n + 1)):
        for pj, j in enumerate(range(2, n + 1)):
            inv_entry = (1.0 if i == j else 0.0) + lam2 * xs[:, i - 1] * xs[:, j - 1] / denom
            closed = ((-1.0) ** (i + j)) * inv_entry / det_block_inv
            adj_err = max(adj_err, float(np.abs(gram[:, pi, pj] - closed).max()))
    stats["adjugate_forms"] = adj_err

    # Scale-normalized residuals: the raw tan identity has conditioning
    # 1 + u^2 (u up to 1/clearance), so it is certified in angle space.
    theta = np.arctan2(xs[:, 0], r)
    u = xs[:, 0] / r
    scale = np.maximum(rho, 1.0)
    coord_err = max(
        float((np.abs(xs[:, 0] - rho * np.sin(theta)) / scale).max()),
        float((np.abs(r - rho * np.cos(theta)) / scale).max()),
        float((np.abs(u - np.tan(theta)) / (1.0 + u**2)).max()),
    )
    stats["coordinate_identities"] = coord_err
    return stats


def frame_identity_stats(cone: ConeParams, xs: np.ndarray) -> dict[str, float]:
    """Surface-frame checks: Gram matrix vs metric, unit frame volume with
    the vertical direction, and normal orthogonality."""
    count, n = xs.shape
    lam = cone.slope
    rho = np.linalg.norm(xs, axis=1)
    g, _ = _metric_stacks(xs, lam)
    frame = np.zeros((count, n, n + 1))
    frame[:, :, :n] = np.eye(n)
    frame[:, :, n] = lam * xs / rho[:, None]
    gram = np.einsum("nia,nja->nij", frame, frame)
    stats = {"frame_gram": float(np.abs(gram - g).max())}

    square = np.zeros((count, n + 1, n + 1))
    square[:, :n, :] = frame
    square[:, n, n] = 1.0
    stats["frame_volume"] = float(np.abs(np.abs(np.linalg.det(square)) - 1.0).max())

    normal = np.concatenate(
        [-lam * xs / rho[:, None], np.ones((count, 1))], axis=1
    ) / math.sqrt(cone.metric_det)
    dots = np.einsum("nia,na->ni", frame, normal)
    stats["normal_orthogonality"] = float(np.abs(dots).max())
    stats["normal_unit"] = float(np.abs(np.linalg.norm(normal, axis=1) - 1.0).max())
    return stats


def _random_form(rng: np.random.Generator, n: int, degree: int, terms: int = 3) -> KForm:
    indices = list(multi_indices(n, degree))
    take = min(terms, len(indices))
    chosen = rng.choice(len(indices), size=take, replace=False)
    return KForm(n, degree, {indices[i]: float(rng.uniform(-1, 1)) for i in chosen})


def hodge_identity_stats(
    cone: ConeParams,
    rng: np.random.Generator,
    count: int,
    fault: float = 0.0,
) -> dict[str, float]:
    """Pointwise star-operator checks at random base points.

    Keys: star_involution, star_volume, star_isometry, star_contraction,
    star_defining (the defining relation on random basis pairs).
    """
    n = cone.n
    stats = {k: 0.0 for k in (
        "star_involution", "star_volume", "star_isometry",
        "star_contraction", "star_defining",
    )}
    for _ in range(count):
        x = rng.normal(size=n)
        x[int(rng.integers(1, n))] += 2.0
        m = metric_at(BasePoint(x), cone)
        if fault != 0.0:
            g_inv = m.g_inv.copy()
            g_inv[0, 0] += fault
            m = MetricAtPoint(g=m.g, g_inv=g_inv, det_g=m.det_g)
        vol = volume_form(m)

        k = int(rng.integers(0, n + 1))
        a = _random_form(rng, n, k)
        twice = hodge_star(hodge_star(a, m), m)
        sign = (-1.0) ** (k * (n - k))
        stats["star_involution"] = max(
            stats["star_involution"], (twice - sign * a).max_abs()
        )
        stats["star_volume"] = max(
            stats["star_volume"], abs(hodge_star(vol, m).coefficient(()) - 1.0)
        )
        stats["star_isometry"] = max(
            stats["star_isometry"],
            abs(form_norm(hodge_star(a, m), m) - form_norm(a, m)),
        )

        v = rng.uniform(-1, 1, size=n)
        diff = hodge_star(flat(v, m), m) - interior_product(v, vol)
        stats["star_contraction"] = max(stats["star_contraction"], diff.max_abs())

        # Defining relation on random basis pairs of the same degree.
        k2 = int(rng.integers(0, n + 1))
        pool = list(multi_indices(n, k2))
        alpha = pool[int(rng.integers(0, len(pool)))]
        beta = pool[int(rng.integers(0, len(pool)))]
        lhs = KForm.basis(n, alpha)
        rhs = KForm.basis(n, beta)
        pairing = wedge(lhs, hodge_star(rhs, m))
        expected = form_inner(lhs, rhs, m) * vol
        stats["star_defining"] = max(
            stats["star_defining"], (pairing - expected).max_abs()
        )
    return stats


def _random_polynomial_field(rng: np.random.Generator, n: int):
    c0 = rng.uniform(-1, 1, size=n)
    c1 = rng.uniform(-1, 1, size=(n, n))
    c2 = rng.uniform(-0.5, 0.5, size=(n, n, n))

    def field(y: np.ndarray) -> np.ndarray:
        return c0 + c1 @ y + np.einsum("ijk,j,k->i", c2, y, y)

    return field


def divergence_identity_stats(
    cone: ConeParams,
    rng: np.random.Generator,
    count: int,
    step: float,
) -> dict[str, float]:
    """Numeric check of star(d(contraction(X, volume))) = divergence(X) for
    random polynomial fields at random points; also the contraction route of
    the potential form (d of it closes onto the flat-slice form)."""
    n = cone.n

    def sqrt_det(y: np.ndarray) -> float:
        return math.sqrt(metric_at(BasePoint(y), cone).det_g)

    worst = 0.0
    for _ in range(count):
        x = rng.normal(size=n)
        x[int(rng.integers(1, n))] += 2.0
        field = _random_polynomial_field(rng, n)

        def contraction(y: np.ndarray) -> KForm:
            my = metric_at(BasePoint(y), cone)
            return interior_product(field(y), volume_form(my))

        m = metric_at(BasePoint(x), cone)
        lhs = hodge_star(
            numeric_exterior_derivative(contraction, x, step), m
        ).coefficient(())
        rhs = numeric_divergence(field, x, step, sqrt_det=sqrt_det)
        worst = max(worst, abs(lhs - rhs))
    return {"divergence_identity": worst}
