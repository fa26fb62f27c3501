"""Verification harness: sampling plans, field checks, and the check suite.

Every tolerance used by a check is declared in the configuration tree (see
``default_config``); check functions receive tolerances as arguments and a
report record stores the declared value next to the measured statistic.
Records are deterministic functions of (config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import backend
from .calibration import (
    CalibrationParams,
    feasibility,
    boundary_certificate,
    calibration_form,
    calibration_form_assembled,
    optimal_exponent,
    profiled_potential,
    slope_threshold,
    threshold_bisect,
)
from .flux import BoxRegion, ConePatch, RingBoxRegion, flux_integral, tube_flux_scaling
from .forms import numeric_exterior_derivative
from .geometry import BasePoint, ConeParams, DomainError
from .identities import (
    divergence_identity_stats,
    frame_identity_stats,
    hodge_identity_stats,
    metric_identity_stats,
)
from .report import CheckRecord, VerificationReport
from .sampling import base_points, interior_heights

__all__ = [
    "SamplePlan",
    "default_config",
    "merge_config",
    "resolve_slope",
    "check_norm_bound",
    "check_slice_values",
    "check_tangency",
    "check_divergence",
    "check_dual_route",
    "run_suite",
]


@dataclass(frozen=True)
class SamplePlan:
    """Reproducible sampling spec for one region of the cone."""

    cone: ConeParams
    count: int
    seed: int
    region: str = "interior"  # interior | surface | slice
    rho_bounds: tuple[float, float] = (0.1, 10.0)
    axis_clearance: float = 1e-3
    height_range: tuple[float, float] = (0.05, 2.0)

    def __post_init__(self):
        if self.count < 1:
            raise DomainError("sample count must be >= 1")
        if self.region not in ("interior", "surface", "slice"):
            raise DomainError(f"unknown sample region {self.region!r}")

    def draw(self) -> tuple[np.ndarray, np.ndarray]:
        """Base points and heights; bitwise reproducible from the seed."""
        rng = np.random.default_rng(self.seed)
        xs = base_points(
            rng,
            self.cone.n,
            self.count,
            rho_bounds=self.rho_bounds,
            axis_clearance=self.axis_clearance,
            on_slice=self.region == "slice",
        )
        if self.region == "surface":
            ts = self.cone.slope * np.linalg.norm(xs, axis=1)
        else:
            ts = interior_heights(rng, self.cone, xs, self.height_range)
        return xs, ts


def _below_threshold(cone: ConeParams) -> bool:
    """Slope at or below the sharp threshold, with one-ulp slack so that the
    float rounding of the threshold itself keeps pass semantics."""
    return cone.slope <= slope_threshold(cone.n) * (1.0 + 1e-12)


def check_norm_bound(plan: SamplePlan, params: CalibrationParams, tol: float) -> CheckRecord:
    """Max sampled field norm; pass semantics only at or below the threshold
    slope (informational above it)."""
    xs, _ = plan.draw()
    z = backend.field_batch(xs, params.cone.slope, params.gamma)
    norms = np.linalg.norm(z, axis=1)
    imax = int(np.argmax(norms))
    below = _below_threshold(plan.cone)
    stat = float(norms[imax])
    return CheckRecord(
        check="field_norm_bound",
        n=plan.cone.n,
        lam=plan.cone.slope,
        gamma=params.gamma,
        statistic=stat,
        tolerance=tol,
        passed=(stat <= tol) if below else None,
        seed=plan.seed,
        details={"argmax_point": xs[imax], "below_threshold": below},
    )


def check_slice_values(plan: SamplePlan, params: CalibrationParams, tol: float) -> CheckRecord:
    """Max |field - e_1| over hyperplane-slice samples."""
    plan = replace(plan, region="slice")
    xs, _ = plan.draw()
    z = backend.field_batch(xs, params.cone.slope, params.gamma)
    e1 = np.zeros(plan.cone.n + 1)
    e1[0] = 1.0
    stat = float(np.abs(z - e1).max())
    return CheckRecord(
        check="field_slice_value",
        n=plan.cone.n,
        lam=plan.cone.slope,
        gamma=params.gamma,
        statistic=stat,
        tolerance=tol,
        passed=stat <= tol,
        seed=plan.seed,
    )


def check_tangency(plan: SamplePlan, params: CalibrationParams, tol: float) -> CheckRecord:
    """Max |<field, surface normal>| over lateral-surface samples."""
    plan = replace(plan, region="surface")
    xs, _ = plan.draw()
    n = plan.cone.n
    lam = plan.cone.slope
    z = backend.field_batch(xs, lam, params.gamma)
    rho = np.linalg.norm(xs, axis=1)
    dots = (
        -lam * np.einsum("ij,ij->i", z[:, :n], xs) / rho + z[:, n]
    ) / math.sqrt(plan.cone.metric_det)
    stat = float(np.abs(dots).max())
    return CheckRecord(
        check="field_tangency",
        n=n,
        lam=lam,
        gamma=params.gamma,
        statistic=stat,
        tolerance=tol,
        passed=stat <= tol,
        seed=plan.seed,
    )


def check_divergence(
    plan: SamplePlan,
    params: CalibrationParams,
    steps: list[float],
    tol: float,
    order_min: float,
) -> CheckRecord:
    """Max finite-difference ambient divergence per step plus the fitted
    convergence order; passes when the finest-step statistic meets the
    tolerance and the order meets the floor.

    The plan must keep every stencil off the axis plane: the clearance has
    to exceed twice the largest step relative to the smallest radius.
    """
    steps = sorted(steps, reverse=True)
    lo = plan.rho_bounds[0]
    if plan.axis_clearance * lo <= 2.0 * max(steps):
        raise DomainError(
            "stencil exits the off-axis chart: raise the plan clearance or shrink steps"
        )
    xs, _ = plan.draw()
    maxima = []
    for step in steps:
        div = backend.field_divergence_fd(xs, params.cone.slope, params.gamma, step)
        maxima.append(float(np.abs(div).max()))
    order = float(
        np.polyfit(np.log(np.asarray(steps)), np.log(np.asarray(maxima)), 1)[0]
    )
    stat = maxima[-1]
    return CheckRecord(
        check="field_divergence",
        n=plan.cone.n,
        lam=plan.cone.slope,
        gamma=params.gamma,
        statistic=stat,
        tolerance=tol,
        passed=stat <= tol and order >= order_min,
        seed=plan.seed,
        order=order,
        details={"steps": steps, "max_abs_divergence": maxima, "order_min": order_min},
    )


def check_dual_route(
    plan: SamplePlan,
    params: CalibrationParams,
    tol: float,
    order_min: float,
    derivative_points: int = 5,
    derivative_steps: tuple[float, float] = (1e-2, 1e-3),
) -> CheckRecord:
    """Componentwise agreement of the two closed assemblies of the
    calibration form, plus the convergence order of the numeric exterior
    derivative of its primitive toward it."""
    xs, _ = plan.draw()
    worst = 0.0
    for row in xs:
        x = BasePoint(row)
        diff = calibration_form(x, params) - calibration_form_assembled(x, params)
        worst = max(worst, diff.max_abs())

    rng = np.random.default_rng(plan.seed + 1)
    idx = rng.choice(xs.shape[0], size=min(derivative_points, xs.shape[0]), replace=False)
    orders = []
    for row in xs[idx]:
        x = BasePoint(row)
        scale = min(1.0, 0.2 * x.r, 0.2 * x.rho)
        target = calibration_form(x, params)
        errs = []
        for step in derivative_steps:
            approx = numeric_exterior_derivative(
                lambda y: profiled_potential(BasePoint(y), params), row, step * scale
            )
            errs.append(max((approx - target).max_abs(), 1e-300))
        orders.append(
            math.log(errs[0] / errs[1]) / math.log(derivative_steps[0] / derivative_steps[1])
        )
    order = float(min(orders))
    return CheckRecord(
        check="form_dual_route",
        n=plan.cone.n,
        lam=plan.cone.slope,
        gamma=params.gamma,
        statistic=worst,
        tolerance=tol,
        passed=worst <= tol and order >= order_min,
        seed=plan.seed,
        order=order,
        details={"order_min": order_min},
    )


def resolve_slope(token, n: int) -> float:
    """Resolve a slope spec: a number, 'bar', 'bar*F', or 'bar/F'."""
    if isinstance(token, (int, float)):
        return float(token)
    text = str(token).strip()
    if text == "bar":
        return slope_threshold(n)
    if text.startswith("bar*"):
        return slope_threshold(n) * float(text[4:])
    if text.startswith("bar/"):
        return slope_threshold(n) / float(text[4:])
    return float(text)


def default_config() -> dict:
    """Full default configuration tree, including every declared tolerance."""
    return {
        "seed": 20260809,
        "fault": 0.0,
        "identities": {
            "n": [2, 3, 4, 5, 6, 7],
            "lambda": [0.1, 0.5, 1.0, 2.0],
            "count": 10000,
            "hodge_count": 100,
            "divergence_count": 25,
            "step": 1e-4,
            "rho_bounds": [0.1, 10.0],
            "axis_clearance": 1e-3,
        },
        "threshold": {"n": [4, 5, 6, 7, 8, 9, 10], "tol": 1e-10},
        "field": {
            "n": [4, 5, 6, 7],
            "lambda": ["bar/2", "bar"],
            "samples": 100000,
            "slice_samples": 20000,
            "surface_samples": 20000,
            "rho_bounds": [0.1, 10.0],
            "axis_clearance": 1e-3,
            "fd_samples": 10000,
            "fd_steps": [1e-3, 1e-4],
            "fd_rho_bounds": [0.5, 10.0],
            "fd_clearance": 0.2,
            "dual_route_samples": 1000,
            "gamma_factors": [0.5, 0.9, 1.1, 2.0],
        },
        "flux": {
            "n": [4],
            "lambda": [0.3],
            "box_resolutions": [12, 24, 48],
            "ring_resolutions": [16, 32, 64],
            "tube_n": [4, 5],
            "tube_lambda": ["bar*0.85"],
            "tube_eps": [0.2, 0.1, 0.05],
            "tube_resolution": [400, 20],
            "cone_patch": {"x1": [-0.8, 0.8], "r": [0.3, 1.2], "resolution": 200},
        },
        "tolerances": {
            "metric_det": 1e-12,
            "metric_inverse": 1e-12,
            "radial_norm": 1e-12,
            "angular_norm": 1e-12,
            "radial_angular_orth": 1e-12,
            "potential_norm": 1e-12,
            "adjugate_forms": 1e-12,
            "coordinate_identities": 1e-14,
            "frame_gram": 1e-12,
            "frame_volume": 1e-12,
            "normal_orthogonality": 1e-12,
            "normal_unit": 1e-12,
            "star_involution": 1e-12,
            "star_volume": 1e-12,
            "star_isometry": 1e-12,
            "star_contraction": 1e-12,
            "star_defining": 1e-12,
            "divergence_identity": 1e-6,
            "threshold_bisect": 1e-10,
            "boundary_certificate": 0.0,
            "field_norm_bound": 1.0 + 1e-9,
            "field_slice_value": 1e-10,
            "field_tangency": 1e-10,
            "field_divergence": 1e-6,
            "field_divergence_order": 1.9,
            "form_dual_route": 1e-12,
            "form_dual_route_order": 1.9,
            "gamma_optimality": 1e-15,
            "feasibility_band": 1e-12,
            "box_flux": 1e-6,
            "ring_flux": 3e-6,
            "flux_order_band": [1.6, 2.4],
            "cone_face_flux": 1e-10,
            "tube_slope_margin": 0.1,
            "tube_control_band": 0.05,
        },
    }


def merge_config(base: dict, override: dict | None) -> dict:
    """Recursive dict merge; override wins, non-dict values replace."""
    if override is None:
        return base
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


def _identity_records(config: dict) -> list[CheckRecord]:
    cfg = config["identities"]
    tols = config["tolerances"]
    fault = float(config.get("fault", 0.0))
    records = []
    for n in cfg["n"]:
        for k, lam in enumerate(cfg["lambda"]):
            cone = ConeParams(n, float(lam))
            seed = int(np.random.SeedSequence([config["seed"], n, k]).generate_state(1)[0])
            rng = np.random.default_rng([config["seed"], n, k])
            xs = base_points(
                rng,
                n,
                int(cfg["count"]),
                rho_bounds=tuple(cfg["rho_bounds"]),
                axis_clearance=float(cfg["axis_clearance"]),
            )
            stats = metric_identity_stats(cone, xs, fault=fault)
            stats.update(frame_identity_stats(cone, xs))
            stats.update(hodge_identity_stats(cone, rng, int(cfg["hodge_count"]), fault=fault))
            stats.update(
                divergence_identity_stats(
                    cone, rng, int(cfg["divergence_count"]), float(cfg["step"])
                )
            )
            for name, stat in stats.items():
                tol = float(tols[name])
                records.append(
                    CheckRecord(
                        check=name,
                        n=n,
                        lam=float(lam),
                        gamma=None,
                        statistic=float(stat),
                        tolerance=tol,
                        passed=stat <= tol,
                        seed=seed,
                    )
                )
    return records


def _threshold_records(config: dict) -> list[CheckRecord]:
    cfg = config["threshold"]
    tol = float(cfg["tol"])
    zero_tol = float(config["tolerances"]["boundary_certificate"])
    records = []
    for n in cfg["n"]:
        closed = slope_threshold(n)
        if n == 3:
            records.append(
                CheckRecord(
                    check="threshold_empty_range",
                    n=n,
                    lam=None,
                    gamma=None,
                    statistic=closed,
                    tolerance=0.0,
                    passed=closed == 0.0,
                    seed=None,
                )
            )
            continue
        recovered = threshold_bisect(n, tol)
        err = abs(recovered - closed)
        records.append(
            CheckRecord(
                check="threshold_bisect",
                n=n,
                lam=closed,
                gamma=None,
                statistic=err,
                tolerance=tol,
                passed=err <= tol,
                seed=None,
                details={"closed_form": closed, "bisected": recovered},
            )
        )
        cert = boundary_certificate(n)
        records.append(
            CheckRecord(
                check="boundary_certificate",
                n=n,
                lam=closed,
                gamma=float(n - 3),
                statistic=float(cert),
                tolerance=zero_tol,
                passed=cert == 0,
                seed=None,
                details={"exact": str(cert)},
            )
        )
    return records


def _field_records(config: dict) -> list[CheckRecord]:
    cfg = config["field"]
    tols = config["tolerances"]
    records = []
    for n in cfg["n"]:
        for k, token in enumerate(cfg["lambda"]):
            lam = resolve_slope(token, n)
            cone = ConeParams(n, lam)
            try:
                params = CalibrationParams.optimal(cone)
            except DomainError:
                records.append(
                    CheckRecord(
                        check="feasibility",
                        n=n,
                        lam=lam,
                        gamma=None,
                        statistic=math.inf,
                        tolerance=0.0,
                        passed=None,
                        seed=None,
                        details={"feasible": False, "note": "no positive optimal exponent"},
                    )
                )
                continue
            seed = int(np.random.SeedSequence([config["seed"], 7, n, k]).generate_state(1)[0])
            rep = feasibility(cone, params.gamma)
            below = lam <= slope_threshold(n) * (1.0 + 1e-12)
            band = float(tols["feasibility_band"])
            records.append(
                CheckRecord(
                    check="feasibility",
                    n=n,
                    lam=lam,
                    gamma=params.gamma,
                    statistic=rep.lhs,
                    tolerance=band,
                    passed=(rep.lhs <= band) if below else None,
                    seed=None,
                    details={"feasible": rep.feasible},
                )
            )
            factors = [float(f) for f in cfg["gamma_factors"]]
            base_lhs = rep.lhs
            gap = max(
                base_lhs - feasibility(cone, params.gamma * f).lhs for f in factors
            )
            records.append(
                CheckRecord(
                    check="gamma_optimality",
                    n=n,
                    lam=lam,
                    gamma=params.gamma,
                    statistic=gap,
                    tolerance=float(tols["gamma_optimality"]),
                    passed=gap <= float(tols["gamma_optimality"]),
                    seed=None,
                    details={"factors": factors},
                )
            )
            plan = SamplePlan(
                cone,
                int(cfg["samples"]),
                seed,
                rho_bounds=tuple(cfg["rho_bounds"]),
                axis_clearance=float(cfg["axis_clearance"]),
            )
            records.append(check_norm_bound(plan, params, float(tols["field_norm_bound"])))
            records.append(
                check_slice_values(
                    replace(plan, count=int(cfg["slice_samples"]), seed=seed + 1),
                    params,
                    float(tols["field_slice_value"]),
                )
            )
            records.append(
                check_tangency(
                    replace(plan, count=int(cfg["surface_samples"]), seed=seed + 2),
                    params,
                    float(tols["field_tangency"]),
                )
            )
            fd_plan = replace(
                plan,
                count=int(cfg["fd_samples"]),
                seed=seed + 3,
                rho_bounds=tuple(cfg["fd_rho_bounds"]),
                axis_clearance=float(cfg["fd_clearance"]),
            )
            records.append(
                check_divergence(
                    fd_plan,
                    params,
                    [float(s) for s in cfg["fd_steps"]],
                    float(tols["field_divergence"]),
                    float(tols["field_divergence_order"]),
                )
            )
            records.append(
                check_dual_route(
                    replace(plan, count=int(cfg["dual_route_samples"]), seed=seed + 4),
                    params,
                    float(tols["form_dual_route"]),
                    float(tols["form_dual_route_order"]),
                )
            )
    return records


def _flux_records(config: dict) -> list[CheckRecord]:
    cfg = config["flux"]
    tols = config["tolerances"]
    band = [float(v) for v in tols["flux_order_band"]]
    records = []
    for n in cfg["n"]:
        for token in cfg["lambda"]:
            lam = resolve_slope(token, n)
            params = CalibrationParams.optimal(ConeParams(n, lam))
            box = BoxRegion(lo=(0.2,) * n + (0.5,), hi=(0.6,) * n + (0.9,))
            resolutions = [int(r) for r in cfg["box_resolutions"]]
            fluxes = [abs(flux_integral(box, params, r)) for r in resolutions]
            order = float(
                -np.polyfit(np.log(resolutions), np.log(np.maximum(fluxes, 1e-300)), 1)[0]
            )
            records.append(
                CheckRecord(
                    check="box_flux",
                    n=n,
                    lam=lam,
                    gamma=params.gamma,
                    statistic=fluxes[-1],
                    tolerance=float(tols["box_flux"]),
                    passed=fluxes[-1] <= float(tols["box_flux"])
                    and band[0] <= order <= band[1],
                    seed=None,
                    order=order,
                    details={"resolutions": resolutions, "fluxes": fluxes},
                )
            )
            ring = RingBoxRegion(x1=(-0.4, 0.5), r=(0.3, 0.9), t=(0.5, 1.0))
            resolutions = [int(r) for r in cfg["ring_resolutions"]]
            fluxes = [abs(flux_integral(ring, params, r)) for r in resolutions]
            order = float(
                -np.polyfit(np.log(resolutions), np.log(np.maximum(fluxes, 1e-300)), 1)[0]
            )
            records.append(
                CheckRecord(
                    check="ring_flux",
                    n=n,
                    lam=lam,
                    gamma=params.gamma,
                    statistic=fluxes[-1],
                    tolerance=float(tols["ring_flux"]),
                    passed=fluxes[-1] <= float(tols["ring_flux"])
                    and band[0] <= order <= band[1],
                    seed=None,
                    order=order,
                    details={"resolutions": resolutions, "fluxes": fluxes},
                )
            )
            patch_cfg = cfg["cone_patch"]
            patch = ConePatch(x1=tuple(patch_cfg["x1"]), r=tuple(patch_cfg["r"]))
            face = abs(flux_integral(patch, params, int(patch_cfg["resolution"])))
            records.append(
                CheckRecord(
                    check="cone_face_flux",
                    n=n,
                    lam=lam,
                    gamma=params.gamma,
                    statistic=face,
                    tolerance=float(tols["cone_face_flux"]),
                    passed=face <= float(tols["cone_face_flux"]),
                    seed=None,
                )
            )
    margin = float(tols["tube_slope_margin"])
    control_band = float(tols["tube_control_band"])
    for n in cfg["tube_n"]:
        for token in cfg["tube_lambda"]:
            lam = resolve_slope(token, n)
            params = CalibrationParams.optimal(ConeParams(n, lam))
            eps_list = [float(e) for e in cfg["tube_eps"]]
            resolution = tuple(int(v) for v in cfg["tube_resolution"])
            fluxes, slope = tube_flux_scaling(params, eps_list, resolution)
            floor = n - 2 - margin
            records.append(
                CheckRecord(
                    check="tube_flux_scaling",
                    n=n,
                    lam=lam,
                    gamma=params.gamma,
                    statistic=slope,
                    tolerance=floor,
                    passed=slope >= floor,
                    seed=None,
                    order=slope,
                    details={"eps": eps_list, "fluxes": fluxes},
                )
            )
            fluxes, slope = tube_flux_scaling(
                params, eps_list, resolution, field="unit_normal"
            )
            records.append(
                CheckRecord(
                    check="tube_area_control",
                    n=n,
                    lam=lam,
                    gamma=params.gamma,
                    statistic=slope,
                    tolerance=control_band,
                    passed=abs(slope - (n - 2)) <= control_band,
                    seed=None,
                    order=slope,
                    details={"eps": eps_list, "fluxes": fluxes},
                )
            )
    return records


SECTION_BUILDERS = {
    "identities": _identity_records,
    "threshold": _threshold_records,
    "field": _field_records,
    "flux": _flux_records,
}


def run_suite(
    config: dict | None = None,
    sections: tuple[str, ...] = ("identities", "threshold", "field", "flux"),
) -> VerificationReport:
    """Run the requested check sections and aggregate a report."""
    cfg = merge_config(default_config(), config)
    records: list[CheckRecord] = []
    for section in sections:
        if section not in SECTION_BUILDERS:
            raise DomainError(f"unknown suite section {section!r}")
        records.extend(SECTION_BUILDERS[section](cfg))
    return VerificationReport(records=records, config=cfg, seed=int(cfg["seed"]))
