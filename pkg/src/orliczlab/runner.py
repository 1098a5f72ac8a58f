"""Dispatch layer: one function per command, JSON-able payloads in and out.

The HTTP service and the CLI both go through these functions, so reports are
identical regardless of transport.  Every payload is deterministic for a
fixed config; wall-clock data never enters a payload.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import conditions, counterexample, distortion, extremal, modulus, oscillation
from .config import RunConfig
from .gauges import parse_gauge
from .reports import FAIL, VerificationReport
from .weights import RadialWeight, parse_weight

__all__ = [
    "RunnerError",
    "run_check_condition",
    "run_build_extremal",
    "run_build_counterexample",
    "run_verify_counterexample",
    "run_oscillation",
    "run_modulus",
    "run_distortion",
    "payload_failed",
]


class RunnerError(ValueError):
    pass


def payload_failed(payload: dict) -> bool:
    """True when any report row in the payload is a FAIL."""

    def walk(obj):
        if isinstance(obj, dict):
            if obj.get("status") == FAIL:
                return True
            return any(walk(v) for v in obj.values())
        if isinstance(obj, list):
            return any(walk(v) for v in obj)
        return False

    return walk(payload)


def _verdict_row(v: conditions.ConvergenceVerdict, margin: float) -> dict:
    row = v.to_dict()
    row["margin"] = margin
    return row


def run_check_condition(phi: str, condition: str = "calderon",
                        k: Optional[int] = None, p: Optional[float] = None,
                        delta: Optional[float] = None, delta0: Optional[float] = None,
                        weight: Optional[str] = None, dimension: int = 3,
                        delta_max: float = 0.5,
                        config: RunConfig = RunConfig()) -> dict:
    margin = config.classifier_margin
    out: dict = {"command": "check-condition", "condition": condition, "phi": phi}
    if condition == "calderon":
        if k is None:
            raise RunnerError("calderon needs --k")
        gauge = parse_gauge(phi)
        verdict = conditions.calderon_condition(gauge, k, margin=margin)
        out["reports"] = [_verdict_row(verdict, margin)]
        if verdict.convergent:
            out["a_star"] = conditions.a_star(gauge, k)
    elif condition == "equivalence":
        if p is None or delta is None:
            raise RunnerError("equivalence needs --p and --delta")
        gauge = parse_gauge(phi)
        report = conditions.condition_equivalence_report(gauge, p, delta, margin=margin)
        rows = [_verdict_row(v, margin) for v in report.values()]
        out["reports"] = rows
        out["all_agree"] = len({r["classification"] for r in rows}) == 1
        out["convex"] = gauge.convex
    elif condition == "inverse-tail":
        if p is None or delta0 is None:
            raise RunnerError("inverse-tail needs --p and --delta0")
        verdict = conditions.inverse_tail_condition(parse_gauge(phi), p, delta0, margin=margin)
        out["reports"] = [_verdict_row(verdict, margin)]
    elif condition == "lehto":
        if weight is None or p is None:
            raise RunnerError("lehto needs --weight and --p")
        w = parse_weight(weight, dimension)
        verdict = conditions.lehto_integral(w, p, margin=margin)
        out["reports"] = [_verdict_row(verdict, margin)]
    elif condition == "boundary":
        if weight is None:
            raise RunnerError("boundary needs --weight")
        w = parse_weight(weight, dimension)
        verdict = conditions.boundary_criterion(w, delta_max, margin=margin)
        out["reports"] = [_verdict_row(verdict, margin)]
        out["extension_criterion_met"] = verdict.divergent
    elif condition == "sphere-average-bound":
        if weight is None or p is None:
            raise RunnerError("sphere-average-bound needs --weight, --phi and --p")
        w = parse_weight(weight, dimension)
        rep = conditions.lemma61_bound_check(w, parse_gauge(phi), p)
        out["reports"] = [rep.to_dict()]
    else:
        raise RunnerError(f"unknown condition {condition!r}")
    return out


def run_build_extremal(phi: str, k: int, rescale: bool = True,
                       u_max: float = 1e6, nodes: int = 16384,
                       s_checks: int = 24,
                       config: RunConfig = RunConfig()) -> dict:
    gauge = parse_gauge(phi)
    profile = extremal.build_profile(gauge, k, u_max=u_max, nodes=nodes,
                                     rescale=rescale, gauge_spec=phi)
    pair = extremal.verify_calderon_pair(profile)
    svals = np.geomspace(1e-8, 0.9, s_checks)
    back = profile.psi(np.exp(profile.log_h(np.log(svals))))
    inversion_gap = float(np.max(np.abs(back / svals - 1.0)))
    total = profile.total_energy()
    rows = [
        pair["h_integral"].to_dict(),
        pair["moment_integral"].to_dict(),
        VerificationReport.from_sides(
            "inversion_consistency",
            "psi(h(s)) recovers s on a log grid",
            lhs=inversion_gap, rhs=0.0, margin=1e-9, relation="<=",
        ).to_dict(),
        VerificationReport.from_sides(
            "unit_energy",
            "total radial energy after normalization <= 1",
            lhs=total, rhs=1.0, margin=1e-9, relation="<=",
            details={"rescale_factor": profile.rescale},
        ).to_dict(),
    ]
    return {
        "command": "build-extremal",
        "phi": phi,
        "k": k,
        "reports": rows,
        "profile": profile.to_dict(),
        "h_table": {
            "s": svals.tolist(),
            "h": np.exp(profile.log_h(np.log(svals))).tolist(),
        },
    }


def run_build_counterexample(phi: str, k: int, depth: int,
                             u_max: float = 1e6, nodes: int = 16384,
                             config: RunConfig = RunConfig()) -> dict:
    model = counterexample.build_counterexample(
        parse_gauge(phi), k, depth, u_max=u_max, nodes=nodes, gauge_spec=phi
    )
    rows = []
    for geo in model.levels:
        energy = model.profile.ball_energy_at_u(-geo.log_r)
        rows.append(
            VerificationReport.from_sides(
                f"level_{geo.level}_invariants",
                "radius ordering and level energy cap",
                lhs=energy, rhs=2.0 ** (-geo.level * model.k), margin=1e-12,
                relation="<=",
                details={
                    "log_r": geo.log_r,
                    "log_rho": geo.log_rho,
                    "log_rho_star": geo.log_rho_star,
                    "ordering_ok": geo.log_rho < geo.log_rho_star < geo.log_r,
                },
            ).to_dict()
        )
    return {
        "command": "build-counterexample",
        "phi": phi,
        "k": k,
        "depth": depth,
        "reports": rows,
        "model": model.to_dict(),
    }


def run_verify_counterexample(model_payload: dict, checks=("osc", "diam", "energy", "hausdorff"),
                              levels=None, sample_balls: int = 8,
                              samples_per_ball: int = 4096,
                              config: RunConfig = RunConfig()) -> dict:
    model = counterexample.CounterexampleModel.from_dict(model_payload)
    if levels is None:
        levels = list(range(2, model.depth + 1))
    rows = []
    for check in checks:
        if check == "osc":
            for p in levels:
                rows.append(counterexample.check_oscillation(
                    model, p, sample_balls=sample_balls,
                    samples_per_ball=samples_per_ball).to_dict())
        elif check == "diam":
            for p in levels:
                rows.append(counterexample.check_diameter(model, p).to_dict())
        elif check == "energy":
            rows.extend(r.to_dict() for r in counterexample.energy_budget(model).values())
        elif check == "hausdorff":
            for p in levels:
                rows.append(counterexample.hausdorff_lower(model, p).to_dict())
        else:
            raise RunnerError(f"unknown check {check!r}")
    return {
        "command": "verify-counterexample",
        "k": model.k,
        "depth": model.depth,
        "checks": list(checks),
        "reports": rows,
    }


def run_oscillation(field: str, center=(0.0, 0.0), scales: int = 8,
                    radius_max: float = 0.5,
                    config: RunConfig = RunConfig()) -> dict:
    out: dict = {"command": "oscillation", "field": field}
    name = field.split(":", 1)[0]
    reports = []
    if name == "example1":
        params = dict(kv.split("=") for kv in field.partition(":")[2].split(",") if kv)
        fld, reps = oscillation.build_example1(float(params.get("p", 2.0)))
        reports.extend(r.to_dict() for r in reps.values())
    elif name == "example2":
        params = dict(kv.split("=") for kv in field.partition(":")[2].split(",") if kv)
        fld, reps = oscillation.build_example2(float(params.get("delta", 0.5)))
        reports.extend(r.to_dict() for r in reps.values())
    else:
        fld = oscillation.parse_field(field)
    eps = [radius_max * 2.0**-j for j in range(scales)]
    point = oscillation.fmo_at_point(fld, center, eps)
    out["point_test"] = point
    out["reports"] = reports
    return out


def run_modulus(ring, weight: str = "const:c=1", family: str = "curves",
                grid: Optional[int] = None, p: Optional[float] = None,
                config: RunConfig = RunConfig()) -> dict:
    r1, r2, n = float(ring[0]), float(ring[1]), int(ring[2])
    dom = modulus.RingDomain(r1, r2, n)
    w = parse_weight(weight, n)
    out: dict = {"command": "modulus", "ring": [r1, r2, n], "weight": weight,
                 "family": family}
    rows = []
    if family == "curves":
        res = modulus.ring_upper_bound(w, dom)
        rows.append(
            VerificationReport.from_sides(
                "extremal_normalization",
                "the extremal radial density integrates to one across the ring",
                lhs=res.certificate["eta_integral"], rhs=1.0, margin=1e-9,
                relation="==",
            ).to_dict()
        )
    elif family == "spheres":
        res = modulus.spheres_lower_bound(w, r1, r2)
        rows.append(
            VerificationReport.from_sides(
                "extremal_admissibility",
                "the normalized weight is admissible on every sampled sphere",
                lhs=res.certificate["min_sphere_admissibility"], rhs=1.0,
                margin=1e-6, relation=">=",
            ).to_dict()
        )
    else:
        raise RunnerError(f"unknown family {family!r}")
    out["closed_form"] = {"value": res.value, "certificate": res.certificate}
    if grid:
        if n != 2:
            raise RunnerError("the grid oracle is planar")
        fam = modulus.CURVES if family == "curves" else modulus.SPHERES
        gres = modulus.grid_modulus_2d(dom, p or float(n), grid, fam)
        out["grid"] = {"value": gres.value, "certificate": gres.certificate}
        rows.append(
            VerificationReport.from_sides(
                "closed_form_vs_grid",
                "grid oracle within two percent of the closed form",
                lhs=abs(gres.value / res.value - 1.0), rhs=0.0, margin=0.02,
                relation="<=",
                details={"closed_form": res.value, "grid": gres.value},
            ).to_dict()
        )
    out["reports"] = rows
    return out


def run_distortion(map_spec: str, check: str = "holder", point=None,
                   eps0: float = 0.5, beta: float = 1.0, gap: float = 1.0,
                   config: RunConfig = RunConfig()) -> dict:
    m = distortion.parse_map(map_spec)
    out: dict = {"command": "distortion", "map": map_spec, "check": check}
    rows = []
    if check == "holder":
        rows.append(distortion.holder_check(m).to_dict())
    elif check == "kf":
        x = np.asarray(point if point is not None else [0.5] + [0.0] * (m.dimension - 1),
                       dtype=float)
        numeric = distortion.kf_numeric(m, x)
        closed = float(m.kf_closed_form(x[None, :])[0])
        rows.append(
            VerificationReport.from_sides(
                "coefficient_calibration",
                "numeric distortion coefficient matches the closed form",
                lhs=numeric, rhs=closed, margin=1e-6 * max(1.0, closed),
                relation="==",
                details={"point": x.tolist()},
            ).to_dict()
        )
    elif check == "bound":
        n = m.dimension
        value = float(m.kf_closed_form(np.zeros((1, n)) + 0.5)[0])
        prof = RadialWeight(n, profile=lambda r, v=value: np.full_like(
            np.asarray(r, dtype=float), v ** (n - 1)))
        x = np.asarray(point if point is not None else [eps0 / 4] + [0.0] * (n - 1),
                       dtype=float)
        res = distortion.distortion_bound(prof, distortion.ChordalGap(gap),
                                          np.zeros(n), eps0, x,
                                          constants=config.constants)
        out["bound"] = res
        rows.append(
            VerificationReport.from_sides(
                "bound_forms_agree",
                "sphere-average and sphere-norm forms of the decay bound coincide",
                lhs=res["forms_rel_gap"], rhs=0.0, margin=1e-9, relation="<=",
            ).to_dict()
        )
    else:
        raise RunnerError(f"unknown distortion check {check!r}")
    out["reports"] = rows
    return out
