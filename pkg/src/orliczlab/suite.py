"""Named verification scenarios and the batch runner.

Each scenario is a callable producing a JSON-able payload with report rows;
the suite runs a manifest of scenario names on a worker pool (capped by the
``ORLICZLAB_THREADS`` environment variable), isolates crashes to per-scenario
failures, and aggregates counts.  Aggregation is single-threaded and sorted,
so identical config and seed give identical summaries byte for byte.
"""

from __future__ import annotations

import math
import traceback
from concurrent.futures import ThreadPoolExecutor

from . import runner
from .config import RunConfig, thread_cap
from .reports import FAIL, INCONCLUSIVE_STATUS, PASS

__all__ = ["SCENARIOS", "default_manifest", "run_suite"]


def _classifier_battery(config):
    rows = []
    for k in (2, 3, 4):
        for p in (k - 0.5, k, k + 0.5, k + 2):
            payload = runner.run_check_condition(f"pow:p={p:g}", "calderon", k=k,
                                                 config=config)
            expected = "CONVERGENT" if p > k else "DIVERGENT"
            got = payload["reports"][0]["classification"]
            rows.append({
                "check_id": f"classifier_pow_p{p:g}_k{k}",
                "statement": "power-gauge growth integral classification",
                "status": PASS if got == expected else FAIL,
                "lhs": got,
                "rhs": expected,
            })
    return {"command": "scenario", "reports": rows}


def _equivalence_battery(config):
    battery = [("pow:p=2", 2.0), ("pow:p=3", 1.0), ("powlog:p=2,s=2", 2.0),
               ("powlog:p=1,s=1", 1.0), ("exp:a=1", 2.0), ("exp:a=2", 1.0)]
    rows = []
    for spec, p in battery:
        payload = runner.run_check_condition(spec, "equivalence", p=p, delta=1.0,
                                             config=config)
        rows.append({
            "check_id": f"equivalence_{spec}_p{p:g}",
            "statement": "all six growth conditions agree for a convex gauge",
            "status": PASS if payload["all_agree"] else FAIL,
            "classifications": [r["classification"] for r in payload["reports"]],
        })
    return {"command": "scenario", "reports": rows}


def _sphere_average_battery(config):
    pairs = [
        ("const:c=1", "pow:p=1", 1.0, 2),
        ("const:c=2", "pow:p=2", 2.0, 3),
        ("logrecip:s=1", "exp:a=1", 1.0, 2),
        ("logrecip:s=2", "pow:p=2", 2.0, 3),
        ("rpow:a=-0.5", "pow:p=1", 1.0, 3),
    ]
    rows = []
    for weight, phi, p, n in pairs:
        payload = runner.run_check_condition(phi, "sphere-average-bound", p=p,
                                             weight=weight, dimension=n,
                                             config=config)
        rows.extend(payload["reports"])
    return {"command": "scenario", "reports": rows}


def _extremal_scenario(config):
    payload = runner.run_build_extremal("pow:p=2", 2, u_max=2e4, nodes=8192,
                                        config=config)
    payload.pop("profile", None)
    return payload


def _counterexample_smoke(config):
    build = runner.run_build_counterexample("pow:p=2", 2, 2, u_max=2e4, nodes=8192,
                                            config=config)
    verify = runner.run_verify_counterexample(build["model"], levels=[2],
                                              samples_per_ball=512, config=config)
    return {"command": "scenario",
            "reports": build["reports"] + verify["reports"]}


def _modulus_scenario(config):
    out = runner.run_modulus([1.0, math.e, 2], family="curves", grid=128,
                             config=config)
    out2 = runner.run_modulus([1.0, math.e, 2], family="spheres", grid=128,
                              config=config)
    return {"command": "scenario", "reports": out["reports"] + out2["reports"]}


def _distortion_scenario(config):
    a = runner.run_distortion("stretch:alpha=0.5,n=3", "holder", config=config)
    b = runner.run_distortion("stretch:alpha=2,n=3", "kf", point=[1.0, 0.0, 0.0],
                              config=config)
    c = runner.run_distortion("stretch:alpha=0.5,n=3", "bound", config=config)
    return {"command": "scenario", "reports": a["reports"] + b["reports"] + c["reports"]}


def _oscillation_scenario(config):
    one = runner.run_oscillation("example1:p=2", scales=6, config=config)
    two = runner.run_oscillation("example2:delta=0.5", scales=6, config=config)
    rows = one["reports"] + two["reports"]
    log_point = runner.run_oscillation("log-recip", scales=8, config=config)
    rows.append({
        "check_id": "log_recip_point_test",
        "statement": "logarithmic singularity keeps bounded point oscillation",
        "status": PASS if log_point["point_test"]["label"] == "EVIDENCE-FOR" else FAIL,
    })
    return {"command": "scenario", "reports": rows}


SCENARIOS = {
    "classifier-battery": _classifier_battery,
    "equivalence-battery": _equivalence_battery,
    "sphere-average-battery": _sphere_average_battery,
    "extremal-profile": _extremal_scenario,
    "counterexample-smoke": _counterexample_smoke,
    "modulus-closed-vs-grid": _modulus_scenario,
    "distortion-calibration": _distortion_scenario,
    "oscillation-examples": _oscillation_scenario,
}


def default_manifest() -> list:
    return sorted(SCENARIOS)


def run_suite(manifest=None, config: RunConfig = RunConfig()) -> dict:
    """Run the named scenarios and aggregate PASS/FAIL/INCONCLUSIVE counts."""
    names = default_manifest() if manifest is None else list(manifest)
    unknown = [n for n in names if n not in SCENARIOS]
    if unknown:
        raise runner.RunnerError(f"unknown scenarios: {unknown}")

    def one(name):
        try:
            return name, SCENARIOS[name](config)
        except Exception as exc:  # crash isolates to this scenario
            return name, {
                "command": "scenario",
                "reports": [{
                    "check_id": f"{name}_crashed",
                    "statement": "scenario raised instead of reporting",
                    "status": FAIL,
                    "error": f"{type(exc).__name__}: {exc}",
                    "trace": traceback.format_exc(limit=4),
                }],
            }

    workers = thread_cap(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(one, names))
    else:
        results = dict(one(n) for n in names)

    counts = {PASS: 0, FAIL: 0, INCONCLUSIVE_STATUS: 0}
    scenarios = {}
    for name in sorted(results):
        rows = results[name].get("reports", [])
        for row in rows:
            status = row.get("status")
            if status in counts:
                counts[status] += 1
        scenarios[name] = rows
    return {
        "command": "suite",
        "manifest": sorted(names),
        "seed": config.seed,
        "counts": counts,
        "total_checks": sum(counts.values()),
        "scenarios": scenarios,
    }
