"""Acceptance criteria for the whole laboratory.

One test per criterion, each printing a single pass/fail line with the
measured quantities, every tolerance pinned to its contractual value.
"""

import math
import time

import numpy as np

from orliczlab.conditions import (
    calderon_condition,
    condition_equivalence_report,
    lemma61_bound_check,
)
from orliczlab.counterexample import (
    build_counterexample,
    check_diameter,
    check_oscillation,
    energy_budget,
    hausdorff_lower,
)
from orliczlab.distortion import holder_check, kf_numeric, radial_stretch
from orliczlab.extremal import build_profile, verify_calderon_pair
from orliczlab.gauges import OrliczFunction, parse_gauge
from orliczlab.modulus import (
    CURVES,
    SPHERES,
    RingDomain,
    grid_modulus_2d,
    ring_upper_bound,
    spheres_lower_bound,
)
from orliczlab.oscillation import build_example1, build_example2
from orliczlab.reports import write_report_file
from orliczlab.suite import run_suite
from orliczlab.weights import RadialWeight


def _line(num, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, detail


def test_criterion_1_classifier_correctness():
    worst_time = 0.0
    wrong = []
    for k in (2, 3, 4):
        for p in (k - 0.5, k, k + 0.5, k + 2):
            start = time.perf_counter()
            verdict = calderon_condition(parse_gauge(f"pow:p={p:g}"), k)
            worst_time = max(worst_time, time.perf_counter() - start)
            expected = "CONVERGENT" if p > k else "DIVERGENT"
            if verdict.classification != expected:
                wrong.append((p, k, verdict.classification))
    ok = not wrong and worst_time < 1.0
    _line(1, ok, f"power battery exact ({len(wrong)} wrong), "
                 f"slowest case {worst_time:.3f}s < 1s")


def test_criterion_2_equivalence_battery():
    battery = [("pow:p=2", 2.0), ("pow:p=3", 1.0), ("powlog:p=2,s=2", 2.0),
               ("powlog:p=1,s=1", 1.0), ("exp:a=1", 2.0), ("exp:a=2", 1.0)]
    start = time.perf_counter()
    disagreements = 0
    for spec, p in battery:
        rep = condition_equivalence_report(parse_gauge(spec), p, 1.0)
        if len({v.classification for v in rep.values()}) != 1:
            disagreements += 1
    elapsed = time.perf_counter() - start
    ok = disagreements == 0 and elapsed < 10.0
    _line(2, ok, f"6 gauges x 6 forms, {disagreements} disagreements, "
                 f"{elapsed:.2f}s < 10s")


def test_criterion_3_sphere_average_inequality():
    def exp_gauge():
        return OrliczFunction(
            lambda t: np.exp(np.minimum(np.asarray(t, float), 700.0)),
            description="e^t", zero_at_zero=False,
            log_fn=lambda lt: np.exp(np.minimum(np.asarray(lt, float), 700.0)),
        )

    def logw(n, s=1.0):
        return RadialWeight(n, profile=lambda r: np.log(
            1.0 / np.maximum(np.asarray(r, float), 1e-320)) ** s)

    def constw(n, c=1.0):
        return RadialWeight(n, profile=lambda r: np.full_like(np.asarray(r, float), c))

    pairs = [
        (constw(2), parse_gauge("pow:p=1"), 1.0),
        (constw(3, 2.0), parse_gauge("pow:p=2"), 2.0),
        (logw(2), exp_gauge(), 1.0),
        (logw(3, 2.0), parse_gauge("pow:p=2"), 2.0),
        (RadialWeight(3, profile=lambda r: np.asarray(r, float) ** -0.5),
         parse_gauge("pow:p=1"), 1.0),
    ]
    violations = 0
    worst_margin = math.inf
    for w, phi, p in pairs:
        rep = lemma61_bound_check(w, phi, p)
        worst_margin = min(worst_margin, rep.lhs - rep.rhs)
        if rep.lhs < rep.rhs - 1e-6:
            violations += 1
    ok = violations == 0
    _line(3, ok, f"5 weight/gauge pairs, {violations} violations, "
                 f"worst margin {worst_margin:.3g} >= -1e-6")


def test_criterion_4_extremal_profile():
    start = time.perf_counter()
    problems = []
    for k in (2, 3):
        profile = build_profile(parse_gauge("pow:p=2"), k, rescale=True)
        ss = np.geomspace(1e-8, 0.9, 48)
        gap = float(np.max(np.abs(
            profile.psi(np.exp(profile.log_h(np.log(ss)))) / ss - 1.0)))
        if gap > 1e-9:
            problems.append(f"k={k} inversion gap {gap:.2e}")
        pair = verify_calderon_pair(profile)
        if pair["h_integral"].details["classification"] != "DIVERGENT":
            problems.append(f"k={k} h-integral not divergent")
        if pair["moment_integral"].details["classification"] != "CONVERGENT":
            problems.append(f"k={k} moment not convergent")
        if profile.total_energy() > 1.0 + 1e-9:
            problems.append(f"k={k} energy {profile.total_energy():.6f} > 1")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 30.0
    _line(4, ok, f"k in (2,3): inversion<=1e-9, divergent/convergent pair, "
                 f"unit energy; {elapsed:.1f}s < 30s"
                 + ("" if not problems else f"; problems: {problems}"))


def test_criterion_5_counterexample_depth_five():
    start = time.perf_counter()
    model = build_counterexample(parse_gauge("pow:p=2"), 2, 5)
    problems = []
    for geo in model.levels:
        if not (geo.log_rho < geo.log_rho_star < geo.log_r):
            problems.append(f"ordering level {geo.level}")
        energy = model.profile.ball_energy_at_u(-geo.log_r)
        if energy > 2.0 ** (-2 * geo.level) * (1 + 1e-9):
            problems.append(f"energy cap level {geo.level}")
    for p in (2, 3, 4):
        osc = check_oscillation(model, p, sample_balls=8, samples_per_ball=4096)
        if not osc.passed:
            problems.append(f"oscillation p={p}")
        diam = check_diameter(model, p)
        if not diam.passed:
            problems.append(f"diameter p={p}")
    budget = energy_budget(model)
    graph = budget["graph"]
    if graph.lhs > 1.0 + float(model.phi(2.0)) + 1e-9:
        problems.append(f"graph energy {graph.lhs:.4f} > 5")
    haus = None
    for level in range(2, model.depth + 1):
        haus = hausdorff_lower(model, level)
        if haus.lhs < 2.0**-10:
            problems.append(f"covering bound {haus.lhs:.3g} < 2^-10 at level {level}")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 300.0
    _line(5, ok, f"depth-5 build + oscillation/diameter p=2..4 + energy "
                 f"{graph.lhs:.3f}<=5 + covering {haus.lhs:.3g}>=2^-10; "
                 f"{elapsed:.1f}s < 300s"
                 + ("" if not problems else f"; problems: {problems}"))


def test_criterion_6_oscillation_examples():
    problems = []
    _, reps2 = build_example2(0.5)
    nm = reps2["normalized_mass"]
    if nm.lhs > nm.rhs + 1e-6:
        problems.append("normalized mass bound")
    per_bump = list(reps2["power_invariance"].details["per_bump"].values())
    worst = max(abs(v / per_bump[0] - 1.0) for v in per_bump)
    if worst > 1e-6:
        problems.append(f"power invariance {worst:.2e}")
    _, reps1 = build_example1(2.0)
    partial = reps1["power_mass"].details["partial_sums"]
    for count, value in enumerate(partial, start=1):
        if abs(value - math.pi * count) > 1e-9 * count:
            problems.append(f"disk {count} power mass")
    if not all(a < b for a, b in zip(partial, partial[1:])):
        problems.append("partial sums not increasing")
    ok = not problems
    _line(6, ok, f"bump tower J<=16I/3pi (margin {nm.rhs - nm.lhs:.3g}), "
                 f"power integrals equal to {worst:.1e}; disk tower mass pi per disk"
                 + ("" if not problems else f"; problems: {problems}"))


def test_criterion_7_modulus_closed_forms_vs_grid():
    start = time.perf_counter()
    ring = RingDomain(1.0, math.e, 2)
    unit = RadialWeight(2, profile=lambda r: np.ones_like(np.asarray(r, float)))
    join = grid_modulus_2d(ring, 2.0, 256, CURVES)
    sep = grid_modulus_2d(ring, 2.0, 256, SPHERES)
    problems = []
    if abs(join.value / (2 * math.pi) - 1.0) > 0.02:
        problems.append(f"joining {join.value:.5f}")
    if abs(sep.value * 2 * math.pi - 1.0) > 0.02:
        problems.append(f"separating {sep.value:.6f}")
    product = join.value * sep.value
    if abs(product - 1.0) > 0.05:
        problems.append(f"duality product {product:.4f}")
    crossing = ring_upper_bound(unit, ring)
    if abs(crossing.certificate["eta_integral"] - 1.0) > 1e-9:
        problems.append("eta normalization")
    spheres = spheres_lower_bound(unit, 1.0, math.e)
    if spheres.certificate["min_sphere_admissibility"] < 1 - 1e-6:
        problems.append("admissibility certificate")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 120.0
    _line(7, ok, f"grid {join.value:.5f}~2pi, {sep.value:.6f}~1/(2pi), "
                 f"product {product:.6f}~1, eta=1, admissible; {elapsed:.1f}s < 120s"
                 + ("" if not problems else f"; problems: {problems}"))


def test_criterion_8_distortion_calibration():
    m = radial_stretch(0.5, 3)
    numeric = kf_numeric(m, [0.6, 0.8, 0.0])
    rep = holder_check(m)
    d = rep.details
    problems = []
    if abs(numeric - 2.0) > 1e-6:
        problems.append(f"numeric coefficient {numeric:.8f}")
    if abs(d["fitted_exponent"] - 0.5) > 1e-6:
        problems.append("fitted exponent")
    if abs(d["bound_exponent"] - d["fitted_exponent"]) > 1e-6:
        problems.append("exponent mismatch")
    if abs(d["fitted_constant"] / (16 * math.pi) - 1.0) > 1e-6:
        problems.append(f"hypothesis constant {d['fitted_constant']:.6f}")
    ok = not problems
    _line(8, ok, f"K={numeric:.8f}~2, exponent {d['fitted_exponent']:.8f}=alpha, "
                 f"constant {d['fitted_constant']:.6f}=16pi"
                 + ("" if not problems else f"; problems: {problems}"))


def test_criterion_9_reproducibility(tmp_path):
    first = run_suite()
    second = run_suite()
    p1 = write_report_file(tmp_path / "suite1.json", first)
    p2 = write_report_file(tmp_path / "suite2.json", second)
    identical = p1.read_bytes() == p2.read_bytes()
    no_failures = first["counts"]["FAIL"] == 0
    enough = first["total_checks"] >= 20
    ok = identical and no_failures and enough
    _line(9, ok, f"two suite runs byte-identical={identical}, "
                 f"{first['total_checks']} checks, {first['counts']['FAIL']} failures")
