import math

import numpy as np
import pytest
from scipy.integrate import quad

from orliczlab.oscillation import (
    EVIDENCE_FOR,
    NOT_FMO_EVIDENCE,
    OscillationError,
    OscillationField,
    build_example1,
    build_example2,
    fmo_at_point,
    mean_oscillation,
    parse_field,
)

SCALES = [2.0**-j for j in range(1, 9)]


def constant_field(c=3.0):
    return OscillationField(
        lambda p: np.full(np.atleast_2d(p).shape[0], c), 1.0, "const")


class TestMeanOscillation:
    def test_constant_is_zero(self):
        assert mean_oscillation(constant_field(), (0, 0), 0.5) == 0.0

    def test_half_plane_indicator(self):
        # exact two-region oracle: mean 1/2, deviation 1/2 everywhere
        half = OscillationField(
            lambda p: (np.atleast_2d(p)[:, 0] > 0).astype(float), 1.0, "half")
        v = mean_oscillation(half, (0, 0), 0.5)
        assert v == pytest.approx(0.5, abs=1e-2)

    def test_log_singularity_bounded_over_balls(self):
        lr = parse_field("log-recip")
        vals = [mean_oscillation(lr, c, r)
                for c, r in [((0, 0), 0.5), ((0.2, 0.0), 0.1), ((0.001, 0.0), 0.3)]]
        assert all(np.isfinite(vals)) and max(vals) < 1.0

    def test_constant_shift_invariance(self):
        lr = parse_field("log-recip")
        shifted = OscillationField(lambda p: lr(p) + 17.0, 1.0, "shifted")
        a = mean_oscillation(lr, (0, 0), 0.25)
        b = mean_oscillation(shifted, (0, 0), 0.25)
        assert a == pytest.approx(b, abs=1e-12)

    def test_radius_guard(self):
        with pytest.raises(OscillationError):
            mean_oscillation(constant_field(), (0, 0), 2.0)

    def test_nonintegrable_raises(self):
        inv = parse_field("invsq")
        with pytest.raises(OscillationError):
            mean_oscillation(inv, (0, 0), 0.5)


class TestPointTest:
    def test_log_singularity_is_evidence_for(self):
        rep = fmo_at_point(parse_field("log-recip"), (0, 0), SCALES)
        assert rep["label"] == EVIDENCE_FOR
        # scale-invariant oscillation constant is exactly 1/e
        oracle, _ = quad(lambda t: 2 * t * abs(-math.log(t) - 0.5), 0, 1,
                         points=[math.exp(-0.5)], limit=200)
        assert oracle == pytest.approx(1.0 / math.e, abs=1e-12)
        for osc in rep["oscillations"]:
            assert osc == pytest.approx(1.0 / math.e, abs=2e-3)
        # the running ball means grow without bound
        means = rep["ball_means"]
        assert means[-1] > means[0] + 3.0

    def test_constant_all_zero(self):
        rep = fmo_at_point(constant_field(), (0, 0), SCALES)
        assert max(rep["oscillations"]) == 0.0
        assert rep["label"] == EVIDENCE_FOR

    def test_inverse_square_rejected(self):
        # closed-form annular oracle: the normalized deviation grows like eps^-2
        rep = fmo_at_point(parse_field("invsq"), (0, 0), SCALES)
        assert rep["label"] == NOT_FMO_EVIDENCE
        assert rep["growth_slope"] == pytest.approx(2.0, abs=0.1)

    def test_continuous_field_oscillation_vanishes(self):
        lin = OscillationField(lambda p: np.atleast_2d(p)[:, 0], 1.0, "linear")
        rep = fmo_at_point(lin, (0.0, 0.0), SCALES)
        oscs = rep["oscillations"]
        assert all(a > b for a, b in zip(oscs, oscs[1:]))
        assert oscs[-1] < 1e-2

    def test_centering_factor_two(self):
        lr = parse_field("log-recip")
        eps = sorted(SCALES, reverse=True)
        centering = [math.log(1.0 / e) for e in eps]  # means without the +1/2 shift
        rep = fmo_at_point(lr, (0, 0), eps, centering=centering)
        assert rep["centering_factor_two_ok"]


class TestExample1:
    def test_reports_pass(self):
        _, reps = build_example1(2.0)
        for rep in reps.values():
            assert rep.status == "PASS", rep.check_id

    def test_per_disk_power_is_pi(self):
        _, reps = build_example1(2.0)
        partial = reps["power_mass"].details["partial_sums"]
        for count, value in enumerate(partial, start=1):
            assert value == pytest.approx(math.pi * count, rel=1e-12)
        diffs = np.diff(partial)
        assert np.all(diffs > 0)

    def test_tail_majorant_chain(self):
        _, reps = build_example1(2.0)
        d = reps["small_ball_mass"].details
        assert d["mass"] / math.pi < d["majorant"] < d["two_C_eps_sq"]

    def test_outside_all_disks_zero(self):
        field, _ = build_example1(2.0)
        assert field(np.array([[0.4, 0.4]]))[0] == 0.0

    def test_field_value_inside_disk(self):
        field, _ = build_example1(2.0)
        assert field(np.array([[0.25, 0.0]]))[0] == 2.0**8

    def test_depth_guard(self):
        with pytest.raises(OscillationError):
            build_example1(2.0, n_max=2)
        with pytest.raises(OscillationError):
            build_example1(0.5)


class TestExample2:
    def test_reports_pass(self):
        _, reps = build_example2(0.5)
        for rep in reps.values():
            assert rep.status == "PASS", rep.check_id

    def test_power_integral_equal_across_bumps(self):
        _, reps = build_example2(0.5)
        per_bump = reps["power_invariance"].details["per_bump"]
        vals = list(per_bump.values())
        for v in vals[1:]:
            assert v == pytest.approx(vals[0], rel=1e-6)

    def test_mass_scaling(self):
        _, reps = build_example2(0.5)
        measured = reps["bump_mass"].details["measured"]
        expected = reps["bump_mass"].details["expected"]
        for k in measured:
            assert measured[k] == pytest.approx(expected[k], rel=5e-3)

    def test_normalized_mass_bound(self):
        _, reps = build_example2(0.5)
        rep = reps["normalized_mass"]
        assert rep.lhs <= rep.rhs + 1e-6

    def test_truncation_guard(self):
        with pytest.raises(OscillationError):
            build_example2(0.5, k_max=2)
        with pytest.raises(OscillationError):
            build_example2(-1.0)


def test_parse_field_table(tmp_path):
    path = tmp_path / "field.csv"
    path.write_text("0,1\n0.5,2\n1,3\n")
    fld = parse_field(f"table:{path}")
    assert fld(np.array([[0.25, 0.0]]))[0] == pytest.approx(1.5)
    with pytest.raises(OscillationError):
        parse_field("wat")
