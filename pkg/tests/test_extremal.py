import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from orliczlab.extremal import (
    ExtremalProfile,
    ProfileError,
    build_profile,
    cube_diameter_bound,
    hausdorff_area_bound,
    verify_calderon_pair,
)
from orliczlab.constants import ConstantsConfig
from orliczlab.gauges import parse_gauge


@pytest.fixture(scope="module")
def square_k2():
    return build_profile(parse_gauge("pow:p=2"), 2, u_max=2e4, nodes=8192)


@pytest.fixture(scope="module")
def square_k3():
    return build_profile(parse_gauge("pow:p=2"), 3, u_max=2e4, nodes=8192)


def h_oracle_k2(s):
    # for the square gauge at k=2 the growth primitive is log t, so h solves
    # s * t * log t = 1
    return brentq(lambda t: s * t * math.log(t) - 1.0, 1.0 + 1e-14, 1e300)


class TestGrowthSide:
    def test_big_phi_square_k2_is_log(self, square_k2):
        for t in (2.0, 10.0, 1e4, 1e8):
            assert square_k2.big_phi(t) == pytest.approx(math.log(t), rel=1e-10)

    def test_big_phi_square_k3_closed_form(self, square_k3):
        # integrand t^{-1/2}: primitive 2(sqrt(t) - 1)
        for t in (2.0, 100.0, 1e6):
            assert square_k3.big_phi(t) == pytest.approx(2 * (math.sqrt(t) - 1), rel=1e-8)

    def test_psi_square_k2(self, square_k2):
        for t in (1.5, 3.0, 50.0):
            assert square_k2.psi(t) == pytest.approx(1.0 / (t * math.log(t)), rel=1e-9)

    def test_psi_decreasing_and_blows_up_at_one(self, square_k2):
        ts = 1.0 + 2.0 ** -np.arange(1, 30)
        vals = np.array([square_k2.psi(t) for t in ts])
        assert np.all(np.diff(vals) > 0)  # grows monotonically toward t = 1

    def test_h_against_bisection_oracle(self, square_k2):
        for s in (0.5, 0.1, 1e-4, 1e-7):
            assert square_k2.h(s) == pytest.approx(h_oracle_k2(s), rel=1e-9)

    def test_h_greater_than_one_and_decreasing(self, square_k2):
        ss = np.geomspace(1e-8, 10.0, 40)
        hs = np.exp(square_k2.log_h(np.log(ss)))
        assert np.all(hs > 1.0)
        assert np.all(np.diff(hs) <= 0)

    @pytest.mark.parametrize("fixture", ["square_k2", "square_k3"])
    def test_inversion_consistency(self, fixture, request):
        prof = request.getfixturevalue(fixture)
        ss = np.geomspace(1e-8, 0.9, 48)
        back = prof.psi(np.exp(prof.log_h(np.log(ss))))
        assert np.max(np.abs(back / ss - 1.0)) < 1e-9


class TestRadialSide:
    def test_F_zero_at_one(self, square_k2):
        assert square_k2.F(1.0) == 0.0
        assert square_k2.F(2.0) == 0.0

    def test_F_matches_direct_quadrature(self, square_k2):
        h1 = square_k2.h(1.0)
        for t in (0.3, 0.5, 0.8):
            oracle, _ = quad(lambda s: h_oracle_k2(s) - h1, t, 1.0, limit=200)
            assert square_k2.F_at_u(-math.log(t), scaled=False) == pytest.approx(
                oracle, rel=1e-7)

    def test_F_convexity_chain(self, square_k2):
        ts = np.linspace(0.02, 0.999, 200)
        F = np.array([square_k2.F(t) for t in ts])
        Fp = square_k2.F_prime(ts)
        assert np.all(F >= 0)
        assert np.all(np.diff(F) <= 1e-15)      # decreasing
        assert np.all(np.diff(Fp) >= -1e-12)    # derivative non-decreasing

    def test_energy_monotone_and_vanishing(self, square_k2):
        es = [square_k2.radial_energy(r) for r in (1e-4, 1e-2, 0.5, 0.7, 1.0)]
        assert all(a <= b + 1e-15 for a, b in zip(es, es[1:]))
        # the borderline gauge loses energy only logarithmically in the radius
        assert square_k2.ball_energy_at_u(2000.0) < 0.01 * es[-1]

    def test_energy_window_matches_oracle(self, square_k2):
        h1 = square_k2.h(1.0)
        oracle, _ = quad(
            lambda u: (h_oracle_k2(math.exp(-u)) - h1) ** 2 * math.exp(-2 * u),
            0.0, 27.0, limit=400,
        )
        window = square_k2.ball_energy_at_u(0.0) - square_k2.ball_energy_at_u(27.0)
        assert window == pytest.approx(2 * math.pi * oracle, rel=1e-9)

    def test_normalized_energy_at_most_one(self):
        prof = build_profile(parse_gauge("pow:p=2"), 2, u_max=2e4, nodes=8192,
                             rescale=True)
        assert prof.rescale > 1.0
        assert prof.total_energy() <= 1.0 + 1e-9


class TestBuildPreconditions:
    def test_convergent_gauge_rejected(self):
        with pytest.raises(ProfileError):
            build_profile(parse_gauge("pow:p=3"), 2)

    def test_range_guard(self, square_k2):
        with pytest.raises(ProfileError):
            square_k2.F_at_u(1e9)


class TestCalderonPair:
    @pytest.mark.parametrize("fixture", ["square_k2", "square_k3"])
    def test_pair(self, fixture, request):
        prof = request.getfixturevalue(fixture)
        rep = verify_calderon_pair(prof)
        assert rep["h_integral"].status == "PASS"
        assert rep["h_integral"].details["classification"] == "DIVERGENT"
        partials = rep["h_integral"].details["partials"]
        assert all(a < b for a, b in zip(partials, partials[1:]))
        assert rep["moment_integral"].status == "PASS"
        assert rep["moment_integral"].details["classification"] == "CONVERGENT"

    def test_partial_monotone_between_scales(self, square_k2):
        a = square_k2.h_partial_integral(0.5)
        b = square_k2.h_partial_integral(0.25)
        assert 0 < a < b

    def test_moment_value_against_second_scheme(self, square_k2):
        # independent oracle: adaptive quadrature in s of the bisection h,
        # truncation matched to the same window
        rep = verify_calderon_pair(square_k2)
        value = rep["moment_integral"].details["value"]
        oracle, _ = quad(lambda s: h_oracle_k2(s) ** 2 * s, 1e-13, 1.0, limit=400)
        tail = value - oracle  # mass below s = 1e-13, small but positive
        assert 0 <= tail < 0.05 * value
        assert value == pytest.approx(oracle, rel=0.02)


class TestCubeBounds:
    def test_zero_energy(self):
        assert cube_diameter_bound(parse_gauge("pow:p=3"), 2, 1, 0.0) == 0.0
        assert hausdorff_area_bound(parse_gauge("pow:p=3"), 2, 1, 0.0) == 0.0

    def test_linear_in_m(self):
        one = cube_diameter_bound(parse_gauge("pow:p=3"), 2, 1, 0.7)
        two = cube_diameter_bound(parse_gauge("pow:p=3"), 2, 2, 0.7)
        assert two == pytest.approx(2 * one, rel=1e-12)

    def test_cubic_k2_values(self):
        # corrected constant equals 2 by the antiderivative oracle
        assert cube_diameter_bound(parse_gauge("pow:p=3"), 2, 1, 1.0) == pytest.approx(
            math.sqrt(2.0), rel=1e-9)
        assert hausdorff_area_bound(parse_gauge("pow:p=3"), 2, 1, 1.0) == pytest.approx(
            2.0, rel=1e-9)

    def test_area_linear_in_energy(self):
        one = hausdorff_area_bound(parse_gauge("pow:p=3"), 2, 1, 0.4)
        two = hausdorff_area_bound(parse_gauge("pow:p=3"), 2, 1, 0.8)
        assert two == pytest.approx(2 * one, rel=1e-12)

    def test_diameter_area_consistency(self):
        # with the conventional constants the area bound is the k-th power
        # of the diameter bound at m = 1
        phi, k, e = parse_gauge("pow:p=4"), 2, 0.37
        d = cube_diameter_bound(phi, k, 1, e)
        a = hausdorff_area_bound(phi, k, 1, e)
        assert a == pytest.approx(d**k, rel=1e-9)

    def test_constants_config(self):
        c = ConstantsConfig(alpha_k=3.0)
        assert c.gamma_km(2, 2) == 36.0
        d = cube_diameter_bound(parse_gauge("pow:p=3"), 2, 1, 1.0, constants=c)
        assert d == pytest.approx(3.0 * math.sqrt(2.0), rel=1e-9)


class TestSerialization:
    def test_round_trip(self, square_k2):
        payload = square_k2.to_dict()
        clone = ExtremalProfile.from_dict(payload)
        for t in (1.5, 7.0, 3e3):
            assert clone.psi(t) == pytest.approx(square_k2.psi(t), rel=1e-12)
        for t in (0.1, 0.6):
            assert clone.F(t) == pytest.approx(square_k2.F(t), rel=1e-12)
        assert clone.h(0.01) == pytest.approx(square_k2.h(0.01), rel=1e-12)
