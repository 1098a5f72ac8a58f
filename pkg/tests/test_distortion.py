import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczlab.distortion import (
    ChordalGap,
    DistortionError,
    chordal_distance,
    chordal_to_infinity,
    distortion_bound,
    fmo_bound,
    holder_check,
    identity_map,
    kf_numeric,
    parse_map,
    radial_stretch,
    shear_map,
)
from orliczlab.weights import RadialWeight


def const_profile(n, c):
    return RadialWeight(n, profile=lambda r: np.full_like(np.asarray(r, float), c))


class TestCoefficient:
    def test_identity_is_conformal(self):
        assert kf_numeric(identity_map(3), [0.3, -0.4, 0.1]) == pytest.approx(1.0, abs=1e-6)

    def test_expanding_stretch(self):
        # closed-form Jacobian: radial alpha r^{alpha-1}, tangential r^{alpha-1}
        m = radial_stretch(2.0, 3)
        assert kf_numeric(m, [1.0, 0.0, 0.0]) == pytest.approx(4.0, rel=1e-6)

    def test_contracting_stretch(self):
        m = radial_stretch(0.5, 3)
        assert kf_numeric(m, [0.6, 0.8, 0.0]) == pytest.approx(2.0, rel=1e-6)

    @pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 3.0, 10.0])
    def test_numeric_matches_closed_form_across_radii(self, r):
        m = radial_stretch(1.7, 3)
        x = np.array([r, 0.0, 0.0]) / math.sqrt(1.0)
        closed = float(m.kf_closed_form(x[None, :])[0])
        assert kf_numeric(m, x, step=1e-6) == pytest.approx(closed, rel=1e-6)

    def test_composition_is_identity(self):
        a = radial_stretch(2.0, 3)
        b = radial_stretch(0.5, 3)

        class Composed:
            kind = "COMPOSED"
            dimension = 3

            def __call__(self, pts):
                return b(a(pts))

        for x in ([0.3, 0.4, 0.5], [1.2, -0.7, 0.1]):
            assert kf_numeric(Composed(), np.array(x)) == pytest.approx(1.0, abs=1e-6)

    def test_singular_stencil_raises(self):
        class Broken:
            kind = "BROKEN"
            dimension = 2

            def __call__(self, pts):
                out = np.full(np.atleast_2d(pts).shape, np.nan)
                return out

        with pytest.raises(DistortionError):
            kf_numeric(Broken(), [0.5, 0.5])

    def test_shear_has_unit_coefficient_off_support(self):
        m = shear_map(lambda pts: np.zeros(np.atleast_2d(pts).shape[0]), 2)
        assert kf_numeric(m, [0.3, 0.4, 0.2]) == pytest.approx(1.0, abs=1e-8)


class TestBounds:
    def test_unit_coefficient_bound_is_linear_ratio(self):
        prof = const_profile(3, 1.0)
        out = distortion_bound(prof, ChordalGap(1.0), [0, 0, 0], 0.5, [0.1, 0, 0])
        assert out["bound"] == pytest.approx(0.1 / 0.5, rel=1e-9)
        assert out["forms_rel_gap"] < 1e-9

    def test_log_profile_gives_log_ratio(self):
        # closed form: the decay integral of 1/(r log(1/r)) telescopes to a
        # ratio of logarithms
        prof = RadialWeight(3, profile=lambda r: np.log(
            1.0 / np.maximum(np.asarray(r, float), 1e-320)) ** 2)
        out = distortion_bound(prof, ChordalGap(1.0), [0, 0, 0], 0.25, [0.01, 0, 0])
        expect = math.log(1 / 0.25) / math.log(1 / 0.01)
        assert out["bound"] == pytest.approx(expect, rel=1e-9)

    def test_vanishing_as_x_approaches_center(self):
        prof = const_profile(3, 8.0)
        vals = [distortion_bound(prof, ChordalGap(0.5), [0, 0, 0], 0.5,
                                 [d, 0, 0])["bound"] for d in (0.1, 0.01, 0.001)]
        assert vals[0] > vals[1] > vals[2]

    def test_forms_coincide_for_radial_profiles(self):
        prof = RadialWeight(3, profile=lambda r: 1.0 + np.asarray(r, float) ** 2)
        out = distortion_bound(prof, ChordalGap(1.0), [0, 0, 0], 0.5, [0.05, 0, 0])
        assert out["forms_rel_gap"] < 1e-9

    def test_domain_guard(self):
        with pytest.raises(DistortionError):
            distortion_bound(const_profile(3, 1.0), ChordalGap(1.0),
                             [0, 0, 0], 0.5, [0.9, 0, 0])


class TestHolder:
    def test_half_stretch(self):
        rep = holder_check(radial_stretch(0.5, 3))
        assert rep.status == "PASS"
        d = rep.details
        assert d["fitted_exponent"] == pytest.approx(0.5, abs=1e-6)
        assert d["bound_exponent"] == pytest.approx(0.5, abs=1e-6)
        # hypothesis constant: sphere area times the squared coefficient
        assert d["fitted_constant"] == pytest.approx(16 * math.pi, rel=1e-6)

    def test_needs_contraction(self):
        with pytest.raises(DistortionError):
            holder_check(radial_stretch(2.0, 3))
        with pytest.raises(DistortionError):
            holder_check(identity_map(3))


class TestFmoBound:
    def test_beta_one_reduces_to_log_ratio(self):
        v = fmo_bound(ChordalGap(1.0), 0.25, 1.0, [0.01, 0, 0])
        assert v == pytest.approx(math.log(4.0) / math.log(100.0), rel=1e-12)

    def test_vanishes_toward_center(self):
        vals = [fmo_bound(ChordalGap(1.0), 0.25, 1.5, [d, 0, 0])
                for d in (0.1, 0.01, 0.001)]
        assert vals[0] > vals[1] > vals[2]

    def test_larger_beta_smaller_bound_inside(self):
        # with the log ratio below one, higher powers shrink it
        a = fmo_bound(ChordalGap(1.0), 0.25, 1.0, [0.01, 0, 0])
        b = fmo_bound(ChordalGap(1.0), 0.25, 2.0, [0.01, 0, 0])
        assert b < a

    def test_domain_guards(self):
        with pytest.raises(DistortionError):
            fmo_bound(ChordalGap(1.0), 0.25, 1.0, [1.5, 0, 0])
        with pytest.raises(DistortionError):
            ChordalGap(0.0)


class TestChordal:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=3, max_size=3),
           st.lists(st.floats(-50, 50), min_size=3, max_size=3))
    def test_bounded_by_one(self, x, y):
        assert chordal_distance(x, y) <= 1.0 + 1e-12

    def test_distance_to_infinity(self):
        assert chordal_to_infinity([1.0, 0.0, 0.0]) == pytest.approx(1 / math.sqrt(2))
        assert chordal_to_infinity([0.0, 0.0, 0.0]) == 1.0

    def test_parse_map(self):
        m = parse_map("stretch:alpha=0.5,n=3")
        assert m.alpha == 0.5 and m.dimension == 3
        with pytest.raises(DistortionError):
            parse_map("rotate:theta=1")
