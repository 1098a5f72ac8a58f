import math

import numpy as np
import pytest

from orliczlab.counterexample import (
    LN2,
    CounterexampleError,
    CounterexampleModel,
    DepthError,
    build_counterexample,
    check_diameter,
    check_oscillation,
    energy_budget,
    eval_construction,
    hausdorff_lower,
)
from orliczlab.gauges import OrliczFunction, parse_gauge
from orliczlab.quadrature import integrate_panels
from orliczlab.weights import sphere_area


@pytest.fixture(scope="module")
def shallow():
    """k=3 keeps every radius well inside double range."""
    return build_counterexample(parse_gauge("pow:p=2"), 3, 3, u_max=2e4, nodes=8192)


@pytest.fixture(scope="module")
def deep():
    """k=2 at depth 5: radii fall to about exp(-6400)."""
    return build_counterexample(parse_gauge("pow:p=2"), 2, 5)


class TestBuild:
    def test_first_radius_cap(self, shallow, deep):
        assert shallow.levels[0].log_r <= -2 * LN2 + 1e-12
        assert deep.levels[0].log_r <= -2 * LN2 + 1e-12

    def test_radius_ordering(self, shallow):
        for geo in shallow.levels:
            assert geo.log_rho < geo.log_rho_star < geo.log_r

    def test_energy_caps_by_independent_quadrature(self, shallow):
        # re-integrate the gauge energy over each ball with a fresh scheme
        prof = shallow.profile
        for geo in shallow.levels:
            edges = np.geomspace(-geo.log_r, prof.u_max, 4097)

            def f(v):
                ls = prof.log_abs_Fprime_at_u(np.asarray(v, float), scaled=False)
                with np.errstate(over="ignore"):
                    return np.exp(np.minimum(
                        shallow.phi_star.log_eval(ls) - shallow.k * np.asarray(v, float),
                        700.0))

            fresh = sphere_area(shallow.k) * float(np.sum(integrate_panels(f, edges, order=12)))
            assert fresh <= 2.0 ** (-geo.level * shallow.k) * (1 + 1e-6)

    def test_recursive_caps_hold(self, shallow):
        prof = shallow.profile
        for prev, cur in zip(shallow.levels, shallow.levels[1:]):
            level = cur.level
            assert cur.log_r <= prev.log_rho + 1e-12
            gap = math.exp(prev.log_rho_star) - math.exp(prev.log_rho)
            assert math.exp(cur.log_r) <= 2.0 ** (-2 * level) * gap * (1 + 1e-9)
            slope = math.exp(prof.log_abs_Fprime_at_u(-prev.log_rho, scaled=False))
            cap3 = 1.0 / (2.0 ** (level + 2) * (level - 1) * slope)
            assert math.exp(cur.log_r) <= cap3 * (1 + 1e-9)

    def test_cap_range_is_unit(self, shallow, deep):
        for model in (shallow, deep):
            for geo in model.levels:
                gap = model.profile.F_at_u(-geo.log_rho, scaled=False) - geo.F_r
                assert abs(gap - 1.0) < 1e-10

    def test_three_quarter_gap_decreasing(self, deep):
        gaps = [g.log_rho_star + math.log1p(-math.exp(g.log_rho - g.log_rho_star))
                for g in deep.levels]
        assert all(a >= b for a, b in zip(gaps, gaps[1:]))

    def test_disjointness(self, shallow, deep):
        for model in (shallow, deep):
            for geo in model.levels[1:]:
                assert geo.log_r + LN2 < -geo.level * LN2

    def test_depth_error_names_feasible_depth(self):
        with pytest.raises(DepthError) as err:
            build_counterexample(parse_gauge("pow:p=2"), 2, 6, u_max=1500.0, nodes=4096)
        assert err.value.max_feasible >= 2

    def test_convexity_required(self):
        with pytest.raises(CounterexampleError):
            build_counterexample(parse_gauge("exp:a=0.5"), 2, 2)


class TestEvaluation:
    def test_origin_hits_every_level(self, shallow):
        f, g, H = eval_construction(shallow, np.zeros(3), 0.25)
        assert f == pytest.approx(1 - 2.0**-3, abs=1e-15)
        assert np.allclose(g[:3], 0.0) and g[3] == f
        assert H[3] == pytest.approx(0.25 + f)

    def test_far_point_vanishes(self, shallow):
        f, _, _ = eval_construction(shallow, np.array([0.1234567, 0.7654321, 0.3456789]))
        assert f == 0.0

    def test_shear_structure(self, shallow):
        x = np.array([0.5, 0.25, 0.125])
        _, _, H1 = eval_construction(shallow, x, 0.0)
        _, _, H2 = eval_construction(shallow, x, 0.7)
        diff = H2 - H1
        assert np.allclose(diff[:3], 0.0)
        assert diff[3] == pytest.approx(0.7)

    def test_bounded_and_lipschitz_sum(self, shallow):
        rng = np.random.default_rng(7)
        pts = rng.uniform(0, 1, size=(64, 3))
        vals = shallow.f_values(pts)
        assert np.all((0 <= vals) & (vals <= 1))
        lip = sum(
            2.0 ** (-geo.level)
            * math.exp(shallow.profile.log_abs_Fprime_at_u(-geo.log_rho, scaled=False))
            for geo in shallow.levels
        )
        for a, b in zip(pts[:-1], pts[1:]):
            gap = abs(shallow.f_values(a[None])[0] - shallow.f_values(b[None])[0])
            assert gap <= lip * np.linalg.norm(a - b) + 1e-12

    def test_shear_jacobian_is_one(self, shallow):
        # finite differences at generic points, far from every ball
        def H(pt):
            x, y = pt[:3], pt[3]
            f = shallow.f_values(x[None])[0]
            return np.concatenate([x, [y + f]])

        rng = np.random.default_rng(11)
        for _ in range(5):
            pt = np.concatenate([rng.uniform(0.3, 0.7, 3), [0.2]])
            h = 1e-6
            J = np.empty((4, 4))
            for j in range(4):
                e = np.zeros(4)
                e[j] = h
                J[:, j] = (H(pt + e) - H(pt - e)) / (2 * h)
            assert np.linalg.det(J) == pytest.approx(1.0, abs=1e-6)

    def test_shear_map_wrap_has_unit_coefficient(self, shallow):
        # cross-module: the shear built from the lattice field is volume
        # preserving wherever the gradient exists
        from orliczlab.distortion import kf_numeric, shear_map

        m = shear_map(shallow.f_values, shallow.k)
        for x in ([0.31, 0.62, 0.47, 0.2], [0.11, 0.83, 0.59, -0.4]):
            assert kf_numeric(m, np.asarray(x)) == pytest.approx(1.0, abs=1e-6)

    def test_residual_measure_bound(self, shallow, deep):
        for model in (shallow, deep):
            for m in range(1, model.depth + 1):
                vol, cap = model.residual_measure_bound(m)
                assert vol <= cap


class TestChecks:
    @pytest.mark.parametrize("p", [2, 3])
    def test_oscillation_shallow(self, shallow, p):
        rep = check_oscillation(shallow, p, sample_balls=4, samples_per_ball=512)
        assert rep.status == "PASS"
        assert rep.details["own_level_range_error"] < 1e-12

    @pytest.mark.parametrize("p", [2, 3])
    def test_diameter_shallow(self, shallow, p):
        rep = check_diameter(shallow, p, samples=512)
        assert rep.status == "PASS"
        assert rep.lhs >= 2.0 ** (-(p + 1))
        assert rep.details["upper_bound"]["status"] == "PASS"

    def test_oscillation_deep(self, deep):
        rep = check_oscillation(deep, 4, sample_balls=4, samples_per_ball=512)
        assert rep.status == "PASS"

    def test_diameter_deep(self, deep):
        rep = check_diameter(deep, 4, samples=512)
        assert rep.status == "PASS"

    def test_energy_budget(self, shallow):
        reps = energy_budget(shallow)
        for rep in reps.values():
            assert rep.status == "PASS"
        assert reps["graph"].rhs == pytest.approx(1.0 + float(shallow.phi(3.0)))

    def test_hausdorff_lower(self, shallow):
        rep = hausdorff_lower(shallow, 2)
        assert rep.status == "PASS"
        assert rep.details["ball_count"] == 2 ** (2 * shallow.k)
        assert rep.lhs >= 2.0 ** (-5 * shallow.k)
        assert rep.details["cover_sum_upper"]["status"] == "PASS"


@pytest.fixture(scope="module")
def touching():
    """Nearly flat gauge: the first radius hits the quarter cap, level-one
    balls touch, and deeper balls sit on their boundary spheres.  The only
    regime where the partial-sum oscillation is genuinely nonzero."""
    tiny = OrliczFunction(
        lambda t: 1e-3 * np.asarray(t, float), description="tiny-linear",
        convex=True, log_fn=lambda lt: math.log(1e-3) + np.asarray(lt, float))
    return build_counterexample(tiny, 2, 3, u_max=2e4, nodes=8192)


class TestTouchingRegime:

    def test_first_radius_hits_cap(self, touching):
        assert math.exp(touching.levels[0].log_r) == pytest.approx(0.25, abs=1e-9)

    def test_oscillation_nonzero_but_bounded(self, touching):
        rep = check_oscillation(touching, 2, sample_balls=16, samples_per_ball=2048)
        assert rep.status == "PASS"
        assert 0.0 < rep.lhs <= rep.rhs

    def test_diameter_and_energy(self, touching):
        rep = check_diameter(touching, 2, samples=1024)
        assert rep.status == "PASS"
        budget = energy_budget(touching)
        assert budget["aggregate"].details["method"].startswith("convexity")
        assert all(r.status == "PASS" for r in budget.values())

    def test_hausdorff(self, touching):
        rep = hausdorff_lower(touching, 2)
        assert rep.status == "PASS"


class TestCubeOffset:
    def test_custom_offset_respected(self):
        model = build_counterexample(parse_gauge("pow:p=2"), 3, 2,
                                     u_max=2e4, nodes=4096, cube_offset=0.123)
        centers = model.lattice_centers(2)
        assert len(centers) == 2 ** (2 * 3)
        assert np.all((centers >= 0.123) & (centers < 1.123))
        clone = CounterexampleModel.from_dict(model.to_dict())
        assert clone.cube_offset == pytest.approx(0.123)


class TestSerialization:
    def test_round_trip(self, shallow):
        clone = CounterexampleModel.from_dict(shallow.to_dict())
        assert clone.depth == shallow.depth
        for a, b in zip(clone.levels, shallow.levels):
            assert a.log_r == b.log_r and a.log_rho == b.log_rho
        pts = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.5], [0.31, 0.74, 0.99]])
        assert np.allclose(clone.f_values(pts), shallow.f_values(pts), atol=1e-14)
