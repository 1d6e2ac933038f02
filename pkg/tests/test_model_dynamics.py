import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke_div.blaschke import from_divisor
from blaschke_div.divisor import Divisor, matching_distance
from blaschke_div.errors import ArcPlacementError, SignConditionViolated
from blaschke_div.model_dynamics import (
    KoenigsFamily,
    internal_ray,
    koenigs_limit,
    miranda_zero,
    potential,
    stretch_divisor,
    track_prerepelling,
)
from blaschke_div.scheme import MappingScheme, SchemeDivisor, periodic_boundary_points

ZERO = Divisor.from_points([0])
SINGLE = MappingScheme.build({"v": "v"}, {"v": 2})
CHAIN = MappingScheme.build({"u": "v", "v": "v"}, {"u": 2, "v": 2})


def square():
    return SchemeDivisor(SINGLE, {"v": ZERO})


class TestKoenigs:
    def test_linear_map_is_its_own_coordinate(self):
        z = np.array([0.1, 0.5j, -0.7 + 0.1j])
        assert np.allclose(koenigs_limit(lambda w: 0.5 * w, 0.5, z), z, atol=1e-15)

    def test_potential_examples(self):
        D = SchemeDivisor(SINGLE, {"v": Divisor.from_points([0.4])})
        assert potential(D, "v", 0j) == -np.inf
        assert koenigs_limit(lambda w: 0.5 * w, 0.5, 0.1) == pytest.approx(0.1)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.15, 0.85), st.floats(0, 2 * np.pi))
    def test_functional_equation(self, r, t):
        D = SchemeDivisor(SINGLE, {"v": Divisor.from_points([r * np.exp(1j * t)])})
        fam = KoenigsFamily(D)
        z = 0.4 * np.exp(2j * np.pi * np.linspace(0, 1, 16, endpoint=False))
        B = D.maps["v"]
        assert np.max(np.abs(fam("v", B.eval(z)) - B.deriv(0j) * fam("v", z))) < 1e-9

    def test_unit_derivative_at_origin(self):
        D = SchemeDivisor(CHAIN, {"u": Divisor.from_points([0.5j]), "v": Divisor.from_points([0.3])})
        fam, h = KoenigsFamily(D), 1e-6
        for v in ("u", "v"):
            assert abs((fam(v, h) - fam(v, -h)) / (2 * h) - 1) < 1e-8


class TestRays:
    def test_square_ray_at_one_is_radial(self):
        ray = internal_ray(square(), "v", 1.0, (-3.0, -1e-6), n_samples=50)
        assert np.allclose(ray.points, np.exp(ray.t), atol=1e-12)

    def test_square_ray_of_period_two(self):
        q = np.exp(2j * np.pi / 3)
        ray = internal_ray(square(), "v", q, (-3.0, -1e-6), n_samples=50)
        assert np.max(np.abs(np.angle(ray.points / q))) < 1e-10
        assert ray.potential_residual() < 1e-12

    def test_nonmonomial_ray_hits_its_potentials(self):
        D = SchemeDivisor(SINGLE, {"v": Divisor.from_points([0.3])})
        q = periodic_boundary_points(D.return_map("v"), 2)[0]
        window = (float(potential(D, "v", 0.5 * q)), float(potential(D, "v", q * (1 - 1e-7))))
        ray = internal_ray(D, "v", q, window, n_samples=60)
        assert ray.potential_residual() < 1e-8 and ray.landing_error() < 1e-6
        # the landing end is nearer the boundary than the inner end
        assert abs(ray.points[-1]) > abs(ray.points[0])


class TestTracking:
    def test_one_stays_at_one(self):
        E = SchemeDivisor(SINGLE, {"v": Divisor.from_points([0.2 + 0.1j])})
        res = track_prerepelling(square(), "v", 1.0, 0, 1, E)
        assert res.winding == 1 and abs(res.point - 1) < 1e-12

    def test_period_two_point_moves_to_a_root(self):
        E = SchemeDivisor(SINGLE, {"v": Divisor.from_points([0.1])})
        b = np.exp(2j * np.pi / 3)
        res = track_prerepelling(square(), "v", b, 0, 2, E)
        B = E.maps["v"]
        assert res.winding == 1
        assert abs(B.eval(B.eval(res.point)) - res.point) < 1e-12
        assert abs(abs(res.point) - 1) < 1e-12 and abs(res.point - b) < res.radius

    def test_preimage_of_one(self):
        E = SchemeDivisor(SINGLE, {"v": Divisor.from_points([0.05j])})
        res = track_prerepelling(square(), "v", -1.0, 1, 1, E)
        assert abs(E.maps["v"].eval(res.point) - 1) < 1e-12

    def test_lipschitz_in_the_divisor(self):
        b = np.exp(2j * np.pi / 3)
        points = []
        for a in (0.02, 0.03):
            E = SchemeDivisor(SINGLE, {"v": Divisor.from_points([a])})
            points.append(track_prerepelling(square(), "v", b, 0, 2, E).point)
        assert abs(points[0] - points[1]) < 10 * matching_distance(Divisor.from_points([0.02]), Divisor.from_points([0.03]))


class TestMiranda:
    def test_linear(self):
        x = miranda_zero(lambda x: np.array([x[0] - 0.5, x[1] - 0.5]), 2)
        assert np.allclose(x, [0.5, 0.5], atol=1e-9)

    def test_quadratic_component(self):
        x = miranda_zero(lambda x: np.array([x[0] - x[1] ** 2, x[1] - 0.5]), 2)
        assert np.allclose(x, [0.25, 0.5], atol=1e-8)

    def test_one_signed_component_rejected(self):
        with pytest.raises(SignConditionViolated):
            miranda_zero(lambda x: np.array([x[0] + 1]), 1)


class TestStretch:
    def test_no_boundary_support_is_unchanged(self):
        D = SchemeDivisor(SINGLE, {"v": Divisor.from_points([0.3])})
        res = stretch_divisor(D, 0.05)
        assert res.divisor.divisor("v") == D.divisor("v") and not res.constraints

    def test_oversized_arc_reports_bound(self):
        base = SchemeDivisor(CHAIN, {"u": Divisor.from_points([np.exp(2j * np.pi / 3)]), "v": Divisor.from_points([0.3])})
        p = periodic_boundary_points(base.return_map("v"), 2)[0]
        D = base.with_divisors({"u": Divisor.from_points([p])})
        with pytest.raises(ArcPlacementError, match="bound"):
            stretch_divisor(D, 3.0)

    def test_critical_value_lands_on_ray(self):
        base = SchemeDivisor(CHAIN, {"u": Divisor.from_points([np.exp(2j * np.pi / 3)]), "v": Divisor.from_points([0.3])})
        p = periodic_boundary_points(base.return_map("v"), 2)[0]
        D = base.with_divisors({"u": Divisor.from_points([p])})
        res = stretch_divisor(D, 0.05)
        zeta = res.divisor.divisor("u").points[0]
        assert abs(zeta) < 1 and abs(zeta - p) < 0.1
        assert res.ray_distances[0] < 1e-6
        assert from_divisor(res.divisor.divisor("u")).degree == 2
