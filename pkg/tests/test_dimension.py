import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke_div.dimension import (
    QuadraticJuliaSystem,
    RepellingSystem,
    angular_width,
    angular_width_image,
    bound_c,
    cantor_system,
    circle_system,
    is_nondecreasing,
    leading_eigenvalue,
    linear_branch,
    linear_system,
    moran_dimension,
    nonescaping_set,
    omits_origin,
    pressure_dimension,
    random_univalent_map,
    shishikura_bound,
    transfer_matrix,
)
from blaschke_div.errors import BracketDoesNotStraddle, DepthBudgetExceeded, OriginInDomain, ValidationError

LOG2_LOG3 = np.log(2) / np.log(3)


def ratio_lists():
    return st.integers(1, 5).flatmap(
        lambda m: st.lists(st.floats(0.02, 0.95 / m), min_size=m, max_size=m)
    )


class TestMoran:
    def test_cantor(self):
        assert moran_dimension([1 / 3, 1 / 3]) == pytest.approx(LOG2_LOG3, abs=1e-12)

    def test_single_ratio(self):
        assert moran_dimension([0.4]) == 0

    def test_halves_fill_an_interval(self):
        assert moran_dimension([0.5, 0.5]) == pytest.approx(1, abs=1e-12)

    @given(ratio_lists())
    def test_root_of_moran_sum(self, ratios):
        s = moran_dimension(ratios)
        if len(ratios) > 1:
            assert sum(r**s for r in ratios) == pytest.approx(1, abs=1e-9)


class TestPressure:
    def test_cantor(self):
        assert pressure_dimension(cantor_system()).estimate == pytest.approx(LOG2_LOG3, abs=1e-3)

    def test_single_branch(self):
        assert pressure_dimension(linear_system([0.5])).estimate == 0

    def test_quarter_and_half(self):
        assert pressure_dimension(linear_system([0.5, 0.25])).estimate == pytest.approx(0.69424, abs=1e-3)

    @settings(max_examples=30, deadline=None)
    @given(ratio_lists())
    def test_agrees_with_moran(self, ratios):
        assert pressure_dimension(linear_system(ratios)).estimate == pytest.approx(moran_dimension(ratios), abs=1e-3)

    def test_bracket_without_sign_change(self):
        with pytest.raises(BracketDoesNotStraddle):
            pressure_dimension(cantor_system(), bracket=(0.7, 2.0))

    def test_overlapping_branches_are_not_certified(self):
        overlapping = RepellingSystem(0, 1, [linear_branch(0.6, 0.1), linear_branch(0.6, -0.1)])
        assert not overlapping.certificate.ok
        with pytest.raises(ValidationError):
            pressure_dimension(overlapping)

    def test_eigenvalue_is_the_moran_sum(self):
        ratios = [0.3, 0.2, 0.1]
        matrix = transfer_matrix(linear_system(ratios), 3, 0.8)
        assert leading_eigenvalue(matrix) == pytest.approx(sum(r**0.8 for r in ratios), rel=1e-10)

    def test_report_serializes(self):
        report = pressure_dimension(cantor_system()).to_dict()
        assert report["estimate"] == pytest.approx(LOG2_LOG3, abs=1e-3) and report["grid"]

    def test_julia_system_near_one(self):
        # small |c| gives a Julia set close to the circle
        assert pressure_dimension(QuadraticJuliaSystem(0.05)).estimate == pytest.approx(1, abs=0.01)


class TestNonEscapingSet:
    def test_cantor_points(self):
        sample = nonescaping_set(cantor_system(), 8)
        assert sample.points.size == 2**8
        # every point lies within 3^-8 of a left endpoint at depth 8
        left = np.zeros(1)
        for k in range(1, 9):
            left = np.concatenate([left, left + 2 / 3**k])
        gap = np.min(np.abs(sample.points[:, None].real - left[None, :]), axis=1)
        assert np.max(gap) <= 3.0**-8 + 1e-15

    def test_single_branch_gives_the_fixed_point(self):
        sample = nonescaping_set(linear_system([0.5]), 30)
        fixed = linear_system([0.5]).branches[0].inverse(0)
        offset = fixed / (1 - 0.5)
        assert np.unique(np.round(sample.points, 8)).size == 1
        assert abs(sample.points[0] - offset) < 1e-8

    def test_circle_samples(self):
        sample = nonescaping_set(circle_system(), 10)
        assert np.max(np.abs(np.abs(sample.points) - 1)) < 1e-8

    def test_depth_budget(self):
        with pytest.raises(DepthBudgetExceeded):
            nonescaping_set(cantor_system(), 30)


class TestShishikuraBound:
    def test_example(self):
        assert shishikura_bound(10) == pytest.approx(1.8976, abs=1e-4)

    def test_limit(self):
        assert abs(shishikura_bound(1e6) - 2) < 1e-4

    def test_increasing_in_eta(self):
        values = [shishikura_bound(eta) for eta in np.geomspace(10, 1e8, 200)]
        assert np.all(np.diff(values) > 0)

    def test_decreasing_in_q(self):
        values = [shishikura_bound(20, q=q) for q in range(1, 8)]
        assert np.all(np.diff(values) < 0)

    def test_eta_must_exceed_one(self):
        with pytest.raises(ValidationError):
            shishikura_bound(1.0)


class TestAngularWidth:
    def test_translated_disk(self):
        width = angular_width_image(lambda z: z + 2, 0.5)
        assert width == pytest.approx(2 * np.arcsin(0.25), abs=1e-9)
        assert width <= bound_c(0.5)

    def test_shrinks_with_radius(self):
        f = lambda z: (z + 0.3) / (1 - 0.5 * z) + 2
        widths = [angular_width_image(f, r) for r in (0.3, 0.1, 0.01, 0.001)]
        assert all(b < a for a, b in zip(widths, widths[1:])) and widths[-1] < 1e-2

    def test_origin_in_image(self):
        with pytest.raises(OriginInDomain):
            angular_width_image(lambda z: z, 0.5)

    def test_path_width(self):
        assert angular_width(np.exp(1j * np.linspace(0, 3 * np.pi, 100))) == pytest.approx(3 * np.pi)

    def test_random_maps_omit_origin(self, rng):
        for _ in range(20):
            assert omits_origin(random_univalent_map(rng))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([0.3, 0.5, 0.7]))
    def test_bound_holds(self, seed, r):
        f = random_univalent_map(np.random.default_rng(seed))
        assert angular_width_image(f, r, n_angles=1024, n_radii=16) <= bound_c(r)


def test_nondecreasing_with_noise():
    assert is_nondecreasing([1.0, 1.02, 1.01, 1.2], noise=0.03)
    assert not is_nondecreasing([1.0, 0.9], noise=0.03)
