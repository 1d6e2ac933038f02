import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke_div.divisor import (
    Divisor,
    add,
    degree,
    dumps,
    in_neighborhood,
    loads,
    matching_distance,
    split_disk,
)
from blaschke_div.errors import DegreeMismatch, PointOutsideClosedDisk


def disk_point(max_radius=0.95):
    return st.builds(
        lambda r, t: complex(max_radius * np.sqrt(r) * np.exp(2j * np.pi * t)),
        st.floats(0, 1),
        st.floats(0, 1),
    )


def divisors(size):
    return st.lists(disk_point(), min_size=size, max_size=size).map(Divisor.from_points)


def brute_force_distance(D1, D2):
    a, b = D1.expanded(), D2.expanded()
    return min(max(abs(a[i] - b[j]) for i, j in enumerate(perm)) for perm in itertools.permutations(range(len(b))))


class TestDegreeAndSum:
    def test_empty_divisor_has_degree_zero(self):
        assert degree(Divisor.empty()) == 0

    def test_degree_counts_multiplicity(self):
        assert degree(Divisor.from_entries([(0, 2), (0.5, 1)])) == 3
        assert degree(Divisor.from_points([1j, -1j])) == 2

    def test_same_support_merges(self):
        assert add(Divisor.from_points([0]), Divisor.from_points([0])) == Divisor.from_entries([(0, 2)])

    def test_disjoint_support_concatenates(self):
        total = add(Divisor.from_points([0]), Divisor.from_points([1]))
        assert total.multiplicity(0) == 1 and total.multiplicity(1) == 1 and total.degree == 2

    def test_multiplicities_add(self):
        a = 0.3 + 0.1j
        assert add(Divisor.from_entries([(a, 2)]), Divisor.from_entries([(a, 3)])).multiplicity(a) == 5

    def test_nonpositive_multiplicity_rejected(self):
        with pytest.raises(ValueError):
            Divisor.from_entries([(0.1, 0)])


class TestSplit:
    def test_clean_split(self):
        q = np.exp(1j * np.pi / 3)
        parts = split_disk(Divisor.from_points([0.5, q]))
        assert parts.interior == Divisor.from_points([0.5])
        assert parts.boundary.degree == 1 and abs(parts.boundary.points[0] - q) < 1e-15

    def test_point_outside_disk(self):
        with pytest.raises(PointOutsideClosedDisk):
            split_disk(Divisor.from_points([1.2]))

    def test_all_interior(self):
        parts = split_disk(Divisor.from_entries([(0, 2)]))
        assert parts.interior.degree == 2 and parts.boundary.degree == 0

    @given(divisors(3))
    def test_recombination_is_lossless(self, D):
        assert split_disk(D).recombined() == D


class TestMatchingDistance:
    def test_identical(self):
        assert matching_distance(Divisor.from_points([0]), Divisor.from_points([0])) == 0

    def test_two_point_example(self):
        d = matching_distance(Divisor.from_points([0, 1]), Divisor.from_points([0.1, 0.9]))
        assert d == pytest.approx(0.1, abs=1e-15)

    def test_degree_mismatch(self):
        with pytest.raises(DegreeMismatch):
            matching_distance(Divisor.from_points([0]), Divisor.from_entries([(0, 2)]))

    @settings(max_examples=50)
    @given(divisors(4), divisors(4))
    def test_agrees_with_permutation_search(self, D1, D2):
        assert matching_distance(D1, D2) == pytest.approx(brute_force_distance(D1, D2), abs=1e-14)

    @settings(max_examples=50)
    @given(divisors(3), divisors(3), divisors(3))
    def test_metric_axioms(self, A, B, C):
        ab, bc, ac = matching_distance(A, B), matching_distance(B, C), matching_distance(A, C)
        assert ab == matching_distance(B, A)
        assert ab >= 0 and matching_distance(A, A) == 0
        assert ac <= ab + bc + 1e-14


class TestNeighborhood:
    @given(divisors(2), st.floats(1e-6, 1))
    def test_divisor_is_in_its_own_neighborhood(self, D, eps):
        assert in_neighborhood(D, D, eps)

    def test_far_point_is_outside(self):
        assert not in_neighborhood(Divisor.from_points([0.99]), Divisor.from_points([0.9]), 0.05)

    def test_boundary_points_only_in_closed_variant(self):
        D = Divisor.from_points([np.exp(0.4j)])
        assert not in_neighborhood(D, D, 0.1)
        assert in_neighborhood(D, D, 0.1, closed=True)


@given(divisors(3))
def test_json_round_trip(D):
    assert loads(dumps(D)) == D
