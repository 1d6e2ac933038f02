import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blaschke_div.divisor import Divisor
from blaschke_div.errors import DegenerateCycle, ValidationError
from blaschke_div.scheme import (
    MappingScheme,
    SchemeDivisor,
    Stratum,
    Verdict,
    boundary_stratum,
    classify_preperiodic,
    count_markings,
    hat_composition,
    is_misiurewicz,
    periodic_boundary_points,
    validate,
)

ZERO = Divisor.from_points([0])
THIRD = np.exp(2j * np.pi / 3)


def single(delta=2):
    return MappingScheme.build({"v": "v"}, {"v": delta})


def chain(du=2, dv=2):
    return MappingScheme.build({"u": "v", "v": "v"}, {"u": du, "v": dv})


def two_cycle():
    return MappingScheme.build({"a": "b", "b": "a"}, {"a": 2, "b": 2})


class TestValidate:
    def test_fixed_vertex(self):
        rep = validate(single())
        assert rep.periodic == ("v",) and rep.period["v"] == 1

    def test_degree_one_cycle_is_degenerate(self):
        with pytest.raises(DegenerateCycle):
            validate(single(1))

    def test_tail_vertex_is_aperiodic(self):
        rep = validate(chain())
        assert rep.periodic == ("v",) and rep.nonperiodic == ("u",)

    def test_unknown_target_rejected(self):
        with pytest.raises(ValidationError):
            MappingScheme.build({"v": "w"}, {"v": 2})


class TestMarkings:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_fixed_vertex(self, d):
        assert count_markings(single(d)) == d - 1

    def test_chain(self):
        assert count_markings(chain(3, 2)) == 3


class TestSchemeDivisor:
    def test_degree_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            SchemeDivisor(single(3), {"v": ZERO})

    def test_strata(self):
        assert boundary_stratum(SchemeDivisor(single(), {"v": Divisor.from_points([0.4])})) == Stratum.INTERIOR
        pure = SchemeDivisor(single(), {"v": Divisor.from_points([np.exp(1j * np.pi / 3)])})
        assert boundary_stratum(pure) == Stratum.BOUNDARY
        desk = SchemeDivisor(chain(), {"u": Divisor.from_points([THIRD]), "v": Divisor.from_points([0.3])})
        assert boundary_stratum(desk) == Stratum.PARTIAL0_STAR

    def test_hat_composition_of_squares(self):
        z = np.array([0.3 + 0.1j, -0.5j])
        assert np.allclose(hat_composition(SchemeDivisor(single(), {"v": ZERO}), "v").eval(z), z**2, atol=1e-15)
        both = SchemeDivisor(two_cycle(), {"a": ZERO, "b": ZERO})
        assert np.allclose(hat_composition(both, "a").eval(z), z**4, atol=1e-15)

    def test_mixed_two_cycle_fixes_one(self):
        D = SchemeDivisor(two_cycle(), {"a": ZERO, "b": Divisor.from_points([0.5])})
        B = hat_composition(D, "a")
        assert B.degree == 4 and abs(B.eval(1.0) - 1) < 1e-15

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 0.8), st.floats(0, 2 * np.pi), st.floats(0, 0.8), st.floats(0, 2 * np.pi))
    def test_return_maps_are_conjugate(self, ra, ta, rb, tb):
        D = SchemeDivisor(two_cycle(), {"a": Divisor.from_points([ra * np.exp(1j * ta)]),
                                        "b": Divisor.from_points([rb * np.exp(1j * tb)])})
        z = 0.95 * np.exp(2j * np.pi * np.linspace(0, 1, 64, endpoint=False)) * np.linspace(0.1, 1, 64)
        Ba = D.maps["a"]
        left = Ba.eval(hat_composition(D, "a").eval(z))
        right = hat_composition(D, "b").eval(Ba.eval(z))
        assert np.max(np.abs(left - right)) < 1e-12


class TestPreperiodic:
    def test_fixed_point(self):
        tag = classify_preperiodic(SchemeDivisor(single(), {"v": ZERO}), "v", 1.0)
        assert (tag.m, tag.l) == (0, 1)

    def test_period_two(self):
        tag = classify_preperiodic(SchemeDivisor(single(), {"v": ZERO}), "v", THIRD)
        assert (tag.m, tag.l) == (0, 2)

    def test_tail_vertex(self):
        D = SchemeDivisor(chain(), {"u": ZERO, "v": ZERO})
        tag = classify_preperiodic(D, "u", np.exp(1j * np.pi / 3))
        assert (tag.m, tag.l) == (1, 2)

    @pytest.mark.parametrize("sign", [1, -1])
    @pytest.mark.parametrize("period", [1, 2, 3])
    def test_equivariance(self, period, sign):
        D = SchemeDivisor(chain(), {"u": ZERO, "v": Divisor.from_points([0.3])})
        for p in periodic_boundary_points(D.return_map("v"), period):
            q = sign * np.sqrt(p)  # a preimage of p under B_u = z^2
            tag_u = classify_preperiodic(D, "u", q)
            tag_v = classify_preperiodic(D, "v", complex(D.maps["u"].eval(q)))
            assert tag_u is not None and tag_v is not None
            assert (max(tag_u.m - 1, 0), tag_u.l) == (tag_v.m, tag_v.l)


class TestMisiurewicz:
    def test_interior_is_vacuously_true(self):
        assert is_misiurewicz(SchemeDivisor(single(), {"v": Divisor.from_points([0.2])})).verdict == Verdict.TRUE

    def test_fixed_boundary_support_is_false(self):
        D = SchemeDivisor(single(4), {"v": Divisor.from_entries([(0.0, 2), (-1.0, 1)])})
        assert is_misiurewicz(D).verdict == Verdict.FALSE

    def test_desk_example(self):
        D = SchemeDivisor(chain(), {"u": Divisor.from_points([THIRD]), "v": Divisor.from_points([0.3])})
        assert is_misiurewicz(D, horizon=50).verdict == Verdict.TRUE


def test_periodic_points_have_exact_period():
    B = SchemeDivisor(single(), {"v": Divisor.from_points([0.3])}).return_map("v")
    for q in periodic_boundary_points(B, 3):
        assert abs(B.iterate(3).eval(q) - q) < 1e-10
        assert abs(B.eval(q) - q) > 1e-6
