import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkw import ConeClass, WeightSystem, cone_classify, span_projectors
from gkw.torus import (
    span_basis,
    verify_certificate,
    weight_system_from_matrix,
    weight_system_from_subalgebra,
)
from gkw.models import toda_weights

from oracles import exact_cone_class


def integer_system(max_r=3, max_d=5):
    @st.composite
    def build(draw):
        r = draw(st.integers(1, max_r))
        d = draw(st.integers(1, max_d))
        Q = draw(st.lists(st.lists(st.integers(-2, 2), min_size=r, max_size=r), min_size=d, max_size=d))
        y = draw(st.lists(st.integers(-3, 3), min_size=r, max_size=r))
        J = draw(st.lists(st.booleans(), min_size=d, max_size=d))
        return np.array(Q, dtype=float), np.array(y, dtype=float), [j for j, b in enumerate(J) if b]

    return build()


class TestWeightSystem:
    def test_from_matrix_takes_columns(self):
        ws = weight_system_from_matrix([[1, 0, -1], [0, 1, -1]])
        np.testing.assert_array_equal(ws.weights, [[1, 0], [0, 1], [-1, -1]])
        assert ws.rank == 2 and ws.d == 3

    def test_subalgebra_frame_is_orthonormal(self):
        ws = weight_system_from_subalgebra([(1, -1, 0), (0, 1, -1)])
        assert ws.rank == 2 and ws.d == 3
        # The weights are the rows of an orthonormal frame's coordinates.
        np.testing.assert_allclose(ws.weights.T @ ws.weights, np.eye(2), atol=1e-14)

    def test_json_round_trip(self):
        ws = WeightSystem([[1.0, 0.5], [-2.0, 3.0]], ("a", "b"))
        back = WeightSystem.from_json(ws.to_json())
        np.testing.assert_array_equal(back.weights, ws.weights)
        assert back.labels == ws.labels
        json.loads(ws.to_json())

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            WeightSystem([[np.nan, 0.0]])

    def test_integrality(self):
        assert WeightSystem([[1.0, -2.0]]).is_integral()
        assert not WeightSystem([[0.5, 1.0]]).is_integral()


class TestProjectors:
    def test_examples(self):
        ws = weight_system_from_matrix([[1, 0], [0, 0]])
        P, Pp = span_projectors(ws, [0])
        np.testing.assert_array_equal(P, [[1, 0], [0, 0]])
        np.testing.assert_array_equal(Pp, [[0, 0], [0, 1]])

    @settings(max_examples=60, deadline=None)
    @given(integer_system())
    def test_projector_identities(self, case):
        Q, _, J = case
        ws = WeightSystem(Q)
        P, Pp = span_projectors(ws, J)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(P, P.T, atol=1e-12)
        np.testing.assert_allclose(P + Pp, np.eye(ws.rank), atol=1e-12)
        for j in J:
            np.testing.assert_allclose(P @ Q[j], Q[j], atol=1e-12)
        rank = np.linalg.matrix_rank(Q[J]) if J else 0
        assert round(np.trace(P)) == rank
        assert span_basis(ws, J).shape == (ws.rank, rank)


class TestConeExamples:
    def test_outside_with_separator(self):
        ws = weight_system_from_matrix([[1, 0], [0, 1]])
        res = cone_classify(ws, [0, 1], [-1, 0])
        assert res.cls is ConeClass.OUTSIDE
        np.testing.assert_allclose(res.separator, [1, 0], atol=1e-12)
        assert verify_certificate(ws, res)

    def test_boundary(self):
        ws = weight_system_from_matrix([[1, 0], [0, 1]])
        res = cone_classify(ws, [0, 1], [1, 0])
        assert res.cls is ConeClass.BOUNDARY
        np.testing.assert_allclose(res.coefficients, [1, 0])

    def test_toda_zero_is_interior(self):
        ws = toda_weights(3)
        res = cone_classify(ws, range(3), [0, 0], mode="float")
        assert res.cls is ConeClass.INTERIOR
        np.testing.assert_allclose(res.coefficients / res.coefficients[0], [1, 1, 1], atol=1e-9)

    def test_empty_index_set(self):
        ws = weight_system_from_matrix([[1, 0], [0, 1]])
        assert cone_classify(ws, [], [0, 0]).cls is ConeClass.INTERIOR
        res = cone_classify(ws, [], [0, 2])
        assert res.cls is ConeClass.OUTSIDE
        np.testing.assert_allclose(res.separator, [0, -1])

    def test_zero_generator_is_ignored(self):
        ws = WeightSystem([[0.0, 0.0], [1.0, 0.0]])
        res = cone_classify(ws, [0, 1], [2, 0])
        assert res.cls is ConeClass.INTERIOR
        assert verify_certificate(ws, res)

    def test_rational_mode_is_exact(self):
        ws = WeightSystem([[3.0, 1.0], [1.0, 3.0]])
        res = cone_classify(ws, [0, 1], [4, 4], mode="rational")
        assert res.exact_coefficients[:2] == (Fraction(1), Fraction(1))

    def test_target_shape_checked(self):
        ws = WeightSystem([[1.0, 0.0]])
        with pytest.raises(ValueError):
            cone_classify(ws, [0], [1, 2, 3])
        with pytest.raises(ValueError):
            cone_classify(ws, [0], [1, 0], mode="bogus")
        with pytest.raises(IndexError):
            cone_classify(ws, [5], [1, 0])

    def test_lineality_space(self):
        # q and -q generate a line: everything on it is interior.
        ws = WeightSystem([[1.0, 0.0], [-1.0, 0.0]])
        assert cone_classify(ws, [0, 1], [-3, 0]).is_interior
        assert cone_classify(ws, [0, 1], [0, 0]).is_interior
        assert cone_classify(ws, [0, 1], [0, 1]).cls is ConeClass.OUTSIDE


class TestConeProperties:
    @settings(max_examples=150, deadline=None)
    @given(integer_system())
    def test_matches_exact_oracle(self, case):
        Q, y, J = case
        ws = WeightSystem(Q)
        expected = exact_cone_class(Q[J], y)
        for mode in ("rational", "float"):
            res = cone_classify(ws, J, y, mode=mode)
            assert res.cls.value == expected, mode
            assert verify_certificate(ws, res)

    @settings(max_examples=60, deadline=None)
    @given(integer_system(), st.integers(0, 4))
    def test_monotone_in_index_set(self, case, extra):
        Q, y, J = case
        ws = WeightSystem(Q)
        J2 = sorted(set(J) | {extra % ws.d})
        # Cone membership is monotone in J.
        if cone_classify(ws, J, y).cls is not ConeClass.OUTSIDE:
            assert cone_classify(ws, J2, y).cls is not ConeClass.OUTSIDE

    @settings(max_examples=60, deadline=None)
    @given(integer_system(), st.integers(1, 5))
    def test_scale_invariance(self, case, k):
        Q, y, J = case
        ws = WeightSystem(Q)
        assert cone_classify(ws, J, y).cls is cone_classify(ws, J, k * y).cls

    @settings(max_examples=60, deadline=None)
    @given(integer_system())
    def test_positive_combination_is_interior(self, case):
        Q, _, J = case
        ws = WeightSystem(Q)
        y = np.arange(1, len(J) + 1) @ Q[J] if J else np.zeros(ws.rank)
        assert cone_classify(ws, J, y).is_interior

    def test_float_separator_is_unit(self):
        ws = WeightSystem([[0.3, 0.1], [0.2, 0.7]])
        res = cone_classify(ws, [0, 1], [-1.0, -0.5], mode="float")
        assert res.cls is ConeClass.OUTSIDE
        assert np.linalg.norm(res.separator) == pytest.approx(1.0)
        assert verify_certificate(ws, res)


class TestSpanTolerance:
    ws = WeightSystem([[2.0, 0.0, -1.0], [1.0, -1.0, 1.0], [2.0, 0.0, -1.0]])

    def test_rounding_off_span_is_absorbed(self):
        y = np.array([0.7, 0.3, 1.1]) @ self.ws.weights
        res = cone_classify(self.ws, range(3), y)
        assert res.is_interior and verify_certificate(self.ws, res)

    def test_exact_mode_keeps_binary_input(self):
        y = np.array([1.0, 1.0, 0.0]) @ self.ws.weights
        off = y + np.array([0.0, 1e-15, 0.0])
        assert cone_classify(self.ws, range(3), off, mode="rational", span_tol=0.0).cls is ConeClass.OUTSIDE
        assert cone_classify(self.ws, range(3), off, mode="rational").is_interior

    def test_far_off_span_is_outside(self):
        y = np.array([0.0, 0.0, 1.0]) + np.cross([2.0, 0.0, -1.0], [1.0, -1.0, 1.0]) * 1e-6
        assert cone_classify(self.ws, range(3), y).cls is ConeClass.OUTSIDE
