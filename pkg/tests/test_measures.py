import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from igeo import (
    DomainError,
    FiniteMeasure,
    SampleSpace,
    ShapeError,
    alpha_embed,
    chart_forward,
    chart_inverse,
    expectation,
    l2_inner,
    lp_norm,
    membership_diagnostics,
)
from igeo.measures import same_space


class TestSampleSpace:
    @pytest.mark.parametrize("weights", [[0.5, 0.6], [1.0, 0.0], [-0.5, 1.5], [], [[0.5, 0.5]], [np.nan, 1.0]])
    def test_rejects_invalid_weights(self, weights):
        with pytest.raises((DomainError, ShapeError)):
            SampleSpace(weights)

    def test_uniform(self):
        S = SampleSpace.uniform(4)
        assert S.n == 4
        np.testing.assert_allclose(S.weights, 0.25)

    def test_equality_and_hash(self):
        assert SampleSpace([0.5, 0.5]) == SampleSpace.uniform(2)
        assert hash(SampleSpace([0.5, 0.5])) == hash(SampleSpace.uniform(2))
        assert SampleSpace([0.5, 0.5]) != SampleSpace([0.4, 0.6])

    def test_weights_are_read_only(self, two_point):
        with pytest.raises(ValueError):
            two_point.weights[0] = 0.9

    def test_mismatched_spaces(self, two_point, three_point):
        with pytest.raises(ShapeError):
            same_space(two_point, three_point)


class TestFiniteMeasure:
    @pytest.mark.parametrize("density", [[1.0, 0.0], [1.0, -1.0], [1.0, np.inf]])
    def test_rejects_nonpositive_density(self, two_point, density):
        with pytest.raises(DomainError):
            FiniteMeasure(two_point, density)

    def test_rejects_length_mismatch(self, two_point):
        with pytest.raises(ShapeError):
            FiniteMeasure(two_point, [1.0, 1.0, 1.0])

    def test_mass_and_probability(self, skewed):
        assert skewed.mass == pytest.approx(1.0)
        assert skewed.is_probability()
        assert not FiniteMeasure(skewed.space, [1.0, 2.0]).is_probability()

    def test_equality(self, two_point):
        assert FiniteMeasure(two_point, [0.5, 1.5]) == FiniteMeasure(two_point, [0.5, 1.5])
        assert FiniteMeasure(two_point, [0.5, 1.5]) != FiniteMeasure(two_point, [1.5, 0.5])


@pytest.mark.parametrize("weights, f, expected", [
    ([0.5, 0.5], [1, 1], 1.0),
    ([0.5, 0.5], [1, -1], 0.0),
    ([0.2, 0.3, 0.5], [1, 2, 3], 2.3),
])
def test_expectation_examples(weights, f, expected):
    assert expectation(SampleSpace(weights), np.array(f, float)) == pytest.approx(expected, abs=1e-15)


def test_expectation_batches_over_rows(three_point):
    f = np.array([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]])
    np.testing.assert_allclose(expectation(three_point, f), [2.3, 1.0])


def test_expectation_shape_error(three_point):
    with pytest.raises(ShapeError):
        expectation(three_point, np.ones(2))


@pytest.mark.parametrize("weights, f, r, expected", [
    ([0.5, 0.5], [0, 0], 2, 0.0),
    ([0.5, 0.5], [1, -1], 2, 1.0),
    ([0.2, 0.3, 0.5], [1, 2, 3], 4, 45.5 ** 0.25),
])
def test_lp_norm_examples(weights, f, r, expected):
    assert lp_norm(SampleSpace(weights), np.array(f, float), r) == pytest.approx(expected, rel=1e-14)


def test_lp_norm_rejects_small_r(two_point):
    with pytest.raises(DomainError):
        lp_norm(two_point, np.ones(2), 0.5)


def test_l2_inner(three_point):
    assert l2_inner(three_point, np.array([1.0, 2, 3]), np.array([1.0, 1, 1])) == pytest.approx(2.3)


class TestBalancedChart:
    def test_forward_examples(self, two_point, skewed):
        np.testing.assert_allclose(chart_forward(FiniteMeasure(two_point, [1.0, 1.0])), [1.0, 1.0])
        np.testing.assert_allclose(chart_forward(skewed), [0.5 + math.log(0.5), 1.5 + math.log(1.5)], rtol=1e-15)
        np.testing.assert_allclose(chart_forward(skewed), [-0.193147, 1.905465], atol=1e-6)
        e = math.e
        np.testing.assert_allclose(chart_forward(FiniteMeasure(two_point, [e, e])), [e + 1, e + 1])

    def test_inverse_examples(self, two_point):
        np.testing.assert_allclose(chart_inverse(two_point, np.ones(2)).density, 1.0, rtol=1e-15)
        a = np.array([0.5 + math.log(0.5), 1.5 + math.log(1.5)])
        np.testing.assert_allclose(chart_inverse(two_point, a).density, [0.5, 1.5], rtol=1e-14)
        np.testing.assert_allclose(chart_inverse(two_point, np.full(2, 2 + math.log(2))).density, 2.0, rtol=1e-14)

    @given(arrays(np.float64, 5, elements=st.floats(-40, 40)))
    @settings(max_examples=100, deadline=None)
    def test_round_trip_from_chart(self, a):
        S = SampleSpace.uniform(5)
        np.testing.assert_allclose(chart_forward(chart_inverse(S, a)), a, atol=1e-12)

    @given(arrays(np.float64, 4, elements=st.floats(1e-8, 600.0)))
    @settings(max_examples=100, deadline=None)
    def test_round_trip_from_density(self, p):
        S = SampleSpace.uniform(4)
        np.testing.assert_allclose(chart_inverse(S, chart_forward(FiniteMeasure(S, p))).density, p, rtol=1e-12)


@pytest.mark.parametrize("alpha, density, expected", [
    (1.0, [1.0, 1.0], [0.0, 0.0]),
    (-1.0, [0.5, 1.5], [0.5, 1.5]),
    (0.0, [0.25, 4.0], [1.0, 4.0]),
])
def test_alpha_embed_examples(two_point, alpha, density, expected):
    np.testing.assert_allclose(alpha_embed(alpha, FiniteMeasure(two_point, density)), expected, atol=1e-15)


def test_alpha_embed_general_alpha(skewed):
    al = 0.4
    expected = 2 / (1 - al) * skewed.density ** ((1 - al) / 2)
    np.testing.assert_allclose(alpha_embed(al, skewed), expected, rtol=1e-15)


class TestMembership:
    def test_unit_density(self, two_point):
        r = membership_diagnostics(FiniteMeasure(two_point, [1.0, 1.0]), 4)
        assert (r.moment_p, r.moment_log_p, r.mass, r.min_density) == (1.0, 0.0, 1.0, 1.0)

    def test_skewed_second_moment(self, skewed):
        r = membership_diagnostics(skewed, 2)
        assert r.mass == pytest.approx(1.0)
        assert r.moment_p == pytest.approx(1.25)

    def test_rejects_small_lambda(self, skewed):
        with pytest.raises(DomainError):
            membership_diagnostics(skewed, 1.5)
