import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracgrad.config import FgdConfig
from fracgrad.frac_math import DerivativeStack, fractional_gradient, gamma, series_tail_bound

from oracles import GAMMA_REFERENCE, SERIES_SUM_REF, SERIES_TERM1_REF, SERIES_TERM2_REF


class TestGamma:
    def test_reference_values(self):
        for x, expected in GAMMA_REFERENCE.items():
            got = gamma(x)
            assert abs(got - expected) <= 1e-12 * abs(expected), f"gamma({x})"

    def test_half_is_sqrt_pi_over_two(self):
        assert abs(gamma(1.5) - math.sqrt(math.pi) / 2.0) <= 1e-12

    def test_positive_integers_are_exact_factorials(self):
        for n in range(1, 12):
            assert gamma(float(n)) == float(math.factorial(n - 1))

    @pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.5, 2.5, 3.7, 4.25])
    def test_recurrence(self, x):
        lhs = gamma(x + 1.0)
        rhs = x * gamma(x)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan"), float("inf")])
    def test_domain_errors(self, x):
        with pytest.raises(ValueError):
            gamma(x)

    def test_agrees_with_stdlib(self):
        for x in np.linspace(0.05, 5.0, 173):
            assert abs(gamma(x) - math.gamma(x)) <= 1e-12 * abs(math.gamma(x))

    @given(st.floats(min_value=0.01, max_value=4.99))
    @settings(max_examples=200, deadline=None)
    def test_recurrence_property(self, x):
        assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-12)


class TestDerivativeStack:
    def test_order_and_shape(self):
        stack = DerivativeStack([np.zeros((2, 3)), np.ones((2, 3))])
        assert stack.order == 2
        assert stack.shape == (2, 3)

    def test_scalar_entries_become_zero_d_arrays(self):
        stack = DerivativeStack([3.0])
        assert stack.shape == ()
        assert stack.values[0].dtype == np.float64

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            DerivativeStack([])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            DerivativeStack([np.zeros(2), np.zeros(3)])

    def test_from_arrays(self):
        stack = DerivativeStack.from_arrays((np.zeros(4), np.zeros(4), np.zeros(4)))
        assert stack.order == 3


class TestFractionalGradient:
    def test_single_term_reference(self):
        cfg = FgdConfig(alpha=0.5, n_terms=1, phi=0.0)
        out = fractional_gradient(DerivativeStack([3.2]), np.asarray(0.4), cfg)
        assert out.shape == ()
        assert abs(float(out) - SERIES_TERM1_REF) <= 1e-12

    def test_two_term_reference(self):
        cfg = FgdConfig(alpha=0.5, n_terms=2, phi=0.0)
        out = fractional_gradient(DerivativeStack([3.2, 2.0]), np.asarray(0.4), cfg)
        assert abs(float(out) - SERIES_SUM_REF) <= 1e-12

    def test_reduction_to_plain_gradient_is_bitwise(self):
        cfg = FgdConfig(alpha=1.0, n_terms=1, phi=0.0)
        g = np.array([[1.25, -7.5, 0.0], [3.0, 1e-300, -2.0]])
        for step in (np.zeros_like(g), np.full_like(g, 0.37)):
            out = fractional_gradient(DerivativeStack([g]), step, cfg)
            assert out.tobytes() == g.tobytes()

    def test_order_mismatch_rejected(self):
        cfg = FgdConfig(alpha=0.5, n_terms=2)
        with pytest.raises(ValueError):
            fractional_gradient(DerivativeStack([1.0]), np.asarray(0.1), cfg)

    def test_step_shape_mismatch_rejected(self):
        cfg = FgdConfig(alpha=0.5, n_terms=1)
        with pytest.raises(ValueError):
            fractional_gradient(DerivativeStack([np.zeros(2)]), np.zeros(3), cfg)

    def test_negative_step_rejected(self):
        cfg = FgdConfig(alpha=0.5, n_terms=1)
        with pytest.raises(ValueError):
            fractional_gradient(DerivativeStack([np.ones(2)]), np.array([0.1, -0.1]), cfg)

    def test_shape_preserved_on_rank4(self):
        cfg = FgdConfig(alpha=0.7, n_terms=2, phi=1e-8)
        shape = (2, 3, 2, 4)
        stack = DerivativeStack([np.ones(shape), np.full(shape, 0.5)])
        out = fractional_gradient(stack, np.full(shape, 0.2), cfg)
        assert out.shape == shape
        assert np.all(np.isfinite(out))

    def test_linearity_in_each_order(self):
        cfg = FgdConfig(alpha=0.6, n_terms=2, phi=0.0)
        step = np.asarray(0.3)
        base = fractional_gradient(DerivativeStack([1.0, 0.0]), step, cfg)
        doubled = fractional_gradient(DerivativeStack([2.0, 0.0]), step, cfg)
        assert float(doubled) == 2.0 * float(base)
        second = fractional_gradient(DerivativeStack([0.0, 1.0]), step, cfg)
        both = fractional_gradient(DerivativeStack([1.0, 1.0]), step, cfg)
        assert float(both) == pytest.approx(float(base) + float(second), rel=1e-15)

    def test_monotone_in_phi_for_positive_gradient(self):
        step = np.asarray(0.1)
        outs = [
            float(
                fractional_gradient(
                    DerivativeStack([2.0]),
                    step,
                    FgdConfig(alpha=0.5, n_terms=1, phi=phi),
                )
            )
            for phi in (0.0, 1e-4, 1e-2, 1.0)
        ]
        assert outs == sorted(outs)
        assert outs[0] < outs[-1]

    def test_zero_step_with_alpha_one_still_exact(self):
        cfg = FgdConfig(alpha=1.0, n_terms=1, phi=0.0)
        g = np.array([0.5, -0.25])
        out = fractional_gradient(DerivativeStack([g]), np.zeros(2), cfg)
        assert out.tobytes() == g.tobytes()

    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=8),
        st.floats(0.0, 1e3),
    )
    @settings(max_examples=100, deadline=None)
    def test_reduction_property(self, grads, step):
        g = np.asarray(grads, dtype=np.float64)
        cfg = FgdConfig(alpha=1.0, n_terms=1, phi=0.0)
        out = fractional_gradient(DerivativeStack([g]), np.full_like(g, step), cfg)
        assert np.array_equal(out, g)

    @given(st.floats(0.05, 0.999), st.integers(1, 4), st.floats(1e-6, 2.0))
    @settings(max_examples=100, deadline=None)
    def test_matches_direct_formula(self, alpha, n_terms, step):
        derivs = [float(v) for v in range(1, n_terms + 1)]
        cfg = FgdConfig(alpha=alpha, n_terms=n_terms, phi=0.0)
        out = float(fractional_gradient(DerivativeStack(derivs), np.asarray(step), cfg))
        expected = sum(
            d / math.gamma(v + 1 - alpha) * step ** (v - alpha)
            for v, d in enumerate(derivs, start=1)
        )
        assert out == pytest.approx(expected, rel=1e-12, abs=1e-12)


class TestSeriesTailBound:
    def test_zero_derivative_gives_zero(self):
        cfg = FgdConfig(alpha=0.5, n_terms=1, phi=0.0)
        assert series_tail_bound(DerivativeStack([0.0]), np.asarray(0.7), cfg) == 0.0

    def test_last_term_magnitude(self):
        cfg = FgdConfig(alpha=0.5, n_terms=2, phi=0.0)
        tail = series_tail_bound(DerivativeStack([3.2, 2.0]), np.asarray(0.4), cfg)
        assert abs(tail - SERIES_TERM2_REF) <= 1e-12

    def test_single_term_equals_whole_series(self):
        cfg = FgdConfig(alpha=0.5, n_terms=1, phi=0.0)
        stack = DerivativeStack([3.2])
        step = np.asarray(0.4)
        assert series_tail_bound(stack, step, cfg) == pytest.approx(
            float(fractional_gradient(stack, step, cfg)), rel=1e-15
        )

    def test_max_over_elements_and_absolute_value(self):
        cfg = FgdConfig(alpha=0.5, n_terms=1, phi=0.0)
        stack = DerivativeStack([np.array([1.0, -5.0, 2.0])])
        tail = series_tail_bound(stack, np.full(3, 0.4), cfg)
        solo = series_tail_bound(DerivativeStack([5.0]), np.asarray(0.4), cfg)
        assert tail == pytest.approx(solo, rel=1e-15)

    def test_order_mismatch_rejected(self):
        cfg = FgdConfig(alpha=0.5, n_terms=3)
        with pytest.raises(ValueError):
            series_tail_bound(DerivativeStack([1.0]), np.asarray(0.1), cfg)
