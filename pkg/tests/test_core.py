"""Tests for the numerical kernel: gamma, GL weights, product quadrature, Fourier."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsobolev.core import (
    FracOrder,
    Grid,
    LineFunction,
    SampledFunction,
    Side,
    discrete_fourier,
    gamma_fn,
    gl_weights,
    inverse_discrete_fourier,
    line_grid,
    product_kernels,
    singular_quadrature_weights,
    trapezoid,
    uniform_grid,
)

# Reference values computed independently with mpmath at 30 digits.
GAMMA_HALF = 1.7724538509055160273
GAMMA_2P5 = 1.3293403881791370205
GAMMA_NEG_HALF = -3.5449077018110320546
GAMMA_10P3 = 716430.68906237524455
INV_GAMMA_1P5 = 1.1283791670955125739  # = 2/sqrt(pi)
G2_OVER_G2P5 = 0.7522527780636750493


class TestGamma:
    def test_spot_values(self):
        assert gamma_fn(0.5) == pytest.approx(GAMMA_HALF, rel=1e-14)
        assert gamma_fn(2.5) == pytest.approx(GAMMA_2P5, rel=1e-14)
        assert gamma_fn(10.3) == pytest.approx(GAMMA_10P3, rel=1e-13)
        assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-15)
        assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)

    def test_reflection_to_negative_non_integers(self):
        assert gamma_fn(-0.5) == pytest.approx(GAMMA_NEG_HALF, rel=1e-13)

    def test_poles_raise(self):
        for bad in (0.0, -1.0, -2.0, -17.0):
            with pytest.raises(ValueError):
                gamma_fn(bad)
        with pytest.raises(ValueError):
            gamma_fn(np.array([1.0, -3.0]))

    def test_vectorized(self):
        x = np.array([0.5, 2.5, 7.25])
        out = gamma_fn(x)
        assert out.shape == (3,)
        assert out[0] == pytest.approx(GAMMA_HALF, rel=1e-14)

    @given(st.floats(min_value=0.05, max_value=49.0))
    @settings(max_examples=200, deadline=None)
    def test_recurrence(self, x):
        assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-12)


class TestGLWeights:
    def test_first_weights_half(self):
        w = gl_weights(0.5, 3)
        assert np.allclose(w, [1.0, -0.5, -0.125, -0.0625], rtol=0, atol=1e-15)

    def test_weights_sum_to_zero_power(self):
        # sum_k w_k = (1 - 1)^alpha -> partial sums decrease to 0
        w = gl_weights(0.7, 4000)
        partial = np.cumsum(w)
        assert partial[-1] == pytest.approx(0.0, abs=5e-3)
        assert np.all(partial > 0)

    @given(st.floats(min_value=0.05, max_value=0.95))
    @settings(max_examples=50, deadline=None)
    def test_partial_sums_monotone(self, alpha):
        w = gl_weights(alpha, 200)
        partial = np.cumsum(w)
        # after w_0 the weights are negative, so the partial sums decrease
        assert np.all(np.diff(partial[1:]) <= 1e-15)
        assert np.all(w[1:] <= 0)


class TestProductQuadrature:
    def test_constant_exact(self):
        grid = uniform_grid(0.0, 1.0, 256)
        w = singular_quadrature_weights(0.5, grid, 256)
        # I^{1/2} 1 (1) = 1 / Gamma(1.5)
        assert w.sum() == pytest.approx(INV_GAMMA_1P5, abs=1e-12)

    def test_linear_exact(self):
        grid = uniform_grid(0.0, 1.0, 64)
        w = singular_quadrature_weights(0.5, grid, 64)
        vals = grid.nodes
        # I^{1/2} y (1) = Gamma(2)/Gamma(2.5)
        assert w @ vals == pytest.approx(G2_OVER_G2P5, abs=1e-12)

    def test_interior_node_linear_exact(self):
        grid = uniform_grid(0.0, 2.0, 80)
        alpha = 0.3
        j = 37
        w = singular_quadrature_weights(alpha, grid, j)
        xj = grid.nodes[j]
        vals = 2.0 * grid.nodes[: j + 1] + 1.0
        # I^a (2y+1)(x) = 2 x^{1+a}/Gamma(2+a) + x^a/Gamma(1+a)
        exact = 2.0 * xj ** (1 + alpha) / gamma_fn(2 + alpha) + xj**alpha / gamma_fn(1 + alpha)
        assert w @ vals == pytest.approx(exact, rel=1e-12)

    def test_alpha_one_is_trapezoid(self):
        grid = uniform_grid(0.0, 1.0, 10)
        w = singular_quadrature_weights(1.0, grid, 10)
        expected = np.full(11, grid.h)
        expected[0] = expected[-1] = grid.h / 2
        assert np.allclose(w, expected, atol=1e-14)

    def test_node_zero_empty(self):
        grid = uniform_grid(0.0, 1.0, 8)
        assert singular_quadrature_weights(0.5, grid, 0).tolist() == [0.0]

    @given(
        st.floats(min_value=0.1, max_value=0.9),
        st.floats(min_value=-2.0, max_value=2.0),
        st.floats(min_value=-2.0, max_value=2.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_affine_exactness_property(self, alpha, c0, c1):
        grid = uniform_grid(0.0, 1.0, 32)
        j = 32
        w = singular_quadrature_weights(alpha, grid, j)
        vals = c0 + c1 * grid.nodes
        exact = c0 / gamma_fn(1 + alpha) + c1 / gamma_fn(2 + alpha)
        assert w @ vals == pytest.approx(exact, abs=1e-11)

    def test_kernels_match_weights(self):
        # the convolution kernels and the per-node weights are two views of one rule
        alpha, n, j = 0.5, 16, 11
        f_left, f_right = product_kernels(alpha, n)
        grid = uniform_grid(0.0, 1.0, n)
        w = singular_quadrature_weights(alpha, grid, j)
        rebuilt = np.zeros(j + 1)
        for m in range(1, j + 1):
            rebuilt[j - m] += f_left[m - 1]
            rebuilt[j - m + 1] += f_right[m - 1]
        rebuilt *= grid.h**alpha / gamma_fn(alpha)
        assert np.allclose(w, rebuilt, rtol=1e-14)


class TestFourier:
    def test_gaussian_spectrum(self):
        L, n = 16.0, 1024
        grid = line_grid(L, n)
        x = grid.nodes[:-1]
        xi, uhat = discrete_fourier(np.exp(-0.5 * x**2), L)
        expected = math.sqrt(2 * math.pi) * np.exp(-0.5 * xi**2)
        window = np.abs(xi) <= 8.0
        err = np.max(np.abs(uhat[window] - expected[window]))
        assert err <= 1e-6 * math.sqrt(2 * math.pi)
        assert np.max(np.abs(uhat.imag)) <= 1e-9

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        u = rng.standard_normal(512)
        xi, uhat = discrete_fourier(u, 4.0)
        back = inverse_discrete_fourier(uhat, 4.0)
        assert np.max(np.abs(back.real - u)) <= 1e-12
        assert np.max(np.abs(back.imag)) <= 1e-12

    def test_parseval(self):
        rng = np.random.default_rng(11)
        u = rng.standard_normal(256)
        L = 8.0
        dx = 2 * L / u.size
        xi, uhat = discrete_fourier(u, L)
        dxi = xi[1] - xi[0]
        lhs = np.sum(np.abs(u) ** 2) * dx
        rhs = np.sum(np.abs(uhat) ** 2) * dxi / (2 * np.pi)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_impulse_is_flat(self):
        u = np.zeros(128)
        u[40] = 1.0
        xi, uhat = discrete_fourier(u, 2.0)
        assert np.allclose(np.abs(uhat), np.abs(uhat[0]), rtol=1e-12)

    def test_pads_to_power_of_two(self):
        u = np.ones(100)
        xi, uhat = discrete_fourier(u, 1.0)
        assert xi.size == 128


class TestDataModel:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            Grid(1.0, 0.0, 4)
        with pytest.raises(ValueError):
            Grid(0.0, 1.0, 0)

    def test_grid_nodes(self):
        g = uniform_grid(0.0, 1.0, 4)
        assert np.allclose(g.nodes, [0, 0.25, 0.5, 0.75, 1.0])
        assert g.h == 0.25
        assert g.refine().n == 8

    def test_sampled_function_shape_check(self):
        g = uniform_grid(0.0, 1.0, 4)
        with pytest.raises(ValueError):
            SampledFunction(g, np.zeros(4))

    def test_reflection_involution(self):
        g = uniform_grid(0.0, 1.0, 8)
        u = SampledFunction(g, g.nodes**2, left_power=(1.0, -0.5))
        r = u.reflected()
        assert r.right_power == (1.0, -0.5)
        assert r.left_power is None
        back = r.reflected()
        assert np.allclose(back.values, u.values)
        assert back.left_power == u.left_power

    def test_line_function_decay(self):
        L, n = 8.0, 64
        x = line_grid(L, n).nodes
        ok = LineFunction(L, np.exp(-0.5 * x**2)).check_decay()
        assert ok.decay_checked
        with pytest.warns(UserWarning):
            bad = LineFunction(L, np.cos(x)).check_decay()
        assert not bad.decay_checked

    def test_frac_order_split(self):
        assert FracOrder(0.3).m == 0 and FracOrder(0.3).sigma == pytest.approx(0.3)
        assert FracOrder(1.0).m == 0 and FracOrder(1.0).sigma == 1.0
        fo = FracOrder(1.5)
        assert fo.m == 1 and fo.sigma == pytest.approx(0.5)
        with pytest.raises(ValueError):
            FracOrder(0.0)

    def test_side_parse(self):
        assert Side.parse("left") is Side.LEFT
        assert Side.parse(Side.RIGHT) is Side.RIGHT
        with pytest.raises(ValueError):
            Side.parse("up")

    def test_trapezoid(self):
        x = np.linspace(0, 1, 101)
        assert trapezoid(x**2, 0.01) == pytest.approx(1 / 3, abs=1e-4)
