"""Operator realizations against the closed-form oracle layer.

Expected values are frozen from independent evaluation (mpmath, 30
digits) rather than recomputed with the code under test.
"""

from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsobolev.core import Grid, LineFunction, SampledFunction, trapezoid
from fracsobolev.oracle import (
    Bump,
    Gaussian,
    PowerSum,
    Side,
    Step,
    gaussian_spectral_reference,
    oracle_frac_derivative,
    oracle_frac_integral,
    sample,
    sample_line,
)
from fracsobolev.operators import (
    KernelConstant,
    OperatorSpec,
    caputo_derivative,
    endpoint_constant,
    frac_derivative,
    frac_integral,
    gl_derivative,
    kappa,
    marchaud_derivative,
    marchaud_small_offset_bound,
    nodal_derivative,
    rl_derivative,
    spectral_derivative,
)

# mpmath, 30 digits
GAMMA_HALF = 1.7724538509055160273  # Gamma(1/2) = sqrt(pi)
INV_GAMMA_1P5 = 1.1283791670955125739  # 1/Gamma(3/2) = 2/sqrt(pi)
INV_GAMMA_HALF = 0.5641895835477562869  # 1/Gamma(1/2)
G23_OVER_G27 = 0.7553069177996519999  # Gamma(2.3)/Gamma(2.7)
G3_OVER_G15 = 2.2567583341910251478  # Gamma(3)/Gamma(1.5)
INV_GAMMA_2P5 = 0.7522527780636750493  # 1/Gamma(5/2)


def unit_grid(n: int) -> Grid:
    return Grid(0.0, 1.0, n)


class TestFracIntegral:
    def test_constant_exact(self):
        # I^0.5 of 1 at x=1 is 1/Gamma(1.5); the rule is exact on constants
        u = sample(PowerSum(0.0, ((1.0, 0.0),)), unit_grid(256))
        result = frac_integral(u, 0.5, "left")
        assert abs(result.values[-1] - INV_GAMMA_1P5) <= 1e-12

    def test_linear_exact(self):
        g = unit_grid(512)
        u = SampledFunction(g, g.nodes.copy())
        result = frac_integral(u, 0.5)
        expected = g.nodes**1.5 * INV_GAMMA_2P5
        assert np.max(np.abs(result.values - expected)) <= 5e-15

    def test_power_oracle_agreement(self):
        g = unit_grid(1024)
        f = PowerSum(0.0, ((1.0, 1.3),))
        result = frac_integral(sample(f, g), 0.4)
        expected = sample(oracle_frac_integral(f, 0.4, "left"), g)
        assert expected.values[-1] == pytest.approx(G23_OVER_G27, rel=1e-12)
        scale = np.max(np.abs(expected.values))
        assert np.max(np.abs(result.values - expected.values)) <= 1e-4 * scale

    def test_reflection_symmetry(self):
        g = unit_grid(200)
        u = sample(Gaussian(0.3, 0.1), g)
        right = frac_integral(u, 0.4, "right")
        mirrored = frac_integral(u.reflected(), 0.4, "left").reflected()
        assert np.max(np.abs(right.values - mirrored.values)) <= 1e-14

    def test_kernel_maps_to_constant(self):
        """I^(1-alpha) kappa^alpha is the constant Gamma(alpha)."""
        g = unit_grid(128)
        k = kappa(0.5, "left", g)
        result = frac_integral(k, 0.5)
        assert np.max(np.abs(result.values - GAMMA_HALF)) <= 1e-13

    def test_kernel_without_metadata_fit_is_exact(self):
        g = unit_grid(128)
        bare = SampledFunction(g, kappa(0.5, "left", g).values)
        result = frac_integral(bare, 0.5)
        assert np.max(np.abs(result.values - GAMMA_HALF)) <= 1e-12

    def test_order_range_enforced(self):
        u = sample(Gaussian(0.5, 0.2), unit_grid(64))
        with pytest.raises(ValueError):
            frac_integral(u, 0.0)
        with pytest.raises(ValueError):
            frac_integral(u, 1.3)

    def test_non_integrable_base_rejected(self):
        g = unit_grid(64)
        with np.errstate(divide="ignore"):
            vals = (g.nodes - g.a) ** -1.2
        with pytest.raises(ValueError, match="not locally integrable"):
            frac_integral(SampledFunction(g, vals), 0.5)


class TestRlDerivative:
    def test_constant_closed_form(self):
        # D^0.5 of 1 on (0,1) is x^{-1/2}/Gamma(1/2); exact for the interpolant
        g = unit_grid(512)
        u = sample(PowerSum(0.0, ((1.0, 0.0),)), g)
        d = rl_derivative(u, 0.5)
        assert abs(d.values[-1] - INV_GAMMA_HALF) <= 1e-12
        expected = g.nodes[1:] ** -0.5 * INV_GAMMA_HALF
        assert np.max(np.abs(d.values[1:] - expected) / expected) <= 1e-13

    def test_linear_closed_form(self):
        g = unit_grid(1024)
        u = SampledFunction(g, g.nodes.copy())
        d = rl_derivative(u, 0.5)
        assert d.values[-1] == pytest.approx(INV_GAMMA_1P5, rel=1e-12)

    def test_base_node_flagged(self):
        u = sample(Gaussian(0.5, 0.2), unit_grid(64))
        d = rl_derivative(u, 0.3)
        assert not np.isfinite(d.values[0])
        assert np.all(np.isfinite(d.values[1:]))

    def test_kernel_annihilated(self):
        g = unit_grid(256)
        for alpha in (0.3, 0.5, 0.7):
            d = rl_derivative(kappa(alpha, "left", g), alpha)
            assert np.max(np.abs(d.values[1:])) == 0.0

    def test_kernel_annihilated_without_metadata(self):
        g = unit_grid(256)
        bare = SampledFunction(g, kappa(0.5, "left", g).values)
        d = rl_derivative(bare, 0.5)
        assert np.max(np.abs(d.values[1:])) <= 1e-12

    def test_right_side_oracle_agreement(self):
        g = unit_grid(1024)
        f = PowerSum(1.0, ((1.0, 1.3),), orientation=Side.RIGHT)
        d = rl_derivative(sample(f, g), 0.5, "right")
        expected = sample(oracle_frac_derivative(f, 0.5, "right"), g)
        m = np.isfinite(d.values) & np.isfinite(expected.values)
        scale = np.max(np.abs(expected.values[m]))
        assert np.max(np.abs(d.values[m] - expected.values[m])) <= 1e-3 * scale

    def test_step_away_from_jump(self):
        g = unit_grid(1024)
        f = Step(0.5, 1.0)
        d = rl_derivative(sample(f, g), 0.5)
        expected = sample(oracle_frac_derivative(f, 0.5, "left"), g)
        away = (np.abs(g.nodes - 0.5) >= 0.05) & (g.nodes > 0)
        scale = np.max(np.abs(expected.values[away]))
        err = np.max(np.abs(d.values[away] - expected.values[away]))
        assert err <= 1e-2 * scale

    def test_inverts_integral_on_affine(self):
        """The composed rl(I(u)) returns u at interior nodes (rel 1e-6)."""
        g = Grid(0.0, 1.0, 1 << 16)
        u = SampledFunction(g, 1.0 + g.nodes)
        for alpha in (0.3, 0.5):
            back = rl_derivative(frac_integral(u, alpha), alpha)
            lo, hi = g.n // 10, (9 * g.n) // 10
            err = np.max(np.abs(back.values[lo:hi] - u.values[lo:hi]))
            assert err <= 1e-6 * np.max(np.abs(u.values))

    def test_inversion_converges_on_kinked_data(self):
        # piecewise-linear data with interior kinks: first-order recovery
        errs = []
        for n in (1024, 2048, 4096):
            g = unit_grid(n)
            u = SampledFunction(g, np.maximum(0.0, 1.0 - np.abs(g.nodes - 0.5) / 0.25))
            back = rl_derivative(frac_integral(u, 0.5), 0.5)
            lo, hi = n // 10, (9 * n) // 10
            errs.append(np.max(np.abs(back.values[lo:hi] - u.values[lo:hi])))
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
        assert min(orders) >= 0.8


class TestGlDerivative:
    def test_agrees_with_product_rl_on_bump(self):
        errs = []
        for n in (1024, 2048, 4096):
            g = unit_grid(n)
            u = sample(Bump(0.5, 0.3, 1.0), g)
            gl = gl_derivative(u, 0.5).values
            rl = rl_derivative(u, 0.5).values
            m = np.isfinite(rl)
            m[0] = False
            errs.append(np.max(np.abs(gl[m] - rl[m])) / np.max(np.abs(rl[m])))
        assert errs[1] <= 1e-2
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
        assert min(orders) >= 0.8

    def test_zero_maps_to_zero(self):
        g = unit_grid(64)
        u = SampledFunction(g, np.zeros(65))
        assert np.all(gl_derivative(u, 0.5).values == 0.0)

    def test_integer_limit_is_backward_difference(self):
        g = unit_grid(64)
        u = sample(Gaussian(0.5, 0.2), g)
        d = gl_derivative(u, 1.0)
        expected = np.empty(65)
        expected[0] = u.values[0] / g.h  # zero extension behind the base
        expected[1:] = np.diff(u.values) / g.h
        assert np.max(np.abs(d.values - expected)) == 0.0

    def test_rejects_singular_samples(self):
        k = kappa(0.5, "left", unit_grid(64))
        with pytest.raises(ValueError, match="finite nodal values"):
            gl_derivative(k, 0.5)

    def test_line_function_passthrough(self):
        u = sample_line(Gaussian(0.0, 1.0), 8.0, 256)
        d = gl_derivative(u, 0.5)
        assert isinstance(d, LineFunction)
        assert d.n == u.n


class TestCaputoDerivative:
    def test_constant_maps_to_zero(self):
        u = sample(PowerSum(0.0, ((1.0, 0.0),)), unit_grid(128))
        assert np.all(caputo_derivative(u, 0.5).values == 0.0)

    def test_equals_rl_when_base_value_vanishes(self):
        g = unit_grid(512)
        u = SampledFunction(g, g.nodes.copy())
        c = caputo_derivative(u, 0.5).values
        r = rl_derivative(u, 0.5).values
        assert np.max(np.abs(c[1:] - r[1:])) <= 1e-14

    def test_classical_split_identity(self):
        """caputo = rl - u(a)(x-a)^(-alpha)/Gamma(1-alpha), exactly in discrete form."""
        g = unit_grid(512)
        u = SampledFunction(g, 1.0 + g.nodes)
        c = caputo_derivative(u, 0.5).values
        r = rl_derivative(u, 0.5).values
        kernel = g.nodes[1:] ** -0.5 * INV_GAMMA_HALF
        assert np.max(np.abs(c[1:] + kernel - r[1:])) <= 1e-12
        # and the x=1 spot value: caputo(1) = rl(1) - 1/sqrt(pi)
        assert abs(c[-1] - (r[-1] - INV_GAMMA_HALF)) <= 1e-3

    def test_rejects_singular_samples(self):
        with pytest.raises(ValueError):
            caputo_derivative(kappa(0.5, "left", unit_grid(64)), 0.5)


class TestMarchaudDerivative:
    def test_matches_spectral_reference(self):
        # rel L-inf <= 1e-3 at n=4096, L=16 on a unit Gaussian
        u = sample_line(Gaussian(0.0, 1.0), 16.0, 4096)
        ref = gaussian_spectral_reference(Gaussian(0.0, 1.0), 0.5, "left")
        d = marchaud_derivative(u, 0.5, "left")
        scale = np.max(np.abs(ref.values))
        assert np.max(np.abs(d.values - ref.values)) <= 1e-3 * scale

    def test_other_orders_and_sides(self):
        u = sample_line(Gaussian(0.0, 1.0), 16.0, 4096)
        for alpha, side in ((0.25, "left"), (0.75, "right")):
            ref = gaussian_spectral_reference(Gaussian(0.0, 1.0), alpha, side)
            d = marchaud_derivative(u, alpha, side)
            scale = np.max(np.abs(ref.values))
            assert np.max(np.abs(d.values - ref.values)) <= 2e-4 * scale

    def test_zero_maps_to_zero(self):
        u = LineFunction(8.0, np.zeros(257))
        assert np.all(marchaud_derivative(u, 0.5).values == 0.0)

    def test_even_function_mirror(self):
        u = sample_line(Gaussian(0.0, 1.0), 16.0, 1024)
        left = marchaud_derivative(u, 0.5, "left").values
        right = marchaud_derivative(u, 0.5, "right").values
        assert np.max(np.abs(right - left[::-1])) == 0.0

    def test_sub_grid_bound_covers_model_term(self):
        u = sample_line(Gaussian(0.0, 1.0), 16.0, 4096)
        ref = gaussian_spectral_reference(Gaussian(0.0, 1.0), 0.5, "left")
        d = marchaud_derivative(u, 0.5, "left")
        bound = marchaud_small_offset_bound(u, 0.5)
        assert bound > 0.0
        assert np.max(np.abs(d.values - ref.values)) <= bound

    def test_warns_when_tail_visible(self):
        x = np.linspace(-16.0, 16.0, 1025)
        slow = LineFunction(16.0, 1.0 / (1.0 + x**2))
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            marchaud_derivative(slow, 0.5)
        assert any("window-tail" in str(w.message) for w in rec)


class TestSpectralDerivative:
    def test_integer_limit_is_first_derivative(self):
        """At alpha = 1 the left symbol is i*xi: the ordinary derivative."""
        u = sample_line(Gaussian(0.0, 1.0), 16.0, 4096).check_decay()
        d = spectral_derivative(u, 1.0, "left")
        expected = -u.x * np.exp(-0.5 * u.x**2)
        assert np.max(np.abs(d.values - expected)) <= 1e-6

    def test_parseval_identity(self):
        # ||spectral D^alpha u||_2 against the weighted spectral integral
        from fracsobolev.core import discrete_fourier

        u = sample_line(Gaussian(0.0, 1.0), 16.0, 4096).check_decay()
        d = spectral_derivative(u, 0.5, "left")
        dx = u.grid.h
        norm_phys = np.sqrt(dx * np.sum(d.samples() ** 2))
        xi, uhat = discrete_fourier(u.samples(), u.half_width)
        dxi = xi[1] - xi[0]
        norm_spec = np.sqrt(np.sum(np.abs(xi) * np.abs(uhat) ** 2) * dxi / (2.0 * np.pi))
        assert abs(norm_phys - norm_spec) <= 1e-10 * norm_spec

    def test_near_monochromatic_pattern(self):
        # sin(3x) under a wide envelope: D^alpha ~ 3^alpha sin(3x + alpha*pi/2)
        envelope = Bump(0.0, 14.0, 1.0)
        x = np.linspace(-16.0, 16.0, 4097)
        u = LineFunction(16.0, envelope.value(x) * np.sin(3.0 * x)).check_decay()
        d = spectral_derivative(u, 0.5, "left")
        pattern = 3.0**0.5 * np.sin(3.0 * x + 0.25 * np.pi) * envelope.value(x)
        inner = np.abs(x) <= 4.0
        err = np.max(np.abs(d.values[inner] - pattern[inner])) / 3.0**0.5
        assert err <= 2e-2

    def test_aliasing_warning(self):
        x = np.linspace(-16.0, 16.0, 1025)
        rough = LineFunction(16.0, np.sign(np.sin(5.0 * x)) * np.exp(-0.5 * x**2))
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            spectral_derivative(rough, 0.5)
        assert any("aliasing" in str(w.message) for w in rec)

    def test_no_warning_on_resolved_input(self):
        u = sample_line(Gaussian(0.0, 1.0), 16.0, 1024).check_decay()
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            spectral_derivative(u, 0.5)

    def test_rejects_non_power_of_two(self):
        u = LineFunction(8.0, np.exp(-np.linspace(-8, 8, 301) ** 2))
        with pytest.raises(ValueError, match="power-of-two"):
            spectral_derivative(u, 0.5)


class TestKappa:
    def test_left_spot_value(self):
        g = unit_grid(4)
        k = kappa(0.5, "left", g)
        assert k.values[1] == pytest.approx(2.0, abs=1e-15)  # 0.25^(-1/2)
        assert not np.isfinite(k.values[0])
        assert k.left_power == (1.0, -0.5)

    def test_integer_order_is_constant(self):
        k = kappa(1.0, "left", unit_grid(8))
        assert np.all(k.values == 1.0)

    def test_right_mirrors_left(self):
        g = unit_grid(4)
        left = kappa(0.5, "left", g)
        right = kappa(0.5, "right", g)
        assert right.values[-2] == left.values[1]
        assert right.right_power == (1.0, -0.5)


class TestEndpointConstant:
    def test_kernel_recovers_unit_coefficient(self):
        k = kappa(0.5, "left", unit_grid(512))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            result = endpoint_constant(k, 0.5)
        assert isinstance(result, KernelConstant)
        assert abs(result.c_value - 1.0) <= 1e-13
        assert result.residual_estimate <= 1e-13
        assert result.side is Side.LEFT

    def test_smooth_function_has_no_kernel_part(self):
        u = sample(Gaussian(0.5, 0.2), unit_grid(512))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            result = endpoint_constant(u, 0.5)
        assert abs(result.c_value) <= 1e-3

    def test_mixture_recovers_coefficient(self):
        f = PowerSum(0.0, ((3.0, -0.3),)) + Bump(0.6, 0.25, 1.0)
        u = sample(f, unit_grid(512))
        result = endpoint_constant(u, 0.7)
        assert abs(result.c_value - 3.0) <= 1e-2

    def test_right_side(self):
        k = kappa(0.4, "right", unit_grid(256))
        result = endpoint_constant(k, 0.4, "right")
        assert abs(result.c_value - 1.0) <= 1e-12
        assert result.side is Side.RIGHT

    def test_flags_non_settling_extrapolation(self):
        g = unit_grid(256)
        with np.errstate(divide="ignore"):
            vals = (g.nodes - g.a) ** -0.8  # harder singularity than the probe
        u = SampledFunction(g, vals, left_power=(1.0, -0.8))
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            endpoint_constant(u, 0.5)
        assert any("did not settle" in str(w.message) for w in rec)

    def test_needs_enough_cells(self):
        u = sample(Gaussian(0.5, 0.2), unit_grid(4))
        with pytest.raises(ValueError, match="8 cells"):
            endpoint_constant(u, 0.5)


class TestDispatcher:
    def test_scheme_routing_and_domain_checks(self):
        g = unit_grid(64)
        u = sample(Gaussian(0.5, 0.2), g)
        line = sample_line(Gaussian(0.0, 1.0), 8.0, 256)
        with pytest.raises(ValueError, match="line functions"):
            frac_derivative(u, 0.5, scheme="marchaud")
        with pytest.raises(ValueError, match="line functions"):
            frac_derivative(u, 0.5, scheme="spectral")
        with pytest.raises(ValueError, match="interval grids"):
            frac_derivative(line, 0.5, scheme="product_rl")
        with pytest.raises(ValueError, match="unknown scheme"):
            frac_derivative(u, 0.5, scheme="midpoint")

    def test_composed_order_above_one(self):
        # D^1.5 x^2 = Gamma(3)/Gamma(1.5) x^0.5 via sigma-derivative then d/dx
        g = unit_grid(512)
        u = SampledFunction(g, g.nodes**2)
        d = frac_derivative(u, 1.5, scheme="product_rl")
        expected = G3_OVER_G15 * np.sqrt(g.nodes)
        m = np.isfinite(d.values)
        interior = slice(5, -5)
        err = np.max(np.abs(d.values[m][interior] - expected[m][interior]))
        assert err <= 1e-3 * G3_OVER_G15

    def test_integer_order_is_nodal_derivative(self):
        g = unit_grid(256)
        u = sample(Gaussian(0.5, 0.1), g)
        d = frac_derivative(u, 1.0)
        expected = nodal_derivative(u)
        assert np.max(np.abs(d.values - expected.values)) == 0.0

    def test_operator_spec_validation(self):
        from fracsobolev.core import FracOrder

        spec = OperatorSpec(FracOrder(0.5), Side.LEFT, "grunwald")
        assert spec.scheme == "grunwald"
        with pytest.raises(ValueError):
            OperatorSpec(FracOrder(0.5), Side.LEFT, "simpson")


class TestOperatorProperties:
    @given(
        alpha=st.floats(0.1, 0.9),
        a=st.floats(-2.0, 2.0),
        b=st.floats(-2.0, 2.0),
    )
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, alpha, a, b):
        g = unit_grid(128)
        u = sample(Gaussian(0.4, 0.15), g)
        v = sample(Bump(0.6, 0.3, 1.0), g)
        combo = SampledFunction(g, a * u.values + b * v.values)
        lhs = rl_derivative(combo, alpha).values[1:]
        rhs = a * rl_derivative(u, alpha).values[1:] + b * rl_derivative(v, alpha).values[1:]
        scale = max(np.max(np.abs(lhs)), 1.0)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale

    @given(
        alpha=st.floats(0.1, 0.7),
        beta=st.floats(0.1, 0.7),
    )
    @settings(max_examples=20, deadline=None)
    def test_integral_semigroup(self, alpha, beta):
        """I^alpha I^beta u = I^(alpha+beta) u within 1e-3 ||u||_inf at n=1024."""
        if alpha + beta > 1.0:
            return
        g = unit_grid(1024)
        u = sample(Gaussian(0.4, 0.15), g)
        twice = frac_integral(frac_integral(u, beta), alpha).values
        once = frac_integral(u, alpha + beta).values
        assert np.max(np.abs(twice - once)) <= 1e-3 * np.max(np.abs(u.values))

    def test_left_right_duality(self):
        # integral (I^a_left u) v = integral u (I^a_right v) for compact samples
        g = unit_grid(1024)
        u = sample(Bump(0.35, 0.2, 1.0), g)
        v = sample(Bump(0.6, 0.25, 1.0), g)
        for alpha in (0.25, 0.5, 0.75):
            lhs = trapezoid(frac_integral(u, alpha, "left").values * v.values, g.h)
            rhs = trapezoid(u.values * frac_integral(v, alpha, "right").values, g.h)
            assert abs(lhs - rhs) <= 1e-12 * abs(lhs)

    def test_reflection_conjugation_everywhere(self):
        g = unit_grid(128)
        u = sample(Gaussian(0.3, 0.1), g)
        for op in (
            lambda w, s: frac_integral(w, 0.4, s),
            lambda w, s: rl_derivative(w, 0.4, s),
            lambda w, s: gl_derivative(w, 0.4, s),
            lambda w, s: caputo_derivative(w, 0.4, s),
        ):
            right = op(u, "right").values
            mirrored = op(u.reflected(), "left").values[::-1]
            m = np.isfinite(right) & np.isfinite(mirrored)
            assert np.max(np.abs(right[m] - mirrored[m])) == 0.0
