"""Numerical realizations of the one-sided fractional operators.

Grid-side operators identify a :class:`SampledFunction` with its
piecewise-linear interpolant:

* ``frac_integral``   product-trapezoidal rule, exact on piecewise-linear
  input, evaluated by convolution against the Toeplitz kernels,
* ``rl_derivative``   the exact derivative-of-lifted-integral form
  (differentiate ``I^{1-alpha}`` of the interpolant analytically; never a
  finite difference of the integral),
* ``gl_derivative``   truncated Grunwald-Letnikov sum (zero extension
  behind the base point),
* ``caputo_derivative``  the lower-order integral of the interpolant's
  slope, so the classical relation ``D = u(a) kernel + Caputo`` holds to
  machine precision at the discrete level.

Line-side operators (``marchaud_derivative``, ``spectral_derivative``)
act on :class:`LineFunction` windows of the real line.

Every right-sided operator is the reflection conjugate of the left code
path: reflect the samples through the midpoint, apply the left algorithm,
reflect back.  The change of variables shows this reproduces the
right-sided operator with the orientation conventions in which constants
have derivative ``u(b) (b-x)^{-alpha} / Gamma(1-alpha)`` and the kernel
``(b-x)^{alpha-1}`` is annihilated; no separate right-side quadrature
exists, which is also what makes the left/right mirror tests exact.

A non-finite base node marks kernel-type data.  Those inputs are split as
``u = c0 (x-a)^g + r`` (coefficient and exponent from sampling metadata
when present, otherwise fitted from the two nodes nearest the base; the
fit is exact for pure powers), the power part is mapped by the exact
Euler rule, and the quadrature only ever sees the regular remainder.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import fftconvolve

from .core import (
    FracOrder,
    Grid,
    LineFunction,
    SampledFunction,
    Side,
    discrete_fourier,
    gamma_fn,
    gl_weights,
    inverse_discrete_fourier,
    product_kernels,
    spectral_multiplier,
)

__all__ = [
    "OperatorSpec",
    "KernelConstant",
    "frac_integral",
    "rl_derivative",
    "gl_derivative",
    "caputo_derivative",
    "marchaud_derivative",
    "marchaud_small_offset_bound",
    "spectral_derivative",
    "frac_derivative",
    "kappa",
    "endpoint_constant",
    "nodal_derivative",
]

_SCHEMES = ("product_rl", "grunwald", "caputo", "marchaud", "spectral")
_ANNIHILATION_TOL = 1e-12


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full convolution; direct for small inputs, FFT beyond that."""
    if a.size * b.size <= 1 << 22:
        return np.convolve(a, b)
    return fftconvolve(a, b)


@dataclass(frozen=True)
class OperatorSpec:
    """Which derivative realization to run, at which order and side."""

    order: FracOrder
    side: Side = Side.LEFT
    scheme: str = "product_rl"

    def __post_init__(self) -> None:
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {_SCHEMES}")


@dataclass(frozen=True)
class KernelConstant:
    """Coefficient of the endpoint kernel recovered from sampled data.

    ``extrapolation_order`` counts the geometric nodes the accepted
    extrapolation used (3 = Richardson on a node triple, 2 = linear
    fallback, 1 = the data was already flat); ``residual_estimate`` is
    the disagreement between extrapolations from different triples, on
    the same scale as ``c_value``.
    """

    c_value: float
    side: Side
    alpha: FracOrder
    extrapolation_order: int
    residual_estimate: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.c_value):
            raise ValueError("endpoint constant must be finite")
        if self.residual_estimate < 0:
            raise ValueError("residual estimate must be non-negative")


# ---------------------------------------------------------------------------
# singular-base bookkeeping


def _base_power(u: SampledFunction) -> tuple[float, float] | None:
    """Leading ``coeff * (x - a)^exponent`` behaviour at the left base node.

    Metadata from sampling wins; otherwise fit the two nodes nearest the
    base (exact for a pure power).  Returns None when the base node is
    finite or when no credible singular fit exists (in which case the
    caller patches the node by linear extrapolation).
    """
    if np.isfinite(u.values[0]):
        return None
    if u.left_power is not None:
        return u.left_power
    v1, v2 = float(u.values[1]), float(u.values[2])
    if not (np.isfinite(v1) and np.isfinite(v2)) or v1 == 0.0 or v2 == 0.0:
        return None
    ratio = v2 / v1
    if ratio <= 0.0 or ratio >= 1.0:
        return None  # not decaying away from the base: no singular power
    exponent = math.log2(ratio)
    if exponent <= -1.0 + 1e-9:
        raise ValueError(
            f"base-node singularity fits exponent {exponent:.4f} <= -1: not locally integrable"
        )
    if exponent > -1e-4:
        return None
    coeff = v1 / u.grid.h**exponent
    return (coeff, exponent)


def _split_left_singular(
    u: SampledFunction,
) -> tuple[np.ndarray, tuple[float, float] | None]:
    """Return (regular part nodal values, power part) with u = regular + power."""
    vals = np.array(u.values, dtype=float)
    if np.isfinite(vals[0]):
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite samples away from the base node")
        return vals, None
    power = _base_power(u)
    if power is None:
        # no credible power behaviour: patch the marker node and move on
        vals[0] = 2.0 * vals[1] - vals[2]
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite samples away from the base node")
        return vals, None
    coeff, exponent = power
    t = u.grid.nodes - u.grid.a
    with np.errstate(divide="ignore", invalid="ignore"):
        w = coeff * np.power(t, exponent)
        regular = vals - w  # the base node is inf - inf; overwritten just below
    regular[0] = 0.0
    if not np.all(np.isfinite(regular)):
        raise ValueError("samples keep a singular residue after removing the fitted power")
    return regular, power


def _power_values(grid: Grid, coeff: float, exponent: float) -> np.ndarray:
    """Nodal values of ``coeff (x-a)^exponent`` with the base-node marker."""
    t = grid.nodes - grid.a
    with np.errstate(divide="ignore", invalid="ignore"):
        out = coeff * np.power(t, exponent)
    if exponent == 0.0:
        out = np.full(grid.n + 1, coeff)
    return out


def _euler_image(
    coeff: float, exponent: float, shift: float
) -> tuple[float, float] | None:
    """Euler rule ``(c, b) -> (c G(b+1)/G(b+1+shift), b+shift)``; None if annihilated."""
    target = exponent + shift
    if abs(target + 1.0) <= _ANNIHILATION_TOL:
        return None
    if abs(target) <= _ANNIHILATION_TOL:
        # snap to an exact constant so a fitted exponent's rounding noise
        # cannot leave a spurious singularity marker on the base node
        target = 0.0
    return (coeff * gamma_fn(exponent + 1.0) / gamma_fn(target + 1.0), target)


# ---------------------------------------------------------------------------
# the integral


def frac_integral(u: SampledFunction, alpha: float, side: Side | str = Side.LEFT) -> SampledFunction:
    """One-sided fractional integral of the piecewise-linear interpolant.

    Exact (up to roundoff) whenever ``u`` is piecewise linear on its own
    grid.  The value at the base node is the exact limit 0 (or the mapped
    power value when a kernel-type part was split off).
    """
    side = Side.parse(side)
    if not 0.0 < alpha <= 1.0:
        raise ValueError("frac_integral implemented for 0 < alpha <= 1")
    if side is Side.RIGHT:
        return frac_integral(u.reflected(), alpha, Side.LEFT).reflected()

    regular, power = _split_left_singular(u)
    grid = u.grid
    n = grid.n
    f_left, f_right = product_kernels(alpha, n)
    kernel_left = np.concatenate([[0.0], f_left])
    conv_left = _convolve(regular, kernel_left)[: n + 1]
    conv_right = _convolve(regular, f_right)[: n + 1]
    spurious = regular[0] * np.concatenate([f_right, [0.0]])
    out = (grid.h**alpha / gamma_fn(alpha)) * (conv_left + conv_right - spurious)

    out_power: tuple[float, float] | None = None
    if power is not None:
        image = _euler_image(*power, shift=alpha)
        if image is not None:
            out = out + np.nan_to_num(_power_values(grid, *image), nan=0.0, posinf=0.0, neginf=0.0)
            if image[1] < 0.0:
                out[0] = math.inf if image[0] > 0 else -math.inf
                out_power = image
    return SampledFunction(grid, out, left_power=out_power)


# ---------------------------------------------------------------------------
# derivatives on the grid


def _l1_slope_sum(regular: np.ndarray, grid: Grid, alpha: float) -> np.ndarray:
    """``I^{1-alpha}`` of the interpolant's slope, at nodes 1..n (index 0 unused)."""
    n = grid.n
    slopes = np.diff(regular) / grid.h
    m = np.arange(1, n + 1, dtype=float)
    g = np.power(m, 1.0 - alpha) - np.power(m - 1.0, 1.0 - alpha)
    conv = _convolve(slopes, g)[:n]
    out = np.zeros(n + 1)
    out[1:] = (grid.h ** (1.0 - alpha) / gamma_fn(2.0 - alpha)) * conv
    return out


def rl_derivative(u: SampledFunction, alpha: float, side: Side | str = Side.LEFT) -> SampledFunction:
    """Riemann-Liouville derivative of the interpolant, exact at nodes >= 1.

    Computed as the analytic derivative of the lower-order integral of the
    piecewise-linear lift: base-value kernel term plus the order
    ``1 - alpha`` integral of the slope.  The base node itself carries the
    non-finite marker (the one-sided derivative is not defined there).
    """
    side = Side.parse(side)
    if not 0.0 < alpha < 1.0:
        raise ValueError("rl_derivative implemented for 0 < alpha < 1")
    if side is Side.RIGHT:
        return rl_derivative(u.reflected(), alpha, Side.LEFT).reflected()

    regular, power = _split_left_singular(u)
    grid = u.grid
    t = grid.nodes - grid.a
    out = _l1_slope_sum(regular, grid, alpha)
    base_val = regular[0]
    if base_val != 0.0:
        with np.errstate(divide="ignore"):
            out[1:] += base_val * np.power(t[1:], -alpha) / gamma_fn(1.0 - alpha)

    singular_terms: list[tuple[float, float]] = []
    if base_val != 0.0:
        singular_terms.append((base_val / gamma_fn(1.0 - alpha), -alpha))
    if power is not None:
        image = _euler_image(*power, shift=-alpha)
        if image is not None:
            out[1:] += _power_values(grid, *image)[1:]
            singular_terms.append(image)
    out[0] = math.inf
    out_power = min(singular_terms, key=lambda cb: cb[1]) if singular_terms else None
    return SampledFunction(grid, out, left_power=out_power)


def gl_derivative(
    u: SampledFunction | LineFunction, alpha: float, side: Side | str = Side.LEFT
) -> SampledFunction | LineFunction:
    """Truncated Grunwald-Letnikov derivative (zero extension past the base).

    First-order accurate for functions vanishing at the base point; needs
    finite nodal values everywhere, so kernel-type samples are rejected.
    At ``alpha = 1`` the weights collapse to the first backward
    difference quotient.
    """
    side = Side.parse(side)
    if not 0.0 < alpha <= 1.0:
        raise ValueError("gl_derivative implemented for 0 < alpha <= 1")
    if isinstance(u, LineFunction):
        result = gl_derivative(u.as_sampled(), alpha, side)
        return LineFunction(u.half_width, result.values, decay_checked=False)
    if side is Side.RIGHT:
        return gl_derivative(u.reflected(), alpha, Side.LEFT).reflected()
    vals = u.values
    if not np.all(np.isfinite(vals)):
        raise ValueError("Grunwald-Letnikov needs finite nodal values everywhere")
    n = u.grid.n
    w = gl_weights(alpha, n)
    out = _convolve(vals, w)[: n + 1] / u.grid.h**alpha
    return SampledFunction(u.grid, out)


def caputo_derivative(u: SampledFunction, alpha: float, side: Side | str = Side.LEFT) -> SampledFunction:
    """Caputo derivative: the order ``1 - alpha`` integral of the slope.

    Exact for the interpolant, and satisfies the discrete form of the
    classical split (RL = base-value kernel + Caputo) to machine
    precision against :func:`rl_derivative`.
    """
    side = Side.parse(side)
    if not 0.0 < alpha < 1.0:
        raise ValueError("caputo_derivative implemented for 0 < alpha < 1")
    if side is Side.RIGHT:
        return caputo_derivative(u.reflected(), alpha, Side.LEFT).reflected()
    if not np.all(np.isfinite(u.values)):
        raise ValueError("Caputo needs samples of a function, finite up to the base point")
    return SampledFunction(u.grid, _l1_slope_sum(u.values, u.grid, alpha))


def nodal_derivative(u: SampledFunction) -> SampledFunction:
    """Second-order finite-difference first derivative at the nodes."""
    vals = u.values
    if not np.all(np.isfinite(vals)):
        raise ValueError("nodal derivative needs finite samples")
    return SampledFunction(u.grid, np.gradient(vals, u.grid.h, edge_order=2))


def frac_derivative(
    u: SampledFunction | LineFunction,
    alpha: float,
    side: Side | str = Side.LEFT,
    scheme: str = "product_rl",
) -> SampledFunction | LineFunction:
    """Dispatch on scheme; orders above one compose integer derivatives.

    For ``alpha = m + sigma`` with ``m >= 1`` the fractional part runs
    first and ``m`` exact-on-the-interpolant integer derivatives follow
    (the spectral scheme uses its symbol directly at any order).
    """
    side = Side.parse(side)
    order = FracOrder(alpha)
    if scheme not in _SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {_SCHEMES}")
    if scheme == "spectral":
        if not isinstance(u, LineFunction):
            raise ValueError("spectral derivative acts on line functions")
        return spectral_derivative(u, alpha, side)
    if scheme == "marchaud" and not isinstance(u, LineFunction):
        raise ValueError("Marchaud derivative acts on line functions")
    if scheme in ("product_rl", "caputo") and isinstance(u, LineFunction):
        raise ValueError(f"scheme {scheme!r} acts on interval grids")
    if order.sigma == 1.0:
        return _compose_integer(u, order.m + 1)
    fn = {
        "product_rl": rl_derivative,
        "grunwald": gl_derivative,
        "caputo": caputo_derivative,
        "marchaud": marchaud_derivative,
    }[scheme]
    return _compose_integer(fn(u, order.sigma, side), order.m)


def _compose_integer(u: SampledFunction | LineFunction, m: int) -> SampledFunction | LineFunction:
    if m == 0:
        return u
    if isinstance(u, LineFunction):
        vals = u.values
        for _ in range(m):
            vals = np.gradient(vals, u.grid.h, edge_order=2)
        return LineFunction(u.half_width, vals)
    vals = u.values
    flagged = ~np.isfinite(vals)
    work = np.where(flagged, 0.0, vals)
    for _ in range(m):
        work = np.gradient(work, u.grid.h, edge_order=2)
    # nodes within the integer-derivative stencil of a flagged node are tainted
    taint = flagged.copy()
    for _ in range(2 * m):
        taint[1:] |= taint[:-1]
        taint[:-1] |= taint[1:]
    work[taint] = math.inf
    return SampledFunction(u.grid, work)


# ---------------------------------------------------------------------------
# derivatives on the line


def marchaud_derivative(
    u: LineFunction,
    alpha: float,
    side: Side | str = Side.LEFT,
    points_per_decade: int = 80,
) -> LineFunction:
    """Marchaud form of the one-sided derivative on the truncated line.

    ``alpha/Gamma(1-alpha) * integral (u(x) - u(x-t)) / t^(1+alpha) dt``
    over ``t > 0`` (left side; the right side mirrors it), with offsets
    log-spaced from ``h/2`` to the window diameter and the sub-grid part
    of the integral modelled at first order through the local slope.  The
    unresolved remainder is bounded by
    :func:`marchaud_small_offset_bound`.
    """
    side = Side.parse(side)
    if not 0.0 < alpha < 1.0:
        raise ValueError("marchaud_derivative implemented for 0 < alpha < 1")
    if side is Side.RIGHT:
        flipped = LineFunction(u.half_width, u.values[::-1].copy(), u.decay_checked)
        out = marchaud_derivative(flipped, alpha, Side.LEFT, points_per_decade)
        return LineFunction(u.half_width, out.values[::-1].copy())

    grid = u.grid
    h = grid.h
    x = grid.nodes
    # t_max = window diameter: from any x, offsets beyond it look back past
    # the window edge, where the zero extension makes the tail analytic
    t_min, t_max = h / 2.0, 2.0 * u.half_width
    count = max(8, int(round(points_per_decade * math.log10(t_max / t_min))) + 1)
    s = np.linspace(math.log(t_min), math.log(t_max), count)
    offsets = np.exp(s)
    ds = s[1] - s[0]

    vals = u.values
    diff_at = np.empty((count, x.size))
    for k, t in enumerate(offsets):
        diff_at[k] = (vals - u.interp(x - t)) * t**-alpha  # (u(x)-u(x-t)) t^{-1-alpha} * t
    # trapezoid in log-offset space; the t factor above is the Jacobian
    weights = np.full(count, ds)
    weights[0] = weights[-1] = ds / 2.0
    integral = weights @ diff_at

    # sub-grid offsets, modelled at first order through the local slope
    slope = np.gradient(vals, h, edge_order=2)
    integral += slope * t_min ** (1.0 - alpha) / (1.0 - alpha)
    # offsets past t_max reach behind the window, where u is extended by zero
    integral += vals * t_max**-alpha / alpha

    scale = alpha / gamma_fn(1.0 - alpha)
    result = scale * integral
    # if u has not decayed, mass beyond the window (invisible here) would
    # contribute on the order of the edge value against the far kernel
    edge = max(abs(float(vals[0])), abs(float(vals[-1])))
    tail_estimate = edge * u.half_width**-alpha / gamma_fn(1.0 - alpha)
    result_scale = float(np.max(np.abs(result))) or 1.0
    if tail_estimate > 1e-6 * result_scale:
        warnings.warn(
            f"window-tail contribution estimate {tail_estimate / result_scale:.2e} "
            "of the result: the input has not decayed at the window edges",
            stacklevel=2,
        )
    return LineFunction(u.half_width, result)


def marchaud_small_offset_bound(u: LineFunction, alpha: float) -> float:
    """Bound on the modelled sub-grid part of the Marchaud integral."""
    h = u.grid.h
    slope = np.gradient(u.values, h, edge_order=2)
    lip = float(np.max(np.abs(slope)))
    return alpha / gamma_fn(1.0 - alpha) * lip * (h / 2.0) ** (1.0 - alpha) / (1.0 - alpha)


def spectral_derivative(u: LineFunction, alpha: float, side: Side | str = Side.LEFT) -> LineFunction:
    """Fourier-multiplier derivative ``F^-1[(+-i xi)^alpha F u]``.

    Principal branch symbol; requires a power-of-two sample count and a
    window the function has decayed in.  Warns on visible aliasing
    (spectral mass at the Nyquist frequency), and raises if discarding
    the imaginary residue would lose more than 1e-8 relative.
    """
    side = Side.parse(side)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = u.n
    if n & (n - 1):
        raise ValueError("spectral derivative needs a power-of-two sample count")
    if not u.decay_checked:
        u = u.check_decay()

    samples = u.samples()
    xi, uhat = discrete_fourier(samples, u.half_width)
    energy = np.abs(uhat) ** 2
    top_quartile = np.abs(xi) >= 0.75 * float(np.max(np.abs(xi)))
    total = float(np.sum(energy)) or 1.0
    fraction = float(np.sum(energy[top_quartile])) / total
    if fraction > 1e-8:
        warnings.warn(
            f"top-quartile spectral energy fraction {fraction:.2e}: "
            "the derivative is under-resolved (aliasing)",
            stacklevel=2,
        )
    dhat = spectral_multiplier(xi, alpha, side) * uhat
    d = inverse_discrete_fourier(dhat, u.half_width)
    imag = float(np.max(np.abs(d.imag)))
    real_scale = float(np.max(np.abs(d.real))) or 1.0
    if imag > 1e-8 * real_scale:
        raise ValueError(f"imaginary residue {imag:.2e} exceeds 1e-8 of the real part")
    closed = np.concatenate([d.real, d.real[:1]])
    return LineFunction(u.half_width, closed)


# ---------------------------------------------------------------------------
# kernel and endpoint constant


def kappa(alpha: float, side: Side | str, grid: Grid) -> SampledFunction:
    """The kernel ``(x-a)^(alpha-1)`` (left) or ``(b-x)^(alpha-1)`` (right).

    The base node carries the non-finite marker and the sample records its
    own leading power so every operator treats it exactly.  At
    ``alpha = 1`` the kernel is the constant 1 (no singular node).
    """
    side = Side.parse(side)
    if not 0.0 < alpha <= 1.0:
        raise ValueError("kappa is the kernel for orders in (0, 1]")
    if alpha == 1.0:
        return SampledFunction(grid, np.ones(grid.n + 1))
    t = grid.nodes - grid.a if side is Side.LEFT else grid.b - grid.nodes
    with np.errstate(divide="ignore"):
        vals = np.power(t, alpha - 1.0)
    if side is Side.LEFT:
        return SampledFunction(grid, vals, left_power=(1.0, alpha - 1.0))
    return SampledFunction(grid, vals, right_power=(1.0, alpha - 1.0))


def endpoint_constant(
    u: SampledFunction, alpha: float, side: Side | str = Side.LEFT
) -> KernelConstant:
    """Kernel coefficient ``c`` with ``u - c kappa`` regular at the base.

    Evaluates ``g = I^(1-alpha) u`` near the base and extrapolates it to
    the base point with a Richardson step on the geometric node triple
    (1, 2, 4); ``c`` is the limit divided by ``Gamma(alpha)``.  Repeating
    the extrapolation on the coarser triple (2, 4, 8) gives the
    ``residual_estimate``, and a spread above 1e-2 of the data scale is
    flagged with a warning (the extrapolation did not settle).
    """
    side = Side.parse(side)
    if not 0.0 < alpha < 1.0:
        raise ValueError("endpoint constant defined for orders in (0, 1)")
    if side is Side.RIGHT:
        mirrored = endpoint_constant(u.reflected(), alpha, Side.LEFT)
        return replace(mirrored, side=Side.RIGHT)
    if u.grid.n < 8:
        raise ValueError("need at least 8 cells to extrapolate at the endpoint")
    g = frac_integral(u, 1.0 - alpha, Side.LEFT).values

    def extrapolate(ga: float, gb: float, gc: float) -> tuple[float, int]:
        """Limit of g at the base from the geometric node triple (t, 2t, 4t)."""
        d1, d2 = gb - ga, gc - gb
        scale = max(abs(ga), abs(gb), abs(gc), 1e-300)
        if abs(d1) <= 1e-12 * scale and abs(d2) <= 1e-12 * scale:
            return ga, 1  # already flat to roundoff
        if d1 != 0.0 and d2 / d1 > 0.0:
            rate = math.log2(d2 / d1)
            if 0.05 <= rate <= 4.0:
                return ga - d1 / (2.0**rate - 1.0), 3
        return 2.0 * ga - gb, 2  # no power signature: linear extrapolation

    fine, order_used = extrapolate(float(g[1]), float(g[2]), float(g[4]))
    coarse, _ = extrapolate(float(g[2]), float(g[4]), float(g[8]))
    gamma_a = gamma_fn(alpha)
    c = fine / gamma_a
    residual = abs(fine - coarse) / abs(gamma_a)
    finite_g = g[np.isfinite(g)]
    g_scale = float(np.max(np.abs(finite_g))) if finite_g.size else 0.0
    scale = max(abs(c), g_scale / abs(gamma_a), 1e-300)
    if residual > 1e-2 * scale:
        warnings.warn(
            f"endpoint extrapolation did not settle: spread {residual:.3e} vs c = {c:.3e}",
            stacklevel=2,
        )
    return KernelConstant(c, side, FracOrder(alpha), order_used, residual)
