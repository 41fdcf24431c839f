"""Grids, sampled functions, and the shared numerical kernel.

Everything downstream (fractional-order operators, norms, verification
checks) works on uniform grids and identifies a sampled function with its
piecewise-linear interpolant.  This module owns that data model plus the
small set of numerical primitives the operators are built from:

* the Gamma function (with explicit pole errors),
* Grunwald–Letnikov binomial weights,
* product-trapezoidal weights for the one-sided integral with kernel
  ``(x - y)**(alpha - 1)``, exact on piecewise-linear data,
* a discrete Fourier layer with the convention
  ``uhat(xi) = integral u(x) exp(-i xi x) dx``.

Values that are not defined at a node (for example the base node of the
kernel ``(x - a)**(alpha - 1)``) are stored as non-finite entries; the
non-finite value itself is the singular marker and every consumer treats
it that way.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gamma as _scipy_gamma

__all__ = [
    "Side",
    "Grid",
    "SampledFunction",
    "LineFunction",
    "FracOrder",
    "uniform_grid",
    "line_grid",
    "gamma_fn",
    "gl_weights",
    "singular_quadrature_weights",
    "product_kernels",
    "discrete_fourier",
    "inverse_discrete_fourier",
    "trapezoid",
    "spectral_multiplier",
]


class Side(enum.Enum):
    """Orientation of a one-sided operator.

    LEFT means the operator integrates from the left endpoint ``a``
    (its kernel is singular at ``a``); RIGHT integrates from ``b``.
    """

    LEFT = "left"
    RIGHT = "right"

    @classmethod
    def parse(cls, text: str | Side) -> Side:
        if isinstance(text, Side):
            return text
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"side must be 'left' or 'right', got {text!r}") from None


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` cells on ``[a, b]``, nodes ``a + j h``.

    .. attribute:: h

        Cell width ``(b - a) / n``.
    """

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValueError(f"empty interval: a={self.a}, b={self.b}")
        if self.n < 1:
            raise ValueError(f"need at least one cell, got n={self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n + 1)

    @property
    def width(self) -> float:
        return self.b - self.a

    def refine(self, factor: int = 2) -> Grid:
        """Same interval with ``factor`` times as many cells."""
        return Grid(self.a, self.b, self.n * factor)

    def reflected(self) -> Grid:
        """The grid is symmetric under x -> a + b - x; reflection is itself."""
        return self


def uniform_grid(a: float, b: float, n: int) -> Grid:
    """Build the uniform grid with ``n`` cells on ``[a, b]``."""
    return Grid(float(a), float(b), int(n))


def line_grid(half_width: float, n: int) -> Grid:
    """Grid over ``[-L, L]`` used to truncate the real line."""
    if half_width <= 0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    return Grid(-float(half_width), float(half_width), int(n))


@dataclass(frozen=True)
class SampledFunction:
    """Nodal samples on a :class:`Grid`, read as the piecewise-linear interpolant.

    ``values`` has length ``grid.n + 1``.  A non-finite entry marks a node
    where the function is singular/undefined (norms and quadratures either
    skip it or, when the leading behaviour near the base endpoint is known,
    use ``left_power`` / ``right_power``: a pair ``(coeff, exponent)``
    meaning ``u(x) ~ coeff * (x - a)**exponent`` near ``a`` (respectively
    ``coeff * (b - x)**exponent`` near ``b``).
    """

    grid: Grid
    values: np.ndarray
    left_power: tuple[float, float] | None = None
    right_power: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.n + 1,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid with {self.grid.n + 1} nodes"
            )

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def reflected(self) -> SampledFunction:
        """Samples of x -> u(a + b - x) on the same grid."""
        return SampledFunction(
            self.grid,
            self.values[::-1].copy(),
            left_power=self.right_power,
            right_power=self.left_power,
        )

    def interp(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the piecewise-linear interpolant (zero outside [a, b])."""
        return np.interp(x, self.x, self.values, left=0.0, right=0.0)

    def with_values(self, values: np.ndarray) -> SampledFunction:
        return replace(self, values=np.asarray(values, dtype=float))


@dataclass(frozen=True)
class LineFunction:
    """Samples over ``[-L, L]`` standing in for a function on the real line.

    The layout matches :class:`SampledFunction` (``n + 1`` nodes including
    both endpoints).  Fourier-side operators use the ``n`` periodic samples
    (the node at ``+L`` is dropped), which is lossless once the function has
    decayed at the ends; ``decay_checked`` records that the decay test ran.
    """

    half_width: float
    values: np.ndarray
    decay_checked: bool = False

    def __post_init__(self) -> None:
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 3:
            raise ValueError("values must be a 1-d array with at least 3 nodes")

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def grid(self) -> Grid:
        return line_grid(self.half_width, self.n)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def check_decay(self, rel_tol: float = 1e-8) -> LineFunction:
        """Verify the samples have decayed at both ends of the window.

        Emits a warning (and leaves ``decay_checked`` False) when the
        endpoint values exceed ``rel_tol`` times the max magnitude, since
        Fourier-side operators then see an artificial periodic jump.
        """
        scale = float(np.max(np.abs(self.values))) or 1.0
        edge = max(abs(float(self.values[0])), abs(float(self.values[-1])))
        if edge > rel_tol * scale:
            warnings.warn(
                f"function has not decayed at +-L: edge/max = {edge / scale:.3e}",
                stacklevel=2,
            )
            return self
        return replace(self, decay_checked=True)

    def samples(self) -> np.ndarray:
        """The ``n`` periodic samples used by the Fourier layer."""
        return self.values[:-1]

    def interp(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.x, self.values, left=0.0, right=0.0)

    def with_values(self, values: np.ndarray) -> LineFunction:
        return replace(self, values=np.asarray(values, dtype=float), decay_checked=False)

    def as_sampled(self) -> SampledFunction:
        return SampledFunction(self.grid, self.values)


@dataclass(frozen=True)
class FracOrder:
    """Fractional order ``alpha = m + sigma`` with integer part ``m`` and
    fractional part ``sigma`` in ``(0, 1]``."""

    alpha: float
    m: int = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"order must be positive, got {self.alpha}")
        m = int(math.ceil(self.alpha)) - 1
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma", self.alpha - m)


def gamma_fn(x):
    """Gamma function, with explicit errors at the poles.

    Accurate to better than 1e-12 relative on ``(0, 50]`` and defined for
    negative non-integer arguments by reflection.  Raises ``ValueError`` at
    zero and the negative integers instead of returning a non-finite value,
    so callers that hit a pole must handle it deliberately (the operator
    layer encodes ``1/Gamma(pole) = 0`` explicitly where annihilation is
    the intended meaning).
    """
    arr = np.asarray(x, dtype=float)
    at_pole = (arr <= 0) & (arr == np.floor(arr))
    if np.any(at_pole):
        bad = arr[at_pole].flat[0] if arr.ndim else float(arr)
        raise ValueError(f"gamma pole at non-positive integer argument {bad}")
    out = _scipy_gamma(arr)
    if arr.ndim == 0:
        return float(out)
    return out


def gl_weights(alpha: float, count: int) -> np.ndarray:
    """First ``count + 1`` Grunwald–Letnikov weights for order ``alpha``.

    ``w_0 = 1`` and ``w_k = w_{k-1} (k - 1 - alpha) / k``, i.e. the signed
    binomial coefficients ``(-1)^k C(alpha, k)``.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    w = np.empty(count + 1)
    w[0] = 1.0
    for k in range(1, count + 1):
        w[k] = w[k - 1] * (k - 1 - alpha) / k
    return w


def product_kernels(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Convolution kernels behind the product-trapezoidal integral.

    For the piecewise-linear interpolant, the one-sided integral of order
    ``alpha`` at node ``j`` is

        I_j = h**alpha / Gamma(alpha) * (sum_m fL(m) u[j-m] + fR(m) u[j-m+1])

    over cells ``m = 1..j``.  Returns ``(fL, fR)`` for ``m = 1..n`` where

        fL(m) = P(m) - (m - 1) Q(m),   fR(m) = m Q(m) - P(m),
        P(m) = (m**(a+1) - (m-1)**(a+1)) / (a+1),
        Q(m) = (m**a - (m-1)**a) / a.

    At ``alpha = 1`` these collapse to the composite trapezoid rule.
    """
    m = np.arange(1, n + 1, dtype=float)
    pa = np.power(m, alpha + 1.0) - np.power(m - 1.0, alpha + 1.0)
    qa = np.power(m, alpha) - np.power(m - 1.0, alpha)
    p = pa / (alpha + 1.0)
    q = qa / alpha
    f_left = p - (m - 1.0) * q
    f_right = m * q - p
    return f_left, f_right


def singular_quadrature_weights(alpha: float, grid: Grid, j: int) -> np.ndarray:
    """Nodal weights ``W`` with ``I^alpha u(x_j) = W . u[0:j+1]``.

    Product-trapezoidal rule for the kernel ``(x_j - y)**(alpha - 1) /
    Gamma(alpha)``: the integrand's singular factor is integrated exactly
    against the piecewise-linear interpolant, so the rule is exact whenever
    ``u`` is piecewise linear on the grid.
    """
    if not 0 < alpha:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not 0 <= j <= grid.n:
        raise ValueError(f"node index {j} outside 0..{grid.n}")
    w = np.zeros(j + 1)
    if j == 0:
        return w
    f_left, f_right = product_kernels(alpha, j)
    # cell m has left node j-m and right node j-m+1
    w[j - np.arange(1, j + 1)] += f_left
    w[j - np.arange(1, j + 1) + 1] += f_right
    w *= grid.h**alpha / gamma_fn(alpha)
    return w


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def discrete_fourier(values: np.ndarray, half_width: float) -> tuple[np.ndarray, np.ndarray]:
    """Approximate ``uhat(xi) = integral u(x) exp(-i xi x) dx`` on ``[-L, L]``.

    ``values`` are the ``n`` periodic samples at ``x_j = -L + j (2L/n)``;
    ``n`` must be a power of two (shorter inputs are zero-padded up to one,
    which refines the frequency grid but represents the same function).
    Returns ``(xi, uhat)`` with ``xi = pi k / L`` on the standard FFT
    layout.  The rule is the n-point rectangle rule, which is what makes
    the discrete Parseval identity exact.
    """
    u = np.asarray(values, dtype=complex)
    if u.ndim != 1:
        raise ValueError("values must be a 1-d array")
    n = u.size
    if not _is_power_of_two(n):
        padded = 1 << (n - 1).bit_length()
        u = np.concatenate([u, np.zeros(padded - n, dtype=complex)])
        n = padded
    dx = 2.0 * half_width / n
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    phase = np.exp(-1j * xi * (-half_width))
    uhat = dx * phase * np.fft.fft(u)
    return xi, uhat


def inverse_discrete_fourier(uhat: np.ndarray, half_width: float) -> np.ndarray:
    """Invert :func:`discrete_fourier`; round-trips to ~1e-15."""
    spec = np.asarray(uhat, dtype=complex)
    n = spec.size
    if not _is_power_of_two(n):
        raise ValueError("spectrum length must be a power of two")
    dx = 2.0 * half_width / n
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    phase = np.exp(1j * xi * (-half_width))
    return np.fft.ifft(spec * phase / dx)


def trapezoid(values: np.ndarray, h: float) -> float:
    """Composite trapezoid rule on equispaced nodal values."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    return float(h * (np.sum(v) - 0.5 * (v[0] + v[-1])))


def spectral_multiplier(xi: np.ndarray, alpha: float, side: Side | str = Side.LEFT) -> np.ndarray:
    """Principal-branch symbol ``(+-i xi)^alpha`` of the one-sided derivative.

    Left derivative has symbol ``(i xi)^alpha = |xi|^alpha
    exp(i pi alpha sgn(xi) / 2)``; right is the complex conjugate.  The
    value at ``xi = 0`` is 0 for any positive order.
    """
    side = Side.parse(side)
    sign = 1.0 if side is Side.LEFT else -1.0
    mag = np.abs(xi) ** alpha
    return mag * np.exp(1j * sign * 0.5 * np.pi * alpha * np.sign(xi))
