"""2pi-periodic functions on the circle, carried as synchronized sample/Fourier pairs.

A :class:`CircleFunction` stores uniform grid samples together with the rfft
coefficients of their trigonometric interpolant.  Differentiation and
evaluation at off-grid points happen in coefficient space, so identities that
hold for trigonometric polynomials hold here to round-off.

The canonical generators (``ellipse_support``, ``ellipse_density``) evaluate
their closed forms in extended precision and round the *coefficients* to
float64.  This keeps every Fourier mode accurate relative to its own size,
which matters because second derivatives amplify mode ``k`` by ``k**2``:
building the same functions from float64 samples leaves an error floor near
1e-9 at the default grid, while the coefficient route stays below 1e-11.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence, Union

import numpy as np
import scipy.fft
from scipy.spatial import ConvexHull
from scipy.spatial import QhullError

DEFAULT_GRID_SIZE = 2048

_EVAL_BLOCK = 2048  # points per block when evaluating the trig series

_COEFF_FLOOR = 32.0 * np.finfo(np.float64).eps  # relative spectral noise floor


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``size`` nodes theta_j = 2*pi*j/size on [0, 2*pi)."""

    size: int

    @cached_property
    def thetas(self) -> np.ndarray:
        return _frozen(2.0 * np.pi * np.arange(self.size) / self.size)

    @cached_property
    def thetas_ld(self) -> np.ndarray:
        """Nodes in extended precision, for closed-form generators."""
        two_pi = 2.0 * np.pi * np.ones(1, dtype=np.longdouble)[0]
        return _frozen(two_pi * np.arange(self.size, dtype=np.longdouble) / self.size)

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.size

    def integrate_samples(self, samples: np.ndarray) -> float:
        """Periodic trapezoid rule, exact for trig polynomials of degree < size."""
        return float(2.0 * np.pi * np.mean(samples))


def make_grid(size: int = DEFAULT_GRID_SIZE) -> Grid:
    """Build a uniform circle grid.

    ``size`` must be even (so the Nyquist mode is unambiguous under
    differentiation) and at least 16.
    """
    size = int(size)
    if size % 2 != 0:
        raise ValueError(f"grid size must be even, got {size}")
    if size < 16:
        raise ValueError(f"grid size must be >= 16, got {size}")
    return Grid(size)


@dataclass(frozen=True)
class CircleFunction:
    """A real 2pi-periodic function: samples plus rfft coefficients.

    ``coeffs[k]`` follows the numpy rfft convention; the function is the
    degree-``size/2`` trigonometric interpolant

        f(x) = ( c[0] + 2*sum_{k=1}^{M/2-1} Re(c[k] e^{ikx}) + Re(c[M/2]) cos(Mx/2) ) / M.

    The imaginary parts of ``c[0]`` and ``c[M/2]`` (the Nyquist sine mode) are
    forced to zero at construction, so the interpolant is real and symmetric
    under grid reflection.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_samples(cls, grid: Grid, values: np.ndarray) -> "CircleFunction":
        v = np.asarray(values, dtype=np.float64)
        if v.shape != (grid.size,):
            raise ValueError(f"expected {grid.size} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("samples must be finite")
        c = scipy.fft.rfft(v)
        c[0] = c[0].real
        c[-1] = c[-1].real
        # Coefficients below the rounding noise of the samples carry no
        # information and would be k^2-amplified by differentiation; zero
        # them.  (Explicitly given coefficients, via from_coeffs, are
        # trusted as stated and never floored.)
        floor = _COEFF_FLOOR * np.max(np.abs(c))
        c[np.abs(c) < floor] = 0.0
        # resync so values and coeffs describe exactly the same interpolant
        v = scipy.fft.irfft(c, n=grid.size)
        return cls(grid, _frozen(v), _frozen(c))

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs: np.ndarray) -> "CircleFunction":
        c = np.asarray(coeffs, dtype=np.complex128).copy()
        if c.shape != (grid.size // 2 + 1,):
            raise ValueError(
                f"expected {grid.size // 2 + 1} rfft coefficients, got shape {c.shape}"
            )
        c[0] = c[0].real
        c[-1] = c[-1].real
        v = scipy.fft.irfft(c, n=grid.size)
        return cls(grid, _frozen(v), _frozen(c))

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "CircleFunction":
        return cls.from_samples(grid, fn(grid.thetas))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "CircleFunction":
        return cls.from_samples(grid, np.full(grid.size, float(value)))

    # -- basic queries ------------------------------------------------

    @property
    def positive(self) -> bool:
        return bool(self.values.min() > 0.0)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def evaluate(self, theta) -> Union[float, np.ndarray]:
        """Evaluate the trigonometric interpolant at arbitrary angles."""
        x = np.asarray(theta, dtype=np.float64)
        scalar = x.ndim == 0
        flat = np.atleast_1d(x).ravel()
        M = self.grid.size
        w = np.full(self.coeffs.size, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        wc = w * self.coeffs / M
        active = np.flatnonzero(wc != 0)
        out = np.zeros(flat.size)
        if active.size:
            k_act = active.astype(np.float64)
            wc_act = wc[active]
            for start in range(0, flat.size, _EVAL_BLOCK):
                blk = flat[start : start + _EVAL_BLOCK]
                phases = np.exp(1j * np.outer(blk, k_act))
                out[start : start + _EVAL_BLOCK] = (phases @ wc_act).real
        if scalar:
            return float(out[0])
        return out.reshape(np.atleast_1d(x).shape)

    def derivative(self, order: int = 1) -> "CircleFunction":
        return derivative(self, order)

    # -- pointwise arithmetic ------------------------------------------

    def _combined(self, other, op) -> "CircleFunction":
        if isinstance(other, CircleFunction):
            if other.grid.size != self.grid.size:
                raise ValueError("grid mismatch between circle functions")
            return CircleFunction.from_samples(self.grid, op(self.values, other.values))
        return CircleFunction.from_samples(self.grid, op(self.values, float(other)))

    def __add__(self, other):
        return self._combined(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combined(other, np.subtract)

    def __rsub__(self, other):
        return CircleFunction.from_samples(self.grid, float(other) - self.values)

    def __mul__(self, other):
        return self._combined(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combined(other, np.divide)

    def __rtruediv__(self, other):
        return CircleFunction.from_samples(self.grid, float(other) / self.values)

    def __neg__(self):
        return CircleFunction.from_samples(self.grid, -self.values)

    def __pow__(self, exponent):
        p = float(exponent)
        if not p.is_integer() and self.values.min() <= 0.0:
            raise ValueError("fractional power of a non-positive function")
        return CircleFunction.from_samples(self.grid, self.values**p)


def _from_longdouble_samples(grid: Grid, values_ld: np.ndarray) -> CircleFunction:
    """Construct from extended-precision samples, rounding the coefficients."""
    c = scipy.fft.rfft(np.asarray(values_ld, dtype=np.longdouble))
    return CircleFunction.from_coeffs(grid, c.astype(np.complex128))


# -- calculus ----------------------------------------------------------


def derivative(f: CircleFunction, order: int) -> CircleFunction:
    """Exact derivative of the trigonometric interpolant of ``f``.

    For odd orders the Nyquist mode is zeroed (its sine image is not
    representable on the grid).
    """
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    k = np.arange(f.grid.size // 2 + 1, dtype=np.float64)
    if order == 1:
        c = f.coeffs * (1j * k)
        c[-1] = 0.0
    else:
        c = f.coeffs * -(k**2)
    return CircleFunction.from_coeffs(f.grid, c)


def integrate(f: CircleFunction) -> float:
    """Integral over [0, 2*pi]; spectrally accurate for smooth functions."""
    return f.grid.integrate_samples(f.values)


def convexity_margin(h: CircleFunction) -> float:
    """Minimum of h'' + h over the grid.

    Nonnegative (up to tolerance) exactly when ``h`` is the support function
    of a convex body.  Only meaningful for smooth ``h``; polygonal bodies
    carry their curvature as atoms and are handled by the measures module.
    """
    return float((derivative(h, 2).values + h.values).min())


# -- bodies -------------------------------------------------------------


@dataclass(frozen=True)
class EllipseParams:
    """Centered-ellipse parameters (axis ratio ``a``, rotation ``alpha``,
    scale ``k``) plus an optional translation used by the body constructors."""

    a: float
    alpha: float = 0.0
    k: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"axis parameter a must be positive, got {self.a}")
        if not self.k > 0:
            raise ValueError(f"scale k must be positive, got {self.k}")


def _ellipse_radicand_ld(p: EllipseParams, thetas_ld: np.ndarray) -> np.ndarray:
    a = np.longdouble(p.a)
    t = thetas_ld - np.longdouble(p.alpha)
    return a**2 * np.cos(t) ** 2 + np.sin(t) ** 2 / a**2


def ellipse_support(p: EllipseParams, grid: Grid | None = None) -> CircleFunction:
    """Support function of an ellipse:

        h(theta) = k*sqrt(a^2 cos^2(theta-alpha) + a^-2 sin^2(theta-alpha))
                   + c1*cos(theta) + c2*sin(theta)
    """
    grid = grid or make_grid()
    t = grid.thetas_ld
    h = np.longdouble(p.k) * np.sqrt(_ellipse_radicand_ld(p, t))
    h = h + np.longdouble(p.center[0]) * np.cos(t) + np.longdouble(p.center[1]) * np.sin(t)
    return _from_longdouble_samples(grid, h)


def ellipse_density(p: EllipseParams, grid: Grid | None = None) -> CircleFunction:
    """Centered-ellipse curvature density

        F(theta) = k*(a^2 cos^2(theta-alpha) + a^-2 sin^2(theta-alpha))^(-3/2),

    which integrates cos and sin to zero.  The translation in ``p`` is ignored.
    """
    grid = grid or make_grid()
    F = np.longdouble(p.k) * _ellipse_radicand_ld(p, grid.thetas_ld) ** np.longdouble(-1.5)
    return _from_longdouble_samples(grid, F)


@dataclass(frozen=True)
class PolygonBody:
    """A convex polygon, stored as the CCW hull of the given vertices."""

    vertices: np.ndarray = field(repr=False)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "PolygonBody":
        pts = np.asarray(list(points), dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValueError("polygon needs at least 3 planar points")
        try:
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise ValueError(f"degenerate polygon (collinear points?): {exc}") from exc
        return cls(_frozen(pts[hull.vertices]))  # scipy returns CCW order in 2D

    def support_at(self, theta) -> np.ndarray:
        """Exact support values max_i v_i . e(theta)."""
        t = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        dots = np.outer(np.cos(t), self.vertices[:, 0]) + np.outer(
            np.sin(t), self.vertices[:, 1]
        )
        return dots.max(axis=1)

    def support(self, grid: Grid | None = None) -> CircleFunction:
        grid = grid or make_grid()
        return CircleFunction.from_samples(grid, self.support_at(grid.thetas))

    def edge_atoms(self) -> list[tuple[float, float]]:
        """(outward normal angle, edge length) for each hull edge.

        These are the atoms of h'' + h: the support derivative jumps by the
        edge length at the edge's normal direction.
        """
        v = self.vertices
        out = []
        for i in range(len(v)):
            e = v[(i + 1) % len(v)] - v[i]
            length = float(np.hypot(e[0], e[1]))
            normal = float(np.mod(np.arctan2(e[1], e[0]) - np.pi / 2.0, 2.0 * np.pi))
            out.append((normal, length))
        return out

    def perimeter(self) -> float:
        return sum(length for _, length in self.edge_atoms())


def polygon_support(vertices: Iterable[Sequence[float]], grid: Grid | None = None) -> CircleFunction:
    """Support function of the convex hull of ``vertices``, sampled on the grid."""
    return PolygonBody.from_points(vertices).support(grid)


def random_smooth_body(
    seed: int,
    decay: float = 2.5,
    modes: int = 10,
    grid: Grid | None = None,
) -> CircleFunction:
    """Deterministic random support function

        h = 1 + s * sum_{k=2}^{modes} k^-decay (xi_k cos k theta + eta_k sin k theta)

    with standard-normal xi, eta drawn from ``seed`` and ``s <= 1`` chosen so
    the convexity margin stays >= 0.1.  With ``modes < 2`` the unit circle is
    returned.
    """
    grid = grid or make_grid()
    M = grid.size
    if modes >= M // 2:
        raise ValueError(f"modes must be below the Nyquist frequency {M // 2}")
    c = np.zeros(M // 2 + 1, dtype=np.complex128)
    c[0] = M  # constant 1
    if modes < 2:
        return CircleFunction.from_coeffs(grid, c)
    rng = np.random.default_rng(seed)
    for k in range(2, modes + 1):
        xi, eta = rng.standard_normal(2)
        # a_k = 2 Re c_k / M, b_k = -2 Im c_k / M
        c[k] = (xi - 1j * eta) * k ** (-float(decay)) * (M / 2.0)
    pert = c.copy()
    pert[0] = 0.0
    q = CircleFunction.from_coeffs(grid, pert)
    curvature = derivative(q, 2).values + q.values
    worst = curvature.min()
    # the 1e-9 headroom keeps the recomputed margin >= 0.1 despite round-off
    scale = 1.0 if worst >= 0.0 else min(1.0, 0.9 * (1.0 - 1e-9) / -worst)
    c[2:] *= scale
    return CircleFunction.from_coeffs(grid, c)
