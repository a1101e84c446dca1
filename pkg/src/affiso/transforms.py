"""The invariance-preserving transform family on circle functions.

``transform`` implements (T_{lam,q} u)(theta) = u(q + m_lam(theta-q)) *
psi_lam(theta-q), where psi_lam is the centered-ellipse profile and m_lam the
reparametrization with density psi_lam^-2.  The family preserves the polar
mass, the pairing integral, and the Dirichlet-type quadratic form, and scales
first moments of u^-3 by 1/lam and lam; ``check_invariances`` measures all
five residuals by quadrature on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .circle_fn import (
    CircleFunction,
    EllipseParams,
    Grid,
    derivative,
    ellipse_support,
    make_grid,
)

LAMBDA_MIN = 1e-6
LAMBDA_MAX = 1e6

_BISECT_MAX_ITER = 200
_BALANCE_TOL = 1e-12
_FINE_GRID_CAP = 2**18
_MIN_POSITIVE = 1e-8


@dataclass(frozen=True)
class TransformParams:
    """Transform parameters: concentration ``lam`` (clamped to the working
    range) and the center angle ``center`` in radians."""

    lam: float
    center: float = 0.0

    def __post_init__(self):
        lam = float(self.lam)
        if not np.isfinite(lam) or lam <= 0:
            raise ValueError(f"lambda must be a positive real, got {self.lam}")
        object.__setattr__(self, "lam", float(np.clip(lam, LAMBDA_MIN, LAMBDA_MAX)))
        object.__setattr__(self, "center", float(self.center))

    @property
    def clamped(self) -> bool:
        return self.lam in (LAMBDA_MIN, LAMBDA_MAX)


def psi(lam: float, theta) -> Union[float, np.ndarray]:
    """psi_lam(theta) = sqrt(lam^2 cos^2 theta + lam^-2 sin^2 theta)."""
    lam = float(lam)
    t = np.asarray(theta, dtype=np.float64)
    out = np.sqrt(lam**2 * np.cos(t) ** 2 + np.sin(t) ** 2 / lam**2)
    return float(out) if out.ndim == 0 else out


def _psi_prime(lam: float, t: np.ndarray) -> np.ndarray:
    return (1.0 / lam**2 - lam**2) * np.sin(t) * np.cos(t) / psi(lam, t)


def psi_function(lam: float, grid: Grid | None = None) -> CircleFunction:
    """psi_lam as a CircleFunction (coefficients accurate mode by mode)."""
    return ellipse_support(EllipseParams(a=float(lam)), grid or make_grid())


def m_map(lam: float, theta) -> Union[float, np.ndarray]:
    """The reparametrization m_lam, evaluated quadrant by quadrant.

    On each quadrant m_lam is a base angle plus arctan of a scaled tangent
    (the scale alternates between lam^-2 and lam^2), which keeps the map
    continuous, strictly increasing, and exact at the quadrant endpoints
    0, pi/2, pi, 3pi/2.
    """
    lam = float(lam)
    t = np.asarray(theta, dtype=np.float64)
    half_pi = 0.5 * np.pi
    quadrant = np.floor(t / half_pi)
    local = t - quadrant * half_pi
    factor = np.where(quadrant % 2 == 0, 1.0 / lam**2, lam**2)
    out = quadrant * half_pi + np.arctan(factor * np.tan(local))
    return float(out) if out.ndim == 0 else out


def transform(u: CircleFunction, p: TransformParams) -> CircleFunction:
    """Apply T_{lam,q}: rotate by -q, reparametrize and multiply by psi, rotate back.

    Values of ``u`` at the mapped nodes come from trigonometric interpolation,
    so band-limited inputs are handled exactly.
    """
    t = u.grid.thetas - p.center
    mapped = p.center + m_map(p.lam, t)
    vals = u.evaluate(mapped) * psi(p.lam, t)
    return CircleFunction.from_samples(u.grid, vals)


@dataclass(frozen=True)
class InvarianceRow:
    name: str
    lhs: float
    rhs: float
    scale: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    @property
    def relative(self) -> float:
        return abs(self.residual) / self.scale


@dataclass(frozen=True)
class InvarianceReport:
    """Residuals of the five invariance laws for one (u, v, params) triple."""

    params: TransformParams
    polar_mass: InvarianceRow  # int (Tu)^-2 = int u^-2
    pairing: InvarianceRow  # int Tu/(Tv)^3 = int u/v^3
    dirichlet: InvarianceRow  # J(Tu) = J(u)
    moment_cos: InvarianceRow  # int cos(.-q) (Tu)^-3 = (1/lam) int cos(.-q) u^-3
    moment_sin: InvarianceRow  # int sin(.-q) (Tu)^-3 = lam int sin(.-q) u^-3

    @property
    def rows(self) -> tuple[InvarianceRow, ...]:
        return (self.polar_mass, self.pairing, self.dirichlet, self.moment_cos, self.moment_sin)

    def max_relative(self) -> float:
        return max(row.relative for row in self.rows)


def _fine_size(M: int, lam: float) -> int:
    """Quadrature size resolving the transformed integrands.

    The transformed side concentrates on a scale min(lam, 1/lam)^2; the
    trapezoid rule needs roughly 45 / strip-width nodes to push its error
    below 1e-13.  Native resolution is kept whenever it suffices.
    """
    r = max(lam, 1.0 / lam)
    if r <= 1.0 + 1e-12:
        return M
    d = float(np.arctanh(min(1.0 - 1e-12, 1.0 / r**2)))
    size = M
    while size * d < 45.0 and size < _FINE_GRID_CAP:
        size *= 2
    return size


def _j_form_samples(grid_mean, sq_vals, sq_deriv) -> float:
    return float(grid_mean * np.mean(sq_vals - sq_deriv))


def check_invariances(
    u: CircleFunction, v: CircleFunction, p: TransformParams
) -> InvarianceReport:
    """Quadrature residuals (transformed minus reference) of the five laws.

    Both sides are computed independently: the reference side on the native
    grid, the transformed side from the exact transform formula on a grid
    fine enough for the concentration at ``p.lam``.
    """
    if u.grid.size != v.grid.size:
        raise ValueError("grid mismatch between u and v")
    if not u.positive or not v.positive:
        raise ValueError("invariance checks need strictly positive u and v")
    M = u.grid.size
    lam, q = p.lam, p.center
    thetas = u.grid.thetas

    # reference side
    uv = u.values
    vv = v.values
    cos_q = np.cos(thetas - q)
    sin_q = np.sin(thetas - q)
    two_pi = 2.0 * np.pi
    r_polar = two_pi * np.mean(uv**-2.0)
    r_pair = two_pi * np.mean(uv * vv**-3.0)
    du = derivative(u, 1)
    r_dirichlet = two_pi * np.mean(uv**2 - du.values**2)
    mass_u3 = two_pi * np.mean(uv**-3.0)
    r_mcos = two_pi * np.mean(cos_q * uv**-3.0) / lam
    r_msin = two_pi * np.mean(sin_q * uv**-3.0) * lam

    # transformed side, refined when the images concentrate
    Mf = _fine_size(M, lam)
    tf = two_pi * np.arange(Mf) / Mf
    t = tf - q
    mapped = q + m_map(lam, t)
    ps = psi(lam, t)
    u_m = u.evaluate(mapped)
    v_m = v.evaluate(mapped)
    Tu = u_m * ps
    Tv = v_m * ps
    # (Tu)' = u'(m)/psi + u(m) psi'
    Tu_prime = du.evaluate(mapped) / ps + u_m * _psi_prime(lam, t)
    l_polar = two_pi * np.mean(Tu**-2.0)
    l_pair = two_pi * np.mean(Tu * Tv**-3.0)
    l_dirichlet = two_pi * np.mean(Tu**2 - Tu_prime**2)
    l_mcos = two_pi * np.mean(np.cos(t) * Tu**-3.0)
    l_msin = two_pi * np.mean(np.sin(t) * Tu**-3.0)

    h1_sq = two_pi * np.mean(uv**2 + du.values**2)
    return InvarianceReport(
        params=p,
        polar_mass=InvarianceRow("polar_mass", l_polar, r_polar, abs(r_polar)),
        pairing=InvarianceRow("pairing", l_pair, r_pair, abs(r_pair)),
        dirichlet=InvarianceRow("dirichlet", l_dirichlet, r_dirichlet, h1_sq),
        moment_cos=InvarianceRow("moment_cos", l_mcos, r_mcos, mass_u3 / lam),
        moment_sin=InvarianceRow("moment_sin", l_msin, r_msin, mass_u3 * lam),
    )


class _InverseSquareCumulative:
    """Spectrally accurate cumulative integral W(x) = int_0^x u^-2."""

    def __init__(self, u: CircleFunction):
        if u.min() <= _MIN_POSITIVE:
            raise ValueError(
                f"u^-2 is numerically non-integrable: min(u) = {u.min():.3e} <= {_MIN_POSITIVE}"
            )
        w = u**-2.0
        M = u.grid.size
        k = np.arange(M // 2 + 1, dtype=np.float64)
        anti = np.zeros_like(w.coeffs)
        anti[1:-1] = w.coeffs[1:-1] / (1j * k[1:-1])
        # Nyquist antiderivative would be a sine mode; its coefficient is at
        # round-off level for positive smooth u and is dropped
        self.mean = float(w.coeffs[0].real) / M
        self.osc = CircleFunction.from_coeffs(u.grid, anti)
        self.osc0 = self.osc.evaluate(0.0)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.mean * x + self.osc.evaluate(x) - self.osc0

    def total(self) -> float:
        return self.mean * 2.0 * np.pi


def balance_point(u: CircleFunction, near: float) -> float:
    """Find p with equal u^-2 mass on [p - pi/2, p] and [p, p + pi/2].

    Bisection on the smooth periodic difference of the two half-window
    masses; among the sign changes the one closest to ``near`` is taken, and
    a flat difference (constant u, say) resolves to ``near`` itself.
    """
    W = _InverseSquareCumulative(u)
    scale = W.total()

    def gap(pv):
        pv = np.asarray(pv, dtype=np.float64)
        return (W(pv) - W(pv - 0.5 * np.pi)) - (W(pv + 0.5 * np.pi) - W(pv))

    near = float(near)
    M = u.grid.size
    probes = near + np.linspace(-np.pi, np.pi, M, endpoint=False)
    g = gap(probes)
    if np.max(np.abs(g)) <= _BALANCE_TOL * scale:
        return near
    sign_change = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
    if sign_change.size == 0:
        # root sits at a tangency; fall back to the smallest |gap|
        return float(probes[int(np.argmin(np.abs(g)))])
    mids = 0.5 * (probes[sign_change] + probes[sign_change + 1])
    idx = int(sign_change[np.argmin(np.abs(mids - near))])
    lo, hi = probes[idx], probes[idx + 1]
    glo = g[idx]
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        gm = float(gap(mid))
        if abs(gm) <= _BALANCE_TOL * scale:
            return float(np.mod(mid, 2.0 * np.pi))
        if np.sign(gm) == np.sign(glo):
            lo = mid
        else:
            hi = mid
    return float(np.mod(0.5 * (lo + hi), 2.0 * np.pi))


def balance_lambda(u: CircleFunction, p: float, delta: float = np.pi / 4) -> TransformParams:
    """Choose lam so T_{lam,p} u splits its polar mass evenly between the
    core window B_delta(p) and the flanks of the half-period around p.

    The transformed masses reduce, through the change of variables built into
    the map, to masses of u^-2 itself over windows with endpoint m_lam(delta),
    so the search needs no discrete transforms: it bisects the monotone
    balance gap in log-lambda.  A gap that cannot be closed inside the
    working range returns the clamped boundary parameters.
    """
    delta = float(delta)
    if not 0.0 < delta < 0.5 * np.pi:
        raise ValueError(f"delta must lie in (0, pi/2), got {delta}")
    p = float(p)
    W = _InverseSquareCumulative(u)
    half = W(p + 0.5 * np.pi) - W(p - 0.5 * np.pi)

    def gap(lam):
        x = m_map(lam, delta)
        core = W(p + x) - W(p - x)
        return 2.0 * core - half

    lo, hi = LAMBDA_MIN, LAMBDA_MAX
    glo, ghi = gap(lo), gap(hi)
    if np.sign(glo) == np.sign(ghi):
        boundary = lo if abs(glo) < abs(ghi) else hi
        return TransformParams(boundary, center=p)
    for _ in range(_BISECT_MAX_ITER):
        mid = float(np.exp(0.5 * (np.log(lo) + np.log(hi))))
        gm = gap(mid)
        if abs(gm) <= _BALANCE_TOL * half:
            return TransformParams(mid, center=p)
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    return TransformParams(float(np.exp(0.5 * (np.log(lo) + np.log(hi)))), center=p)
