"""Inequality verification and the maximizing-sequence demonstration.

Every check returns an :class:`InequalityReport` oriented so ``deficit >= 0``
means the inequality holds.  Equality detection is two-stage: the relative
deficit must fall below ``eq_tol`` *and* a closed-form ellipse fit must
confirm the structural equality case, so near-degenerate bodies cannot raise
a false flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .circle_fn import (
    CircleFunction,
    EllipseParams,
    PolygonBody,
    convexity_margin,
    derivative,
    integrate,
    random_smooth_body,
)
from .functionals import (
    CONVEXITY_TOL,
    affine_perimeter,
    area,
    functional_I,
    j_form,
    pairing,
)
from .positioning import position
from .transforms import TransformParams, balance_lambda, balance_point, psi_function, transform

EQ_TOL = 1e-6
_FIT_TOL = 1e-6
_ORTHO_TOL = 1e-8
_MIN_POSITIVE = 1e-8

Body = Union[CircleFunction, PolygonBody]


@dataclass(frozen=True)
class InequalityReport:
    name: str  # AI | BS | MIXED | MAIN
    lhs: float
    rhs: float
    deficit: float
    relative_deficit: float
    equality: bool
    fitted_ellipse: EllipseParams | None = None

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs), 1e-300)

    def holds(self, tol: float = 1e-8) -> bool:
        return self.deficit >= -tol * self.scale


def _report(name, lhs, rhs, eq_tol, fit) -> InequalityReport:
    """Assemble a report; ``fit`` is called only when the deficit is small."""
    deficit = lhs - rhs
    scale = max(abs(lhs), abs(rhs), 1e-300)
    relative = deficit / scale
    fitted = None
    equality = False
    if abs(relative) < eq_tol:
        fitted = fit()
        equality = fitted is not None
    return InequalityReport(name, lhs, rhs, deficit, relative, equality, fitted)


# -- ellipse fitting ----------------------------------------------------


def fit_centered_ellipse(h: CircleFunction) -> tuple[EllipseParams | None, float]:
    """Fit h ~ k*sqrt(a^2 cos^2(.-alpha) + a^-2 sin^2(.-alpha)) in closed form.

    h^2 of a centered ellipse is S + R cos 2(theta - alpha); the fit reads
    (S, R, alpha) off the harmonic-2 content of h^2 and returns the sup-norm
    relative misfit.  Normalized so a >= 1 and alpha in [0, pi).
    """
    sq = h * h
    M = h.grid.size
    c = sq.coeffs
    S = c[0].real / M
    z2 = 2.0 * c[2] / M  # a_2 - i b_2
    R = float(np.abs(z2))
    alpha = 0.5 * float(np.arctan2(-z2.imag, z2.real))
    if S <= 0.0 or S - R <= 0.0:
        return None, np.inf
    k = float((S**2 - R**2) ** 0.25)
    a = float(((S + R) / (S - R)) ** 0.25)
    if alpha < 0.0:
        alpha += np.pi
    radicand = S + R * np.cos(2.0 * (h.grid.thetas - alpha))
    if radicand.min() <= 0.0:
        return EllipseParams(a=a, alpha=alpha, k=k), np.inf
    resid = float(np.max(np.abs(h.values - np.sqrt(radicand))) / np.max(np.abs(h.values)))
    return EllipseParams(a=a, alpha=alpha, k=k), resid


def _drop_first_harmonic(h: CircleFunction) -> tuple[CircleFunction, tuple[float, float]]:
    c = h.coeffs.copy()
    M = h.grid.size
    shift = (float(2.0 * c[1].real / M), float(-2.0 * c[1].imag / M))
    c[1] = 0.0
    return CircleFunction.from_coeffs(h.grid, c), shift


def _fit_support(h: CircleFunction):
    """Ellipse fit of a support function modulo translation, or None."""
    centered, shift = _drop_first_harmonic(h)
    params, resid = fit_centered_ellipse(centered)
    if params is None or not resid < _FIT_TOL:
        return None
    return EllipseParams(a=params.a, alpha=params.alpha, k=params.k, center=shift)


def _fit_density_shape(F: CircleFunction, a: float, alpha: float) -> float:
    """Relative misfit of F against k2 * (ellipse radicand)^(-3/2), shared (a, alpha)."""
    t = F.grid.thetas - alpha
    shape = (a**2 * np.cos(t) ** 2 + np.sin(t) ** 2 / a**2) ** -1.5
    k2 = float(np.dot(F.values, shape) / np.dot(shape, shape))
    if k2 <= 0.0:
        return np.inf
    return float(np.max(np.abs(F.values - k2 * shape)) / np.max(np.abs(F.values)))


# -- inequality checks --------------------------------------------------


def check_main(
    F: CircleFunction, h: CircleFunction, eq_tol: float = EQ_TOL, ortho_tol: float = _ORTHO_TOL
) -> InequalityReport:
    """The analytic inequality: (int F h)^2 >= (1/4pi^2) (int F^(2/3))^3 J(h).

    ``F`` must be nonnegative, not identically zero, and orthogonal to both
    first harmonics; ``h`` nonnegative and not identically zero (convexity is
    not required).  Equality is reported exactly when both functions match
    the centered-ellipse pair with shared shape parameters.
    """
    if F.grid.size != h.grid.size:
        raise ValueError("grid mismatch between F and h")
    if F.min() < -1e-12 * max(1.0, F.max()):
        raise ValueError(f"density must be nonnegative, min = {F.min():.3e}")
    if F.max() <= 0.0:
        raise ValueError("density vanishes identically")
    if h.min() < -1e-12 * max(1.0, abs(h.max())):
        raise ValueError(f"support term must be nonnegative, min = {h.min():.3e}")
    if h.max() <= 0.0:
        raise ValueError("support term vanishes identically")
    mass = integrate(F)
    scale = max(1.0, mass)
    mc = F.grid.integrate_samples(F.values * np.cos(F.grid.thetas))
    ms = F.grid.integrate_samples(F.values * np.sin(F.grid.thetas))
    if abs(mc) > ortho_tol * scale:
        raise ValueError(
            f"density violates the cosine orthogonality: int F cos = {mc:.3e}"
        )
    if abs(ms) > ortho_tol * scale:
        raise ValueError(
            f"density violates the sine orthogonality: int F sin = {ms:.3e}"
        )

    lhs = pairing(F, h) ** 2
    f23 = F.grid.integrate_samples(np.cbrt(np.maximum(F.values, 0.0)) ** 2)
    rhs = f23**3 * j_form(h) / (4.0 * np.pi**2)

    def fit():
        fitted = _fit_support(h)
        if fitted is None:
            return None
        if _fit_density_shape(F, fitted.a, fitted.alpha) >= _FIT_TOL:
            return None
        return fitted

    return _report("MAIN", lhs, rhs, eq_tol, fit)


def orthogonalize_density(F: CircleFunction) -> CircleFunction:
    """Make a nonnegative density satisfy the first-moment conditions.

    Adds C - a cos - b sin with a, b the first moments over pi and
    C = sqrt(a^2 + b^2); the result is nonnegative with zero first moments.
    """
    t = F.grid.thetas
    a = F.grid.integrate_samples(F.values * np.cos(t)) / np.pi
    b = F.grid.integrate_samples(F.values * np.sin(t)) / np.pi
    C = float(np.hypot(a, b))
    return CircleFunction.from_samples(F.grid, F.values + C - a * np.cos(t) - b * np.sin(t))


def check_affine_iso(body: Body, eq_tol: float = EQ_TOL) -> InequalityReport:
    """Affine isoperimetric inequality, cubed form: 4pi^2 int h(h''+h) >= Omega^3.

    Convex input only.  Smooth bodies are positioned first (the values are
    translation invariant, but the equality fit needs the centered frame);
    polygons have Omega = 0 and exact atom pairings.
    """
    if isinstance(body, PolygonBody):
        lhs = 4.0 * np.pi**2 * 2.0 * area(body)
        return _report("AI", lhs, 0.0, eq_tol, lambda: None)
    margin = convexity_margin(body)
    if margin < -CONVEXITY_TOL:
        raise ValueError(f"input is not convex: margin {margin:.3e}")
    pos = position(body)
    hp = pos.positioned
    curv = derivative(hp, 2).values + hp.values
    lhs = 4.0 * np.pi**2 * hp.grid.integrate_samples(hp.values * curv)
    rhs = affine_perimeter(hp) ** 3

    def fit():
        fitted = _fit_support(hp)
        if fitted is None:
            return None
        return EllipseParams(
            a=fitted.a, alpha=fitted.alpha, k=fitted.k, center=(-pos.a, -pos.b)
        )

    return _report("AI", lhs, rhs, eq_tol, fit)


def check_blaschke_santalo(h: CircleFunction, eq_tol: float = EQ_TOL) -> InequalityReport:
    """Blaschke-Santalo: after positioning, 4pi^2 (int h^-2)^-1 >= int h(h''+h)."""
    margin = convexity_margin(h)
    if margin < -CONVEXITY_TOL:
        raise ValueError(f"input is not convex: margin {margin:.3e}")
    pos = position(h)
    hp = pos.positioned
    if hp.min() <= _MIN_POSITIVE:
        raise ValueError("positioned support function is not strictly positive")
    lhs = 4.0 * np.pi**2 / integrate(hp**-2.0)
    curv = derivative(hp, 2).values + hp.values
    rhs = hp.grid.integrate_samples(hp.values * curv)

    def fit():
        fitted = _fit_support(hp)
        if fitted is None:
            return None
        return EllipseParams(
            a=fitted.a, alpha=fitted.alpha, k=fitted.k, center=(-pos.a, -pos.b)
        )

    return _report("BS", lhs, rhs, eq_tol, fit)


def _angle_mod_pi_distance(x: float, y: float) -> float:
    d = np.mod(x - y, np.pi)
    return float(min(d, np.pi - d))


def check_mixed(hK: CircleFunction, hL: CircleFunction, eq_tol: float = EQ_TOL) -> InequalityReport:
    """Mixed form: 4pi^2 (int (hL''+hL) hK)^2 >= (int (hL''+hL)^(2/3))^3 J(hK).

    ``hL`` must be convex and smooth; ``hK`` only needs the quadratic form.
    Taking hK = hL reproduces the affine isoperimetric check (in relative
    deficit); equality holds for homothetic ellipses, confirmed by matching
    shape parameters (alpha compared modulo pi).
    """
    if hK.grid.size != hL.grid.size:
        raise ValueError("grid mismatch between the two bodies")
    margin = convexity_margin(hL)
    if margin < -CONVEXITY_TOL:
        raise ValueError(f"hL is not convex: margin {margin:.3e}")
    curv = derivative(hL, 2).values + hL.values
    lhs = 4.0 * np.pi**2 * hL.grid.integrate_samples(curv * hK.values) ** 2
    omega = hL.grid.integrate_samples(np.cbrt(np.maximum(curv, 0.0)) ** 2)
    rhs = omega**3 * j_form(hK)

    def fit():
        fit_k = _fit_support(hK)
        fit_l = _fit_support(hL)
        if fit_k is None or fit_l is None:
            return None
        same_shape = (
            abs(fit_k.a - fit_l.a) < 1e-4 * max(1.0, fit_l.a)
            and _angle_mod_pi_distance(fit_k.alpha, fit_l.alpha) < 1e-4
        )
        # a near 1 makes alpha meaningless; circles are always homothetic
        if max(fit_k.a, fit_l.a) < 1.0 + 1e-6:
            same_shape = abs(fit_k.a - fit_l.a) < 1e-4
        return fit_k if same_shape else None

    return _report("MIXED", lhs, rhs, eq_tol, fit)


# -- Euler-Lagrange diagnostics ------------------------------------------


def el_residual(u: CircleFunction, a: float, b: float) -> float:
    """Sup-norm residual of u'' + u = u^-3 + a cos/u^4 + b sin/u^4."""
    if u.min() <= _MIN_POSITIVE:
        raise ValueError(f"u must be strictly positive, min = {u.min():.3e}")
    t = u.grid.thetas
    lhs = derivative(u, 2).values + u.values
    rhs = u.values**-3.0 + a * np.cos(t) * u.values**-4.0 + b * np.sin(t) * u.values**-4.0
    return float(np.max(np.abs(lhs - rhs)))


def el_moment_system(u: CircleFunction) -> tuple[np.ndarray, float]:
    """The 2x2 Gram matrix of (cos, sin) in the u^-4 weight, and its determinant.

    Strict Cauchy-Schwarz (cos and sin are not proportional) makes the
    determinant positive for every admissible u, which is what forces the
    trivial solution of the moment system.
    """
    if u.min() <= _MIN_POSITIVE:
        raise ValueError(f"u must be strictly positive, min = {u.min():.3e}")
    t = u.grid.thetas
    w4 = u.values**-4.0
    m = np.array(
        [
            [
                u.grid.integrate_samples(np.cos(t) ** 2 * w4),
                u.grid.integrate_samples(np.sin(t) * np.cos(t) * w4),
            ],
            [
                u.grid.integrate_samples(np.sin(t) * np.cos(t) * w4),
                u.grid.integrate_samples(np.sin(t) ** 2 * w4),
            ],
        ]
    )
    return m, float(np.linalg.det(m))


# -- maximizing-sequence demonstration ------------------------------------


@dataclass(frozen=True)
class TraceRow:
    step: int
    I: float
    lam: float
    p: float
    min_u: float
    degenerate: bool


def _h1_normalized(u: CircleFunction) -> CircleFunction:
    norm = float(np.sqrt(integrate(u**2.0) + integrate(derivative(u, 1) ** 2.0)))
    return u / norm


def demo_maximize(
    seed: int,
    steps: int,
    start: CircleFunction | None = None,
    miscentered: bool = False,
) -> list[TraceRow]:
    """Run the sequence surgery of the maximization argument and trace I.

    Without ``start`` the built-in family (1 - t) * random body + t * psi_2 is
    driven from t = 0 to 1; each iterate is positioned (restoring the moment
    conditions), normalized in H^1, rebalanced in position and concentration,
    and transformed.  A scheduled family member is only adopted when it does
    not lower I (the previous iterate is held otherwise), which makes the
    trace of I(u, u) non-decreasing toward its 4 pi^2 supremum while min u
    stays away from zero.  With ``start`` the surgery alone is iterated,
    which leaves I(u, u) constant.  ``miscentered`` skips both balancing
    rules and applies a fixed off-center transform each step: the iterates
    concentrate and the trace flags the degeneration.
    """
    if steps < 1:
        raise ValueError("need at least one step")
    if steps > 100:
        raise ValueError("demo capped at 100 steps")
    if start is None:
        base = random_smooth_body(seed)
        grid = base.grid
        target = psi_function(2.0, grid)
        ts = np.linspace(0.0, 1.0, steps)
    else:
        base = start
        grid = start.grid
        ts = None

    def surgery(w: CircleFunction) -> tuple[CircleFunction, TransformParams]:
        w = _h1_normalized(position(w).positioned)
        if miscentered:
            params = TransformParams(2.0, 0.0)
        else:
            p = balance_point(w, near=np.pi / 2.0)
            params = balance_lambda(w, p, np.pi / 4.0)
        return _h1_normalized(transform(w, params)), params

    rows: list[TraceRow] = []
    u = base
    initial_min = None
    prev: tuple[CircleFunction, TransformParams, float] | None = None
    for j in range(steps):
        if ts is not None:
            t = float(ts[j])
            cand, params = surgery((1.0 - t) * base + t * target)
            value = functional_I(cand, cand)
            if prev is not None and value < prev[2] * (1.0 - 1e-12):
                cand, params, value = prev  # hold the better earlier member
            prev = (cand, params, value)
            u = cand
        else:
            u, params = surgery(u)
            value = functional_I(u, u)
        min_u = u.min()
        if initial_min is None:
            initial_min = min_u
        rows.append(
            TraceRow(
                step=j,
                I=value,
                lam=params.lam,
                p=params.center,
                min_u=min_u,
                degenerate=bool(min_u < 0.1 * initial_min),
            )
        )
    return rows
