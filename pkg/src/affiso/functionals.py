"""Scalar functionals of bodies and circle functions.

Areas and the affine perimeter accept either a smooth support function or a
:class:`PolygonBody`; the polygon forms pair the support values with the
curvature atoms exactly, so polygon functionals carry no quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .circle_fn import CircleFunction, PolygonBody, convexity_margin, derivative, integrate

CONVEXITY_TOL = 1e-9
_MIN_POSITIVE = 1e-8

Body = Union[CircleFunction, PolygonBody]


@dataclass(frozen=True)
class BodyFunctionals:
    area: float
    polar_area: float
    affine_perimeter: float
    j_form: float


def j_form(u: CircleFunction) -> float:
    """J(u) = int [u^2 - (u')^2] d theta, evaluated by Parseval.

    Equals int u (u'' + u) for smooth u; may be negative for non-convex u.
    """
    M = u.grid.size
    c = u.coeffs
    k = np.arange(1, M // 2, dtype=np.float64)
    a0 = c[0].real / M
    interior = 4.0 * np.pi * np.sum((1.0 - k**2) * np.abs(c[1:-1]) ** 2) / M**2
    nyq = np.pi * (1.0 - (M / 2.0) ** 2) * (c[-1].real / M) ** 2
    return float(2.0 * np.pi * a0**2 + interior + nyq)


def _require_convex(h: CircleFunction, what: str) -> None:
    margin = convexity_margin(h)
    if margin < -CONVEXITY_TOL:
        raise ValueError(
            f"{what} needs a support function; convexity margin {margin:.3e} < -{CONVEXITY_TOL}"
        )


def area(body: Body) -> float:
    """Body area A = (1/2) int h d(h'' + h).

    Smooth support functions use spectral h''; polygons pair the exact
    support values with the edge atoms.
    """
    if isinstance(body, PolygonBody):
        total = 0.0
        for loc, mass in body.edge_atoms():
            total += mass * float(body.support_at(loc)[0])
        return 0.5 * total
    _require_convex(body, "area")
    curv = derivative(body, 2).values + body.values
    return float(0.5 * body.grid.integrate_samples(body.values * curv))


def polar_area(h: CircleFunction) -> float:
    """Area of the polar reciprocal, (1/2) int h^-2.

    Refuses support functions that come within 1e-8 of zero: the polar mass
    diverges there, and a huge finite number would mask the degeneracy.
    """
    if h.min() <= _MIN_POSITIVE:
        raise ValueError(
            f"polar area diverges: min(h) = {h.min():.3e} <= {_MIN_POSITIVE}"
        )
    return float(0.5 * integrate(h**-2.0))


def affine_perimeter(body: Body) -> float:
    """Affine perimeter int (D^2 h + h)^(2/3) d theta of the a.c. curvature.

    Atoms contribute nothing, so every polygon has affine perimeter zero.
    Density values within round-off below zero are clamped; anything more
    negative means the input is not convex and is rejected.
    """
    if isinstance(body, PolygonBody):
        return 0.0
    _require_convex(body, "affine perimeter")
    density = derivative(body, 2).values + body.values
    density = np.where(density < 0.0, 0.0, density)
    return float(body.grid.integrate_samples(np.cbrt(density) ** 2))


def pairing(F: CircleFunction, h: CircleFunction) -> float:
    """int F h d theta on the common grid."""
    if F.grid.size != h.grid.size:
        raise ValueError("grid mismatch between F and h")
    return float(F.grid.integrate_samples(F.values * h.values))


def functional_I(u: CircleFunction, v: CircleFunction) -> float:
    """I(u, v) = (int v^-2)^3 J(u) / (int u v^-3)^2.

    Scale invariant in both arguments; bounded by 4 pi^2 when v^-3 has zero
    first moments, with equality exactly on the centered-ellipse family.
    """
    if u.grid.size != v.grid.size:
        raise ValueError("grid mismatch between u and v")
    if v.min() <= _MIN_POSITIVE:
        raise ValueError(f"v must be strictly positive, min(v) = {v.min():.3e}")
    if u.min() < -1e-12:
        raise ValueError(f"u must be nonnegative, min(u) = {u.min():.3e}")
    polar_mass = integrate(v**-2.0)
    denom = integrate(u * v**-3.0)
    if abs(denom) <= 1e-12:
        raise ValueError("pairing integral int u v^-3 vanishes; I(u, v) undefined")
    return float(polar_mass**3 * j_form(u) / denom**2)


def body_functionals(body: Body) -> BodyFunctionals:
    """All four scalar functionals of one body."""
    if isinstance(body, PolygonBody):
        A = area(body)
        return BodyFunctionals(
            area=A,
            polar_area=polar_area(body.support()),
            affine_perimeter=0.0,
            j_form=2.0 * A,
        )
    return BodyFunctionals(
        area=area(body),
        polar_area=polar_area(body),
        affine_perimeter=affine_perimeter(body),
        j_form=j_form(body),
    )
