"""Support-function calculus on the circle and numerical verification of the
planar affine isoperimetric inequalities."""

from .circle_fn import (
    DEFAULT_GRID_SIZE,
    CircleFunction,
    EllipseParams,
    Grid,
    PolygonBody,
    convexity_margin,
    derivative,
    ellipse_density,
    ellipse_support,
    integrate,
    make_grid,
    polygon_support,
    random_smooth_body,
)
from .functionals import (
    BodyFunctionals,
    affine_perimeter,
    area,
    body_functionals,
    functional_I,
    j_form,
    pairing,
    polar_area,
)
from .measures import (
    CircleMeasure,
    SupportDecomposition,
    decompose_support,
    first_moments,
    jordan_decompose,
    orthogonalize_pair,
    second_derivative_measure,
    solve_h_from_measure,
    tv_norm,
)
from .positioning import InfeasiblePositionError, PositionResult, position, position_gradient
from .transforms import (
    InvarianceReport,
    TransformParams,
    balance_lambda,
    balance_point,
    check_invariances,
    m_map,
    psi,
    psi_function,
    transform,
)
from .verify import (
    InequalityReport,
    TraceRow,
    check_affine_iso,
    check_blaschke_santalo,
    check_main,
    check_mixed,
    demo_maximize,
    el_moment_system,
    el_residual,
    fit_centered_ellipse,
    orthogonalize_density,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
