import numpy as np
import pytest
from hypothesis import given, strategies as st

from affiso import (
    CircleFunction,
    EllipseParams,
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
from affiso.transforms import psi_function

SQUARE = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]


def _random_trig(grid, seed, modes=8, include_first=True):
    rng = np.random.default_rng(seed)
    c = np.zeros(grid.size // 2 + 1, dtype=np.complex128)
    c[0] = rng.standard_normal() * grid.size
    lo = 1 if include_first else 2
    for k in range(lo, modes + 1):
        c[k] = (rng.standard_normal() + 1j * rng.standard_normal()) * grid.size / 2
    return CircleFunction.from_coeffs(grid, c)


class TestGrid:
    def test_uniform_nodes(self):
        g = make_grid(16)
        assert g.thetas[0] == 0.0
        assert g.thetas[8] == pytest.approx(np.pi, abs=1e-15)

    def test_default_size(self, grid):
        assert grid.size == 2048

    @pytest.mark.parametrize("bad", [15, 17, 1999])
    def test_rejects_odd(self, bad):
        with pytest.raises(ValueError, match="even"):
            make_grid(bad)

    @pytest.mark.parametrize("bad", [0, 2, 14, -16])
    def test_rejects_too_small(self, bad):
        with pytest.raises(ValueError):
            make_grid(bad)


class TestCircleFunction:
    def test_roundtrip_samples_coeffs_samples(self, grid):
        rng = np.random.default_rng(0)
        vals = 1.0 + 0.3 * rng.standard_normal(grid.size)
        f = CircleFunction.from_samples(grid, vals)
        back = CircleFunction.from_coeffs(grid, f.coeffs)
        assert np.max(np.abs(back.values - f.values)) < 1e-12 * np.max(np.abs(vals))

    def test_evaluate_matches_samples_on_grid(self, grid):
        f = _random_trig(grid, 1)
        err = np.max(np.abs(f.evaluate(grid.thetas) - f.values))
        assert err < 1e-12 * np.max(np.abs(f.values))

    def test_evaluate_band_limited_exact(self, small_grid):
        f = CircleFunction.from_callable(small_grid, lambda t: 2.0 + np.cos(3 * t) - 0.5 * np.sin(7 * t))
        x = np.linspace(0.1, 9.0, 57)
        expected = 2.0 + np.cos(3 * x) - 0.5 * np.sin(7 * x)
        assert np.max(np.abs(f.evaluate(x) - expected)) < 1e-12

    def test_positive_flag(self, small_grid):
        assert CircleFunction.constant(small_grid, 0.5).positive
        assert not CircleFunction.from_callable(small_grid, np.sin).positive

    def test_nyquist_sine_zeroed(self, small_grid):
        rng = np.random.default_rng(2)
        f = CircleFunction.from_samples(small_grid, rng.standard_normal(small_grid.size))
        assert f.coeffs[-1].imag == 0.0
        assert f.coeffs[0].imag == 0.0

    def test_grid_mismatch_rejected(self, small_grid):
        a = CircleFunction.constant(small_grid, 1.0)
        b = CircleFunction.constant(make_grid(128), 1.0)
        with pytest.raises(ValueError, match="grid"):
            _ = a + b


class TestDerivative:
    def test_cos_second_derivative(self, grid):
        f = CircleFunction.from_callable(grid, np.cos)
        d2 = derivative(f, 2)
        assert np.max(np.abs(d2.values + np.cos(grid.thetas))) < 1e-12

    def test_constant_first_derivative(self, grid):
        f = CircleFunction.constant(grid, 1.0)
        assert np.max(np.abs(derivative(f, 1).values)) < 1e-14

    def test_psi2_matches_finite_differences(self, grid):
        # centered-difference oracle: agreement at O(dtheta^2)
        f = psi_function(2.0, grid)
        d1 = derivative(f, 1).values
        dt = grid.spacing
        fd = (np.roll(f.values, -1) - np.roll(f.values, 1)) / (2 * dt)
        third = derivative(derivative(f, 2), 1).values
        bound = dt**2 * np.max(np.abs(third)) / 6.0 + 1e-10
        assert np.max(np.abs(d1 - fd)) < bound

    def test_rejects_other_orders(self, small_grid):
        f = CircleFunction.constant(small_grid, 1.0)
        with pytest.raises(ValueError, match="order"):
            derivative(f, 3)

    @given(seed=st.integers(0, 10**6))
    def test_integral_of_derivative_vanishes(self, seed):
        g = make_grid(256)
        f = _random_trig(g, seed)
        assert abs(integrate(derivative(f, 1))) < 1e-10 * max(1.0, abs(f.max()))

    @given(seed=st.integers(0, 10**6), c1=st.floats(-3, 3), c2=st.floats(-3, 3))
    def test_linearity(self, seed, c1, c2):
        g = make_grid(256)
        f1 = _random_trig(g, seed)
        f2 = _random_trig(g, seed + 1)
        lhs = derivative(c1 * f1 + c2 * f2, 1).values
        rhs = c1 * derivative(f1, 1).values + c2 * derivative(f2, 1).values
        scale = max(1.0, np.max(np.abs(rhs)))
        assert np.max(np.abs(lhs - rhs)) < 1e-10 * scale

    @given(seed=st.integers(0, 10**6))
    def test_commutes_with_grid_rotation(self, seed):
        g = make_grid(256)
        f = _random_trig(g, seed, modes=30)
        rolled = CircleFunction.from_samples(g, np.roll(f.values, 1))
        lhs = derivative(rolled, 1).values
        rhs = np.roll(derivative(f, 1).values, 1)
        assert np.max(np.abs(lhs - rhs)) < 1e-10 * max(1.0, np.max(np.abs(rhs)))


class TestIntegrate:
    def test_constant(self, grid):
        assert integrate(CircleFunction.constant(grid, 1.0)) == pytest.approx(2 * np.pi, abs=1e-13)

    def test_cos_squared(self, grid):
        f = CircleFunction.from_callable(grid, lambda t: np.cos(t) ** 2)
        assert integrate(f) == pytest.approx(np.pi, abs=1e-13)

    def test_psi2_inverse_square_mass(self, grid):
        # the inverse-square density of psi_lam integrates to 2 pi
        f = psi_function(2.0, grid) ** -2.0
        assert integrate(f) == pytest.approx(2 * np.pi, abs=1e-11)


class TestEllipses:
    def test_circle(self, grid):
        h = ellipse_support(EllipseParams(a=1.0), grid)
        assert np.max(np.abs(h.values - 1.0)) < 1e-14

    def test_a2_axis_values(self, grid):
        h = ellipse_support(EllipseParams(a=2.0), grid)
        assert h.evaluate(0.0) == pytest.approx(2.0, abs=1e-12)
        assert h.evaluate(np.pi / 2) == pytest.approx(0.5, abs=1e-12)

    def test_translated_circle(self, grid):
        h = ellipse_support(EllipseParams(a=1.0, center=(0.3, 0.0)), grid)
        expected = 1.0 + 0.3 * np.cos(grid.thetas)
        assert np.max(np.abs(h.values - expected)) < 1e-13
        assert h.positive

    def test_density_circle(self, grid):
        F = ellipse_density(EllipseParams(a=1.0), grid)
        assert np.max(np.abs(F.values - 1.0)) < 1e-14

    def test_density_a2_value(self, grid):
        F = ellipse_density(EllipseParams(a=2.0), grid)
        assert F.evaluate(0.0) == pytest.approx(1.0 / 8.0, abs=1e-13)

    @pytest.mark.parametrize("a,alpha", [(1.5, 0.0), (2.0, 0.9), (4.0, -1.2)])
    def test_density_orthogonality(self, grid, a, alpha):
        F = ellipse_density(EllipseParams(a=a, alpha=alpha), grid)
        mc = integrate(F * CircleFunction.from_callable(grid, np.cos))
        ms = integrate(F * CircleFunction.from_callable(grid, np.sin))
        assert abs(mc) < 1e-10 and abs(ms) < 1e-10

    def test_a_to_one_converges_to_circle(self, grid):
        # sup deviation of the centered ellipse from the circle is k*(a - 1)
        for a in [1.1, 1.01, 1.001]:
            h = ellipse_support(EllipseParams(a=a, k=1.7), grid)
            assert np.max(np.abs(h.values - 1.7)) <= 1.7 * (a - 1.0) + 1e-12

    def test_ellipse_margin_positive(self, grid):
        for p in [EllipseParams(2.0), EllipseParams(3.0, alpha=0.5, k=0.4)]:
            assert convexity_margin(ellipse_support(p, grid)) > 0.0

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            EllipseParams(a=-1.0)
        with pytest.raises(ValueError):
            EllipseParams(a=1.0, k=0.0)


class TestPolygon:
    def test_square_support_values(self, grid):
        h = polygon_support(SQUARE, grid)
        assert h.evaluate(0.0) == pytest.approx(1.0, abs=1e-10)
        assert h.evaluate(np.pi / 4) == pytest.approx(np.sqrt(2.0), abs=1e-10)

    def test_matches_max_dot_oracle(self, grid):
        verts = np.array([(1.0, 0.0), (0.0, 1.0), (-1.0, -1.0)])
        h = polygon_support(verts, grid)
        oracle = np.max(
            np.cos(grid.thetas)[:, None] * verts[:, 0] + np.sin(grid.thetas)[:, None] * verts[:, 1],
            axis=1,
        )
        assert h.evaluate(0.0) == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(h.values - oracle)) < 1e-9

    def test_two_points_rejected(self):
        with pytest.raises(ValueError):
            polygon_support([(0.0, 0.0), (1.0, 1.0)])

    def test_collinear_rejected(self):
        with pytest.raises(ValueError):
            polygon_support([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])

    def test_square_edge_atoms(self):
        body = PolygonBody.from_points(SQUARE)
        atoms = sorted(body.edge_atoms())
        locations = [loc for loc, _ in atoms]
        masses = [m for _, m in atoms]
        assert np.allclose(locations, [0.0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-12)
        assert np.allclose(masses, 2.0)
        assert body.perimeter() == pytest.approx(8.0, abs=1e-12)


class TestConvexityMargin:
    def test_unit_circle(self, grid):
        assert convexity_margin(CircleFunction.constant(grid, 1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_mild_second_harmonic(self, grid):
        # h'' + h = 1 - 0.6 cos 2theta, minimum 0.4
        h = CircleFunction.from_callable(grid, lambda t: 1 + 0.2 * np.cos(2 * t))
        assert convexity_margin(h) == pytest.approx(0.4, abs=1e-10)

    def test_strong_second_harmonic_not_convex(self, grid):
        h = CircleFunction.from_callable(grid, lambda t: 1 + 0.5 * np.cos(2 * t))
        assert convexity_margin(h) == pytest.approx(-0.5, abs=1e-10)


class TestRandomSmoothBody:
    def test_no_modes_gives_circle(self, grid):
        h = random_smooth_body(0, modes=0, grid=grid)
        assert np.max(np.abs(h.values - 1.0)) < 1e-14

    @pytest.mark.parametrize("seed", [0, 1, 7, 123])
    def test_margin_at_least_point_one(self, grid, seed):
        assert convexity_margin(random_smooth_body(seed, grid=grid)) >= 0.1

    def test_deterministic(self, grid):
        a = random_smooth_body(42, grid=grid)
        b = random_smooth_body(42, grid=grid)
        assert np.array_equal(a.values, b.values)

    def test_distinct_seeds_differ(self, grid):
        a = random_smooth_body(1, grid=grid)
        b = random_smooth_body(2, grid=grid)
        assert np.max(np.abs(a.values - b.values)) > 1e-3
