"""Tests for interface geometry."""

import math

import numpy as np
import pytest

from tests.conftest import band_points
from thermo_homogenization.errors import AdmissibilityError, ValidationError
from thermo_homogenization.geometry import (
    Ball,
    CellIndexing,
    Superellipse,
    create_shape,
    shape_descriptor,
)


class TestCircle:
    """Closed-form checks on the centered circle of radius 0.25."""

    def test_signed_distance(self, circle):
        """Positive in Y*, zero on Gamma, negative in Z."""
        assert circle.signed_distance([0.5, 0.9]) == pytest.approx(0.15, abs=1e-15)
        assert circle.signed_distance([0.75, 0.5]) == pytest.approx(0.0, abs=1e-15)
        assert circle.signed_distance([0.5, 0.6]) == pytest.approx(-0.15, abs=1e-15)

    def test_project(self, circle):
        """Radial projection onto the circle."""
        assert np.allclose(circle.project([0.5, 0.9]), [0.5, 0.75], atol=1e-15)
        assert np.allclose(circle.project([0.75, 0.5]), [0.75, 0.5], atol=1e-15)

    def test_normal(self, circle):
        """Normal points from Z into Y*."""
        assert np.allclose(circle.normal([0.75, 0.5]), [1.0, 0.0])
        assert np.allclose(circle.normal([0.5, 0.75]), [0.0, 1.0])

    def test_normal_rejects_off_surface(self, circle):
        """normal() needs a point on the interface."""
        with pytest.raises(ValidationError):
            circle.normal([0.5, 0.9])

    def test_shape_tensor_eigenvalues(self, circle):
        """Tangential eigenvalue -1/r and the normal in the kernel."""
        gamma = circle.radial_point(np.array([[np.cos(0.3), np.sin(0.3)]]))[0]
        L = circle.shape_tensor(gamma)
        eigs = np.sort(np.linalg.eigvalsh(L))
        assert eigs == pytest.approx([-4.0, 0.0], abs=1e-12)
        assert np.linalg.norm(L @ circle.normal(gamma)) <= 1e-10

    def test_curvature(self, circle):
        """kappa(h) = -1/(r+h) for the circle."""
        gamma = [0.75, 0.5]
        assert circle.curvature(0.0, gamma) == pytest.approx(-4.0, abs=1e-12)
        for h in (-0.02, 0.0, 0.02, 0.05):
            assert abs(circle.curvature(h, gamma) + 1.0 / (0.25 + h)) <= 1e-12

    def test_curvature_height_limit(self, circle):
        """Heights beyond a*/2 are rejected."""
        with pytest.raises(AdmissibilityError):
            circle.curvature(0.2, [0.75, 0.5])

    def test_tubular_radii(self, circle):
        """a1 = r and a2 is the gap to the nearest face."""
        assert circle.a1 == pytest.approx(0.25)
        assert circle.a2 == pytest.approx(0.25)
        assert circle.max_height == pytest.approx(0.025)
        circle.validate()

    def test_center_is_out_of_band(self, circle):
        """The center has no projection."""
        proj = circle.closest_point(np.array([[0.5, 0.5], [0.9, 0.5]]))
        assert not proj.in_band[0]
        assert proj.in_band[1]
        with pytest.raises(ValidationError):
            circle.project([0.5, 0.5])

    def test_measures(self, circle):
        """Offset perimeter and area in closed form."""
        assert circle.interface_measure(0.02) == pytest.approx(2 * np.pi * 0.27)
        assert circle.porosity(0.0) == pytest.approx(1 - np.pi * 0.0625)

    def test_inclusion_must_fit(self):
        """Inclusion touching the cell boundary is rejected."""
        with pytest.raises(ValidationError):
            Ball(center=(0.5, 0.5), radius=0.5)


class TestSphere:
    """Dimension-generic checks in 3D."""

    def test_shape_tensor(self, sphere):
        """Both tangential eigenvalues are -1/r."""
        gamma = sphere.radial_point(np.array([[0.0, 0.6, 0.8]]))[0]
        eigs = np.sort(np.linalg.eigvalsh(sphere.shape_tensor(gamma)))
        assert eigs == pytest.approx([-4.0, -4.0, 0.0], abs=1e-12)

    def test_curvature(self, sphere):
        """kappa(h) = -2/(r+h)."""
        gamma = [0.75, 0.5, 0.5]
        assert sphere.curvature(0.05, gamma) == pytest.approx(-2.0 / 0.30, abs=1e-12)

    def test_interface_quadrature(self, sphere):
        """Gauss-Legendre times trapezoid reproduces the sphere area."""
        _, weights = sphere.interface_quadrature(256)
        assert weights.sum() == pytest.approx(4 * np.pi * 0.0625, rel=1e-10)


class TestSuperellipse:
    """Newton projection and numeric radii."""

    def test_projection_residual(self, superellipse):
        """y = gamma + d n(gamma) at the projected point."""
        y = np.array([0.5, 0.9])
        gamma = superellipse.project(y)
        d = superellipse.signed_distance(y)
        n = superellipse.normal(gamma)
        assert np.linalg.norm(y - gamma - d * n) <= 1e-10
        assert np.allclose(gamma, [0.5, 0.75], atol=1e-12)

    def test_normal_is_normalized_gradient(self, superellipse, rng):
        """n = grad rho / |grad rho| on sampled boundary points."""
        angles = rng.uniform(0, 2 * np.pi, 50)
        gamma = superellipse.radial_point(np.column_stack([np.cos(angles), np.sin(angles)]))
        grad = superellipse.level_set_gradient(gamma)
        expected = grad / np.linalg.norm(grad, axis=1, keepdims=True)
        assert np.abs(superellipse.normal(gamma) - expected).max() <= 1e-12

    def test_kernel_of_shape_tensor(self, superellipse, rng):
        """L n = 0 on the boundary."""
        angles = rng.uniform(0, 2 * np.pi, 50)
        gamma = superellipse.radial_point(np.column_stack([np.cos(angles), np.sin(angles)]))
        L = superellipse.shape_tensor(gamma)
        n = superellipse.normal(gamma)
        assert np.abs(np.einsum("nij,nj->ni", L, n)).max() <= 1e-10

    def test_band_points_recover_offsets(self, superellipse, rng):
        """Points built as gamma + s n project back to gamma with distance s."""
        y, gamma, s = band_points(superellipse, rng, 300)
        proj = superellipse.closest_point(y)
        assert proj.in_band.all()
        assert np.abs(proj.distance - s).max() <= 1e-10
        assert np.abs(proj.points - gamma).max() <= 1e-9

    def test_far_points_flagged(self, superellipse):
        """Points deep inside Z get a conservative bound and no projection."""
        proj = superellipse.closest_point(np.array([[0.5, 0.5]]))
        assert not proj.in_band[0]
        assert proj.distance[0] < -superellipse.a1
        assert np.isnan(proj.points[0]).all()

    def test_radii(self, superellipse):
        """Radii follow the curvature at the diagonal and satisfy the spectral bound."""
        assert 0.08 < superellipse.a1 < 0.095
        assert 0.17 < superellipse.a2 < 0.185
        superellipse.validate()

    def test_area(self, superellipse):
        """|Z| matches 4ab Gamma(1+1/p)^2 / Gamma(1+2/p)."""
        p = 4.0
        exact = 4 * 0.25 * 0.25 * math.gamma(1 + 1 / p) ** 2 / math.gamma(1 + 2 / p)
        assert superellipse.inclusion_volume(0.0) == pytest.approx(exact, rel=1e-10)

    def test_porosity_derivative_is_minus_perimeter(self, superellipse):
        """d phi / dh = -|Gamma(h)|."""
        h, delta = 0.005, 1e-4
        fd = (superellipse.porosity(h + delta) - superellipse.porosity(h - delta)) / (2 * delta)
        assert fd == pytest.approx(-superellipse.interface_measure(h), rel=1e-8)

    def test_perimeter_matches_polygon(self, superellipse):
        """Quadrature perimeter agrees with a fine inscribed polygon."""
        angles = np.linspace(0, 2 * np.pi, 200001)
        pts = superellipse.radial_point(np.column_stack([np.cos(angles), np.sin(angles)]))
        polygon = np.linalg.norm(np.diff(pts, axis=0), axis=1).sum()
        assert superellipse.interface_measure(0.0) == pytest.approx(polygon, rel=1e-6)

    def test_superellipsoid_projection(self, rng):
        """3D projection recovers constructed offsets."""
        shape = Superellipse(center=(0.5, 0.5, 0.5), semi_axes=(0.25, 0.2, 0.22), exponent=4.0)
        y, gamma, s = band_points(shape, rng, 100, inner=0.4, outer=0.4)
        proj = shape.closest_point(y)
        assert np.abs(proj.distance - s).max() <= 1e-9

    def test_invalid_exponent(self):
        with pytest.raises(ValidationError):
            Superellipse(exponent=2.0)


@pytest.mark.parametrize("shape_name", ["circle", "superellipse"])
class TestDerivativeIdentities:
    """Dd = n(P)^T and DP = M(P, d)(Id - n n^T) against finite differences."""

    def test_distance_gradient(self, shape_name, request, rng):
        shape = request.getfixturevalue(shape_name)
        y, _, _ = band_points(shape, rng, 1000)
        delta = 1e-5
        fd = np.empty_like(y)
        for i in range(2):
            e = np.zeros(2)
            e[i] = delta
            fd[:, i] = (shape.signed_distance(y + e) - shape.signed_distance(y - e)) / (2 * delta)
        normals = shape.closest_point(y).normals
        assert np.abs(fd - normals).max() <= 1e-6

    def test_projection_derivative(self, shape_name, request, rng):
        shape = request.getfixturevalue(shape_name)
        y, _, _ = band_points(shape, rng, 1000)
        delta = 1e-5
        fd = np.empty((len(y), 2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = delta
            fd[:, :, j] = (shape.project(y + e) - shape.project(y - e)) / (2 * delta)
        assert np.abs(shape.projection_derivative(y) - fd).max() <= 1e-6


class TestFactory:
    """Tests for shape construction from descriptors."""

    def test_circle_descriptor(self):
        shape = create_shape({"kind": "circle", "center": [0.5, 0.5], "radius": 0.2})
        assert isinstance(shape, Ball)
        assert shape.radius == 0.2

    def test_none_kind(self):
        assert create_shape({"kind": "none"}) is None
        assert shape_descriptor(None) == {"kind": "none"}

    def test_descriptor_round_trip(self, superellipse):
        rebuilt = create_shape(shape_descriptor(superellipse))
        assert rebuilt.a1 == superellipse.a1
        assert np.allclose(rebuilt.semi_axes, superellipse.semi_axes)

    def test_radius_override_too_large(self):
        with pytest.raises(ValidationError):
            create_shape({"kind": "circle", "radius": 0.25, "a2": 0.3}).a2

    def test_unknown_kind(self):
        with pytest.raises(ValidationError, match="Unknown shape kind"):
            create_shape({"kind": "torus"})


class TestCellIndexing:
    """Tests for the eps-cell decomposition."""

    def test_decompose_examples(self):
        k, y_hat = CellIndexing(level=1).decompose([0.6, 0.3])
        assert k.tolist() == [1, 0]
        assert y_hat == pytest.approx([0.2, 0.6])

        k, y_hat = CellIndexing(level=2).decompose([0.0, 0.0])
        assert k.tolist() == [0, 0]
        assert y_hat.tolist() == [0.0, 0.0]

        k, y_hat = CellIndexing(level=2).decompose([0.999, 0.999])
        assert k.tolist() == [3, 3]
        assert y_hat == pytest.approx([0.996, 0.996])

    def test_upper_face_belongs_to_last_cell(self):
        k, y_hat = CellIndexing(level=2).decompose([1.0, 0.5])
        assert k.tolist() == [3, 2]
        assert y_hat == pytest.approx([1.0, 0.0])

    def test_round_trip(self, rng):
        idx = CellIndexing(level=3)
        x = rng.uniform(0, 1, (100, 2))
        k, y_hat = idx.decompose(x)
        assert np.allclose(idx.compose(k, y_hat), x, atol=1e-15)
        assert ((y_hat >= 0) & (y_hat < 1)).all()

    def test_flat_order(self):
        idx = CellIndexing(level=1)
        assert idx.indices().tolist() == [[0, 0], [1, 0], [0, 1], [1, 1]]
        assert idx.flat_index([1, 1]) == 3
        assert idx.n_cells == 4
