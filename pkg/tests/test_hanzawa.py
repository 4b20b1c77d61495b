"""Tests for the Hanzawa transform."""

import numpy as np
import pytest
from scipy.stats import qmc

from tests.conftest import band_points
from thermo_homogenization.errors import AdmissibilityError
from thermo_homogenization.geometry import HanzawaTransform, PrecomputedTransform, Superellipse


@pytest.fixture
def fd_superellipse():
    """Superellipse with semi-axes 0.3 used for the finite-difference checks."""
    return Superellipse(center=(0.5, 0.5), semi_axes=(0.3, 0.3), exponent=4.0)


def _cell_samples(n, seed=7):
    return qmc.Halton(d=2, seed=seed).random(n)


def _mixed_samples(shape, rng, n):
    """Half band points, half uniform points in the cell."""
    y, _, _ = band_points(shape, rng, n // 2, inner=0.7, outer=0.7)
    return np.vstack([y, rng.uniform(0.0, 1.0, (n - n // 2, 2))])


class TestCircleExamples:
    """Closed-form checks for the circle with h = 0.02."""

    def test_map_on_interface(self, circle):
        t = HanzawaTransform(circle, 0.02)
        assert np.allclose(t.map([0.75, 0.5]), [0.77, 0.5], atol=1e-15)

    def test_map_outside_support(self, circle):
        t = HanzawaTransform(circle, 0.02)
        assert np.array_equal(t.map([0.02, 0.02]), [0.02, 0.02])

    def test_map_partial_cutoff(self, circle):
        """Mid-ramp point moves by half the height."""
        t = HanzawaTransform(circle, 0.02)
        x = np.array([0.5 + 0.25 + 0.125, 0.5])
        moved = np.linalg.norm(t.map(x) - x)
        assert 0.0 < moved < 0.02
        assert moved == pytest.approx(0.01, abs=1e-12)

    def test_jacobian_on_interface(self, circle):
        """F = diag(1, 1.08) in the (radial, tangential) frame."""
        F, J = HanzawaTransform(circle, 0.02).jacobian([0.75, 0.5])
        assert np.allclose(F, np.diag([1.0, 1.08]), atol=1e-14)
        assert J == pytest.approx(1.08)

    def test_zero_height_is_identity(self, circle, rng):
        x = _mixed_samples(circle, rng, 200)
        t = HanzawaTransform(circle, 0.0)
        F, J = t.jacobian(x)
        assert np.array_equal(t.map(x), x)
        assert np.allclose(F, np.eye(2)[None])
        assert np.allclose(J, 1.0)

    def test_identity_outside_band(self, circle):
        F, J = HanzawaTransform(circle, 0.02).jacobian([0.05, 0.95])
        assert np.array_equal(F, np.eye(2))
        assert J == 1.0

    def test_inverse_example(self, circle):
        t = HanzawaTransform(circle, 0.02)
        assert np.allclose(t.inverse([0.77, 0.5]), [0.75, 0.5], atol=1e-12)

    def test_height_out_of_band(self, circle):
        """|h| > a*/10 is rejected, no clamping."""
        with pytest.raises(AdmissibilityError):
            HanzawaTransform(circle, 0.03)
        HanzawaTransform(circle, 0.025)


@pytest.mark.parametrize("shape_name", ["circle", "fd_superellipse"])
@pytest.mark.parametrize("fraction", [-1.0, 0.0, 1.0])
def test_jacobian_matches_finite_differences(shape_name, fraction, request, rng):
    """Analytic F agrees with central differences of the map."""
    shape = request.getfixturevalue(shape_name)
    t = HanzawaTransform(shape, fraction * shape.max_height)
    x = _mixed_samples(shape, rng, 1000)
    x = np.clip(x, 1e-4, 1 - 1e-4)
    delta = 1e-5
    fd = np.empty((len(x), 2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = delta
        fd[:, :, j] = (t.map(x + e) - t.map(x - e)) / (2 * delta)
    F, _ = t.jacobian(x)
    assert np.abs(F - fd).max() <= 1e-6


@pytest.mark.parametrize("shape_name", ["circle", "superellipse"])
@pytest.mark.parametrize("sign", [-1.0, 1.0])
def test_jacobian_bounds(shape_name, sign, request):
    """||F||_inf <= 2, ||F^-1||_inf <= 2 and J >= 0.5 at the band edge height."""
    shape = request.getfixturevalue(shape_name)
    x = _cell_samples(10000)
    pre = PrecomputedTransform(shape, x)
    F, J = pre.jacobian(sign * shape.max_height)
    row_sum = np.abs(F).sum(axis=2).max(axis=1)
    inv_row_sum = np.abs(np.linalg.inv(F)).sum(axis=2).max(axis=1)
    assert row_sum.max() <= 2.0
    assert inv_row_sum.max() <= 2.0
    assert J.min() >= 0.5


def test_cutoff_region_is_sampled(circle):
    """The quasi-random samples actually hit the ramps of the cutoff."""
    pre = PrecomputedTransform(circle, _cell_samples(10000))
    assert ((pre.chi > 0) & (pre.chi < 1)).sum() > 100


@pytest.mark.parametrize("shape_name", ["circle", "superellipse"])
def test_interface_maps_onto_offset(shape_name, request, rng):
    """s(gamma) lies on Gamma(h) = {d = h}."""
    shape = request.getfixturevalue(shape_name)
    h = 0.8 * shape.max_height
    angles = rng.uniform(0, 2 * np.pi, 200)
    gamma = shape.radial_point(np.column_stack([np.cos(angles), np.sin(angles)]))
    mapped = HanzawaTransform(shape, h).map(gamma)
    assert np.abs(shape.signed_distance(mapped) - h).max() <= 1e-10


@pytest.mark.parametrize("shape_name", ["circle", "superellipse"])
def test_inverse_round_trip(shape_name, request, rng):
    """inverse(map(x)) = x."""
    shape = request.getfixturevalue(shape_name)
    t = HanzawaTransform(shape, -shape.max_height)
    x = _mixed_samples(shape, rng, 1000)
    assert np.abs(t.inverse(t.map(x)) - x).max() <= 1e-10


class TestPrecomputedTransform:
    """Tests for the cached h-independent Jacobian part."""

    def test_matches_direct_transform(self, superellipse, rng):
        x = _mixed_samples(superellipse, rng, 300)
        pre = PrecomputedTransform(superellipse, x)
        for h in (-0.005, 0.008):
            F, J = HanzawaTransform(superellipse, h).jacobian(x)
            F_pre, J_pre = pre.jacobian(h)
            assert np.allclose(F, F_pre, atol=1e-15)
            assert np.allclose(J, J_pre, atol=1e-15)

    def test_interface_jacobian_is_surface_jacobian(self, circle):
        """On Gamma, J equals det(Id - h L) = (r + h) / r."""
        gamma = circle.radial_point(np.array([[0.6, 0.8], [-1.0, 0.0]]))
        pre = PrecomputedTransform(circle, gamma)
        _, J = pre.jacobian(0.02)
        assert np.allclose(J, 0.27 / 0.25)
        t = HanzawaTransform(circle, 0.02)
        assert np.allclose(t.surface_jacobian(gamma), 0.27 / 0.25)

    def test_velocity_is_normal_on_interface(self, circle):
        gamma = np.array([[0.75, 0.5]])
        assert np.allclose(PrecomputedTransform(circle, gamma).velocity(0.3), [[0.3, 0.0]])

    def test_curvature_on_interface(self, circle):
        gamma = np.array([[0.5, 0.75]])
        kappa = PrecomputedTransform(circle, gamma).curvature(0.02)
        assert kappa[0] == pytest.approx(-1.0 / 0.27, abs=1e-12)
