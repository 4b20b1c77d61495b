"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from thermo_homogenization.geometry import Ball, Superellipse
from thermo_homogenization.logger import setup_logger
from thermo_homogenization.params import PhysicalParams


@pytest.fixture(autouse=True)
def setup_test_logger(tmp_path):
    """Set up logger for all tests."""
    setup_logger(log_file=tmp_path / "test.log", verbose=False, quiet=True)
    yield


@pytest.fixture
def circle():
    """Circle of radius 0.25 centered in the cell."""
    return Ball(center=(0.5, 0.5), radius=0.25)


@pytest.fixture
def sphere():
    return Ball(center=(0.5, 0.5, 0.5), radius=0.25)


@pytest.fixture
def superellipse():
    """p=4 superellipse with semi-axes 0.25."""
    return Superellipse(center=(0.5, 0.5), semi_axes=(0.25, 0.25), exponent=4.0)


@pytest.fixture
def params():
    """All physical constants equal to one, no sources."""
    return PhysicalParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def band_points(shape, rng, n, inner=0.6, outer=0.6):
    """Sample points gamma + s n(gamma) inside the tubular band."""
    if shape.dim == 2:
        angles = rng.uniform(0.0, 2.0 * np.pi, n)
        directions = np.column_stack([np.cos(angles), np.sin(angles)])
    else:
        directions = rng.normal(size=(n, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    gamma = shape.radial_point(directions)
    normals = shape.unit_normal(gamma)
    s = rng.uniform(-inner * shape.a1, outer * shape.a2, n)
    return gamma + s[:, None] * normals, gamma, s


def analytic_table(radius=0.25, bound=0.025, n=11, mode="monotone-cubic", params=None):
    """Circle table from closed forms and the dilute conductivity estimate."""
    from thermo_homogenization.cellhomog import EffectiveCoefficients
    from thermo_homogenization.geometry import Ball, shape_descriptor
    from thermo_homogenization.tables import CoefficientTable, params_fingerprint

    params = params or PhysicalParams()
    grid = np.linspace(-bound, bound, n)
    nodes = []
    for h in grid:
        R = radius + h
        fraction = np.pi * R * R
        phi = 1.0 - fraction
        nodes.append(EffectiveCoefficients(
            h=float(h),
            phi=phi,
            phi_gamma=2.0 * np.pi * R,
            K=(1.0 - fraction) / (1.0 + fraction) * params.K,
            C=phi * params.stiffness_tensor(),
            H=np.zeros(2),
        ))
    return CoefficientTable(
        shape=shape_descriptor(Ball(center=(0.5, 0.5), radius=radius)),
        params_fingerprint=params_fingerprint(params),
        mesh_resolution=0.0,
        grid=grid,
        nodes=nodes,
        mode=mode,
        params=params.to_dict(),
    )


@pytest.fixture
def circle_table():
    """Analytic circle table over the full band with 11 nodes."""
    return analytic_table()
