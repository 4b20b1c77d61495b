"""Tests for P1 assembly and quadrature."""

from math import factorial

import numpy as np
import pytest

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.fem import (
    TRIANGLE_3,
    TRIANGLE_7,
    Assembler,
    Mesh,
    assemble_elastic,
    assemble_scalar,
    generate_cell_mesh,
    periodic_fold,
    periodic_prolongation,
    structured_mesh,
)
from thermo_homogenization.params import isotropic_tensor


@pytest.fixture
def unit_triangle():
    return Mesh(nodes=[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], triangles=[[0, 1, 2]])


@pytest.fixture
def cell_mesh(circle):
    return generate_cell_mesh(circle, 0.1)


def _rigid_motions(nodes):
    n = len(nodes)
    tx = np.tile([1.0, 0.0], n)
    ty = np.tile([0.0, 1.0], n)
    rot = np.column_stack([-nodes[:, 1], nodes[:, 0]]).ravel()
    return tx, ty, rot


class TestQuadrature:
    """Tests for the triangle rules."""

    @pytest.mark.parametrize("rule", [TRIANGLE_3, TRIANGLE_7])
    def test_weights_sum_to_one(self, rule):
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(rule.barycentric.sum(axis=1), 1.0)

    @pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    def test_degree_two_exact(self, unit_triangle, a, b):
        """int x^a y^b over the unit triangle = a! b! / (a + b + 2)!."""
        asm = Assembler(unit_triangle)
        x, y = asm.points[..., 0], asm.points[..., 1]
        exact = factorial(a) * factorial(b) / factorial(a + b + 2)
        assert asm.integrate(x**a * y**b) == pytest.approx(exact, abs=1e-15)

    @pytest.mark.parametrize("a,b", [(5, 0), (3, 2), (1, 4)])
    def test_degree_five_rule(self, unit_triangle, a, b):
        asm = Assembler(unit_triangle, rule=TRIANGLE_7)
        x, y = asm.points[..., 0], asm.points[..., 1]
        exact = factorial(a) * factorial(b) / factorial(a + b + 2)
        assert asm.integrate(x**a * y**b) == pytest.approx(exact, rel=1e-12)


class TestScalarAssembly:
    """Tests for stiffness, mass and surface terms."""

    def test_unit_triangle_stiffness(self, unit_triangle):
        K = assemble_scalar(unit_triangle, np.eye(2)).matrix.toarray()
        expected = 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]])
        assert np.allclose(K, expected, atol=1e-15)

    def test_unit_triangle_mass(self, unit_triangle):
        M = Assembler(unit_triangle).mass().toarray()
        expected = (0.5 / 12.0) * np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]])
        assert np.allclose(M, expected, atol=1e-15)

    def test_mass_only_system(self, unit_triangle):
        system = assemble_scalar(unit_triangle, 0.0, mass=1.0)
        assert system.matrix.toarray().sum() == pytest.approx(0.5)

    def test_stiffness_row_sums_vanish(self, cell_mesh):
        K = assemble_scalar(cell_mesh, [[2.0, 0.3], [0.3, 1.0]]).matrix
        assert np.abs(K @ np.ones(cell_mesh.n_nodes)).max() <= 1e-14 * abs(K).max() * 10

    def test_non_symmetric_coefficient_rejected(self, unit_triangle):
        with pytest.raises(ValidationError):
            assemble_scalar(unit_triangle, [[1.0, 0.5], [0.0, 1.0]])

    def test_lumped_mass_row_sums(self, cell_mesh):
        asm = Assembler(cell_mesh)
        consistent = asm.mass(2.0)
        lumped = asm.mass(2.0, lumped=True)
        assert np.allclose(lumped.diagonal(), np.asarray(consistent.sum(axis=1)).ravel())
        assert lumped.nnz == cell_mesh.n_nodes

    def test_load_integrates_area(self, cell_mesh):
        assert Assembler(cell_mesh).load(1.0).sum() == pytest.approx(cell_mesh.area, rel=1e-13)

    def test_surface_mass_total(self, cell_mesh):
        S = Assembler(cell_mesh).surface_mass(1.0)
        assert S.sum() == pytest.approx(cell_mesh.interface_length(), rel=1e-13)

    def test_surface_term_in_system(self, cell_mesh):
        plain = assemble_scalar(cell_mesh, 1.0).matrix
        with_surface = assemble_scalar(cell_mesh, 1.0, surface=3.0).matrix
        assert (with_surface - plain).sum() == pytest.approx(3.0 * cell_mesh.interface_length())

    def test_convection_of_constant(self, cell_mesh):
        """N 1 = int c (w . grad phi_i) since the hats sum to one."""
        asm = Assembler(cell_mesh)
        w = np.array([0.3, -0.7])
        N = asm.convection(2.0, w)
        assert np.allclose(N @ np.ones(cell_mesh.n_nodes), asm.flux_load(2.0 * w), atol=1e-14)

    def test_interpolation_of_linear_field(self, cell_mesh):
        asm = Assembler(cell_mesh)
        u = 2.0 * cell_mesh.nodes[:, 0] - cell_mesh.nodes[:, 1]
        assert np.allclose(asm.interpolate(u), 2.0 * asm.points[..., 0] - asm.points[..., 1])
        assert np.allclose(asm.gradient(u), [2.0, -1.0])


class TestElasticAssembly:
    """Tests for the vector stiffness matrix."""

    def test_rigid_motions_in_kernel(self, cell_mesh):
        K = assemble_elastic(cell_mesh, isotropic_tensor(1.0, 1.0)).matrix
        for mode in _rigid_motions(cell_mesh.nodes):
            assert np.abs(K @ mode).max() <= 1e-10

    def test_matches_hand_assembled_element(self, unit_triangle):
        """K = area B^T D B with engineering shear strain."""
        lam, mu = 1.0, 1.0
        K = assemble_elastic(unit_triangle, isotropic_tensor(lam, mu)).matrix.toarray()
        grads = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        B = np.zeros((3, 6))
        for a, (gx, gy) in enumerate(grads):
            B[:, 2 * a:2 * a + 2] = [[gx, 0.0], [0.0, gy], [gy, gx]]
        D = np.array([[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]])
        assert np.allclose(K, 0.5 * B.T @ D @ B, atol=1e-14)

    def test_zero_tensor_gives_zero_matrix(self, unit_triangle):
        K = assemble_elastic(unit_triangle, np.zeros((2, 2, 2, 2))).matrix
        assert abs(K).max() == 0.0

    def test_major_symmetry_violation(self, unit_triangle):
        C = isotropic_tensor(1.0, 1.0)
        C[0, 0, 1, 1] += 0.5
        with pytest.raises(ValidationError):
            assemble_elastic(unit_triangle, C)

    def test_stress_load_is_energy_gradient(self, cell_mesh):
        """K u = stress_load(C grad u) for a linear displacement."""
        asm = Assembler(cell_mesh)
        C = isotropic_tensor(2.0, 0.5)
        G = np.array([[0.1, 0.4], [-0.2, 0.3]])
        u = cell_mesh.nodes @ G.T
        K = asm.elastic(C)
        stress = np.einsum("ijkl,kl->ij", C, G)
        assert np.allclose(K @ u.ravel(), asm.stress_load(stress), atol=1e-12)


class TestPeriodicFold:
    """Tests for the periodic prolongation."""

    def test_fold_keeps_symmetry_and_kernel(self, cell_mesh):
        system = assemble_scalar(cell_mesh, 1.0)
        P = periodic_prolongation(cell_mesh)
        folded = periodic_fold(system.matrix, system.rhs, P)
        assert folded.is_symmetric()
        assert np.abs(folded.matrix @ np.ones(P.shape[1])).max() <= 1e-12

    def test_unknown_count(self):
        mesh = structured_mesh(4)
        assert periodic_prolongation(mesh).shape == (25, 16)
        assert periodic_prolongation(mesh, components=2).shape == (50, 32)
