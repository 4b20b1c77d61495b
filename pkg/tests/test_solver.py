"""Tests for constrained systems and the linear solver."""

import numpy as np
import pytest
import scipy.sparse as sp

from thermo_homogenization.errors import ConvergenceError, ValidationError
from thermo_homogenization.fem import (
    TRIANGLE_7,
    Assembler,
    ConstraintMode,
    LinearSolver,
    SparseSystem,
    apply_dirichlet,
    periodic_prolongation,
    solve,
    structured_mesh,
    zero_mean_system,
    zero_mean_weights,
)


def _poisson_error(n):
    """L2 error of -lap u = 2 pi^2 sin(pi x) sin(pi y) with u = 0 on the boundary."""
    mesh = structured_mesh(n)
    asm = Assembler(mesh)
    x, y = asm.points[..., 0], asm.points[..., 1]
    f = 2.0 * np.pi**2 * np.sin(np.pi * x) * np.sin(np.pi * y)
    system = apply_dirichlet(asm.stiffness(1.0), asm.load(f), mesh.outer_nodes)
    u = LinearSolver(dense_limit=0).solve(system).x

    fine = Assembler(mesh, rule=TRIANGLE_7)
    xe, ye = fine.points[..., 0], fine.points[..., 1]
    diff = fine.interpolate(u) - np.sin(np.pi * xe) * np.sin(np.pi * ye)
    return np.sqrt(fine.integrate(diff**2))


class TestSmallSystems:
    """Closed-form solves."""

    def test_identity(self):
        system = SparseSystem(matrix=sp.identity(4, format="csr"), rhs=np.array([1.0, 0, 0, 0]))
        assert np.array_equal(solve(system), [1.0, 0.0, 0.0, 0.0])

    def test_tridiagonal(self):
        A = sp.diags([[-1.0, -1.0], [2.0, 2.0, 2.0], [-1.0, -1.0]], [-1, 0, 1], format="csr")
        x = solve(SparseSystem(matrix=A, rhs=np.ones(3)))
        assert np.allclose(x, [1.5, 2.0, 1.5], atol=1e-14)

    def test_zero_rhs_gives_zero(self):
        system = SparseSystem(matrix=sp.identity(3, format="csr"), rhs=np.zeros(3))
        result = LinearSolver().solve(system)
        assert result.method == "trivial"
        assert np.array_equal(result.x, np.zeros(3))

    def test_singular_matrix_raises(self):
        system = SparseSystem(matrix=sp.csr_matrix((2, 2)), rhs=np.ones(2))
        with pytest.raises(ConvergenceError):
            solve(system)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            SparseSystem(matrix=sp.identity(3, format="csr"), rhs=np.ones(2))

    def test_unknown_method(self):
        with pytest.raises(ValidationError):
            LinearSolver(method="gmres")


class TestConstraints:
    """Tests for Dirichlet elimination and zero-mean multipliers."""

    def test_dirichlet_values_kept(self):
        mesh = structured_mesh(8)
        asm = Assembler(mesh)
        boundary = mesh.outer_nodes
        system = apply_dirichlet(asm.stiffness(1.0), np.zeros(mesh.n_nodes), boundary, 2.5)
        assert system.mode == ConstraintMode.DIRICHLET
        u = solve(system)
        assert np.allclose(u, 2.5, atol=1e-10)

    def test_linear_field_reproduced(self):
        """P1 reproduces harmonic linear data exactly."""
        mesh = structured_mesh(6)
        boundary = mesh.outer_nodes
        exact = 1.0 + 2.0 * mesh.nodes[:, 0] - mesh.nodes[:, 1]
        system = apply_dirichlet(
            Assembler(mesh).stiffness(1.0), np.zeros(mesh.n_nodes), boundary, exact[boundary]
        )
        assert np.allclose(solve(system), exact, atol=1e-10)

    def test_zero_mean_periodic_solution(self):
        mesh = structured_mesh(16)
        asm = Assembler(mesh)
        x = asm.points[..., 0]
        P = periodic_prolongation(mesh)
        weights = asm.load(1.0)
        rhs = asm.load(np.cos(2 * np.pi * x))
        system = zero_mean_system(asm.stiffness(1.0), rhs, P, zero_mean_weights(weights))
        assert system.n_multipliers == 1
        result = LinearSolver(dense_limit=0).solve(system)
        assert result.method == "minres"
        u = result.x
        assert abs(weights @ u) <= 1e-10
        exact = np.cos(2 * np.pi * mesh.nodes[:, 0]) / (4 * np.pi**2)
        assert np.abs(u - exact).max() <= 0.05 * np.abs(exact).max()

    def test_vector_zero_mean_weights(self):
        W = zero_mean_weights(np.array([1.0, 2.0, 3.0]), components=2)
        assert W.shape == (6, 2)
        assert np.array_equal(W[:, 0], [1, 0, 2, 0, 3, 0])


class TestKrylov:
    """Tests for the iterative paths."""

    def test_cg_matches_direct(self):
        mesh = structured_mesh(20)
        asm = Assembler(mesh)
        system = apply_dirichlet(
            asm.stiffness(1.0) + asm.mass(1.0), asm.load(1.0), mesh.outer_nodes
        )
        direct = LinearSolver(method="direct").solve(system)
        iterative = LinearSolver(dense_limit=0).solve(system)
        assert iterative.method == "cg"
        assert iterative.iterations > 0
        assert np.allclose(iterative.x, direct.x, atol=1e-9)

    def test_non_symmetric_uses_bicgstab(self):
        mesh = structured_mesh(20)
        asm = Assembler(mesh)
        matrix = asm.stiffness(1.0) + asm.mass(1.0) + asm.convection(1.0, [0.5, 0.2])
        system = apply_dirichlet(matrix, asm.load(1.0), mesh.outer_nodes)
        result = LinearSolver(dense_limit=0).solve(system)
        assert result.method == "bicgstab"
        assert result.residual <= 1e-10


def test_poisson_convergence_order():
    """L2 error decreases at order >= 1.9 over three refinements."""
    errors = [_poisson_error(n) for n in (8, 16, 32)]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 1.9)
