"""Quasi-static elasticity on Omega_eps as a post-processing step of a micro run."""

from typing import Optional

import numpy as np

from thermo_homogenization.fem import LinearSolver, SparseSystem, apply_dirichlet, vector_dofs
from thermo_homogenization.geometry import Shape
from thermo_homogenization.microsim.heat import MicroHeatSolver
from thermo_homogenization.microsim.state import MicroState
from thermo_homogenization.params import PhysicalParams


def micro_elasticity_system(
    heat: MicroHeatSolver,
    theta: np.ndarray,
    h: np.ndarray,
    surface_stress: bool = True,
) -> SparseSystem:
    """Unconstrained system of the pulled-back elasticity problem.

        int C_r e(u) : grad v
            = int theta alpha_r : grad v + int f_r . v + eps^2 int_Gamma (H_r n) . v

    with n the reference normal pointing from the inclusion into the pore
    part, i.e. minus the outer normal of Omega_eps.
    """
    asm = heat.assembler
    eps_mesh = heat.eps_mesh
    coefficients = heat.cell_coefficients(h)
    stack = heat.stack
    C_r = stack(coefficients, "C_r")
    theta_q = asm.interpolate(theta)
    rhs = asm.stress_load(theta_q[..., None, None] * stack(coefficients, "alpha_r"))
    if any(not fi.is_zero for fi in heat.params.f):
        rhs = rhs + asm.vector_load(stack(coefficients, "f_r"))
    edges = eps_mesh.interface_edges
    if surface_stress and heat.params.sigma0 and len(edges):
        traction = np.einsum(
            "eqij,eqj->eqi", stack(coefficients, "H_r"), stack(coefficients, "surface_normals")
        )
        rhs = rhs + eps_mesh.eps**2 * asm.surface_vector_load(traction, edges)
    return SparseSystem(matrix=asm.elastic(C_r, check_minor=False), rhs=rhs)


def micro_elasticity_post(
    state: MicroState,
    shape: Optional[Shape],
    params: PhysicalParams,
    t: float,
    surface_stress: bool = True,
    solver: Optional[LinearSolver] = None,
    heat: Optional[MicroHeatSolver] = None,
) -> np.ndarray:
    """
    Displacement u_r on the reference mesh at time t of a micro run.

    The pulled-back stiffness has only the major symmetry. The curvature
    stress uses kappa_eps = kappa / eps on the interface edges, weighted
    by eps^2; u_r = 0 on the outer boundary.

    Args:
        state: Micro run (theta_r and the cell heights)
        shape: Inclusion of the reference cell
        params: Material data (sigma0, alpha, f)
        t: A time level of the run
        surface_stress: Include the curvature surface stress
        solver: Linear solver (sparse direct by default)
        heat: Solver whose assembler and cell transform are reused

    Returns:
        Nodal displacement (nv, 2)
    """
    heat = heat or MicroHeatSolver(state.eps_mesh, shape, params)
    m = state.step_index(t)
    system = micro_elasticity_system(heat, state.theta[m], state.h[m], surface_stress)
    mesh = state.eps_mesh.mesh
    fixed = vector_dofs(mesh.outer_nodes[:, None]).ravel()
    constrained = apply_dirichlet(system.matrix, system.rhs, fixed)
    return (solver or LinearSolver(method="direct")).solve(constrained).x.reshape(-1, 2)

