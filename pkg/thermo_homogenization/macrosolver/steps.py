"""Single-step operators of the homogenized system: heat, elasticity and height update."""

from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp

from thermo_homogenization.fem import (
    Assembler,
    LinearSolver,
    SparseSystem,
    apply_dirichlet,
    vector_dofs,
)
from thermo_homogenization.macrosolver.state import MacroState
from thermo_homogenization.params import PhysicalParams
from thermo_homogenization.tables import CoefficientTable


def coefficient_fields(
    asm: Assembler, table: CoefficientTable, h: np.ndarray
) -> Dict[str, np.ndarray]:
    """Table lookup at the quadrature points of the P1 interpolant of nodal h.

    Raises:
        AdmissibilityError: If an interpolated height leaves the table range
    """
    return table.fields(asm.interpolate(h))


def source_values(asm: Assembler, params: PhysicalParams) -> Dict[str, np.ndarray]:
    """Heat source g and body force f at the quadrature points."""
    points = asm.points
    g = np.broadcast_to(params.g(points), points.shape[:-1])
    f = np.stack([np.broadcast_to(fi(points), points.shape[:-1]) for fi in params.f], axis=-1)
    return {"g": g, "f": f}


# =============================================================================
# Heat
# =============================================================================


def heat_system(
    asm: Assembler,
    table: CoefficientTable,
    params: PhysicalParams,
    dt: float,
    theta_old: np.ndarray,
    h_old: np.ndarray,
    h_new: np.ndarray,
    lumped: bool = False,
) -> SparseSystem:
    """Implicit Euler system of the heat equation with natural boundary conditions.

    The time derivative is the difference of the products c*phi*theta at
    both time levels, so with L = 0 and g = 0 the sum of M[c phi] theta is
    conserved exactly.
    """
    old = coefficient_fields(asm, table, h_old)
    new = coefficient_fields(asm, table, h_new)
    capacity = params.heat_capacity
    M_old = asm.mass(capacity * old["phi"], lumped=lumped)
    M_new = asm.mass(capacity * new["phi"], lumped=lumped)
    matrix = M_new / dt + asm.stiffness(new["K"])
    rhs = M_old @ theta_old / dt
    if params.latent_heat:
        matrix = matrix + asm.mass(params.latent_heat * new["phi_gamma"], lumped=lumped)
    if not params.g.is_zero:
        rhs = rhs + asm.load(new["phi"] * source_values(asm, params)["g"])
    return SparseSystem(matrix=sp.csr_matrix(matrix), rhs=rhs)


def step_heat(
    state: MacroState,
    table: CoefficientTable,
    params: PhysicalParams,
    dt: float,
    h_new: np.ndarray,
    assembler: Optional[Assembler] = None,
    solver: Optional[LinearSolver] = None,
    lumped: bool = False,
) -> np.ndarray:
    """
    Advance theta by one implicit step with the geometry at ``h_new``.

    Args:
        state: Current state (theta and h at the old time)
        table: Effective coefficient table
        params: Material data and sources
        dt: Time step
        h_new: Nodal heights at the new time
        assembler: Cached assembler of ``state.mesh``
        solver: Linear solver
        lumped: Lumped mass for the capacity and reaction terms

    Returns:
        Nodal theta at the new time

    Raises:
        AdmissibilityError: If h leaves the table range
        ConvergenceError: If the linear solve fails
    """
    asm = assembler or Assembler(state.mesh)
    system = heat_system(asm, table, params, dt, state.theta, state.h, h_new, lumped=lumped)
    return (solver or LinearSolver()).solve(system).x


def heat_content(
    asm: Assembler,
    table: CoefficientTable,
    params: PhysicalParams,
    theta: np.ndarray,
    h: np.ndarray,
    lumped: bool = False,
) -> float:
    """Discrete total heat: sum of M[c phi(h)] theta."""
    phi = coefficient_fields(asm, table, h)["phi"]
    return float((asm.mass(params.heat_capacity * phi, lumped=lumped) @ theta).sum())


# =============================================================================
# Elasticity
# =============================================================================


def elasticity_load(
    asm: Assembler,
    fields: Dict[str, np.ndarray],
    theta: np.ndarray,
    params: PhysicalParams,
) -> np.ndarray:
    """Thermal stress, body force and surface stress.

    b(v) = int theta alpha phi div v + int (phi f + H*) . v
    """
    theta_q = asm.interpolate(theta)
    stress = (params.alpha * theta_q * fields["phi"])[..., None, None] * np.eye(2)
    body = fields["phi"][..., None] * source_values(asm, params)["f"] + fields["H"]
    return asm.stress_load(stress) + asm.vector_load(body)


def elasticity_system(
    asm: Assembler,
    table: CoefficientTable,
    params: PhysicalParams,
    theta: np.ndarray,
    h: np.ndarray,
) -> SparseSystem:
    """Unconstrained system with stiffness C*(h); dofs are 2*node + component."""
    fields = coefficient_fields(asm, table, h)
    return SparseSystem(
        matrix=asm.elastic(fields["C"]), rhs=elasticity_load(asm, fields, theta, params)
    )


def solve_elasticity(
    state: MacroState,
    table: CoefficientTable,
    params: PhysicalParams,
    assembler: Optional[Assembler] = None,
    solver: Optional[LinearSolver] = None,
) -> np.ndarray:
    """
    Quasi-static displacement for the current theta and h, u = 0 on the boundary.

    Returns:
        Nodal displacement (nv, 2)
    """
    asm = assembler or Assembler(state.mesh)
    system = elasticity_system(asm, table, params, state.theta, state.h)
    fixed = vector_dofs(state.mesh.outer_nodes[:, None]).ravel()
    constrained = apply_dirichlet(system.matrix, system.rhs, fixed)
    return (solver or LinearSolver()).solve(constrained).x.reshape(-1, 2)


# =============================================================================
# Height
# =============================================================================


def update_height(h_old: np.ndarray, theta_new: np.ndarray, dt: float) -> np.ndarray:
    """h_new = h_old + dt * theta_new at every node (velocity v = theta)."""
    return np.asarray(h_old, dtype=float) + dt * np.asarray(theta_new, dtype=float)
