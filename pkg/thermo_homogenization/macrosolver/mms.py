"""Manufactured-solution convergence study for the P1 solver."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from thermo_homogenization.fem import (
    TRIANGLE_7,
    Assembler,
    LinearSolver,
    apply_dirichlet,
    structured_mesh,
)
from thermo_homogenization.logger import log_debug

# L2 order a P1 discretization must show on smooth data.
EXPECTED_ORDER = 1.9


def exact_solution(points: np.ndarray) -> np.ndarray:
    """u = sin(pi x) sin(pi y), zero on the boundary of the unit square."""
    return np.sin(np.pi * points[..., 0]) * np.sin(np.pi * points[..., 1])


@dataclass
class MMSResult:
    """Errors and observed orders of a refinement sequence."""

    sizes: List[float] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)

    @property
    def orders(self) -> List[float]:
        return [
            float(
                np.log(self.errors[i] / self.errors[i + 1])
                / np.log(self.sizes[i] / self.sizes[i + 1])
            )
            for i in range(len(self.errors) - 1)
        ]

    @property
    def success(self) -> bool:
        return bool(self.orders) and min(self.orders) >= EXPECTED_ORDER

    def to_dict(self) -> dict:
        return {
            "sizes": self.sizes,
            "errors": self.errors,
            "orders": self.orders,
            "success": self.success,
        }


def l2_error(
    n: int,
    conductivity: float = 1.0,
    reaction: float = 0.0,
    solver: Optional[LinearSolver] = None,
) -> float:
    """
    Solve -div(k grad u) + m u = f with the exact solution above on an n x n mesh.

    Load and error use the degree-5 rule, so quadrature error stays below
    the discretization error.
    """
    mesh = structured_mesh(n)
    asm = Assembler(mesh, rule=TRIANGLE_7)
    u_q = exact_solution(asm.points)
    f = (2.0 * np.pi ** 2 * conductivity + reaction) * u_q
    matrix = asm.stiffness(conductivity)
    if reaction:
        matrix = matrix + asm.mass(reaction)
    system = apply_dirichlet(matrix, asm.load(f), mesh.outer_nodes)
    u_h = (solver or LinearSolver()).solve(system).x
    return float(np.sqrt(asm.integrate((asm.interpolate(u_h) - u_q) ** 2)))


def mms_study(
    levels: Sequence[int] = (8, 16, 32, 64),
    conductivity: float = 1.0,
    reaction: float = 0.0,
    solver: Optional[LinearSolver] = None,
) -> MMSResult:
    """L2 errors over structured meshes with ``levels`` squares per side."""
    result = MMSResult()
    for n in levels:
        error = l2_error(n, conductivity, reaction, solver)
        result.sizes.append(1.0 / n)
        result.errors.append(error)
        log_debug(f"mms n={n}: L2 error {error:.4e}")
    return result
