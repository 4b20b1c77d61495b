"""P1 finite elements: meshes, assembly, constraints and linear solves."""

from thermo_homogenization.fem.assembly import (
    Assembler,
    assemble_elastic,
    assemble_scalar,
    vector_dofs,
)
from thermo_homogenization.fem.constraints import (
    ConstraintMode,
    SparseSystem,
    apply_dirichlet,
    periodic_fold,
    periodic_prolongation,
    zero_mean_system,
    zero_mean_weights,
)
from thermo_homogenization.fem.mesh import (
    INTERFACE,
    OUTER,
    Mesh,
    MeshReport,
    check_mesh,
    read_mesh,
    write_mesh,
)
from thermo_homogenization.fem.meshing import (
    generate_cell_mesh,
    generate_macro_mesh,
    structured_mesh,
)
from thermo_homogenization.fem.quadrature import EDGE_2, TRIANGLE_3, TRIANGLE_7
from thermo_homogenization.fem.solver import LinearSolver, SolveResult, solve

__all__ = [
    "Assembler",
    "ConstraintMode",
    "EDGE_2",
    "INTERFACE",
    "LinearSolver",
    "Mesh",
    "MeshReport",
    "OUTER",
    "SolveResult",
    "SparseSystem",
    "TRIANGLE_3",
    "TRIANGLE_7",
    "apply_dirichlet",
    "assemble_elastic",
    "assemble_scalar",
    "check_mesh",
    "generate_cell_mesh",
    "generate_macro_mesh",
    "periodic_fold",
    "periodic_prolongation",
    "read_mesh",
    "solve",
    "structured_mesh",
    "vector_dofs",
    "write_mesh",
    "zero_mean_system",
    "zero_mean_weights",
]
