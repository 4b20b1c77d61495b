"""eps-resolved reference simulation of the moving-boundary problem and micro-macro comparison."""

from thermo_homogenization.microsim.compare import (
    ErrorReport,
    compare_micro_macro,
    macro_cell_values,
)
from thermo_homogenization.microsim.elasticity import micro_elasticity_post, micro_elasticity_system
from thermo_homogenization.microsim.eps_mesh import EpsMesh, build_eps_mesh
from thermo_homogenization.microsim.fixed_point import (
    check_horizon,
    fixed_point_solve,
    time_horizon,
)
from thermo_homogenization.microsim.heat import (
    MicroHeatResult,
    MicroHeatSolver,
    StepDiagnostics,
    cell_average_velocities,
    cell_average_velocity,
    cell_means,
    check_cell_heights,
    micro_heat_solve,
)
from thermo_homogenization.microsim.runner import MicroRun, run_micro, write_micro_outputs
from thermo_homogenization.microsim.state import MicroConfig, MicroState

__all__ = [
    "EpsMesh",
    "ErrorReport",
    "MicroConfig",
    "MicroHeatResult",
    "MicroHeatSolver",
    "MicroRun",
    "MicroState",
    "StepDiagnostics",
    "build_eps_mesh",
    "cell_average_velocities",
    "cell_average_velocity",
    "cell_means",
    "check_cell_heights",
    "check_horizon",
    "compare_micro_macro",
    "fixed_point_solve",
    "macro_cell_values",
    "micro_elasticity_post",
    "micro_elasticity_system",
    "micro_heat_solve",
    "run_micro",
    "time_horizon",
    "write_micro_outputs",
]
