"""Homogenized (macroscopic) solver: heat with evolving coefficients, elasticity, height update."""

from thermo_homogenization.macrosolver.mms import MMSResult, mms_study
from thermo_homogenization.macrosolver.reference import (
    UniformTrajectory,
    uniform_euler,
    uniform_rk4,
)
from thermo_homogenization.macrosolver.runner import (
    MacroRun,
    check_heights,
    picard_threshold,
    run_macro,
)
from thermo_homogenization.macrosolver.state import MacroConfig, MacroState
from thermo_homogenization.macrosolver.steps import (
    elasticity_load,
    elasticity_system,
    heat_content,
    heat_system,
    solve_elasticity,
    step_heat,
    update_height,
)

__all__ = [
    "MMSResult",
    "MacroConfig",
    "MacroRun",
    "MacroState",
    "UniformTrajectory",
    "check_heights",
    "elasticity_load",
    "elasticity_system",
    "heat_content",
    "heat_system",
    "mms_study",
    "picard_threshold",
    "run_macro",
    "solve_elasticity",
    "step_heat",
    "uniform_euler",
    "uniform_rk4",
    "update_height",
]
