"""Periodic cell problems and effective coefficients."""

from thermo_homogenization.cellhomog.cell_problems import (
    CellProblem,
    CellSolution,
    solve_elastic_cell,
    solve_thermal_cell,
)
from thermo_homogenization.cellhomog.effective import (
    COMPONENTS,
    EffectiveCoefficients,
    effective_coeffs,
    effective_from_problem,
    remeshed_conductivity,
    surface_integrals,
)
from thermo_homogenization.cellhomog.pullback import (
    CellTransform,
    TransformedCoefficients,
    pullback_coefficients,
)

__all__ = [
    "COMPONENTS",
    "CellProblem",
    "CellSolution",
    "CellTransform",
    "EffectiveCoefficients",
    "TransformedCoefficients",
    "effective_coeffs",
    "effective_from_problem",
    "pullback_coefficients",
    "remeshed_conductivity",
    "solve_elastic_cell",
    "solve_thermal_cell",
    "surface_integrals",
]
