"""Precomputed effective coefficient tables."""

from thermo_homogenization.tables.table import (
    FORMAT_VERSION,
    MODES,
    CoefficientTable,
    build_table,
    default_grid,
    interpolate,
    load_table,
    params_fingerprint,
    save_table,
)

__all__ = [
    "FORMAT_VERSION",
    "MODES",
    "CoefficientTable",
    "build_table",
    "default_grid",
    "interpolate",
    "load_table",
    "params_fingerprint",
    "save_table",
]
