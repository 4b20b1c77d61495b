"""Thermo Homogenization - Two-scale heat, growth and elasticity in evolving porous media."""

__version__ = "1.0.0"

from thermo_homogenization.config import Config
from thermo_homogenization.params import PhysicalParams

__all__ = ["Config", "PhysicalParams", "__version__"]
