"""Interface geometry and Hanzawa transforms."""

from thermo_homogenization.geometry.ball import Ball
from thermo_homogenization.geometry.base import Projection, Shape, offset_curvature
from thermo_homogenization.geometry.cutoff import Cutoff
from thermo_homogenization.geometry.factory import create_shape, shape_descriptor
from thermo_homogenization.geometry.hanzawa import HanzawaTransform, PrecomputedTransform
from thermo_homogenization.geometry.indexing import CellIndexing
from thermo_homogenization.geometry.superellipse import Superellipse

__all__ = [
    "Ball",
    "CellIndexing",
    "Cutoff",
    "HanzawaTransform",
    "PrecomputedTransform",
    "Projection",
    "Shape",
    "Superellipse",
    "create_shape",
    "offset_curvature",
    "shape_descriptor",
]
