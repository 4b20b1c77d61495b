"""geom probe: closest-point, curvature and transform data at sample points."""

import argparse
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.errors import ValidationError
from thermo_homogenization.geometry import HanzawaTransform, Shape, offset_curvature


def read_points(path: Path, dim: int) -> np.ndarray:
    """Points from a CSV file with one point per row; ``#`` lines are comments.

    Raises:
        ValidationError: If the file is missing or rows have the wrong width
    """
    if not path.exists():
        raise ValidationError(f"Point file not found: {path}", {"path": str(path)})
    try:
        points = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    except ValueError as e:
        raise ValidationError(f"Unreadable point file {path}: {e}", {"path": str(path)}) from e
    if points.shape[1] != dim:
        raise ValidationError(
            f"Points in {path} have {points.shape[1]} coordinates, the shape has dimension {dim}",
            {"path": str(path), "columns": points.shape[1]},
        )
    return points


def probe(shape: Shape, h: float, points: np.ndarray) -> List[Dict[str, Any]]:
    """One record per point; P, n, L_eigs and kappa are None outside the tubular band."""
    projection = shape.closest_point(points)
    transform = HanzawaTransform(shape, h)
    mapped = transform.map(points)
    F, J = transform.jacobian(points)

    records = []
    for i, x in enumerate(points):
        record: Dict[str, Any] = {
            "x": x,
            "d": float(projection.distance[i]),
            "P": None,
            "n": None,
            "L_eigs": None,
            "kappa": None,
            "s": mapped[i],
            "F": F[i],
            "J": float(J[i]),
        }
        if projection.in_band[i]:
            gamma = projection.points[i:i + 1]
            L = shape.weingarten(gamma)
            record.update(
                P=gamma[0],
                n=projection.normals[i],
                L_eigs=np.linalg.eigvalsh(L[0]),
                kappa=float(offset_curvature(L, h)[0]),
            )
        records.append(record)
    return records


class GeomProbeCommand(BaseCommand):
    """Evaluate geometry primitives of the configured shape at a list of points."""

    name = "geom probe"
    description = "Distance, projection, curvature and Hanzawa map at CSV points"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--points", type=Path, required=True, help="CSV file, one point per row"
        )
        parser.add_argument("--h", type=float, default=0.0, help="Interface height (default: 0)")

    def run(self) -> bool:
        shape = self.shape
        if shape is None:
            raise ValidationError("geom probe needs an inclusion (shape.kind is none)")
        points = read_points(self.args.points, shape.dim)
        records = probe(shape, self.args.h, points)
        self.logger.info(f"Probed {len(records)} points at h={self.args.h:g}")
        self.emit(records, "probe.json")
        return True
