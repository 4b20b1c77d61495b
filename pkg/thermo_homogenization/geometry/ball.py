"""Circle (2D) and sphere (3D) inclusions with closed-form geometry."""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.geometry.base import Projection, Shape, as_points


class Ball(Shape):
    """Ball of radius ``radius`` about ``center``; the level set is |y-c|²/r² - 1."""

    kind = "ball"

    def __init__(
        self,
        center: Any = (0.5, 0.5),
        radius: float = 0.25,
        a1: Optional[float] = None,
        a2: Optional[float] = None,
    ) -> None:
        super().__init__(center, a1=a1, a2=a2)
        self.radius = float(radius)
        if not self.radius > 0:
            raise ValidationError(f"Ball radius must be positive, got {radius}")
        gap = self.face_distance - self.radius
        if not gap > 0:
            raise ValidationError(
                "Inclusion closure must lie strictly inside the unit cell",
                {"center": self.center, "radius": self.radius},
            )

    @property
    def face_distance(self) -> float:
        """Distance from the center to the nearest cell face."""
        return float(np.minimum(self.center, 1.0 - self.center).min())

    def natural_radii(self) -> Tuple[float, float]:
        return self.radius, self.face_distance - self.radius

    def level_set(self, y: np.ndarray) -> np.ndarray:
        diff = np.atleast_2d(y) - self.center
        return np.einsum("ni,ni->n", diff, diff) / self.radius**2 - 1.0

    def level_set_gradient(self, y: np.ndarray) -> np.ndarray:
        return 2.0 * (np.atleast_2d(y) - self.center) / self.radius**2

    def level_set_hessian(self, y: np.ndarray) -> np.ndarray:
        n = len(np.atleast_2d(y))
        hessian = 2.0 * np.eye(self.dim) / self.radius**2
        return np.broadcast_to(hessian, (n, self.dim, self.dim)).copy()

    def radial_point(self, directions: np.ndarray) -> np.ndarray:
        return self.center + self.radius * np.atleast_2d(directions)

    def weingarten(self, gamma: np.ndarray) -> np.ndarray:
        n = self.unit_normal(gamma)
        tangential = np.eye(self.dim)[None] - np.einsum("ni,nj->nij", n, n)
        return -tangential / self.radius

    def closest_point(self, y: Any) -> Projection:
        pts, _ = as_points(y, self.dim)
        diff = pts - self.center
        rho = np.linalg.norm(diff, axis=1)
        centered = rho == 0.0
        safe = np.where(centered, 1.0, rho)
        normals = np.where(centered[:, None], 0.0, diff / safe[:, None])
        points = self.center + self.radius * normals
        points[centered] = np.nan
        distance = rho - self.radius
        in_band = self.band_mask(distance) & ~centered
        return Projection(points=points, distance=distance, normals=normals, in_band=in_band)

    def interface_measure(self, h: float = 0.0, n: int = 1024) -> float:
        R = self.radius + h
        return 2.0 * np.pi * R if self.dim == 2 else 4.0 * np.pi * R**2

    def inclusion_volume(self, h: float = 0.0, n: int = 1024) -> float:
        R = self.radius + h
        return np.pi * R**2 if self.dim == 2 else 4.0 / 3.0 * np.pi * R**3

    def sup_weingarten_norm(self, n: int = 4096) -> float:
        return 1.0 / self.radius

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "circle" if self.dim == 2 else "sphere",
            "center": self.center.tolist(),
            "radius": self.radius,
            "a1": self.a1,
            "a2": self.a2,
        }
