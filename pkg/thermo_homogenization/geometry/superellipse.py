"""Superellipse (2D) and superellipsoid (3D) inclusions with Newton projection."""

from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from thermo_homogenization.errors import ProjectionError, ValidationError
from thermo_homogenization.geometry.base import Projection, Shape, as_points

RADII_SAFETY = 0.9
# Radii are capped so that |s| |L| <= 0.9 for |s| <= max(a1, a2) / 2.
SPECTRAL_CAP = 1.8


def fibonacci_sphere(n: int) -> np.ndarray:
    """Quasi-uniform unit vectors on the sphere."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (1.0 + 5.0**0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def circle_directions(n: int) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(angles), np.sin(angles)])


class Superellipse(Shape):
    """Level set rho(y) = sum_i |(y_i - c_i) / a_i|^p - 1 with exponent p >= 4."""

    kind = "superellipse"

    def __init__(
        self,
        center: Any = (0.5, 0.5),
        semi_axes: Any = (0.25, 0.25),
        exponent: float = 4.0,
        a1: Optional[float] = None,
        a2: Optional[float] = None,
        newton_tol: float = 1e-13,
        max_iter: int = 50,
    ) -> None:
        super().__init__(center, a1=a1, a2=a2)
        self.semi_axes = np.asarray(semi_axes, dtype=float)
        self.exponent = float(exponent)
        self.newton_tol = newton_tol
        self.max_iter = max_iter
        if self.semi_axes.shape != self.center.shape or (self.semi_axes <= 0).any():
            raise ValidationError(f"Invalid semi-axes {semi_axes!r} for center {center!r}")
        if self.exponent < 4.0:
            raise ValidationError(f"Superellipse exponent must be >= 4, got {exponent}")
        low = self.center - self.semi_axes
        high = self.center + self.semi_axes
        if (low <= 0.0).any() or (high >= 1.0).any():
            raise ValidationError(
                "Inclusion closure must lie strictly inside the unit cell",
                {"center": self.center, "semi_axes": self.semi_axes},
            )
        n_seed = 4096 if self.dim == 2 else 20000
        self._seed_points = self.radial_point(
            circle_directions(n_seed) if self.dim == 2 else fibonacci_sphere(n_seed)
        )
        self._tree = cKDTree(self._seed_points)
        nn_dist, _ = self._tree.query(self._seed_points, k=2)
        self._seed_spacing = 2.0 * float(nn_dist[:, 1].max())

    # ------------------------------------------------------------------
    # Level set
    # ------------------------------------------------------------------

    def _scaled(self, y: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(y) - self.center) / self.semi_axes

    def level_set(self, y: np.ndarray) -> np.ndarray:
        return (np.abs(self._scaled(y)) ** self.exponent).sum(axis=1) - 1.0

    def level_set_gradient(self, y: np.ndarray) -> np.ndarray:
        u = self._scaled(y)
        p = self.exponent
        return p * np.abs(u) ** (p - 1.0) * np.sign(u) / self.semi_axes

    def level_set_hessian(self, y: np.ndarray) -> np.ndarray:
        u = self._scaled(y)
        p = self.exponent
        diag = p * (p - 1.0) * np.abs(u) ** (p - 2.0) / self.semi_axes**2
        out = np.zeros((len(u), self.dim, self.dim))
        idx = np.arange(self.dim)
        out[:, idx, idx] = diag
        return out

    def radial_point(self, directions: np.ndarray) -> np.ndarray:
        omega = np.atleast_2d(directions)
        t = (np.abs(omega / self.semi_axes) ** self.exponent).sum(axis=1) ** (-1.0 / self.exponent)
        return self.center + t[:, None] * omega

    # ------------------------------------------------------------------
    # Projection
    # ------------------------------------------------------------------

    def closest_point(self, y: Any) -> Projection:
        """Batch Lagrange-Newton on [gamma + mu grad rho(gamma) - y, rho(gamma)] = 0."""
        pts, _ = as_points(y, self.dim)
        n_pts, dim = pts.shape
        seed_dist, seed_idx = self._tree.query(pts)
        inside = self.level_set(pts) < 0.0
        sign = np.where(inside, -1.0, 1.0)
        lower = seed_dist - self._seed_spacing
        radius = np.where(inside, self.a1, self.a2)
        far = lower >= radius

        points = np.full((n_pts, dim), np.nan)
        normals = np.zeros((n_pts, dim))
        distance = sign * np.maximum(lower, 0.0)

        active = np.flatnonzero(~far)
        if active.size:
            gamma, d, n = self._newton(pts[active], self._seed_points[seed_idx[active]])
            points[active] = gamma
            normals[active] = n
            distance[active] = d

        in_band = self.band_mask(distance) & ~far
        return Projection(points=points, distance=distance, normals=normals, in_band=in_band)

    def _newton(self, y: np.ndarray, gamma0: np.ndarray) -> Tuple[np.ndarray, ...]:
        dim = self.dim
        gamma = gamma0.copy()
        g = self.level_set_gradient(gamma)
        mu = np.einsum("ni,ni->n", y - gamma, g) / np.einsum("ni,ni->n", g, g)
        scale = max(1.0, float(np.abs(y).max()))
        converged = np.zeros(len(y), dtype=bool)

        for _ in range(self.max_iter):
            g = self.level_set_gradient(gamma)
            res = np.concatenate(
                [gamma + mu[:, None] * g - y, self.level_set(gamma)[:, None]], axis=1
            )
            norm = np.abs(res).max(axis=1)
            converged = norm <= self.newton_tol * scale
            if converged.all():
                break
            work = ~converged
            H = self.level_set_hessian(gamma[work])
            jac = np.zeros((int(work.sum()), dim + 1, dim + 1))
            jac[:, :dim, :dim] = np.eye(dim)[None] + mu[work, None, None] * H
            jac[:, :dim, dim] = g[work]
            jac[:, dim, :dim] = g[work]
            step = np.linalg.solve(jac, -res[work][:, :, None])[:, :, 0]
            gamma[work] += step[:, :dim]
            mu[work] += step[:, dim]

        if not converged.all():
            bad = int(np.flatnonzero(~converged)[0])
            raise ProjectionError(
                f"Newton projection did not converge in {self.max_iter} iterations",
                {"point": y[bad], "residual": float(norm[bad])},
            )

        normals = self.unit_normal(gamma)
        distance = np.einsum("ni,ni->n", y - gamma, normals)
        return gamma, distance, normals

    # ------------------------------------------------------------------
    # Tubular radii
    # ------------------------------------------------------------------

    def natural_radii(self) -> Tuple[float, float]:
        """Ball-condition radii from a boundary sampling, scaled by RADII_SAFETY."""
        n = 2048 if self.dim == 2 else 3000
        directions = circle_directions(n) if self.dim == 2 else fibonacci_sphere(n)
        gamma = self.radial_point(directions)
        normals = self.unit_normal(gamma)

        interior = np.inf
        exterior = np.inf
        for start in range(0, n, 256):
            block = slice(start, start + 256)
            delta = gamma[None, :, :] - gamma[block, None, :]
            dist2 = np.einsum("bmi,bmi->bm", delta, delta)
            along = np.einsum("bmi,bi->bm", delta, normals[block])
            with np.errstate(divide="ignore", invalid="ignore"):
                inner = np.where(along < 0.0, dist2 / (-2.0 * along), np.inf)
                outer = np.where(along > 0.0, dist2 / (2.0 * along), np.inf)
            interior = min(interior, float(inner.min()))
            exterior = min(exterior, float(outer.min()))

        to_faces = float(np.minimum(gamma, 1.0 - gamma).min())
        cap = SPECTRAL_CAP / float(np.abs(np.linalg.eigvalsh(self.weingarten(gamma))).max())
        a1 = min(RADII_SAFETY * interior, cap)
        a2 = min(RADII_SAFETY * min(exterior, to_faces), cap)
        return a1, a2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "superellipse",
            "center": self.center.tolist(),
            "semi_axes": self.semi_axes.tolist(),
            "exponent": self.exponent,
            "a1": self.a1,
            "a2": self.a2,
        }
