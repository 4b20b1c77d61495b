"""Height-parametrized Hanzawa transform of the unit cell."""

from typing import Any, Optional, Tuple

import numpy as np

from thermo_homogenization.errors import ConvergenceError
from thermo_homogenization.geometry.base import Shape, _squeeze, as_points, offset_surface_jacobian
from thermo_homogenization.geometry.cutoff import Cutoff


class PrecomputedTransform:
    """h-independent part of the Hanzawa map on a fixed point set.

    With G = chi'(d) n n^T + chi(d) D²d and D²d = -L (Id - d L)^-1 the transform
    is s = x + h chi(d) n(P(x)) and its Jacobian is F(h) = Id + h G, so one
    projection serves every height value.
    """

    def __init__(self, shape: Shape, points: Any, cutoff: Optional[Cutoff] = None) -> None:
        self.shape = shape
        self.cutoff = cutoff or Cutoff(shape.a1, shape.a2)
        self.points, _ = as_points(points, shape.dim)
        dim = shape.dim
        n_pts = len(self.points)

        proj = shape.closest_point(self.points)
        self.distance = proj.distance
        self.chi = self.cutoff.value(proj.distance)
        self.dchi = self.cutoff.derivative(proj.distance)
        self.support = (self.chi != 0.0) | (self.dchi != 0.0)
        self.normals = np.where(self.support[:, None], proj.normals, 0.0)

        self.G = np.zeros((n_pts, dim, dim))
        self.weingarten = np.zeros((n_pts, dim, dim))
        idx = np.flatnonzero(self.support)
        if idx.size:
            gamma = proj.points[idx]
            L = shape.weingarten(gamma)
            eye = np.eye(dim)[None]
            M = np.linalg.inv(eye - self.distance[idx, None, None] * L)
            hess_d = -L @ M
            hess_d = 0.5 * (hess_d + np.transpose(hess_d, (0, 2, 1)))
            n = self.normals[idx]
            self.G[idx] = (
                self.dchi[idx, None, None] * np.einsum("ni,nj->nij", n, n)
                + self.chi[idx, None, None] * hess_d
            )
            self.weingarten[idx] = L

    def __len__(self) -> int:
        return len(self.points)

    def displacement(self, h: float) -> np.ndarray:
        return h * self.chi[:, None] * self.normals

    def map(self, h: float) -> np.ndarray:
        """s(x) for every stored point."""
        return self.points + self.displacement(h)

    def deformation_gradient(self, h: float) -> np.ndarray:
        return np.eye(self.shape.dim)[None] + h * self.G

    def jacobian(self, h: float) -> Tuple[np.ndarray, np.ndarray]:
        """(F, J) with F = Id + h G and J = det F."""
        F = self.deformation_gradient(h)
        return F, np.linalg.det(F)

    def velocity(self, v: float) -> np.ndarray:
        """d/dt s for a height changing at rate v (unit cell scale)."""
        return v * self.chi[:, None] * self.normals

    def curvature(self, h: float) -> np.ndarray:
        """kappa(h, P(x)) on the support (zero elsewhere)."""
        out = np.zeros(len(self.points))
        idx = np.flatnonzero(self.support)
        if idx.size:
            L = self.weingarten[idx]
            A = np.eye(self.shape.dim)[None] - h * L
            out[idx] = np.trace(np.linalg.solve(A, L), axis1=1, axis2=2)
        return out


class HanzawaTransform:
    """Hanzawa transform of the cell for a uniform height ``h``."""

    def __init__(self, shape: Shape, h: float, cutoff: Optional[Cutoff] = None) -> None:
        shape.check_height(h)
        self.shape = shape
        self.h = float(h)
        self.cutoff = cutoff or Cutoff(shape.a1, shape.a2)

    def precompute(self, x: Any) -> PrecomputedTransform:
        return PrecomputedTransform(self.shape, x, self.cutoff)

    def map(self, x: Any) -> Any:
        """s(x) = x + h chi(d(x)) n(P(x))."""
        pts, single = as_points(x, self.shape.dim)
        return _squeeze(self.precompute(pts).map(self.h), single)

    def jacobian(self, x: Any) -> Tuple[Any, Any]:
        """(F, J) assembled from the analytic chain rule."""
        pts, single = as_points(x, self.shape.dim)
        F, J = self.precompute(pts).jacobian(self.h)
        return _squeeze(F, single), _squeeze(J, single)

    def inverse(self, y: Any, tol: float = 1e-12, max_iter: int = 50) -> Any:
        """Solve s(x) = y by damped Newton seeded with y - h chi(d(y)) n(P(y))."""
        pts, single = as_points(y, self.shape.dim)
        if self.h == 0.0:
            return _squeeze(pts.copy(), single)

        x = pts - self.precompute(pts).displacement(self.h)
        pre = self.precompute(x)
        res = pre.map(self.h) - pts
        norm = np.linalg.norm(res, axis=1)
        for _ in range(max_iter):
            work = norm > 0.1 * tol
            if not work.any():
                break
            F, _ = pre.jacobian(self.h)
            step = -np.linalg.solve(F[work], res[work][:, :, None])[:, :, 0]
            damping = np.ones(int(work.sum()))
            candidate = x[work] + step
            for _ in range(10):
                trial = self.precompute(candidate)
                trial_res = trial.map(self.h) - pts[work]
                trial_norm = np.linalg.norm(trial_res, axis=1)
                worse = trial_norm > norm[work]
                if not worse.any():
                    break
                damping[worse] *= 0.5
                candidate = x[work] + damping[:, None] * step
            x[work] = candidate
            pre = self.precompute(x)
            res = pre.map(self.h) - pts
            norm = np.linalg.norm(res, axis=1)

        if norm.max() > tol:
            worst = int(np.argmax(norm))
            raise ConvergenceError(
                "Inverse Hanzawa map did not converge",
                {"point": pts[worst], "residual": float(norm[worst]), "h": self.h},
            )
        return _squeeze(x, single)

    def velocity(self, x: Any, v: float) -> Any:
        """d/dt s at x for height rate v."""
        pts, single = as_points(x, self.shape.dim)
        return _squeeze(self.precompute(pts).velocity(v), single)

    def curvature(self, gamma: Any) -> Any:
        return self.shape.curvature(self.h, gamma)

    def surface_jacobian(self, gamma: Any) -> Any:
        """det(Id - h L(gamma)), the area ratio between Gamma(h) and Gamma."""
        pts, single = as_points(gamma, self.shape.dim)
        return _squeeze(offset_surface_jacobian(self.shape.weingarten(pts), self.h), single)

    def __repr__(self) -> str:
        return f"HanzawaTransform(shape={self.shape!r}, h={self.h})"
