"""Abstract inclusion shape with level-set differential geometry."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from thermo_homogenization.errors import AdmissibilityError, ValidationError

ON_SURFACE_TOL = 1e-10


def as_points(y: Any, dim: int) -> Tuple[np.ndarray, bool]:
    """Return ``y`` as an (N, dim) float array and whether a single point was given."""
    arr = np.asarray(y, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != dim:
        raise ValidationError(f"Expected points of dimension {dim}, got shape {arr.shape}")
    return arr, single


def _squeeze(value: np.ndarray, single: bool) -> Any:
    return value[0] if single else value


@dataclass
class Projection:
    """Closest-point data for a batch of points.

    For points outside the tubular band ``distance`` is only a conservative
    signed bound; ``points`` are NaN and ``normals`` zero there.
    """

    points: np.ndarray
    distance: np.ndarray
    normals: np.ndarray
    in_band: np.ndarray


class Shape(ABC):
    """Inclusion Z inside the unit cell Y = (0, 1)^d with a C³ boundary.

    Subclasses provide a level set rho (negative inside Z) with gradient and
    Hessian, a closest-point projection and a radial parametrization of the
    boundary about ``center``.
    """

    kind: str = "shape"

    def __init__(self, center: Any, a1: Optional[float] = None, a2: Optional[float] = None):
        self.center = np.asarray(center, dtype=float)
        if self.center.ndim != 1 or self.center.size not in (2, 3):
            raise ValidationError(f"Shape center must be a 2D or 3D point, got {center!r}")
        self.dim = int(self.center.size)
        self._a1_override = a1
        self._a2_override = a2

    # ------------------------------------------------------------------
    # Subclass interface
    # ------------------------------------------------------------------

    @abstractmethod
    def level_set(self, y: np.ndarray) -> np.ndarray:
        """rho(y) for an (N, d) array."""

    @abstractmethod
    def level_set_gradient(self, y: np.ndarray) -> np.ndarray:
        """(N, d) gradient of rho."""

    @abstractmethod
    def level_set_hessian(self, y: np.ndarray) -> np.ndarray:
        """(N, d, d) Hessian of rho."""

    @abstractmethod
    def radial_point(self, directions: np.ndarray) -> np.ndarray:
        """Boundary point hit by the ray center + t * direction, for unit directions."""

    @abstractmethod
    def closest_point(self, y: Any) -> Projection:
        """Signed distance, projection and normal for an (N, d) array."""

    @abstractmethod
    def natural_radii(self) -> Tuple[float, float]:
        """Largest admissible (a1, a2) before user overrides."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """JSON descriptor of the shape."""

    # ------------------------------------------------------------------
    # Tubular radii
    # ------------------------------------------------------------------

    def _radii(self) -> Tuple[float, float]:
        if not hasattr(self, "_radii_cache"):
            a1, a2 = self.natural_radii()
            if self._a1_override is not None:
                if not 0 < self._a1_override <= a1 * (1 + 1e-12):
                    raise ValidationError(
                        f"Interior radius a1={self._a1_override} must lie in (0, {a1:.6g}]"
                    )
                a1 = float(self._a1_override)
            if self._a2_override is not None:
                if not 0 < self._a2_override <= a2 * (1 + 1e-12):
                    raise ValidationError(
                        f"Exterior radius a2={self._a2_override} must lie in (0, {a2:.6g}]"
                    )
                a2 = float(self._a2_override)
            self._radii_cache = (a1, a2)
        return self._radii_cache

    @property
    def a1(self) -> float:
        """Interior tubular radius (toward the inclusion)."""
        return self._radii()[0]

    @property
    def a2(self) -> float:
        """Exterior tubular radius (toward Y*)."""
        return self._radii()[1]

    @property
    def a_star(self) -> float:
        return min(self.a1, self.a2)

    @property
    def max_height(self) -> float:
        """Admissible height bound a*/10."""
        return self.a_star / 10.0

    def check_height(self, h: float, fraction: float = 0.1, what: str = "height") -> None:
        """Raise AdmissibilityError unless |h| <= fraction * a*."""
        bound = fraction * self.a_star
        if not np.isfinite(h) or abs(h) > bound * (1.0 + 1e-12):
            raise AdmissibilityError(
                f"{what} {h:.6g} outside admissible band [-{bound:.6g}, {bound:.6g}]",
                {"h": float(h), "bound": bound},
            )

    def band_mask(self, distance: np.ndarray) -> np.ndarray:
        return (distance > -self.a1) & (distance < self.a2)

    # ------------------------------------------------------------------
    # Distance, projection, normal
    # ------------------------------------------------------------------

    def signed_distance(self, y: Any) -> Any:
        """Signed distance, positive in Y*; a conservative bound outside the band."""
        pts, single = as_points(y, self.dim)
        return _squeeze(self.closest_point(pts).distance, single)

    def project(self, y: Any) -> Any:
        """Closest point on the interface."""
        pts, single = as_points(y, self.dim)
        proj = self.closest_point(pts)
        missing = np.isnan(proj.points).any(axis=1)
        if missing.any():
            first = int(np.flatnonzero(missing)[0])
            raise ValidationError(
                "Point outside the tubular band has no projection",
                {"point": pts[first], "distance_bound": proj.distance[first]},
            )
        return _squeeze(proj.points, single)

    def _check_on_surface(self, gamma: np.ndarray) -> None:
        residual = np.abs(self.level_set(gamma))
        if residual.size and residual.max() > ON_SURFACE_TOL:
            worst = int(np.argmax(residual))
            raise ValidationError(
                f"Point is not on the interface (level-set residual {residual[worst]:.3e})",
                {"point": gamma[worst], "residual": float(residual[worst])},
            )

    def unit_normal(self, gamma: np.ndarray) -> np.ndarray:
        """Normalized level-set gradient, without the on-surface check."""
        grad = self.level_set_gradient(gamma)
        return grad / np.linalg.norm(grad, axis=1, keepdims=True)

    def normal(self, gamma: Any) -> Any:
        """Unit normal pointing from Z into Y*."""
        pts, single = as_points(gamma, self.dim)
        self._check_on_surface(pts)
        return _squeeze(self.unit_normal(pts), single)

    def weingarten(self, gamma: np.ndarray) -> np.ndarray:
        """Shape tensor without the on-surface check.

        L = -P_T D²rho P_T / |grad rho|, so that L = -D²d on the interface.
        """
        grad = self.level_set_gradient(gamma)
        norm = np.linalg.norm(grad, axis=1)
        n = grad / norm[:, None]
        tangential = np.eye(self.dim)[None] - np.einsum("ni,nj->nij", n, n)
        hess = self.level_set_hessian(gamma)
        L = -np.einsum("nij,njk,nkl->nil", tangential, hess, tangential) / norm[:, None, None]
        return 0.5 * (L + np.transpose(L, (0, 2, 1)))

    def shape_tensor(self, gamma: Any) -> Any:
        """Weingarten map L_Gamma(gamma); a circle of radius r has eigenvalue -1/r."""
        pts, single = as_points(gamma, self.dim)
        self._check_on_surface(pts)
        return _squeeze(self.weingarten(pts), single)

    def offset_inverse(self, gamma: Any, s: Any) -> Any:
        """M(gamma, s) = (Id - s L(gamma))^-1."""
        pts, single = as_points(gamma, self.dim)
        L = self.weingarten(pts)
        s_arr = np.broadcast_to(np.asarray(s, dtype=float), (len(pts),))
        eye = np.eye(self.dim)[None]
        return _squeeze(np.linalg.inv(eye - s_arr[:, None, None] * L), single)

    def projection_derivative(self, y: Any) -> Any:
        """DP(y) = M(P(y), d(y)) (Id - n n^T)."""
        pts, single = as_points(y, self.dim)
        proj = self.closest_point(pts)
        if not proj.in_band.all():
            raise ValidationError("Projection derivative requested outside the tubular band")
        M = self.offset_inverse(proj.points, proj.distance)
        tangential = np.eye(self.dim)[None] - np.einsum("ni,nj->nij", proj.normals, proj.normals)
        return _squeeze(M @ tangential, single)

    # ------------------------------------------------------------------
    # Curvature
    # ------------------------------------------------------------------

    def curvature(self, h: float, gamma: Any) -> Any:
        """kappa(h, gamma) = tr[(Id - h L)^-1 L] for |h| < a*/2."""
        if not abs(h) < 0.5 * self.a_star:
            raise AdmissibilityError(
                f"Curvature height {h:.6g} outside (-a*/2, a*/2)",
                {"h": float(h), "bound": 0.5 * self.a_star},
            )
        pts, single = as_points(gamma, self.dim)
        self._check_on_surface(pts)
        return _squeeze(offset_curvature(self.weingarten(pts), h), single)

    def mean_curvature(self, gamma: Any) -> Any:
        """Half-trace convention 0.5 tr L, reported for reference only."""
        pts, single = as_points(gamma, self.dim)
        self._check_on_surface(pts)
        return _squeeze(0.5 * np.trace(self.weingarten(pts), axis1=1, axis2=2), single)

    # ------------------------------------------------------------------
    # Reference interface quadrature and offset measures
    # ------------------------------------------------------------------

    def interface_quadrature(self, n: int = 1024) -> Tuple[np.ndarray, np.ndarray]:
        """Quadrature (points, weights) on the reference interface.

        Uses the radial parametrization gamma = c + t(omega) omega, whose surface
        element is t^(d-1) / (omega . n) times the angular measure.
        """
        if self.dim == 2:
            angles = 2.0 * np.pi * np.arange(n) / n
            directions = np.column_stack([np.cos(angles), np.sin(angles)])
            angular = np.full(n, 2.0 * np.pi / n)
        else:
            n_polar = max(8, n // 16)
            n_azimuth = 2 * n_polar
            nodes, gl_weights = np.polynomial.legendre.leggauss(n_polar)
            phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
            cos_t, az = np.meshgrid(nodes, phi, indexing="ij")
            sin_t = np.sqrt(1.0 - cos_t**2)
            directions = np.column_stack([
                (sin_t * np.cos(az)).ravel(),
                (sin_t * np.sin(az)).ravel(),
                cos_t.ravel(),
            ])
            angular = np.repeat(gl_weights, n_azimuth) * (2.0 * np.pi / n_azimuth)
        points = self.radial_point(directions)
        t = np.linalg.norm(points - self.center, axis=1)
        normals = self.unit_normal(points)
        weights = angular * t ** (self.dim - 1) / np.einsum("ni,ni->n", directions, normals)
        return points, weights

    def _measure_coefficients(self, n: int) -> Tuple[float, float, float, float]:
        """Integrals of (1, tr L, e2(L)) over Gamma and the volume of Z."""
        if not hasattr(self, "_measure_cache"):
            pts, w = self.interface_quadrature(n)
            L = self.weingarten(pts)
            tr = np.trace(L, axis1=1, axis2=2)
            e2 = 0.5 * (tr**2 - np.einsum("nij,nji->n", L, L))
            # |Z| = (1/d) * integral of (gamma - c) . n over Gamma
            support = np.einsum("ni,ni->n", pts - self.center, self.unit_normal(pts))
            self._measure_cache = (
                float(w.sum()),
                float(w @ tr),
                float(w @ e2),
                float(w @ support) / self.dim,
            )
        return self._measure_cache

    def interface_measure(self, h: float = 0.0, n: int = 1024) -> float:
        """|Gamma(h)| = integral of det(Id - h L) over the reference interface."""
        area, tr, e2, _ = self._measure_coefficients(n)
        return area - h * tr + h * h * e2

    def inclusion_volume(self, h: float = 0.0, n: int = 1024) -> float:
        """|Z(h)| = |Z| + integral over s in [0, h] of |Gamma(s)|."""
        area, tr, e2, vol = self._measure_coefficients(n)
        return vol + h * area - 0.5 * h * h * tr + h**3 * e2 / 3.0

    def porosity(self, h: float = 0.0) -> float:
        """phi(h) = |Y*(h)| = 1 - |Z(h)|."""
        return 1.0 - self.inclusion_volume(h)

    def offset_points(self, gamma: np.ndarray, h: float) -> np.ndarray:
        """Offset interface gamma + h n(gamma)."""
        return gamma + h * self.unit_normal(gamma)

    def contains(self, y: Any) -> Any:
        """True where y lies in the open inclusion Z."""
        pts, single = as_points(y, self.dim)
        return _squeeze(self.level_set(pts) < 0.0, single)

    def sup_weingarten_norm(self, n: int = 4096) -> float:
        """Largest spectral norm of L over a dense boundary sampling."""
        pts, _ = self.interface_quadrature(n)
        return float(np.abs(np.linalg.eigvalsh(self.weingarten(pts))).max())

    def validate(self) -> None:
        """Check the tubular-band invariants; raise ValidationError on failure."""
        a1, a2 = self.a1, self.a2
        if not (a1 > 0 and a2 > 0):
            raise ValidationError(f"Tubular radii must be positive (a1={a1}, a2={a2})")
        spectral = 0.5 * max(a1, a2) * self.sup_weingarten_norm()
        if spectral >= 1.0:
            raise ValidationError(
                f"Tubular radii too large for the interface curvature (|s| |L| = {spectral:.3f})"
            )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_dict()})"


def offset_curvature(L: np.ndarray, h: Any) -> np.ndarray:
    """tr[(Id - h L)^-1 L] for a batch of shape tensors."""
    dim = L.shape[-1]
    h_arr = np.broadcast_to(np.asarray(h, dtype=float), L.shape[:1])
    A = np.eye(dim)[None] - h_arr[:, None, None] * L
    return np.trace(np.linalg.solve(A, L), axis1=1, axis2=2)


def offset_surface_jacobian(L: np.ndarray, h: Any) -> np.ndarray:
    """det(Id - h L), the area ratio of the offset interface."""
    dim = L.shape[-1]
    h_arr = np.broadcast_to(np.asarray(h, dtype=float), L.shape[:1])
    return np.linalg.det(np.eye(dim)[None] - h_arr[:, None, None] * L)
