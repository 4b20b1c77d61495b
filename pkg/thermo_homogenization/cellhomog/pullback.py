"""Reference-configuration coefficients of the transformed cell."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from thermo_homogenization.fem.assembly import Assembler
from thermo_homogenization.fem.mesh import Mesh
from thermo_homogenization.geometry import Cutoff, PrecomputedTransform, Shape
from thermo_homogenization.params import PhysicalParams


@dataclass(eq=False)
class TransformedCoefficients:
    """Pulled-back coefficients at the quadrature points of one mesh.

    Volume fields have leading shape (nt, nq), interface fields (ne, nq)
    over ``mesh.interface_edges``. ``w_r`` is ``None`` unless the time
    derivative of the transform was requested.
    """

    h: float
    F: np.ndarray
    J: np.ndarray
    K_r: np.ndarray
    C_r: np.ndarray
    alpha_r: np.ndarray
    c_r: np.ndarray
    f_r: np.ndarray
    g_r: np.ndarray
    w_r: Optional[np.ndarray]
    surface_J: np.ndarray
    surface_normals: np.ndarray
    surface_curvature: np.ndarray
    v_r: np.ndarray
    H_r: np.ndarray
    surface_w_r: Optional[np.ndarray] = None

    @property
    def F_inv(self) -> np.ndarray:
        return np.linalg.inv(self.F)

    def min_conductivity_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.K_r).min())

    def jacobian_bounds(self) -> Tuple[float, float]:
        """max |F|_inf and max |F^-1|_inf over all volume points."""
        F = np.abs(self.F).sum(axis=-1).max()
        F_inv = np.abs(self.F_inv).sum(axis=-1).max()
        return float(F), float(F_inv)

    def compatibility_residual(self) -> float:
        """max |J w_r . n - v_r| on the interface points (0 without time data)."""
        if self.surface_w_r is None or self.v_r.size == 0:
            return 0.0
        normal = np.einsum("eqi,eqi->eq", self.surface_w_r, self.surface_normals)
        normal_speed = self.surface_J * normal
        return float(np.abs(normal_speed - self.v_r).max())


class CellTransform:
    """Height-independent transform data on a cell mesh.

    Provides:
    - G, chi and normals at the volume and interface quadrature points
    - F(h), J(h) for any admissible height without a new projection
    - the full coefficient set for given heights and velocities

    ``shape=None`` describes the cell without an inclusion; every height
    then maps to the identity.
    """

    def __init__(
        self,
        shape: Optional[Shape],
        mesh: Mesh,
        assembler: Optional[Assembler] = None,
        cutoff: Optional[Cutoff] = None,
    ) -> None:
        self.shape = shape
        self.mesh = mesh
        self.assembler = assembler or Assembler(mesh)
        asm = self.assembler
        self.volume_shape = asm.points.shape[:2]
        surface_points, self.surface_weights = asm.edge_quadrature()
        self.surface_shape = surface_points.shape[:2]

        self.volume: Optional[PrecomputedTransform] = None
        self.surface: Optional[PrecomputedTransform] = None
        if shape is not None:
            cutoff = cutoff or Cutoff(shape.a1, shape.a2)
            self.volume = PrecomputedTransform(shape, asm.points.reshape(-1, 2), cutoff)
            self.surface = PrecomputedTransform(shape, surface_points.reshape(-1, 2), cutoff)

    def check_height(self, h: float) -> None:
        if self.shape is not None:
            self.shape.check_height(h)

    def _gradient(
        self, pre: Optional[PrecomputedTransform], lead: Tuple[int, int], h: float
    ) -> np.ndarray:
        if pre is None:
            return np.broadcast_to(np.eye(2), lead + (2, 2)).copy()
        return pre.deformation_gradient(h).reshape(lead + (2, 2))

    def jacobian(self, h: float) -> Tuple[np.ndarray, np.ndarray]:
        """(F, J) at the volume quadrature points."""
        F = self._gradient(self.volume, self.volume_shape, h)
        return F, np.linalg.det(F)

    def surface_jacobian(self, h: float) -> Tuple[np.ndarray, np.ndarray]:
        F = self._gradient(self.surface, self.surface_shape, h)
        return F, np.linalg.det(F)

    def mapped_points(self, h: float) -> np.ndarray:
        if self.volume is None:
            return self.assembler.points
        return self.volume.map(h).reshape(self.volume_shape + (2,))

    def velocity(self, v: float) -> np.ndarray:
        """d/dt s at the volume points for height rate v."""
        if self.volume is None:
            return np.zeros(self.volume_shape + (2,))
        return self.volume.velocity(v).reshape(self.volume_shape + (2,))

    def surface_velocity(self, v: float) -> np.ndarray:
        if self.surface is None:
            return np.zeros(self.surface_shape + (2,))
        return self.surface.velocity(v).reshape(self.surface_shape + (2,))

    def surface_normals(self) -> np.ndarray:
        if self.surface is None:
            return np.zeros(self.surface_shape + (2,))
        return self.surface.normals.reshape(self.surface_shape + (2,))

    def surface_curvature(self, h: float) -> np.ndarray:
        if self.surface is None:
            return np.zeros(self.surface_shape)
        return self.surface.curvature(h).reshape(self.surface_shape)

    def coefficients(
        self,
        params: PhysicalParams,
        h: float,
        v: float = 0.0,
        include_time: bool = False,
        scale: float = 1.0,
        offset: Sequence[float] = (0.0, 0.0),
    ) -> TransformedCoefficients:
        """Evaluate every pulled-back coefficient at height ``h``.

        Args:
            params: Material data
            h: Uniform height of the cell
            v: Height rate, used for the convective velocity when include_time is set
            include_time: Compute w_r = F^-1 ds/dt
            scale: Cell size; 1 for the unit cell, eps inside the periodic domain
            offset: Physical position of the cell origin (for the sources)

        Returns:
            TransformedCoefficients on the volume and interface points

        Raises:
            AdmissibilityError: If h leaves the admissible band
        """
        self.check_height(h)
        F, J = self.jacobian(h)
        F_inv = np.linalg.inv(F)

        K_r = J[..., None, None] * np.einsum("tqab,bc,tqdc->tqad", F_inv, params.K, F_inv)
        K_r = 0.5 * (K_r + np.swapaxes(K_r, -1, -2))
        C_r = J[..., None, None, None, None] * np.einsum(
            "imkn,tqam,tqbn->tqiakb", params.stiffness_tensor(), F_inv, F_inv
        )
        alpha_r = params.alpha * J[..., None, None] * np.swapaxes(F_inv, -1, -2)
        c_r = params.heat_capacity * J

        physical = np.asarray(offset, dtype=float) + scale * self.mapped_points(h)
        flat = physical.reshape(-1, 2)
        f = np.stack([fi(flat) for fi in params.f], axis=-1).reshape(physical.shape)
        f_r = J[..., None] * f
        g_r = J * params.g(flat).reshape(J.shape)

        F_s, J_s = self.surface_jacobian(h)
        normals = self.surface_normals()
        kappa = self.surface_curvature(h) / scale
        F_s_inv = np.linalg.inv(F_s) if F_s.size else F_s
        H_r = (params.sigma0 * J_s * kappa)[..., None, None] * F_s_inv
        v_r = scale * J_s * v

        w_r = surface_w_r = None
        if include_time:
            w_r = scale * np.einsum("tqij,tqj->tqi", F_inv, self.velocity(v))
            surface_w_r = scale * np.einsum("eqij,eqj->eqi", F_s_inv, self.surface_velocity(v))

        return TransformedCoefficients(
            h=float(h),
            F=F,
            J=J,
            K_r=K_r,
            C_r=C_r,
            alpha_r=alpha_r,
            c_r=c_r,
            f_r=f_r,
            g_r=g_r,
            w_r=w_r,
            surface_J=J_s,
            surface_normals=normals,
            surface_curvature=kappa,
            v_r=v_r,
            H_r=H_r,
            surface_w_r=surface_w_r,
        )


def pullback_coefficients(
    shape: Optional[Shape],
    params: PhysicalParams,
    h: float,
    mesh: Mesh,
    include_time: bool = False,
    v_cell: float = 0.0,
) -> TransformedCoefficients:
    """One-shot pullback on ``mesh``; build a CellTransform to reuse projections."""
    return CellTransform(shape, mesh).coefficients(params, h, v=v_cell, include_time=include_time)
