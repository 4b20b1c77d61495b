"""Heat equation on Omega_eps in reference coordinates with prescribed cell velocities."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from thermo_homogenization.cellhomog import CellTransform, TransformedCoefficients
from thermo_homogenization.errors import AdmissibilityError, ValidationError
from thermo_homogenization.fem import Assembler, LinearSolver, SparseSystem
from thermo_homogenization.geometry import Shape
from thermo_homogenization.logger import log_debug, log_warning
from thermo_homogenization.microsim.eps_mesh import EpsMesh
from thermo_homogenization.params import PhysicalParams

# Geometry bounds that hold for every height in the admissible band.
JACOBIAN_BOUND = 2.0
CONDUCTIVITY_FRACTION = 0.2
COMPATIBILITY_TOL = 1e-8


# =============================================================================
# Cell averages
# =============================================================================


def cell_average_velocities(
    theta: np.ndarray, eps_mesh: EpsMesh, assembler: Optional[Assembler] = None
) -> np.ndarray:
    """Unweighted mean of the trace of theta over each reference interface Gamma_eps,k.

    Cells without an interface get 0.
    """
    asm = assembler or Assembler(eps_mesh.mesh)
    edges = eps_mesh.interface_edges
    if len(edges) == 0:
        return np.zeros(eps_mesh.n_cells)
    _, weights = asm.edge_quadrature(edges)
    per_edge = np.einsum("eq,eq->e", weights, asm.edge_interpolate(theta, edges))
    totals = np.bincount(eps_mesh.interface_cell, per_edge, minlength=eps_mesh.n_cells)
    lengths = eps_mesh.interface_lengths
    return np.divide(totals, lengths, out=np.zeros_like(totals), where=lengths > 0)


def cell_average_velocity(
    theta: np.ndarray,
    eps_mesh: EpsMesh,
    k: int,
    assembler: Optional[Assembler] = None,
) -> float:
    """Kinetic-undercooling velocity of cell k (flat index)."""
    if not 0 <= k < eps_mesh.n_cells:
        raise ValidationError(f"Cell index {k} outside 0..{eps_mesh.n_cells - 1}")
    return float(cell_average_velocities(theta, eps_mesh, assembler)[k])


def cell_means(
    values: np.ndarray, eps_mesh: EpsMesh, assembler: Optional[Assembler] = None
) -> np.ndarray:
    """Mean of a nodal field over the pore part of each cell.

    Shapes: (nv,) -> (n_cells,) and (nv, 2) -> (n_cells, 2).
    """
    asm = assembler or Assembler(eps_mesh.mesh)
    per_triangle = np.einsum("tq,tq...->t...", asm.weights, asm.interpolate(values))
    regions = eps_mesh.mesh.regions
    totals = np.zeros((eps_mesh.n_cells,) + per_triangle.shape[1:])
    np.add.at(totals, regions, per_triangle)
    areas = eps_mesh.cell_areas.reshape((-1,) + (1,) * (totals.ndim - 1))
    return totals / areas


def check_cell_heights(shape: Optional[Shape], eps_mesh: EpsMesh, h: np.ndarray, t: float) -> None:
    """Abort when a cell height leaves the admissible band.

    Raises:
        AdmissibilityError: Details name the first offending cell and the time
    """
    if shape is None:
        return
    bound = shape.max_height
    bad = np.flatnonzero(~(np.abs(h) <= bound * (1.0 + 1e-12)))
    if bad.size:
        k = int(bad[0])
        raise AdmissibilityError(
            f"Height left the admissible band in cell {k} at t={t:.6g} (h={h[k]:.6g})",
            {"cell": k, "k": eps_mesh.cells[k].tolist(), "t": t, "h": float(h[k]), "bound": bound},
        )


# =============================================================================
# Solver
# =============================================================================


@dataclass
class StepDiagnostics:
    """Geometry and coupling checks of one micro step."""

    t: float
    compatibility: float
    F_max: float
    F_inv_max: float
    K_min: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "t": self.t,
            "compatibility": self.compatibility,
            "F_max": self.F_max,
            "F_inv_max": self.F_inv_max,
            "K_min": self.K_min,
        }


@dataclass
class MicroHeatResult:
    """theta_r trajectory for one set of cell velocities.

    Attributes:
        t: (N+1,) time levels
        theta: (N+1, nv) nodal temperature on the reference mesh
        h: (N+1, n_cells) cell heights, h[m+1] = h[m] + dt v[m]
        heat: (N+1,) total heat int c_r theta_r
        diagnostics: One entry per step
    """

    t: np.ndarray
    theta: np.ndarray
    h: np.ndarray
    heat: np.ndarray
    diagnostics: List[StepDiagnostics] = field(default_factory=list)

    @property
    def max_compatibility(self) -> float:
        return max((d.compatibility for d in self.diagnostics), default=0.0)


class MicroHeatSolver:
    """Implicit Euler for the pulled-back heat equation on Omega_eps.

    Provides:
    - per-cell coefficients from one CellTransform of the reference cell
    - single steps (for per-step coupling) and whole trajectories

    Each step solves
        M[c_r^new]/dt + S[K_r] + N[c_r, w_r]  theta^new
            = M[c_r^old] theta^old / dt + int g_r phi - L int_Gamma v_r phi
    with the geometry at the new heights and v_r = eps J v.
    """

    def __init__(
        self,
        eps_mesh: EpsMesh,
        shape: Optional[Shape],
        params: PhysicalParams,
        solver: Optional[LinearSolver] = None,
        threads: int = 1,
        transform: Optional[CellTransform] = None,
    ) -> None:
        self.eps_mesh = eps_mesh
        self.shape = shape
        self.params = params
        self.solver = solver or LinearSolver(method="direct")
        self.threads = max(1, int(threads))
        self.assembler = Assembler(eps_mesh.mesh)
        self.transform = transform or CellTransform(shape, eps_mesh.cell_mesh)
        self.k_min = float(np.linalg.eigvalsh(params.K).min())

    # =========================================================================
    # Coefficients
    # =========================================================================

    def cell_coefficients(
        self,
        h: np.ndarray,
        v: Optional[np.ndarray] = None,
        include_time: bool = False,
    ) -> List[TransformedCoefficients]:
        """Pulled-back coefficients of every cell at heights h and rates v."""
        eps = self.eps_mesh.eps
        cells = self.eps_mesh.cells
        v = np.zeros(self.eps_mesh.n_cells) if v is None else np.asarray(v, dtype=float)

        def _cell(k: int) -> TransformedCoefficients:
            return self.transform.coefficients(
                self.params,
                float(h[k]),
                v=float(v[k]),
                include_time=include_time,
                scale=eps,
                offset=eps * cells[k],
            )

        indices = range(self.eps_mesh.n_cells)
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                return list(pool.map(_cell, indices))
        return [_cell(k) for k in indices]

    @staticmethod
    def stack(coefficients: Sequence[TransformedCoefficients], name: str) -> np.ndarray:
        """Concatenate one per-cell field into a field on the eps mesh."""
        return np.concatenate([getattr(c, name) for c in coefficients], axis=0)

    def capacity(self, h: np.ndarray) -> np.ndarray:
        """c_r = c J at the volume points."""
        return self.stack(self.cell_coefficients(h), "c_r")

    def heat_content(self, theta: np.ndarray, c_r: np.ndarray) -> float:
        return self.assembler.integrate(c_r * self.assembler.interpolate(theta))

    # =========================================================================
    # Time stepping
    # =========================================================================

    def system(
        self,
        coefficients: Sequence[TransformedCoefficients],
        theta_old: np.ndarray,
        c_old: np.ndarray,
        dt: float,
    ) -> SparseSystem:
        asm = self.assembler
        c_new = self.stack(coefficients, "c_r")
        matrix = (
            asm.mass(c_new) / dt
            + asm.stiffness(self.stack(coefficients, "K_r"))
            + asm.convection(c_new, self.stack(coefficients, "w_r"))
        )
        rhs = asm.mass(c_old) @ theta_old / dt
        if not self.params.g.is_zero:
            rhs = rhs + asm.load(self.stack(coefficients, "g_r"))
        if self.params.latent_heat and len(self.eps_mesh.interface_edges):
            v_r = self.stack(coefficients, "v_r")
            latent = asm.surface_load(v_r, self.eps_mesh.interface_edges)
            rhs = rhs - self.params.latent_heat * latent
        return SparseSystem(matrix=sp.csr_matrix(matrix), rhs=rhs)

    def diagnose(
        self, coefficients: Sequence[TransformedCoefficients], t: float
    ) -> StepDiagnostics:
        bounds = np.array([c.jacobian_bounds() for c in coefficients])
        diagnostics = StepDiagnostics(
            t=t,
            compatibility=max(c.compatibility_residual() for c in coefficients),
            F_max=float(bounds[:, 0].max()),
            F_inv_max=float(bounds[:, 1].max()),
            K_min=min(c.min_conductivity_eigenvalue() for c in coefficients),
        )
        if max(diagnostics.F_max, diagnostics.F_inv_max) > JACOBIAN_BOUND:
            log_warning(
                f"Jacobian bound exceeded at t={t:.6g}: "
                f"|F|={diagnostics.F_max:.4f} |F^-1|={diagnostics.F_inv_max:.4f}"
            )
        if diagnostics.K_min <= CONDUCTIVITY_FRACTION * self.k_min:
            log_warning(
                f"Pulled-back conductivity degenerate at t={t:.6g}: "
                f"min eigenvalue {diagnostics.K_min:.4e}"
            )
        if diagnostics.compatibility > COMPATIBILITY_TOL:
            log_warning(
                f"Interface compatibility residual {diagnostics.compatibility:.3e} at t={t:.6g}"
            )
        return diagnostics

    def step(
        self,
        theta_old: np.ndarray,
        c_old: np.ndarray,
        h_new: np.ndarray,
        v: np.ndarray,
        dt: float,
        t: float,
    ) -> Tuple[np.ndarray, np.ndarray, StepDiagnostics]:
        """
        One implicit step to time t with cell heights h_new reached at rate v.

        Returns:
            Tuple (theta_new, c_new, diagnostics)

        Raises:
            AdmissibilityError: If a cell height leaves the band
            ConvergenceError: If the linear solve fails
        """
        check_cell_heights(self.shape, self.eps_mesh, h_new, t)
        coefficients = self.cell_coefficients(h_new, v, include_time=True)
        system = self.system(coefficients, theta_old, c_old, dt)
        theta_new = self.solver.solve(system).x
        return theta_new, self.stack(coefficients, "c_r"), self.diagnose(coefficients, t)

    def initial_theta(self) -> np.ndarray:
        nodes = self.eps_mesh.mesh.nodes
        return np.broadcast_to(self.params.theta0(nodes), (len(nodes),)).astype(float)

    def solve(
        self, v_traj: np.ndarray, dt: float, theta0: Optional[np.ndarray] = None
    ) -> MicroHeatResult:
        """
        March theta_r over the steps of ``v_traj`` from theta0.

        Args:
            v_traj: (N, n_cells) cell velocity of each step interval
            dt: Time step
            theta0: Initial nodal temperature (params.theta0 when omitted)

        Returns:
            MicroHeatResult with N + 1 time levels
        """
        v_traj = np.asarray(v_traj, dtype=float).reshape(-1, self.eps_mesh.n_cells)
        n_steps = len(v_traj)
        theta = self.initial_theta() if theta0 is None else np.asarray(theta0, dtype=float)
        h = np.zeros(self.eps_mesh.n_cells)
        c_r = self.capacity(h)

        thetas = [theta]
        heights = [h]
        heat = [self.heat_content(theta, c_r)]
        diagnostics: List[StepDiagnostics] = []
        for m in range(n_steps):
            t = (m + 1) * dt
            h = h + dt * v_traj[m]
            theta, c_r, info = self.step(theta, c_r, h, v_traj[m], dt, t)
            thetas.append(theta)
            heights.append(h)
            heat.append(self.heat_content(theta, c_r))
            diagnostics.append(info)
        log_debug(
            f"micro heat: {n_steps} steps, max |theta|={np.abs(thetas[-1]).max():.4e}, "
            f"compatibility={max((d.compatibility for d in diagnostics), default=0.0):.2e}"
        )
        return MicroHeatResult(
            t=np.arange(n_steps + 1) * dt,
            theta=np.array(thetas),
            h=np.array(heights),
            heat=np.array(heat),
            diagnostics=diagnostics,
        )


def micro_heat_solve(
    eps_mesh: EpsMesh,
    shape: Optional[Shape],
    params: PhysicalParams,
    v_traj: np.ndarray,
    dt: float,
    T: float,
    solver: Optional[LinearSolver] = None,
    threads: int = 1,
) -> MicroHeatResult:
    """
    theta_r trajectory on [0, T] for prescribed per-cell velocities.

    Args:
        eps_mesh: Reference mesh of Omega_eps
        shape: Inclusion of the reference cell
        params: Material data and sources
        v_traj: (N, n_cells) velocities with N = T / dt
        dt: Time step
        T: Final time
        solver: Linear solver (sparse direct by default)
        threads: Workers for the per-cell coefficients

    Raises:
        ValidationError: If v_traj does not cover [0, T]
        AdmissibilityError: If a cell height leaves the band
    """
    v_traj = np.asarray(v_traj, dtype=float)
    n_steps = int(round(T / dt))
    if v_traj.shape != (n_steps, eps_mesh.n_cells):
        raise ValidationError(
            f"Velocity trajectory must have shape {(n_steps, eps_mesh.n_cells)}, "
            f"got {v_traj.shape}",
            {"T": T, "dt": dt},
        )
    heat = MicroHeatSolver(eps_mesh, shape, params, solver=solver, threads=threads)
    return heat.solve(v_traj, dt)
