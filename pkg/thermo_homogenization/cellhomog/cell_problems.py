"""Periodic cell problems solved on the fixed reference mesh."""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from thermo_homogenization.cellhomog.pullback import CellTransform, TransformedCoefficients
from thermo_homogenization.fem import (
    Assembler,
    LinearSolver,
    Mesh,
    generate_cell_mesh,
    periodic_prolongation,
    zero_mean_system,
    zero_mean_weights,
)
from thermo_homogenization.geometry import Shape
from thermo_homogenization.logger import log_debug
from thermo_homogenization.params import PhysicalParams

# Loadings of the elastic cell problems, in the order (11, 12, 21, 22).
ELASTIC_LOADINGS = ((0, 0), (0, 1), (1, 0), (1, 1))


def unit_strain(j: int, k: int) -> np.ndarray:
    """Displacement gradient of d_jk(y) = y_j e_k."""
    E = np.zeros((2, 2))
    E[k, j] = 1.0
    return E


@dataclass
class CellSolution:
    """Cell correctors at one height.

    ``fields`` holds (eta_1, eta_2) as nodal scalars for the thermal problem
    and (mu_11, mu_12, mu_21, mu_22) as (nv, 2) arrays for the elastic one.
    """

    kind: str
    h: float
    fields: Tuple[np.ndarray, ...]
    residual: float
    methods: Tuple[str, ...] = ()
    details: Dict[str, float] = field(default_factory=dict)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.fields[index]

    def __len__(self) -> int:
        return len(self.fields)


class CellProblem:
    """Thermal and elastic cell problems of one shape on one reference mesh.

    Provides:
    - Pulled-back coefficients at any admissible height
    - Zero-mean periodic correctors eta_j and mu_jk
    - Weak residuals of the computed correctors

    Every method only reads the cached mesh data, so one instance may serve
    several heights concurrently.
    """

    def __init__(
        self,
        shape: Optional[Shape],
        params: PhysicalParams,
        mesh: Optional[Mesh] = None,
        target_h: float = 0.05,
        solver: Optional[LinearSolver] = None,
    ) -> None:
        self.shape = shape
        self.params = params
        self.mesh = mesh if mesh is not None else generate_cell_mesh(shape, target_h)
        self.solver = solver or LinearSolver(method="direct")
        self.assembler = Assembler(self.mesh)
        self.transform = CellTransform(shape, self.mesh, self.assembler)

        node_weights = self.assembler.load(1.0)
        self._scalar_P = periodic_prolongation(self.mesh)
        self._vector_P = periodic_prolongation(self.mesh, components=2)
        self._scalar_W = zero_mean_weights(node_weights)
        self._vector_W = zero_mean_weights(node_weights, components=2)

    @property
    def mesh_size(self) -> float:
        return self.mesh.size()

    def coefficients(self, h: float) -> TransformedCoefficients:
        return self.transform.coefficients(self.params, h)

    # =========================================================================
    # Thermal correctors
    # =========================================================================

    def thermal_loads(self, coeffs: TransformedCoefficients) -> Tuple[np.ndarray, np.ndarray]:
        """Right-hand sides -int J F^-1 K e_j . grad phi for j = 1, 2."""
        flux = coeffs.J[..., None, None] * np.einsum("tqab,bc->tqac", coeffs.F_inv, self.params.K)
        return tuple(-self.assembler.flux_load(flux[..., j]) for j in range(2))

    def solve_thermal(
        self, h: float, coeffs: Optional[TransformedCoefficients] = None
    ) -> CellSolution:
        """Solve for eta_1, eta_2 at height h.

        Raises:
            AdmissibilityError: If h leaves the admissible band
            ConvergenceError: If the linear solve fails
        """
        coeffs = coeffs or self.coefficients(h)
        A = self.assembler.stiffness(coeffs.K_r)
        fields, methods, residual = [], [], 0.0
        for b in self.thermal_loads(coeffs):
            system = zero_mean_system(A, b, self._scalar_P, self._scalar_W)
            result = self.solver.solve(system)
            eta = result.x
            residual = max(residual, self._folded_residual(A, b, eta, self._scalar_P))
            fields.append(eta)
            methods.append(result.method)
        log_debug(f"thermal cell h={h:.6g}: {'/'.join(methods)}, residual {residual:.2e}")
        return CellSolution("thermal", float(h), tuple(fields), residual, tuple(methods))

    # =========================================================================
    # Elastic correctors
    # =========================================================================

    def elastic_load(self, coeffs: TransformedCoefficients, j: int, k: int) -> np.ndarray:
        """-int J (C e(d_jk)) F^-T : grad phi."""
        stress = np.einsum("imkn,kn->im", self.params.stiffness_tensor(), unit_strain(j, k))
        S = coeffs.J[..., None, None] * np.einsum("im,tqam->tqia", stress, coeffs.F_inv)
        return -self.assembler.stress_load(S)

    def solve_elastic(
        self, h: float, coeffs: Optional[TransformedCoefficients] = None
    ) -> CellSolution:
        """Solve for mu_11, mu_12, mu_21, mu_22 at height h.

        mu_21 is the same field as mu_12: both loadings have the same
        symmetric part and the stiffness has minor symmetry.
        """
        coeffs = coeffs or self.coefficients(h)
        A = self.assembler.elastic(coeffs.C_r, check_minor=False)
        solved: Dict[Tuple[int, int], np.ndarray] = {}
        methods, residual = [], 0.0
        for j, k in ((0, 0), (0, 1), (1, 1)):
            b = self.elastic_load(coeffs, j, k)
            system = zero_mean_system(A, b, self._vector_P, self._vector_W)
            result = self.solver.solve(system)
            residual = max(residual, self._folded_residual(A, b, result.x, self._vector_P))
            solved[(j, k)] = result.x.reshape(-1, 2)
            methods.append(result.method)
        solved[(1, 0)] = solved[(0, 1)]
        log_debug(f"elastic cell h={h:.6g}: {'/'.join(methods)}, residual {residual:.2e}")
        fields = tuple(solved[key] for key in ELASTIC_LOADINGS)
        return CellSolution("elastic", float(h), fields, residual, tuple(methods))

    # =========================================================================
    # Residuals
    # =========================================================================

    @staticmethod
    def _folded_residual(A, b: np.ndarray, u: np.ndarray, P) -> float:
        """max |P^T (b - A u)|, the residual against every periodic test function."""
        return float(np.abs(P.T @ (b - A @ u)).max(initial=0.0))


def solve_thermal_cell(
    shape: Optional[Shape],
    params: PhysicalParams,
    h: float,
    mesh: Optional[Mesh] = None,
    solver: Optional[LinearSolver] = None,
) -> CellSolution:
    """Thermal correctors (eta_1, eta_2) on the reference mesh at height h."""
    return CellProblem(shape, params, mesh, solver=solver).solve_thermal(h)


def solve_elastic_cell(
    shape: Optional[Shape],
    params: PhysicalParams,
    h: float,
    mesh: Optional[Mesh] = None,
    solver: Optional[LinearSolver] = None,
) -> CellSolution:
    """Elastic correctors (mu_11, mu_12, mu_21, mu_22) at height h."""
    return CellProblem(shape, params, mesh, solver=solver).solve_elastic(h)
