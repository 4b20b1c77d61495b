"""Effective coefficients of the perforated cell as functions of the height."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from thermo_homogenization.cellhomog.cell_problems import ELASTIC_LOADINGS, CellProblem, unit_strain
from thermo_homogenization.cellhomog.pullback import TransformedCoefficients
from thermo_homogenization.errors import NumericalError, ValidationError
from thermo_homogenization.fem import LinearSolver, Mesh, generate_cell_mesh
from thermo_homogenization.geometry import Ball, Shape
from thermo_homogenization.geometry.base import offset_curvature, offset_surface_jacobian
from thermo_homogenization.params import PhysicalParams, tensor_to_voigt, voigt_to_tensor

# Interface quadrature size for phi_Gamma and H*.
SURFACE_POINTS = 1024
SYMMETRY_TOL = 1e-10

# Flat component order used by tables: phi, phi_gamma, K11, K12, K22,
# the upper triangle of the Voigt stiffness, H1, H2.
VOIGT_UPPER = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
COMPONENTS = (
    ("phi", "phi_gamma", "K11", "K12", "K22")
    + tuple(f"C{a + 1}{b + 1}" for a, b in VOIGT_UPPER)
    + ("H1", "H2")
)


@dataclass(eq=False)
class EffectiveCoefficients:
    """(phi, phi_Gamma, K*, C*, H*) at one height."""

    h: float
    phi: float
    phi_gamma: float
    K: np.ndarray
    C: np.ndarray
    H: np.ndarray
    mesh_h: float = 0.0
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def C_voigt(self) -> np.ndarray:
        return tensor_to_voigt(self.C)

    def to_vector(self) -> np.ndarray:
        V = self.C_voigt
        return np.array(
            [self.phi, self.phi_gamma, self.K[0, 0], self.K[0, 1], self.K[1, 1]]
            + [V[a, b] for a, b in VOIGT_UPPER]
            + list(self.H)
        )

    @classmethod
    def from_vector(
        cls, h: float, values: np.ndarray, mesh_h: float = 0.0
    ) -> "EffectiveCoefficients":
        """Rebuild from :meth:`to_vector` output; matrices come back exactly symmetric."""
        values = np.asarray(values, dtype=float)
        if values.shape != (len(COMPONENTS),):
            raise ValidationError(
                f"Expected {len(COMPONENTS)} components, got shape {values.shape}"
            )
        K = np.array([[values[2], values[3]], [values[3], values[4]]])
        V = np.zeros((3, 3))
        for value, (a, b) in zip(values[5:11], VOIGT_UPPER):
            V[a, b] = V[b, a] = value
        return cls(
            h=float(h),
            phi=float(values[0]),
            phi_gamma=float(values[1]),
            K=K,
            C=voigt_to_tensor(V),
            H=values[11:13].copy(),
            mesh_h=mesh_h,
        )

    def violations(self, K_max: Optional[float] = None) -> List[str]:
        """Invariant violations; empty when the coefficients are admissible.

        Args:
            K_max: Largest eigenvalue of the base conductivity, enables the Voigt bound
        """
        problems = []
        if not 0.0 < self.phi <= 1.0 + 1e-12:
            problems.append(f"porosity {self.phi:.6g} outside (0, 1]")
        if self.phi_gamma < 0.0 or (self.phi < 1.0 - 1e-9 and self.phi_gamma <= 0.0):
            problems.append(f"interface measure {self.phi_gamma:.6g} not positive")
        asymmetry = abs(self.K[0, 1] - self.K[1, 0])
        if not np.all(np.isfinite(self.K)) or asymmetry > SYMMETRY_TOL * np.abs(self.K).max():
            problems.append("K* not symmetric")
        elif np.linalg.eigvalsh(self.K).min() <= 0.0:
            problems.append("K* not positive definite")
        elif K_max is not None and np.linalg.eigvalsh(self.K).max() > self.phi * K_max + 1e-8:
            problems.append("K* exceeds the Voigt bound")
        scale = max(np.abs(self.C).max(), 1e-300)
        major = np.abs(self.C - self.C.transpose(2, 3, 0, 1)).max()
        minor = np.abs(self.C - self.C.transpose(1, 0, 2, 3)).max()
        if not np.all(np.isfinite(self.C)) or max(major, minor) > SYMMETRY_TOL * scale:
            problems.append("C* lacks major or minor symmetry")
        elif np.linalg.eigvalsh(self.C_voigt).min() <= 0.0:
            problems.append("C* not positive on symmetric matrices")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        return {
            "h": self.h,
            "phi": self.phi,
            "phi_gamma": self.phi_gamma,
            "Kstar": self.K.tolist(),
            "Cstar_voigt": self.C_voigt.tolist(),
            "Hstar": self.H.tolist(),
            "mesh_h": self.mesh_h,
            "residuals": dict(self.residuals),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EffectiveCoefficients":
        try:
            return cls(
                h=float(data["h"]),
                phi=float(data["phi"]),
                phi_gamma=float(data["phi_gamma"]),
                K=np.asarray(data["Kstar"], dtype=float).reshape(2, 2),
                C=voigt_to_tensor(np.asarray(data["Cstar_voigt"], dtype=float).reshape(3, 3)),
                H=np.asarray(data["Hstar"], dtype=float).reshape(2),
                mesh_h=float(data.get("mesh_h", 0.0)),
                residuals={k: float(v) for k, v in data.get("residuals", {}).items()},
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed effective coefficient record: {e}") from e


# =============================================================================
# Integrals
# =============================================================================


def surface_integrals(
    shape: Optional[Shape], params: PhysicalParams, h: float, n: int = SURFACE_POINTS
):
    """(phi_Gamma, H*) from the reference interface parametrization.

    Both use the exact offset surface Jacobian det(Id - h L); the normal of
    the offset interface equals the reference normal.
    """
    if shape is None:
        return 0.0, np.zeros(2)
    points, weights = shape.interface_quadrature(n)
    L = shape.weingarten(points)
    jac = offset_surface_jacobian(L, h)
    kappa = offset_curvature(L, h)
    normals = shape.unit_normal(points)
    H = params.sigma0 * np.einsum("n,n,n,ni->i", weights, kappa, jac, normals)
    return float(shape.interface_measure(h, n)), H


def effective_conductivity(
    problem: CellProblem, coeffs: TransformedCoefficients, eta
) -> np.ndarray:
    """K*_ij = int J K (F^-T grad eta_i + e_i) . (F^-T grad eta_j + e_j)."""
    asm = problem.assembler
    F_inv = coeffs.F_inv
    fluxes = []
    for j in range(2):
        g = np.einsum("tqba,tb->tqa", F_inv, asm.gradient(eta[j]))
        g[..., j] += 1.0
        fluxes.append(g)
    K = problem.params.K
    out = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            out[i, j] = np.einsum(
                "tq,tq,tqa,ab,tqb->", asm.weights, coeffs.J, fluxes[i], K, fluxes[j]
            )
    return 0.5 * (out + out.T)


def effective_stiffness(problem: CellProblem, coeffs: TransformedCoefficients, mu) -> np.ndarray:
    """C*_ijkl = int J C (grad mu_ij F^-1 + E^ij) : (grad mu_kl F^-1 + E^kl)."""
    asm = problem.assembler
    C = problem.params.stiffness_tensor()
    strains = {}
    for (i, j), field_ in zip(ELASTIC_LOADINGS, mu):
        G = np.einsum("tab,tqbm->tqam", asm.vector_gradient(field_), coeffs.F_inv)
        strains[(i, j)] = G + unit_strain(i, j)
    out = np.empty((2, 2, 2, 2))
    for (i, j), A in strains.items():
        stress = np.einsum("abcd,tqcd->tqab", C, A)
        for (k, l), B in strains.items():
            out[i, j, k, l] = np.einsum("tq,tq,tqab,tqab->", asm.weights, coeffs.J, stress, B)
    return out


def effective_from_problem(problem: CellProblem, h: float) -> EffectiveCoefficients:
    """All effective coefficients at height h on the problem's reference mesh.

    Raises:
        AdmissibilityError: If h leaves the admissible band
        NumericalError: If the result violates the coefficient invariants
    """
    coeffs = problem.coefficients(h)
    thermal = problem.solve_thermal(h, coeffs)
    elastic = problem.solve_elastic(h, coeffs)
    phi_gamma, H = surface_integrals(problem.shape, problem.params, h)
    result = EffectiveCoefficients(
        h=float(h),
        phi=problem.assembler.integrate(coeffs.J),
        phi_gamma=phi_gamma,
        K=effective_conductivity(problem, coeffs, thermal.fields),
        C=effective_stiffness(problem, coeffs, elastic.fields),
        H=H,
        mesh_h=problem.mesh_size,
        residuals={"thermal": thermal.residual, "elastic": elastic.residual},
    )
    problems = result.violations()
    if problems:
        raise NumericalError(
            f"Effective coefficients at h={h:.6g} are not admissible: {'; '.join(problems)}",
            {"h": float(h), "violations": problems},
        )
    return result


def effective_coeffs(
    shape: Optional[Shape],
    params: PhysicalParams,
    h: float,
    mesh: Optional[Mesh] = None,
    target_h: float = 0.05,
    solver: Optional[LinearSolver] = None,
) -> EffectiveCoefficients:
    """Effective coefficients at one height; see :class:`CellProblem` to reuse the mesh."""
    return effective_from_problem(CellProblem(shape, params, mesh, target_h, solver), h)


def remeshed_conductivity(
    shape: Ball, params: PhysicalParams, h: float, target_h: float = 0.05
) -> np.ndarray:
    """K* from a mesh of the grown ball itself, without any transform.

    Only circles have a closed-form offset shape, so only they can be
    remeshed at radius r + h.
    """
    if not isinstance(shape, Ball) or shape.dim != 2:
        raise ValidationError(f"Remeshed conductivity needs a 2D ball, got {type(shape).__name__}")
    shape.check_height(h)
    grown = Ball(center=shape.center, radius=shape.radius + h)
    problem = CellProblem(grown, params, generate_cell_mesh(grown, target_h))
    coeffs = problem.coefficients(0.0)
    thermal = problem.solve_thermal(0.0, coeffs)
    return effective_conductivity(problem, coeffs, thermal.fields)
