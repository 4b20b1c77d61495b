"""Constraint handling: Dirichlet elimination, periodic fold and zero-mean multipliers."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sp

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.fem.mesh import Mesh


class ConstraintMode(str, Enum):
    NONE = "none"
    DIRICHLET = "dirichlet-rows"
    PERIODIC = "periodic-fold"
    ZERO_MEAN = "zero-mean-lagrange"


@dataclass
class SparseSystem:
    """Linear system in reduced unknowns.

    The full nodal vector is ``prolongation @ x[:n_reduced] + lift``; the
    last ``n_multipliers`` unknowns are Lagrange multipliers.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    mode: ConstraintMode = ConstraintMode.NONE
    prolongation: Optional[sp.csr_matrix] = None
    lift: Optional[np.ndarray] = None
    n_multipliers: int = 0

    def __post_init__(self) -> None:
        self.matrix = sp.csr_matrix(self.matrix)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.matrix.shape != (len(self.rhs), len(self.rhs)):
            raise ValidationError(
                f"Matrix shape {self.matrix.shape} does not match rhs length {len(self.rhs)}"
            )

    @property
    def n_unknowns(self) -> int:
        return len(self.rhs)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        diff = self.matrix - self.matrix.T
        scale = max(abs(self.matrix).max(), 1e-300)
        return diff.nnz == 0 or abs(diff).max() <= tol * scale

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Full nodal vector from a reduced solution."""
        primal = x[: len(x) - self.n_multipliers]
        full = primal if self.prolongation is None else self.prolongation @ primal
        if self.lift is not None:
            full = full + self.lift
        return np.asarray(full)

    def multipliers(self, x: np.ndarray) -> np.ndarray:
        return x[len(x) - self.n_multipliers:]

    def residual(self, x: np.ndarray) -> float:
        """Relative residual ||b - A x|| / ||b|| (absolute when b = 0)."""
        r = np.linalg.norm(self.rhs - self.matrix @ x)
        b = np.linalg.norm(self.rhs)
        return float(r / b) if b > 0 else float(r)


# =============================================================================
# Prolongations
# =============================================================================


def periodic_prolongation(mesh: Mesh, components: int = 1) -> sp.csr_matrix:
    """Map periodic unknowns to nodal values.

    Master/slave chains (the corners) resolve to one representative per
    equivalence class. Columns follow the sorted representative index.
    """
    rep = np.arange(mesh.n_nodes)
    rep[mesh.periodic_pairs[:, 1]] = mesh.periodic_pairs[:, 0]
    while True:
        resolved = rep[rep]
        if np.array_equal(resolved, rep):
            break
        rep = resolved
    _, columns = np.unique(rep, return_inverse=True)
    columns = columns.reshape(-1)
    P = sp.csr_matrix(
        (np.ones(mesh.n_nodes), (np.arange(mesh.n_nodes), columns)),
        shape=(mesh.n_nodes, int(columns.max()) + 1),
    )
    if components == 1:
        return P
    return sp.csr_matrix(sp.kron(P, sp.identity(components)))


def selection_prolongation(n: int, fixed: np.ndarray) -> sp.csr_matrix:
    """Identity restricted to the columns of the free unknowns."""
    free = np.setdiff1d(np.arange(n), fixed)
    return sp.csr_matrix((np.ones(len(free)), (free, np.arange(len(free)))), shape=(n, len(free)))


# =============================================================================
# Constrained systems
# =============================================================================


def apply_dirichlet(
    matrix: sp.spmatrix, rhs: np.ndarray, fixed: np.ndarray, values: Optional[np.ndarray] = None
) -> SparseSystem:
    """Eliminate prescribed unknowns; the reduced matrix keeps symmetry."""
    n = len(rhs)
    fixed = np.asarray(fixed, dtype=np.int64).ravel()
    lift = np.zeros(n)
    if values is not None:
        lift[fixed] = np.broadcast_to(np.asarray(values, dtype=float), fixed.shape)
    fixed = np.unique(fixed)
    P = selection_prolongation(n, fixed)
    A = sp.csr_matrix(matrix)
    return SparseSystem(
        matrix=P.T @ A @ P,
        rhs=P.T @ (rhs - A @ lift),
        mode=ConstraintMode.DIRICHLET,
        prolongation=P,
        lift=lift,
    )


def periodic_fold(
    matrix: sp.spmatrix, rhs: np.ndarray, prolongation: sp.csr_matrix
) -> SparseSystem:
    P = prolongation
    return SparseSystem(
        matrix=P.T @ sp.csr_matrix(matrix) @ P,
        rhs=P.T @ rhs,
        mode=ConstraintMode.PERIODIC,
        prolongation=P,
    )


def zero_mean_system(
    matrix: sp.spmatrix,
    rhs: np.ndarray,
    prolongation: sp.csr_matrix,
    weights: np.ndarray,
) -> SparseSystem:
    """Periodic fold plus one Lagrange multiplier per weight column.

    Args:
        matrix: Unconstrained matrix on full nodal unknowns
        rhs: Unconstrained right-hand side
        prolongation: Periodic prolongation
        weights: (n_full,) or (n_full, k) with int phi_i per component

    Returns:
        Saddle-point system [[P^T A P, B], [B^T, 0]] with B = P^T W
    """
    folded = periodic_fold(matrix, rhs, prolongation)
    W = np.asarray(weights, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    B = sp.csr_matrix(prolongation.T @ W)
    k = W.shape[1]
    saddle = sp.bmat([[folded.matrix, B], [B.T, None]], format="csr")
    return SparseSystem(
        matrix=saddle,
        rhs=np.concatenate([folded.rhs, np.zeros(k)]),
        mode=ConstraintMode.ZERO_MEAN,
        prolongation=prolongation,
        n_multipliers=k,
    )


def zero_mean_weights(node_weights: np.ndarray, components: int = 1) -> np.ndarray:
    """Weight columns for the zero-mean constraint of each component."""
    w = np.asarray(node_weights, dtype=float)
    if components == 1:
        return w[:, None]
    W = np.zeros((components * len(w), components))
    for c in range(components):
        W[c::components, c] = w
    return W
