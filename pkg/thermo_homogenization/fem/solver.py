"""Linear solver with Krylov methods, residual verification and a direct polish."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from thermo_homogenization.errors import ConvergenceError, ValidationError
from thermo_homogenization.logger import log_debug
from thermo_homogenization.fem.constraints import SparseSystem

DENSE_LIMIT = 500
METHODS = ("auto", "direct", "cg", "minres", "bicgstab")


@dataclass
class SolveResult:
    """Result of a linear solve."""

    x: np.ndarray
    reduced: np.ndarray
    method: str
    iterations: int
    residual: float
    polished: bool = False

    @property
    def success(self) -> bool:
        return bool(np.all(np.isfinite(self.reduced)))


class LinearSolver:
    """Solver for constrained sparse systems.

    Provides:
    - Dense direct solve for small systems
    - Jacobi-preconditioned CG for symmetric positive definite systems
    - MINRES for symmetric saddle-point systems (zero-mean multipliers)
    - BiCGSTAB for non-symmetric systems (convection)
    - A sparse-direct polish when the verified residual misses the tolerance
    """

    def __init__(
        self,
        tol: float = 1e-10,
        max_iter: Optional[int] = None,
        method: str = "auto",
        dense_limit: int = DENSE_LIMIT,
    ) -> None:
        """
        Initialize the solver.

        Args:
            tol: Relative residual tolerance
            max_iter: Iteration cap for Krylov methods (default 20 * n, at least 2000)
            method: One of auto, direct, cg, minres, bicgstab
            dense_limit: Systems up to this size are solved densely in auto mode
        """
        if method not in METHODS:
            raise ValidationError(
                f"Unknown solver method: {method}. Available methods: {', '.join(METHODS)}"
            )
        self.tol = tol
        self.max_iter = max_iter
        self.method = method
        self.dense_limit = dense_limit

    def choose_method(self, system: SparseSystem) -> str:
        if self.method != "auto":
            return self.method
        if system.n_unknowns <= self.dense_limit:
            return "direct"
        if not system.is_symmetric():
            return "bicgstab"
        if system.n_multipliers:
            return "minres"
        return "cg"

    def solve(self, system: SparseSystem) -> SolveResult:
        """Solve and verify the residual.

        Raises:
            ConvergenceError: If the residual stays above tolerance
        """
        n = system.n_unknowns
        if n == 0 or not np.any(system.rhs):
            reduced = np.zeros(n)
            return SolveResult(system.expand(reduced), reduced, "trivial", 0, 0.0)

        method = self.choose_method(system)
        A = system.matrix
        b = system.rhs
        iterations = 0

        if method == "direct":
            reduced = self._direct(A, b)
        else:
            reduced, iterations = self._krylov(method, A, b)

        residual = system.residual(reduced)
        polished = False
        if not residual <= self.tol:
            log_debug(
                f"solver {method}: residual {residual:.3e} after {iterations} iterations, polishing"
            )
            reduced = self._direct(A, b)
            residual = system.residual(reduced)
            polished = True

        if not residual <= self.tol:
            raise ConvergenceError(
                f"Linear solve did not reach tolerance {self.tol:.1e} (residual {residual:.3e})",
                {"method": method, "iterations": iterations, "residual": residual, "unknowns": n},
            )

        log_debug(f"solver {method}: n={n} iterations={iterations} residual={residual:.3e}")
        return SolveResult(system.expand(reduced), reduced, method, iterations, residual, polished)

    # =========================================================================
    # Backends
    # =========================================================================

    def _direct(self, A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
        try:
            if A.shape[0] <= self.dense_limit:
                return np.linalg.solve(A.toarray(), b)
            x = spla.spsolve(sp.csc_matrix(A), b)
        except (np.linalg.LinAlgError, RuntimeError) as e:
            raise ConvergenceError(f"Direct solve failed: {e}", {"unknowns": A.shape[0]}) from e
        if not np.all(np.isfinite(x)):
            raise ConvergenceError(
                "Direct solve produced non-finite values", {"unknowns": A.shape[0]}
            )
        return x

    def _krylov(self, method: str, A: sp.csr_matrix, b: np.ndarray):
        n = A.shape[0]
        max_iter = self.max_iter or max(2000, 20 * n)
        diag = np.abs(A.diagonal())
        diag[diag == 0.0] = 1.0
        M = spla.LinearOperator((n, n), matvec=lambda r: r / diag)

        count = [0]

        def _callback(_: np.ndarray) -> None:
            count[0] += 1

        # Krylov stops at tol/10, the verified residual at tol.
        rtol = 0.1 * self.tol
        if method == "cg":
            x, info = spla.cg(A, b, rtol=rtol, maxiter=max_iter, M=M, callback=_callback)
        elif method == "minres":
            x, info = spla.minres(A, b, rtol=rtol, maxiter=max_iter, M=M, callback=_callback)
        else:
            x, info = spla.bicgstab(A, b, rtol=rtol, maxiter=max_iter, M=M, callback=_callback)

        if info < 0:
            raise ConvergenceError(f"{method} breakdown (info={info})", {"method": method})
        return x, count[0]


def solve(system: SparseSystem, tol: float = 1e-10, max_iter: Optional[int] = None) -> np.ndarray:
    """Solve a constrained system and return the full nodal vector."""
    return LinearSolver(tol=tol, max_iter=max_iter).solve(system).x
