"""P1 finite-element assembly on triangle meshes."""

from typing import Any, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from thermo_homogenization.errors import ValidationError
from thermo_homogenization.fem.constraints import ConstraintMode, SparseSystem
from thermo_homogenization.fem.mesh import Mesh
from thermo_homogenization.fem.quadrature import (
    EDGE_2,
    TRIANGLE_3,
    EdgeRule,
    TriangleRule,
    edge_points,
    triangle_points,
)

SYMMETRY_TOL = 1e-12


def vector_dofs(node_ids: np.ndarray) -> np.ndarray:
    """Degrees of freedom 2*node + component for the nodes of each row."""
    dofs = 2 * node_ids[..., None] + np.arange(2)
    return dofs.reshape(node_ids.shape[0], -1)


def _scatter(local: np.ndarray, dofs: np.ndarray, n: int) -> sp.csr_matrix:
    k = dofs.shape[1]
    rows = np.broadcast_to(dofs[:, :, None], (len(dofs), k, k)).ravel()
    cols = np.broadcast_to(dofs[:, None, :], (len(dofs), k, k)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _scatter_vector(local: np.ndarray, dofs: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    np.add.at(out, dofs.ravel(), local.ravel())
    return out


def _check_symmetric(A: np.ndarray, axes: Tuple[int, ...], what: str) -> None:
    diff = np.abs(A - np.transpose(A, axes)).max() if A.size else 0.0
    scale = max(np.abs(A).max() if A.size else 0.0, 1.0)
    if diff > SYMMETRY_TOL * scale:
        raise ValidationError(
            f"{what} is not symmetric (asymmetry {diff:.3e})", {"asymmetry": float(diff)}
        )


class Assembler:
    """Cached element geometry and quadrature for one mesh.

    Coefficient fields are accepted as constants, per-triangle arrays
    (nt, ...) or per-quadrature-point arrays (nt, nq, ...). Interface
    fields are per edge (ne, ...) or per edge quadrature point (ne, nq, ...).
    """

    def __init__(self, mesh: Mesh, rule: TriangleRule = TRIANGLE_3, edge_rule: EdgeRule = EDGE_2):
        self.mesh = mesh
        self.rule = rule
        self.edge_rule = edge_rule

        p = mesh.nodes[mesh.triangles]
        B = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)
        Binv = np.linalg.inv(B)
        grads = np.empty((mesh.n_triangles, 3, 2))
        grads[:, 1:] = Binv
        grads[:, 0] = -Binv.sum(axis=1)

        self.areas = mesh.areas
        self.grads = grads
        self.phi = rule.barycentric
        self.weights = self.areas[:, None] * rule.weights[None, :]
        self.points = triangle_points(mesh.nodes, mesh.triangles, rule)

    @property
    def n_nodes(self) -> int:
        return self.mesh.n_nodes

    @property
    def n_quad(self) -> int:
        return self.rule.n_points

    # =========================================================================
    # Field helpers
    # =========================================================================

    def _field(self, value: Any, tail: Tuple[int, ...], n_items: int, n_quad: int) -> np.ndarray:
        arr = np.asarray(value, dtype=float)
        if arr.shape == tail:
            arr = arr[None, None]
        elif arr.shape == (n_items,) + tail:
            arr = arr[:, None]
        try:
            return np.broadcast_to(arr, (n_items, n_quad) + tail)
        except ValueError as e:
            raise ValidationError(
                f"Field of shape {np.shape(value)} does not fit {(n_items, n_quad) + tail}"
            ) from e

    def field(self, value: Any, tail: Tuple[int, ...] = ()) -> np.ndarray:
        return self._field(value, tail, self.mesh.n_triangles, self.n_quad)

    def _matrix_field(self, value: Any) -> np.ndarray:
        if np.ndim(value) == 0:
            value = float(value) * np.eye(2)
        return self.field(value, (2, 2))

    def edges(self, edges: Optional[np.ndarray]) -> np.ndarray:
        if edges is None:
            return self.mesh.interface_edges
        return np.asarray(edges, dtype=np.int64).reshape(-1, 2)

    def edge_quadrature(self, edges: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Edge quadrature points (ne, nq, 2) and weights (ne, nq)."""
        edges = self.edges(edges)
        lengths = self.mesh.edge_lengths(edges)
        points = edge_points(self.mesh.nodes, edges, self.edge_rule)
        return points, lengths[:, None] * self.edge_rule.weights

    def edge_field(self, value: Any, edges: np.ndarray, tail: Tuple[int, ...] = ()) -> np.ndarray:
        return self._field(value, tail, len(edges), self.edge_rule.n_points)

    # =========================================================================
    # Matrices
    # =========================================================================

    def stiffness(self, A: Any = 1.0) -> sp.csr_matrix:
        """K_ij = sum_T int A grad(phi_j) . grad(phi_i)."""
        A = self._matrix_field(A)
        _check_symmetric(A, (0, 1, 3, 2), "Conductivity field")
        A_bar = np.einsum("tq,tqij->tij", self.weights, A)
        local = np.einsum("tai,tij,tbj->tab", self.grads, A_bar, self.grads)
        return _scatter(local, self.mesh.triangles, self.n_nodes)

    def mass(self, m: Any = 1.0, lumped: bool = False) -> sp.csr_matrix:
        """M_ij = int m phi_i phi_j, optionally row-sum lumped."""
        m = self.field(m)
        if lumped:
            diag = np.einsum("tq,tq,qa->ta", self.weights, m, self.phi)
            return sp.diags(_scatter_vector(diag, self.mesh.triangles, self.n_nodes)).tocsr()
        local = np.einsum("tq,tq,qa,qb->tab", self.weights, m, self.phi, self.phi)
        return _scatter(local, self.mesh.triangles, self.n_nodes)

    def convection(self, c: Any, w: Any) -> sp.csr_matrix:
        """N_ij = int c phi_j (w . grad phi_i)."""
        c = self.field(c)
        w = self.field(w, (2,))
        local = np.einsum("tq,tq,tqi,tai,qb->tab", self.weights, c, w, self.grads, self.phi)
        return _scatter(local, self.mesh.triangles, self.n_nodes)

    def surface_mass(self, b: Any = 1.0, edges: Optional[np.ndarray] = None) -> sp.csr_matrix:
        """int_Gamma b phi_i phi_j over interface (or given) edges."""
        edges = self.edges(edges)
        _, weights = self.edge_quadrature(edges)
        b = self.edge_field(b, edges)
        psi = self.edge_rule.shape_values
        local = np.einsum("eq,eq,qa,qb->eab", weights, b, psi, psi)
        return _scatter(local, edges, self.n_nodes)

    def elastic(self, C: Any, check_minor: bool = True) -> sp.csr_matrix:
        """K_(ai)(bk) = int C_ijkl d_j phi_b d_l phi_a with dofs 2*node + component."""
        C = self.field(C, (2, 2, 2, 2))
        _check_symmetric(C, (0, 1, 4, 5, 2, 3), "Stiffness field (major)")
        if check_minor:
            _check_symmetric(C, (0, 1, 3, 2, 4, 5), "Stiffness field (minor)")
        C_bar = np.einsum("tq,tqijkl->tijkl", self.weights, C)
        local = np.einsum("taj,tijkl,tbl->taibk", self.grads, C_bar, self.grads)
        nt = self.mesh.n_triangles
        return _scatter(local.reshape(nt, 6, 6), vector_dofs(self.mesh.triangles), 2 * self.n_nodes)

    # =========================================================================
    # Load vectors
    # =========================================================================

    def load(self, f: Any = 1.0) -> np.ndarray:
        """b_i = int f phi_i."""
        local = np.einsum("tq,tq,qa->ta", self.weights, self.field(f), self.phi)
        return _scatter_vector(local, self.mesh.triangles, self.n_nodes)

    def flux_load(self, q: Any) -> np.ndarray:
        """b_i = int q . grad phi_i."""
        local = np.einsum("tq,tqi,tai->ta", self.weights, self.field(q, (2,)), self.grads)
        return _scatter_vector(local, self.mesh.triangles, self.n_nodes)

    def vector_load(self, f: Any) -> np.ndarray:
        """b_(ai) = int f_i phi_a."""
        local = np.einsum("tq,tqi,qa->tai", self.weights, self.field(f, (2,)), self.phi)
        return _scatter_vector(local, vector_dofs(self.mesh.triangles), 2 * self.n_nodes)

    def stress_load(self, S: Any) -> np.ndarray:
        """b_(ai) = int S_ij d_j phi_a."""
        local = np.einsum("tq,tqij,taj->tai", self.weights, self.field(S, (2, 2)), self.grads)
        return _scatter_vector(local, vector_dofs(self.mesh.triangles), 2 * self.n_nodes)

    def surface_load(self, g: Any, edges: Optional[np.ndarray] = None) -> np.ndarray:
        edges = self.edges(edges)
        _, weights = self.edge_quadrature(edges)
        values = self.edge_field(g, edges)
        local = np.einsum("eq,eq,qa->ea", weights, values, self.edge_rule.shape_values)
        return _scatter_vector(local, edges, self.n_nodes)

    def surface_vector_load(self, g: Any, edges: Optional[np.ndarray] = None) -> np.ndarray:
        edges = self.edges(edges)
        _, weights = self.edge_quadrature(edges)
        g = self.edge_field(g, edges, (2,))
        local = np.einsum("eq,eqi,qa->eai", weights, g, self.edge_rule.shape_values)
        return _scatter_vector(local, vector_dofs(edges), 2 * self.n_nodes)

    # =========================================================================
    # Evaluation
    # =========================================================================

    def interpolate(self, u: np.ndarray) -> np.ndarray:
        """Nodal values to quadrature points; (nv,) -> (nt, nq), (nv, 2) -> (nt, nq, 2)."""
        u = np.asarray(u, dtype=float)
        return np.einsum("qa,ta...->tq...", self.phi, u[self.mesh.triangles])

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Elementwise gradient (nt, 2) of a nodal scalar field."""
        return np.einsum("ta,tai->ti", np.asarray(u, dtype=float)[self.mesh.triangles], self.grads)

    def vector_gradient(self, u: np.ndarray) -> np.ndarray:
        """Elementwise gradient (nt, 2, 2) of a nodal vector field, G_ij = d_j u_i."""
        values = np.asarray(u, dtype=float)[self.mesh.triangles]
        return np.einsum("tai,taj->tij", values, self.grads)

    def edge_interpolate(self, u: np.ndarray, edges: Optional[np.ndarray] = None) -> np.ndarray:
        edges = self.edges(edges)
        values = np.asarray(u, dtype=float)[edges]
        return np.einsum("qa,ea->eq", self.edge_rule.shape_values, values)

    def integrate(self, values: Any) -> float:
        return float(np.einsum("tq,tq->", self.weights, self.field(values)))

    def edge_integrate(self, values: Any, edges: Optional[np.ndarray] = None) -> float:
        edges = self.edges(edges)
        _, weights = self.edge_quadrature(edges)
        return float(np.einsum("eq,eq->", weights, self.edge_field(values, edges)))


# =============================================================================
# Convenience wrappers
# =============================================================================


def assemble_scalar(
    mesh: Mesh,
    coeff: Any = 1.0,
    mass: Any = 0.0,
    surface: Any = 0.0,
    assembler: Optional[Assembler] = None,
) -> SparseSystem:
    """Unconstrained system int A grad.grad + int m phi phi + int_Gamma b phi phi."""
    asm = assembler or Assembler(mesh)
    matrix = asm.stiffness(coeff)
    if np.any(np.asarray(mass) != 0):
        matrix = matrix + asm.mass(mass)
    if np.any(np.asarray(surface) != 0) and len(mesh.interface_edges):
        matrix = matrix + asm.surface_mass(surface)
    return SparseSystem(
        matrix=sp.csr_matrix(matrix), rhs=np.zeros(mesh.n_nodes), mode=ConstraintMode.NONE
    )


def assemble_elastic(
    mesh: Mesh, C: Any, check_minor: bool = True, assembler: Optional[Assembler] = None
) -> SparseSystem:
    """Unconstrained vector system int C grad(phi_j) : grad(phi_i)."""
    asm = assembler or Assembler(mesh)
    return SparseSystem(
        matrix=asm.elastic(C, check_minor=check_minor),
        rhs=np.zeros(2 * mesh.n_nodes),
        mode=ConstraintMode.NONE,
    )
