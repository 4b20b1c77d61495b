"""Perforated domain Omega_eps tiled from the reference cell mesh."""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from thermo_homogenization.errors import MeshingError, ValidationError
from thermo_homogenization.fem import INTERFACE, OUTER, Mesh, generate_cell_mesh
from thermo_homogenization.fem.mesh import FACE_TOL, unpaired_face_nodes
from thermo_homogenization.fem.meshing import boundary_edges
from thermo_homogenization.geometry import CellIndexing, Shape
from thermo_homogenization.logger import log_debug

# Relative to eps; cell meshes place face nodes exactly, so any real gap is far larger.
MERGE_TOL = 1e-9


@dataclass(eq=False)
class EpsMesh:
    """Mesh of Omega_eps with its cell structure.

    Triangle ``k * nt_cell + j`` is triangle ``j`` of the reference cell
    mesh placed in cell ``k``; interface edges are grouped the same way,
    so per-cell coefficient arrays computed on the cell mesh concatenate
    directly into fields on this mesh.

    Attributes:
        mesh: Tiled mesh; regions hold the flat cell index
        indexing: Cell numbering (first index fastest)
        cell_mesh: Reference cell mesh on (0, 1)^2
        interface_cell: (ne,) flat cell index of each interface edge
        node_map: (n_cells, nv_cell) global node of each local node
    """

    mesh: Mesh
    indexing: CellIndexing
    cell_mesh: Mesh
    interface_cell: np.ndarray
    node_map: np.ndarray

    @property
    def level(self) -> int:
        return self.indexing.level

    @property
    def eps(self) -> float:
        return self.indexing.eps

    @property
    def n_cells(self) -> int:
        return self.indexing.n_cells

    @cached_property
    def cells(self) -> np.ndarray:
        """(n_cells, 2) cell indices k in flat order."""
        return self.indexing.indices()

    @property
    def interface_edges(self) -> np.ndarray:
        return self.mesh.interface_edges

    @cached_property
    def interface_lengths(self) -> np.ndarray:
        """Reference interface length per cell."""
        lengths = self.mesh.edge_lengths(self.interface_edges)
        return np.bincount(self.interface_cell, lengths, minlength=self.n_cells)

    @cached_property
    def cell_areas(self) -> np.ndarray:
        """Pore area per cell."""
        return np.bincount(self.mesh.regions, self.mesh.areas, minlength=self.n_cells)

    def cell_triangles(self, k: int) -> slice:
        nt = self.cell_mesh.n_triangles
        return slice(k * nt, (k + 1) * nt)

    def cell_interface_edges(self, k: int) -> np.ndarray:
        return self.interface_edges[self.interface_cell == k]

    def __repr__(self) -> str:
        return f"EpsMesh(level={self.level}, cells={self.n_cells}, {self.mesh!r})"


def _merge_labels(points: np.ndarray, tol: float) -> np.ndarray:
    """Label coincident points; labels follow the first occurrence."""
    n = len(points)
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    graph = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    n_labels, labels = connected_components(graph, directed=False)
    first = np.full(n_labels, n, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(n))
    relabel = np.empty(n_labels, dtype=np.int64)
    relabel[np.argsort(first, kind="stable")] = np.arange(n_labels)
    return relabel[labels]


def _on_domain_boundary(nodes: np.ndarray, edges: np.ndarray) -> np.ndarray:
    ends = nodes[edges]
    on = np.zeros(len(edges), dtype=bool)
    for axis in range(2):
        for value in (0.0, 1.0):
            on |= np.all(np.abs(ends[:, :, axis] - value) <= FACE_TOL, axis=1)
    return on


def build_eps_mesh(
    shape: Optional[Shape],
    n: int,
    cell_mesh: Optional[Mesh] = None,
    target_h: float = 0.1,
) -> EpsMesh:
    """
    Tile Omega = (0, 1)^2 with 2^n x 2^n copies of the reference cell mesh.

    Each copy is the cell mesh scaled by eps = 2^-n and shifted by eps * k;
    nodes shared by neighbouring cells are merged.

    Args:
        shape: Inclusion of the reference cell (None for no inclusion)
        n: Refinement level
        cell_mesh: Periodic reference cell mesh (generated when omitted)
        target_h: Cell mesh size used when generating

    Returns:
        EpsMesh with outer boundary and per-cell interface groups

    Raises:
        ValidationError: If the cell mesh is not periodic-conforming
        MeshingError: If face nodes fail to merge
    """
    indexing = CellIndexing(n)
    if cell_mesh is None:
        cell_mesh = generate_cell_mesh(shape, target_h)
    unpaired = unpaired_face_nodes(cell_mesh)
    if len(unpaired):
        raise ValidationError(
            f"Cell mesh is not periodic-conforming: {len(unpaired)} face nodes without a partner",
            {"nodes": unpaired[:10].tolist()},
        )

    eps = indexing.eps
    cells = indexing.indices()
    n_cells = len(cells)
    nv_cell = cell_mesh.n_nodes

    stacked = (eps * (cell_mesh.nodes[None, :, :] + cells[:, None, :])).reshape(-1, 2)
    labels = _merge_labels(stacked, MERGE_TOL * eps)
    _, first = np.unique(labels, return_index=True)
    nodes = stacked[first]

    spread = float(np.abs(stacked - nodes[labels]).max())
    owners = labels.reshape(n_cells, nv_cell)
    if spread > MERGE_TOL * eps or any(len(np.unique(row)) != nv_cell for row in owners):
        raise MeshingError(
            "Node merge joined points of the same cell", {"level": n, "spread": float(spread)}
        )

    offsets = (np.arange(n_cells) * nv_cell)[:, None, None]
    triangles = labels[(cell_mesh.triangles[None] + offsets).reshape(-1, 3)]
    regions = np.repeat(np.arange(n_cells), cell_mesh.n_triangles)

    local_iface = cell_mesh.interface_edges
    interface = labels[(local_iface[None] + offsets).reshape(-1, 2)]
    interface_cell = np.repeat(np.arange(n_cells), len(local_iface))

    all_boundary = boundary_edges(triangles)
    iface_keys = {tuple(sorted(e)) for e in interface.tolist()}
    is_iface = np.array([tuple(sorted(e)) in iface_keys for e in all_boundary.tolist()], dtype=bool)
    outer = all_boundary[~is_iface]
    on_boundary = _on_domain_boundary(nodes, outer)
    if not on_boundary.all():
        bad = outer[np.flatnonzero(~on_boundary)[0]]
        raise MeshingError(
            "Cell faces did not merge: free edge inside Omega",
            {"level": n, "edge": bad.tolist(), "point": nodes[bad[0]].tolist()},
        )

    mesh = Mesh(
        nodes=nodes,
        triangles=triangles,
        regions=regions,
        boundary_edges=np.vstack([interface, outer]),
        boundary_tags=np.concatenate(
            [
                np.full(len(interface), INTERFACE, dtype=np.int64),
                np.full(len(outer), OUTER, dtype=np.int64),
            ]
        ),
        metadata={"kind": "eps", "level": n, "eps": eps},
    )
    eps_mesh = EpsMesh(
        mesh=mesh,
        indexing=indexing,
        cell_mesh=cell_mesh,
        interface_cell=interface_cell,
        node_map=owners,
    )
    log_debug(f"eps mesh: {eps_mesh}")
    return eps_mesh
