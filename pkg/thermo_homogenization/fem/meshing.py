"""Mesh generators for the unit cell, the perforated cell and the macroscopic square."""

import math
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import Delaunay

from thermo_homogenization.errors import MeshingError, ValidationError
from thermo_homogenization.geometry import Ball, Shape, Superellipse
from thermo_homogenization.logger import log_debug
from thermo_homogenization.fem.mesh import FACE_TOL, INTERFACE, OUTER, Mesh, require_valid

RING_ROWS = 3
# Background nodes closer than this many grid spacings to the outer ring are dropped.
RING_CLEARANCE = 0.6
DENSE_SAMPLES = 4097


# =============================================================================
# Topology helpers
# =============================================================================


def boundary_edges(triangles: np.ndarray) -> np.ndarray:
    """Edges used by exactly one triangle, with their orientation kept."""
    edges = triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
    keys = np.sort(edges, axis=1)
    _, index, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    return edges[np.sort(index[counts == 1])]


def find_periodic_pairs(nodes: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Pair x=0 with x=1 nodes (all y) and y=0 with y=1 nodes (x < 1).

    The corner (1, 1) chains to (0, 0) through (0, 1).

    Raises:
        MeshingError: If a face node has no partner on the opposite face
    """
    pairs = []
    x, y = nodes[:, 0], nodes[:, 1]

    def _match(
        master_mask: np.ndarray, slave_mask: np.ndarray, coord: np.ndarray, face: str
    ) -> None:
        lookup = {round(float(coord[i]) / tol): i for i in np.flatnonzero(master_mask)}
        for s in np.flatnonzero(slave_mask):
            m = lookup.get(round(float(coord[s]) / tol))
            if m is None:
                raise MeshingError(
                    f"Face node without periodic partner on {face}",
                    {"node": int(s), "point": nodes[s].tolist()},
                )
            pairs.append((m, s))

    _match(np.abs(x) <= FACE_TOL, np.abs(x - 1.0) <= FACE_TOL, y, "x=1")
    _match(
        (np.abs(y) <= FACE_TOL) & (x < 1.0 - FACE_TOL),
        (np.abs(y - 1.0) <= FACE_TOL) & (x < 1.0 - FACE_TOL),
        x,
        "y=1",
    )
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def _on_same_face(nodes: np.ndarray, edges: np.ndarray) -> np.ndarray:
    ends = nodes[edges]
    same = np.zeros(len(edges), dtype=bool)
    for axis in range(2):
        for value in (0.0, 1.0):
            same |= np.all(np.abs(ends[:, :, axis] - value) <= FACE_TOL, axis=1)
    return same


# =============================================================================
# Structured meshes
# =============================================================================


def structured_mesh(n: int) -> Mesh:
    """Unit square split into n x n squares, each cut along its rising diagonal."""
    if n < 1:
        raise ValidationError(f"Need at least one square per side, got {n}")
    coords = np.arange(n + 1) / n
    X, Y = np.meshgrid(coords, coords)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    j, i = np.divmod(np.arange(n * n), n)
    a = j * (n + 1) + i
    b, c, d = a + 1, a + n + 2, a + n + 1
    triangles = np.vstack([np.column_stack([a, b, c]), np.column_stack([a, c, d])])

    return Mesh(
        nodes=nodes,
        triangles=triangles,
        boundary_edges=boundary_edges(triangles),
        periodic_pairs=find_periodic_pairs(nodes),
        metadata={"kind": "structured", "n": n},
    )


def generate_macro_mesh(nx: int, ny: Optional[int] = None) -> Mesh:
    """Crossed triangulation of (0,1)^2: every square gets a center node and four triangles.

    Args:
        nx: Squares along x
        ny: Squares along y, defaults to nx

    Returns:
        Mesh with all boundary edges tagged outer and no periodic pairs
    """
    ny = nx if ny is None else ny
    if nx < 1 or ny < 1:
        raise ValidationError(f"Macro mesh needs nx, ny >= 1, got ({nx}, {ny})")

    X, Y = np.meshgrid(np.arange(nx + 1) / nx, np.arange(ny + 1) / ny)
    corners = np.column_stack([X.ravel(), Y.ravel()])
    cx, cy = np.meshgrid((np.arange(nx) + 0.5) / nx, (np.arange(ny) + 0.5) / ny)
    centers = np.column_stack([cx.ravel(), cy.ravel()])
    nodes = np.vstack([corners, centers])

    j, i = np.divmod(np.arange(nx * ny), nx)
    a = j * (nx + 1) + i
    b, c, d = a + 1, a + nx + 2, a + nx + 1
    m = len(corners) + np.arange(nx * ny)
    triangles = np.vstack([
        np.column_stack([a, b, m]),
        np.column_stack([b, c, m]),
        np.column_stack([c, d, m]),
        np.column_stack([d, a, m]),
    ])
    return Mesh(
        nodes=nodes,
        triangles=triangles,
        boundary_edges=boundary_edges(triangles),
        metadata={"kind": "macro", "nx": nx, "ny": ny},
    )


# =============================================================================
# Perforated cell
# =============================================================================


def _has_square_symmetry(shape: Shape) -> bool:
    if not np.allclose(shape.center, 0.5, atol=0.0, rtol=0.0):
        return False
    if isinstance(shape, Ball):
        return True
    return isinstance(shape, Superellipse) and shape.semi_axes[0] == shape.semi_axes[1]


def _sample_arc(
    shape: Shape, theta0: float, theta1: float, spacing: float, closed: bool
) -> Tuple[np.ndarray, float]:
    """Equal arc-length samples of the interface between two polar angles."""
    dense = np.linspace(theta0, theta1, DENSE_SAMPLES)
    pts = shape.radial_point(np.column_stack([np.cos(dense), np.sin(dense)]))
    cumulative = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    length = cumulative[-1]
    m = max(int(math.ceil(length / spacing)), 8 if closed else 1)
    targets = np.linspace(0.0, length, m + 1)
    if closed:
        targets = targets[:-1]
    theta = np.interp(targets, cumulative, dense)
    return shape.radial_point(np.column_stack([np.cos(theta), np.sin(theta)])), length / m


def _ring(
    shape: Shape, arc: np.ndarray, delta: float, face_gap: float, grid_step: float
) -> Tuple[np.ndarray, int]:
    """Rows of nodes offset along the normal; fewer rows when the face is close."""
    rows = min(RING_ROWS, int(math.floor((face_gap - RING_CLEARANCE * grid_step) / delta)))
    if rows < 1:
        raise MeshingError(
            "Mesh size too coarse for the gap between inclusion and cell face",
            {"face_gap": face_gap, "spacing": delta},
        )
    normals = shape.unit_normal(arc)
    ring = np.vstack([arc + k * delta * normals for k in range(1, rows + 1)])
    return ring, rows


def _triangulate(points: np.ndarray, n_interface: int, chords: np.ndarray) -> np.ndarray:
    """Delaunay triangulation minus the triangles inside the inclusion."""
    tri = Delaunay(points).simplices.astype(np.int64)
    tri = tri[~np.all(tri < n_interface, axis=1)]
    p = points[tri]
    area = 0.5 * np.abs(
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    )
    tri = tri[area > 1e-14 * area.max()]

    edges = {
        tuple(sorted(e))
        for t in tri.tolist()
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))
    }
    missing = [c for c in chords.tolist() if tuple(sorted(c)) not in edges]
    if missing:
        raise MeshingError(
            "Interface chord not recovered by the triangulation",
            {"chord": missing[0], "point": points[missing[0][0]].tolist()},
        )
    return tri


def _wedge_mesh(shape: Shape, target_h: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mesh of the wedge 0 <= v <= u <= 1/2 in cell-centered coordinates."""
    k = int(math.ceil(0.5 / target_h))
    step = 0.5 / k
    arc, delta = _sample_arc(shape, 0.0, 0.25 * np.pi, 0.5 * target_h, closed=False)
    arc = arc - 0.5
    arc[0, 1] = 0.0
    arc[-1] = arc[-1].mean()
    face_gap = float((0.5 - arc[:, 0]).min())
    ring, _ = _ring(shape, arc + 0.5, delta, face_gap, step)
    ring = ring - 0.5
    m = len(arc)
    ring[0::m, 1] = 0.0
    ring[m - 1::m] = ring[m - 1::m].mean(axis=1, keepdims=True)

    i, j = np.tril_indices(k + 1)
    grid = np.column_stack([i * 0.5, j * 0.5]) / k
    distance = shape.signed_distance(grid + 0.5)
    threshold = float(np.linalg.norm(ring[-1] - arc[-1])) + RING_CLEARANCE * step
    keep = distance > threshold
    on_face = i == k
    if np.any(on_face & ~keep):
        raise MeshingError("Ring rows reach the cell face", {"threshold": threshold})
    points = np.vstack([arc, ring, grid[keep]])

    chords = np.column_stack([np.arange(m - 1), np.arange(1, m)])
    return points, _triangulate(points, m, chords), chords


def _reflect(points: np.ndarray, triangles: np.ndarray, chords: np.ndarray) -> Mesh:
    """Unfold a wedge mesh by the eight symmetries of the square."""
    images = []
    for swap in (False, True):
        base = points[:, ::-1] if swap else points
        for su in (1.0, -1.0):
            for sv in (1.0, -1.0):
                images.append(base * np.array([su, sv]))
    stacked = np.vstack(images) + 0.0
    keys = np.round(stacked, 12) + 0.0
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    nodes = stacked[first] + 0.5

    n = len(points)
    tri = np.vstack([inverse[triangles + r * n] for r in range(8)])
    iface = np.vstack([inverse[chords + r * n] for r in range(8)])
    return _assemble_cell(nodes, tri, iface)


def _full_cell_mesh(shape: Shape, target_h: float) -> Mesh:
    k = int(math.ceil(1.0 / target_h))
    step = 1.0 / k
    arc, delta = _sample_arc(shape, 0.0, 2.0 * np.pi, 0.5 * target_h, closed=True)
    face_gap = float(np.minimum(arc, 1.0 - arc).min())
    ring, rows = _ring(shape, arc, delta, face_gap, step)

    coords = np.arange(k + 1) / k
    X, Y = np.meshgrid(coords, coords)
    grid = np.column_stack([X.ravel(), Y.ravel()])
    threshold = rows * delta + RING_CLEARANCE * step
    keep = shape.signed_distance(grid) > threshold
    on_face = np.any((grid <= FACE_TOL) | (grid >= 1.0 - FACE_TOL), axis=1)
    if np.any(on_face & ~keep):
        raise MeshingError("Ring rows reach the cell face", {"threshold": threshold})

    m = len(arc)
    points = np.vstack([arc, ring, grid[keep]])
    chords = np.column_stack([np.arange(m), (np.arange(m) + 1) % m])
    tri = _triangulate(points, m, chords)
    return _assemble_cell(points, tri, chords)


def _assemble_cell(nodes: np.ndarray, triangles: np.ndarray, interface: np.ndarray) -> Mesh:
    mesh = Mesh(nodes=nodes, triangles=triangles).orient()
    require_valid(mesh)

    edges = boundary_edges(mesh.triangles)
    iface_keys = {tuple(sorted(e)) for e in interface.tolist()}
    is_iface = np.array([tuple(sorted(e)) in iface_keys for e in edges.tolist()], dtype=bool)
    is_outer = _on_same_face(nodes, edges)
    stray = ~(is_iface | is_outer)
    if stray.any():
        bad = edges[np.flatnonzero(stray)[0]]
        raise MeshingError(
            "Boundary edge neither on the interface nor on a cell face",
            {"edge": bad.tolist(), "point": nodes[bad[0]].tolist()},
        )

    mesh.boundary_edges = edges
    mesh.boundary_tags = np.where(is_iface, INTERFACE, OUTER).astype(np.int64)
    mesh.periodic_pairs = find_periodic_pairs(nodes)
    return mesh


def generate_cell_mesh(shape: Optional[Shape], target_h: float) -> Mesh:
    """Boundary-fitted periodic mesh of the pore part Y* of the unit cell.

    Interface nodes sit on the exact interface at half the target spacing,
    followed by up to three rows of nodes offset along the normal and a
    background grid. Shapes with the symmetry of the square are meshed on
    one eighth of the cell and unfolded so the mesh is exactly symmetric.

    Args:
        shape: 2D inclusion, or None for the cell without a hole
        target_h: Background grid spacing

    Returns:
        Mesh with interface/outer boundary tags and periodic pairs

    Raises:
        ValidationError: If the shape is not 2D or target_h is out of range
        MeshingError: If the interface cannot be resolved
    """
    if not 0.0 < target_h <= 0.5:
        raise ValidationError(f"Mesh size must lie in (0, 0.5], got {target_h}")
    if shape is None:
        return structured_mesh(int(math.ceil(1.0 / target_h)))
    if shape.dim != 2:
        raise ValidationError(f"Cell meshing is 2D only, got a {shape.dim}D shape")

    if _has_square_symmetry(shape):
        mesh = _reflect(*_wedge_mesh(shape, target_h))
    else:
        mesh = _full_cell_mesh(shape, target_h)
    mesh.metadata.update({"kind": "cell", "target_h": target_h, "shape": shape.to_dict()})
    log_debug(f"cell mesh: {mesh}")
    return mesh
