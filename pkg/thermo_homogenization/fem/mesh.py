"""Triangle mesh container, ASCII I/O and quality report."""

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from thermo_homogenization.errors import MeshingError, ValidationError

OUTER = 0
INTERFACE = 1
TAG_NAMES = {OUTER: "outer", INTERFACE: "interface"}
TAG_CODES = {name: code for code, name in TAG_NAMES.items()}

# Coordinates within this distance of a cell face count as on the face.
FACE_TOL = 1e-10


@dataclass(eq=False)
class Mesh:
    """P1 triangle mesh.

    Attributes:
        nodes: (nv, 2) coordinates
        triangles: (nt, 3) node indices, counterclockwise
        regions: (nt,) region tag per triangle (cell id on tiled meshes)
        boundary_edges: (nbe, 2) node pairs
        boundary_tags: (nbe,) OUTER or INTERFACE
        periodic_pairs: (np, 2) master/slave node pairs on opposite faces
    """

    nodes: np.ndarray
    triangles: np.ndarray
    regions: Optional[np.ndarray] = None
    boundary_edges: Optional[np.ndarray] = None
    boundary_tags: Optional[np.ndarray] = None
    periodic_pairs: Optional[np.ndarray] = None
    dim: int = 2
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.regions is None:
            self.regions = np.zeros(len(self.triangles), dtype=np.int64)
        self.regions = np.asarray(self.regions, dtype=np.int64)
        if self.boundary_edges is None:
            self.boundary_edges = np.zeros((0, 2), dtype=np.int64)
        self.boundary_edges = np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        if self.boundary_tags is None:
            self.boundary_tags = np.full(len(self.boundary_edges), OUTER, dtype=np.int64)
        self.boundary_tags = np.asarray(self.boundary_tags, dtype=np.int64)
        if self.periodic_pairs is None:
            self.periodic_pairs = np.zeros((0, 2), dtype=np.int64)
        self.periodic_pairs = np.asarray(self.periodic_pairs, dtype=np.int64).reshape(-1, 2)

        if len(self.regions) != len(self.triangles):
            raise ValidationError("One region tag per triangle required")
        if len(self.boundary_tags) != len(self.boundary_edges):
            raise ValidationError("One tag per boundary edge required")
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= self.n_nodes
        ):
            raise ValidationError("Triangle references a missing node")

    # =========================================================================
    # Sizes and geometry
    # =========================================================================

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def areas(self) -> np.ndarray:
        return np.abs(self.signed_areas)

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    @property
    def interface_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_tags == INTERFACE]

    @property
    def outer_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_tags == OUTER]

    @property
    def interface_nodes(self) -> np.ndarray:
        return np.unique(self.interface_edges)

    @property
    def outer_nodes(self) -> np.ndarray:
        return np.unique(self.outer_edges)

    def edge_lengths(self, edges: np.ndarray) -> np.ndarray:
        ends = self.nodes[edges]
        return np.linalg.norm(ends[:, 1] - ends[:, 0], axis=1)

    def interface_length(self) -> float:
        return float(self.edge_lengths(self.interface_edges).sum())

    def min_angles(self) -> np.ndarray:
        """Smallest interior angle of each triangle in degrees."""
        p = self.nodes[self.triangles]
        angles = []
        for a in range(3):
            u = p[:, (a + 1) % 3] - p[:, a]
            v = p[:, (a + 2) % 3] - p[:, a]
            cos = np.einsum("ti,ti->t", u, v) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
            )
            angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
        return np.min(np.column_stack(angles), axis=1)

    def size(self) -> float:
        """Longest edge length."""
        p = self.nodes[self.triangles]
        return float(max(
            np.linalg.norm(p[:, (a + 1) % 3] - p[:, a], axis=1).max() for a in range(3)
        ))

    def orient(self) -> "Mesh":
        """Flip clockwise triangles in place."""
        flip = self.signed_areas < 0
        if flip.any():
            self.triangles[flip] = self.triangles[flip][:, [0, 2, 1]]
            self.__dict__.pop("signed_areas", None)
        return self

    def scaled(self, factor: float, shift: Any = (0.0, 0.0)) -> "Mesh":
        """Copy with nodes mapped to factor * x + shift."""
        return Mesh(
            nodes=factor * self.nodes + np.asarray(shift, dtype=float),
            triangles=self.triangles.copy(),
            regions=self.regions.copy(),
            boundary_edges=self.boundary_edges.copy(),
            boundary_tags=self.boundary_tags.copy(),
            periodic_pairs=self.periodic_pairs.copy(),
            metadata=dict(self.metadata),
        )

    def barycentric(self, points: Any, tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
        """
        Locate points in the mesh.

        Args:
            points: (N, 2) points inside the meshed region
            tol: Barycentric slack for points on edges

        Returns:
            Tuple (triangle index (N,), barycentric coordinates (N, 3))

        Raises:
            ValidationError: If a point lies outside every triangle
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        owners = np.empty(len(pts), dtype=np.int64)
        coords = np.empty((len(pts), 3))
        for i, x in enumerate(pts):
            d = x - p[:, 0]
            l1 = (d[:, 0] * e2[:, 1] - d[:, 1] * e2[:, 0]) / det
            l2 = (e1[:, 0] * d[:, 1] - e1[:, 1] * d[:, 0]) / det
            lam = np.column_stack([1.0 - l1 - l2, l1, l2])
            worst = lam.min(axis=1)
            t = int(np.argmax(worst))
            if worst[t] < -tol:
                raise ValidationError(
                    f"Point {x.tolist()} lies outside the mesh", {"point": x.tolist()}
                )
            owners[i] = t
            coords[i] = lam[t]
        return owners, coords

    def evaluate(self, values: np.ndarray, points: Any) -> np.ndarray:
        """P1 interpolant of nodal values at points; (nv,) -> (N,), (nv, k) -> (N, k)."""
        owners, coords = self.barycentric(points)
        nodal = np.asarray(values, dtype=float)[self.triangles[owners]]
        return np.einsum("na,na...->n...", coords, nodal)

    def __repr__(self) -> str:
        return (
            f"Mesh(nodes={self.n_nodes}, triangles={self.n_triangles}, "
            f"interface_edges={len(self.interface_edges)}, "
            f"periodic_pairs={len(self.periodic_pairs)})"
        )


# =============================================================================
# ASCII format
# =============================================================================


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    """Write the mesh in the ASCII exchange format.

    Layout: ``dim nv nt nbe np`` header, then node lines ``x y``, triangle
    lines ``i j k region``, boundary lines ``i j tag`` and periodic lines
    ``master slave``. Indices are 0-based.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{mesh.dim} {mesh.n_nodes} {mesh.n_triangles} "
        f"{len(mesh.boundary_edges)} {len(mesh.periodic_pairs)}"
    ]
    lines += [f"{x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    lines += [
        f"{i} {j} {k} {r}" for (i, j, k), r in zip(mesh.triangles.tolist(), mesh.regions.tolist())
    ]
    lines += [
        f"{i} {j} {TAG_NAMES[t]}"
        for (i, j), t in zip(mesh.boundary_edges.tolist(), mesh.boundary_tags.tolist())
    ]
    lines += [f"{m} {s}" for m, s in mesh.periodic_pairs.tolist()]

    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(path)
    return path


def read_mesh(path: Union[str, Path]) -> Mesh:
    """Read a mesh written by :func:`write_mesh`.

    Raises:
        ValidationError: If the file is truncated or malformed
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"Mesh file not found: {path}", {"path": str(path)})

    rows = [line.split() for line in path.read_text().splitlines() if line.strip()]
    try:
        dim, nv, nt, nbe, npair = (int(v) for v in rows[0])
        cursor = 1
        nodes = np.array([[float(v) for v in r] for r in rows[cursor:cursor + nv]]).reshape(-1, 2)
        cursor += nv
        tri_rows = rows[cursor:cursor + nt]
        cursor += nt
        edge_rows = rows[cursor:cursor + nbe]
        cursor += nbe
        pair_rows = rows[cursor:cursor + npair]
        cursor += npair
    except (IndexError, ValueError) as e:
        raise ValidationError(f"Malformed mesh file {path}: {e}", {"path": str(path)}) from e

    if dim != 2:
        raise ValidationError(f"Only 2D meshes are supported, got dim={dim}")
    if len(nodes) != nv or len(tri_rows) != nt or len(edge_rows) != nbe or len(pair_rows) != npair:
        raise ValidationError(f"Truncated mesh file: {path}", {"path": str(path)})

    def _tag(value: str) -> int:
        return TAG_CODES[value] if value in TAG_CODES else int(value)

    return Mesh(
        nodes=nodes,
        triangles=np.array([[int(v) for v in r[:3]] for r in tri_rows], dtype=np.int64),
        regions=np.array([int(r[3]) if len(r) > 3 else 0 for r in tri_rows], dtype=np.int64),
        boundary_edges=np.array([[int(r[0]), int(r[1])] for r in edge_rows], dtype=np.int64),
        boundary_tags=np.array([_tag(r[2]) for r in edge_rows], dtype=np.int64),
        periodic_pairs=np.array([[int(v) for v in r] for r in pair_rows], dtype=np.int64),
    )


# =============================================================================
# Quality report
# =============================================================================


@dataclass
class MeshReport:
    """Result of a mesh quality check."""

    n_nodes: int
    n_triangles: int
    min_angle: float
    negative_triangles: int
    area: float
    inclusion_area: float
    interface_residual: float
    unpaired_face_nodes: int
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.negative_triangles == 0 and self.unpaired_face_nodes == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_nodes": self.n_nodes,
            "n_triangles": self.n_triangles,
            "min_angle": self.min_angle,
            "negative_triangles": self.negative_triangles,
            "area": self.area,
            "inclusion_area": self.inclusion_area,
            "interface_residual": self.interface_residual,
            "unpaired_face_nodes": self.unpaired_face_nodes,
            "warnings": list(self.warnings),
            "ok": self.ok,
        }


def unpaired_face_nodes(mesh: Mesh) -> np.ndarray:
    """Nodes on x=1 or y=1 without a master on the opposite face."""
    x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
    on_right = np.abs(x - 1.0) <= FACE_TOL
    on_top = (np.abs(y - 1.0) <= FACE_TOL) & ~on_right
    slaves = set(mesh.periodic_pairs[:, 1].tolist())
    needed = np.flatnonzero(on_right | on_top)
    return np.array([i for i in needed if i not in slaves], dtype=np.int64)


def check_mesh(mesh: Mesh, shape: Optional[Any] = None, min_angle: float = 15.0) -> MeshReport:
    """Quality report: orientation, angles, area partition, interface fit, periodic partners.

    Args:
        mesh: Mesh to check
        shape: Inclusion shape of a cell mesh, or None
        min_angle: Angle in degrees below which a warning is recorded
    """
    inclusion_area = 0.0
    residual = 0.0
    if shape is not None:
        inclusion_area = float(shape.inclusion_volume(0.0))
        iface = mesh.interface_nodes
        if len(iface):
            residual = float(np.abs(shape.signed_distance(mesh.nodes[iface])).max())

    angle = float(mesh.min_angles().min()) if mesh.n_triangles else 0.0
    report = MeshReport(
        n_nodes=mesh.n_nodes,
        n_triangles=mesh.n_triangles,
        min_angle=angle,
        negative_triangles=int((mesh.signed_areas <= 0).sum()),
        area=mesh.area,
        inclusion_area=inclusion_area,
        interface_residual=residual,
        unpaired_face_nodes=len(unpaired_face_nodes(mesh)) if len(mesh.periodic_pairs) else 0,
    )
    if angle < min_angle:
        report.warnings.append(f"minimum angle {angle:.1f} deg below {min_angle:.0f} deg")
    if shape is not None and abs(report.area + inclusion_area - 1.0) > 1e-3:
        report.warnings.append(f"area partition off by {report.area + inclusion_area - 1.0:.2e}")
    return report


def require_valid(mesh: Mesh) -> None:
    """Raise MeshingError unless every triangle is positively oriented."""
    bad = np.flatnonzero(mesh.signed_areas <= 0)
    if len(bad):
        raise MeshingError(
            f"{len(bad)} degenerate or inverted triangles",
            {
                "triangles": bad[:10].tolist(),
                "centroid": mesh.nodes[mesh.triangles[bad[0]]].mean(axis=0).tolist(),
            },
        )
