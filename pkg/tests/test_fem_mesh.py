"""Tests for mesh generation, I/O and quality checks."""

import numpy as np
import pytest

from thermo_homogenization.errors import MeshingError, ValidationError
from thermo_homogenization.fem import (
    Mesh,
    check_mesh,
    generate_cell_mesh,
    generate_macro_mesh,
    read_mesh,
    structured_mesh,
    write_mesh,
)
from thermo_homogenization.fem.meshing import boundary_edges, find_periodic_pairs
from thermo_homogenization.geometry import Ball


def _chord_error(mesh, shape):
    ends = mesh.nodes[mesh.interface_edges]
    return np.abs(shape.signed_distance(ends.mean(axis=1))).max()


class TestStructured:
    """Tests for the cell without a hole and the macro mesh."""

    def test_no_hole_counts(self):
        mesh = generate_cell_mesh(None, 0.5)
        assert mesh.n_nodes == 9
        assert mesh.n_triangles == 8
        assert len(mesh.interface_edges) == 0

    def test_periodic_pairs_of_structured_mesh(self):
        mesh = structured_mesh(4)
        # 5 pairs left/right plus 4 bottom/top (corner x=1 excluded)
        assert len(mesh.periodic_pairs) == 9
        masters = mesh.nodes[mesh.periodic_pairs[:, 0]]
        slaves = mesh.nodes[mesh.periodic_pairs[:, 1]]
        shift = slaves - masters
        horizontal = np.isclose(shift, [1.0, 0.0]).all(axis=1)
        vertical = np.isclose(shift, [0.0, 1.0]).all(axis=1)
        assert np.all(horizontal | vertical)

    @pytest.mark.parametrize("n,nodes,triangles", [(1, 5, 4), (2, 13, 16), (3, 25, 36)])
    def test_macro_counts(self, n, nodes, triangles):
        mesh = generate_macro_mesh(n, n)
        assert mesh.n_nodes == nodes
        assert mesh.n_triangles == triangles

    def test_macro_area_and_orientation(self):
        mesh = generate_macro_mesh(3, 2)
        assert abs(mesh.area - 1.0) <= 1e-14
        assert np.all(mesh.signed_areas > 0)
        assert len(mesh.outer_edges) == 2 * (3 + 2)

    def test_macro_min_angle(self):
        assert generate_macro_mesh(2).min_angles().min() == pytest.approx(45.0)

    def test_invalid_sizes(self):
        with pytest.raises(ValidationError):
            generate_macro_mesh(0)
        with pytest.raises(ValidationError):
            generate_cell_mesh(None, 0.0)


class TestCellMesh:
    """Tests for boundary-fitted meshes of the perforated cell."""

    @pytest.fixture
    def circle_mesh(self, circle):
        return generate_cell_mesh(circle, 0.05)

    def test_pore_area(self, circle_mesh):
        assert abs(circle_mesh.area - (1.0 - np.pi * 0.0625)) <= 1e-3

    def test_area_partition(self, circle_mesh, circle):
        assert abs(circle_mesh.area + circle.inclusion_volume(0.0) - 1.0) <= 1e-3

    def test_positive_orientation(self, circle_mesh):
        assert np.all(circle_mesh.signed_areas > 0)

    def test_interface_nodes_on_interface(self, circle_mesh, circle):
        iface = circle_mesh.interface_nodes
        assert len(iface) == 64
        assert np.abs(circle.signed_distance(circle_mesh.nodes[iface])).max() <= 1e-12

    def test_chord_error(self, circle_mesh, circle):
        assert _chord_error(circle_mesh, circle) <= 0.05**2

    def test_interface_is_closed_polygon(self, circle_mesh):
        """Every interface node belongs to exactly two interface edges."""
        counts = np.bincount(circle_mesh.interface_edges.ravel(), minlength=circle_mesh.n_nodes)
        assert set(counts[circle_mesh.interface_nodes].tolist()) == {2}

    def test_every_face_node_paired(self, circle_mesh):
        report = check_mesh(circle_mesh, None)
        assert report.unpaired_face_nodes == 0
        assert report.negative_triangles == 0

    def test_square_symmetry(self, circle_mesh):
        """The node set is invariant under x -> 1 - x and x <-> y."""
        keys = {tuple(np.round(p, 9)) for p in circle_mesh.nodes.tolist()}
        mirrored = {tuple(np.round([1.0 - x, y], 9)) for x, y in circle_mesh.nodes.tolist()}
        swapped = {tuple(np.round([y, x], 9)) for x, y in circle_mesh.nodes.tolist()}
        assert keys == mirrored == swapped

    def test_superellipse_mesh(self, superellipse):
        mesh = generate_cell_mesh(superellipse, 0.05)
        assert abs(mesh.area + superellipse.inclusion_volume(0.0) - 1.0) <= 1e-3
        assert _chord_error(mesh, superellipse) <= 0.05**2
        assert np.all(mesh.signed_areas > 0)

    def test_off_center_circle_uses_full_cell(self):
        shape = Ball(center=(0.45, 0.5), radius=0.2)
        mesh = generate_cell_mesh(shape, 0.05)
        assert abs(mesh.area - (1.0 - np.pi * 0.04)) <= 1e-3
        assert check_mesh(mesh, shape).unpaired_face_nodes == 0

    def test_chord_error_converges(self, circle):
        """Halving the mesh size quarters the chord error."""
        coarse = _chord_error(generate_cell_mesh(circle, 0.08), circle)
        fine = _chord_error(generate_cell_mesh(circle, 0.04), circle)
        assert coarse / fine > 3.0

    def test_too_coarse_raises(self, circle):
        with pytest.raises(MeshingError):
            generate_cell_mesh(circle, 0.5)

    def test_rejects_3d_shape(self, sphere):
        with pytest.raises(ValidationError):
            generate_cell_mesh(sphere, 0.1)


class TestMeshIO:
    """Tests for the ASCII mesh format."""

    def test_round_trip(self, tmp_path, circle):
        mesh = generate_cell_mesh(circle, 0.1)
        path = write_mesh(mesh, tmp_path / "cell.mesh")
        loaded = read_mesh(path)
        assert np.array_equal(loaded.nodes, mesh.nodes)
        assert np.array_equal(loaded.triangles, mesh.triangles)
        assert np.array_equal(loaded.boundary_tags, mesh.boundary_tags)
        assert np.array_equal(loaded.periodic_pairs, mesh.periodic_pairs)

    def test_header(self, tmp_path):
        path = write_mesh(structured_mesh(1), tmp_path / "one.mesh")
        assert path.read_text().splitlines()[0] == "2 4 2 4 3"

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "bad.mesh"
        path.write_text("2 3 1 0 0\n0 0\n1 0\n")
        with pytest.raises(ValidationError):
            read_mesh(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            read_mesh(tmp_path / "nope.mesh")


class TestTopology:
    """Tests for topology helpers."""

    def test_boundary_edges_of_square(self):
        tri = np.array([[0, 1, 2], [0, 2, 3]])
        edges = boundary_edges(tri)
        assert len(edges) == 4
        assert {tuple(sorted(e)) for e in edges.tolist()} == {(0, 1), (1, 2), (2, 3), (0, 3)}

    def test_unpaired_face_node_raises(self):
        nodes = np.array([[0.0, 0.0], [1.0, 0.3]])
        with pytest.raises(MeshingError):
            find_periodic_pairs(nodes)

    def test_orient_flips_clockwise(self):
        mesh = Mesh(nodes=[[0, 0], [1, 0], [0, 1]], triangles=[[0, 2, 1]])
        assert mesh.signed_areas[0] < 0
        mesh.orient()
        assert mesh.signed_areas[0] == pytest.approx(0.5)

    def test_bad_triangle_index(self):
        with pytest.raises(ValidationError):
            Mesh(nodes=[[0, 0], [1, 0]], triangles=[[0, 1, 2]])
