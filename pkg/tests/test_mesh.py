"""Unit tests for the bisection mesh."""

import math

import numpy as np
import pytest

from gradfit.exceptions import (
    CompletionError,
    DegenerateElementError,
    InactiveElementError,
    MeshError,
    MeshFormatError,
    NonConformingMeshError,
    PointOutsideDomainError,
)
from gradfit.mesh import geometry
from gradfit.mesh.builtin import unit_square
from gradfit.mesh.core import FaceKey, mesh_from_arrays
from gradfit.mesh.io import format_mesh, parse_mesh, read_mesh, write_mesh
from gradfit.mesh.queries import (
    boundary_vertices,
    is_star_face_connected,
    locate,
    max_shape_coefficient,
    patch,
    shape_metrics,
    star,
    star_count,
)
from gradfit.mesh.refine import bisect, complete, is_conforming, refine_and_complete, uniform_refine


def active_paths(mesh):
    return sorted(mesh.element_path(eid) for eid in mesh.active_ids())


def follow_path(mesh, path):
    """Element at a forest path, bisecting (without completion) where needed."""
    eid, bits = path
    for bit in bits:
        if mesh.elements[eid].children is None:
            mesh.bisect(eid)
        eid = mesh.elements[eid].children[int(bit)]
    return eid


class TestBuiltinMeshes:
    """Test the initial meshes."""

    def test_unit_square_refinement_edges(self, square):
        """Test both unit square elements are refined along the diagonal."""
        assert square.n_active == 2
        assert square.elements[0].vertex_ids == (2, 0, 1)
        assert square.elements[1].vertex_ids == (0, 2, 3)
        assert square.elements[0].refinement_edge == FaceKey(0, 2)
        assert square.elements[1].refinement_edge == FaceKey(2, 0)

    def test_unit_square_area(self, square):
        """Test the unit square has area one."""
        assert square.domain_area() == pytest.approx(1.0)

    def test_l_shape(self, lshape):
        """Test the L-shape has six elements and area three."""
        assert lshape.n_active == 6
        assert lshape.domain_area() == pytest.approx(3.0)
        assert all(0 in e.refinement_edge for e in lshape.elements)

    def test_elements_counter_clockwise(self, lshape):
        """Test every stored element is counter-clockwise."""
        for eid in lshape.active_ids():
            assert geometry.signed_area(lshape.geometry(eid)) > 0


class TestBisection:
    """Test newest-vertex bisection."""

    def test_bisect_children(self, square):
        """Test the children of the first square element."""
        children = bisect(square, 0)

        assert children == (2, 3)
        assert square.elements[2].vertex_ids == (1, 2, 4)
        assert square.elements[3].vertex_ids == (0, 1, 4)
        assert square.vertex(4) == (0.5, 0.5)
        assert square.elements[2].generation == 1
        assert not square.elements[0].active

    def test_children_halve_area(self, square):
        """Test both children have half the parent's area."""
        bisect(square, 0)
        assert square.area(2) == pytest.approx(0.25)
        assert square.area(3) == pytest.approx(0.25)
        assert geometry.signed_area(square.geometry(2)) > 0

    def test_single_bisection_is_non_conforming(self, square):
        """Test one bisection leaves a hanging vertex on the neighbour."""
        bisect(square, 0)
        assert not is_conforming(square)
        assert square.has_hanging_edge(1)

    def test_bisect_inactive_raises(self, square):
        """Test bisecting an inactive element raises InactiveElementError."""
        bisect(square, 0)
        with pytest.raises(InactiveElementError):
            bisect(square, 0)

    def test_shared_midpoint(self, square):
        """Test neighbours bisected along a shared edge reuse the midpoint vertex."""
        bisect(square, 0)
        bisect(square, 1)
        assert square.n_vertices == 5
        assert is_conforming(square)

    def test_element_path(self, square):
        """Test forest paths of roots and children."""
        bisect(square, 0)
        assert square.element_path(0) == (0, "")
        assert square.element_path(2) == (0, "0")
        assert square.element_path(3) == (0, "1")


class TestCompletion:
    """Test conformity closure."""

    def test_complete_after_one_bisection(self, square):
        """Test completing a single bisection gives four elements."""
        bisect(square, 0)
        complete(square)
        assert square.n_active == 4
        assert is_conforming(square)

    @pytest.mark.parametrize("levels", [0, 1, 2, 3, 4])
    def test_uniform_refinement_counts(self, levels):
        """Test uniform refinement doubles the element count per level."""
        mesh = uniform_refine(unit_square(), levels)
        assert mesh.n_active == 2 * 2 ** levels
        assert is_conforming(mesh)
        assert mesh.domain_area() == pytest.approx(1.0)
        assert all(mesh.elements[e].generation == levels for e in mesh.active_ids())

    def test_l_shape_uniform_level(self, lshape):
        """Test one uniform level on the L-shape."""
        uniform_refine(lshape, 1)
        assert lshape.n_active == 12
        assert lshape.domain_area() == pytest.approx(3.0)

    def test_refine_and_complete_matches_batch_completion(self, square):
        """Test incremental completion equals completing all bisections at once."""
        rng = np.random.default_rng(3)
        paths = []
        for _ in range(15):
            ids = square.active_ids()
            eid = ids[int(rng.integers(len(ids)))]
            paths.append(square.element_path(eid))
            refine_and_complete(square, [eid])
            assert is_conforming(square)

        batch = unit_square()
        for path in paths:
            batch.bisect(follow_path(batch, path))
        complete(batch)

        assert active_paths(batch) == active_paths(square)

    def test_completion_cap(self, square):
        """Test completion refuses to exceed its bisection cap."""
        bisect(square, 0)
        with pytest.raises(CompletionError):
            complete(square, max_bisections=0)

    def test_shape_coefficient_stable(self):
        """Test uniform bisection of the square keeps every triangle similar."""
        mesh = unit_square()
        for _ in range(5):
            uniform_refine(mesh, 1)
            assert max_shape_coefficient(mesh) == pytest.approx(1 + math.sqrt(2))


class TestCheckpoint:
    """Test checkpoint and rollback."""

    def test_rollback_restores_mesh(self, square):
        """Test a rollback removes every element and vertex created after the mark."""
        uniform_refine(square, 2)
        before = active_paths(square)
        coords = square.vertices.copy()
        mark = square.checkpoint()

        refine_and_complete(square, square.active_ids()[:3])
        assert square.n_active > len(before)
        square.rollback(mark)

        assert active_paths(square) == before
        assert square.n_vertices == len(coords)
        np.testing.assert_array_equal(square.vertices, coords)
        assert is_conforming(square)

    def test_refine_after_rollback(self, square):
        """Test the mesh can be refined again after a rollback."""
        mark = square.checkpoint()
        bisect(square, 0)
        square.rollback(mark)
        assert square.n_active == 2
        assert square.midpoint(FaceKey(0, 2)) is None

        assert bisect(square, 0) == (2, 3)
        assert square.vertex(4) == (0.5, 0.5)

    def test_copy_is_independent(self, square):
        """Test refining a copy leaves the original untouched."""
        clone = square.copy()
        uniform_refine(clone, 2)
        assert square.n_active == 2
        assert clone.n_active == 8


class TestMeshFromArrays:
    """Test mesh construction and validation."""

    def test_degenerate_triangle(self):
        """Test collinear vertices raise DegenerateElementError."""
        with pytest.raises(DegenerateElementError):
            mesh_from_arrays([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], [(0, 1, 2)])

    def test_repeated_vertex(self):
        """Test a repeated vertex raises DegenerateElementError."""
        with pytest.raises(DegenerateElementError):
            mesh_from_arrays([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 1)])

    def test_non_conforming_input(self):
        """Test a vertex inside another element's edge raises NonConformingMeshError."""
        coords = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, 0.5), (1.0, 1.0)]
        triangles = [(0, 1, 2), (1, 4, 3), (3, 4, 2)]
        with pytest.raises(NonConformingMeshError):
            mesh_from_arrays(coords, triangles)

    def test_index_out_of_range(self):
        """Test an unknown vertex index raises MeshError."""
        with pytest.raises(MeshError):
            mesh_from_arrays([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 3)])

    def test_clockwise_input_reoriented(self):
        """Test clockwise triangles are stored counter-clockwise."""
        mesh = mesh_from_arrays([(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)], [(0, 1, 2)])
        assert geometry.signed_area(mesh.geometry(0)) > 0

    def test_explicit_refinement_edge(self):
        """Test an explicit refinement index picks the newest vertex."""
        mesh = mesh_from_arrays([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 2)], refinement=[2])
        assert mesh.elements[0].newest_vertex == 2
        assert mesh.elements[0].refinement_edge == FaceKey(0, 1)


class TestQueries:
    """Test stars, patches and shape metrics."""

    def test_star_of_vertex(self, square):
        """Test the star of a diagonal vertex holds both elements."""
        assert star(square, 0) == {0, 1}
        assert star(square, 1) == {0}

    def test_star_of_point(self, square):
        """Test the star of a point is the set of elements containing it."""
        assert star(square, (0.5, 0.25)) == {0}
        assert locate(square, (0.5, 0.5)) == {0, 1}

    def test_locate_in_tiny_element(self):
        """Test an edge point of a tiny element far from the origin is found on both sides."""
        origin, side = np.array([10.1, -7.3]), 1.0 / 3.0
        corners = origin + side * np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        mesh = mesh_from_arrays(corners, [(0, 1, 2), (0, 2, 3)])
        target = origin + side * np.array([0.3, 0.61])
        for _ in range(200):
            eid = min(locate(mesh, target))
            tri = mesh.geometry(eid)
            if geometry.diameter(tri) < 1e-8:
                break
            bisect(mesh, eid)
        assert geometry.diameter(tri) < 1e-8

        on_edge = locate(mesh, (tri[1] + tri[2]) / 2)
        assert eid in on_edge
        assert len(on_edge) >= 2
        assert locate(mesh, tri.mean(axis=0)) == {eid}

    def test_point_outside(self, square):
        """Test a point outside the domain raises PointOutsideDomainError."""
        with pytest.raises(PointOutsideDomainError):
            star(square, (2.0, 2.0))

    def test_star_count(self, square):
        """Test the largest star size on the square and after one level."""
        assert star_count(square) == 2
        uniform_refine(square, 1)
        assert star_count(square) == 4

    def test_patch(self, square):
        """Test the patch of an element on the square."""
        assert patch(square, 0) == {0, 1}

    def test_boundary(self, square):
        """Test boundary faces and vertices of the square."""
        assert len(square.boundary_faces()) == 4
        assert boundary_vertices(square) == {0, 1, 2, 3}

    def test_face_connected_star(self, square):
        """Test stars of the square are face-connected."""
        uniform_refine(square, 2)
        assert all(is_star_face_connected(square, v) for v in range(square.n_vertices))

    def test_bowtie_star_not_face_connected(self, bowtie):
        """Test two triangles touching at a vertex do not form a face-connected star."""
        assert star(bowtie, 0) == {0, 1}
        assert not is_star_face_connected(bowtie, 0)

    def test_reference_shape_metrics(self, ref_mesh):
        """Test h, rho and sigma of the reference triangle."""
        metrics = shape_metrics(ref_mesh, 0)
        assert metrics.h == pytest.approx(math.sqrt(2))
        assert metrics.rho == pytest.approx(2 / (2 + math.sqrt(2)))
        assert metrics.sigma == pytest.approx(1 + math.sqrt(2))

    def test_barycentric_gradients(self):
        """Test barycentric gradients of the reference triangle."""
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(geometry.barycentric_gradients(tri), [[-1, -1], [1, 0], [0, 1]])


class TestMeshIO:
    """Test the plain-text mesh format."""

    def test_write_and_read(self, square, tmp_path):
        """Test a refined mesh survives writing and reading."""
        uniform_refine(square, 3)
        path = tmp_path / "square.mesh"
        write_mesh(square, path)
        loaded = read_mesh(path)

        np.testing.assert_array_equal(loaded.vertices, square.vertices)
        assert [e.vertex_ids for e in loaded.elements] == [
            square.elements[eid].vertex_ids for eid in square.active_ids()
        ]

    def test_bad_header(self):
        """Test a missing header raises MeshFormatError."""
        with pytest.raises(MeshFormatError):
            parse_mesh("vertices 0\nelements 0\n")

    def test_missing_section(self, square):
        """Test a truncated file raises MeshFormatError."""
        text = format_mesh(square)
        truncated = "\n".join(text.splitlines()[:6])
        with pytest.raises(MeshFormatError):
            parse_mesh(truncated)

    def test_degenerate_element_in_file(self):
        """Test geometry errors in a file are reported as MeshFormatError."""
        text = "gradfit-mesh v1 dim=2\nvertices 3\n0 0\n1 0\n2 0\nelements 1\n0 1 2 2\n"
        with pytest.raises(MeshFormatError):
            parse_mesh(text)

    def test_missing_file(self, tmp_path):
        """Test reading a missing file raises MeshFormatError."""
        with pytest.raises(MeshFormatError):
            read_mesh(tmp_path / "nothing.mesh")
