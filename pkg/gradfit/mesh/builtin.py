"""Initial meshes used by the experiments."""

from gradfit.mesh.core import Mesh, mesh_from_arrays


def unit_square() -> Mesh:
    """(0,1)^2 split along the diagonal (0,0)-(1,1); both refinement edges are that diagonal."""
    coords = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    return mesh_from_arrays(coords, [(0, 1, 2), (0, 2, 3)])


def l_shape() -> Mesh:
    """
    (-1,1)^2 without [0,1)x(-1,0] as six right triangles.

    Each of the three unit squares is split along its diagonal through the
    reentrant corner, so every refinement edge ends at the origin.
    """
    coords = [
        (0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0),
        (-1.0, 1.0), (-1.0, 0.0), (-1.0, -1.0), (0.0, -1.0),
    ]
    triangles = [
        (0, 1, 2), (0, 2, 3),
        (0, 3, 4), (0, 4, 5),
        (0, 5, 6), (0, 6, 7),
    ]
    return mesh_from_arrays(coords, triangles)


def reference_triangle() -> Mesh:
    return mesh_from_arrays([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 2)])


BUILTIN_MESHES = {
    "unit-square": unit_square,
    "l-shape": l_shape,
}
