"""Plain-text mesh format.

    gradfit-mesh v1 dim=2
    vertices N
    x y                      (N lines)
    elements M
    i j k r                  (M lines, r = local index opposite the refinement edge)
"""

from pathlib import Path
from typing import Union

from gradfit.constants import FLOAT_FORMAT, MESH_HEADER
from gradfit.exceptions import MeshError, MeshFormatError
from gradfit.mesh.core import Mesh, mesh_from_arrays


def format_mesh(mesh: Mesh) -> str:
    """Serialize the active elements of ``mesh``."""
    lines = [MESH_HEADER, f"vertices {mesh.n_vertices}"]
    for x, y in (mesh.vertex(v) for v in range(mesh.n_vertices)):
        lines.append(f"{FLOAT_FORMAT % x} {FLOAT_FORMAT % y}")
    active = mesh.active_ids()
    lines.append(f"elements {len(active)}")
    for eid in active:
        i, j, k = mesh.elements[eid].vertex_ids
        lines.append(f"{i} {j} {k} 2")
    return "\n".join(lines) + "\n"


def _expect(lines, index: int, keyword: str, source: str) -> int:
    if index >= len(lines):
        raise MeshFormatError(source, f"missing '{keyword}' section")
    parts = lines[index].split()
    if len(parts) != 2 or parts[0] != keyword:
        raise MeshFormatError(source, f"line {index + 1}: expected '{keyword} <count>'")
    try:
        return int(parts[1])
    except ValueError:
        raise MeshFormatError(source, f"line {index + 1}: bad count '{parts[1]}'")


def parse_mesh(text: str, source: str = "<string>") -> Mesh:
    """Parse the text format into a mesh with the stored refinement edges."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != MESH_HEADER:
        raise MeshFormatError(source, f"expected header '{MESH_HEADER}'")

    n_vertices = _expect(lines, 1, "vertices", source)
    coords = []
    for offset in range(n_vertices):
        index = 2 + offset
        try:
            x, y = (float(value) for value in lines[index].split())
        except (IndexError, ValueError):
            raise MeshFormatError(source, f"line {index + 1}: expected 'x y'")
        coords.append((x, y))

    cursor = 2 + n_vertices
    n_elements = _expect(lines, cursor, "elements", source)
    triangles, refinement = [], []
    for offset in range(n_elements):
        index = cursor + 1 + offset
        try:
            i, j, k, r = (int(value) for value in lines[index].split())
        except (IndexError, ValueError):
            raise MeshFormatError(source, f"line {index + 1}: expected 'i j k r'")
        triangles.append((i, j, k))
        refinement.append(r)

    try:
        return mesh_from_arrays(coords, triangles, refinement=refinement)
    except MeshError as e:
        if isinstance(e, MeshFormatError):
            raise
        raise MeshFormatError(source, str(e))


def write_mesh(mesh: Mesh, path: Union[str, Path]):
    Path(path).write_text(format_mesh(mesh), encoding="utf-8")


def read_mesh(path: Union[str, Path]) -> Mesh:
    path = Path(path)
    if not path.exists():
        raise MeshFormatError(str(path), "file not found")
    return parse_mesh(path.read_text(encoding="utf-8"), source=str(path))
