"""
Mesh ingestion and export.

Native ASCII layout::

    nodes N cells M dim 2
    x y                  (N lines)
    i j k                (M lines, 0-based vertex ids)
    n1 n2 tag            (any number of tagged boundary faces)

Gmsh ``.msh`` v2 ASCII files are converted on read: triangles (type 2) become
cells and line elements (type 1) become boundary faces tagged with their
physical group.
"""

import logging
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from hyperlag.errors import MeshError
from hyperlag.mesh.topology import Mesh

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

GMSH_LINE = 1
GMSH_TRIANGLE = 2


def read_mesh(path: PathLike) -> Mesh:
    """Read a mesh, dispatching on the ``.msh`` suffix for Gmsh files."""
    path = Path(path)
    if not path.exists():
        raise MeshError(f"Mesh file not found: {path}")
    if path.suffix.lower() == ".msh":
        return read_gmsh(path)
    return read_ascii(path)


def read_ascii(path: PathLike) -> Mesh:
    """
    Read the native ASCII format.

    Raises:
        MeshError: malformed header or truncated blocks
    """
    path = Path(path)
    lines = [ln.split() for ln in path.read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln[0].startswith("#")]
    if not lines:
        raise MeshError(f"{path}: empty mesh file")

    header = lines[0]
    try:
        fields = {header[i]: int(header[i + 1]) for i in range(0, len(header), 2)}
        n_nodes, n_cells = fields["nodes"], fields["cells"]
        dim = fields.get("dim", 2)
    except (KeyError, ValueError, IndexError) as e:
        raise MeshError(f"{path}: bad header {' '.join(header)!r}, expected 'nodes N cells M dim 2'") from e
    if dim != 2:
        raise MeshError(f"{path}: only dim 2 is supported, got {dim}")
    if len(lines) < 1 + n_nodes + n_cells:
        raise MeshError(f"{path}: expected {n_nodes} nodes and {n_cells} cells, file is truncated")

    try:
        nodes = np.array([[float(v) for v in ln[:2]] for ln in lines[1:1 + n_nodes]])
        cells = np.array([[int(v) for v in ln[:3]] for ln in lines[1 + n_nodes:1 + n_nodes + n_cells]])
        rest = lines[1 + n_nodes + n_cells:]
        edges = np.array([[int(v) for v in ln[:3]] for ln in rest], dtype=np.int64).reshape(-1, 3)
    except ValueError as e:
        raise MeshError(f"{path}: {e}") from e

    mesh = Mesh.from_arrays(nodes, cells, edges, name=path.stem)
    logger.info(f"Read {n_nodes} nodes, {n_cells} cells, {len(edges)} tagged faces from {path}")
    return mesh


def write_ascii(mesh: Mesh, path: PathLike) -> None:
    """Write ``mesh`` in the native ASCII format."""
    path = Path(path)
    topo = mesh.topology
    edges = topo.boundary_edges()
    edges = edges[edges[:, 2] != 0]
    with open(path, "w") as f:
        f.write(f"nodes {topo.n_nodes} cells {topo.n_cells} dim 2\n")
        for x, y in mesh.coords:
            f.write(f"{x:.17g} {y:.17g}\n")
        for a, b, c in topo.cells:
            f.write(f"{a} {b} {c}\n")
        for n1, n2, tag in edges:
            f.write(f"{n1} {n2} {tag}\n")


def _section(lines: List[str], name: str) -> List[str]:
    try:
        start = lines.index(f"${name}")
        end = lines.index(f"$End{name}", start)
    except ValueError as e:
        raise MeshError(f"Gmsh file has no ${name} section") from e
    return lines[start + 1:end]


def read_gmsh(path: PathLike) -> Mesh:
    """
    Convert a Gmsh v2 ASCII file.

    Nodes not referenced by any triangle are dropped and ids are compacted.

    Raises:
        MeshError: unsupported format version or no triangles
    """
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines()]
    fmt = _section(lines, "MeshFormat")
    if not fmt or not fmt[0].split()[0].startswith("2"):
        raise MeshError(f"{path}: only Gmsh format 2.x is supported")
    if fmt[0].split()[1] != "0":
        raise MeshError(f"{path}: binary Gmsh files are not supported")

    node_block = _section(lines, "Nodes")
    ids: Dict[int, int] = {}
    coords = []
    for ln in node_block[1:]:
        parts = ln.split()
        ids[int(parts[0])] = len(coords)
        coords.append([float(parts[1]), float(parts[2])])

    triangles = []
    edges = []
    for ln in _section(lines, "Elements")[1:]:
        parts = [int(v) for v in ln.split()]
        etype, ntags = parts[1], parts[2]
        tags = parts[3:3 + ntags]
        verts = parts[3 + ntags:]
        physical = tags[0] if tags else 0
        if etype == GMSH_TRIANGLE:
            triangles.append([ids[v] for v in verts[:3]])
        elif etype == GMSH_LINE:
            edges.append([ids[verts[0]], ids[verts[1]], physical])

    if not triangles:
        raise MeshError(f"{path}: no triangle elements found")

    cells = np.array(triangles, dtype=np.int64)
    used = np.unique(cells)
    remap = np.full(len(coords), -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    nodes = np.array(coords)[used]
    cells = remap[cells]
    edge_arr = np.array(edges, dtype=np.int64).reshape(-1, 3)
    if edge_arr.size:
        keep = (remap[edge_arr[:, 0]] >= 0) & (remap[edge_arr[:, 1]] >= 0)
        edge_arr = edge_arr[keep]
        edge_arr[:, :2] = remap[edge_arr[:, :2]]

    if used.size < len(coords):
        logger.info(f"Dropped {len(coords) - used.size} nodes not attached to any triangle")
    mesh = Mesh.from_arrays(nodes, cells, edge_arr, name=path.stem)
    logger.info(f"Converted Gmsh mesh {path}: {mesh.topology.n_cells} triangles, {len(edge_arr)} boundary lines")
    return mesh
