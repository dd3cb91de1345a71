"""
Connectivity of unstructured triangle meshes.

Cells are stored as counterclockwise vertex triples. Local face k of a cell is
the edge from vertex k to vertex k+1, so the face normal seen from the cell
points outward.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hyperlag.errors import MeshError

logger = logging.getLogger(__name__)


@dataclass
class MeshTopology:
    """Simplicial connectivity: P(c), C(p), F(c) and the face table."""
    cells: np.ndarray            # (nc, 3) vertex ids, counterclockwise
    n_nodes: int
    faces: np.ndarray            # (nf, 2) vertex ids, oriented as in face_cells[:, 0]
    face_cells: np.ndarray       # (nf, 2) incident cells, -1 on the boundary
    cell_faces: np.ndarray       # (nc, 3) face ids, local face k = edge (v_k, v_k+1)
    cell_neighbors: np.ndarray   # (nc, 3) face neighbour across local face k, -1 if none
    node_cells_ptr: np.ndarray   # (n_nodes + 1,) CSR offsets of C(p)
    node_cells_idx: np.ndarray   # CSR entries of C(p)
    face_tags: np.ndarray        # (nf,) boundary tag, 0 for interior or untagged faces

    @property
    def n_cells(self) -> int:
        return int(self.cells.shape[0])

    @property
    def n_faces(self) -> int:
        return int(self.faces.shape[0])

    @property
    def boundary_faces(self) -> np.ndarray:
        """Ids of faces with a single incident cell."""
        return np.flatnonzero(self.face_cells[:, 1] < 0)

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.faces[self.boundary_faces].reshape(-1))

    def node_to_cells(self, node: int) -> np.ndarray:
        """Cells sharing ``node``."""
        return self.node_cells_idx[self.node_cells_ptr[node]:self.node_cells_ptr[node + 1]]

    def tagged_boundary_faces(self, tag: int) -> np.ndarray:
        return np.flatnonzero((self.face_tags == tag) & (self.face_cells[:, 1] < 0))

    def tags(self) -> List[int]:
        return sorted(int(t) for t in np.unique(self.face_tags[self.boundary_faces]))

    def boundary_edges(self) -> np.ndarray:
        """Tagged boundary faces as ``(n1, n2, tag)`` rows."""
        bf = self.boundary_faces
        return np.column_stack([self.faces[bf], self.face_tags[bf]]).astype(np.int64)

    def euler_characteristic(self) -> int:
        return self.n_nodes - self.n_faces + self.n_cells


def _signed_areas(nodes: np.ndarray, cells: np.ndarray) -> np.ndarray:
    x = nodes[cells]
    return 0.5 * ((x[:, 1, 0] - x[:, 0, 0]) * (x[:, 2, 1] - x[:, 0, 1])
                  - (x[:, 2, 0] - x[:, 0, 0]) * (x[:, 1, 1] - x[:, 0, 1]))


def build_topology(nodes: np.ndarray,
                   cell_vertex_lists: Sequence[Sequence[int]],
                   boundary_edges: Optional[np.ndarray] = None) -> MeshTopology:
    """
    Build the connectivity tables of a triangle mesh.

    Args:
        nodes: (n, 2) node coordinates, used to normalize cell orientation
        cell_vertex_lists: vertex triples, 0-based
        boundary_edges: optional (k, 3) rows ``(n1, n2, tag)`` tagging boundary faces

    Returns:
        Populated MeshTopology

    Raises:
        MeshError: empty mesh, index out of range, repeated vertex, duplicate cell,
            zero-area cell, non-manifold face or orphan node
    """
    nodes = np.asarray(nodes, dtype=float)
    cells = np.array(cell_vertex_lists, dtype=np.int64).reshape(-1, 3) if len(cell_vertex_lists) else np.empty((0, 3), np.int64)
    n_nodes = int(nodes.shape[0])

    if cells.shape[0] == 0:
        raise MeshError("Mesh must contain at least one cell")
    if cells.min() < 0 or cells.max() >= n_nodes:
        raise MeshError(f"Vertex index out of range [0, {n_nodes})")

    repeated = (cells[:, 0] == cells[:, 1]) | (cells[:, 1] == cells[:, 2]) | (cells[:, 0] == cells[:, 2])
    if repeated.any():
        raise MeshError(f"Degenerate cell {int(np.flatnonzero(repeated)[0])}: repeated vertex")

    _, first, counts = np.unique(np.sort(cells, axis=1), axis=0, return_index=True, return_counts=True)
    if (counts > 1).any():
        raise MeshError(f"Duplicate cell {int(first[np.flatnonzero(counts > 1)[0]])}")

    area = _signed_areas(nodes, cells)
    if (area == 0.0).any():
        raise MeshError(f"Degenerate cell {int(np.flatnonzero(area == 0.0)[0])}: zero area")
    flipped = area < 0.0
    if flipped.any():
        logger.warning(f"Reoriented {int(flipped.sum())} clockwise cells to counterclockwise")
        cells[flipped] = cells[flipped][:, [0, 2, 1]]

    nc = cells.shape[0]
    local_edges = np.stack([cells, np.roll(cells, -1, axis=1)], axis=2).reshape(-1, 2)
    keys = np.sort(local_edges, axis=1)
    unique_keys, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = np.asarray(inverse).reshape(-1)
    if (counts > 2).any():
        bad = unique_keys[np.flatnonzero(counts > 2)[0]]
        raise MeshError(f"Non-manifold face ({int(bad[0])}, {int(bad[1])}) shared by more than 2 cells")

    nf = unique_keys.shape[0]
    order = np.argsort(inverse, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    face_cells = np.full((nf, 2), -1, dtype=np.int64)
    face_cells[:, 0] = order[starts] // 3
    interior = counts == 2
    face_cells[interior, 1] = order[starts[interior] + 1] // 3
    faces = local_edges[order[starts]]
    cell_faces = inverse.reshape(nc, 3)

    incident = face_cells[cell_faces]
    own = np.arange(nc)[:, None]
    cell_neighbors = np.where(incident[..., 0] == own, incident[..., 1], incident[..., 0])

    flat = cells.reshape(-1)
    per_node = np.bincount(flat, minlength=n_nodes)
    if (per_node == 0).any():
        raise MeshError(f"Node {int(np.flatnonzero(per_node == 0)[0])} belongs to no cell")
    node_cells_ptr = np.concatenate([[0], np.cumsum(per_node)]).astype(np.int64)
    node_cells_idx = (np.argsort(flat, kind="stable") // 3).astype(np.int64)

    face_tags = np.zeros(nf, dtype=np.int64)
    if boundary_edges is not None and len(boundary_edges):
        lookup: Dict[Tuple[int, int], int] = {
            (int(a), int(b)): i for i, (a, b) in enumerate(unique_keys)
        }
        for n1, n2, tag in np.asarray(boundary_edges, dtype=np.int64):
            key = (int(min(n1, n2)), int(max(n1, n2)))
            face = lookup.get(key)
            if face is None:
                raise MeshError(f"Tagged boundary edge ({n1}, {n2}) is not a mesh face")
            if face_cells[face, 1] >= 0:
                raise MeshError(f"Tagged edge ({n1}, {n2}) is an interior face")
            face_tags[face] = int(tag)

    return MeshTopology(
        cells=cells,
        n_nodes=n_nodes,
        faces=faces,
        face_cells=face_cells,
        cell_faces=cell_faces,
        cell_neighbors=cell_neighbors,
        node_cells_ptr=node_cells_ptr,
        node_cells_idx=node_cells_idx,
        face_tags=face_tags,
    )


@dataclass
class Mesh:
    """Node coordinates bundled with their connectivity."""
    coords: np.ndarray
    topology: MeshTopology
    name: str = "mesh"
    metadata: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_arrays(cls, nodes: np.ndarray, cells: Sequence[Sequence[int]],
                    boundary_edges: Optional[np.ndarray] = None, name: str = "mesh") -> "Mesh":
        nodes = np.asarray(nodes, dtype=float)[:, :2].copy()
        return cls(coords=nodes, topology=build_topology(nodes, cells, boundary_edges), name=name)

    @property
    def cells(self) -> np.ndarray:
        return self.topology.cells

    def refine(self, levels: int = 1) -> "Mesh":
        """Quadrisect every triangle ``levels`` times."""
        from hyperlag.mesh.refine import refine_all

        mesh = self
        for _ in range(levels):
            mesh = refine_all(mesh.topology, mesh.coords, name=mesh.name)
        return mesh
