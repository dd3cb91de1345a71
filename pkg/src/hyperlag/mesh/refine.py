"""
Conforming quadrisection of triangle meshes.

Every triangle is split through its edge midpoints into four similar children.
Midpoints are created once per face so neighbouring cells share them.
"""

import logging
from typing import Union

import numpy as np

from hyperlag.mesh.geometry import MeshGeometry
from hyperlag.mesh.topology import Mesh, MeshTopology

logger = logging.getLogger(__name__)


def refine_all(topology: MeshTopology,
               geometry: Union[MeshGeometry, np.ndarray],
               name: str = "mesh") -> Mesh:
    """
    Split each triangle into four.

    Args:
        topology: parent connectivity
        geometry: parent geometry, or bare (nn, 2) node coordinates
        name: name given to the refined mesh

    Returns:
        Refined Mesh; boundary tags are inherited by both halves of a tagged face
    """
    coords = geometry.coords if isinstance(geometry, MeshGeometry) else np.asarray(geometry, dtype=float)
    nn = topology.n_nodes
    faces = topology.faces

    midpoints = 0.5 * (coords[faces[:, 0]] + coords[faces[:, 1]])
    new_coords = np.vstack([coords, midpoints])

    a, b, c = topology.cells.T
    m0, m1, m2 = (nn + topology.cell_faces).T
    children = np.concatenate([
        np.column_stack([a, m0, m2]),
        np.column_stack([m0, b, m1]),
        np.column_stack([m2, m1, c]),
        np.column_stack([m0, m1, m2]),
    ])
    # keep the children of one parent adjacent
    nc = topology.n_cells
    order = np.arange(4 * nc).reshape(4, nc).T.reshape(-1)
    children = children[order]

    edges = topology.boundary_edges()
    if edges.size:
        tagged = edges[:, 2] != 0
        bf = topology.boundary_faces[tagged]
        mids = nn + bf
        f = topology.faces[bf]
        tags = edges[tagged, 2]
        new_edges = np.concatenate([
            np.column_stack([f[:, 0], mids, tags]),
            np.column_stack([mids, f[:, 1], tags]),
        ])
    else:
        new_edges = None

    logger.debug(f"Refined {nc} cells into {children.shape[0]}")
    return Mesh.from_arrays(new_coords, children, new_edges, name=name)
