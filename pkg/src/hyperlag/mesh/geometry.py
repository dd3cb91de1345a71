"""
Time-dependent geometry of a triangle mesh.

Everything here is recomputed from node coordinates: cell volumes, corner
vectors l_cp n_cp, the two half-face normals each corner is made of, centroids,
in-circle diameters and the frozen subcell mass partition.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from hyperlag.errors import MeshError, MeshTanglingError
from hyperlag.mesh.topology import MeshTopology

logger = logging.getLogger(__name__)


@dataclass
class MeshGeometry:
    """Geometric quantities of one mesh configuration."""
    coords: np.ndarray          # (nn, 2) node positions
    cell_coords: np.ndarray     # (nc, 3, 2) vertex positions per cell
    volume: np.ndarray          # (nc,) signed area
    corner_vectors: np.ndarray  # (nc, 3, 2) l_cp n_cp
    half_normals: np.ndarray    # (nc, 3, 2, 2) l n of the half faces (incoming, outgoing) at each corner
    centroid: np.ndarray        # (nc, 2)
    char_length: np.ndarray     # (nc,) in-circle diameter

    def tangled_cells(self) -> np.ndarray:
        return np.flatnonzero(~(self.volume > 0.0))

    def check_orientation(self, time: Optional[float] = None) -> None:
        """
        Raises:
            MeshTanglingError: for the first cell with non-positive volume
        """
        bad = self.tangled_cells()
        if bad.size:
            cell = int(bad[0])
            raise MeshTanglingError(cell, time=time, volume=float(self.volume[cell]))


@dataclass
class MassPartition:
    """Subcell, cell and node masses, frozen at t=0."""
    cell_mass: np.ndarray     # (nc,)
    subcell_mass: np.ndarray  # (nc, 3)
    node_mass: np.ndarray     # (nn,)

    @property
    def total(self) -> float:
        return float(np.sum(self.cell_mass))


def _corner_vectors(x: np.ndarray) -> np.ndarray:
    prev = np.roll(x, 1, axis=-2)
    nxt = np.roll(x, -1, axis=-2)
    return 0.5 * np.stack([nxt[..., 1] - prev[..., 1], prev[..., 0] - nxt[..., 0]], axis=-1)


def _half_normals(x: np.ndarray) -> np.ndarray:
    prev = np.roll(x, 1, axis=-2)
    nxt = np.roll(x, -1, axis=-2)
    incoming = 0.5 * np.stack([x[..., 1] - prev[..., 1], prev[..., 0] - x[..., 0]], axis=-1)
    outgoing = 0.5 * np.stack([nxt[..., 1] - x[..., 1], x[..., 0] - nxt[..., 0]], axis=-1)
    return np.stack([incoming, outgoing], axis=-2)


def _volumes(x: np.ndarray) -> np.ndarray:
    nxt = np.roll(x, -1, axis=-2)
    return 0.5 * np.sum(x[..., 0] * nxt[..., 1] - nxt[..., 0] * x[..., 1], axis=-1)


def _perimeters(x: np.ndarray) -> np.ndarray:
    return np.sum(np.linalg.norm(np.roll(x, -1, axis=-2) - x, axis=-1), axis=-1)


def corner_vector(cell_coords: np.ndarray, local_vertex: int) -> np.ndarray:
    """
    Corner vector l_cp n_cp = d|w_c|/dx_p of one vertex of a counterclockwise polygon.

    Args:
        cell_coords: (k, 2) vertex positions
        local_vertex: index of the vertex in ``cell_coords``

    Returns:
        2-vector ½(y_{p+1} - y_{p-1}, x_{p-1} - x_{p+1})
    """
    x = np.asarray(cell_coords, dtype=float)
    k = x.shape[0]
    nxt = x[(local_vertex + 1) % k]
    prev = x[(local_vertex - 1) % k]
    return 0.5 * np.array([nxt[1] - prev[1], prev[0] - nxt[0]])


def cell_volume(cell_coords: np.ndarray) -> float:
    """Signed shoelace area, positive for counterclockwise vertices."""
    return float(_volumes(np.asarray(cell_coords, dtype=float)))


def characteristic_length(cell_coords: np.ndarray) -> float:
    """In-circle diameter 2|w|/s with s the semi-perimeter."""
    x = np.asarray(cell_coords, dtype=float)
    return float(4.0 * _volumes(x) / _perimeters(x))


def local_geometry(x: np.ndarray):
    """Corner vectors and volumes of cell-local vertex arrays (..., 3, 2)."""
    return _corner_vectors(x), _volumes(x)


def compute_geometry(topology: MeshTopology, coords: np.ndarray) -> MeshGeometry:
    """
    Evaluate all geometric quantities on ``coords``.

    Tangled cells are not rejected here; callers that need a valid configuration
    call ``check_orientation``.
    """
    coords = np.asarray(coords, dtype=float)
    x = coords[topology.cells]
    volume = _volumes(x)
    perimeter = _perimeters(x)
    return MeshGeometry(
        coords=coords,
        cell_coords=x,
        volume=volume,
        corner_vectors=_corner_vectors(x),
        half_normals=_half_normals(x),
        centroid=x.mean(axis=1),
        char_length=4.0 * volume / perimeter,
    )


def subcell_volumes(cell_coords: np.ndarray) -> np.ndarray:
    """Areas of the quadrangles (vertex, next midpoint, centroid, previous midpoint)."""
    x = np.asarray(cell_coords, dtype=float)
    centroid = x.mean(axis=-2, keepdims=True)
    mid_next = 0.5 * (x + np.roll(x, -1, axis=-2))
    mid_prev = 0.5 * (x + np.roll(x, 1, axis=-2))
    quad = np.stack([x, mid_next, np.broadcast_to(centroid, x.shape), mid_prev], axis=-2)
    return _volumes(quad)


def subcell_masses(topology: MeshTopology, geometry: MeshGeometry, rho0) -> MassPartition:
    """
    Subcell mass partition m_cp = rho0_c |w_cp(0)|.

    Args:
        topology: mesh connectivity
        geometry: initial geometry
        rho0: scalar or (nc,) initial density

    Raises:
        MeshError: non-positive subcell volume or density
    """
    rho0 = np.broadcast_to(np.asarray(rho0, dtype=float), (topology.n_cells,))
    if not (rho0 > 0.0).all():
        raise MeshError(f"Initial density must be positive (cell {int(np.flatnonzero(~(rho0 > 0.0))[0])})")
    vols = subcell_volumes(geometry.cell_coords)
    if not (vols > 0.0).all():
        cell = int(np.flatnonzero(~(vols > 0.0).all(axis=1))[0])
        raise MeshError(f"Non-positive subcell volume in cell {cell}")
    subcell = rho0[:, None] * vols
    node_mass = np.zeros(topology.n_nodes)
    np.add.at(node_mass, topology.cells.reshape(-1), subcell.reshape(-1))
    return MassPartition(cell_mass=subcell.sum(axis=1), subcell_mass=subcell, node_mass=node_mass)
