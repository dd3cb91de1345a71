"""
Nodal solver of the cell-centered scheme.

Every corner (c, p) contributes a subcell matrix M_cp built from the two half
faces of c that meet at p. Summing the momentum balance of the subcell forces
f_cp = l_cp T_c n_cp + M_cp (v_p - v_c) around a node gives the 2x2 system
M_p v_p = sum_c M_cp v_c - sum_c l_cp T_c n_cp.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hyperlag.errors import SolverError
from hyperlag.mesh.topology import MeshTopology

logger = logging.getLogger(__name__)

SINGULAR_TOLERANCE = 1e-14


@dataclass
class NodalBalance:
    """Assembled nodal systems and their resolved velocities."""
    M: np.ndarray                # (nn, 2, 2)
    rhs: np.ndarray              # (nn, 2) cell contributions only
    external_force: np.ndarray   # (nn, 2) prescribed boundary tractions
    velocity: Optional[np.ndarray] = None       # (nn, 2) with boundary conditions
    free_velocity: Optional[np.ndarray] = None  # (nn, 2) ignoring kinematic constraints
    relaxed: int = 0
    multipliers: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return int(self.M.shape[0])


def subcell_matrix(z, lengths, normals) -> np.ndarray:
    """
    M = sum_k z l_k n_k (x) n_k.

    Args:
        z: impedance, scalar or (...,)
        lengths: (..., k) face measures
        normals: (..., k, 2) unit normals
    """
    z = np.asarray(z, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    normals = np.asarray(normals, dtype=float)
    return z[..., None, None] * np.einsum("...k,...ki,...kj->...ij", lengths, normals, normals)


def corner_matrices(z_c: np.ndarray, half_normals: np.ndarray) -> np.ndarray:
    """Subcell matrices (nc, 3, 2, 2) from the half-face vectors w = l n of each corner."""
    length = np.linalg.norm(half_normals, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = half_normals / length[..., None]
    return subcell_matrix(np.broadcast_to(z_c[:, None], length.shape[:-1]), length, unit)


def scatter_to_nodes(values: np.ndarray, topology: MeshTopology) -> np.ndarray:
    """Sum corner quantities (nc, 3, ...) onto nodes."""
    out = np.zeros((topology.n_nodes,) + values.shape[2:])
    np.add.at(out, topology.cells.reshape(-1), values.reshape((-1,) + values.shape[2:]))
    return out


def assemble_nodal_balance(topology: MeshTopology, M_cp: np.ndarray, v_cp: np.ndarray,
                           T_cp: np.ndarray, corner_vectors: np.ndarray) -> NodalBalance:
    """
    Assemble M_p and the cell part of the right-hand side.

    Args:
        M_cp: (nc, 3, 2, 2) subcell matrices
        v_cp: (nc, 3, 2) cell velocities seen by each corner
        T_cp: (nc, 3, 2, 2) in-plane stresses seen by each corner
        corner_vectors: (nc, 3, 2) l_cp n_cp
    """
    corner_rhs = (np.einsum("ckij,ckj->cki", M_cp, v_cp)
                  - np.einsum("ckij,ckj->cki", T_cp, corner_vectors))
    return NodalBalance(
        M=scatter_to_nodes(M_cp, topology),
        rhs=scatter_to_nodes(corner_rhs, topology),
        external_force=np.zeros((topology.n_nodes, 2)),
    )


def solve_2x2(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Batched solve of SPD 2x2 systems.

    Non-finite systems give NaN velocities.

    Raises:
        SolverError: a finite but singular matrix, naming the first such node
    """
    det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    tr = M[:, 0, 0] + M[:, 1, 1]
    finite = np.isfinite(det) & np.isfinite(tr)
    singular = finite & ~(det > SINGULAR_TOLERANCE * tr ** 2)
    if singular.any():
        node = int(np.flatnonzero(singular)[0])
        raise SolverError(f"Singular nodal matrix at node {node} (det={det[node]:.3e})")
    with np.errstate(invalid="ignore", divide="ignore"):
        vx = (M[:, 1, 1] * rhs[:, 0] - M[:, 0, 1] * rhs[:, 1]) / det
        vy = (M[:, 0, 0] * rhs[:, 1] - M[:, 1, 0] * rhs[:, 0]) / det
    return np.column_stack([vx, vy])


def nodal_solve(balance: NodalBalance) -> np.ndarray:
    """v_p = M_p^-1 (rhs + external force), no kinematic constraints."""
    return solve_2x2(balance.M, balance.rhs + balance.external_force)


def subcell_force(M_cp: np.ndarray, corner_vectors: np.ndarray, T_cp: np.ndarray,
                  v_cp: np.ndarray, v_p: np.ndarray) -> np.ndarray:
    """f_cp = l T n + M_cp (v_p - v_cp), shape (nc, 3, 2)."""
    return (np.einsum("ckij,ckj->cki", T_cp, corner_vectors)
            + np.einsum("ckij,ckj->cki", M_cp, v_p - v_cp))


def entropy_production(z_c: np.ndarray, half_normals: np.ndarray,
                       v_cp: np.ndarray, v_p: np.ndarray) -> np.ndarray:
    """
    Per-cell sum_p (v_p - v_cp).M_cp(v_p - v_cp), evaluated as a sum of squares.
    """
    d = v_p - v_cp
    length = np.linalg.norm(half_normals, axis=-1)
    proj = np.einsum("ckhd,ckd->ckh", half_normals, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(length > 0.0, proj ** 2 / length, 0.0)
    return z_c * terms.sum(axis=(1, 2))
