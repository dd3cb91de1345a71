"""
Piecewise-linear reconstruction with Barth-Jespersen limiting.

Gradients are least-squares fits over the face neighbours of a cell. The
limiter bounds come from every cell sharing a vertex with it: for an interior
cell the vertex values of a globally linear field then stay inside the bounds,
so linear data is never clipped.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from hyperlag.mesh.geometry import MeshGeometry
from hyperlag.mesh.topology import MeshTopology
from hyperlag.mood.levels import SchemeLevel

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10


@dataclass
class LinearPoly:
    """Linear polynomial per cell and variable: w(x) = mean + phi g.(x - x_c)."""
    center_value: np.ndarray    # (nc, nv)
    gradient: np.ndarray        # (nc, nv, 2)
    limiter_factor: np.ndarray  # (nc, nv) in [0, 1]
    centroid: np.ndarray        # (nc, 2)

    @property
    def limited_gradient(self) -> np.ndarray:
        return self.limiter_factor[..., None] * self.gradient

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at (nc, k, 2) points, returned as (nc, k, nv)."""
        dx = points - self.centroid[:, None, :]
        return self.center_value[:, None, :] + np.einsum("cvd,ckd->ckv", self.limited_gradient, dx)

    def evaluate_at_vertices(self, geometry: MeshGeometry) -> np.ndarray:
        return self.evaluate(geometry.cell_coords)


def least_squares_gradient(center: np.ndarray, center_value,
                           neighbor_centers: np.ndarray, neighbor_values) -> np.ndarray:
    """
    Gradient minimizing sum_j (u_j - u_c - g.(x_j - x_c))^2 for one cell.

    Args:
        center: (2,) cell centroid
        center_value: scalar or (nv,) cell mean
        neighbor_centers: (k, 2) neighbour centroids
        neighbor_values: (k,) or (k, nv) neighbour means

    Returns:
        (2,) or (nv, 2) gradient; zero when the stencil is rank deficient
    """
    dx = np.asarray(neighbor_centers, dtype=float) - np.asarray(center, dtype=float)
    du = np.asarray(neighbor_values, dtype=float) - np.asarray(center_value, dtype=float)
    scalar = du.ndim == 1
    if scalar:
        du = du[:, None]
    A = dx.T @ dx
    if dx.shape[0] < 2 or abs(np.linalg.det(A)) <= RANK_TOLERANCE * np.trace(A) ** 2:
        g = np.zeros((du.shape[1], 2))
    else:
        g = np.linalg.solve(A, dx.T @ du).T
    return g[0] if scalar else g


def least_squares_gradients(values: np.ndarray, topology: MeshTopology,
                            geometry: MeshGeometry) -> Tuple[np.ndarray, np.ndarray]:
    """
    Batched least-squares gradients over face neighbours.

    Returns:
        (gradients (nc, nv, 2), mask of cells reconstructed as constants)
    """
    nb = topology.cell_neighbors
    has = nb >= 0
    safe = np.where(has, nb, 0)
    dx = np.where(has[..., None], geometry.centroid[safe] - geometry.centroid[:, None, :], 0.0)
    du = np.where(has[..., None], values[safe] - values[:, None, :], 0.0)

    A = np.einsum("ckd,cke->cde", dx, dx)
    det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
    tr = A[:, 0, 0] + A[:, 1, 1]
    constant = ~(det > RANK_TOLERANCE * tr ** 2)

    degenerate = constant & (has.sum(axis=1) >= 2)
    if degenerate.any():
        logger.warning(f"Rank-deficient reconstruction stencil in cells {np.flatnonzero(degenerate)[:10].tolist()}")

    rhs = np.einsum("ckd,ckv->cvd", dx, du)
    safe_det = np.where(constant, 1.0, det)
    inv = np.stack([
        np.stack([A[:, 1, 1], -A[:, 0, 1]], axis=-1),
        np.stack([-A[:, 1, 0], A[:, 0, 0]], axis=-1),
    ], axis=-2) / safe_det[:, None, None]
    grad = np.einsum("cde,cve->cvd", inv, rhs)
    grad[constant] = 0.0
    return grad, constant


def barth_jespersen(center_value, vertex_deltas, vmin, vmax) -> np.ndarray:
    """
    Largest phi in [0, 1] keeping u_c + phi delta_k inside [vmin, vmax].

    Args:
        center_value: (...,) cell means
        vertex_deltas: (..., k) unlimited increments g.(x_k - x_c) at the vertices
        vmin, vmax: (...,) stencil bounds (including the cell itself)
    """
    u = np.asarray(center_value, dtype=float)[..., None]
    delta = np.asarray(vertex_deltas, dtype=float)
    up = np.asarray(vmax, dtype=float)[..., None] - u
    down = np.asarray(vmin, dtype=float)[..., None] - u
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(delta > 0.0, up / delta, np.where(delta < 0.0, down / delta, 1.0))
    phi = np.clip(ratio, 0.0, 1.0).min(axis=-1)
    return np.where(np.isfinite(phi), phi, 0.0)


def vertex_neighborhood_bounds(values: np.ndarray, topology: MeshTopology) -> Tuple[np.ndarray, np.ndarray]:
    """Min and max of ``values`` over all cells sharing a vertex with each cell."""
    nv = values.shape[1]
    flat = topology.cells.reshape(-1)
    per_corner = np.repeat(values, 3, axis=0)
    node_min = np.full((topology.n_nodes, nv), np.inf)
    node_max = np.full((topology.n_nodes, nv), -np.inf)
    np.minimum.at(node_min, flat, per_corner)
    np.maximum.at(node_max, flat, per_corner)
    return node_min[topology.cells].min(axis=1), node_max[topology.cells].max(axis=1)


def reconstruct(values: np.ndarray, topology: MeshTopology, geometry: MeshGeometry,
                levels: Optional[np.ndarray] = None) -> LinearPoly:
    """
    Linear reconstruction of every variable at each cell's scheme level.

    P1 cells keep the unlimited gradient, P1-BJ cells are limited and P0 cells
    are constant.
    """
    values = np.asarray(values, dtype=float)
    nc, nv = values.shape
    if levels is None:
        levels = np.full(nc, SchemeLevel.P1, dtype=np.int8)

    grad, _ = least_squares_gradients(values, topology, geometry)
    phi = np.ones((nc, nv))

    limited = levels == SchemeLevel.P1_BJ
    if limited.any():
        vmin, vmax = vertex_neighborhood_bounds(values, topology)
        dx = geometry.cell_coords - geometry.centroid[:, None, :]
        deltas = np.einsum("cvd,ckd->cvk", grad[limited], dx[limited])
        phi[limited] = barth_jespersen(values[limited], deltas, vmin[limited], vmax[limited])
    phi[levels == SchemeLevel.P0] = 0.0

    return LinearPoly(center_value=values, gradient=grad, limiter_factor=phi, centroid=geometry.centroid)
