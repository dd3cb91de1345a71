"""
Corrector: conservative updates of (tau, v, e), node motion and B updates.
"""

import logging
from typing import Tuple

import numpy as np

from hyperlag.constitutive.tensors import transpose
from hyperlag.state import CellState

logger = logging.getLogger(__name__)

# Symmetric component order of the Crank-Nicolson unknowns.
_SYM = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
CN_DET_TOLERANCE = 1e-8


def velocity_gradient(corner_vectors: np.ndarray, volume: np.ndarray, v_corner: np.ndarray) -> np.ndarray:
    """
    Cell velocity gradient L_ij = dv_i/dx_j = (1/V) sum_p v_p,i (l n)_cp,j, in 3x3 plane-strain form.

    Args:
        corner_vectors: (nc, 3, 2)
        volume: (nc,)
        v_corner: (nc, 3, 2) node velocities seen by each corner
    """
    L = np.zeros(volume.shape + (3, 3))
    with np.errstate(invalid="ignore", divide="ignore"):
        L[..., :2, :2] = np.einsum("cki,ckj->cij", v_corner, corner_vectors) / volume[:, None, None]
    return L


def corrector_update(state: CellState, corner_vectors: np.ndarray, cell_mass: np.ndarray,
                     forces: np.ndarray, v_corner: np.ndarray, dt: float) -> CellState:
    """
    tau, v and e at t^{n+1}; B is carried over unchanged.

    m (tau^{n+1} - tau^n) = dt sum_p l n . v_p
    m (v^{n+1} - v^n)     = dt sum_p f_cp
    m (e^{n+1} - e^n)     = dt sum_p f_cp . v_p
    """
    m = cell_mass
    tau = state.tau + dt * np.einsum("ckd,ckd->c", corner_vectors, v_corner) / m
    v = state.v + dt * forces.sum(axis=1) / m[:, None]
    e = state.e + dt * np.einsum("ckd,ckd->c", forces, v_corner) / m
    return CellState(tau=tau, v=v, e=e, B=state.B.copy())


def move_nodes(coords: np.ndarray, node_velocity: np.ndarray, dt: float) -> np.ndarray:
    """x^{n+1} = x^n + dt v*."""
    return coords + dt * node_velocity


def update_B_first_order(B: np.ndarray, L: np.ndarray, dt: float) -> np.ndarray:
    """Euler step B + dt (L B + B L^T)."""
    return B + dt * (L @ B + B @ transpose(L))


def _components(A: np.ndarray) -> np.ndarray:
    return np.stack([A[..., i, j] for i, j in _SYM], axis=-1)


def _basis() -> np.ndarray:
    E = np.zeros((6, 3, 3))
    for k, (i, j) in enumerate(_SYM):
        E[k, i, j] = 1.0
        E[k, j, i] = 1.0
    return E


def _from_components(x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape[:-1] + (3, 3))
    for k, (i, j) in enumerate(_SYM):
        out[..., i, j] = x[..., k]
        out[..., j, i] = x[..., k]
    return out


def update_B_crank_nicolson(B: np.ndarray, L0: np.ndarray, L1: np.ndarray,
                            dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Solve B' - dt/2 (L1 B' + B' L1^T) = B + dt/2 (L0 B + B L0^T) for symmetric B'.

    The tensor equation is written on the six symmetric components and solved
    directly per cell.

    Returns:
        (B' (nc, 3, 3), singular (nc,) cells where the system could not be solved;
        their B' is NaN and the caller substitutes the first-order update)
    """
    E = _basis()
    # column k of A holds the components of E_k - dt/2 (L1 E_k + E_k L1^T)
    image = E[None] - 0.5 * dt * (np.einsum("cij,kjl->ckil", L1, E) + np.einsum("kij,clj->ckil", E, L1))
    A = np.swapaxes(_components(image), -1, -2)
    rhs = _components(B + 0.5 * dt * (L0 @ B + B @ transpose(L0)))

    finite = np.isfinite(A).all(axis=(1, 2)) & np.isfinite(rhs).all(axis=1)
    safe_A = np.where(finite[:, None, None], A, np.eye(6))
    det = np.linalg.det(safe_A)
    singular = ~finite | ~(np.abs(det) > CN_DET_TOLERANCE)
    solvable = np.where(singular[:, None, None], np.eye(6), safe_A)
    x = np.linalg.solve(solvable, np.where(singular[:, None], 0.0, rhs)[..., None])[..., 0]
    out = _from_components(x)
    out[singular] = np.nan
    if singular.any():
        logger.debug(f"Crank-Nicolson B update singular in {int(singular.sum())} cells")
    return out, singular
