"""
Local space-time predictor (second-order ADER).

Starting from the reconstructed polynomials at t^n, each cell evolves its own
data to t^{n+1/2} without talking to its neighbours: the corner values drive
the cell-local conservation laws on the cell's own half-time geometry, and the
trajectory and the state are iterated together by Picard fixed point.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from hyperlag.constitutive.material import MaterialModel, constitutive_response
from hyperlag.constitutive.tensors import plane_components, symmetric_from_components, transpose
from hyperlag.mesh.geometry import MeshGeometry, local_geometry
from hyperlag.reconstruct.limiting import LinearPoly
from hyperlag.state import B11, B12, B22, B33, E, TAU, VX, VY

logger = logging.getLogger(__name__)


@dataclass
class SpaceTimePredictor:
    """Predicted data at t^{n+1/2}."""
    q_star: np.ndarray         # (nc, nv) cell values
    corner_values: np.ndarray  # (nc, 3, nv) values at the vertices
    T_star: np.ndarray         # (nc, 3, 3, 3) Cauchy stress at the vertices
    x_star: np.ndarray         # (nc, 3, 2) predicted vertex positions
    flagged: np.ndarray        # (nc,) cells that fell back to t^n data
    iterations: int = 0

    @property
    def v_p_star(self) -> np.ndarray:
        return self.corner_values[..., VX:VY + 1]


def _tensor(W: np.ndarray) -> np.ndarray:
    return symmetric_from_components(W[..., B11], W[..., B22], W[..., B33], W[..., B12])


def _corner_stress(W: np.ndarray, model: MaterialModel) -> np.ndarray:
    v = W[..., VX:VY + 1]
    eps = W[..., E] - 0.5 * np.sum(v ** 2, axis=-1)
    return constitutive_response(W[..., TAU], _tensor(W), eps, model).stress


def _time_derivative(W_corner, W_center, x, cell_mass, model, dt):
    """Cell-local rates of (tau, v, e, B) evaluated at the half-time geometry."""
    v_p = W_corner[..., VX:VY + 1]
    T2 = _corner_stress(W_corner, model)[..., :2, :2]
    x_half = x + 0.5 * dt * v_p
    lncp, volume = local_geometry(x_half)

    with np.errstate(invalid="ignore", divide="ignore"):
        dtau = np.einsum("ckd,ckd->c", lncp, v_p) / cell_mass
        dv = np.einsum("ckij,ckj->ci", T2, lncp) / cell_mass[:, None]
        de = np.einsum("cki,ckij,ckj->c", v_p, T2, lncp) / cell_mass
        L = np.zeros(W_center.shape[:1] + (3, 3))
        L[:, :2, :2] = np.einsum("cki,ckj->cij", v_p, lncp) / volume[:, None, None]
    B = _tensor(W_center)
    dB = L @ B + B @ transpose(L)

    rate = np.empty_like(W_center)
    rate[:, TAU] = dtau
    rate[:, VX:VY + 1] = dv
    rate[:, E] = de
    rate[:, B11:] = plane_components(dB)
    return rate, x_half, volume


def ader_predict(poly: LinearPoly, geometry: MeshGeometry, cell_mass: np.ndarray,
                 model: MaterialModel, dt: float, iterations: int = 2,
                 tolerance: float = 1e-12, active: Optional[np.ndarray] = None) -> SpaceTimePredictor:
    """
    Predict cell and corner data at t^{n+1/2}.

    Args:
        poly: reconstruction at t^n
        geometry: t^n geometry
        cell_mass: (nc,) cell masses
        model: material
        dt: time step
        iterations: Picard iterations
        tolerance: relative change below which the iteration stops early
        active: cells using the predictor; the others keep their t^n means

    Returns:
        SpaceTimePredictor; cells whose prediction is not admissible fall back to
        their t^n means and are flagged
    """
    W_center = poly.center_value
    W_vertex = poly.evaluate_at_vertices(geometry)
    x = geometry.cell_coords
    nc = W_center.shape[0]
    if active is None:
        active = np.ones(nc, dtype=bool)

    rate = np.zeros_like(W_center)
    x_star = x
    volume = geometry.volume
    done = 0
    for k in range(iterations):
        W_corner = W_vertex + 0.5 * dt * rate[:, None, :]
        W_mid = W_center + 0.5 * dt * rate
        new_rate, x_star, volume = _time_derivative(W_corner, W_mid, x, cell_mass, model, dt)
        change = np.abs(new_rate - rate)
        scale = np.maximum(np.abs(new_rate), np.abs(rate))
        rate = new_rate
        done = k + 1
        with np.errstate(invalid="ignore"):
            converged = np.all(change <= tolerance * scale)
        if converged:
            break

    q_star = W_center + 0.5 * dt * rate
    corner = W_vertex + 0.5 * dt * rate[:, None, :]
    T_star = _corner_stress(corner, model)

    with np.errstate(invalid="ignore"):
        finite_q = np.isfinite(q_star).all(axis=1)
        det_center = np.where(finite_q, np.linalg.det(np.where(finite_q[:, None, None], _tensor(q_star), np.eye(3))), np.nan)
        ok = (np.isfinite(q_star).all(axis=1)
              & np.isfinite(corner).all(axis=(1, 2))
              & np.isfinite(T_star).all(axis=(1, 2, 3))
              & (q_star[:, TAU] > 0.0)
              & (corner[..., TAU] > 0.0).all(axis=1)
              & (det_center > 0.0)
              & (volume > 0.0))
    flagged = active & ~ok
    if flagged.any():
        logger.warning(f"Predictor fell back to t^n data in {int(flagged.sum())} cells")

    fallback = ~active | flagged
    if fallback.any():
        q_star[fallback] = W_center[fallback]
        corner[fallback] = W_center[fallback][:, None, :]
        T_star[fallback] = _corner_stress(corner[fallback], model)
        x_star = np.where(fallback[:, None, None], x, x_star)

    return SpaceTimePredictor(q_star=q_star, corner_values=corner, T_star=T_star,
                              x_star=x_star, flagged=flagged, iterations=done)
