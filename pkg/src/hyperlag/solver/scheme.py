"""
One candidate time step of the cell-centered scheme at a given level map.

P1 and P1-BJ cells use the reconstructed, predicted t^{n+1/2} data in the
nodal solver and the Crank-Nicolson B update; P0 cells use their t^n means and
the Euler B update.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from hyperlag.constitutive.material import MaterialModel, constitutive_response
from hyperlag.constitutive.tensors import symmetric_from_components
from hyperlag.mesh.geometry import MassPartition, MeshGeometry, compute_geometry
from hyperlag.mesh.topology import MeshTopology
from hyperlag.mood.levels import SchemeLevel
from hyperlag.reconstruct.limiting import reconstruct
from hyperlag.reconstruct.predictor import ader_predict
from hyperlag.solver.boundary import BoundaryConditions
from hyperlag.solver.nodal import (
    NodalBalance,
    assemble_nodal_balance,
    corner_matrices,
    entropy_production,
    subcell_force,
)
from hyperlag.solver.update import (
    corrector_update,
    move_nodes,
    update_B_crank_nicolson,
    update_B_first_order,
    velocity_gradient,
)
from hyperlag.state import B11, B12, B22, B33, E, TAU, VX, VY, CellState

logger = logging.getLogger(__name__)


@dataclass
class SolverContext:
    """Everything a step needs besides the evolving state."""
    topology: MeshTopology
    masses: MassPartition
    model: MaterialModel
    boundary: BoundaryConditions
    predictor_iterations: int = 2
    predictor_tolerance: float = 1e-12


@dataclass
class Candidate:
    """Candidate solution at t^{n+1} before a-posteriori detection."""
    state: CellState
    geometry: MeshGeometry
    balance: NodalBalance
    node_velocity: np.ndarray  # (nn, 2) v* moving the mesh
    forces: np.ndarray         # (nc, 3, 2)
    entropy: np.ndarray        # (nc,)
    predictor_flags: np.ndarray
    cn_flags: np.ndarray
    time: float
    dt: float

    @property
    def coords(self) -> np.ndarray:
        return self.geometry.coords


def _impedance(W: np.ndarray, model: MaterialModel) -> np.ndarray:
    v = W[..., VX:VY + 1]
    eps = W[..., E] - 0.5 * np.sum(v ** 2, axis=-1)
    B = symmetric_from_components(W[..., B11], W[..., B22], W[..., B33], W[..., B12])
    response = constitutive_response(W[..., TAU], B, eps, model)
    return response.sound_speed / W[..., TAU], response.stress


def solve_nodes(ctx: SolverContext, corner_values: np.ndarray, center_values: np.ndarray,
                geometry: MeshGeometry, time: float) -> NodalBalance:
    """
    Nodal velocities from given corner data on ``geometry``, with boundary conditions at ``time``.

    Args:
        corner_values: (nc, 3, nv) packed values seen by each corner
        center_values: (nc, nv) packed values giving the impedance
    """
    z, _ = _impedance(center_values, ctx.model)
    _, T = _impedance(corner_values, ctx.model)
    M_cp = corner_matrices(z, geometry.half_normals)
    balance = assemble_nodal_balance(ctx.topology, M_cp, corner_values[..., VX:VY + 1],
                                     T[..., :2, :2], geometry.corner_vectors)
    return ctx.boundary.resolve(balance, geometry.coords, time)


def node_velocities(ctx: SolverContext, state: CellState, geometry: MeshGeometry, time: float) -> NodalBalance:
    """First-order nodal velocities at t^n, used by the time-step control."""
    W = state.to_variables()
    return solve_nodes(ctx, np.repeat(W[:, None, :], 3, axis=1), W, geometry, time)


def compute_candidate(ctx: SolverContext, state: CellState, geometry: MeshGeometry,
                      time: float, dt: float, levels: Optional[np.ndarray] = None) -> Candidate:
    """
    Build the candidate solution at t^{n+1} = time + dt.

    Never raises on inadmissible states: they come out as NaN, negative or
    tangled values for the detector. Singular nodal systems raise SolverError.
    """
    topo = ctx.topology
    nc = topo.n_cells
    if levels is None:
        levels = np.full(nc, SchemeLevel.P1, dtype=np.int8)
    high = levels > SchemeLevel.P0

    W = state.to_variables()
    poly = reconstruct(W, topo, geometry, levels)
    pred = ader_predict(poly, geometry, ctx.masses.cell_mass, ctx.model, dt,
                        iterations=ctx.predictor_iterations, tolerance=ctx.predictor_tolerance,
                        active=high)

    z, _ = _impedance(pred.q_star, ctx.model)
    M_cp = corner_matrices(z, geometry.half_normals)
    v_cp = pred.corner_values[..., VX:VY + 1]
    T_cp = pred.T_star[..., :2, :2]
    balance = assemble_nodal_balance(topo, M_cp, v_cp, T_cp, geometry.corner_vectors)
    balance = ctx.boundary.resolve(balance, geometry.coords, time + 0.5 * dt)
    v_p = balance.velocity
    v_corner = v_p[topo.cells]

    forces = subcell_force(M_cp, geometry.corner_vectors, T_cp, v_cp, v_corner)
    entropy = entropy_production(z, geometry.half_normals, v_cp, v_corner)
    new_state = corrector_update(state, geometry.corner_vectors, ctx.masses.cell_mass, forces, v_corner, dt)
    new_geometry = compute_geometry(topo, move_nodes(geometry.coords, v_p, dt))

    L_star = velocity_gradient(geometry.corner_vectors, geometry.volume, v_corner)
    B_first = update_B_first_order(state.B, L_star, dt)
    B_new = B_first.copy()
    cn_flags = np.zeros(nc, dtype=bool)

    second = high & ~pred.flagged
    if second.any():
        # t^n node velocities from the reconstructed data; flagged cells fall back to means
        corner_n = poly.evaluate_at_vertices(geometry)
        constant = ~second
        corner_n[constant] = W[constant][:, None, :]
        v_n = solve_nodes(ctx, corner_n, W, geometry, time).velocity
        v_end = 2.0 * v_p - v_n
        L0 = velocity_gradient(geometry.corner_vectors, geometry.volume, v_n[topo.cells])
        L1 = velocity_gradient(new_geometry.corner_vectors, new_geometry.volume, v_end[topo.cells])
        B_cn, singular = update_B_crank_nicolson(state.B[second], L0[second], L1[second], dt)
        B_cn[singular] = B_first[second][singular]
        B_new[second] = B_cn
        cn_flags[np.flatnonzero(second)[singular]] = True
    new_state.B = B_new

    return Candidate(
        state=new_state,
        geometry=new_geometry,
        balance=balance,
        node_velocity=v_p,
        forces=forces,
        entropy=entropy,
        predictor_flags=pred.flagged,
        cn_flags=cn_flags,
        time=time + dt,
        dt=dt,
    )
