"""
MOOD loop: candidate -> detect -> decrement -> recompute until every cell is accepted.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from hyperlag.errors import MeshTanglingError, SolverError
from hyperlag.mesh.geometry import MeshGeometry
from hyperlag.mood.detection import DetectionCriteria, TroubleReason, detect
from hyperlag.mood.levels import Cascade, SchemeLevel, SchemeLevelMap, decrement
from hyperlag.solver.scheme import Candidate, SolverContext, compute_candidate
from hyperlag.state import CellState

logger = logging.getLogger(__name__)

FATAL_AT_PARACHUTE = (TroubleReason.PAD_TAU, TroubleReason.PAD_ENERGY, TroubleReason.PAD_STRAIN)


class MoodSolver:
    """
    Drives the cascade for one time step.

    Every iteration recomputes the whole candidate at the current level map.
    A cell changing level changes the node velocities of every cell around
    its vertices, so a global recomputation is the simplest exact form of
    recomputing the troubled cells together with their neighbourhood.
    """

    def __init__(self, context: SolverContext, criteria: Optional[DetectionCriteria] = None,
                 cascade: Cascade = Cascade.THREE_LEVEL):
        self.context = context
        self.criteria = criteria or DetectionCriteria()
        self.cascade = cascade

    def step(self, state: CellState, geometry: MeshGeometry, time: float,
             dt: float) -> Tuple[Candidate, SchemeLevelMap]:
        """
        Advance from ``time`` to ``time + dt``.

        Raises:
            SolverError: non-finite or inadmissible data at the parachute level
            MeshTanglingError: a tangled cell at the parachute level
        """
        ctx = self.context
        topo = ctx.topology
        level_map = SchemeLevelMap.fresh(topo.n_cells, self.cascade)
        max_iterations = len(self.cascade.rungs) * topo.n_cells

        while True:
            candidate = compute_candidate(ctx, state, geometry, time, dt, level_map.levels)
            troubled, reasons = detect(
                candidate.state, candidate.geometry, geometry, topo,
                ctx.masses.cell_mass, ctx.model, self.criteria,
                predictor_flags=candidate.predictor_flags, cn_flags=candidate.cn_flags,
            )
            level_map.reasons = np.where(troubled, reasons, level_map.reasons).astype(np.int8)

            at_floor = troubled & (level_map.levels == SchemeLevel.P0)
            if at_floor.any():
                self._check_parachute(at_floor, reasons, candidate, time + dt)
                logger.debug(f"Accepted {int(at_floor.sum())} P0 cells failing RDMP or involution criteria at t={time + dt:.6e}")
            to_drop = troubled & ~at_floor
            if not to_drop.any():
                break
            neighbourhood = decrement(level_map, to_drop, topo)
            level_map.iterations += 1
            level_map.recomputed += topo.n_cells
            logger.debug(f"MOOD iteration {level_map.iterations}: {int(to_drop.sum())} cells dropped, "
                         f"neighbourhood of {neighbourhood.size} cells, recomputing all {topo.n_cells}")
            if level_map.iterations > max_iterations:
                raise SolverError(f"MOOD loop did not terminate after {level_map.iterations} iterations")

        counts = level_map.counts()
        logger.debug(f"MOOD step t={time:.6e} dt={dt:.3e}: {level_map.iterations} iterations, "
                     f"{level_map.troubled_count} troubled, levels {counts}")
        return candidate, level_map

    @staticmethod
    def _check_parachute(at_floor: np.ndarray, reasons: np.ndarray, candidate: Candidate, time: float) -> None:
        not_finite = at_floor & (reasons == TroubleReason.NOT_FINITE)
        if not_finite.any():
            cell = int(np.flatnonzero(not_finite)[0])
            raise SolverError(f"Non-finite state at the parachute level in cell {cell} at t={time:.6e}")
        tangled = at_floor & (reasons == TroubleReason.TANGLED)
        if tangled.any():
            cell = int(np.flatnonzero(tangled)[0])
            raise MeshTanglingError(cell, time=time, volume=float(candidate.geometry.volume[cell]))
        inadmissible = at_floor & np.isin(reasons, [int(r) for r in FATAL_AT_PARACHUTE])
        if inadmissible.any():
            cell = int(np.flatnonzero(inadmissible)[0])
            raise SolverError(f"Inadmissible state at the parachute level in cell {cell} "
                              f"({TroubleReason(int(reasons[cell])).name}) at t={time:.6e}")


def mood_step(context: SolverContext, state: CellState, geometry: MeshGeometry, time: float, dt: float,
              criteria: Optional[DetectionCriteria] = None,
              cascade: Cascade = Cascade.THREE_LEVEL) -> Tuple[Candidate, SchemeLevelMap]:
    """Accepted candidate at ``time + dt`` and the level statistics of the step."""
    return MoodSolver(context, criteria, cascade).step(state, geometry, time, dt)
