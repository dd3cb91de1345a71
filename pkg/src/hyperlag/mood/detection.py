"""
A-posteriori detection of troubled cells in a candidate solution.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from hyperlag.constitutive.material import MaterialModel, energy_scale
from hyperlag.constitutive.tensors import min_eigenvalue
from hyperlag.errors import ConfigurationError
from hyperlag.mesh.geometry import MeshGeometry
from hyperlag.mesh.topology import MeshTopology
from hyperlag.state import CellState

logger = logging.getLogger(__name__)


class TroubleReason(IntEnum):
    """First failed criterion of a troubled cell, in the order they are tested."""
    NONE = 0
    NOT_FINITE = 1
    TANGLED = 2
    PAD_TAU = 3
    PAD_ENERGY = 4
    PAD_STRAIN = 5
    PREDICTOR = 6
    CN_FALLBACK = 7
    RDMP = 8
    INVOLUTION = 9


RDMP_VARIABLES = ("density", "none")


@dataclass
class DetectionCriteria:
    """Tolerances of the detector."""
    delta0: float = 1e-4
    delta1: float = 1e-3
    rdmp_variable: str = "density"
    check_involution: bool = True
    energy_tolerance: float = 1e-8
    reference_length: float = 1.0

    def __post_init__(self):
        if not (self.delta0 > 0.0 and self.delta1 > 0.0):
            raise ConfigurationError(f"RDMP tolerances must be positive, got delta0={self.delta0}, delta1={self.delta1}")
        if self.rdmp_variable not in RDMP_VARIABLES:
            raise ConfigurationError(f"Unknown RDMP variable '{self.rdmp_variable}', expected one of {RDMP_VARIABLES}")
        if not self.energy_tolerance >= 0.0:
            raise ConfigurationError(f"energy_tolerance must be non-negative, got {self.energy_tolerance}")
        if not self.reference_length > 0.0:
            raise ConfigurationError(f"reference_length must be positive, got {self.reference_length}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta0": self.delta0,
            "delta1": self.delta1,
            "rdmp_variable": self.rdmp_variable,
            "check_involution": self.check_involution,
            "energy_tolerance": self.energy_tolerance,
            "reference_length": self.reference_length,
        }


def rdmp_bounds(values: np.ndarray, topology: MeshTopology,
                delta0: float, delta1: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Relaxed bounds [m - delta, M + delta] over each cell and its face neighbours,
    delta = max(delta0, delta1 (M - m)).
    """
    nb = topology.cell_neighbors
    stencil = np.where(nb >= 0, values[np.where(nb >= 0, nb, 0)], values[:, None])
    lo = np.minimum(values, stencil.min(axis=1))
    hi = np.maximum(values, stencil.max(axis=1))
    delta = np.maximum(delta0, delta1 * (hi - lo))
    return lo - delta, hi + delta


def involution_defect(state: CellState, geometry: MeshGeometry, cell_mass: np.ndarray,
                      rho0: float) -> np.ndarray:
    """|sqrt(det B) - rho0/rho| with rho = m/V the geometric density."""
    finite = np.isfinite(state.B).all(axis=(1, 2))
    with np.errstate(invalid="ignore", divide="ignore"):
        det = np.where(finite, np.linalg.det(np.where(finite[:, None, None], state.B, np.eye(3))), np.nan)
        return np.abs(np.sqrt(det) - rho0 * geometry.volume / cell_mass)


def detect(candidate_state: CellState, candidate_geometry: MeshGeometry, previous_geometry: MeshGeometry,
           topology: MeshTopology, cell_mass: np.ndarray, model: MaterialModel,
           criteria: DetectionCriteria, predictor_flags: Optional[np.ndarray] = None,
           cn_flags: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Classify every cell of a candidate solution.

    RDMP bounds come from the t^n densities on ``previous_geometry``. The
    involution test is absolute: |sqrt(det B) - rho0/rho| < (L_c / reference_length)^3
    on the candidate geometry.

    Returns:
        (troubled mask (nc,), reason codes (nc,) as ``TroubleReason`` values)
    """
    nc = topology.n_cells
    reasons = np.zeros(nc, dtype=np.int8)

    def mark(mask: np.ndarray, reason: TroubleReason) -> None:
        new = mask & (reasons == TroubleReason.NONE)
        reasons[new] = reason

    s = candidate_state
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        finite = s.is_finite() & np.isfinite(candidate_geometry.volume)
        mark(~finite, TroubleReason.NOT_FINITE)
        mark(~(candidate_geometry.volume > 0.0), TroubleReason.TANGLED)
        mark(~(s.tau > 0.0), TroubleReason.PAD_TAU)

        kinetic = s.kinetic
        slack = criteria.energy_tolerance * (energy_scale(model) + kinetic)
        mark(~(s.internal_energy > -slack), TroubleReason.PAD_ENERGY)

        safe_B = np.where(finite[:, None, None], s.B, np.eye(3))
        mark(~(min_eigenvalue(safe_B) > 0.0), TroubleReason.PAD_STRAIN)

        if predictor_flags is not None:
            mark(predictor_flags, TroubleReason.PREDICTOR)
        if cn_flags is not None:
            mark(cn_flags, TroubleReason.CN_FALLBACK)

        if criteria.rdmp_variable == "density":
            rho_prev = cell_mass / previous_geometry.volume
            lo, hi = rdmp_bounds(rho_prev, topology, criteria.delta0, criteria.delta1)
            rho_new = cell_mass / candidate_geometry.volume
            mark(~((rho_new >= lo) & (rho_new <= hi)), TroubleReason.RDMP)

        if criteria.check_involution:
            defect = involution_defect(s, candidate_geometry, cell_mass, model.rho0)
            tolerance = (candidate_geometry.char_length / criteria.reference_length) ** 3
            mark(~(defect < tolerance), TroubleReason.INVOLUTION)

    troubled = reasons != TroubleReason.NONE
    if troubled.any():
        counts = {TroubleReason(r).name: int(np.sum(reasons == r)) for r in np.unique(reasons[troubled])}
        logger.debug(f"Detected {int(troubled.sum())} troubled cells: {counts}")
    return troubled, reasons
