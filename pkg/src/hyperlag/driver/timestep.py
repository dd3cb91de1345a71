"""
Time-step control.

dt = min(volume, acoustic, increase), clipped to the next output time and to
t_final. Ties resolve in that order.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from hyperlag.errors import ConfigurationError, SolverError
from hyperlag.mesh.geometry import MeshGeometry

logger = logging.getLogger(__name__)


class DtBranch(Enum):
    """Limiter that set the time step"""
    VOLUME = "volume"
    ACOUSTIC = "acoustic"
    INCREASE = "increase"
    OUTPUT = "output"
    FINAL = "final"
    CONTACT = "contact"


@dataclass
class TimeStepControl:
    """Time-step constants."""
    cfl: float = 0.4
    c_v: float = 0.2
    c_i: float = 0.1

    def __post_init__(self):
        for name in ("cfl", "c_v", "c_i"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigurationError(f"Time-step constant {name} must lie in (0, 1], got {value}")


@dataclass
class TimeStepChoice:
    """Chosen time step and the branch that set it."""
    dt: float
    branch: DtBranch
    proposed: float
    candidates: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"dt": self.dt, "branch": self.branch.value, "proposed": self.proposed, **self.candidates}


def volume_dt(geometry: MeshGeometry, node_velocity: np.ndarray, cells: np.ndarray, c_v: float) -> float:
    """C_v min V / |dV/dt| with dV/dt = sum_p l n . v_p; infinite for a static mesh."""
    rate = np.abs(np.einsum("ckd,ckd->c", geometry.corner_vectors, node_velocity[cells]))
    moving = rate > 0.0
    if not moving.any():
        return math.inf
    return float(c_v * np.min(geometry.volume[moving] / rate[moving]))


def acoustic_dt(geometry: MeshGeometry, sound_speed: np.ndarray, cfl: float) -> float:
    """C_CFL min L_c / a_c."""
    return float(cfl * np.min(geometry.char_length / sound_speed))


def compute_dt(geometry: MeshGeometry, node_velocity: np.ndarray, cells: np.ndarray,
               sound_speed: np.ndarray, dt_prev: Optional[float], control: TimeStepControl,
               time: float, t_final: float, next_output: Optional[float] = None) -> TimeStepChoice:
    """
    Next time step.

    Args:
        geometry: t^n geometry
        node_velocity: (nn, 2) current node velocities
        cells: (nc, 3) connectivity
        sound_speed: (nc,) wave speeds a_c
        dt_prev: previous unclipped step, None on the first step
        control: constants
        time: t^n
        t_final: end time
        next_output: next requested snapshot time, if any

    Raises:
        SolverError: non-positive or non-finite time step
    """
    dt_volume = volume_dt(geometry, node_velocity, cells, control.c_v)
    dt_acoustic = acoustic_dt(geometry, sound_speed, control.cfl)
    if math.isnan(dt_volume) or math.isnan(dt_acoustic):
        raise SolverError(f"Time-step limits are undefined at t={time:.6e} (volume={dt_volume}, acoustic={dt_acoustic})")
    seed = dt_acoustic if dt_prev is None else dt_prev
    dt_increase = (1.0 + control.c_i) * seed

    branches = [(DtBranch.VOLUME, dt_volume), (DtBranch.ACOUSTIC, dt_acoustic), (DtBranch.INCREASE, dt_increase)]
    branch, dt = branches[0]
    for b, value in branches[1:]:
        if value < dt:
            branch, dt = b, value
    proposed = dt

    if next_output is not None and next_output < t_final and time + dt >= next_output:
        branch, dt = DtBranch.OUTPUT, next_output - time
    if time + dt >= t_final:
        branch, dt = DtBranch.FINAL, t_final - time

    if not (math.isfinite(dt) and dt > 0.0):
        raise SolverError(f"Invalid time step {dt} at t={time:.6e} "
                          f"(volume={dt_volume}, acoustic={dt_acoustic}, increase={dt_increase})")
    return TimeStepChoice(dt=dt, branch=branch, proposed=proposed,
                          candidates={"volume": dt_volume, "acoustic": dt_acoustic, "increase": dt_increase})
