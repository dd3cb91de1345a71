"""
Global diagnostics: conserved totals, energies, numerical dissipation and
per-step MOOD statistics, collected as a pandas time series.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from hyperlag.constitutive.material import MaterialModel, free_energies
from hyperlag.constitutive.tensors import strain_state
from hyperlag.mood.levels import SchemeLevelMap
from hyperlag.state import CellState

logger = logging.getLogger(__name__)

DIAG_COLUMNS = [
    "step", "time", "dt", "branch", "mass", "momx", "momy", "energy",
    "kinetic", "free", "delta_h", "troubled", "levelP0", "levelP1BJ", "levelP1",
]


def _sum(values: np.ndarray) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


@dataclass
class EnergyTotals:
    """Mass-weighted totals of one state."""
    mass: float
    momentum: np.ndarray
    energy: float
    kinetic: float
    free: float

    @property
    def mechanical(self) -> float:
        return self.free + self.kinetic


def energy_totals(state: CellState, cell_mass: np.ndarray, model: MaterialModel) -> EnergyTotals:
    """Total mass, momentum, total energy, kinetic energy and free energy."""
    strain = strain_state(state.B)
    psi_v, psi_s = free_energies(strain, model, state.internal_energy)
    kinetic = cell_mass * state.kinetic
    return EnergyTotals(
        mass=_sum(cell_mass),
        momentum=np.array([_sum(cell_mass * state.v[:, 0]), _sum(cell_mass * state.v[:, 1])]),
        energy=_sum(cell_mass * state.e),
        kinetic=_sum(kinetic),
        free=_sum(cell_mass * (psi_v + psi_s)),
    )


def numerical_dissipation(totals: EnergyTotals, initial: EnergyTotals) -> float:
    """
    delta_h = (Psi + k - E0) / E0 with E0 = Psi_0 + k_0.

    With E0 = 0 the absolute drift Psi + k - E0 is returned instead.
    """
    e0 = initial.mechanical
    drift = totals.mechanical - e0
    if e0 == 0.0:
        return drift
    return drift / e0


@dataclass
class Diagnostics:
    """Time series of global quantities, one row per accepted step."""
    cell_mass: np.ndarray
    model: MaterialModel
    rows: List[Dict[str, Any]] = field(default_factory=list)
    initial: Optional[EnergyTotals] = None
    barycenter: List[Dict[str, float]] = field(default_factory=list)
    track_barycenter: bool = False

    def record(self, step: int, time: float, state: CellState, dt: float = 0.0, branch: str = "",
               level_map: Optional[SchemeLevelMap] = None, centroid: Optional[np.ndarray] = None) -> Dict[str, Any]:
        totals = energy_totals(state, self.cell_mass, self.model)
        if self.initial is None:
            self.initial = totals
            if totals.mechanical == 0.0:
                logger.warning("Initial mechanical energy is zero; delta_h is reported as an absolute drift")
        n = state.n_cells
        counts = level_map.counts() if level_map is not None else {"P0": 0, "P1BJ": 0, "P1": n}
        row = {
            "step": step,
            "time": time,
            "dt": dt,
            "branch": branch,
            "mass": totals.mass,
            "momx": float(totals.momentum[0]),
            "momy": float(totals.momentum[1]),
            "energy": totals.energy,
            "kinetic": totals.kinetic,
            "free": totals.free,
            "delta_h": numerical_dissipation(totals, self.initial),
            "troubled": level_map.troubled_count if level_map is not None else 0,
            "levelP0": counts["P0"],
            "levelP1BJ": counts["P1BJ"],
            "levelP1": counts["P1"],
        }
        self.rows.append(row)
        if self.track_barycenter and centroid is not None:
            total = _sum(self.cell_mass)
            self.barycenter.append({
                "step": step,
                "time": time,
                "x": _sum(self.cell_mass * centroid[:, 0]) / total,
                "y": _sum(self.cell_mass * centroid[:, 1]) / total,
            })
        return row

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=DIAG_COLUMNS)

    @property
    def last(self) -> Dict[str, Any]:
        return self.rows[-1]

    def mean_troubled_fraction(self, n_cells: int) -> float:
        steps = [r["troubled"] for r in self.rows if r["step"] > 0]
        if not steps:
            return 0.0
        return float(np.mean(steps)) / n_cells

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    def write_barycenter(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(self.barycenter, columns=["step", "time", "x", "y"]).to_csv(path, index=False, float_format="%.17g")
        return path
