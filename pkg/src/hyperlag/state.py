"""
Per-cell state vector Q_c = (tau, v, e, B).

The reconstruction and the predictor operate on the packed variable layout
``VARIABLES``; B keeps its plane-strain 3x3 form everywhere else.
"""

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from hyperlag.constitutive.tensors import plane_components, symmetric_from_components

VARIABLES = ("tau", "vx", "vy", "e", "B11", "B22", "B33", "B12")
TAU, VX, VY, E, B11, B22, B33, B12 = range(len(VARIABLES))
N_VARIABLES = len(VARIABLES)


@dataclass
class CellState:
    """Specific volume, velocity, specific total energy and left Cauchy-Green tensor per cell."""
    tau: np.ndarray  # (nc,)
    v: np.ndarray    # (nc, 2)
    e: np.ndarray    # (nc,)
    B: np.ndarray    # (nc, 3, 3)

    @property
    def n_cells(self) -> int:
        return int(self.tau.shape[0])

    @property
    def rho(self) -> np.ndarray:
        return 1.0 / self.tau

    @property
    def kinetic(self) -> np.ndarray:
        """Specific kinetic energy ½|v|²."""
        return 0.5 * np.sum(self.v ** 2, axis=-1)

    @property
    def internal_energy(self) -> np.ndarray:
        """Specific internal energy eps = e - ½|v|²."""
        return self.e - self.kinetic

    def copy(self) -> "CellState":
        return CellState(tau=self.tau.copy(), v=self.v.copy(), e=self.e.copy(), B=self.B.copy())

    def to_variables(self) -> np.ndarray:
        """Pack into (nc, 8) in ``VARIABLES`` order."""
        return np.column_stack([self.tau, self.v, self.e, plane_components(self.B)])

    @classmethod
    def from_variables(cls, W: np.ndarray) -> "CellState":
        W = np.asarray(W, dtype=float)
        return cls(
            tau=W[..., TAU].copy(),
            v=W[..., VX:VY + 1].copy(),
            e=W[..., E].copy(),
            B=symmetric_from_components(W[..., B11], W[..., B22], W[..., B33], W[..., B12]),
        )

    @classmethod
    def uniform(cls, n_cells: int, rho: float, velocity=(0.0, 0.0), eps: float = 0.0) -> "CellState":
        v = np.tile(np.asarray(velocity, dtype=float), (n_cells, 1))
        return cls(
            tau=np.full(n_cells, 1.0 / rho),
            v=v,
            e=eps + 0.5 * np.sum(v ** 2, axis=1),
            B=np.tile(np.eye(3), (n_cells, 1, 1)),
        )

    def is_finite(self) -> np.ndarray:
        return (np.isfinite(self.tau) & np.isfinite(self.v).all(axis=1)
                & np.isfinite(self.e) & np.isfinite(self.B).all(axis=(1, 2)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau": self.tau.tolist(),
            "v": self.v.tolist(),
            "e": self.e.tolist(),
            "B": self.B.tolist(),
        }
