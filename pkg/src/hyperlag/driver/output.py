"""
Snapshot output in legacy ASCII VTK unstructured-grid format.
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from hyperlag.constitutive.material import MaterialModel, constitutive_response
from hyperlag.state import CellState

logger = logging.getLogger(__name__)

VTK_TRIANGLE = 5


def _rows(f, values: np.ndarray) -> None:
    for row in np.atleast_2d(values):
        f.write(" ".join("%.17g" % v for v in row) + "\n")


def write_vtk(path: Union[str, Path], coords: np.ndarray, cells: np.ndarray, state: CellState,
              model: MaterialModel, levels: Optional[np.ndarray] = None,
              node_velocity: Optional[np.ndarray] = None, title: str = "hyperlag snapshot") -> Path:
    """
    Write one snapshot.

    CELL_DATA holds rho, p, level and the tensors B and T; POINT_DATA holds the
    node velocity. Field order is fixed.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nn = coords.shape[0]
    nc = cells.shape[0]
    response = constitutive_response(state.tau, state.B, state.internal_energy, model)
    if levels is None:
        levels = np.zeros(nc, dtype=np.int8)
    if node_velocity is None:
        node_velocity = np.zeros((nn, 2))

    with open(path, "w") as f:
        f.write("# vtk DataFile Version 2.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {nn} double\n")
        _rows(f, np.column_stack([coords, np.zeros(nn)]))
        f.write(f"CELLS {nc} {4 * nc}\n")
        for c in cells:
            f.write(f"3 {c[0]} {c[1]} {c[2]}\n")
        f.write(f"CELL_TYPES {nc}\n")
        f.write(f"{VTK_TRIANGLE}\n" * nc)

        f.write(f"CELL_DATA {nc}\n")
        for name, values in (("rho", state.rho), ("p", response.pressure)):
            f.write(f"SCALARS {name} double 1\n")
            f.write("LOOKUP_TABLE default\n")
            _rows(f, np.asarray(values)[:, None])
        f.write("SCALARS level int 1\n")
        f.write("LOOKUP_TABLE default\n")
        f.write("".join(f"{int(v)}\n" for v in levels))
        for name, tensor in (("B", state.B), ("T", response.stress)):
            f.write(f"TENSORS {name} double\n")
            for t in tensor:
                _rows(f, t)

        f.write(f"POINT_DATA {nn}\n")
        f.write("VECTORS velocity double\n")
        _rows(f, np.column_stack([node_velocity, np.zeros(nn)]))
    return path


class SnapshotWriter:
    """Numbered snapshots ``<directory>/<prefix>_<index>.vtk``."""

    def __init__(self, directory: Union[str, Path], prefix: str = "snapshot", enabled: bool = True):
        self.directory = Path(directory)
        self.prefix = prefix
        self.enabled = enabled
        self.written: List[Path] = []

    def write(self, time: float, coords: np.ndarray, cells: np.ndarray, state: CellState,
              model: MaterialModel, levels: Optional[np.ndarray] = None,
              node_velocity: Optional[np.ndarray] = None) -> Optional[Path]:
        if not self.enabled:
            return None
        path = self.directory / f"{self.prefix}_{len(self.written):04d}.vtk"
        write_vtk(path, coords, cells, state, model, levels, node_velocity, title=f"{self.prefix} t={time:.17g}")
        self.written.append(path)
        logger.info(f"Wrote snapshot {path} at t={time:.6e}")
        return path
