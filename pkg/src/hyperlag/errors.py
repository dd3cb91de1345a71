"""
Exception hierarchy for hyperlag.

Fatal conditions raised by the mesh, constitutive, boundary and solver layers.
Inadmissible candidate states produced inside a MOOD iteration are never raised:
they are returned as data and classified by the detector.
"""

from typing import Optional


class HyperlagError(Exception):
    """Base class for all errors raised by hyperlag."""
    pass


class ConfigurationError(HyperlagError):
    """Invalid run configuration, material block or test-case selector."""
    pass


class MeshError(HyperlagError):
    """Invalid mesh topology or ingestion failure."""
    pass


class MeshTanglingError(MeshError):
    """A cell has non-positive volume."""

    def __init__(self, cell: int, time: Optional[float] = None, volume: Optional[float] = None):
        self.cell = cell
        self.time = time
        self.volume = volume
        message = f"Cell {cell} is tangled"
        if volume is not None:
            message += f" (volume {volume:.6e})"
        if time is not None:
            message += f" at t={time:.6e}"
        super().__init__(message)


class ConstitutiveError(HyperlagError):
    """Strain state outside the domain of the constitutive law (J <= 0)."""
    pass


class BoundaryConditionError(HyperlagError):
    """Contradictory set of boundary conditions at a node."""

    def __init__(self, node: int, message: str):
        self.node = node
        super().__init__(f"Node {node}: {message}")


class SolverError(HyperlagError):
    """Singular nodal system, invalid time step, or a non-finite or inadmissible accepted state."""
    pass
