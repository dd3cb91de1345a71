"""
Initial states and boundary wiring of the benchmark problems.

All materials start unloaded (B = Id) with the velocity field of the case
sampled at the cell centroids.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from hyperlag.constitutive.material import (
    EquationOfState,
    MaterialModel,
    constitutive_response,
    initial_internal_energy,
)
from hyperlag.errors import ConfigurationError
from hyperlag.mesh.generate import BOTTOM, LEFT, RIGHT, TOP, structured_rectangle
from hyperlag.mesh.geometry import compute_geometry
from hyperlag.mesh.topology import Mesh
from hyperlag.solver.boundary import BcDescriptor, BcKind
from hyperlag.state import CellState

logger = logging.getLogger(__name__)

ExactSolution = Callable[[np.ndarray, float], Dict[str, np.ndarray]]


@dataclass
class TestCase:
    """A fully initialized problem."""
    __test__ = False  # not a pytest class

    name: str
    mesh: Mesh
    model: MaterialModel
    state: CellState
    boundary: Dict[int, BcDescriptor]
    t_final: float
    output_times: List[float] = field(default_factory=list)
    exact: Optional[ExactSolution] = None
    track_barycenter: bool = False
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "cells": self.mesh.topology.n_cells,
            "nodes": self.mesh.topology.n_nodes,
            "material": self.model.to_dict(),
            "boundary": {tag: bc.to_dict() for tag, bc in sorted(self.boundary.items())},
            "t_final": self.t_final,
            "output_times": self.output_times,
            "params": self.params,
        }


def _state(mesh: Mesh, model: MaterialModel, velocity: np.ndarray) -> CellState:
    n = mesh.topology.n_cells
    state = CellState.uniform(n, model.rho0, eps=initial_internal_energy(model))
    state.v = np.asarray(velocity, dtype=float).reshape(n, 2).copy()
    state.e = initial_internal_energy(model) + state.kinetic
    return state


def _centroids(mesh: Mesh) -> np.ndarray:
    return compute_geometry(mesh.topology, mesh.coords).centroid


def _merge(defaults: Dict[str, Any], params: Dict[str, Any]) -> Dict[str, Any]:
    defaults = {"a": -1.0, "eos": "neo_hookean_volumetric", "gamma": 1.4, "p_inf": 0.0, **defaults}
    unknown = set(params) - set(defaults)
    if unknown:
        raise ConfigurationError(f"Unknown test-case parameters {sorted(unknown)}")
    return {**defaults, **params}


def _model(p: Dict[str, Any]) -> MaterialModel:
    try:
        eos = EquationOfState(p["eos"])
    except ValueError as e:
        raise ConfigurationError(f"Unknown equation of state '{p['eos']}'") from e
    return MaterialModel(rho0=p["rho0"], E=p["E"], nu=p["nu"], a=p["a"], eos=eos, gamma=p["gamma"], p_inf=p["p_inf"])


def swinging_plate_frequency(mu: float, rho0: float) -> float:
    return 0.5 * math.pi * math.sqrt(2.0 * mu / rho0)


def swinging_plate_velocity(x: np.ndarray, t: float, U0: float, omega: float) -> np.ndarray:
    h = 0.5 * math.pi
    s = omega * U0 * math.cos(omega * t)
    return np.column_stack([
        -s * np.sin(h * x[:, 0]) * np.cos(h * x[:, 1]),
        s * np.cos(h * x[:, 0]) * np.sin(h * x[:, 1]),
    ])


def swinging_plate_deformation(X: np.ndarray, t: float, U0: float, omega: float) -> np.ndarray:
    """Deformation gradient F = Id + grad u of the exact displacement, (k, 3, 3)."""
    h = 0.5 * math.pi
    a = U0 * math.sin(omega * t) * h
    cc = np.cos(h * X[:, 0]) * np.cos(h * X[:, 1])
    ss = np.sin(h * X[:, 0]) * np.sin(h * X[:, 1])
    F = np.tile(np.eye(3), (X.shape[0], 1, 1))
    F[:, 0, 0] += -a * cc
    F[:, 0, 1] += a * ss
    F[:, 1, 0] += -a * ss
    F[:, 1, 1] += a * cc
    return F


def swinging_plate(mesh: Optional[Mesh] = None, **params) -> TestCase:
    p = _merge({"rho0": 1100.0, "E": 1.7e7, "nu": 0.45, "U0": 5e-4,
                "nx": 16, "ny": 16, "pattern": "alternate", "t_final": None}, params)
    model = _model(p)
    omega = swinging_plate_frequency(model.mu, model.rho0)
    U0 = p["U0"]
    if mesh is None:
        mesh = structured_rectangle(0.0, 2.0, 0.0, 2.0, p["nx"], p["ny"], p["pattern"], name="swinging_plate")
    state = _state(mesh, model, swinging_plate_velocity(_centroids(mesh), 0.0, U0, omega))

    def velocity(x, t):
        return swinging_plate_velocity(x, t, U0, omega)

    def exact(X, t):
        F = swinging_plate_deformation(X, t, U0, omega)
        B = F @ np.swapaxes(F, -1, -2)
        J = np.linalg.det(F)
        T = constitutive_response(J / model.rho0, B, np.zeros(X.shape[0]), model).stress
        return {"v": swinging_plate_velocity(X, t, U0, omega), "B": B, "T": T}

    boundary = {tag: BcDescriptor(BcKind.PRESCRIBED_VELOCITY, velocity=velocity, normal_only=True)
                for tag in (BOTTOM, RIGHT, TOP, LEFT)}
    t_final = p["t_final"] if p["t_final"] is not None else math.pi / omega
    return TestCase("swinging_plate", mesh, model, state, boundary, t_final, exact=exact,
                    params={**p, "omega": omega})


def beryllium_profile(x: np.ndarray, L: float = 0.06, alpha: float = 78.834, A: float = 4.3369e-5,
                      omega: float = 2.3597e5, a1: float = 56.6368, a2: float = 57.6455) -> np.ndarray:
    """Initial vertical velocity v0(x) of the vibrating plate."""
    xp = alpha * (np.asarray(x, dtype=float) + 0.5 * L)
    return A * omega * (a1 * (np.sinh(xp) + np.sin(xp)) - a2 * (np.cosh(xp) + np.cos(xp)))


def beryllium_plate(mesh: Optional[Mesh] = None, **params) -> TestCase:
    p = _merge({"rho0": 1845.0, "E": 3.1827e11, "nu": 0.0539, "nx": 48, "ny": 8,
                "pattern": "alternate", "t_final": 3e-5,
                "output_times": [1e-5, 2e-5]}, params)
    model = _model(p)
    if mesh is None:
        mesh = structured_rectangle(-0.03, 0.03, -0.005, 0.005, p["nx"], p["ny"], p["pattern"],
                                    name="beryllium_plate")
    xc = _centroids(mesh)
    velocity = np.column_stack([np.zeros(len(xc)), beryllium_profile(xc[:, 0])])
    state = _state(mesh, model, velocity)
    return TestCase("beryllium_plate", mesh, model, state, {}, p["t_final"],
                    output_times=list(p["output_times"]), track_barycenter=True, params=p)


def cantilever_beam(mesh: Optional[Mesh] = None, **params) -> TestCase:
    p = _merge({"rho0": 1100.0, "E": 1.7e7, "nu": 0.45, "u0": 10.0, "nx": 6, "ny": 36,
                "pattern": "alternate", "t_final": 1.5,
                "output_times": [0.375, 0.75, 1.125]}, params)
    model = _model(p)
    if mesh is None:
        mesh = structured_rectangle(0.0, 1.0, 0.0, 6.0, p["nx"], p["ny"], p["pattern"], name="cantilever_beam")
    n = mesh.topology.n_cells
    state = _state(mesh, model, np.tile([p["u0"], 0.0], (n, 1)))
    boundary = {BOTTOM: BcDescriptor(BcKind.FIXED_POINT)}
    return TestCase("cantilever_beam", mesh, model, state, boundary, p["t_final"],
                    output_times=list(p["output_times"]), params=p)


def uniform_block(mesh: Optional[Mesh] = None, **params) -> TestCase:
    p = _merge({"rho0": 1.0, "E": 1.0, "nu": 0.3, "velocity": [1.0, 0.5],
                "nx": 4, "ny": 4, "pattern": "alternate", "t_final": 0.1}, params)
    model = _model(p)
    if mesh is None:
        mesh = structured_rectangle(0.0, 1.0, 0.0, 1.0, p["nx"], p["ny"], p["pattern"], name="uniform_block")
    v = np.asarray(p["velocity"], dtype=float)
    state = _state(mesh, model, np.tile(v, (mesh.topology.n_cells, 1)))
    boundary = {tag: BcDescriptor(BcKind.PRESCRIBED_VELOCITY, velocity=v.tolist())
                for tag in (BOTTOM, RIGHT, TOP, LEFT)}
    return TestCase("uniform_block", mesh, model, state, boundary, p["t_final"], params=p)


def contact_drop(mesh: Optional[Mesh] = None, **params) -> TestCase:
    """Elastic block moving onto a rigid wall at y = 0, bouncing off it."""
    p = _merge({"rho0": 1.0, "E": 2.0, "nu": 0.0, "v0": -0.05, "gap": 0.01,
                "nx": 6, "ny": 6, "pattern": "alternate", "t_final": 2.0}, params)
    model = _model(p)
    if mesh is None:
        mesh = structured_rectangle(0.0, 1.0, p["gap"], p["gap"] + 1.0, p["nx"], p["ny"], p["pattern"],
                                    name="contact_drop")
    state = _state(mesh, model, np.tile([0.0, p["v0"]], (mesh.topology.n_cells, 1)))
    boundary = {
        BOTTOM: BcDescriptor(BcKind.EVOLVING_CONTACT, wall_point=(0.0, 0.0), wall_normal=(0.0, 1.0)),
        LEFT: BcDescriptor(BcKind.SYMMETRY_PLANE),
        RIGHT: BcDescriptor(BcKind.SYMMETRY_PLANE),
    }
    return TestCase("contact_drop", mesh, model, state, boundary, p["t_final"], params=p)


TESTCASES: Dict[str, Callable[..., TestCase]] = {
    "swinging_plate": swinging_plate,
    "beryllium_plate": beryllium_plate,
    "cantilever_beam": cantilever_beam,
    "uniform_block": uniform_block,
    "contact_drop": contact_drop,
}


def init_testcase(selector: str, mesh: Optional[Mesh] = None, **params) -> TestCase:
    """
    Build the named problem, on ``mesh`` or on its default structured mesh.

    Raises:
        ConfigurationError: unknown selector or parameter
    """
    try:
        builder = TESTCASES[selector]
    except KeyError as e:
        raise ConfigurationError(f"Unknown test case '{selector}', expected one of {sorted(TESTCASES)}") from e
    case = builder(mesh, **params)
    logger.info(f"Initialized {case.name}: {case.mesh.topology.n_cells} cells, t_final={case.t_final:.6e}")
    return case
