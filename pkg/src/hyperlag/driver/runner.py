"""
Main time loop.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from hyperlag.config import RunConfig, Settings, get_settings
from hyperlag.constitutive.material import constitutive_response, energy_scale
from hyperlag.constitutive.tensors import min_eigenvalue
from hyperlag.driver.diagnostics import Diagnostics
from hyperlag.driver.output import SnapshotWriter
from hyperlag.driver.testcases import TestCase, init_testcase
from hyperlag.driver.timestep import DtBranch, TimeStepChoice, TimeStepControl, compute_dt
from hyperlag.errors import ConfigurationError, HyperlagError, SolverError
from hyperlag.mesh.generate import structured_rectangle
from hyperlag.mesh.geometry import compute_geometry, subcell_masses
from hyperlag.mesh.io import read_mesh
from hyperlag.mesh.topology import Mesh
from hyperlag.mood.detection import DetectionCriteria
from hyperlag.mood.levels import Cascade, SchemeLevelMap
from hyperlag.mood.loop import MoodSolver
from hyperlag.solver.boundary import BoundaryConditions, ContactTracker
from hyperlag.solver.scheme import SolverContext, node_velocities

logger = logging.getLogger(__name__)

MAX_CONTACT_PASSES = 16


@dataclass
class SimulationResult:
    """Outcome of a run."""
    name: str
    completed: bool
    steps: int
    time: float
    diagnostics: Diagnostics
    snapshots: List[Path] = field(default_factory=list)
    files: Dict[str, Path] = field(default_factory=dict)
    events: List[Dict[str, Any]] = field(default_factory=list)
    min_entropy: float = math.inf

    @property
    def exit_status(self) -> int:
        return 0 if self.completed else 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "completed": self.completed,
            "steps": self.steps,
            "time": self.time,
            "snapshots": [str(p) for p in self.snapshots],
            "files": {k: str(v) for k, v in self.files.items()},
            "events": self.events,
            "min_entropy": self.min_entropy,
        }


class Simulation:
    """
    Owns the evolving state of one problem and advances it to t_final.
    """

    def __init__(self, case: TestCase, control: Optional[TimeStepControl] = None,
                 criteria: Optional[DetectionCriteria] = None, cascade: Cascade = Cascade.THREE_LEVEL,
                 predictor_iterations: int = 2, predictor_tolerance: float = 1e-12,
                 output_dir: Optional[Union[str, Path]] = None, output_every: int = 0,
                 output_times: Optional[List[float]] = None, vtk: bool = True,
                 max_steps: Optional[int] = None):
        self.case = case
        self.control = control or TimeStepControl()
        self.cascade = cascade
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.output_every = output_every
        self.max_steps = max_steps

        topology = case.mesh.topology
        self.topology = topology
        self.geometry = compute_geometry(topology, case.mesh.coords)
        self.geometry.check_orientation(time=0.0)
        self.masses = subcell_masses(topology, self.geometry, case.model.rho0)
        self.reference_centroid = self.geometry.centroid.copy()

        lo = case.mesh.coords.min(axis=0)
        hi = case.mesh.coords.max(axis=0)
        criteria = criteria or DetectionCriteria()
        self.criteria = replace(criteria, reference_length=float(np.linalg.norm(hi - lo)))

        self.boundary = BoundaryConditions(topology, case.boundary)
        self.context = SolverContext(topology, self.masses, case.model, self.boundary,
                                     predictor_iterations=predictor_iterations,
                                     predictor_tolerance=predictor_tolerance)
        self.mood = MoodSolver(self.context, self.criteria, cascade)
        self.tracker = ContactTracker(self.boundary)

        self.state = case.state.copy()
        self.time = 0.0
        self.step_count = 0
        self.dt_prev: Optional[float] = None
        self.level_map = SchemeLevelMap.fresh(topology.n_cells, cascade)
        self.node_velocity = np.zeros((topology.n_nodes, 2))
        self.min_entropy = math.inf

        times = case.output_times if output_times is None else output_times
        self.output_times = sorted(t for t in times if 0.0 < t < case.t_final)
        self.diagnostics = Diagnostics(self.masses.cell_mass, case.model, track_barycenter=case.track_barycenter)
        self.snapshots = SnapshotWriter(self.output_dir or Path("."), prefix=case.name,
                                        enabled=vtk and self.output_dir is not None)

    @property
    def t_final(self) -> float:
        return self.case.t_final

    def _next_output(self) -> Optional[float]:
        for t in self.output_times:
            if t > self.time:
                return t
        return None

    def _snapshot(self) -> None:
        self.snapshots.write(self.time, self.geometry.coords, self.topology.cells, self.state,
                             self.case.model, self.level_map.levels, self.node_velocity)

    def _record(self, choice: Optional[TimeStepChoice], branch: str = "") -> None:
        self.diagnostics.record(self.step_count, self.time, self.state,
                                dt=choice.dt if choice else 0.0, branch=branch,
                                level_map=self.level_map if choice else None,
                                centroid=self.geometry.centroid)

    def check_admissible(self) -> None:
        """
        Assert that the accepted state lies in the admissible set.

        Raises:
            SolverError: tau, internal energy or B out of the admissible set
        """
        s = self.state
        slack = self.criteria.energy_tolerance * (energy_scale(self.case.model) + s.kinetic)
        bad = ~((s.tau > 0.0) & (s.internal_energy > -slack) & (min_eigenvalue(s.B) > 0.0))
        if bad.any():
            cell = int(np.flatnonzero(bad)[0])
            raise SolverError(f"Accepted state is not admissible in cell {cell} at t={self.time:.6e}")

    def step(self) -> TimeStepChoice:
        """Advance one accepted time step."""
        model = self.case.model
        time = self.time
        velocities = node_velocities(self.context, self.state, self.geometry, time)
        response = constitutive_response(self.state.tau, self.state.B, self.state.internal_energy, model)
        next_output = self._next_output()
        choice = compute_dt(self.geometry, velocities.velocity, self.topology.cells, response.sound_speed,
                            self.dt_prev, self.control, time, self.t_final, next_output)
        dt = choice.dt
        branch = choice.branch

        # contact switches redo the step; a landing node gets the step that puts it on the wall
        self.tracker.begin_step()
        for _ in range(MAX_CONTACT_PASSES):
            candidate, level_map = self.mood.step(self.state, self.geometry, time, dt)
            if not self.boundary.has_contact:
                break
            states, landing, settled = self.tracker.evolve(self.geometry.coords, candidate.node_velocity,
                                                           candidate.balance.free_velocity, dt)
            if self.tracker.apply(states, self.step_count + 1, time):
                continue
            if landing < choice.dt:
                if settled:
                    break
                dt = landing
                branch = DtBranch.CONTACT
                continue
            if dt < choice.dt:
                dt = choice.dt
                branch = choice.branch
                continue
            break
        else:
            logger.warning(f"Contact resolution did not settle in {MAX_CONTACT_PASSES} passes at t={time:.6e}")

        if branch == DtBranch.FINAL:
            self.time = self.t_final
        elif branch == DtBranch.OUTPUT:
            self.time = next_output
        else:
            self.time = time + dt
        self.state = candidate.state
        self.geometry = candidate.geometry
        self.node_velocity = candidate.node_velocity
        self.level_map = level_map
        self.dt_prev = choice.proposed
        self.step_count += 1
        self.min_entropy = min(self.min_entropy, float(np.min(candidate.entropy)))
        self.check_admissible()

        choice = replace(choice, dt=dt, branch=branch)
        self._record(choice, branch.value)
        if branch == DtBranch.OUTPUT or (self.output_every and self.step_count % self.output_every == 0):
            self._snapshot()
        return choice

    def run(self) -> SimulationResult:
        """
        Advance to t_final, writing snapshots and diagnostics.

        Raises:
            HyperlagError: with step and time context
        """
        logger.info(f"Starting {self.case.name}: {self.topology.n_cells} cells, t_final={self.t_final:.6e}, "
                    f"cascade {self.cascade.value}")
        self._record(None, "initial")
        self._snapshot()
        completed = True
        try:
            while self.time < self.t_final:
                if self.max_steps is not None and self.step_count >= self.max_steps:
                    logger.warning(f"Stopped after max_steps={self.max_steps} at t={self.time:.6e}")
                    completed = False
                    break
                self.step()
        except HyperlagError as e:
            logger.error(f"{self.case.name} failed at step {self.step_count + 1}, t={self.time:.6e}: {e}")
            raise
        if completed and not (self.output_every and self.step_count % self.output_every == 0) and self.step_count:
            self._snapshot()

        files: Dict[str, Path] = {}
        if self.output_dir is not None:
            files["diag"] = self.diagnostics.write_csv(self.output_dir / "diag.csv")
            if self.case.track_barycenter:
                files["barycenter"] = self.diagnostics.write_barycenter(self.output_dir / "barycenter.csv")
        logger.info(f"Finished {self.case.name} after {self.step_count} steps at t={self.time:.6e}, "
                    f"delta_h={self.diagnostics.last['delta_h']:.3e}")
        return SimulationResult(
            name=self.case.name,
            completed=completed,
            steps=self.step_count,
            time=self.time,
            diagnostics=self.diagnostics,
            snapshots=list(self.snapshots.written),
            files=files,
            events=[e.to_dict() for e in self.tracker.events],
            min_entropy=self.min_entropy,
        )

    def errors(self) -> Dict[str, float]:
        """Mass-weighted L2 errors of u, B11 and T11 against the exact solution at the current time."""
        if self.case.exact is None:
            raise SolverError(f"Test case {self.case.name} has no exact solution")
        exact = self.case.exact(self.reference_centroid, self.time)
        response = constitutive_response(self.state.tau, self.state.B, self.state.internal_energy, self.case.model)
        mass = self.masses.cell_mass
        return {
            "u": l2_norm(self.state.v[:, 0] - exact["v"][:, 0], mass),
            "B11": l2_norm(self.state.B[:, 0, 0] - exact["B"][:, 0, 0], mass),
            "T11": l2_norm(response.stress[:, 0, 0] - exact["T"][:, 0, 0], mass),
        }

    def characteristic_length(self) -> float:
        """Smallest in-circle diameter of the current mesh."""
        return float(np.min(self.geometry.char_length))


def l2_norm(values: np.ndarray, weight: np.ndarray) -> float:
    """sqrt(sum_c w_c d_c^2), with w the cell masses for the error norms."""
    return math.sqrt(math.fsum((weight * np.asarray(values, dtype=float) ** 2).tolist()))


def build_case(config: RunConfig, refine: int = 0) -> TestCase:
    """
    Build the configured problem, ``refine`` extra uniform refinements deep.

    Raises:
        ConfigurationError: unknown parameters or an unusable boundary tag
        MeshError: mesh file or generation failure
    """
    params = dict(config.testcase.params)
    if config.material is not None:
        params.update(config.material.model_dump())
    if config.time.t_final is not None:
        params["t_final"] = config.time.t_final

    mesh: Optional[Mesh] = None
    if config.mesh is not None and config.mesh.path is not None:
        mesh = read_mesh(config.mesh.path)
    elif config.mesh is not None and config.mesh.generate is not None:
        g = config.mesh.generate
        mesh = structured_rectangle(g.x0, g.x1, g.y0, g.y1, g.nx, g.ny, g.pattern, name=config.testcase.name)
    levels = refine + (config.mesh.refine if config.mesh is not None else 0)
    if levels:
        if mesh is None:
            mesh = init_testcase(config.testcase.name, None, **params).mesh
        mesh = mesh.refine(levels)

    case = init_testcase(config.testcase.name, mesh, **params)
    tags = set(case.mesh.topology.tags())
    for tag, bc in config.boundary.items():
        if tag not in tags:
            raise ConfigurationError(f"Boundary tag {tag} does not appear on the mesh (tags {sorted(tags)})")
        case.boundary[tag] = bc.to_descriptor()
    return case


def simulation_options(config: RunConfig, settings: Optional[Settings] = None) -> Dict[str, Any]:
    """Keyword arguments of ``Simulation`` taken from a run configuration."""
    settings = settings or get_settings()
    return {
        "control": TimeStepControl(cfl=config.time.cfl, c_v=config.time.c_v, c_i=config.time.c_i),
        "criteria": DetectionCriteria(
            delta0=config.mood.delta0,
            delta1=config.mood.delta1,
            rdmp_variable=config.mood.rdmp_variable,
            check_involution=config.mood.check_involution,
            energy_tolerance=config.mood.energy_tolerance,
        ),
        "cascade": Cascade.parse(config.mood.cascade),
        "predictor_iterations": config.predictor.iterations,
        "predictor_tolerance": config.predictor.tolerance,
        "output_dir": config.output.directory or settings.HYPERLAG_OUTPUT_DIR,
        "output_every": config.output.every,
        "output_times": config.output.times,
        "vtk": config.output.vtk,
        "max_steps": config.time.max_steps,
    }


def build_simulation(config: RunConfig, settings: Optional[Settings] = None) -> Simulation:
    return Simulation(build_case(config), **simulation_options(config, settings))


def run_config(config: RunConfig, settings: Optional[Settings] = None) -> SimulationResult:
    """Build and run a configured problem."""
    return build_simulation(config, settings).run()
