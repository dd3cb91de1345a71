"""Time loop, time-step control, diagnostics, benchmark problems and output."""

from hyperlag.driver.convergence import l2_error_and_order, run_convergence
from hyperlag.driver.diagnostics import Diagnostics, numerical_dissipation
from hyperlag.driver.runner import Simulation, SimulationResult, build_case, build_simulation, run_config
from hyperlag.driver.testcases import TestCase, init_testcase
from hyperlag.driver.timestep import DtBranch, TimeStepControl, compute_dt

__all__ = [
    "Diagnostics",
    "DtBranch",
    "Simulation",
    "SimulationResult",
    "TestCase",
    "TimeStepControl",
    "build_case",
    "build_simulation",
    "compute_dt",
    "init_testcase",
    "l2_error_and_order",
    "numerical_dissipation",
    "run_config",
    "run_convergence",
]
