"""
Long benchmark runs. Deselected by default; run with ``pytest -m slow``.
"""

import math

import numpy as np
import pytest

from hyperlag.driver.convergence import run_convergence
from hyperlag.driver.runner import Simulation
from hyperlag.driver.testcases import init_testcase
from hyperlag.mood.levels import Cascade

pytestmark = pytest.mark.slow


def test_swinging_plate_converges_at_second_order():
    table = run_convergence(lambda k: init_testcase("swinging_plate", nx=8 * 2 ** k, ny=8 * 2 ** k), 3)
    for var in ("u", "B11", "T11"):
        assert table[f"order_{var}"].iloc[-1] >= 1.8, table.to_string()


def test_beryllium_plate_never_needs_the_parachute():
    runs = {}
    for cascade in (Cascade.THREE_LEVEL, Cascade.TWO_LEVEL):
        result = Simulation(init_testcase("beryllium_plate"), cascade=cascade).run()
        assert result.completed
        runs[cascade] = result
    frame = runs[Cascade.THREE_LEVEL].diagnostics.to_frame()
    assert (frame["levelP0"] == 0).all()
    three = abs(runs[Cascade.THREE_LEVEL].diagnostics.last["delta_h"])
    two = abs(runs[Cascade.TWO_LEVEL].diagnostics.last["delta_h"])
    assert three <= 0.7 * two


def test_cantilever_beam_is_dissipative_and_rarely_troubled():
    case = init_testcase("cantilever_beam", output_times=[])
    assert case.t_final == 1.5
    sim = Simulation(case)
    result = sim.run()
    assert result.completed
    assert sim.time == 1.5
    assert result.min_entropy >= -1e-14
    assert result.diagnostics.mean_troubled_fraction(case.mesh.topology.n_cells) <= 0.15
    frame = result.diagnostics.to_frame()
    first, last = frame.iloc[0], frame.iloc[-1]
    # fixed nodes do no work: total energy is conserved, mechanical energy only decays
    assert abs(last["energy"] - first["energy"]) <= 1e-10 * abs(first["energy"])
    assert -1.0 < last["delta_h"] <= 1e-10


def test_free_plate_conservation_over_a_full_run():
    case = init_testcase("beryllium_plate", output_times=[])
    sim = Simulation(case)
    frame = sim.run().diagnostics.to_frame()
    first, last = frame.iloc[0], frame.iloc[-1]
    assert (frame["mass"] == first["mass"]).all()
    scale = math.fsum((sim.masses.cell_mass * np.abs(case.state.v).sum(axis=1)).tolist())
    assert abs(last["momx"] - first["momx"]) <= 1e-11 * scale
    assert abs(last["momy"] - first["momy"]) <= 1e-11 * scale
    assert abs(last["energy"] - first["energy"]) <= 1e-11 * abs(first["energy"])


def test_contact_drop_lands_and_bounces():
    sim = Simulation(init_testcase("contact_drop"))
    result = sim.run()
    assert result.completed
    assert [e["event"] for e in result.events] == ["contact", "detachment"]
    contact = result.events[0]
    assert 0.0 < contact["time"] < result.events[1]["time"]
    assert sim.geometry.coords[:, 1].min() > 0.0


def test_contact_drop_lands_exactly_on_the_wall():
    sim = Simulation(init_testcase("contact_drop"))
    while not sim.tracker.events:
        assert sim.time < sim.t_final
        sim.step()
    bottom = sim.boundary.contact_nodes
    assert np.abs(sim.geometry.coords[bottom, 1]).max() <= 1e-12
