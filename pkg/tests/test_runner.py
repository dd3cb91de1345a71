import math

import numpy as np
import pytest

from hyperlag.config import Settings, parse_config
from hyperlag.driver.runner import Simulation, l2_norm, run_config
from hyperlag.driver.testcases import init_testcase
from hyperlag.errors import SolverError


def test_zero_final_time_writes_the_initial_snapshot_only(tmp_path):
    result = Simulation(init_testcase("uniform_block", t_final=0.0), output_dir=tmp_path).run()
    assert result.completed and result.exit_status == 0
    assert result.steps == 0
    assert [p.name for p in result.snapshots] == ["uniform_block_0000.vtk"]
    assert result.files["diag"].exists()
    assert len(result.diagnostics.rows) == 1


def test_uniform_block_stays_uniform_over_100_steps():
    sim = Simulation(init_testcase("uniform_block", t_final=1e3), output_times=[], max_steps=100)
    result = sim.run()
    assert result.steps == 100
    assert 0.0 < sim.time < sim.t_final
    s = sim.state
    np.testing.assert_allclose(s.v, np.tile([1.0, 0.5], (s.n_cells, 1)), atol=1e-12)
    np.testing.assert_allclose(s.tau, 1.0, atol=1e-12)
    np.testing.assert_allclose(s.B, np.tile(np.eye(3), (s.n_cells, 1, 1)), atol=1e-12)
    assert all(row["troubled"] == 0 for row in result.diagnostics.rows)
    np.testing.assert_allclose(sim.geometry.coords, sim.case.mesh.coords + sim.time * np.array([1.0, 0.5]), atol=1e-12)


def test_free_plate_conserves_mass_momentum_and_energy():
    case = init_testcase("beryllium_plate", nx=12, ny=2, t_final=1e-6, output_times=[])
    sim = Simulation(case)
    result = sim.run()
    assert result.completed
    frame = result.diagnostics.to_frame()
    first, last = frame.iloc[0], frame.iloc[-1]
    assert last["mass"] == first["mass"]
    scale = math.fsum((sim.masses.cell_mass * np.abs(case.state.v).sum(axis=1)).tolist())
    assert abs(last["momx"] - first["momx"]) <= 1e-11 * scale
    assert abs(last["momy"] - first["momy"]) <= 1e-11 * scale
    assert abs(last["energy"] - first["energy"]) <= 1e-11 * abs(first["energy"])
    assert result.min_entropy >= -1e-14


def test_max_steps_stops_early():
    result = Simulation(init_testcase("uniform_block"), max_steps=1).run()
    assert not result.completed
    assert result.exit_status == 1
    assert result.steps == 1


def test_errors_vanish_at_the_initial_time():
    sim = Simulation(init_testcase("swinging_plate", nx=4, ny=4))
    errors = sim.errors()
    assert set(errors) == {"u", "B11", "T11"}
    assert errors["u"] == 0.0
    assert errors["B11"] == 0.0
    assert errors["T11"] <= 1e-6 * math.sqrt(sim.masses.cell_mass.sum())
    assert sim.characteristic_length() > 0.0


def test_errors_are_mass_weighted():
    sim = Simulation(init_testcase("swinging_plate", nx=4, ny=4))
    sim.state.v[:, 0] += 1e-3
    total_mass = sim.masses.cell_mass.sum()
    assert total_mass == pytest.approx(1100.0 * 4.0)
    assert sim.errors()["u"] == pytest.approx(1e-3 * math.sqrt(total_mass))


def test_l2_norm():
    assert l2_norm(np.array([1.0, 2.0]), np.array([0.5, 0.25])) == pytest.approx(math.sqrt(1.5))


def test_run_config(tmp_path):
    config = parse_config({
        "version": 1,
        "testcase": {"name": "uniform_block"},
        "mesh": {"generate": {"nx": 2, "ny": 2}},
        "time": {"t_final": 0.05},
        "output": {"directory": str(tmp_path), "vtk": False},
    })
    result = run_config(config, Settings())
    assert result.completed
    assert result.snapshots == []
    assert (tmp_path / "diag.csv").exists()
    assert result.to_dict()["files"]["diag"] == str(tmp_path / "diag.csv")


def test_accepted_states_are_checked_for_admissibility():
    sim = Simulation(init_testcase("uniform_block"))
    sim.check_admissible()
    sim.state.tau[2] = -1.0
    with pytest.raises(SolverError, match="cell 2"):
        sim.check_admissible()
    sim.state.tau[2] = 1.0
    sim.state.B[5] = np.diag([1.0, -1.0, 1.0])
    with pytest.raises(SolverError, match="cell 5"):
        sim.check_admissible()
