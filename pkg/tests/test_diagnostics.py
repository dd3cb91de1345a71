import logging

import numpy as np
import pandas as pd
import pytest

from hyperlag.driver.diagnostics import (
    DIAG_COLUMNS,
    Diagnostics,
    EnergyTotals,
    energy_totals,
    numerical_dissipation,
)
from hyperlag.mesh.geometry import compute_geometry, subcell_masses
from hyperlag.mood.levels import SchemeLevelMap
from hyperlag.state import CellState


@pytest.fixture
def cell_mass(unit_square, unit_material):
    geom = compute_geometry(unit_square.topology, unit_square.coords)
    return subcell_masses(unit_square.topology, geom, unit_material.rho0).cell_mass


def totals(kinetic, free):
    return EnergyTotals(mass=1.0, momentum=np.zeros(2), energy=kinetic + free, kinetic=kinetic, free=free)


def test_numerical_dissipation():
    assert numerical_dissipation(totals(1.0, 0.0), totals(1.0, 0.0)) == 0.0
    assert numerical_dissipation(totals(0.5, 0.3), totals(1.0, 0.0)) == pytest.approx(-0.2)
    # zero initial energy: absolute drift
    assert numerical_dissipation(totals(0.0, 0.25), totals(0.0, 0.0)) == pytest.approx(0.25)


def test_energy_totals_of_a_translating_block(cell_mass, unit_material):
    state = CellState.uniform(32, 1.0, velocity=(2.0, -1.0))
    t = energy_totals(state, cell_mass, unit_material)
    assert t.mass == pytest.approx(1.0)
    np.testing.assert_allclose(t.momentum, [2.0, -1.0])
    assert t.kinetic == pytest.approx(2.5)
    assert t.free == pytest.approx(0.0, abs=1e-14)
    assert t.energy == pytest.approx(2.5)


def test_series_starts_at_zero_dissipation(tmp_path, cell_mass, unit_material):
    diagnostics = Diagnostics(cell_mass, unit_material)
    state = CellState.uniform(32, 1.0, velocity=(1.0, 0.0))
    first = diagnostics.record(0, 0.0, state, branch="initial")
    assert first["delta_h"] == 0.0
    assert first["levelP1"] == 32

    slower = CellState.uniform(32, 1.0, velocity=(0.9, 0.0))
    level_map = SchemeLevelMap.fresh(32)
    level_map.troubled[:4] = True
    diagnostics.record(1, 0.1, slower, dt=0.1, branch="acoustic", level_map=level_map)
    assert diagnostics.last["delta_h"] == pytest.approx(0.81 - 1.0)
    assert diagnostics.mean_troubled_fraction(32) == pytest.approx(4 / 32)

    path = diagnostics.write_csv(tmp_path / "diag.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == DIAG_COLUMNS
    assert frame["branch"].tolist() == ["initial", "acoustic"]
    assert frame["troubled"].tolist() == [0, 4]


def test_zero_initial_energy_is_reported(caplog, cell_mass, unit_material):
    diagnostics = Diagnostics(cell_mass, unit_material)
    with caplog.at_level(logging.WARNING, logger="hyperlag.driver.diagnostics"):
        row = diagnostics.record(0, 0.0, CellState.uniform(32, 1.0))
    assert row["delta_h"] == 0.0
    assert "absolute drift" in caplog.text


def test_barycenter_tracking(tmp_path, cell_mass, unit_square, unit_material):
    centroid = compute_geometry(unit_square.topology, unit_square.coords).centroid
    diagnostics = Diagnostics(cell_mass, unit_material, track_barycenter=True)
    diagnostics.record(0, 0.0, CellState.uniform(32, 1.0), centroid=centroid)
    assert diagnostics.barycenter[0]["x"] == pytest.approx(0.5)
    assert diagnostics.barycenter[0]["y"] == pytest.approx(0.5)
    frame = pd.read_csv(diagnostics.write_barycenter(tmp_path / "barycenter.csv"))
    assert list(frame.columns) == ["step", "time", "x", "y"]
