import numpy as np
import pytest

from hyperlag.errors import ConfigurationError, SolverError
from hyperlag.mesh.geometry import compute_geometry, subcell_masses
from hyperlag.mood import loop
from hyperlag.mood.detection import TroubleReason
from hyperlag.mood.levels import Cascade, SchemeLevel, SchemeLevelMap, decrement, next_level_table
from hyperlag.mood.loop import MoodSolver, mood_step
from hyperlag.solver.boundary import BoundaryConditions
from hyperlag.solver.scheme import SolverContext
from hyperlag.state import CellState


@pytest.fixture
def at_rest(unit_square, unit_material):
    topo = unit_square.topology
    geom = compute_geometry(topo, unit_square.coords)
    ctx = SolverContext(
        topology=topo,
        masses=subcell_masses(topo, geom, unit_material.rho0),
        model=unit_material,
        boundary=BoundaryConditions(topo, {}),
    )
    return ctx, CellState.uniform(topo.n_cells, unit_material.rho0), geom


def scripted_detector(monkeypatch, script):
    """Replace the detector by a sequence of (troubled, reason) answers; the last one repeats."""
    calls = []

    def fake_detect(candidate_state, *args, **kwargs):
        n = candidate_state.n_cells
        troubled, reason = script[min(len(calls), len(script) - 1)]
        calls.append(n)
        mask = np.full(n, troubled)
        return mask, np.where(mask, reason, TroubleReason.NONE).astype(np.int8)

    monkeypatch.setattr(loop, "detect", fake_detect)
    return calls


def test_level_tables():
    three = next_level_table(Cascade.THREE_LEVEL)
    assert three[SchemeLevel.P1] == SchemeLevel.P1_BJ
    assert three[SchemeLevel.P1_BJ] == SchemeLevel.P0
    assert three[SchemeLevel.P0] == SchemeLevel.P0
    assert next_level_table(Cascade.TWO_LEVEL)[SchemeLevel.P1] == SchemeLevel.P0
    assert Cascade.parse("P1-P0") is Cascade.TWO_LEVEL
    with pytest.raises(ConfigurationError):
        Cascade.parse("P2-P1")


def test_decrement_drops_one_rung_and_collects_neighbours(unit_square):
    topo = unit_square.topology
    level_map = SchemeLevelMap.fresh(topo.n_cells)
    troubled = np.zeros(topo.n_cells, dtype=bool)
    troubled[5] = True
    recompute = decrement(level_map, troubled, topo)
    assert level_map.levels[5] == SchemeLevel.P1_BJ
    assert (np.delete(level_map.levels, 5) == SchemeLevel.P1).all()
    nb = topo.cell_neighbors[5]
    assert recompute.tolist() == sorted({5, *nb[nb >= 0].tolist()})

    decrement(level_map, troubled, topo)
    decrement(level_map, troubled, topo)
    assert level_map.levels[5] == SchemeLevel.P0
    assert level_map.troubled_count == 1
    assert level_map.history == [1, 1, 1]
    assert decrement(level_map, np.zeros(topo.n_cells, dtype=bool), topo).size == 0


def test_two_level_cascade_goes_straight_to_parachute(unit_square):
    topo = unit_square.topology
    level_map = SchemeLevelMap.fresh(topo.n_cells, Cascade.TWO_LEVEL)
    decrement(level_map, np.ones(topo.n_cells, dtype=bool), topo)
    assert level_map.counts() == {"P0": topo.n_cells, "P1BJ": 0, "P1": 0}
    assert level_map.troubled_fraction == 1.0


def test_smooth_step_is_accepted_in_one_pass(at_rest):
    ctx, state, geom = at_rest
    candidate, level_map = mood_step(ctx, state, geom, 0.0, 1e-3)
    assert level_map.iterations == 0
    assert level_map.troubled_count == 0
    assert level_map.recomputed == 0
    assert (level_map.levels == SchemeLevel.P1).all()
    np.testing.assert_allclose(candidate.node_velocity, 0.0, atol=1e-14)
    np.testing.assert_allclose(candidate.state.tau, state.tau, rtol=1e-14)
    assert candidate.time == pytest.approx(1e-3)


def test_cells_troubled_twice_end_on_the_parachute(at_rest, monkeypatch):
    ctx, state, geom = at_rest
    calls = scripted_detector(monkeypatch, [(True, TroubleReason.RDMP), (True, TroubleReason.RDMP), (False, 0)])
    _, level_map = MoodSolver(ctx).step(state, geom, 0.0, 1e-3)
    assert len(calls) == 3
    assert level_map.iterations == 2
    assert (level_map.levels == SchemeLevel.P0).all()
    assert (level_map.reasons == TroubleReason.RDMP).all()
    assert level_map.history == [state.n_cells, state.n_cells]
    assert level_map.recomputed == 2 * state.n_cells


def test_non_fatal_failures_are_accepted_at_the_parachute(at_rest, monkeypatch):
    ctx, state, geom = at_rest
    calls = scripted_detector(monkeypatch, [(True, TroubleReason.INVOLUTION)])
    _, level_map = MoodSolver(ctx, cascade=Cascade.TWO_LEVEL).step(state, geom, 0.0, 1e-3)
    assert len(calls) == 2
    assert (level_map.levels == SchemeLevel.P0).all()


def test_non_finite_parachute_is_fatal(at_rest, monkeypatch):
    ctx, state, geom = at_rest
    scripted_detector(monkeypatch, [(True, TroubleReason.NOT_FINITE)])
    with pytest.raises(SolverError, match="parachute"):
        MoodSolver(ctx).step(state, geom, 0.0, 1e-3)


@pytest.mark.parametrize("reason", [TroubleReason.PAD_TAU, TroubleReason.PAD_ENERGY, TroubleReason.PAD_STRAIN])
def test_inadmissible_parachute_is_fatal(at_rest, monkeypatch, reason):
    ctx, state, geom = at_rest
    scripted_detector(monkeypatch, [(True, reason)])
    with pytest.raises(SolverError, match=reason.name):
        MoodSolver(ctx, cascade=Cascade.TWO_LEVEL).step(state, geom, 0.0, 1e-3)
