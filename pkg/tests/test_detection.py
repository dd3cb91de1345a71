import numpy as np
import pytest

from hyperlag.errors import ConfigurationError
from hyperlag.mesh.generate import structured_rectangle
from hyperlag.mesh.geometry import compute_geometry, subcell_masses
from hyperlag.mood.detection import (
    DetectionCriteria,
    TroubleReason,
    detect,
    involution_defect,
    rdmp_bounds,
)
from hyperlag.state import CellState


@pytest.fixture
def rest(unit_square, unit_material):
    topo = unit_square.topology
    geom = compute_geometry(topo, unit_square.coords)
    masses = subcell_masses(topo, geom, unit_material.rho0)
    state = CellState.uniform(topo.n_cells, unit_material.rho0)
    return topo, geom, masses.cell_mass, state


def run_detect(rest, model, candidate=None, geometry=None, criteria=None, **flags):
    topo, geom, cell_mass, state = rest
    return detect(candidate or state, geometry or geom, geom, topo, cell_mass, model,
                  criteria or DetectionCriteria(), **flags)


def test_criteria_validation():
    with pytest.raises(ConfigurationError):
        DetectionCriteria(delta0=0.0)
    with pytest.raises(ConfigurationError):
        DetectionCriteria(rdmp_variable="pressure")
    with pytest.raises(ConfigurationError):
        DetectionCriteria(reference_length=-1.0)
    assert DetectionCriteria().to_dict()["delta1"] == 1e-3


def test_unchanged_state_is_accepted(rest, unit_material):
    troubled, reasons = run_detect(rest, unit_material)
    assert not troubled.any()
    assert (reasons == TroubleReason.NONE).all()


def test_admissibility_failures(rest, unit_material):
    candidate = rest[3].copy()
    candidate.tau[3] = -1e-9
    candidate.e[4] = -1.0
    candidate.B[5] = np.diag([1.0, -1.0, 1.0])
    candidate.v[6, 0] = np.nan
    troubled, reasons = run_detect(rest, unit_material, candidate=candidate)
    assert np.flatnonzero(troubled).tolist() == [3, 4, 5, 6]
    assert reasons[3] == TroubleReason.PAD_TAU
    assert reasons[4] == TroubleReason.PAD_ENERGY
    assert reasons[5] == TroubleReason.PAD_STRAIN
    assert reasons[6] == TroubleReason.NOT_FINITE


def test_first_failed_criterion_is_recorded(rest, unit_material):
    candidate = rest[3].copy()
    candidate.tau[0] = -1.0
    candidate.e[0] = -1.0
    n = rest[0].n_cells
    predictor = np.zeros(n, dtype=bool)
    predictor[[0, 1]] = True
    cn = np.zeros(n, dtype=bool)
    cn[[1, 2]] = True
    _, reasons = run_detect(rest, unit_material, candidate=candidate, predictor_flags=predictor, cn_flags=cn)
    assert reasons[:3].tolist() == [TroubleReason.PAD_TAU, TroubleReason.PREDICTOR, TroubleReason.CN_FALLBACK]


def test_tangled_cells(rest, unit_material):
    topo, geom, _, _ = rest
    coords = geom.coords.copy()
    coords[6] = [5.0, 5.0]
    moved = compute_geometry(topo, coords)
    tangled = moved.volume <= 0.0
    assert tangled.any()
    _, reasons = run_detect(rest, unit_material, geometry=moved)
    assert (reasons[tangled] == TroubleReason.TANGLED).all()


def test_rdmp_bounds():
    topo = structured_rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).topology
    lo, hi = rdmp_bounds(np.full(topo.n_cells, 2.0), topo, 1e-4, 1e-3)
    np.testing.assert_allclose(lo, 2.0 - 1e-4)
    np.testing.assert_allclose(hi, 2.0 + 1e-4)

    values = np.arange(topo.n_cells, dtype=float)
    lo, hi = rdmp_bounds(values, topo, 1e-4, 0.5)
    assert np.all(lo < values) and np.all(values < hi)
    nb = topo.cell_neighbors[0]
    around = values[np.append(nb[nb >= 0], 0)]
    spread = around.max() - around.min()
    assert lo[0] == pytest.approx(around.min() - 0.5 * spread)


def test_compression_breaks_rdmp_then_involution(rest, unit_material):
    topo, geom, _, _ = rest
    squeezed = compute_geometry(topo, 0.5 * geom.coords)
    troubled, reasons = run_detect(rest, unit_material, geometry=squeezed)
    assert troubled.all()
    assert (reasons == TroubleReason.RDMP).all()

    _, reasons = run_detect(rest, unit_material, geometry=squeezed,
                            criteria=DetectionCriteria(rdmp_variable="none"))
    assert (reasons == TroubleReason.INVOLUTION).all()

    troubled, _ = run_detect(rest, unit_material, geometry=squeezed,
                             criteria=DetectionCriteria(rdmp_variable="none", check_involution=False))
    assert not troubled.any()


def test_involution_defect(rest, unit_material):
    _, geom, cell_mass, state = rest
    np.testing.assert_allclose(involution_defect(state, geom, cell_mass, unit_material.rho0), 0.0, atol=1e-14)
    squeezed = state.copy()
    squeezed.B = 0.25 * squeezed.B
    np.testing.assert_allclose(involution_defect(squeezed, geom, cell_mass, unit_material.rho0),
                               1.0 - 0.125, rtol=1e-12)


def test_involution_is_checked_on_the_absolute_defect(rest, unit_material):
    squeezed = rest[3].copy()
    squeezed.B = 0.25 * squeezed.B
    # the defect was already there at t^n; it is still flagged
    topo, geom, cell_mass, _ = rest
    troubled, reasons = detect(squeezed, geom, geom, topo, cell_mass, unit_material,
                               DetectionCriteria(rdmp_variable="none"))
    assert troubled.all()
    assert (reasons == TroubleReason.INVOLUTION).all()

    tolerance = DetectionCriteria(rdmp_variable="none", reference_length=1e-3)
    troubled, _ = detect(squeezed, geom, geom, topo, cell_mass, unit_material, tolerance)
    assert not troubled.any()
