import logging

import numpy as np
import pytest

from hyperlag.constitutive.material import (
    EquationOfState,
    MaterialModel,
    cauchy_stress,
    constitutive_response,
    energy_scale,
    free_energies,
    initial_internal_energy,
    pressure,
    shear_energy,
    volumetric_energy_from_pressure,
)
from hyperlag.constitutive.tensors import (
    StrainState,
    cayley_hamilton_residual,
    deviator,
    invariants,
    min_eigenvalue,
    plane_components,
    strain_state,
    symmetric_from_components,
    trace,
)
from hyperlag.errors import ConfigurationError, ConstitutiveError


def random_plane_strain(rng, n, spread=0.25):
    F = np.tile(np.eye(3), (n, 1, 1))
    F[:, :2, :2] += spread * rng.uniform(-1.0, 1.0, (n, 2, 2))
    F[:, 2, 2] += spread * rng.uniform(-1.0, 1.0, n)
    return F @ np.swapaxes(F, -1, -2)


def total_free_energy(B, model):
    psi_v, psi_s = free_energies(strain_state(B), model)
    return psi_v + psi_s


def finite_difference_stress(B, model, h=1e-6):
    """T = 2 rho (dPsi/dB) B with central differences on each entry of B."""
    grad = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            E = np.zeros((3, 3))
            E[i, j] = h
            grad[i, j] = (total_free_energy(B + E, model) - total_free_energy(B - E, model)) / (2.0 * h)
    J = np.sqrt(np.linalg.det(B))
    return 2.0 * (model.rho0 / J) * grad @ B


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def test_material_derives_shear_modulus(rubber):
    assert rubber.mu == pytest.approx(1.7e7 / 2.9)
    assert rubber.to_dict()["eos"] == "neo_hookean_volumetric"


@pytest.mark.parametrize("kwargs", [
    {"rho0": 0.0, "E": 1.0, "nu": 0.3},
    {"rho0": 1.0, "E": -1.0, "nu": 0.3},
    {"rho0": 1.0, "E": 1.0, "nu": 0.5},
    {"rho0": 1.0, "E": 1.0, "nu": 0.3, "a": 0.7},
    {"rho0": 1.0, "E": 1.0, "nu": 0.3, "eos": EquationOfState.STIFFENED_GAS, "gamma": 1.0},
])
def test_material_validation(kwargs):
    with pytest.raises(ConfigurationError):
        MaterialModel(**kwargs)


def test_tensor_helpers(rng):
    B = random_plane_strain(rng, 10)
    I1, I2, I3 = invariants(B)
    np.testing.assert_allclose(I1, trace(B))
    np.testing.assert_allclose(I3, np.linalg.det(B))
    np.testing.assert_allclose(cayley_hamilton_residual(B), 0.0, atol=1e-12)
    np.testing.assert_allclose(trace(deviator(B)), 0.0, atol=1e-14)
    comps = plane_components(B)
    np.testing.assert_array_equal(symmetric_from_components(*comps.T), B)
    np.testing.assert_allclose(min_eigenvalue(B), np.linalg.eigvalsh(B)[:, 0])
    assert np.isnan(min_eigenvalue(np.full((3, 3), np.nan)))


def test_strain_state_is_isochoric(rng):
    strain = strain_state(random_plane_strain(rng, 20))
    np.testing.assert_allclose(np.linalg.det(strain.Bbar), 1.0, rtol=1e-12)


def test_unloaded_state_is_stress_free(rubber):
    response = constitutive_response(1.0 / rubber.rho0, np.eye(3), 0.0, rubber)
    np.testing.assert_allclose(response.stress, 0.0, atol=1e-9)
    assert response.pressure == pytest.approx(0.0, abs=1e-9)
    # longitudinal wave speed at rest: sqrt(mu/rho0 + 4 mu/(3 rho0))
    expected = np.sqrt(rubber.mu / rubber.rho0 * (1.0 + 4.0 / 3.0))
    assert response.sound_speed == pytest.approx(expected)


@pytest.mark.parametrize("a", [-1.0, 0.0])
def test_stress_matches_free_energy_derivative(rng, a):
    model = MaterialModel(rho0=1.0, E=2.6, nu=0.3, a=a)
    for B in random_plane_strain(rng, 100):
        expected = finite_difference_stress(B, model)
        actual = cauchy_stress(strain_state(B), model)
        scale = max(np.abs(expected).max(), 1.0)
        np.testing.assert_allclose(actual, expected, rtol=0.0, atol=1e-5 * scale)


@pytest.mark.parametrize("a", [-1.0, 0.0, 0.5])
def test_stress_is_objective_and_commutes_with_b(rng, a):
    model = MaterialModel(rho0=1.0, E=2.6, nu=0.3, a=a)
    B = random_plane_strain(rng, 50)
    T = cauchy_stress(strain_state(B), model)
    np.testing.assert_allclose(T @ B, B @ T, atol=1e-10)
    for theta in (0.3, 1.1, -2.0):
        R = rotation(theta)
        rotated = cauchy_stress(strain_state(R @ B @ R.T), model)
        np.testing.assert_allclose(rotated, R @ T @ R.T, atol=1e-10)


def test_response_flags_inadmissible_states(rubber):
    B = np.stack([np.eye(3), -np.eye(3), np.full((3, 3), np.nan)])
    response = constitutive_response(np.full(3, 1.0 / rubber.rho0), B, np.zeros(3), rubber)
    assert np.isfinite(response.stress[0]).all()
    assert np.isnan(response.stress[1]).all()
    assert np.isnan(response.pressure[2])
    assert np.isnan(response.sound_speed[1])


def test_pressure_rejects_non_positive_volume_ratio(rubber):
    with pytest.raises(ConstitutiveError):
        pressure(np.array([1.0, 0.0]), rubber)


def test_stiffened_gas_closure():
    model = MaterialModel(rho0=2.0, E=1.0, nu=0.25, eos=EquationOfState.STIFFENED_GAS, gamma=3.0, p_inf=5.0)
    eps0 = initial_internal_energy(model)
    assert eps0 == pytest.approx(volumetric_energy_from_pressure(0.0, 2.0, model))
    response = constitutive_response(0.5, np.eye(3), eps0, model)
    assert response.pressure == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ConstitutiveError):
        pressure(1.0, model)
    assert energy_scale(model) > model.mu / model.rho0


def test_reference_values():
    I1, I2, I3 = invariants(np.diag([2.0, 1.0, 1.0]))
    assert (float(I1), float(I2), float(I3)) == pytest.approx((4.0, 5.0, 2.0))

    assert float(pressure(2.0, MaterialModel(rho0=1.0, E=5.2, nu=0.3))) == pytest.approx(-1.3466, abs=1e-4)

    model = MaterialModel(rho0=1.0, E=10.4, nu=0.3, a=0.0)
    strain = StrainState(B=np.eye(3), J=np.array(1.0), Bbar=np.eye(3), I1bar=np.array(3.0), I2bar=np.array(4.0))
    assert float(shear_energy(strain, model)) == pytest.approx(7.0 / 3.0)
    reference = strain_state(np.eye(3))
    assert float(shear_energy(reference, MaterialModel(rho0=1.0, E=2.6, nu=0.3, a=-1.0))) == pytest.approx(0.0, abs=1e-14)


def test_stiffened_gas_energy_bookkeeping_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="hyperlag.constitutive.material"):
        MaterialModel(rho0=1.0, E=1.0, nu=0.3)
        assert caplog.text == ""
        MaterialModel(rho0=2.0, E=1.0, nu=0.25, eos=EquationOfState.STIFFENED_GAS, gamma=2.2, p_inf=1e6)
    assert "Psi_v is booked as eps_v" in caplog.text
