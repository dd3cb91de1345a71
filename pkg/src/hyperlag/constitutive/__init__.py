"""Constitutive laws: invariants, free energies, stresses and wave speeds."""

from hyperlag.constitutive.material import (
    ConstitutiveResponse,
    EquationOfState,
    MaterialModel,
    cauchy_stress,
    constitutive_response,
    deviatoric_stress,
    energy_scale,
    free_energies,
    initial_internal_energy,
    pressure,
    wave_speed,
)
from hyperlag.constitutive.tensors import StrainState, invariants, strain_state

__all__ = [
    "ConstitutiveResponse",
    "EquationOfState",
    "MaterialModel",
    "StrainState",
    "cauchy_stress",
    "constitutive_response",
    "deviatoric_stress",
    "energy_scale",
    "free_energies",
    "initial_internal_energy",
    "invariants",
    "pressure",
    "strain_state",
    "wave_speed",
]
