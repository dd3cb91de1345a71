"""
Isotropic hyperelastic material models.

The specific free energy splits into a volumetric part Psi_v(J) and a shear
part Psi_s(I1bar, I2bar) from the rank-one convex family

    Psi_s = mu/(4 rho0) [ -2a (I1bar - 3) + (1+a)/3 (I2bar^2 - 9) ],   a in [-1, 1/2]

(a = -1 is neo-Hookean). The Cauchy stress is T = -p Id + T0 with T0 deviatoric.
The volumetric closure is either the neo-Hookean energy
Psi_v = mu/(4 rho0)((J-1)^2 + ln^2 J) or a stiffened-gas pressure law driven by
the volumetric internal energy eps_v = eps - Psi_s.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from hyperlag.constitutive.tensors import IDENTITY, StrainState, deviator, strain_state
from hyperlag.errors import ConfigurationError, ConstitutiveError

logger = logging.getLogger(__name__)

SOUND_SPEED_FLOOR = 1e-14


class EquationOfState(Enum):
    """Volumetric closures"""
    NEO_HOOKEAN = "neo_hookean_volumetric"
    STIFFENED_GAS = "stiffened_gas"


@dataclass(frozen=True)
class MaterialModel:
    """Material constants; mu is derived from E and nu."""
    rho0: float
    E: float
    nu: float
    a: float = -1.0
    eos: EquationOfState = EquationOfState.NEO_HOOKEAN
    gamma: float = 1.4
    p_inf: float = 0.0
    mu: float = field(init=False)

    def __post_init__(self):
        if not self.rho0 > 0.0:
            raise ConfigurationError(f"rho0 must be positive, got {self.rho0}")
        if not self.E >= 0.0:
            raise ConfigurationError(f"E must be non-negative, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ConfigurationError(f"nu must lie in (-1, 0.5), got {self.nu}")
        if not -1.0 <= self.a <= 0.5:
            raise ConfigurationError(f"Shear parameter a must lie in [-1, 0.5], got {self.a}")
        if self.eos == EquationOfState.STIFFENED_GAS and not self.gamma > 1.0:
            raise ConfigurationError(f"Stiffened gas needs gamma > 1, got {self.gamma}")
        object.__setattr__(self, "mu", self.E / (2.0 * (1.0 + self.nu)))
        if self.eos == EquationOfState.STIFFENED_GAS:
            logger.warning(f"Stiffened gas (gamma={self.gamma}, p_inf={self.p_inf:.6e}): no volumetric potential, "
                           f"Psi_v is booked as eps_v = eps - Psi_s in the energy diagnostics")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rho0": self.rho0,
            "E": self.E,
            "nu": self.nu,
            "mu": self.mu,
            "a": self.a,
            "eos": self.eos.value,
            "gamma": self.gamma,
            "p_inf": self.p_inf,
        }


@dataclass
class ConstitutiveResponse:
    """Stress and wave speed of a batch of states."""
    pressure: np.ndarray
    stress: np.ndarray       # (..., 3, 3) Cauchy stress
    sound_speed: np.ndarray  # longitudinal estimate a
    J: np.ndarray


def _neo_hookean_pressure(J, model: MaterialModel):
    with np.errstate(invalid="ignore", divide="ignore"):
        return -0.5 * model.mu * (J - 1.0 + np.log(J) / J)


def _stiffened_gas_pressure(rho, eps_v, model: MaterialModel):
    return (model.gamma - 1.0) * rho * eps_v - model.gamma * model.p_inf


def pressure(J, model: MaterialModel, eps_v: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Volumetric pressure.

    Args:
        J: volume ratio
        model: material
        eps_v: volumetric specific internal energy, required by the stiffened gas

    Raises:
        ConstitutiveError: J <= 0, or stiffened gas without eps_v
    """
    J = np.asarray(J, dtype=float)
    if not (J > 0.0).all():
        raise ConstitutiveError(f"Pressure requested for non-positive volume ratio J={J.min()}")
    if model.eos == EquationOfState.NEO_HOOKEAN:
        return _neo_hookean_pressure(J, model)
    if eps_v is None:
        raise ConstitutiveError("Stiffened-gas pressure needs the volumetric internal energy")
    return _stiffened_gas_pressure(model.rho0 / J, np.asarray(eps_v, dtype=float), model)


def volumetric_energy_from_pressure(p, rho, model: MaterialModel):
    """Inverse of the stiffened-gas law: eps_v = (p + gamma p_inf) / ((gamma-1) rho)."""
    return (np.asarray(p, dtype=float) + model.gamma * model.p_inf) / ((model.gamma - 1.0) * rho)


def shear_energy(strain: StrainState, model: MaterialModel) -> np.ndarray:
    a = model.a
    return model.mu / (4.0 * model.rho0) * (
        -2.0 * a * (strain.I1bar - 3.0) + (1.0 + a) / 3.0 * (strain.I2bar ** 2 - 9.0)
    )


def free_energies(strain: StrainState, model: MaterialModel,
                  eps: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Specific free energies (Psi_v, Psi_s).

    For the stiffened gas no volumetric potential exists; Psi_v is reported as
    eps_v = eps - Psi_s, which requires the specific internal energy ``eps``.
    """
    psi_s = shear_energy(strain, model)
    if model.eos == EquationOfState.NEO_HOOKEAN:
        with np.errstate(invalid="ignore", divide="ignore"):
            lnJ = np.log(strain.J)
        psi_v = model.mu / (4.0 * model.rho0) * ((strain.J - 1.0) ** 2 + lnJ ** 2)
        return psi_v, psi_s
    if eps is None:
        raise ConstitutiveError("Stiffened-gas free energy needs the specific internal energy")
    return np.asarray(eps, dtype=float) - psi_s, psi_s


def deviatoric_stress(strain: StrainState, model: MaterialModel) -> np.ndarray:
    """
    T0 = 2 rho [dPsi/dI1bar dev(Bbar) - dPsi/dI2bar dev(Bbar^-1)].

    With rho/rho0 = 1/J this is
    T0 = -(mu a / J) dev(Bbar) - (mu (1+a) I2bar / (3J)) dev(Bbar^-1).
    """
    a = model.a
    J = strain.J[..., None, None]
    T0 = -(model.mu * a / J) * deviator(strain.Bbar)
    if a != -1.0:
        T0 = T0 - (model.mu * (1.0 + a) * strain.I2bar[..., None, None] / (3.0 * J)) * deviator(strain.Bbar_inv)
    return T0


def cauchy_stress(strain: StrainState, model: MaterialModel,
                  eps_v: Optional[np.ndarray] = None) -> np.ndarray:
    """T = -p Id + T0."""
    p = pressure(strain.J, model, eps_v)
    return -np.asarray(p)[..., None, None] * IDENTITY + deviatoric_stress(strain, model)


def sound_speed_squared(J, rho, model: MaterialModel, p=None) -> np.ndarray:
    """Volumetric c_v^2 = dp/drho, floored."""
    if model.eos == EquationOfState.NEO_HOOKEAN:
        with np.errstate(invalid="ignore", divide="ignore"):
            cv2 = model.mu / (2.0 * model.rho0) * (J ** 2 + 1.0 - np.log(J))
    else:
        cv2 = model.gamma * (p + model.p_inf) / rho
    return np.maximum(cv2, SOUND_SPEED_FLOOR)


def wave_speed(tau, J, model: MaterialModel, p=None) -> np.ndarray:
    """Longitudinal estimate a = sqrt(c_v^2 + 4 mu / (3 rho)), rho = 1/tau."""
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = 1.0 / np.asarray(tau, dtype=float)
        return np.sqrt(sound_speed_squared(J, rho, model, p) + 4.0 * model.mu / (3.0 * rho))


def initial_internal_energy(model: MaterialModel) -> float:
    """Specific internal energy of the unloaded state (B = Id, p = 0)."""
    if model.eos == EquationOfState.NEO_HOOKEAN:
        return 0.0
    return float(volumetric_energy_from_pressure(0.0, model.rho0, model))


def energy_scale(model: MaterialModel) -> float:
    """Specific-energy scale of the material, used as admissibility slack."""
    scale = model.mu / model.rho0
    if model.eos == EquationOfState.STIFFENED_GAS:
        scale += model.gamma * model.p_inf / ((model.gamma - 1.0) * model.rho0)
    return scale


def constitutive_response(tau, B, eps, model: MaterialModel) -> ConstitutiveResponse:
    """
    Pressure, Cauchy stress and wave speed for a batch of states.

    Never raises: states with non-finite data or det B <= 0 produce NaN, so that
    candidate solutions can be classified afterwards.
    """
    tau = np.asarray(tau, dtype=float)
    B = np.asarray(B, dtype=float)
    finite = np.isfinite(B).all(axis=(-1, -2))
    with np.errstate(invalid="ignore"):
        det = np.where(finite, np.linalg.det(np.where(finite[..., None, None], B, IDENTITY)), np.nan)
    valid = finite & (det > 0.0)
    safe_B = np.where(valid[..., None, None], B, IDENTITY)

    strain = strain_state(safe_B)
    if model.eos == EquationOfState.NEO_HOOKEAN:
        p = _neo_hookean_pressure(strain.J, model)
    else:
        eps_v = np.asarray(eps, dtype=float) - shear_energy(strain, model)
        with np.errstate(invalid="ignore", divide="ignore"):
            p = _stiffened_gas_pressure(1.0 / tau, eps_v, model)
    stress = -p[..., None, None] * IDENTITY + deviatoric_stress(strain, model)
    a = wave_speed(tau, strain.J, model, p)

    nan = np.nan
    p = np.where(valid, p, nan)
    stress = np.where(valid[..., None, None], stress, nan)
    a = np.where(valid & (tau > 0.0), a, nan)
    J = np.where(valid, strain.J, nan)
    return ConstitutiveResponse(pressure=p, stress=stress, sound_speed=a, J=J)
