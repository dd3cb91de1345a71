"""
Tensor algebra for the left Cauchy-Green tensor.

All functions broadcast over leading axes: a single 3x3 tensor or a stack of
shape (..., 3, 3).
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

IDENTITY = np.eye(3)


@dataclass
class StrainState:
    """Left Cauchy-Green tensor with its volumetric/isochoric split."""
    B: np.ndarray
    J: np.ndarray       # sqrt(det B)
    Bbar: np.ndarray    # J^(-2/3) B
    I1bar: np.ndarray
    I2bar: np.ndarray

    @property
    def Bbar_inv(self) -> np.ndarray:
        return np.linalg.inv(self.Bbar)


def trace(A: np.ndarray) -> np.ndarray:
    return np.trace(A, axis1=-2, axis2=-1)


def transpose(A: np.ndarray) -> np.ndarray:
    return np.swapaxes(A, -1, -2)


def deviator(A: np.ndarray) -> np.ndarray:
    """A - tr(A)/3 Id."""
    return A - (trace(A) / 3.0)[..., None, None] * IDENTITY


def invariants(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Principal invariants of a 3x3 tensor.

    Returns:
        (I1, I2, I3) = (tr A, ½(tr²A - tr A²), det A)
    """
    A = np.asarray(A, dtype=float)
    I1 = trace(A)
    I2 = 0.5 * (I1 ** 2 - trace(A @ A))
    I3 = np.linalg.det(A)
    return I1, I2, I3


def cayley_hamilton_residual(A: np.ndarray) -> np.ndarray:
    """A³ - I1 A² + I2 A - I3 Id, zero for any 3x3 tensor."""
    I1, I2, I3 = invariants(A)
    A2 = A @ A
    return (A2 @ A - I1[..., None, None] * A2 + I2[..., None, None] * A
            - I3[..., None, None] * IDENTITY)


def strain_state(B: np.ndarray) -> StrainState:
    """
    Split B into J and Bbar.

    No validation: a B with non-positive determinant yields NaN entries,
    which the admissibility checks pick up.
    """
    B = np.asarray(B, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        J = np.sqrt(np.linalg.det(B))
        Bbar = J[..., None, None] ** (-2.0 / 3.0) * B
    I1bar, I2bar, _ = invariants(Bbar)
    return StrainState(B=B, J=J, Bbar=Bbar, I1bar=I1bar, I2bar=I2bar)


def symmetric_from_components(b11, b22, b33, b12) -> np.ndarray:
    """Plane-strain tensor from its four non-trivial components."""
    b11 = np.asarray(b11, dtype=float)
    out = np.zeros(b11.shape + (3, 3))
    out[..., 0, 0] = b11
    out[..., 1, 1] = b22
    out[..., 2, 2] = b33
    out[..., 0, 1] = b12
    out[..., 1, 0] = b12
    return out


def plane_components(B: np.ndarray) -> np.ndarray:
    """(B11, B22, B33, B12) of a plane-strain tensor."""
    return np.stack([B[..., 0, 0], B[..., 1, 1], B[..., 2, 2], B[..., 0, 1]], axis=-1)


def min_eigenvalue(A: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of symmetric tensors; NaN where A is not finite."""
    A = np.asarray(A, dtype=float)
    finite = np.isfinite(A).all(axis=(-1, -2))
    safe = np.where(finite[..., None, None], A, IDENTITY)
    lam = np.linalg.eigvalsh(safe)[..., 0]
    return np.where(finite, lam, np.nan)
