"""Piecewise-constant conductivity fields for a two-subdomain rectangle.

Each subdomain carries a symmetric positive-definite 2x2 hydraulic
conductivity K and its inverse, the resistivity.  Two scalar scalings are
shared across the domain: `kinf`, the largest infinity-norm of the two
conductivities (maximum absolute row sum), and `lam = 1/kinf`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SYM_TOL = 1e-12


def _check_spd(K: np.ndarray, label: str) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.shape != (2, 2):
        raise ValueError(f"{label} must be 2x2, got shape {K.shape}")
    scale = max(np.abs(K).max(), 1.0)
    if abs(K[0, 1] - K[1, 0]) > _SYM_TOL * scale:
        raise ValueError(f"{label} is not symmetric: {K.tolist()}")
    eigs = np.linalg.eigvalsh(K)
    if eigs.min() <= 0.0:
        raise ValueError(f"{label} is not positive definite (eigenvalues {eigs})")
    return K


@dataclass(frozen=True)
class MaterialField:
    """Conductivity and resistivity tensors per subdomain plus the global
    scalars used by the stabilized forms."""

    K1: np.ndarray
    K2: np.ndarray
    Lam1: np.ndarray
    Lam2: np.ndarray
    kinf: float
    lam: float
    gamma: float | None = None

    def tensors_at(self, subdomain: int):
        """(conductivity, resistivity) for subdomain tag 1 or 2."""
        if subdomain == 1:
            return self.K1, self.Lam1
        if subdomain == 2:
            return self.K2, self.Lam2
        raise ValueError(f"subdomain tag must be 1 or 2, got {subdomain}")


def tensors_at(field: MaterialField, subdomain: int):
    return field.tensors_at(subdomain)


def material_from_tensors(K1, K2, gamma: float | None = None) -> MaterialField:
    """Build a field from explicit SPD conductivities; rejects asymmetric or
    non-positive-definite input."""
    K1 = _check_spd(K1, "K1")
    K2 = _check_spd(K2, "K2")
    Lam1 = np.linalg.inv(K1)
    Lam2 = np.linalg.inv(K2)
    kinf = float(max(np.abs(K1).sum(axis=1).max(), np.abs(K2).sum(axis=1).max()))
    for arr in (K1, K2, Lam1, Lam2):
        arr.setflags(write=False)
    return MaterialField(
        K1=K1, K2=K2, Lam1=Lam1, Lam2=Lam2,
        kinf=kinf, lam=1.0 / kinf, gamma=gamma,
    )


def crumpton_material(gamma: float = 1.0) -> MaterialField:
    """Identity conductivity left of the interface, gamma * [[2,1],[1,2]]
    to the right."""
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    K1 = np.eye(2)
    K2 = gamma * np.array([[2.0, 1.0], [1.0, 2.0]])
    return material_from_tensors(K1, K2, gamma=gamma)


def identity_material() -> MaterialField:
    """Homogeneous unit conductivity on both subdomains."""
    return material_from_tensors(np.eye(2), np.eye(2))
