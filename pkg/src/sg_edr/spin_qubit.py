"""Qubit algebra, universally valid error-disturbance bounds, and the CNOT probe model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import DomainError

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "IDENTITY",
    "BlochState",
    "QubitModelResult",
    "density_matrix",
    "hermitian_eigvals_2x2",
    "d_coefficient",
    "hat",
    "bo_residual",
    "tight_circle_residual",
    "cnot_model",
    "heisenberg_product",
    "ohedr_rhs",
]

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class BlochState:
    nx: float = 0.0
    ny: float = 0.0
    nz: float = 0.0

    def __post_init__(self):
        r2 = self.nx**2 + self.ny**2 + self.nz**2
        if not math.isfinite(r2) or r2 > 1.0 + 1e-12:
            raise DomainError(f"Bloch vector length^2 {r2!r} exceeds 1")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz], dtype=float)

    @property
    def radius(self) -> float:
        return min(1.0, math.sqrt(self.nx**2 + self.ny**2 + self.nz**2))

    def to_json(self) -> dict[str, float]:
        return {"nx": self.nx, "ny": self.ny, "nz": self.nz}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "BlochState":
        return cls(float(data.get("nx", 0.0)), float(data.get("ny", 0.0)), float(data.get("nz", 0.0)))


@dataclass(frozen=True)
class QubitModelResult:
    error: float
    disturbance: float
    x_mean_before: float = 0.0
    x_mean_after: float = 0.0


def density_matrix(b: BlochState) -> np.ndarray:
    return 0.5 * (IDENTITY + b.nx * SIGMA_X + b.ny * SIGMA_Y + b.nz * SIGMA_Z)


def hermitian_eigvals_2x2(h: np.ndarray) -> tuple[float, float]:
    """Closed-form eigenvalues (ascending) of a 2x2 Hermitian matrix."""
    a = h[0, 0].real
    d = h[1, 1].real
    off = abs(h[0, 1])
    mean = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), off)
    return mean - rad, mean + rad


def _sqrt_density(b: BlochState) -> np.ndarray:
    # rho = sum_{+-} (1 +- r)/2 P_+-, with P_+- = (1 +- n_hat.sigma)/2
    r = b.radius
    lp, lm = math.sqrt(0.5 * (1.0 + r)), math.sqrt(max(0.0, 0.5 * (1.0 - r)))
    if r == 0.0:
        return lp * IDENTITY
    n_sigma = (b.nx * SIGMA_X + b.ny * SIGMA_Y + b.nz * SIGMA_Z) / r
    return 0.5 * (lp + lm) * IDENTITY + 0.5 * (lp - lm) * n_sigma


def d_coefficient(b: BlochState) -> float:
    """``Tr |sqrt(rho) sigma_y sqrt(rho)|``, the commutator term for (sigma_z, sigma_x)."""
    s = _sqrt_density(b)
    x = s @ SIGMA_Y @ s
    x = 0.5 * (x + x.conj().T)
    lo, hi = hermitian_eigvals_2x2(x)
    return min(1.0, abs(lo) + abs(hi))


def hat(x: float) -> float:
    """``x sqrt(1 - x^2/4)``, equivalently ``sqrt(1 - ((x^2 - 2)/2)^2)``."""
    if not 0.0 <= x <= 2.0:
        raise DomainError(f"hat() needs 0 <= x <= 2, got {x!r}")
    product_form = x * math.sqrt(1.0 - 0.25 * x * x)
    circle_sq = 1.0 - (0.5 * (x * x - 2.0)) ** 2
    # compare squares: sqrt of the cancelling circle form is ill-conditioned near 0 and 2
    assert abs(product_form * product_form - circle_sq) <= 1e-12, (product_form, circle_sq)
    return product_form


def bo_residual(eps: float, eta: float, d: float) -> float:
    """Slack in the strengthened (BO) error-disturbance bound for dichotomic observables.

    Non-negative for every realisable (error, disturbance) pair.
    """
    if not 0.0 <= d <= 1.0:
        raise DomainError(f"D must lie in [0, 1], got {d!r}")
    he, hn = hat(eps), hat(eta)
    return he * he + hn * hn + 2.0 * he * hn * math.sqrt(1.0 - d * d) - d * d


def tight_circle_residual(eps2: float, eta2: float) -> float:
    return 4.0 - (eps2 - 2.0) ** 2 - (eta2 - 2.0) ** 2


def _cnot() -> np.ndarray:
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    return np.kron(p0, IDENTITY) + np.kron(p1, SIGMA_X)


def cnot_model(theta: float, b: BlochState) -> QubitModelResult:
    """Error on sigma_z and disturbance on sigma_x of the CNOT probe measurement.

    The probe starts in ``cos(theta)|0> + sin(theta)|1>`` and is read out in
    sigma_z after a CNOT controlled by the measured qubit. Both quantities are
    rms values of Heisenberg-picture differences in the 4-dimensional
    composite state.
    """
    u = _cnot()
    xi = np.array([math.cos(theta), math.sin(theta)], dtype=complex)
    state = np.kron(density_matrix(b), np.outer(xi, xi.conj()))

    meter = u.conj().T @ np.kron(IDENTITY, SIGMA_Z) @ u
    noise = meter - np.kron(SIGMA_Z, IDENTITY)
    x_after = u.conj().T @ np.kron(SIGMA_X, IDENTITY) @ u
    drift = x_after - np.kron(SIGMA_X, IDENTITY)

    eps2 = np.trace(noise @ noise @ state).real
    eta2 = np.trace(drift @ drift @ state).real
    before = np.trace(np.kron(SIGMA_X, IDENTITY) @ state).real
    after = np.trace(x_after @ state).real
    return QubitModelResult(math.sqrt(max(eps2, 0.0)), math.sqrt(max(eta2, 0.0)), float(before), float(after))


def heisenberg_product(eps: float, eta: float) -> float:
    if eps < 0.0 or eta < 0.0:
        raise DomainError("error and disturbance are non-negative")
    return eps * eps * eta * eta


def ohedr_rhs(eps2: float) -> float:
    """Bound on ``|eta^2 - 2|/2`` for improperly directed projective measurements."""
    if not 0.0 <= eps2 <= 4.0:
        raise DomainError(f"eps^2 must lie in [0, 4], got {eps2!r}")
    return 1.0 - (0.5 * (eps2 - 2.0)) ** 2
