"""Pure Gaussian orbital states ``psi(z) = A exp(-k [z - c]^2)``.

A state is fixed by the complex width parameter ``k`` (``Re k > 0``) and the
position/momentum means; the centre is ``c = <Z> + i <P> / (2 hbar k)``.
All second moments follow from ``k`` alone.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import DomainError

__all__ = [
    "GaussianState",
    "CovarianceMatrix",
    "StateClass",
    "moments",
    "schrodinger_residual",
    "kennard_residual",
    "classify",
    "v_functional",
    "evolved_variance",
    "contraction_time",
    "free_density",
    "wavefunction",
    "squeezed_from_bogoliubov",
    "bogoliubov_moments",
]

REAL_K_TOL = 1e-12


@dataclass(frozen=True)
class GaussianState:
    k: complex
    mean_z: float = 0.0
    mean_p: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        k = complex(self.k)
        object.__setattr__(self, "k", k)
        if not (cmath.isfinite(k) and k.real > 0.0):
            raise DomainError(f"Gaussian width parameter needs Re(k) > 0, got {k!r}")
        if not self.hbar > 0.0:
            raise DomainError(f"hbar must be positive, got {self.hbar!r}")
        if not (math.isfinite(self.mean_z) and math.isfinite(self.mean_p)):
            raise DomainError("means must be finite")

    @property
    def zero_mean(self) -> bool:
        return self.mean_z == 0.0 and self.mean_p == 0.0

    @property
    def centre(self) -> complex:
        return self.mean_z + 1j * self.mean_p / (2.0 * self.hbar * self.k)

    def to_json(self) -> dict[str, float]:
        return {
            "k_re": self.k.real,
            "k_im": self.k.imag,
            "mean_z": self.mean_z,
            "mean_p": self.mean_p,
            "hbar": self.hbar,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "GaussianState":
        return cls(
            k=complex(float(data["k_re"]), float(data.get("k_im", 0.0))),
            mean_z=float(data.get("mean_z", 0.0)),
            mean_p=float(data.get("mean_p", 0.0)),
            hbar=float(data.get("hbar", 1.0)),
        )


@dataclass(frozen=True)
class CovarianceMatrix:
    """Second central moments; ``cor_zp`` is the symmetrised ``<{dZ, dP}>``."""

    var_z: float
    var_p: float
    cor_zp: float

    def __post_init__(self):
        if not (self.var_z > 0.0 and self.var_p > 0.0):
            raise DomainError("variances must be positive")

    def as_array(self) -> np.ndarray:
        half = 0.5 * self.cor_zp
        return np.array([[self.var_z, half], [half, self.var_p]])


class StateClass(enum.Enum):
    SQUEEZED = "Squeezed"
    CONTRACTIVE = "Contractive"
    MINIMUM_UNCERTAINTY = "MinimumUncertainty"
    COHERENT_RELATIVE_TO_SCALE = "CoherentRelativeToScale"


def moments(state: GaussianState) -> CovarianceMatrix:
    k, hbar = state.k, state.hbar
    return CovarianceMatrix(
        var_z=1.0 / (4.0 * k.real),
        var_p=hbar * hbar * abs(k) ** 2 / k.real,
        cor_zp=-hbar * k.imag / k.real + 0.0,  # no signed zero
    )


def schrodinger_residual(cm: CovarianceMatrix, hbar: float) -> float:
    return cm.var_z * cm.var_p - 0.25 * cm.cor_zp**2 - 0.25 * hbar * hbar


def kennard_residual(cm: CovarianceMatrix, hbar: float) -> float:
    return cm.var_z * cm.var_p - 0.25 * hbar * hbar


def _is_real(k: complex) -> bool:
    return abs(k.imag) < REAL_K_TOL * abs(k)


def classify(state: GaussianState, reference_k: float | None = None) -> StateClass:
    """Table-style classification by the width parameter.

    Without ``reference_k`` the coherent class is never returned.
    """
    k = state.k
    if _is_real(k):
        if reference_k is not None and abs(k.real - reference_k) <= REAL_K_TOL * abs(k):
            return StateClass.COHERENT_RELATIVE_TO_SCALE
        return StateClass.MINIMUM_UNCERTAINTY
    if k.imag > 0.0:
        return StateClass.CONTRACTIVE
    return StateClass.SQUEEZED


def _require_zero_mean(state: GaussianState, what: str) -> None:
    if not state.zero_mean:
        raise DomainError(
            f"{what} is defined on the zero-mean Gaussian family only "
            f"(got mean_z={state.mean_z}, mean_p={state.mean_p})"
        )


def evolved_variance(state: GaussianState, t: float, m: float) -> float:
    """Position variance after free flight for time ``t``."""
    if not m > 0.0:
        raise DomainError("mass must be positive")
    cm = moments(state)
    s = t / m
    return cm.var_z + s * cm.cor_zp + s * s * cm.var_p


def v_functional(state: GaussianState, t: float, m: float) -> float:
    """``<(Z + t P / m)^2>`` on the zero-mean family."""
    _require_zero_mean(state, "V(psi, t)")
    return evolved_variance(state, t, m)


def contraction_time(state: GaussianState, m: float) -> float | None:
    """Time at which the free position variance stops shrinking, or None."""
    if not m > 0.0:
        raise DomainError("mass must be positive")
    cm = moments(state)
    if cm.cor_zp >= 0.0:
        return None
    # Var P rather than <P^2>: they coincide for zero-mean states and the
    # central form is the one that locates the minimum in general.
    return -m * cm.cor_zp / (2.0 * cm.var_p)


def free_density(state: GaussianState, t: float, m: float, z):
    """Position density after free flight for time ``t`` (zero-mean family)."""
    v = v_functional(state, t, m)
    z = np.asarray(z, dtype=float)
    out = np.exp(-(z * z) / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)
    return float(out) if out.ndim == 0 else out


def wavefunction(state: GaussianState, z) -> np.ndarray:
    """Normalised amplitude on the points ``z`` (global phase fixed at the mean)."""
    z = np.asarray(z, dtype=float)
    k, c = state.k, state.centre
    expo = -k * (z - c) ** 2
    expo_at_mean = -k * (state.mean_z - c) ** 2
    norm = (2.0 * k.real / math.pi) ** 0.25
    return norm * np.exp(expo - expo_at_mean.real)


def _check_bogoliubov(mu: complex, nu: complex) -> None:
    if abs(abs(mu) ** 2 - abs(nu) ** 2 - 1.0) > 1e-10:
        raise DomainError("Bogoliubov coefficients must satisfy |mu|^2 - |nu|^2 = 1")
    if mu == nu:
        raise DomainError("mu == nu gives no normalisable eigenstate")


def squeezed_from_bogoliubov(
    mu: complex,
    nu: complex,
    eigen: complex,
    m: float,
    omega: float,
    hbar: float = 1.0,
) -> GaussianState:
    """Eigenstate of ``mu a + nu a^dagger`` with eigenvalue ``eigen``.

    The means come from ``<a> = conj(mu) eigen - nu conj(eigen)``, the unique
    solution of ``mu <a> + nu conj(<a>) = eigen``.
    """
    mu, nu, eigen = complex(mu), complex(nu), complex(eigen)
    _check_bogoliubov(mu, nu)
    if not (m > 0.0 and omega > 0.0 and hbar > 0.0):
        raise DomainError("m, omega and hbar must be positive")
    k = (m * omega / (2.0 * hbar)) * (mu + nu) / (mu - nu)
    alpha = mu.conjugate() * eigen - nu * eigen.conjugate()
    return GaussianState(
        k=k,
        mean_z=math.sqrt(2.0 * hbar / (m * omega)) * alpha.real,
        mean_p=math.sqrt(2.0 * hbar * m * omega) * alpha.imag,
        hbar=hbar,
    )


def bogoliubov_moments(
    mu: complex, nu: complex, m: float, omega: float, hbar: float = 1.0
) -> CovarianceMatrix:
    """Second moments written directly in the Bogoliubov coefficients."""
    mu, nu = complex(mu), complex(nu)
    _check_bogoliubov(mu, nu)
    return CovarianceMatrix(
        var_z=hbar / (2.0 * m * omega) * abs(mu - nu) ** 2,
        var_p=hbar * m * omega / 2.0 * abs(mu + nu) ** 2,
        cor_zp=-2.0 * hbar * (mu.conjugate() * nu).imag,
    )
