"""Closed-form error and disturbance of Stern-Gerlach measurements.

Sign convention: the deflection ``g0 = (mu B1 dt / m)(tau + dt/2)`` keeps the
sign of ``mu B1``. The spin-up branch lands at ``-g0`` and the meter reads
``+1`` below the origin, so ``W = g0 / sqrt(2 V)`` and ``eps^2 = 2 erfc(W)``:
``mu B1 > 0`` puts the error on the ``[0, 2]`` branch, ``mu B1 < 0`` on
``[2, 4]``. Every supremum formula uses ``|mu B1|``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping, NamedTuple

from .errors import DomainError
from .gaussian_states import GaussianState, moments, v_functional
from .numerics import Interval, erfc_inv

__all__ = [
    "ApparatusParams",
    "ScreenOptimum",
    "EDPoint",
    "EDAtV",
    "g0",
    "w_value",
    "error_gaussian",
    "disturbance_gaussian",
    "w_function",
    "tau_star",
    "sup_w_over_states",
    "ed_at_v",
    "region_bound",
    "in_sg_region",
    "REGION_TOL",
]

REGION_TOL = 1e-12


@dataclass(frozen=True)
class ApparatusParams:
    """Magnet and flight parameters; ``dt`` is the transit time, ``tau`` the free flight."""

    mu: float = 1.0
    m: float = 1.0
    b0: float = 0.0
    b1: float = 1.0
    dt: float = 1.0
    tau: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mu", "m", "b0", "b1", "dt", "tau", "hbar"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.m > 0.0:
            raise DomainError("mass must be positive")
        if not self.hbar > 0.0:
            raise DomainError("hbar must be positive")
        if self.dt < 0.0 or self.tau < 0.0:
            raise DomainError("dt and tau must be non-negative")

    @property
    def kick(self) -> float:
        """Signed momentum transfer ``mu B1 dt`` (spin-down direction)."""
        return self.mu * self.b1 * self.dt

    @property
    def total_time(self) -> float:
        return self.dt + self.tau

    def replace(self, **changes) -> "ApparatusParams":
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ApparatusParams":
        """Accept either ``dt``/``tau`` or the lengths ``l2``/``l3`` with speed ``vy``."""
        fields = {k: float(data[k]) for k in ("mu", "m", "b0", "b1", "hbar") if k in data}
        has_times = "dt" in data or "tau" in data
        has_lengths = any(k in data for k in ("l2", "l3", "vy"))
        if has_times and has_lengths:
            raise KeyError("give either dt/tau or l2/l3/vy, not both")
        if has_lengths:
            vy = float(data["vy"])
            if not vy > 0.0:
                raise DomainError("vy must be positive")
            fields["dt"] = float(data["l2"]) / vy
            fields["tau"] = float(data["l3"]) / vy
        else:
            for k in ("dt", "tau"):
                if k in data:
                    fields[k] = float(data[k])
        return cls(**fields)


@dataclass(frozen=True)
class ScreenOptimum:
    attained: bool
    tau0: float | None
    w_value: float
    condition_lhs: float


@dataclass(frozen=True)
class EDPoint:
    eps2: float
    eta2: float
    source: str = "closed_form"

    def __post_init__(self):
        tol = 1e-12
        if not (-tol <= self.eps2 <= 4.0 + tol and -tol <= self.eta2 <= 4.0 + tol):
            raise DomainError(f"({self.eps2}, {self.eta2}) outside [0,4]^2")
        if self.source not in ("closed_form", "oracle"):
            raise DomainError(f"unknown source {self.source!r}")


class EDAtV(NamedTuple):
    inf_eps2: float
    eta2: float
    eta2_range: Interval


def g0(p: ApparatusParams) -> float:
    return p.mu * p.b1 * p.dt / p.m * (p.tau + 0.5 * p.dt)


def w_value(p: ApparatusParams, state: GaussianState) -> float:
    """Signed separation-to-width ratio at the screen."""
    return g0(p) / math.sqrt(2.0 * v_functional(state, p.total_time, p.m))


def error_gaussian(p: ApparatusParams, state: GaussianState) -> float:
    """rms error on sigma_z; independent of the spin state for the zero-mean family."""
    return math.sqrt(2.0 * math.erfc(w_value(p, state)))


def disturbance_gaussian(p: ApparatusParams, state: GaussianState) -> float:
    """rms disturbance on sigma_x; depends on the state only through ``V(dt/2)``."""
    v_mid = v_functional(state, 0.5 * p.dt, p.m)
    damping = math.exp(-2.0 * (p.mu * p.b1 * p.dt / p.hbar) ** 2 * v_mid)
    eta2 = 2.0 - 2.0 * damping * math.cos(2.0 * p.mu * p.dt * p.b0 / p.hbar)
    return math.sqrt(max(eta2, 0.0))


def w_function(p: ApparatusParams, state: GaussianState, tau: float) -> float:
    """``W`` as a function of the free-flight time (signed like ``mu B1``)."""
    if tau < 0.0:
        raise DomainError("tau must be non-negative")
    cm = moments(state)
    if not state.zero_mean:
        raise DomainError("W(tau) is defined on the zero-mean Gaussian family only")
    alpha = p.mu * p.b1 * p.dt / (math.sqrt(2.0) * p.m)
    a, b, c = cm.var_z, cm.cor_zp / p.m, cm.var_p / p.m**2
    s = p.dt + tau
    return alpha * (tau + 0.5 * p.dt) / math.sqrt(a + b * s + c * s * s)


def tau_star(p: ApparatusParams, state: GaussianState) -> ScreenOptimum:
    """Screen time maximising ``|W|``, or the asymptotic supremum if none is attained."""
    if not p.dt > 0.0:
        raise DomainError("screen optimisation needs a magnet with dt > 0")
    if not state.zero_mean:
        raise DomainError("screen optimisation is defined on the zero-mean Gaussian family only")
    cm = moments(state)
    m, dt = p.m, p.dt
    strength = abs(p.mu * p.b1) * dt
    lhs = m * cm.cor_zp + cm.var_p * dt
    numerator = 4.0 * m * m * cm.var_z + 3.0 * m * cm.cor_zp * dt + 2.0 * cm.var_p * dt * dt
    if numerator < 0.0:
        # W'(0) < 0. Possible only when |<{Z,P}>| > 2 sqrt(2) hbar, and it forces
        # lhs < 0, so W decreases on the whole screen range: best screen is tau = 0.
        assert lhs < 0.0, (numerator, lhs)
        return ScreenOptimum(True, 0.0, abs(w_function(p, state, 0.0)), lhs)
    if lhs < 0.0:
        tau0 = -numerator / (2.0 * lhs)
        w_max = math.sqrt(2.0) * strength / p.hbar * math.sqrt(v_functional(state, 0.5 * dt, m))
        return ScreenOptimum(True, tau0, w_max, lhs)
    return ScreenOptimum(False, None, strength / math.sqrt(2.0 * cm.var_p), lhs)


def sup_w_over_states(v: float, p: ApparatusParams) -> float:
    if not v > 0.0:
        raise DomainError("v must be positive")
    return math.sqrt(2.0 * v) * abs(p.mu * p.b1) * p.dt / p.hbar


def ed_at_v(v: float, p: ApparatusParams) -> EDAtV:
    """Smallest error and the disturbance at fixed ``V(dt/2) = v``."""
    w0 = sup_w_over_states(v, p)
    damping = math.exp(-w0 * w0)
    eta2 = 2.0 - 2.0 * damping * math.cos(2.0 * p.mu * p.dt * p.b0 / p.hbar)
    return EDAtV(2.0 * math.erfc(w0), eta2, Interval(2.0 - 2.0 * damping, 2.0 + 2.0 * damping))


def region_bound(eps2: float) -> float:
    """Largest ``|eta^2 - 2|/2`` reachable by a Stern-Gerlach measurement with error ``eps2``.

    Evaluated through ``erfc^{-1}`` of the distance to the nearest end, so the
    bound keeps its accuracy as ``eps2`` approaches 0 or 4.
    """
    if not 0.0 <= eps2 <= 4.0:
        raise DomainError(f"eps^2 must lie in [0, 4], got {eps2!r}")
    tail = 0.5 * min(eps2, 4.0 - eps2)
    if tail == 0.0:
        return 0.0
    x = erfc_inv(tail)
    return math.exp(-x * x)


def in_sg_region(pt: EDPoint) -> bool:
    eps2 = min(max(pt.eps2, 0.0), 4.0)
    return abs(pt.eta2 - 2.0) / 2.0 <= region_bound(eps2) + REGION_TOL
