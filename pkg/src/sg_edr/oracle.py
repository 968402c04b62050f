"""Grid propagator used to check the closed forms from first principles.

The two spin branches of the wavefunction are evolved on a periodic position
grid under ``+-mu (B0 + B1 z) + P^2/2m`` during the magnet transit (Strang
split-step, spectral kinetic step) and exactly in momentum space during free
flight. Error and disturbance are then read off their operator definitions.

Because the Hamiltonian is diagonal in sigma_z, the propagator maps
``w_up xi (+) w_down xi`` to ``w_up U_+ xi (+) w_down U_- xi``. One run of the
two unit branches ``U_+- xi`` therefore serves every spin input; runs are
cached per (params, state, config).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DomainError, OracleResolutionError
from .gaussian_states import GaussianState, evolved_variance, wavefunction
from .sg_measurement import ApparatusParams, disturbance_gaussian, error_gaussian, g0
from .spin_qubit import SIGMA_X, SIGMA_Y, SIGMA_Z, BlochState, density_matrix

__all__ = [
    "Grid",
    "SpinorField",
    "OracleConfig",
    "BranchRun",
    "HomeIndices",
    "CrossCheck",
    "grid_for",
    "initialize",
    "propagate",
    "propagate_magnet",
    "propagate_free",
    "half_line_probabilities",
    "run_branches",
    "oracle_error",
    "oracle_disturbance",
    "home_indices",
    "cross_check",
    "free_variance_scan",
    "density_snapshots",
]

EDGE_DENSITY_TOL = 1e-12
ESCAPE_TOL = 1e-8
ESCAPE_CELLS = 5
MAX_STEP_PHASE = 0.1
NORM_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-half_width, half_width)``; ``z = 0`` is sample ``n // 2``."""

    n: int
    half_width: float

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise OracleResolutionError(f"grid size must be a power of two >= 64, got {self.n}")
        if not self.half_width > 0.0:
            raise OracleResolutionError("grid half width must be positive")

    @property
    def dz(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def z(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dz

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dz)


@dataclass
class SpinorField:
    psi_up: np.ndarray
    psi_down: np.ndarray
    grid: Grid
    time: float = 0.0

    def norm(self) -> float:
        return float((np.vdot(self.psi_up, self.psi_up).real
                      + np.vdot(self.psi_down, self.psi_down).real) * self.grid.dz)

    def copy(self) -> "SpinorField":
        return SpinorField(self.psi_up.copy(), self.psi_down.copy(), self.grid, self.time)

    def densities(self) -> tuple[np.ndarray, np.ndarray]:
        return np.abs(self.psi_up) ** 2, np.abs(self.psi_down) ** 2


@dataclass(frozen=True)
class OracleConfig:
    """Grid and time-step settings.

    ``steps_per_unit=None`` picks the magnet-stage step so that the
    position-dependent potential phase at the grid edge stays below
    ``max_step_phase`` per step. ``half_width`` overrides the automatic sizing.
    """

    n: int = 4096
    width_factor: float = 12.0
    steps_per_unit: float | None = None
    scheme: str = "split_step_fourier"
    max_step_phase: float = 0.05
    half_width: float | None = None
    backend: str | None = None

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise OracleResolutionError(f"n must be a power of two >= 64, got {self.n}")
        if self.half_width is None and self.width_factor < 10.0:
            raise OracleResolutionError(
                f"width_factor {self.width_factor} < 10 cannot contain the packet; widen the grid")
        if self.scheme != "split_step_fourier":
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.steps_per_unit is not None and not self.steps_per_unit > 0:
            raise DomainError("steps_per_unit must be positive")
        if not 0.0 < self.max_step_phase <= MAX_STEP_PHASE:
            raise DomainError(f"max_step_phase must lie in (0, {MAX_STEP_PHASE}]")


def _width(state: GaussianState, t: float, m: float) -> float:
    return math.sqrt(evolved_variance(state, t, m))


def grid_for(state: GaussianState, cfg: OracleConfig, params: ApparatusParams | None = None,
             t_max: float | None = None) -> Grid:
    """Grid wide enough for the whole run: deflection plus ``width_factor`` packet widths."""
    if cfg.half_width is not None:
        return Grid(cfg.n, cfg.half_width)
    m = params.m if params is not None else 1.0
    t_end = params.total_time if params is not None else 0.0
    if t_max is not None:
        t_end = max(t_end, t_max)
    # free-flight variance is convex in t, so its maximum sits at an end point
    width = max(_width(state, 0.0, m), _width(state, t_end, m))
    drift = max(abs(state.mean_z), abs(state.mean_z + state.mean_p * t_end / m))
    deflection = abs(g0(params)) if params is not None else 0.0
    return Grid(cfg.n, deflection + drift + cfg.width_factor * width)


def _check_spectrum(psi: np.ndarray, grid: Grid, what: str, backend: str | None) -> None:
    spec = np.abs(kernels.fft(psi, backend=backend)) ** 2
    total = spec.sum()
    if total == 0.0:
        return
    h = grid.n // 2
    edge = spec[h - ESCAPE_CELLS:h + ESCAPE_CELLS].sum() / total
    if edge > ESCAPE_TOL:
        raise OracleResolutionError(
            f"{what}: momentum distribution reaches the grid Nyquist limit "
            f"(fraction {edge:.2e}); increase n to refine dz")


def _check_contained(field: SpinorField, backend: str | None) -> None:
    dz = field.grid.dz
    for name, psi in (("up", field.psi_up), ("down", field.psi_down)):
        dens = np.abs(psi) ** 2
        edge = (dens[:ESCAPE_CELLS].sum() + dens[-ESCAPE_CELLS:].sum()) * dz
        if edge > ESCAPE_TOL:
            raise OracleResolutionError(
                f"{name} branch probability {edge:.2e} within {ESCAPE_CELLS} cells of the "
                f"boundary at t={field.time}; widen the grid (width_factor or half_width)")
        _check_spectrum(psi, field.grid, f"{name} branch at t={field.time}", backend)


def initialize(state: GaussianState, spinor_weights: tuple[complex, complex], cfg: OracleConfig,
               params: ApparatusParams | None = None, grid: Grid | None = None) -> SpinorField:
    """Sample ``(w_up xi, w_down xi)`` on a grid sized for ``params`` (if given)."""
    w_up, w_down = (complex(w) for w in spinor_weights)
    if abs(abs(w_up) ** 2 + abs(w_down) ** 2 - 1.0) > 1e-12:
        raise DomainError("spinor weights must satisfy |w_up|^2 + |w_down|^2 = 1")
    if grid is None:
        grid = grid_for(state, cfg, params)
    xi = wavefunction(state, grid.z).astype(np.complex128)
    dens = np.abs(xi) ** 2
    if max(dens[0], dens[-1]) > EDGE_DENSITY_TOL:
        raise OracleResolutionError(
            f"initial packet density {max(dens[0], dens[-1]):.2e} at the grid edge; widen the grid")
    xi /= math.sqrt(dens.sum() * grid.dz)
    _check_spectrum(xi, grid, "initial packet", cfg.backend)
    return SpinorField(w_up * xi, w_down * xi, grid, 0.0)


def _magnet_steps(p: ApparatusParams, grid: Grid, cfg: OracleConfig) -> int:
    edge_rate = abs(p.mu * p.b1) * grid.half_width / p.hbar  # rad per unit time at the edge
    if cfg.steps_per_unit is None:
        return max(1, math.ceil(edge_rate * p.dt / cfg.max_step_phase))
    nsteps = max(1, math.ceil(p.dt * cfg.steps_per_unit))
    phase = edge_rate * p.dt / nsteps
    if phase > MAX_STEP_PHASE:
        suggested = math.ceil(edge_rate / cfg.max_step_phase)
        raise OracleResolutionError(
            f"potential phase {phase:.3f} rad per step at the grid edge exceeds "
            f"{MAX_STEP_PHASE}; use steps_per_unit >= {suggested}")
    return nsteps


def propagate_magnet(field: SpinorField, p: ApparatusParams, cfg: OracleConfig) -> SpinorField:
    """Evolve through the magnet, ``0 <= t <= dt``."""
    out = field.copy()
    if p.dt == 0.0:
        return out
    grid = field.grid
    nsteps = _magnet_steps(p, grid, cfg)
    h = p.dt / nsteps
    z, kw = grid.z, grid.wavenumbers
    kin = np.exp(-0.5j * p.hbar * kw * kw * h / p.m)
    for sign, psi in ((1.0, out.psi_up), (-1.0, out.psi_down)):
        half = np.exp(-0.5j * sign * p.mu * p.b1 * z * h / p.hbar)
        kernels.strang_evolve(psi, half, kin, nsteps, backend=cfg.backend)
        # the uniform part of the field commutes with everything: apply it exactly
        psi *= np.exp(-1j * sign * p.mu * p.b0 * p.dt / p.hbar)
    out.time = field.time + p.dt
    _check_contained(out, cfg.backend)
    return out


def propagate_free(field: SpinorField, t: float, m: float, hbar: float,
                   backend: str | None = None, check: bool = True) -> SpinorField:
    """Exact free flight for time ``t`` (single spectral step)."""
    out = field.copy()
    if t == 0.0:
        return out
    kw = field.grid.wavenumbers
    kin = np.exp(-0.5j * hbar * kw * kw * t / m)
    kernels.spectral_phase(out.psi_up, kin, backend=backend)
    kernels.spectral_phase(out.psi_down, kin, backend=backend)
    out.time = field.time + t
    if check:
        _check_contained(out, backend)
    return out


def propagate(field: SpinorField, p: ApparatusParams, cfg: OracleConfig) -> SpinorField:
    """Magnet transit followed by free flight to the screen."""
    exit_field = propagate_magnet(field, p, cfg)
    out = propagate_free(exit_field, p.tau, p.m, p.hbar, cfg.backend)
    if abs(out.norm() - field.norm()) > NORM_TOL:
        raise OracleResolutionError(f"norm drifted by {out.norm() - field.norm():.2e}")
    return out


def half_line_probabilities(density: np.ndarray, grid: Grid) -> tuple[float, float]:
    """``(P(z < 0), P(z >= 0))`` by the trapezoid rule.

    The sample at ``z = 0`` is split evenly: the tie is a null set in the
    continuum, and giving it to one side would bias both sums by O(dz).
    """
    h = grid.n // 2
    mid = 0.5 * density[h]
    lower = (density[:h].sum() + mid) * grid.dz
    upper = (density[h + 1:].sum() + mid) * grid.dz
    return float(lower), float(upper)


@dataclass(frozen=True)
class BranchRun:
    """Unit-norm branches ``U_+- xi`` at the magnet exit and at the screen."""

    grid: Grid
    up_exit: np.ndarray
    down_exit: np.ndarray
    up_final: np.ndarray
    down_final: np.ndarray


@functools.lru_cache(maxsize=32)
def run_branches(p: ApparatusParams, state: GaussianState, cfg: OracleConfig) -> BranchRun:
    s = 1.0 / math.sqrt(2.0)
    field = initialize(state, (s, s), cfg, params=p)
    exit_field = propagate_magnet(field, p, cfg)
    final = propagate_free(exit_field, p.tau, p.m, p.hbar, cfg.backend)
    drift = abs(final.norm() - 1.0)
    if drift > NORM_TOL:
        raise OracleResolutionError(f"norm drifted by {drift:.2e}")
    arrays = [a * math.sqrt(2.0) for a in (exit_field.psi_up, exit_field.psi_down,
                                           final.psi_up, final.psi_down)]
    for a in arrays:
        a.setflags(write=False)
    return BranchRun(field.grid, *arrays)


def _spin_components(b: BlochState):
    """Eigen-decomposition of the spin density operator, dropping null weights."""
    vals, vecs = np.linalg.eigh(density_matrix(b))
    return [(float(v), vecs[:, i]) for i, v in enumerate(vals) if v > 1e-15]


def _mean_square_noise(run: BranchRun, w: np.ndarray, meter_sign: int) -> float:
    lo_up, hi_up = half_line_probabilities(np.abs(run.up_final) ** 2, run.grid)
    lo_dn, hi_dn = half_line_probabilities(np.abs(run.down_final) ** 2, run.grid)
    # f(z) = -meter_sign for z >= 0: spin-up is misread where f = -1
    wrong_up, wrong_dn = (hi_up, lo_dn) if meter_sign > 0 else (lo_up, hi_dn)
    return 4.0 * (abs(w[0]) ** 2 * wrong_up + abs(w[1]) ** 2 * wrong_dn)


def oracle_error(p: ApparatusParams, b: BlochState, state: GaussianState,
                 cfg: OracleConfig | None = None, *, meter_sign: int = 1) -> float:
    """rms error of the sigma_z readout, ``sqrt(<(f(Z(t)) - sigma_z)^2>)``.

    ``meter_sign=-1`` flips the screen assignment (``+1`` read above the origin).
    """
    if meter_sign not in (1, -1):
        raise DomainError("meter_sign must be +1 or -1")
    run = run_branches(p, state, cfg or OracleConfig())
    eps2 = sum(lam * _mean_square_noise(run, w, meter_sign) for lam, w in _spin_components(b))
    return math.sqrt(max(eps2, 0.0))


_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def oracle_disturbance(p: ApparatusParams, b: BlochState, state: GaussianState,
                       cfg: OracleConfig | None = None, *, observable: str = "x") -> float:
    """rms change of a spin observable, ``eta^2 = || (s(t) - s(0)) Psi ||^2 = || s U Psi - U s Psi ||^2``.

    Equal to ``2 - 2 Re <U Psi | s U s Psi>`` but free of its cancellation at small ``eta``.
    """
    try:
        s = _PAULI[observable]
    except KeyError:
        raise DomainError(f"observable must be one of {sorted(_PAULI)}") from None
    run = run_branches(p, state, cfg or OracleConfig())
    branches = (run.up_final, run.down_final)
    total = 0.0
    for lam, w in _spin_components(b):
        sw = s @ w
        for i in range(2):
            # component i of s U Psi minus component i of U s Psi
            diff = s[i, 0] * w[0] * branches[0] + s[i, 1] * w[1] * branches[1] - sw[i] * branches[i]
            total += lam * float(np.vdot(diff, diff).real) * run.grid.dz
    return math.sqrt(total)


class HomeIndices(NamedTuple):
    """Branch overlap at the magnet exit and the up-branch half-line masses at the screen."""

    i_overlap: float
    e_integral: float
    e_upper: float


def home_indices(p: ApparatusParams, state: GaussianState,
                 cfg: OracleConfig | None = None) -> HomeIndices:
    """``e_integral`` is the lower-half-line mass of the spin-up branch; ``e_upper`` its complement."""
    run = run_branches(p, state, cfg or OracleConfig())
    overlap = abs(np.vdot(run.up_exit, run.down_exit)) * run.grid.dz
    lower, upper = half_line_probabilities(np.abs(run.up_final) ** 2, run.grid)
    return HomeIndices(float(overlap), lower, upper)


@dataclass(frozen=True)
class CrossCheck:
    eps_closed: float
    eps_oracle: float
    eta_closed: float
    eta_oracle: float
    home: HomeIndices
    tol: float

    @property
    def eps_rel(self) -> float:
        return _rel(self.eps_oracle, self.eps_closed)

    @property
    def eta_rel(self) -> float:
        return _rel(self.eta_oracle, self.eta_closed)

    @property
    def passed(self) -> bool:
        return self.eps_rel <= self.tol and self.eta_rel <= self.tol


def _rel(value: float, reference: float) -> float:
    if reference == 0.0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def cross_check(p: ApparatusParams, state: GaussianState, b: BlochState | None = None,
                cfg: OracleConfig | None = None, tol: float = 1e-3) -> CrossCheck:
    """Closed-form versus grid values of the error and disturbance."""
    b = b if b is not None else BlochState(0.0, 1.0, 0.0)
    cfg = cfg or OracleConfig()
    return CrossCheck(
        eps_closed=error_gaussian(p, state),
        eps_oracle=oracle_error(p, b, state, cfg),
        eta_closed=disturbance_gaussian(p, state),
        eta_oracle=oracle_disturbance(p, b, state, cfg),
        home=home_indices(p, state, cfg),
        tol=tol,
    )


def free_variance_scan(state: GaussianState, times, m: float = 1.0,
                       cfg: OracleConfig | None = None) -> np.ndarray:
    """Position variance of the freely evolved grid packet at each time."""
    cfg = cfg or OracleConfig()
    times = np.asarray(times, dtype=float)
    grid = grid_for(state, cfg, t_max=float(times.max()) if times.size else 0.0)
    field = initialize(state, (1.0, 0.0), cfg, grid=grid)
    z = grid.z
    out = np.empty_like(times)
    for i, t in enumerate(times):
        dens = np.abs(propagate_free(field, float(t), m, state.hbar, cfg.backend).psi_up) ** 2
        dens *= grid.dz
        mean = float(np.dot(z, dens))
        out[i] = float(np.dot(z * z, dens)) - mean * mean
    return out


def density_snapshots(p: ApparatusParams, b: BlochState, state: GaussianState,
                      cfg: OracleConfig | None = None):
    """Rows ``(z, dens_up, dens_down, time)`` at entry, magnet exit and screen."""
    cfg = cfg or OracleConfig()
    run = run_branches(p, state, cfg)
    rho = density_matrix(b)
    p_up, p_dn = rho[0, 0].real, rho[1, 1].real
    initial = np.abs(wavefunction(state, run.grid.z)) ** 2
    initial /= initial.sum() * run.grid.dz
    stages = ((0.0, initial, initial),
              (p.dt, np.abs(run.up_exit) ** 2, np.abs(run.down_exit) ** 2),
              (p.total_time, np.abs(run.up_final) ** 2, np.abs(run.down_final) ** 2))
    z = run.grid.z
    for t, up, dn in stages:
        for j in range(run.grid.n):
            yield float(z[j]), float(p_up * up[j]), float(p_dn * dn[j]), float(t)
