"""Error and disturbance of Stern-Gerlach spin measurements with Gaussian probes."""

from .errors import DomainError, NumericsError, OracleResolutionError, RegionViolation
from .gaussian_states import GaussianState
from .sg_measurement import ApparatusParams
from .spin_qubit import BlochState

__version__ = "0.1.0"

__all__ = [
    "ApparatusParams",
    "BlochState",
    "DomainError",
    "GaussianState",
    "NumericsError",
    "OracleResolutionError",
    "RegionViolation",
    "__version__",
]
