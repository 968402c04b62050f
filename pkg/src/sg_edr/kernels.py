"""Backend selection for the split-step kernels.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``SG_EDR_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import functools
import os
from types import ModuleType

import numpy as np

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    if os.environ.get("SG_EDR_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()
BACKENDS: dict[str, ModuleType] = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled
BACKEND = "cython" if _compiled is not None else "python"


def _impl(backend: str | None) -> ModuleType:
    name = BACKEND if backend is None else backend
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


@functools.lru_cache(maxsize=16)
def fft_plan(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bit-reversal permutation and half-length twiddles for a size-``n`` transform."""
    if n < 2 or n & (n - 1):
        raise ValueError(f"transform length must be a power of two, got {n}")
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    ang = -2.0 * np.pi * np.arange(n // 2) / n
    tw_re, tw_im = np.cos(ang), np.sin(ang)
    for arr in (rev, tw_re, tw_im):
        arr.setflags(write=False)
    return rev, tw_re, tw_im


def fft(a, *, backend: str | None = None) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    return _impl(backend).fft(a, *fft_plan(len(a)), False)


def ifft(a, *, backend: str | None = None) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    return _impl(backend).fft(a, *fft_plan(len(a)), True)


def strang_evolve(psi: np.ndarray, half_phase: np.ndarray, kin_phase: np.ndarray,
                  nsteps: int, *, backend: str | None = None) -> np.ndarray:
    """Advance ``psi`` (C-contiguous complex128, modified in place) by ``nsteps`` Strang steps."""
    return _impl(backend).strang_evolve(
        psi, np.ascontiguousarray(half_phase, dtype=np.complex128),
        np.ascontiguousarray(kin_phase, dtype=np.complex128), int(nsteps), *fft_plan(len(psi)))


def spectral_phase(psi: np.ndarray, kin_phase: np.ndarray, *,
                   backend: str | None = None) -> np.ndarray:
    return _impl(backend).spectral_phase(
        psi, np.ascontiguousarray(kin_phase, dtype=np.complex128), *fft_plan(len(psi)))
