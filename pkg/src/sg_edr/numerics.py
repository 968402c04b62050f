"""Special functions and one-dimensional maximization.

``erf``/``erfc`` are the standard-library implementations; the inverses are
computed here with a polynomial starting guess polished by Halley iterations,
so that round trips are accurate to a few ulp over the whole open domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError, NumericsError

__all__ = [
    "Interval",
    "MaxResult",
    "erf",
    "erfc",
    "erf_inv",
    "erfc_inv",
    "gauss_tail",
    "maximize_1d",
]

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # 0.618...


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``; ``hi`` may be ``+inf`` for a half line."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise DomainError(f"invalid interval [{self.lo}, {self.hi}]")
        if math.isinf(self.lo):
            raise DomainError("interval lower end must be finite")

    @property
    def half_infinite(self) -> bool:
        return math.isinf(self.hi)

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def erf(x: float) -> float:
    return math.erf(x)


def erfc(x: float) -> float:
    return math.erfc(x)


def _initial_erfc_inv(q: float) -> float:
    """Rough ``erfc^{-1}(q)`` for ``0 < q <= 1`` (about 1e-7 relative).

    Polynomial fit in ``w = -log(q (2 - q))`` (M. Giles, single precision).
    The fit covers ``q >~ 6e-8`` (``w <= 16``, the single-precision range of
    ``erf^{-1}``); deeper tails start from the asymptotic
    ``erfc(x) ~ exp(-x^2) / (x sqrt(pi))`` instead.
    """
    w = -math.log(q * (2.0 - q))
    y = 1.0 - q
    if w > 16.0:
        x = math.sqrt(w)
        for _ in range(4):
            x = math.sqrt(-math.log(q * x * math.sqrt(math.pi)))
        return x
    if w < 5.0:
        w -= 2.5
        p = 2.81022636e-08
        for c in (3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
                  -0.00125372503, -0.00417768164, 0.246640727, 1.50140941):
            p = c + p * w
    else:
        w = math.sqrt(w) - 3.0
        p = -0.000200214257
        for c in (0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
                  -0.0076224613, 0.00943887047, 1.00167406, 2.83297682):
            p = c + p * w
    if y == 0.0:
        return 0.0
    return p * y


def erfc_inv(q: float, *, rtol: float = 1e-15, max_iter: int = 50) -> float:
    """Inverse complementary error function on ``0 < q < 2``.

    Small ``q`` keeps full relative accuracy, which ``erf_inv(1 - q)`` cannot.
    """
    if not 0.0 < q < 2.0:
        raise DomainError(f"erfc_inv requires 0 < q < 2, got {q!r}")
    if q > 1.0:
        return -erfc_inv(2.0 - q, rtol=rtol, max_iter=max_iter)
    if q == 1.0:
        return 0.0
    x = _initial_erfc_inv(q)
    # Halley on f(x) = erfc(x) - q, with f'' = -2 x f'.
    for _ in range(max_iter):
        f = math.erfc(x) - q
        fp = -_TWO_OVER_SQRT_PI * math.exp(-x * x)
        if fp == 0.0:
            break
        dx = f / (fp + x * f)
        x -= dx
        if abs(dx) <= rtol * max(abs(x), 1e-300):
            break
    return x


def erf_inv(y: float, *, rtol: float = 1e-15, max_iter: int = 50) -> float:
    """Inverse error function on the open interval ``(-1, 1)``."""
    if not -1.0 < y < 1.0:
        raise DomainError(f"erf_inv requires -1 < y < 1, got {y!r}")
    if y == 0.0:
        return 0.0
    if abs(y) > 0.5:
        # 1 - |y| is exact here (Sterbenz), so the tail inverse loses nothing.
        return math.copysign(erfc_inv(1.0 - abs(y), rtol=rtol, max_iter=max_iter), y)
    x = _initial_erfc_inv(1.0 - y)
    for _ in range(max_iter):
        f = math.erf(x) - y
        fp = _TWO_OVER_SQRT_PI * math.exp(-x * x)
        dx = f / (fp + x * f)
        x -= dx
        if abs(dx) <= rtol * max(abs(x), 1e-300):
            break
    return x


def gauss_tail(a: float, variance: float) -> float:
    """Upper tail mass ``P(X >= a)`` of a centred normal with the given variance."""
    if not variance > 0.0:
        raise DomainError(f"variance must be positive, got {variance!r}")
    return 0.5 * math.erfc(a / math.sqrt(2.0 * variance))


@dataclass(frozen=True)
class MaxResult:
    argmax: float
    max: float
    attained: bool


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def g(x: float) -> float:
        v = f(x)
        if not math.isfinite(v):
            raise NumericsError(f"objective returned non-finite value {v!r} at x={x!r}")
        return float(v)

    return g


def _golden(f, a: float, b: float, tol: float) -> tuple[float, float]:
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    # the endpoints may beat the last interior probes when the peak sits on a boundary
    candidates = [(fc, c), (fd, d), (f(a), a), (f(b), b)]
    best = max(candidates, key=lambda t: t[0])
    return best[1], best[0]


def maximize_1d(
    f: Callable[[float], float],
    domain: Interval,
    tol: float = 1e-9,
    *,
    horizon: float = 1e6,
    step: float | None = None,
) -> MaxResult:
    """Maximize a unimodal or monotone function on an interval or half line.

    On a half line the search expands geometrically from ``domain.lo`` until
    the function decreases. If it is still increasing past ``horizon`` the
    supremum is declared to sit at infinity: ``attained`` is False and ``max``
    is the limit extrapolated from the last two probes assuming ``L - C/x``
    decay.
    """
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    f = _checked(f)
    lo = domain.lo
    if not domain.half_infinite:
        x, fx = _golden(f, lo, domain.hi, tol)
        return MaxResult(x, fx, True)

    h = step if step is not None else 1e-3 * max(1.0, abs(lo))
    x0, f0 = lo, f(lo)
    x1, f1 = lo + h, f(lo + h)
    if f1 < f0:
        x, fx = _golden(f, x0, x1, tol)
        return MaxResult(x, fx, True)
    xm = x0
    while True:
        x2 = x1 + (1.0 + 1.0 / _INV_GOLDEN) * (x1 - xm) if x1 > xm else x1 + h
        f2 = f(x2)
        if f2 < f1:
            x, fx = _golden(f, xm, x2, tol)
            return MaxResult(x, fx, True)
        if x2 - lo > horizon:
            limit = (x2 * f2 - x1 * f1) / (x2 - x1) if x2 != x1 else f2
            return MaxResult(math.inf, max(limit, f2), False)
        xm, x1, f1 = x1, x2, f2
