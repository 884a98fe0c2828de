"""Complex log-gamma, digamma and the upper incomplete gamma function.

The log-gamma routine is vectorised because the Mellin-Barnes integrand in
:mod:`egg_cascade.fox_h` evaluates it on long complex grids.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

__all__ = [
    "GammaPoleError",
    "SpecialFunctionDomainError",
    "log_gamma",
    "digamma",
    "upper_incomplete_gamma",
    "EULER_GAMMA",
]

EULER_GAMMA = 0.57721566490153286061
POLE_TOL = 1e-12

_LOG_PI = math.log(math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Godfrey's Lanczos set, g = 607/128, 15 terms.
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = np.array([
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
])

# B_{2k} / (2k) for the digamma asymptotic series, k = 1..7
_DIGAMMA_ASYM = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


class GammaPoleError(ValueError):
    """Argument lies on (or numerically at) a pole of the gamma function."""


class SpecialFunctionDomainError(ValueError):
    pass


def _lanczos_right(z):
    """Principal log-gamma for Re z >= 0.5 (no checks)."""
    w = z - 1.0
    t = w + (_LANCZOS_G + 0.5)
    series = np.full_like(w, _LANCZOS_C[0])
    for k in range(1, _LANCZOS_C.size):
        series = series + _LANCZOS_C[k] / (w + k)
    return _HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(series)


def _log_sinpi(z):
    """Principal log(sin(pi z)), safe against overflow for large |Im z|."""
    x = z.real
    y = z.imag
    # sin(pi z) has period 2 in Re z; reduce to keep pi*x exact-ish.
    xr = x - 2.0 * np.round(0.5 * x)
    zr = xr + 1j * y
    out = np.empty_like(zr)

    small = np.abs(y) <= 20.0
    if np.any(small):
        out[small] = np.log(np.sin(np.pi * zr[small]))

    big = ~small
    if np.any(big):
        zb = zr[big]
        flip = zb.imag < 0
        zb = np.where(flip, np.conj(zb), zb)
        # sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z}),  Im z > 0
        val = (np.pi * zb.imag - math.log(2.0)) + 1j * (0.5 * np.pi - np.pi * zb.real)
        val = val + np.log1p(-np.exp(2j * np.pi * zb))
        im = np.angle(np.exp(1j * val.imag))  # wrap into (-pi, pi]
        val = val.real + 1j * im
        out[big] = np.where(flip, np.conj(val), val)
    return out


def _log_gamma_array(z):
    """Vectorised principal log-gamma; no pole or finiteness checks."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)

    right = z.real >= 0.5
    if np.any(right):
        out[right] = _lanczos_right(z[right])

    left = ~right
    if np.any(left):
        zl = z[left]
        # reflection with the branch correction that keeps the result on the
        # principal sheet (continuous off the negative real axis)
        branch = np.copysign(2.0 * np.pi, zl.imag) * np.floor(0.5 * zl.real + 0.25)
        out[left] = (_LOG_PI + 1j * branch) - _log_sinpi(zl) - _lanczos_right(1.0 - zl)
    return out[0] if scalar else out


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex ``z`` (scalar or array).

    Raises :class:`GammaPoleError` when ``z`` is within 1e-12 of a
    non-positive integer and :class:`SpecialFunctionDomainError` for
    non-finite input.
    """
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise SpecialFunctionDomainError("log_gamma: non-finite argument")
    near = np.round(arr.real)
    pole = (near <= 0) & (np.abs(arr - near) < POLE_TOL)
    if np.any(pole):
        bad = arr[pole] if arr.ndim else arr
        raise GammaPoleError(f"log_gamma: argument {np.ravel(bad)[0]} is a pole of Gamma")
    out = _log_gamma_array(arr)
    return complex(out) if arr.ndim == 0 else out


def _digamma_positive(x: float) -> float:
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for coef in _DIGAMMA_ASYM:
        series += coef * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def _digamma_real(x: float) -> float:
    """Digamma on the whole real line minus the poles (reflection for x <= 0)."""
    if x > 0:
        return _digamma_positive(x)
    if x == math.floor(x):
        raise GammaPoleError(f"digamma: {x} is a pole")
    return _digamma_positive(1.0 - x) - math.pi / math.tan(math.pi * x)


def digamma(x: float) -> float:
    """psi(x) = d/dx log Gamma(x) for real x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise SpecialFunctionDomainError(f"digamma requires x > 0, got {x}")
    return _digamma_positive(x)


def upper_incomplete_gamma(p, x):
    """Non-regularised upper incomplete gamma Gamma(p, x) for p > 0, x >= 0.

    Accepts scalars or arrays in ``x``.
    """
    p = float(p)
    xa = np.asarray(x, dtype=float)
    if not math.isfinite(p) or p <= 0:
        raise SpecialFunctionDomainError(f"upper_incomplete_gamma requires p > 0, got {p}")
    if np.any(~np.isfinite(xa) & ~np.isposinf(xa)) or np.any(xa < 0):
        raise SpecialFunctionDomainError("upper_incomplete_gamma requires x >= 0")
    out = sc.gammaincc(p, xa) * math.gamma(p)
    return float(out) if xa.ndim == 0 else out
