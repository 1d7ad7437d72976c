"""Gamma function and the bounded power-series kernel of the shear-flow solution.

The kernel family is

.. math::

    C(\\tau) = \\sum_{k \\ge 0} (-1)^k \\frac{a^{2k} \\tau^{2km}}{\\Gamma(2km + 1)},

a one-parameter Mittag-Leffler function :math:`E_{2m}(-a^2\\tau^{2m})`. Only
this decaying (bounded) branch is exposed; the companion series with all
signs positive grows without bound and is never evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import ParameterError, PoleError, SeriesConvergenceError

__all__ = [
    "SeriesParams",
    "SeriesResult",
    "bounded_kernel",
    "bounded_kernel_series",
    "gamma",
    "kernel_series_terms",
    "rgamma",
]

_EPS = float(np.finfo(float).eps)
# below this distance of beta from 1 the trapezoid node count becomes prohibitive
_SPIKE_LIMIT = 0.01


def gamma(x: float) -> float:
    """Euler's gamma function, Lanczos approximation with reflection below 1/2.

    Raises :class:`PoleError` at zero and the negative integers.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ParameterError(f"gamma argument must be finite, got {x}")
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    return float(_kernels.gamma_scalar(x))


def rgamma(x: float) -> float:
    """1/Gamma(x), equal to zero at the poles of Gamma."""
    return float(_kernels.rgamma_scalar(float(x)))


@dataclass(frozen=True)
class SeriesParams:
    """Parameters of the bounded kernel series.

    ``a`` is the spatial frequency divided by the wave speed (units
    ``1/time**m``), ``m`` the exponent, ``tol`` the relative truncation
    tolerance and ``max_terms`` the term budget.
    """

    a: float
    m: float
    tol: float = 1e-14
    max_terms: int = 500

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ParameterError(f"a must be positive, got {self.a}")
        if not 0.5 <= self.m <= 1.0:
            raise ParameterError(f"m must lie in [1/2, 1], got {self.m}")
        if not 0.0 < self.tol < 1.0:
            raise ParameterError(f"tol must lie in (0, 1), got {self.tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 8:
            raise ParameterError(f"max_terms must be an integer >= 8, got {self.max_terms}")


class SeriesResult(NamedTuple):
    value: float
    truncation_bound: float  # magnitude of the first omitted term
    rounding_bound: float  # cancellation estimate from the largest term
    terms: int
    converged: bool


def _closed_form(m: float) -> str | None:
    if m == 0.5:
        return "exp"
    if m == 1.0:
        return "cos"
    return None


def kernel_series_terms(p: SeriesParams, tau: float, *, closed_form: bool = True) -> SeriesResult:
    """Evaluate the kernel series and report how the truncation went.

    With ``closed_form`` the two exponents where the series sums to an
    elementary function (``m = 1/2`` gives ``exp(-a^2 tau)``, ``m = 1`` gives
    ``cos(a tau)``) are returned exactly. Otherwise the raw alternating series
    is summed with compensation; its truncation bound is the first omitted
    term, valid because the terms eventually decrease monotonically.
    """
    tau = float(tau)
    if tau < 0.0 or not math.isfinite(tau):
        raise ParameterError(f"tau must be a finite non-negative number, got {tau}")
    kind = _closed_form(p.m) if closed_form else None
    if kind == "exp":
        return SeriesResult(math.exp(-p.a * p.a * tau), 0.0, 0.0, 0, True)
    if kind == "cos":
        return SeriesResult(math.cos(p.a * tau), 0.0, 0.0, 0, True)
    z = p.a * p.a * tau ** (2.0 * p.m)
    value, omitted, largest, terms, converged = _kernels.alternating_series_core(
        z, 2.0 * p.m, p.tol, int(p.max_terms)
    )
    rounding = 2.0 * _EPS * largest * math.sqrt(max(terms, 1))
    return SeriesResult(float(value), float(omitted), float(rounding), int(terms), bool(converged))


def bounded_kernel_series(p: SeriesParams, tau: float) -> float:
    """C(tau) from the power series, raising when the term budget runs out.

    A large argument ``a**2 * tau**(2m)`` makes the alternating terms grow
    before they decay; that case is reported through
    :class:`SeriesConvergenceError` instead of being truncated silently.
    Use :func:`bounded_kernel` for large arguments.
    """
    res = kernel_series_terms(p, tau)
    if not res.converged:
        raise SeriesConvergenceError(
            f"kernel series did not converge in {p.max_terms} terms "
            f"(a^2 tau^2m = {p.a**2 * tau ** (2 * p.m):.3g})",
            module="special_fn",
            parameter="max_terms",
        )
    return res.value


def _spectral_density(beta: float, u: np.ndarray) -> np.ndarray:
    # r K_beta(r) at r = exp(u). The denominator r^2b + 2 r^b cos(b pi) + 1 is
    # rewritten as (expm1(b u) + 2 sin^2(e pi / 2))^2 + sin^2(e pi), e = b - 1,
    # which keeps full precision at the peak r = 1 when b is close to 1.
    eps = beta - 1.0
    shift = 2.0 * math.sin(0.5 * math.pi * eps) ** 2
    s = math.sin(math.pi * eps)
    return -(s / math.pi) * np.exp(beta * u) / ((np.expm1(beta * u) + shift) ** 2 + s * s)


@lru_cache(maxsize=64)
def _laplace_nodes(beta: float) -> tuple[np.ndarray, np.ndarray]:
    # Trapezoid nodes in u = log r for the spectral part of E_beta(-T^beta).
    # The integrand is analytic in the strip |Im u| < pi (beta-1)/beta, so the
    # step is a fixed fraction of that width.
    width = math.pi * min(beta - 1.0, 3.0 - beta) / beta
    h = min(0.25, 0.2 * width)
    half = 37.0 / beta
    u = np.arange(-half, half + 0.5 * h, h)
    return np.exp(u), h * _spectral_density(beta, u)


def _spectral_adaptive(beta: float, T: np.ndarray) -> np.ndarray:
    # Near beta = 1 the density is a spike of width ~ pi (beta - 1) at u = 0.
    # u = c sinh(w) with c the spike width flattens it for adaptive quadrature.
    c = math.pi * (beta - 1.0) / beta
    w_max = math.asinh((37.0 / beta) / c)

    def side(sign: float):
        def f(w: float) -> np.ndarray:
            u = sign * c * math.sinh(w)
            return c * math.cosh(w) * float(_spectral_density(beta, np.array(u))) * np.exp(-math.exp(u) * T)

        return integrate.quad_vec(f, 0.0, w_max, epsabs=1e-16, epsrel=1e-13, norm="max")[0]

    return side(1.0) + side(-1.0)


def _mittag_leffler_neg(beta: float, T: np.ndarray) -> np.ndarray:
    """E_beta(-T^beta) for 1 < beta < 2 and T >= 0.

    Small arguments use the power series; the rest use the exact split into a
    completely monotone Laplace integral and a damped oscillation.
    """
    out = np.empty_like(T)
    z = T**beta
    small = z <= 1.0
    for i in np.flatnonzero(small):
        out[i] = _kernels.alternating_series_core(float(z[i]), beta, 1e-16, 200)[0]
    big = ~small
    if np.any(big):
        Tb = np.ascontiguousarray(T[big])
        if beta - 1.0 < _SPIKE_LIMIT:
            spectral = _spectral_adaptive(beta, Tb)
        else:
            r, c = _laplace_nodes(beta)
            spectral = _kernels.exp_sum(Tb, r, c)
        osc = (2.0 / beta) * np.exp(Tb * math.cos(math.pi / beta)) * np.cos(Tb * math.sin(math.pi / beta))
        out[big] = spectral + osc
    return out


def bounded_kernel(m: float, a: float, tau) -> np.ndarray:
    """Vectorised C(tau) valid for any argument size.

    Unlike :func:`bounded_kernel_series` this never runs out of terms: for
    ``1/2 < m < 1`` it switches from the series to an integral representation
    once ``a**2 * tau**(2m)`` exceeds one.
    """
    if not 0.5 <= m <= 1.0:
        raise ParameterError(f"m must lie in [1/2, 1], got {m}")
    if not a > 0.0:
        raise ParameterError(f"a must be positive, got {a}")
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr < 0.0):
        raise ParameterError("tau must be non-negative")
    flat = tau_arr.ravel()
    if m == 0.5:
        out = np.exp(-a * a * flat)
    elif m == 1.0:
        out = np.cos(a * flat)
    else:
        out = _mittag_leffler_neg(2.0 * m, a ** (1.0 / m) * flat)
    return out.reshape(tau_arr.shape)
