"""Plane shear flow of a fractional-law medium between a fixed and a driven plate.

The wall at ``x = 0`` is fixed, the wall at ``x = l`` moves by ``phi(t)``. The
displacement is ``y = (x/l) phi(t) + (2/pi) sum_k ((-1)^k/k) sin(k pi x/l) I_k(t)``
with ``I_k(t) = int_0^t C_k(s) phi'(t - s) ds`` and ``C_k`` the bounded kernel of
:mod:`fracmech.special_fn` at ``a_k = k pi / (c l)``, ``c = sqrt(rho/kappa)``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Protocol, runtime_checkable

import numpy as np
from scipy import integrate

from . import _kernels
from .constitutive import DerivativeMeasure, FractionalLaw, transfer_scale
from .errors import NumericalError, ParameterError
from .special_fn import bounded_kernel, gamma, rgamma

__all__ = [
    "BoundaryStressReport",
    "CallableDrive",
    "CouetteProblem",
    "Drive",
    "KernelValue",
    "RampDrive",
    "SineDrive",
    "boundary_stress_report",
    "boundary_stress_uniform",
    "displacement",
    "displacement_general_law",
    "displacement_profile",
    "kernel_series",
    "kernel_value",
    "invert_laplace",
]


# --- drives ------------------------------------------------------------------


@runtime_checkable
class Drive(Protocol):
    def value(self, t: float | np.ndarray) -> float | np.ndarray: ...

    def rate(self, t: float | np.ndarray) -> float | np.ndarray: ...

    def transform(self, p: complex) -> complex | None: ...


@dataclass(frozen=True)
class RampDrive:
    """phi(t) = speed * t."""

    speed: float

    def value(self, t):
        return self.speed * np.asarray(t, dtype=float)

    def rate(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.speed)

    def transform(self, p: complex) -> complex:
        return self.speed / (p * p)

    @property
    def timescale(self) -> float:
        return math.inf


@dataclass(frozen=True)
class SineDrive:
    """phi(t) = amplitude * sin(omega t)."""

    amplitude: float
    omega: float

    def __post_init__(self) -> None:
        if not self.omega > 0.0:
            raise ParameterError(f"omega must be positive, got {self.omega}")

    def value(self, t):
        return self.amplitude * np.sin(self.omega * np.asarray(t, dtype=float))

    def rate(self, t):
        return self.amplitude * self.omega * np.cos(self.omega * np.asarray(t, dtype=float))

    def transform(self, p: complex) -> complex:
        return self.amplitude * self.omega / (p * p + self.omega**2)

    @property
    def timescale(self) -> float:
        return 1.0 / self.omega


@dataclass(frozen=True)
class CallableDrive:
    """An arbitrary wall motion; the rate falls back to central differences."""

    value_fn: Callable
    rate_fn: Callable | None = None
    diff_step: float = 1e-6
    timescale: float = 1.0

    def value(self, t):
        return np.asarray(self.value_fn(np.asarray(t, dtype=float)), dtype=float)

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        if self.rate_fn is not None:
            return np.asarray(self.rate_fn(t), dtype=float)
        h = self.diff_step
        return (self.value(t + h) - self.value(t - h)) / (2.0 * h)

    def transform(self, p: complex) -> None:
        return None


# --- problem -----------------------------------------------------------------


@dataclass(frozen=True)
class CouetteProblem:
    gap: float
    density: float
    law: FractionalLaw
    drive: Drive = field(default_factory=lambda: RampDrive(1.0))
    modes: int = 256
    cesaro: bool = False

    def __post_init__(self) -> None:
        if not (self.gap > 0.0 and math.isfinite(self.gap)):
            raise ParameterError(f"gap must be positive, got {self.gap}")
        if not (self.density > 0.0 and math.isfinite(self.density)):
            raise ParameterError(f"density must be positive, got {self.density}")
        if int(self.modes) != self.modes or self.modes < 1:
            raise ParameterError(f"modes must be a positive integer, got {self.modes}")
        if abs(float(self.drive.value(0.0))) > 1e-12:
            raise ParameterError("the drive must start from rest: phi(0) = 0")

    @property
    def wave_speed_inverse(self) -> float:
        """c = sqrt(rho / kappa), units time**m / length."""
        return math.sqrt(self.density / self.law.kappa)

    @property
    def m(self) -> float:
        return 1.0 - self.law.alpha / 2.0

    def mode_frequencies(self, count: int | None = None) -> np.ndarray:
        """a_k = k pi / (c l) for k = 1..count."""
        n = self.modes if count is None else count
        return np.arange(1, n + 1) * math.pi / (self.wave_speed_inverse * self.gap)

    def _damping(self, count: int) -> np.ndarray:
        k = np.arange(1, count + 1)
        return 1.0 - k / (count + 1.0) if self.cesaro else np.ones(count)


def _check_x(problem: CouetteProblem, x: float) -> None:
    if not (-1e-12 * problem.gap <= x <= problem.gap * (1.0 + 1e-12)):
        raise ParameterError(f"x must lie in [0, {problem.gap}], got {x}")


def _mode_weights(problem: CouetteProblem, x, count: int) -> np.ndarray:
    # (2/pi) (-1)^k / k sin(k pi x / l), shape (len(x), count)
    k = np.arange(1, count + 1)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coef = (2.0 / math.pi) * np.where(k % 2 == 0, 1.0, -1.0) / k * problem._damping(count)
    return np.sin(np.outer(math.pi * x / problem.gap, k)) * coef


class KernelValue(NamedTuple):
    value: float
    tail_estimate: float
    modes: int


def kernel_series(problem: CouetteProblem, x: float, t: float) -> KernelValue:
    """Wall-response kernel K(x, t) with a tail estimate from the last retained term."""
    _check_x(problem, x)
    if t < 0.0:
        raise ParameterError(f"t must be non-negative, got {t}")
    count = problem.modes
    ck = np.array([bounded_kernel(problem.m, a, t) for a in problem.mode_frequencies()]) if t > 0 else np.ones(count)
    terms = _mode_weights(problem, x, count)[0] * ck
    value = x / problem.gap + float(_neumaier(terms))
    tail = abs(float(terms[-1])) * count if count > 1 else abs(float(terms[-1]))
    return KernelValue(value, tail, count)


def kernel_value(problem: CouetteProblem, x: float, t: float) -> float:
    return kernel_series(problem, x, t).value


def _neumaier(values: np.ndarray) -> float:
    s = 0.0
    comp = 0.0
    for v in values.tolist():
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
    return s + comp


# --- Duhamel integrals per mode ----------------------------------------------

_GL16 = np.polynomial.legendre.leggauss(16)


def _scaled_panels(beta: float, upper: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and weights for int_0^upper g(T) dT with g = E_beta(-T^beta) times smooth data.

    Panels resolve the oscillation period and the exponential decay length
    of the kernel, grade geometrically towards T = 0 where the kernel has a
    T**beta cusp, and grow geometrically through the algebraic tail.
    """
    s, c = math.sin(math.pi / beta), math.cos(math.pi / beta)
    period = 2.0 * math.pi / s if s > 1e-12 else math.inf
    decay = 37.0 / abs(c) if abs(c) > 1e-12 else math.inf
    width = min(period, decay / 8.0)
    edges: list[float] = [0.0]
    first = min(width, upper)
    if 1.0 < beta < 2.0:
        edges.extend(first * 2.0 ** -np.arange(40, 0, -1))
    uniform_end = min(upper, decay)
    n_uniform = max(1, math.ceil(uniform_end / width - 1e-9))
    edges.extend(np.linspace(first, uniform_end, n_uniform)[(0 if edges[-1] < first else 1):].tolist())
    pos = edges[-1]
    while pos < upper:
        pos = min(upper, 2.0 * pos)
        edges.append(pos)
    e = np.unique(np.asarray(edges))
    lo, hi = e[:-1], e[1:]
    half = 0.5 * (hi - lo)
    nodes = (half[:, None] * _GL16[0][None, :] + (0.5 * (hi + lo))[:, None]).ravel()
    weights = (half[:, None] * _GL16[1][None, :]).ravel()
    return nodes, weights


def _kernel_scaled(beta: float, T: np.ndarray) -> np.ndarray:
    if beta == 1.0:
        return np.exp(-T)
    if beta == 2.0:
        return np.cos(T)
    return bounded_kernel(beta / 2.0, 1.0, T)


def mode_integrals(problem: CouetteProblem, t: float, count: int | None = None) -> np.ndarray:
    """I_k(t) = int_0^t C_k(s) phi'(t - s) ds for k = 1..count."""
    n = problem.modes if count is None else count
    if t <= 0.0:
        return np.zeros(n)
    return _mode_integrals_cached(problem, float(t), n).copy()


_GL8 = np.polynomial.legendre.leggauss(8)
_GL32 = np.polynomial.legendre.leggauss(32)
_MONOMIAL_FIT = np.linalg.inv(np.vander(_GL8[0], 8, increasing=True))


def _fourier_moments(omega: np.ndarray) -> np.ndarray:
    """M_j(w) = int_{-1}^{1} u^j exp(i w u) du for j = 0..7, shape (len(w), 8)."""
    out = np.empty((omega.size, 8), dtype=complex)
    small = omega < 8.0
    if np.any(small):
        u, w = _GL32
        ph = np.exp(1j * np.outer(omega[small], u)) * w
        out[small] = ph @ np.vander(u, 8, increasing=True)
    big = ~small
    if np.any(big):
        wb = omega[big]
        ep, em = np.exp(1j * wb), np.exp(-1j * wb)
        out[big, 0] = 2.0 * np.sin(wb) / wb
        for j in range(1, 8):
            out[big, j] = (ep - (-1) ** j * em) / (1j * wb) - j / (1j * wb) * out[big, j - 1]
    return out


def _oscillatory_mode_integrals(problem: CouetteProblem, t: float, n: int) -> np.ndarray:
    # Undamped kernel cos(a s): Filon quadrature with the drive rate fitted by
    # a degree-7 polynomial per panel, so the cost does not grow with a.
    scale = getattr(problem.drive, "timescale", 1.0)
    panels = 16 + (math.ceil(4.0 * t / scale) if math.isfinite(scale) else 0)
    edges = np.linspace(0.0, t, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[1:] + edges[:-1])
    nodes = mids[:, None] + half * _GL8[0][None, :]
    coeffs = problem.drive.rate(t - nodes) @ _MONOMIAL_FIT.T  # (panels, 8)
    a = problem.mode_frequencies(n)
    moments = _fourier_moments(a * half)  # (n, 8)
    phase = np.exp(1j * np.outer(a, mids))  # (n, panels)
    return half * np.real(np.sum(phase * (moments @ coeffs.T), axis=1))


@lru_cache(maxsize=128)
def _mode_integrals_cached(problem: CouetteProblem, t: float, n: int) -> np.ndarray:
    m = problem.m
    if m == 1.0:
        return _oscillatory_mode_integrals(problem, t, n)
    beta = 2.0 * m
    omegas = problem.mode_frequencies(n) ** (1.0 / m)
    out = np.empty(n)
    all_T: list[np.ndarray] = []
    all_w: list[np.ndarray] = []
    for k, om in enumerate(omegas):
        # int_0^t C(s) phi'(t-s) ds = (1/om) int_0^{om t} E(T) phi'(t - T/om) dT
        T, w = _scaled_panels(beta, float(om * t))
        all_T.append(T)
        all_w.append(w * problem.drive.rate(t - T / om) / om)
    sizes = [len(T) for T in all_T]
    values = _kernel_scaled(beta, np.concatenate(all_T)) * np.concatenate(all_w)
    start = 0
    for k, size in enumerate(sizes):
        out[k] = math.fsum(values[start : start + size])
        start += size
    return out


def displacement(problem: CouetteProblem, x: float, t: float) -> float:
    """y(x, t) via the integrated-by-parts Duhamel form."""
    _check_x(problem, x)
    return float(displacement_profile(problem, np.array([x]), t)[0])


def displacement_profile(problem: CouetteProblem, xs, t: float) -> np.ndarray:
    """y(x, t) at many positions; the mode integrals are shared across positions."""
    if t < 0.0:
        raise ParameterError(f"t must be non-negative, got {t}")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    for x in xs:
        _check_x(problem, float(x))
    n = problem.modes
    coef = mode_integrals(problem, t, n) * (2.0 / math.pi) * np.where(np.arange(1, n + 1) % 2 == 0, 1.0, -1.0)
    coef = coef / np.arange(1, n + 1) * problem._damping(n)
    phi = float(problem.drive.value(t))
    return xs / problem.gap * phi + _kernels.sine_sum(np.ascontiguousarray(xs), coef, problem.gap)


# --- wall stress under a uniform drive ---------------------------------------


class BoundaryStressReport(NamedTuple):
    value: float
    leading: float  # kappa c v t^(m-1)/Gamma(m)
    series_modes: int  # image terms summed by the power series
    contour_modes: int  # image terms whose series would cancel catastrophically
    skipped_modes: int  # image terms below the tail tolerance
    tail_estimate: float


_RAY_ANGLE = 7.0 * math.pi / 12.0
_GL64 = np.polynomial.legendre.leggauss(64)


def _image_term_series(m: float, x: float, t: float, J: int) -> tuple[float, bool]:
    # t^(m-1) sum_j (-x)^j / (j! Gamma(m - j m))
    s = 0.0
    comp = 0.0
    logx = math.log(x)
    for j in range(J):
        g = rgamma(m - j * m)
        if g == 0.0:
            continue
        term = math.exp(j * logx - math.lgamma(j + 1.0)) * g * (-1.0) ** j
        tt = s + term
        comp += (s - tt) + term if abs(s) >= abs(term) else (term - tt) + s
        s = tt
        if j > 2 and abs(term) < 1e-17 * max(abs(s), 1e-300) and j * m > 1.0:
            return t ** (m - 1.0) * (s + comp), True
    return t ** (m - 1.0) * (s + comp), False


def _image_term_contour(m: float, b: float, t: float) -> float:
    """Inverse transform of p^-m exp(-b p^m) along two rays where both exponentials decay."""
    e1 = cmath.exp(1j * _RAY_ANGLE)
    em = cmath.exp(1j * m * _RAY_ANGLE)
    k = 1.0 / (1.0 - m)  # r = u^k makes r^-m dr = k u^(k(1-m)-1) du smooth
    decay = abs(math.cos(_RAY_ANGLE))
    upper = (60.0 / (t * decay)) ** (1.0 / k)
    waves = b * upper ** (k * m) * abs(em.imag) + t * upper**k * e1.imag
    panels = max(8, int(waves / math.pi) + 8)
    edges = np.linspace(0.0, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    u = (half[:, None] * _GL64[0] + (0.5 * (edges[1:] + edges[:-1]))[:, None]).ravel()
    w = (half[:, None] * _GL64[1]).ravel()
    uk = u**k
    g = np.exp(uk * t * e1 - b * u ** (k * m) * em) * (k * u ** (k * (1.0 - m) - 1.0)) * e1 / em
    return float(np.sum(w * g).imag / math.pi)


def boundary_stress_report(
    problem: CouetteProblem,
    v: float,
    t: float,
    terms: tuple[int, int] = (64, 400),
    tol: float = 1e-15,
) -> BoundaryStressReport:
    """Stress on the moving wall under phi = v t for the half-order law.

    The image sum over ``k`` is the reflection series of ``coth``; each image
    term is a Wright function of ``x = (2k+2) c l t^-m``. Terms whose power
    series would lose all digits to cancellation are evaluated by a two-ray
    contour integral instead, and terms below ``tol`` relative to the leading
    singular part are dropped and reported.
    """
    if problem.law.alpha != 0.5:
        raise ParameterError("the uniform-drive wall stress is defined for alpha = 1/2")
    if not t > 0.0:
        raise ParameterError("wall stress is singular at t = 0; t must be positive")
    K, J = terms
    if K < 1 or J < 8:
        raise ParameterError("terms must be (K >= 1, J >= 8)")
    m = problem.m
    c = problem.wave_speed_inverse
    l = problem.gap
    scale = problem.law.kappa * c * v
    leading_unit = t ** (m - 1.0) / gamma(m)
    images = 0.0
    n_series = n_contour = n_skip = 0
    tail = 0.0
    for k in range(K + 1):
        b = (2 * k + 2) * c * l
        x = b * t ** (-m)
        envelope = (1.0 - m) * (m**m * x) ** (1.0 / (1.0 - m))
        magnitude = math.exp(-envelope) * t ** (m - 1.0)
        if k == K:
            tail = 2.0 * magnitude * abs(scale)
            break
        if magnitude < tol * leading_unit:
            n_skip += K - k
            tail = 2.0 * magnitude * abs(scale) * (K - k + 1)
            break
        peak = (1.0 - m) * x ** (1.0 / (1.0 - m))
        if peak < 8.0:
            val, ok = _image_term_series(m, x, t, J)
            if not ok:
                val = _image_term_contour(m, b, t)
                n_contour += 1
            else:
                n_series += 1
        else:
            val = _image_term_contour(m, b, t)
            n_contour += 1
        images += val
    value = scale * (leading_unit + 2.0 * images)
    return BoundaryStressReport(value, scale * leading_unit, n_series, n_contour, n_skip, tail)


def boundary_stress_uniform(
    problem: CouetteProblem, v: float, t: float, terms: tuple[int, int] = (64, 400)
) -> float:
    return boundary_stress_report(problem, v, t, terms).value


# --- general measure law via numerical transform inversion -------------------

# Weideman's optimised Talbot contour parameters
_TALBOT = (-0.6122, 0.5017, 0.6407, 0.2645)


def _talbot(F: Callable[[complex], complex], t: float, nodes: int) -> float:
    s0, s1, s2, s3 = _TALBOT
    theta = -math.pi + (np.arange(nodes) + 0.5) * (2.0 * math.pi / nodes)
    mu = nodes / t
    cot = 1.0 / np.tan(s2 * theta)
    z = mu * (s0 + s1 * theta * cot + s3 * 1j * theta)
    dz = mu * (s1 * cot - s1 * s2 * theta / np.sin(s2 * theta) ** 2 + s3 * 1j)
    total = 0.0j
    for zk, dk in zip(z, dz):
        total += cmath.exp(zk * t) * F(complex(zk)) * dk
    return float((total / (1j * nodes)).real)


def _bromwich(F: Callable[[complex], complex], t: float, shift: float, rel_tol: float) -> float:
    # f(t) = (2 e^{gamma t} / pi) int_0^inf Re F(gamma + i w) cos(w t) dw for causal f
    def integrand(w: float) -> float:
        return F(complex(shift, w)).real

    with warnings.catch_warnings():
        # QAWF flags slow cycle convergence near poles by the imaginary axis;
        # the value is still usable and non-finite results are caught below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(
            integrand, 0.0, np.inf, weight="cos", wvar=t, limlst=200, limit=400,
            epsabs=1e-13 * math.exp(-shift * t),
        )
    if not math.isfinite(val):
        raise NumericalError("Bromwich integral did not converge", module="couette", parameter="t")
    return 2.0 * math.exp(shift * t) * val / math.pi


def invert_laplace(
    F: Callable[[complex], complex], t: float, *, method: str = "talbot", nodes: int = 48, shift: float | None = None
) -> float:
    """Numerical inverse Laplace transform at a single positive time.

    ``talbot`` integrates along a deformed contour that wraps the negative
    axis; ``bromwich`` integrates along a vertical line ``Re p = shift`` and
    handles transforms with singularities close to the imaginary axis.
    """
    if not t > 0.0:
        raise ParameterError("transform inversion needs t > 0")
    if method == "talbot":
        if nodes < 8:
            raise ParameterError("at least 8 contour nodes are required")
        return _talbot(F, t, nodes)
    if method == "bromwich":
        return _bromwich(F, t, shift if shift is not None else 1.0 / t, 1e-10)
    raise ParameterError(f"unknown inversion method {method!r}")


def _sampled_transform(drive: Drive, t: float, samples: int) -> Callable[[complex], complex]:
    # The response at time t depends on the drive over [0, t] only, so the
    # drive may be replaced by its piecewise-linear interpolant there and
    # continued with the last slope. That interpolant has the exact transform
    # sum_j (slope jump at s_j) exp(-p s_j) / p^2, valid for every p != 0.
    s = np.linspace(0.0, t, samples + 1)
    slopes = np.diff(np.asarray(drive.value(s), dtype=float)) / (s[1] - s[0])
    jumps = np.diff(slopes, prepend=0.0)
    nodes = s[:-1]

    def F(p: complex) -> complex:
        return complex(np.dot(jumps, np.exp(-p * nodes))) / (p * p)

    return F


def _sinh_ratio(z_x: complex, z_l: complex) -> complex:
    # sinh(z_x)/sinh(z_l) without overflow for Re z >= 0
    if z_l.real < 0.0:
        z_x, z_l = -z_x, -z_l
    num = cmath.exp(z_x - z_l) * (1.0 - cmath.exp(-2.0 * z_x))
    den = 1.0 - cmath.exp(-2.0 * z_l)
    return num / den


def displacement_general_law(
    e: DerivativeMeasure,
    s: DerivativeMeasure,
    density: float,
    gap: float,
    drive: Drive,
    x: float,
    t: float,
    *,
    method: str = "auto",
    nodes: int = 48,
    samples: int = 4096,
) -> float:
    """y(x, t) for the law e[sigma] = s[epsilon] by inverting Phi(p) sinh(A p x)/sinh(A p l).

    ``method="auto"`` uses the Talbot contour when the law damps the wall
    signal and the Bromwich line otherwise (undamped or nearly undamped
    laws put singularities next to the imaginary axis, which the Talbot
    contour cannot enclose). A drive without an analytic transform goes
    through the Duhamel integral of its rate against the step response on
    the Talbot route; on the Bromwich route it is sampled at ``samples``
    intervals on [0, t] and replaced by its piecewise-linear interpolant,
    whose transform is exact (error second order in t / samples).
    """
    if not gap > 0.0:
        raise ParameterError(f"gap must be positive, got {gap}")
    if not (0.0 <= x <= gap):
        raise ParameterError(f"x must lie in [0, {gap}], got {x}")
    if t < 0.0:
        raise ParameterError(f"t must be non-negative, got {t}")
    if t == 0.0 or x == 0.0:
        return 0.0 if x == 0.0 or abs(float(drive.value(0.0))) == 0.0 else float(drive.value(0.0))
    if x == gap:
        return float(drive.value(t))
    analytic = drive.transform(1.0 + 0.0j) is not None
    if method == "auto":
        method = "talbot" if _damping_angle(e, s, density) >= 0.35 else "bromwich"

    def ratio(p: complex) -> complex:
        ap = transfer_scale(e, s, density, p) * p
        return _sinh_ratio(ap * x, ap * gap)

    if analytic:
        return invert_laplace(lambda p: drive.transform(p) * ratio(p), t, method=method, nodes=nodes)
    if method == "talbot":
        # Duhamel form against the step response; a sampled transform would
        # carry delay factors exp(-p s) that the Talbot contour cannot handle
        def step_response(tau: float) -> float:
            return invert_laplace(lambda p: ratio(p) / p, tau, nodes=nodes) if tau > 0.0 else 0.0

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(
                lambda u: float(drive.rate(u)) * step_response(t - u), 0.0, t, limit=200, epsabs=1e-11, epsrel=1e-10
            )
        return float(val)
    Phi = _sampled_transform(drive, t, samples)
    return invert_laplace(lambda p: Phi(p) * ratio(p), t, method=method, nodes=nodes)


def _damping_angle(e: DerivativeMeasure, s: DerivativeMeasure, density: float) -> float:
    # distance of arg(A(i w) i w) from pi/2, minimised over a frequency sweep
    angles = []
    for w in np.logspace(-3, 3, 25):
        ap = transfer_scale(e, s, density, complex(0.0, w)) * complex(0.0, w)
        angles.append(abs(abs(cmath.phase(ap)) - math.pi / 2.0))
    return min(angles)
