"""Kinetics of a fiber ribbon drawn between a slow and a fast roller pair.

Stationary part: slip-corrected endpoint speeds, the closed-form velocity
and thinning curves, the dissipative function and the inflection analysis.
Nonstationary part: recovering flux, speed and force from a measured density
or flux field, and the iterated series for density from a measured speed
field. Floating-fiber part: the transcendental speed law and its
quasi-stationary, time-separable form.

Speeds are in arbitrary consistent units. The linear density of a single
fiber is taken as 1, so the mass flux equals ``n0 * v0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal, NamedTuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import make_interp_spline
from scipy.optimize import bisect

from .errors import NumericalError, ParameterError

__all__ = [
    "DraftZone",
    "FieldGrid",
    "GeneralLawParams",
    "LambdaSeriesResult",
    "RecoveredFields",
    "SlippageWarning",
    "ThinningReport",
    "VelocityProfile",
    "dissipative",
    "draft_length_S",
    "dynamic_fiber_length",
    "endpoint_speeds",
    "fiber_counts",
    "floating_speed",
    "general_law_convert",
    "inflection_speed",
    "lambda_series_from_v",
    "quasi_stationary_Bx",
    "quasi_stationary_force",
    "recover_from_lambda",
    "recover_from_q",
    "sigma_max",
    "thinning_classification",
    "velocity_profile",
]


class SlippageWarning(UserWarning):
    """Slip coefficients with alpha + beta >= 1."""


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise ParameterError(f"{name} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class DraftZone:
    """Stationary drafting configuration.

    ``alpha`` is the share of fast fibers at the entry nip and ``beta`` the
    share of slow fibers at the exit nip. A pair with ``alpha + beta >= 1``
    is accepted with a :class:`SlippageWarning`; operations that need an
    increasing speed across the field then reject it.
    """

    v0: float
    B: float
    alpha: float
    beta: float
    n0: float = 10000.0
    length: float = 1.0

    def __post_init__(self) -> None:
        _positive("v0", self.v0)
        _positive("n0", self.n0)
        _positive("length", self.length)
        if not (math.isfinite(self.B) and self.B > 1.0):
            raise ParameterError(f"limit draft B must exceed 1, got {self.B}")
        for name in ("alpha", "beta"):
            s = getattr(self, name)
            if not (0.0 <= s < 1.0):
                raise ParameterError(f"{name} must lie in [0, 1), got {s}")
        if self.alpha + self.beta >= 1.0:
            warnings.warn(
                f"alpha + beta = {self.alpha + self.beta:.3g} >= 1; the entry speed "
                "does not stay below the exit speed",
                SlippageWarning,
                stacklevel=3,
            )

    @property
    def v1(self) -> float:
        return self.B * self.v0

    @property
    def flux(self) -> float:
        return self.n0 * self.v0

    @property
    def v_in(self) -> float:
        return self.v0 + (self.v1 - self.v0) * self.alpha

    @property
    def v_out(self) -> float:
        return self.v1 - (self.v1 - self.v0) * self.beta

    @property
    def slip_valid(self) -> bool:
        return self.alpha + self.beta < 1.0


def endpoint_speeds(zone: DraftZone) -> tuple[float, float, float]:
    """(v_in, v_out, actual draft v_out / v_in)."""
    return zone.v_in, zone.v_out, zone.v_out / zone.v_in


def dissipative(zone: DraftZone, v):
    """D(v) = (q/2)(v1 - v)(v - v0)/v on [v0, v1]."""
    arr = np.asarray(v, dtype=float)
    tol = 1e-12 * zone.v1
    if np.any(arr < zone.v0 - tol) or np.any(arr > zone.v1 + tol):
        raise ParameterError(f"v must lie in [{zone.v0}, {zone.v1}]")
    out = 0.5 * zone.flux * (zone.v1 - arr) * (arr - zone.v0) / arr
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def sigma_max(B: float) -> float:
    """Largest ratio of the two fiber populations' kinetic energies, (B+1)^2/(4B)."""
    if not (math.isfinite(B) and B >= 1.0):
        raise ParameterError(f"B must be at least 1, got {B}")
    return 1.0 + (B - 1.0) ** 2 / (4.0 * B)


def inflection_speed(zone: DraftZone) -> float:
    """Speed at the inflection of the velocity curve, sqrt(v0 v1)."""
    return math.sqrt(zone.v0 * zone.v1)


def _log_Q(B: float, alpha: float, beta: float) -> float:
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise ParameterError(f"slip coefficients must lie in (0, 1), got alpha={alpha}, beta={beta}")
    return B * math.log1p(-alpha) + math.log1p(-beta) - math.log(alpha) - B * math.log(beta)


def draft_length_S(B: float, alpha: float, beta: float) -> float:
    """S = (B - 1) / (2 ln Q) with Q = (1-alpha)^B (1-beta) / (alpha beta^B)."""
    if not (math.isfinite(B) and B > 1.0):
        raise ParameterError(f"B must exceed 1, got {B}")
    lq = _log_Q(B, alpha, beta)
    if lq <= 0.0:
        raise ParameterError(
            f"slip pair alpha={alpha}, beta={beta} gives Q = {math.exp(lq):.4g} <= 1; no positive draft length"
        )
    return (B - 1.0) / (2.0 * lq)


@dataclass(frozen=True)
class VelocityProfile:
    """The stationary velocity curve of a zone and its inverse."""

    zone: DraftZone
    log_Q: float = field(repr=False)

    def _xi(self, v: np.ndarray) -> np.ndarray:
        z = self.zone
        num = np.log(v - z.v0) + (z.B - 1.0) * math.log(z.v1 - z.v0) + z.B * math.log1p(-z.alpha)
        den = math.log(z.alpha) + z.B * np.log(z.v1 - v)
        return (num - den) / self.log_Q

    def x_of_v(self, v):
        """Position of the section moving at speed v; v must lie in [v_in, v_out]."""
        z = self.zone
        arr = np.asarray(v, dtype=float)
        tol = 1e-12 * z.v_out
        if np.any(arr < z.v_in - tol) or np.any(arr > z.v_out + tol):
            raise ParameterError(f"v must lie in [{z.v_in}, {z.v_out}]")
        arr = np.clip(arr, z.v_in, z.v_out)
        xi = np.clip(self._xi(arr), 0.0, 1.0)
        out = z.length * xi
        return float(out) if out.ndim == 0 else out

    def v_of_x(self, x):
        """Speed at position x in [0, length], by bisection on the closed form."""
        z = self.zone
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > z.length):
            raise ParameterError(f"x must lie in [0, {z.length}]")
        flat = arr.ravel()
        res = np.empty_like(flat)
        # the closed form at the endpoints is 0 and 1 only up to roundoff
        xi_lo = float(self._xi(np.float64(z.v_in)))
        xi_hi = float(self._xi(np.float64(z.v_out)))
        for i, xv in enumerate(flat):
            xi = xv / z.length
            if xi <= max(xi_lo, 0.0):
                res[i] = z.v_in
            elif xi >= min(xi_hi, 1.0):
                res[i] = z.v_out
            else:
                res[i] = bisect(
                    lambda v: float(self._xi(np.float64(v))) - xi,
                    z.v_in,
                    z.v_out,
                    xtol=1e-15 * z.v_out,
                    rtol=1e-15,
                    maxiter=200,
                )
        out = res.reshape(arr.shape)
        return float(out) if out.ndim == 0 else out


def velocity_profile(zone: DraftZone) -> VelocityProfile:
    if not zone.slip_valid:
        raise ParameterError("velocity profile needs alpha + beta < 1")
    lq = _log_Q(zone.B, zone.alpha, zone.beta)
    if lq <= 0.0:
        raise ParameterError("slip pair gives Q <= 1; the profile is undefined")
    return VelocityProfile(zone, lq)


def fiber_counts(zone: DraftZone, v):
    """(n, n_slow, n_fast) in the section moving at mean speed v."""
    arr = np.asarray(v, dtype=float)
    tol = 1e-12 * zone.v1
    if np.any(arr < zone.v0 - tol) or np.any(arr > zone.v1 + tol):
        raise ParameterError(f"v must lie in [{zone.v0}, {zone.v1}]")
    q = zone.flux
    dv = zone.v1 - zone.v0
    n = q / arr
    n_slow = q * (zone.v1 - arr) / (dv * arr)
    n_fast = q * (arr - zone.v0) / (dv * arr)
    if n.ndim == 0:
        return float(n), float(n_slow), float(n_fast)
    return n, n_slow, n_fast


class ThinningReport(NamedTuple):
    kind: Literal["no_inflection", "one_inflection"]
    location: Literal["downstream", "inside", "upstream"]  # where the upper inflection ordinate falls
    n_star_hi: float
    n_star_lo: float
    n_entry: float
    n_exit: float
    beta_threshold: float
    alpha_threshold: float


def thinning_classification(zone: DraftZone) -> ThinningReport:
    """Locate the inflection ordinates of the count curve n(x) relative to the field.

    The lower ordinate always lies past the exit, so at most the upper one
    can fall inside the field.
    """
    B = zone.B
    root = math.sqrt(B * B - B + 1.0)
    z = B - root
    n1 = zone.n0 / B
    hi = n1 * (2.0 * B + 1.0 - z) / 3.0
    lo = n1 * (1.0 + z) / 3.0
    n_entry = zone.n0 / (1.0 + (B - 1.0) * zone.alpha)
    n_exit = zone.n0 / (B - (B - 1.0) * zone.beta)
    beta_thr = (B / (B - 1.0)) * (B - 2.0 + root) / (B + 1.0 + root)
    alpha_thr = (2.0 * B - 1.0 - root) / ((B - 1.0) * (B + 1.0 + root))
    if hi < n_exit:
        kind, loc = "no_inflection", "downstream"
    elif hi > n_entry:
        kind, loc = "no_inflection", "upstream"
    else:
        kind, loc = "one_inflection", "inside"
    return ThinningReport(kind, loc, hi, lo, n_entry, n_exit, beta_thr, alpha_thr)


@dataclass(frozen=True)
class GeneralLawParams:
    """Force law f = r + delta * D: Hookean density r, inverse length delta, flux q."""

    r: float
    delta: float
    q: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r) and self.r >= 0.0):
            raise ParameterError(f"r must be non-negative, got {self.r}")
        _positive("delta", self.delta)
        _positive("q", self.q)


def general_law_convert(params: GeneralLawParams, v0: float, v1: float) -> tuple[float, float, float, float]:
    """Effective far-field speeds (w0, w1) and the equivalent slip pair.

    The Hookean part widens the speed interval symmetrically in the sense
    that ``w0 * w1 = v0 * v1``; the observed nip speeds then sit inside
    ``(w0, w1)`` as if fibers slipped with the returned coefficients.
    """
    _positive("v0", v0)
    if not v1 > v0:
        raise ParameterError(f"v1 must exceed v0, got v0={v0}, v1={v1}")
    c = params.r / (params.delta * params.q)
    half = 0.5 * (v1 - v0)
    # s^2 - v0 v1 expanded so that r = 0 gives exactly (v1 - v0) / 2
    disc = math.sqrt(c * c + c * (v0 + v1) + half * half)
    w1 = c + 0.5 * (v0 + v1) + disc
    w0 = v0 * v1 / w1  # equals s - disc without cancellation
    span = w1 - w0
    return w0, w1, (v0 - w0) / span, (w1 - v1) / span


# ---------------------------------------------------------------- fields


@dataclass(frozen=True)
class FieldGrid:
    """Values on a uniform (t, x) grid; ``values[i, j]`` sits at ``(t[i], x[j])``."""

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float).ravel()
        t = np.array(self.t, dtype=float).ravel()
        vals = np.array(self.values, dtype=float)
        for name, axis in (("x", x), ("t", t)):
            if axis.size < 3:
                raise ParameterError(f"{name} needs at least 3 nodes")
            d = np.diff(axis)
            if not (d[0] > 0.0 and np.allclose(d, d[0], rtol=1e-9, atol=0.0)):
                raise ParameterError(f"{name} nodes must be uniformly spaced and increasing")
        if vals.shape != (t.size, x.size):
            raise ParameterError(f"values must have shape (len(t), len(x)) = {(t.size, x.size)}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("field values must be finite")
        for a in (x, t, vals):
            a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", vals)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @classmethod
    def sample(cls, fn: Callable, x, t) -> FieldGrid:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        T, X = np.meshgrid(t, x, indexing="ij")
        return cls(x, t, np.asarray(fn(X, T), dtype=float) * np.ones_like(X))

    def like(self, values: np.ndarray) -> FieldGrid:
        return FieldGrid(self.x, self.t, values)

    def d_dt(self) -> np.ndarray:
        return np.gradient(self.values, self.dt, axis=0, edge_order=2)

    def d_dx(self) -> np.ndarray:
        return np.gradient(self.values, self.dx, axis=1, edge_order=2)


class RecoveredFields(NamedTuple):
    lam: FieldGrid
    q: FieldGrid
    v: FieldGrid
    F: FieldGrid  # force relative to the entry section, F(0, t) = 0
    draft: np.ndarray  # v(l, t) / v(0, t)


def _second_t(values: np.ndarray, dt: float) -> np.ndarray:
    # three-point centre stencil, four-point one-sided stencils at both ends
    out = np.empty_like(values)
    out[1:-1] = values[2:] - 2.0 * values[1:-1] + values[:-2]
    out[0] = 2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]
    out[-1] = 2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]
    return out / (dt * dt)


def _force(q: FieldGrid, v: np.ndarray, q_t: np.ndarray) -> np.ndarray:
    qv = q.values * v
    flux_rate = cumulative_trapezoid(q_t, dx=q.dx, axis=1, initial=0.0)
    return qv - qv[:, :1] + flux_rate


def _check_flux(q: np.ndarray) -> None:
    if np.any(q <= 0.0):
        i, j = np.unravel_index(int(np.argmin(q)), q.shape)
        raise NumericalError(
            f"recovered mass flux is non-positive ({q[i, j]:.4g}) at grid node (t={i}, x={j})",
            module="drafting",
            parameter="q",
        )


def recover_from_lambda(lam: FieldGrid, q_in: Callable[[np.ndarray], np.ndarray]) -> RecoveredFields:
    """Flux, speed and force from a density field and the entry flux q_in(t)."""
    if np.any(lam.values <= 0.0):
        raise ParameterError("density must be positive everywhere")
    q_entry = np.asarray(q_in(lam.t), dtype=float) * np.ones_like(lam.t)
    q = q_entry[:, None] - cumulative_trapezoid(lam.d_dt(), dx=lam.dx, axis=1, initial=0.0)
    _check_flux(q)
    qg = lam.like(q)
    v = q / lam.values
    # differentiate the density twice rather than the recovered flux once,
    # which keeps the force second-order accurate up to the time boundaries
    q_t = np.gradient(q_entry, lam.dt, edge_order=2)[:, None] - cumulative_trapezoid(
        _second_t(lam.values, lam.dt), dx=lam.dx, axis=1, initial=0.0
    )
    F = _force(qg, v, q_t)
    return RecoveredFields(lam, qg, lam.like(v), lam.like(F), v[:, -1] / v[:, 0])


def recover_from_q(q: FieldGrid, lambda0: Callable[[np.ndarray], np.ndarray]) -> RecoveredFields:
    """Density, speed and force from a flux field and the initial density lambda0(x)."""
    if np.any(q.values <= 0.0):
        raise NumericalError("mass flux must be positive everywhere", module="drafting", parameter="q")
    lam0 = np.asarray(lambda0(q.x), dtype=float) * np.ones_like(q.x)
    lam = lam0[None, :] - cumulative_trapezoid(q.d_dx(), dx=q.dt, axis=0, initial=0.0)
    if np.any(lam <= 0.0):
        raise NumericalError("recovered density is non-positive", module="drafting", parameter="lambda0")
    v = q.values / lam
    F = _force(q, v, q.d_dt())
    return RecoveredFields(q.like(lam), q, q.like(v), q.like(F), v[:, -1] / v[:, 0])


class LambdaSeriesResult(NamedTuple):
    lam: FieldGrid
    terms_used: int
    term_norms: tuple[float, ...]
    diverging: bool
    residual: float  # max |lambda_t + (lambda v)_x| over the grid


def lambda_series_from_v(
    v: FieldGrid,
    phi: Callable[[np.ndarray], np.ndarray],
    terms: int,
    *,
    tol: float = 1e-12,
) -> LambdaSeriesResult:
    """Density from a speed field and the entry density phi(t) by iterated quadrature.

    The zeroth term carries the entry density along a frozen speed field;
    each further term corrects for the time variation of the previous one.
    Summation stops early when a term falls below ``tol`` relative to the
    zeroth term, and is cut off (with ``diverging`` set) as soon as a term
    outgrows its predecessor after the first correction.
    """
    if int(terms) != terms or terms < 1:
        raise ParameterError(f"terms must be a positive integer, got {terms}")
    if np.any(v.values <= 0.0):
        raise ParameterError("speed must be positive everywhere")
    entry = np.asarray(phi(v.t), dtype=float) * np.ones_like(v.t)
    if np.any(entry <= 0.0):
        raise ParameterError("entry density phi must be positive")
    vel = v.values

    def d_dt(f: np.ndarray) -> np.ndarray:
        # repeated one-sided differences amplify edge errors term after term;
        # a quintic interpolant keeps the nested time derivatives smooth
        return make_interp_spline(v.t, f, k=5, axis=0).derivative()(v.t)

    term = entry[:, None] * vel[:, :1] / vel
    total = term.copy()
    norms = [float(np.max(np.abs(term)))]
    diverging = False
    used = 1
    for k in range(1, int(terms)):
        term = -cumulative_trapezoid(d_dt(term), dx=v.dx, axis=1, initial=0.0) / vel
        size = float(np.max(np.abs(term)))
        norms.append(size)
        if size <= tol * norms[0]:
            break
        if k >= 2 and size > norms[-2]:
            diverging = True
            break
        total += term
        used = k + 1
    lam = v.like(total)
    resid = d_dt(total) + np.gradient(total * vel, v.dx, axis=1, edge_order=2)
    return LambdaSeriesResult(lam, used, tuple(norms), diverging, float(np.max(np.abs(resid))))


# ---------------------------------------------------------------- floating fibers


def _floating_fraction(B: float, target: float) -> float:
    # solve B ln(1-u) - ln(u) = target for u in (0, 1), in the logit s of u
    def h(s: float) -> float:
        return -B * float(np.logaddexp(0.0, s)) + float(np.logaddexp(0.0, -s)) - target

    span = abs(target) + 40.0
    s = bisect(h, -span, span, xtol=1e-14, rtol=1e-15, maxiter=400)
    return 1.0 / (1.0 + math.exp(-s)) if s > -700.0 else math.exp(s)


def floating_speed(vin: float, vout: float, B: float, kappa: float, x: float, l: float = 1.0) -> float:
    """Speed w of a fiber held by neither nip at position x of a field of length l.

    Solves ``(vout - w)^B / (w - vin) = (vout - vin)^(B-1) ((l - x)/x)^(kappa B)``.
    Writing ``w = vin + (vout - vin) u`` removes both speeds from the equation.
    """
    _positive("vin", vin)
    if not vout > vin:
        raise ParameterError(f"vout must exceed vin, got vin={vin}, vout={vout}")
    if not (math.isfinite(B) and B >= 1.0):
        raise ParameterError(f"B must be at least 1, got {B}")
    if not (math.isfinite(kappa) and kappa > 0.0):
        raise ParameterError(f"kappa must be positive, got {kappa}")
    _positive("l", l)
    if not 0.0 <= x <= l:
        raise ParameterError(f"x must lie in [0, {l}], got {x}")
    if x == 0.0:
        return vin
    if x == l:
        return vout
    u = _floating_fraction(B, kappa * B * (math.log(l - x) - math.log(x)))
    return vin + (vout - vin) * u


def dynamic_fiber_length(B: float, kappa: float, l: float = 1.0) -> float:
    """S = (B - 1) l / (2 kappa B)."""
    if not (math.isfinite(B) and B >= 1.0):
        raise ParameterError(f"B must be at least 1, got {B}")
    _positive("kappa", kappa)
    _positive("l", l)
    return (B - 1.0) * l / (2.0 * kappa * B)


def quasi_stationary_Bx(B: float, kappa: float, xi: float) -> float:
    """Local draft v(x, t)/v(0, t) when both nip speeds follow one time factor."""
    if not (math.isfinite(B) and B >= 1.0):
        raise ParameterError(f"B must be at least 1, got {B}")
    if not 0.0 <= xi <= 1.0:
        raise ParameterError(f"xi must lie in [0, 1], got {xi}")
    if B == 1.0:
        return 1.0
    return floating_speed(1.0, B, B, kappa, xi, 1.0)


def quasi_stationary_force(
    q: Callable[[float], float],
    dqdt: Callable[[float], float],
    v: Callable[[float, float], float],
    x: float,
    t: float,
) -> float:
    """F(x, t) - F(0, t) for a flux uniform in x: q [v(x, t) - v(0, t)] + q' x."""
    return float(q(t)) * (float(v(x, t)) - float(v(0.0, t))) + float(dqdt(t)) * x
