"""Modal dynamics of viscoelastic strings, discs and membranes.

The string obeys ``rho u_tt + H u_t - eta u_xxt - M u_xx = w(x, t)`` with fixed
ends. Each sine mode ``sin(m pi x / l)`` is a damped oscillator whose
characteristic roots are ``q = -sigma_m +- nu_m``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import BracketError, NumericalError, ParameterError

__all__ = [
    "IdentifiedParameters",
    "ModalRoot",
    "RelaxCubicModel",
    "StringModel",
    "decrement_spectrum",
    "forced_response",
    "gravity_loads",
    "free_response",
    "heavy_string_equilibrium",
    "identify_viscoelastic",
    "membrane_count",
    "membrane_rect_modes",
    "modal_amplitude",
    "modal_roots",
    "periodic_fundamental",
    "relaxing_mode_roots",
    "sine_coefficients",
    "solve_cubic",
    "torsion_residual",
    "torsional_eigenvalues",
]


@dataclass(frozen=True)
class StringModel:
    length: float
    density: float
    viscosity: float
    stiffness: float  # M = tension + shear modulus
    ext_friction: float = 0.0

    def __post_init__(self) -> None:
        for name in ("length", "density", "stiffness"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be positive, got {v}")
        for name in ("viscosity", "ext_friction"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ParameterError(f"{name} must be non-negative, got {v}")

    def wavenumber_sq(self, m: int) -> float:
        return (m * math.pi / self.length) ** 2


class ModalRoot(NamedTuple):
    mode: int
    q1: complex  # -sigma + nu
    q2: complex  # -sigma - nu
    sigma: float
    nu: complex


def modal_roots(model: StringModel, m: int) -> ModalRoot:
    """Roots of rho q^2 + (k eta + H) q + k M = 0 with k = (m pi / l)^2."""
    if int(m) != m or m < 1:
        raise ParameterError(f"mode number must be a positive integer, got {m}")
    k = model.wavenumber_sq(m)
    sigma = (k * model.viscosity + model.ext_friction) / (2.0 * model.density)
    omega_sq = k * model.stiffness / model.density
    nu = cmath.sqrt(sigma * sigma - omega_sq)
    if nu.imag == 0.0 and nu.real > 0.0:
        # both roots real; take the small one from the product to avoid cancellation
        q2 = complex(-sigma - nu.real)
        q1 = complex(omega_sq / q2.real)
    else:
        q1, q2 = -sigma + nu, -sigma - nu
    return ModalRoot(int(m), q1, q2, sigma, nu)


def decrement_spectrum(model: StringModel, count: int) -> np.ndarray:
    """sigma_m = (m^2 pi^2 eta / l^2 + H) / (2 rho) for m = 1..count."""
    if int(count) != count or count < 2:
        raise ParameterError(f"count must be an integer >= 2, got {count}")
    m = np.arange(1, count + 1)
    return ((m * math.pi / model.length) ** 2 * model.viscosity + model.ext_friction) / (2.0 * model.density)


def _damped_pair(sigma: float, nu: complex, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """exp(-sigma t) cosh(nu t) and exp(-sigma t) sinh(nu t)/nu, free of overflow.

    Both exponents ``-sigma +- nu`` have non-positive real part for a passive
    string, so the two exponentials are formed separately.
    """
    z = nu * t
    small = np.abs(z) < 1e-3
    c = np.empty(t.shape, dtype=complex)
    s = np.empty(t.shape, dtype=complex)
    damp = np.exp(-sigma * t[small])
    zs = z[small]
    c[small] = damp * (1.0 + zs * zs / 2.0 + zs**4 / 24.0)
    s[small] = damp * t[small] * (1.0 + zs * zs / 6.0 + zs**4 / 120.0)
    big = ~small
    tb = t[big]
    ep = np.exp((nu - sigma) * tb)
    em = np.exp((-nu - sigma) * tb)
    c[big] = 0.5 * (ep + em)
    s[big] = (ep - em) / (2.0 * nu)
    return c, s


def modal_amplitude(model: StringModel, m: int, A: float, B: float, t) -> np.ndarray:
    """Free amplitude of mode m with a(0) = A and a'(0) = B.

    Written as ``exp(-sigma t) [A (cosh(nu t) + sigma S) + B S]`` with
    ``S = sinh(nu t)/nu``, which covers equal roots without a special case.
    """
    root = modal_roots(model, m)
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel()
    C, S = _damped_pair(root.sigma, root.nu, flat)
    a = A * (C + root.sigma * S) + B * S
    return a.real.reshape(t.shape)


def _gauss_grid(length: float, panels: int, per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    u, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(0.0, length, panels + 1)
    half = 0.5 * np.diff(edges)
    x = (half[:, None] * u + (0.5 * (edges[1:] + edges[:-1]))[:, None]).ravel()
    return x, (half[:, None] * w).ravel()


def sine_coefficients(f: Callable, length: float, modes: int, nodes_per_mode: int = 64) -> np.ndarray:
    """(2/l) int_0^l f(x) sin(m pi x / l) dx for m = 1..modes by composite Gauss quadrature."""
    x, w = _gauss_grid(length, modes, nodes_per_mode)
    fx = np.asarray(f(x), dtype=float) * w
    m = np.arange(1, modes + 1)
    return (2.0 / length) * (np.sin(np.outer(m, x) * math.pi / length) @ fx)


def free_response(
    model: StringModel,
    Phi: Callable,
    phi: Callable,
    x,
    t: float,
    modes: int = 64,
):
    """Displacement from initial shape Phi and initial velocity phi, no load."""
    if t < 0.0:
        raise ParameterError(f"t must be non-negative, got {t}")
    A = sine_coefficients(Phi, model.length, modes)
    B = sine_coefficients(phi, model.length, modes)
    amps = np.array([modal_amplitude(model, m, A[m - 1], B[m - 1], t) for m in range(1, modes + 1)])
    return _synthesise(model, amps, x)


def _synthesise(model: StringModel, amps: np.ndarray, x):
    xs = np.asarray(x, dtype=float)
    m = np.arange(1, amps.size + 1)
    out = np.sin(np.outer(np.atleast_1d(xs), m) * math.pi / model.length) @ amps
    return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


def _green(root: ModalRoot, s: float) -> float:
    # (e^{q1 s} - e^{q2 s}) / (q1 - q2), equal to s e^{q s} for a double root
    return float(_damped_pair(root.sigma, root.nu, np.array([s]))[1][0].real)


def forced_response(
    model: StringModel,
    w: Sequence[Callable[[float], float]],
    x,
    t: float,
    modes: int | None = None,
    *,
    Phi: Callable | None = None,
    phi: Callable | None = None,
    rel_tol: float = 1e-10,
):
    """Displacement under modal loads w_m(t), m = 1..len(w), plus optional initial data.

    Each load enters through the Duhamel integral
    ``(1/rho) int_0^t G_m(t - s) w_m(s) ds`` with the modal impulse response
    ``G_m``. Modes beyond ``len(w)`` carry no load.
    """
    if t < 0.0:
        raise ParameterError(f"t must be non-negative, got {t}")
    n = len(w) if modes is None else int(modes)
    if n < 1:
        raise ParameterError("at least one mode is required")
    amps = np.zeros(n)
    if Phi is not None or phi is not None:
        zero = lambda y: np.zeros_like(y)  # noqa: E731
        A = sine_coefficients(Phi or zero, model.length, n)
        B = sine_coefficients(phi or zero, model.length, n)
        amps += np.array([modal_amplitude(model, m, A[m - 1], B[m - 1], t) for m in range(1, n + 1)])
    for m in range(1, min(n, len(w)) + 1):
        root = modal_roots(model, m)
        wm = w[m - 1]
        if t == 0.0:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(
                lambda s: _green(root, t - s) * float(wm(s)), 0.0, t, limit=2000, epsrel=rel_tol, epsabs=1e-14
            )
        if not math.isfinite(val) or err > max(1e-9, 100.0 * rel_tol * abs(val)):
            raise NumericalError(
                f"Duhamel integral for mode {m} reached only {err:.2g}",
                module="modal_dynamics",
                parameter="w",
            )
        amps[m - 1] += val / model.density
    return _synthesise(model, amps, x)


def heavy_string_equilibrium(model: StringModel, g: float, x):
    """Sag of a viscoelastic string under its own weight: a parabola."""
    if not g > 0.0:
        raise ParameterError(f"g must be positive, got {g}")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0.0) or np.any(xs > model.length):
        raise ParameterError("x must lie in [0, l]")
    out = -model.density * g * xs * (model.length - xs) / (2.0 * model.stiffness)
    return float(out) if xs.ndim == 0 else out


def gravity_loads(model: StringModel, g: float, modes: int) -> list[Callable[[float], float]]:
    """Constant modal loads for the uniform weight -rho g."""
    coef = sine_coefficients(lambda y: np.full_like(y, -model.density * g), model.length, modes)
    return [(lambda s, c=c: c) for c in coef]


class IdentifiedParameters(NamedTuple):
    viscosity: float
    shear_modulus: float
    physical: bool


def identify_viscoelastic(
    sigma1: float, nu1: float, density: float, length: float, tension: float, ext_friction: float = 0.0
) -> IdentifiedParameters:
    """Viscosity and shear modulus from the measured fundamental decrement and frequency.

    ``physical`` is False when either output comes out negative; the values
    are still returned so the caller can inspect them.
    """
    if not (density > 0.0 and length > 0.0):
        raise ParameterError("density and length must be positive")
    if not (sigma1 > 0.0 and nu1 > 0.0):
        raise ParameterError("sigma1 and nu1 must be positive")
    scale = length**2 / math.pi**2
    eta = (2.0 * density * sigma1 - ext_friction) * scale
    mu = density * scale * (nu1**2 + sigma1**2) - tension
    # allow rounding-level negatives from exactly zero inputs
    physical = eta >= -1e-12 * (2.0 * density * sigma1 + ext_friction) * scale and mu >= -1e-12 * (
        density * scale * (nu1**2 + sigma1**2) + abs(tension)
    )
    if not physical:
        warnings.warn(f"non-physical identification: eta={eta:.4g}, mu={mu:.4g}", RuntimeWarning, stacklevel=2)
    return IdentifiedParameters(eta, mu, physical)


def periodic_fundamental(model: StringModel) -> bool:
    """True when the fundamental oscillates: pi^2 M/(rho l^2) exceeds sigma_1^2."""
    root = modal_roots(model, 1)
    return model.wavenumber_sq(1) * model.stiffness / model.density > root.sigma**2


# --- twisting rod with an end disc --------------------------------------------


def torsion_residual(s: float, K: float, length: float) -> float:
    """s sin(s l) - K cos(s l); zero exactly where s = K cot(s l)."""
    return s * math.sin(s * length) - K * math.cos(s * length)


def _branch_root(k: int, K: float, length: float, eps: float) -> float:
    # The residual has no poles, so the bracket may close in on the branch
    # ends; a heavy disc puts the root within eps of the left end.
    lo, hi = (k - 1) * math.pi / length, k * math.pi / length
    for e in (eps, eps * 1e-7, 0.0):
        a, b = lo + e, hi - e
        fa, fb = torsion_residual(a, K, length), torsion_residual(b, K, length)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb < 0.0:
            return optimize.brentq(
                torsion_residual, a, b, args=(K, length), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200
            )
    raise BracketError(f"no sign change on branch {k} of the cotangent", module="modal_dynamics", parameter="K")


def torsional_eigenvalues(
    delta: float, rho: float, rho0: float, d: float, length: float, count: int
) -> np.ndarray:
    """First ``count`` positive roots s = sqrt(kappa) of s = K cot(s l), K = delta^4 rho/(rho0 d).

    One root lies on each branch ((k-1) pi/l, k pi/l) of the cotangent.
    """
    for name, v in (("delta", delta), ("rho", rho), ("rho0", rho0), ("d", d), ("length", length)):
        if not (math.isfinite(v) and v > 0.0):
            raise ParameterError(f"{name} must be positive, got {v}")
    if int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count}")
    K = delta**4 * rho / (rho0 * d)
    eps = 1e-9 * math.pi / length
    roots = np.empty(count)
    for k in range(1, count + 1):
        roots[k - 1] = _branch_root(k, K, length, eps)
    return roots


# --- rectangular (square) membrane --------------------------------------------


def membrane_rect_modes(side: float, count: int) -> list[tuple[float, int, int]]:
    """Lowest ``count`` eigenvalues (m^2 + n^2) pi^2 / a^2 with their index pairs.

    Pairs (m, n) and (n, m) are distinct modes and both appear.
    """
    if not side > 0.0:
        raise ParameterError(f"side must be positive, got {side}")
    if int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count}")
    # every one of the lowest `count` modes has m, n <= count
    limit = int(math.isqrt(count)) + 2
    while True:
        pairs = [(m * m + n * n, m, n) for m in range(1, limit + 1) for n in range(1, limit + 1)]
        pairs.sort()
        chosen = pairs[:count]
        # stop once no excluded pair beyond the box could undercut the largest chosen value
        if chosen[-1][0] < (limit + 1) ** 2 + 1:
            break
        limit *= 2
    scale = math.pi**2 / side**2
    return [(k * scale, m, n) for k, m, n in chosen]


def membrane_count(side: float, bound: float) -> int:
    """Number of eigenvalues not exceeding ``bound``."""
    if not side > 0.0:
        raise ParameterError(f"side must be positive, got {side}")
    r2 = bound * side**2 / math.pi**2
    if r2 < 2.0:
        return 0
    top = math.isqrt(int(r2))
    m = np.arange(1, top + 1)
    # for each m, count n >= 1 with n^2 <= r2 - m^2
    rest = r2 - m.astype(float) ** 2
    n_max = np.floor(np.sqrt(np.clip(rest, 0.0, None)) + 1e-12).astype(int)
    return int(np.sum(np.clip(n_max, 0, None)))


# --- relaxation-extended characteristic cubic ---------------------------------


@dataclass(frozen=True)
class RelaxCubicModel:
    density: float
    relax_rate: float
    viscosity: float
    stiffness: float
    eigenvalue: float

    def __post_init__(self) -> None:
        for name in ("density", "relax_rate", "viscosity", "stiffness", "eigenvalue"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be positive, got {v}")

    @property
    def aftereffect_rate(self) -> float:
        return self.stiffness / self.viscosity

    def coefficients(self) -> tuple[float, float, float, float]:
        return (
            self.density / self.relax_rate,
            self.density,
            self.eigenvalue * self.viscosity,
            self.eigenvalue * self.stiffness,
        )


def _polish(coeffs: tuple[float, float, float, float], x: complex, steps: int = 3) -> complex:
    a, b, c, d = coeffs
    for _ in range(steps):
        f = ((a * x + b) * x + c) * x + d
        df = (3.0 * a * x + 2.0 * b) * x + c
        if df == 0:
            break
        step = f / df
        x_new = x - step
        if abs(((a * x_new + b) * x_new + c) * x_new + d) >= abs(f):
            break
        x = x_new
    return x


def solve_cubic(a: float, b: float, c: float, d: float) -> list[complex]:
    """Roots of a x^3 + b x^2 + c x + d with real coefficients.

    Closed form (trigonometric for three real roots, Cardano otherwise)
    followed by a guarded Newton polish on the original polynomial. Real
    roots come first in increasing order, then the complex pair with
    non-negative imaginary part first.
    """
    if a == 0.0:
        raise ParameterError("leading coefficient must be nonzero")
    B, C, D = b / a, c / a, d / a
    shift = B / 3.0
    p = C - B * B / 3.0
    q = 2.0 * B**3 / 27.0 - B * C / 3.0 + D
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    coeffs = (a, b, c, d)
    if disc <= 0.0:
        if p == 0.0:
            ys = [0.0, 0.0, 0.0]
        else:
            r = 2.0 * math.sqrt(-p / 3.0)
            arg = max(-1.0, min(1.0, 3.0 * q / (p * r)))
            phi = math.acos(arg) / 3.0
            ys = [r * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
        roots = sorted(_polish(coeffs, complex(y - shift)).real for y in ys)
        return [complex(x) for x in roots]
    sq = math.sqrt(disc)
    u = -q / 2.0 - math.copysign(sq, q) if q != 0.0 else sq
    u = math.copysign(abs(u) ** (1.0 / 3.0), u)
    y = u - p / (3.0 * u) if u != 0.0 else 0.0
    x1 = _polish(coeffs, complex(y - shift)).real
    # deflate: x^2 + e x + f with e = B + x1, f = -D / x1 (or C + x1 e when x1 = 0)
    e = B + x1
    f = -D / x1 if x1 != 0.0 else C + x1 * e
    disc2 = e * e / 4.0 - f
    if disc2 >= 0.0:
        s = math.sqrt(disc2)
        r1 = -e / 2.0 - math.copysign(s, e) if e != 0 else s
        r2 = f / r1 if r1 != 0 else -s
        roots = sorted([x1, _polish(coeffs, complex(r1)).real, _polish(coeffs, complex(r2)).real])
        return [complex(x) for x in roots]
    z = complex(-e / 2.0, math.sqrt(-disc2))
    z = _polish(coeffs, z)
    z = complex(z.real, abs(z.imag))
    return [complex(x1), z, z.conjugate()]


def relaxing_mode_roots(model: RelaxCubicModel) -> list[complex]:
    """Roots of (rho/r) x^3 + rho x^2 + lambda eta x + lambda M = 0."""
    return solve_cubic(*model.coefficients())
