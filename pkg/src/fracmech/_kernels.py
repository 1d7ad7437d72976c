"""Hot loops, each in a compiled and a vectorised numpy flavour.

Public names at the bottom of the module point at whichever flavour
:mod:`fracmech._accel` selected. Both flavours stay importable so the
benchmark and the equivalence tests can call them side by side.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, jit

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_EPS = np.finfo(float).eps


def _lanczos_sum(z: float) -> float:
    # z is the shifted argument x - 1 with x >= 0.5
    a = _LANCZOS[0]
    for i in range(1, 9):
        a += _LANCZOS[i] / (z + i)
    return a


def _gamma_positive(x: float) -> float:
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # split the power so t**(z + 1/2) does not overflow before exp(-t) pulls it back
    half = t ** (0.5 * (z + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * _lanczos_sum(z)


def gamma_scalar(x: float) -> float:
    """Gamma function; returns ``inf`` at non-positive integers."""
    if x <= 0.0 and x == math.floor(x):
        return math.inf
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * _gamma_positive(1.0 - x))
    return _gamma_positive(x)


def rgamma_scalar(x: float) -> float:
    """Reciprocal gamma, an entire function that vanishes at the poles."""
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    if x < 0.5:
        return math.sin(math.pi * x) * _gamma_positive(1.0 - x) / math.pi
    if x > 171.0:
        return math.exp(-lgamma_positive(x))
    return 1.0 / _gamma_positive(x)


def _lgamma_upper(x: float) -> float:
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def lgamma_positive(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - _lgamma_upper(1.0 - x)
    return _lgamma_upper(x)


_lanczos_sum = jit(_lanczos_sum)
_gamma_positive = jit(_gamma_positive)
_lgamma_upper = jit(_lgamma_upper)
gamma_scalar = jit(gamma_scalar)
lgamma_positive = jit(lgamma_positive)
rgamma_scalar = jit(rgamma_scalar)


def _alternating_series_core(z, beta, tol, max_terms):
    # sum_k (-z)^k / Gamma(beta k + 1) with Neumaier compensation.
    # Returns (value, first omitted term, largest term, terms used, converged).
    if z == 0.0:
        return 1.0, 0.0, 1.0, 1, True
    logz = math.log(z)
    s = 0.0
    comp = 0.0
    largest = 0.0
    prev = math.inf
    for k in range(max_terms):
        logmag = k * logz - lgamma_positive(beta * k + 1.0)
        if logmag > 709.0:
            # the next term overflows; the sum is meaningless in double precision
            return s + comp, math.inf, math.inf, k, False
        mag = math.exp(logmag)
        if k > 0 and mag < prev and mag <= tol * max(abs(s + comp), 1e-300):
            return s + comp, mag, largest, k, True
        term = mag if k % 2 == 0 else -mag
        t = s + term
        if abs(s) >= abs(term):
            comp += (s - t) + term
        else:
            comp += (term - t) + s
        s = t
        if mag > largest:
            largest = mag
        prev = mag
    return s + comp, prev, largest, max_terms, False


alternating_series_core = jit(_alternating_series_core)


# --- Grunwald-Letnikov convolution -------------------------------------------


def gl_weights(alpha: float, n: int) -> np.ndarray:
    """First ``n`` Grunwald-Letnikov weights (-1)^j binom(alpha, j)."""
    w = np.empty(n)
    if n == 0:
        return w
    w[0] = 1.0
    if n > 1:
        j = np.arange(1, n, dtype=float)
        w[1:] = np.cumprod(1.0 - (alpha + 1.0) / j)
    return w


def _gl_convolve_loop(w, g):
    n = g.shape[0]
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(i + 1):
            acc += w[j] * g[i - j]
        out[i] = acc
    return out


gl_convolve_numba = jit(_gl_convolve_loop)


def gl_convolve_numpy(w: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    return np.convolve(w[:n], g)[:n]


# --- Laplace-type sums: f(T_i) = sum_j c_j exp(-r_j T_i) ---------------------


def _exp_sum_loop(T, r, c):
    out = np.zeros(T.shape[0])
    for i in range(T.shape[0]):
        acc = 0.0
        Ti = T[i]
        for j in range(r.shape[0]):
            e = r[j] * Ti
            if e < 745.0:
                acc += c[j] * math.exp(-e)
        out[i] = acc
    return out


exp_sum_numba = jit(_exp_sum_loop)


# rows per block in the numpy paths, so the dense block stays near 32 MB
_BLOCK_ELEMENTS = 1 << 22


def _block_rows(cols: int) -> int:
    return max(1, _BLOCK_ELEMENTS // max(cols, 1))


def exp_sum_numpy(T: np.ndarray, r: np.ndarray, c: np.ndarray) -> np.ndarray:
    out = np.empty(T.shape[0])
    step = _block_rows(r.shape[0])
    with np.errstate(under="ignore"):
        for i in range(0, T.shape[0], step):
            out[i : i + step] = np.exp(-np.outer(T[i : i + step], r)) @ c
    return out


# --- lower-triangular Toeplitz forward substitution --------------------------


def _toeplitz_solve_loop(V, W):
    n = W.shape[0]
    K = np.zeros(n)
    v0 = V[0]
    for i in range(n):
        acc = W[i]
        for j in range(i):
            acc -= V[i - j] * K[j]
        K[i] = acc / v0
    return K


toeplitz_solve_numba = jit(_toeplitz_solve_loop)


def toeplitz_solve_numpy(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    n = W.shape[0]
    K = np.zeros(n)
    v0 = V[0]
    for i in range(n):
        # dot with the reversed prefix of V is the convolution tail
        K[i] = (W[i] - np.dot(V[i:0:-1], K[:i])) / v0
    return K


# --- modal sine sums: y(x_i) = sum_k c_k sin(k pi x_i / l) -------------------


def _sine_sum_loop(x, c, length):
    out = np.zeros(x.shape[0])
    for i in range(x.shape[0]):
        theta = math.pi * x[i] / length
        acc = 0.0
        comp = 0.0
        for k in range(c.shape[0]):
            term = c[k] * math.sin((k + 1) * theta)
            t = acc + term
            if abs(acc) >= abs(term):
                comp += (acc - t) + term
            else:
                comp += (term - t) + acc
            acc = t
        out[i] = acc + comp
    return out


sine_sum_numba = jit(_sine_sum_loop)


def sine_sum_numpy(x: np.ndarray, c: np.ndarray, length: float) -> np.ndarray:
    k = np.arange(1, c.shape[0] + 1, dtype=float)
    theta = np.pi * x / length
    out = np.empty(x.shape[0])
    step = _block_rows(k.size)
    for i in range(0, x.shape[0], step):
        out[i : i + step] = np.sin(np.outer(theta[i : i + step], k)) @ c
    return out


if USE_NUMBA:
    gl_convolve = gl_convolve_numba
    exp_sum = exp_sum_numba
    toeplitz_solve = toeplitz_solve_numba
    sine_sum = sine_sum_numba
else:
    gl_convolve = gl_convolve_numpy
    exp_sum = exp_sum_numpy
    toeplitz_solve = toeplitz_solve_numpy
    sine_sum = sine_sum_numpy
