"""Recovering a hereditary kernel from motion data.

The kernel ``K`` enters a first-kind Volterra equation
``int_0^t V(t - s) K(s) ds = W(t)``. On a uniform grid with step ``tau`` it
becomes the lower-triangular Toeplitz system ``sum_j V_{i-j} K_j = W_i`` with
``V_j = tau V(j tau)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import NumericalError, ParameterError, SingularSystemError

__all__ = [
    "DiscretizedVolterra",
    "PronyModel",
    "convolve_kernel",
    "discretize",
    "prony_fit",
    "regularize_by_differentiation",
    "solve_kernel",
]


@dataclass(frozen=True)
class DiscretizedVolterra:
    step: float
    V: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    order: int = 0  # number of time differentiations applied to the original pair

    def __post_init__(self) -> None:
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise ParameterError(f"step must be positive, got {self.step}")
        V = np.array(self.V, dtype=float).ravel()
        W = np.array(self.W, dtype=float).ravel()
        if V.size != W.size or V.size < 2:
            raise ParameterError("V and W must have equal length of at least 2")
        if not (np.all(np.isfinite(V)) and np.all(np.isfinite(W))):
            raise ParameterError("V and W must be finite")
        V.setflags(write=False)
        W.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "W", W)


def discretize(V_fn: Callable, W_fn: Callable, step: float, n: int) -> DiscretizedVolterra:
    """Sample V and W on ``j * step``, j = 0..n-1, with V_j scaled by the step."""
    t = step * np.arange(n)
    return DiscretizedVolterra(step, step * np.asarray(V_fn(t), dtype=float), np.asarray(W_fn(t), dtype=float))


def convolve_kernel(V: np.ndarray, K: np.ndarray) -> np.ndarray:
    """W_i = sum_{j <= i} V_{i-j} K_j."""
    V = np.asarray(V, dtype=float)
    K = np.asarray(K, dtype=float)
    return np.convolve(V, K)[: K.size]


def solve_kernel(sys: DiscretizedVolterra, *, rel_floor: float = 1e-13) -> np.ndarray:
    """Forward substitution for K_j.

    For a system sampled from continuous V and W, K_j approximates K(j tau)
    to first order for j >= 1. The first sample is W_0 / V_0, which is zero
    whenever W(0) = 0, and carries no information about K(0).

    A leading coefficient that vanishes relative to the rest of V means the
    original V(x, 0) is zero; that case is rejected with
    :class:`SingularSystemError`, and :func:`regularize_by_differentiation`
    produces a solvable system.
    """
    scale = float(np.max(np.abs(sys.V)))
    if scale == 0.0 or abs(sys.V[0]) <= rel_floor * scale:
        raise SingularSystemError(
            "V_0 vanishes; differentiate the equation in t before solving "
            "(see regularize_by_differentiation)",
            module="kernel_id",
            parameter="V",
        )
    return _kernels.toeplitz_solve(np.ascontiguousarray(sys.V), np.ascontiguousarray(sys.W))


def _derivative(fn: Callable, order: int, h: float) -> Callable:
    # fourth-order central difference applied `order` times
    if order == 0:
        return fn
    inner = _derivative(fn, order - 1, h)

    def d(t):
        t = np.asarray(t, dtype=float)
        return (-inner(t + 2 * h) + 8 * inner(t + h) - 8 * inner(t - h) + inner(t - 2 * h)) / (12.0 * h)

    return d


def regularize_by_differentiation(
    V_fn: Callable,
    W_fn: Callable,
    max_order: int,
    *,
    step: float,
    n: int,
    derivatives: Sequence[tuple[Callable, Callable]] | None = None,
    rel_floor: float = 1e-8,
) -> DiscretizedVolterra:
    """Differentiate the Volterra equation in t until the new V(0) is nonzero.

    Differentiating ``int_0^t V(t-s) K(s) ds = W(t)`` gives
    ``V(0) K(t) + int_0^t V'(t-s) K(s) ds = W'(t)``; while V(0) = 0 the first
    term drops and the equation keeps its form with (V', W'). ``derivatives``
    may supply exact pairs ``(V^(k), W^(k))`` for k = 1, 2, ...; otherwise
    fourth-order central differences are used (V and W must then accept
    slightly negative times, for instance through their natural extension).
    """
    if int(max_order) != max_order or max_order < 0:
        raise ParameterError(f"max_order must be a non-negative integer, got {max_order}")
    h = 1e-3 * step if derivatives is None else 0.0
    scale = max(1.0, float(np.max(np.abs(np.asarray(V_fn(step * np.arange(n)), dtype=float)))))
    for k in range(max_order + 1):
        if k == 0:
            Vk, Wk = V_fn, W_fn
        elif derivatives is not None and len(derivatives) >= k:
            Vk, Wk = derivatives[k - 1]
        else:
            Vk, Wk = _derivative(V_fn, k, max(h, 1e-4)), _derivative(W_fn, k, max(h, 1e-4))
        v0 = float(np.asarray(Vk(np.array([0.0])))[0])
        if abs(v0) > rel_floor * scale:
            sys = discretize(Vk, Wk, step, n)
            return DiscretizedVolterra(sys.step, sys.V, sys.W, order=k)
    raise SingularSystemError(
        f"V and its first {max_order} time derivatives vanish at t = 0",
        module="kernel_id",
        parameter="max_order",
    )


class PronyModel(NamedTuple):
    amplitudes: np.ndarray
    exponents: np.ndarray  # complex in general; real for a clean fit
    rms: float
    stable: bool  # every exponent has negative real part
    real: bool  # every exponent is real

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        vals = np.exp(np.multiply.outer(t, self.exponents)) @ self.amplitudes
        return vals.real if self.real else vals

    def to_json_obj(self) -> dict:
        return {
            "terms": [
                {"A": _jsonable(a), "alpha": _jsonable(al)} for a, al in zip(self.amplitudes, self.exponents)
            ],
            "rms": self.rms,
        }


def _jsonable(z: complex) -> float | list[float]:
    z = complex(z)
    return z.real if z.imag == 0.0 else [z.real, z.imag]


def _prediction_roots_classic(y: np.ndarray, p: int) -> np.ndarray:
    # y[i + p] = -sum_k c_k y[i + k], least squares over all windows
    rows = y.size - p
    H = np.column_stack([y[k : k + rows] for k in range(p)])
    c, *_ = np.linalg.lstsq(H, -y[p:], rcond=None)
    return np.roots(np.concatenate(([1.0], c[::-1])))


def _prediction_roots_pencil(y: np.ndarray, p: int) -> np.ndarray:
    # Rank-p truncation of the sample Hankel matrix; the shift-invariance of
    # its dominant right singular vectors gives the prediction roots.
    n = y.size
    L = max(p, n // 3)
    rows = n - L
    H = np.column_stack([y[k : k + rows] for k in range(L + 1)])
    _, _, vt = np.linalg.svd(H, full_matrices=False)
    V = vt[:p].T
    return np.linalg.eigvals(np.linalg.pinv(V[:-1]) @ V[1:])


def prony_fit(times: Sequence[float], values: Sequence[float], n_terms: int, *, method: str = "pencil") -> PronyModel:
    """Fit K(t) = sum A_p exp(alpha_p t) by linear prediction.

    The roots ``z_p`` of the order-``n_terms`` prediction polynomial give
    ``alpha_p = log(z_p) / step``; the amplitudes then follow by linear least
    squares. ``method="classic"`` solves the prediction equations directly
    by least squares, which is exact on clean data but biased by noise.
    ``method="pencil"`` (default) first truncates the sample Hankel matrix to
    rank ``n_terms`` and reads the same roots off its singular vectors, which
    keeps the exponents stable on noisy samples. Complex or growing
    exponents are flagged rather than rejected.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size != y.size:
        raise ParameterError("times and values must have equal length")
    if int(n_terms) != n_terms or n_terms < 1:
        raise ParameterError(f"n_terms must be a positive integer, got {n_terms}")
    if y.size < 2 * n_terms:
        raise ParameterError(f"need at least {2 * n_terms} samples for {n_terms} terms")
    steps = np.diff(t)
    step = float(steps[0])
    if not (step > 0.0 and np.allclose(steps, step, rtol=1e-9, atol=0.0)):
        raise ParameterError("Prony fitting needs a uniform increasing time grid")
    p = int(n_terms)
    if method == "classic":
        z = _prediction_roots_classic(y, p)
    elif method == "pencil":
        z = _prediction_roots_pencil(y, p)
    else:
        raise ParameterError(f"unknown Prony method {method!r}")
    if np.any(z == 0):
        raise NumericalError("a prediction root is zero; reduce n_terms", module="kernel_id", parameter="n_terms")
    alpha = np.log(z.astype(complex)) / step
    is_real = bool(np.all(np.abs(alpha.imag) <= 1e-9 * np.maximum(1.0, np.abs(alpha.real))))
    if is_real:
        alpha = alpha.real
    alpha = alpha[np.argsort(-np.real(alpha))]
    basis = np.exp(np.multiply.outer(t - t[0], alpha))
    A, *_ = np.linalg.lstsq(basis, y.astype(basis.dtype), rcond=None)
    A = A * np.exp(-alpha * t[0])
    if is_real:
        A = A.real
    fit = np.exp(np.multiply.outer(t, alpha)) @ A
    rms = float(np.sqrt(np.mean(np.abs(fit - y) ** 2)))
    stable = bool(np.all(np.real(alpha) < 0.0))
    if not (stable and is_real):
        warnings.warn("Prony fit produced complex or non-decaying exponents", RuntimeWarning, stacklevel=2)
    return PronyModel(A, alpha, rms, stable, is_real)
