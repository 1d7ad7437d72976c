"""Fractional derivatives of sampled signals and of pure harmonics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ParameterError

__all__ = ["FractionalOrder", "SampledSignal", "caputo_grid", "liouville_harmonic"]


@dataclass(frozen=True)
class SampledSignal:
    """A uniformly sampled time series.

    ``values[i]`` is the sample at ``origin + i * step``.
    """

    step: float
    values: np.ndarray = field(repr=False)
    origin: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise ParameterError(f"step must be positive, got {self.step}")
        vals = np.array(self.values, dtype=float, copy=True).ravel()
        if vals.size < 2:
            raise ParameterError("a sampled signal needs at least two samples")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("signal values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", float(self.origin))

    @classmethod
    def from_function(cls, func, step: float, n: int, origin: float = 0.0) -> SampledSignal:
        t = origin + step * np.arange(n)
        return cls(step, np.asarray(func(t), dtype=float), origin)

    @property
    def times(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.values.size)

    def __len__(self) -> int:
        return int(self.values.size)

    def same_grid(self, other: SampledSignal) -> bool:
        return (
            len(self) == len(other)
            and math.isclose(self.step, other.step, rel_tol=1e-12)
            and math.isclose(self.origin, other.origin, rel_tol=1e-12, abs_tol=1e-12 * self.step)
        )

    def with_values(self, values: np.ndarray) -> SampledSignal:
        return SampledSignal(self.step, values, self.origin)


@dataclass(frozen=True)
class FractionalOrder:
    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not 0.0 <= a <= 1.0:
            raise ParameterError(f"fractional order must lie in [0, 1], got {self.alpha}")
        object.__setattr__(self, "alpha", a)


def _as_order(order: FractionalOrder | float) -> FractionalOrder:
    return order if isinstance(order, FractionalOrder) else FractionalOrder(order)


def caputo_grid(signal: SampledSignal, order: FractionalOrder | float) -> SampledSignal:
    """Memory-integral derivative of order alpha with lower limit at the first sample.

    The signal is shifted to start from zero and differentiated with
    first-order Grünwald-Letnikov weights, which for a quiescent start equals
    the Caputo form. ``alpha = 0`` returns the input unchanged and
    ``alpha = 1`` a backward difference (forward at the first sample).
    """
    alpha = _as_order(order).alpha
    f = signal.values
    h = signal.step
    if alpha == 0.0:
        return signal.with_values(f)
    if alpha == 1.0:
        d = np.empty_like(f)
        d[1:] = np.diff(f) / h
        d[0] = d[1]
        return signal.with_values(d)
    g = np.ascontiguousarray(f - f[0])
    w = _kernels.gl_weights(alpha, g.size)
    return signal.with_values(_kernels.gl_convolve(w, g) / h**alpha)


def liouville_harmonic(amplitude: float, omega: float, order: FractionalOrder | float, t):
    """Steady-state derivative of ``amplitude * sin(omega t)``: a phase lead of alpha*pi/2."""
    if not omega > 0.0:
        raise ParameterError(f"omega must be positive, got {omega}")
    alpha = _as_order(order).alpha
    return amplitude * omega**alpha * np.sin(omega * np.asarray(t, dtype=float) + alpha * math.pi / 2.0)
