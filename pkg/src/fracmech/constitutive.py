"""Constitutive laws: fractional stress-strain relations and the combined elastic-viscous tensor."""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NumericalError, ParameterError
from .frac_calc import FractionalOrder, SampledSignal, caputo_grid

__all__ = [
    "DerivativeMeasure",
    "FractionalLaw",
    "SmallStrainState",
    "combined_stress",
    "grid_derivative",
    "measure_law_residual",
    "stress_from_strain",
    "transfer_scale",
]


@dataclass(frozen=True)
class FractionalLaw:
    """sigma = kappa * d^alpha epsilon."""

    kappa: float
    order: FractionalOrder

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa) and self.kappa > 0.0):
            raise ParameterError(f"kappa must be positive, got {self.kappa}")
        if not isinstance(self.order, FractionalOrder):
            object.__setattr__(self, "order", FractionalOrder(self.order))

    @property
    def alpha(self) -> float:
        return self.order.alpha


@dataclass(frozen=True)
class DerivativeMeasure:
    """A finite sum of weighted point masses over derivative orders.

    ``atoms`` holds ``(order, weight)`` pairs sorted by order. The measure acts
    on a signal as ``sum(weight * d^order signal)``.
    """

    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        cleaned = []
        for order, weight in self.atoms:
            order, weight = float(order), float(weight)
            if not (math.isfinite(order) and order >= 0.0):
                raise ParameterError(f"derivative orders must be finite and non-negative, got {order}")
            if not math.isfinite(weight) or weight == 0.0:
                raise ParameterError(f"atom weights must be finite and nonzero, got {weight}")
            cleaned.append((order, weight))
        cleaned.sort()
        orders = [o for o, _ in cleaned]
        if len(set(orders)) != len(orders):
            raise ParameterError("atom orders must be pairwise distinct")
        object.__setattr__(self, "atoms", tuple(cleaned))

    @classmethod
    def of(cls, atoms: Iterable[tuple[float, float]]) -> DerivativeMeasure:
        return cls(tuple(atoms))

    @classmethod
    def hooke(cls, modulus: float) -> tuple[DerivativeMeasure, DerivativeMeasure]:
        """(e, s) pair for sigma = E epsilon."""
        return cls(((0.0, 1.0),)), cls(((0.0, modulus),))

    @classmethod
    def fractional(cls, kappa: float, alpha: float) -> tuple[DerivativeMeasure, DerivativeMeasure]:
        """(e, s) pair for sigma = kappa d^alpha epsilon."""
        return cls(((0.0, 1.0),)), cls(((alpha, kappa),))

    @classmethod
    def standard_solid(cls, modulus: float, q: float, n: float) -> tuple[DerivativeMeasure, DerivativeMeasure]:
        """(e, s) pair for sigma + sigma'/q = E (epsilon + epsilon'/n)."""
        return cls(((0.0, 1.0), (1.0, 1.0 / q))), cls(((0.0, modulus), (1.0, modulus / n)))

    @property
    def is_zero(self) -> bool:
        return not self.atoms

    def symbol(self, p: complex) -> complex:
        """J(p) = sum weight * p**order on the principal branch."""
        return sum(w * _cpow(p, o) for o, w in self.atoms)

    def to_json(self) -> str:
        return json.dumps([{"order": o, "weight": w} for o, w in self.atoms])

    @classmethod
    def from_json(cls, text: str | list) -> DerivativeMeasure:
        data = json.loads(text) if isinstance(text, str) else text
        if not isinstance(data, list):
            raise ParameterError("a derivative measure is a JSON array of {order, weight} objects")
        try:
            return cls(tuple((item["order"], item["weight"]) for item in data))
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"malformed measure atom: {exc}") from exc


def _cpow(p: complex, order: float) -> complex:
    if order == 0.0:
        return 1.0 + 0.0j
    return cmath.exp(order * cmath.log(p))


@dataclass(frozen=True)
class SmallStrainState:
    """Strain, strain rate, pressure and the two Lamé pairs (elastic, viscous)."""

    def_u: np.ndarray
    def_udot: np.ndarray
    pressure: float = 0.0
    lame: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        for name in ("def_u", "def_udot"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != (3, 3):
                raise ParameterError(f"{name} must be a 3x3 tensor")
            if not np.all(np.isfinite(a)):
                raise ParameterError(f"{name} must be finite")
            if np.max(np.abs(a - a.T)) > 1e-14 * max(1.0, float(np.max(np.abs(a)))):
                raise ParameterError(f"{name} must be symmetric")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        lame = tuple(float(v) for v in self.lame)
        if len(lame) != 4 or any(v < 0.0 or not math.isfinite(v) for v in lame):
            raise ParameterError("lame must be four non-negative reals (lambda', mu', lambda'', mu'')")
        object.__setattr__(self, "lame", lame)


def stress_from_strain(law: FractionalLaw, strain: SampledSignal) -> SampledSignal:
    """sigma = kappa * d^alpha epsilon on the strain grid."""
    d = caputo_grid(strain, law.order)
    return d.with_values(law.kappa * d.values)


def grid_derivative(signal: SampledSignal, order: float) -> SampledSignal:
    """Derivative of any non-negative order: whole differences, then a fractional step."""
    if order < 0.0:
        raise ParameterError(f"derivative order must be non-negative, got {order}")
    whole = int(math.floor(order))
    frac = order - whole
    out = signal
    for _ in range(whole):
        out = caputo_grid(out, 1.0)
    if frac > 0.0:
        out = caputo_grid(out, frac)
    return out


def _apply(measure: DerivativeMeasure, signal: SampledSignal) -> np.ndarray:
    acc = np.zeros(len(signal))
    for order, weight in measure.atoms:
        acc += weight * grid_derivative(signal, order).values
    return acc


def measure_law_residual(
    e: DerivativeMeasure,
    s: DerivativeMeasure,
    stress: SampledSignal,
    strain: SampledSignal,
) -> SampledSignal:
    """r = e[sigma] - s[epsilon]; a pair obeys the law when r vanishes up to grid error."""
    if not stress.same_grid(strain):
        raise ParameterError("stress and strain must share one grid")
    return stress.with_values(_apply(e, stress) - _apply(s, strain))


def transfer_scale(e: DerivativeMeasure, s: DerivativeMeasure, density: float, p: complex) -> complex:
    """A(p) = sqrt(density * J_e(p) / J_s(p)), so that A(p) p scales the spatial argument.

    ``p`` on the closed negative real axis is rejected because the powers
    ``p**order`` are taken on the principal branch.
    """
    if not density > 0.0:
        raise ParameterError(f"density must be positive, got {density}")
    p = complex(p)
    if p.imag == 0.0 and p.real <= 0.0:
        raise ParameterError("p must not lie on the closed negative real axis")
    js = s.symbol(p)
    if js == 0:
        raise NumericalError(
            f"strain-side symbol vanishes at p = {p}", module="constitutive", parameter="p"
        )
    return cmath.sqrt(density * e.symbol(p) / js)


def combined_stress(state: SmallStrainState) -> np.ndarray:
    """Pi = 2mu' Def u + lambda' theta' I + 2mu'' Def u_dot + (lambda'' theta'' - p) I."""
    lam1, mu1, lam2, mu2 = state.lame
    eye = np.eye(3)
    theta1 = float(np.trace(state.def_u))
    theta2 = float(np.trace(state.def_udot))
    out = 2.0 * mu1 * state.def_u + 2.0 * mu2 * state.def_udot
    out = out + (lam1 * theta1 + lam2 * theta2 - state.pressure) * eye
    return 0.5 * (out + out.T)
