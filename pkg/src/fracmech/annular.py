"""Thin-gap rotary shear between coaxial cylinders."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Literal

import numpy as np

from .constitutive import FractionalLaw
from .errors import ParameterError
from .frac_calc import liouville_harmonic

__all__ = [
    "BearingGeometry",
    "ThinGapWarning",
    "gap_strain",
    "thin_gap_angle",
    "wall_stress_harmonic",
    "wall_prefactor",
]


class ThinGapWarning(UserWarning):
    """The gap is not small against the inner radius."""


@dataclass(frozen=True)
class BearingGeometry:
    r1: float
    r2: float
    law: FractionalLaw
    thin_gap_limit: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 < self.r1 < self.r2) or not math.isfinite(self.r2):
            raise ParameterError(f"radii must satisfy 0 < r1 < r2, got r1={self.r1}, r2={self.r2}")
        if self.gap / self.r1 > self.thin_gap_limit:
            warnings.warn(
                f"gap/r1 = {self.gap / self.r1:.3g} exceeds {self.thin_gap_limit}; the thin-gap form is approximate",
                ThinGapWarning,
                stacklevel=3,
            )

    @property
    def gap(self) -> float:
        return self.r2 - self.r1

    @property
    def thin_gap_valid(self) -> bool:
        return self.gap / self.r1 <= self.thin_gap_limit


def _check_r(g: BearingGeometry, r: float) -> None:
    tol = 1e-12 * g.r2
    if not (g.r1 - tol <= r <= g.r2 + tol):
        raise ParameterError(f"r must lie in [{g.r1}, {g.r2}], got {r}")


def thin_gap_angle(
    g: BearingGeometry,
    r: float,
    t: float,
    phi1: Callable[[float], float],
    phi2: Callable[[float], float],
) -> float:
    """Angular displacement across the gap given the wall rotations phi1 (inner), phi2 (outer)."""
    _check_r(g, r)
    d = g.gap
    return (g.r1 / r) * ((g.r2 - r) / d) * float(phi1(t)) + (g.r2 / r) * ((r - g.r1) / d) * float(phi2(t))


def gap_strain(g: BearingGeometry, r: float, psi_value: float) -> float:
    """Shear strain r dphi/dr for a relative wall rotation psi = phi2 - phi1."""
    _check_r(g, r)
    return g.r1 * g.r2 * psi_value / (g.gap * r)


def wall_prefactor(g: BearingGeometry, wall: Literal["inner", "outer"]) -> float:
    """kappa r2 / gap on the inner wall, kappa r1 / gap on the outer wall."""
    if wall == "inner":
        return g.law.kappa * g.r2 / g.gap
    if wall == "outer":
        return g.law.kappa * g.r1 / g.gap
    raise ParameterError(f"wall must be 'inner' or 'outer', got {wall!r}")


def wall_stress_harmonic(
    g: BearingGeometry,
    harmonics: Iterable[tuple[float, float]],
    t,
    wall: Literal["inner", "outer"] = "inner",
):
    """Steady wall stress for psi(t) = sum a_k sin(w_k t).

    Every harmonic leads the relative rotation by alpha*pi/2 and is scaled
    by w_k**alpha.
    """
    pref = wall_prefactor(g, wall)
    total = np.zeros_like(np.asarray(t, dtype=float))
    for amp, omega in harmonics:
        total = total + liouville_harmonic(amp, omega, g.law.order, t)
    out = pref * total
    return float(out) if np.ndim(out) == 0 else out
