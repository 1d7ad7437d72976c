"""Cam edges for lever balances with a uniform scale.

A weighted beam of arm ``l`` and weight ``G`` turns through angle phi while
a ribbon wrapped on the cam carries the load P. The cam edge that makes the
deflection linear in a chosen quantity ``z`` (``P = F(z)``,
``z = (phi - phi0) / C``) is the envelope

    x = l G F' sin^2(phi) / (C F^2)
    y = -l G F' sin(phi) cos(phi) / (C F^2) + l G / F

with F and F' evaluated at z. Two cases have closed forms: a scale
uniform in weight and a scale uniform in yarn count (length per unit
weight).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ParameterError, PoleError

__all__ = [
    "CamProfile",
    "NUMBER_TABLE",
    "NUMBER_TABLE_MISPRINTS",
    "QuadrantSpec",
    "TableComparison",
    "WEIGHT_TABLE",
    "WEIGHT_TABLE_MISPRINTS",
    "compare_table",
    "general_profile",
    "number_profile",
    "ribbon_width_bound",
    "weight_profile",
]


@dataclass(frozen=True)
class QuadrantSpec:
    """Beam constants and the calibration ``P = F(z)`` with its derivative."""

    C: float
    arm: float
    weight: float
    F: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    dF: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    phi0: float = 0.0
    phi_range: tuple[float, float] = (0.0, math.pi)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.C) and self.C != 0.0):
            raise ParameterError(f"sensitivity C must be nonzero, got {self.C}")
        for name in ("arm", "weight"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be positive, got {v}")
        lo, hi = self.phi_range
        if not lo < hi:
            raise ParameterError(f"phi range must be increasing, got {self.phi_range}")


@dataclass(frozen=True)
class CamProfile:
    phi: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        arrays = [np.array(getattr(self, k), dtype=float).ravel() for k in ("phi", "x", "y")]
        if not arrays[0].size == arrays[1].size == arrays[2].size:
            raise ParameterError("phi, x and y must have equal length")
        if arrays[0].size > 1 and np.any(np.diff(arrays[0]) <= 0.0):
            raise ParameterError("phi must be strictly increasing")
        for name, a in zip(("phi", "x", "y"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return self.phi.size

    def scaled(self, k: float) -> CamProfile:
        return CamProfile(self.phi, k * self.x, k * self.y)

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.phi.tolist(), self.x.tolist(), self.y.tolist()))


def _angles(phis: Sequence[float] | np.ndarray) -> np.ndarray:
    a = np.atleast_1d(np.asarray(phis, dtype=float))
    if a.ndim != 1 or not np.all(np.isfinite(a)):
        raise ParameterError("angles must be a finite 1-D sequence")
    return a


def general_profile(spec: QuadrantSpec, phis: Sequence[float]) -> CamProfile:
    phi = _angles(phis)
    z = (phi - spec.phi0) / spec.C
    F = np.asarray(spec.F(z), dtype=float) * np.ones_like(z)
    dF = np.asarray(spec.dF(z), dtype=float) * np.ones_like(z)
    if np.any(F == 0.0) or not np.all(np.isfinite(F)):
        bad = phi[(F == 0.0) | ~np.isfinite(F)][0]
        raise PoleError(f"calibration F vanishes or is undefined at phi = {bad}")
    lG = spec.arm * spec.weight
    s, c = np.sin(phi), np.cos(phi)
    k = lG * dF / (spec.C * F * F)
    return CamProfile(phi, k * s * s, -k * s * c + lG / F)


def weight_profile(a: float, phis: Sequence[float]) -> CamProfile:
    """Edge for a scale uniform in weight: x = a sin^2/phi^2, y = a(phi - sin cos)/phi^2."""
    if not (math.isfinite(a) and a > 0.0):
        raise ParameterError(f"a must be positive, got {a}")
    phi = _angles(phis)
    x = np.empty_like(phi)
    y = np.empty_like(phi)
    small = np.abs(phi) < 1e-4
    p = phi[~small]
    s, c = np.sin(p), np.cos(p)
    x[~small] = s * s / (p * p)
    y[~small] = (p - s * c) / (p * p)
    # series near zero: sin^2/p^2 = 1 - p^2/3, (p - sin p cos p)/p^2 = 2p/3 - 2p^3/15
    q = phi[small]
    x[small] = 1.0 - q * q / 3.0
    y[small] = 2.0 * q / 3.0 - 2.0 * q**3 / 15.0
    return CamProfile(phi, a * x, a * y)


def number_profile(b: float, psis: Sequence[float]) -> CamProfile:
    """Edge for a scale uniform in yarn count, angle measured as psi = pi - phi."""
    if not (math.isfinite(b) and b > 0.0):
        raise ParameterError(f"b must be positive, got {b}")
    psi = _angles(psis)
    if np.any(psi < 0.0) or np.any(psi > math.pi):
        raise ParameterError("psi must lie in [0, pi]")
    s, c = np.sin(psi), np.cos(psi)
    return CamProfile(psi, b * s * s, b * (psi + s * c))


def ribbon_width_bound(E_percent: float, M: float, sigma_star: float) -> float:
    """Largest ribbon weight keeping the reading error below E percent: E / (100 M sigma*)."""
    for name, v in (("E_percent", E_percent), ("M", M), ("sigma_star", sigma_star)):
        if not (math.isfinite(v) and v > 0.0):
            raise ParameterError(f"{name} must be positive, got {v}")
    return E_percent / (100.0 * M * sigma_star)


# Printed design tables: (angle in degrees, x, y) for a = 1 and b = 1.
WEIGHT_TABLE: tuple[tuple[int, float, float], ...] = (
    (0, 1.000, 0.000), (10, 0.990, 0.115), (20, 0.960, 0.227), (30, 0.912, 0.331),
    (40, 0.848, 0.422), (50, 0.771, 0.499), (60, 0.684, 0.568), (70, 0.591, 0.603),
    (80, 0.498, 0.629), (90, 0.405, 0.637), (100, 0.319, 0.629), (110, 0.240, 0.608),
    (120, 0.171, 0.576), (130, 0.114, 0.536), (140, 0.069, 0.492), (150, 0.036, 0.444),
    (160, 0.015, 0.389), (170, 0.003, 0.357), (180, 0.000, 0.318), (190, 0.009, 0.286),
    (200, 0.009, 0.260), (210, 0.019, 0.241), (220, 0.028, 0.227), (230, 0.036, 0.219),
    (240, 0.043, 0.214), (250, 0.045, 0.213), (260, 0.046, 0.212), (270, 0.047, 0.212),
    (280, 0.041, 0.211), (290, 0.035, 0.210), (300, 0.027, 0.207), (310, 0.020, 0.202),
    (320, 0.013, 0.195), (330, 0.008, 0.187), (340, 0.003, 0.178), (350, 0.001, 0.169),
    (360, 0.000, 0.159),
)
# Rows whose printed entry disagrees with the closed form by more than rounding.
WEIGHT_TABLE_MISPRINTS: frozenset[int] = frozenset({60, 160, 190})

NUMBER_TABLE: tuple[tuple[int, float, float], ...] = (
    (0, 0.000, 0.000), (10, 0.030, 0.346), (20, 0.017, 0.670), (30, 0.250, 0.957),
    (40, 0.413, 1.191), (45, 0.500, 1.285), (50, 0.587, 1.365), (60, 0.750, 1.480),
    (70, 0.883, 1.543), (80, 0.970, 1.567), (90, 1.000, 1.571), (100, 0.970, 1.574),
    (110, 0.883, 1.559), (120, 0.750, 1.661), (130, 0.587, 1.777), (135, 0.500, 1.856),
    (140, 0.413, 1.951), (150, 0.250, 2.185), (160, 0.117, 2.471), (170, float("nan"), 2.796),
    (180, 0.000, 3.142),
)
# The x entry at 170 is illegible in the source table and is stored as NaN.
NUMBER_TABLE_MISPRINTS: frozenset[int] = frozenset({20, 110, 170})


class TableComparison(NamedTuple):
    degrees: int
    printed: tuple[float, float]
    computed: tuple[float, float]
    error: float
    misprint: bool


def compare_table(kind: str, scale: float = 1.0) -> list[TableComparison]:
    """Printed against computed coordinates for the weight or number table."""
    if kind == "weight":
        table, flagged, fn = WEIGHT_TABLE, WEIGHT_TABLE_MISPRINTS, weight_profile
    elif kind == "number":
        table, flagged, fn = NUMBER_TABLE, NUMBER_TABLE_MISPRINTS, number_profile
    else:
        raise ParameterError(f"unknown table {kind!r}; expected 'weight' or 'number'")
    deg = np.array([r[0] for r in table], dtype=float)
    prof = fn(scale, np.radians(deg))
    out = []
    for (d, px, py), cx, cy in zip(table, prof.x, prof.y):
        err = max(abs(cx - scale * px), abs(cy - scale * py))
        err = float("inf") if math.isnan(err) else float(err)
        out.append(TableComparison(d, (px, py), (float(cx), float(cy)), err, d in flagged))
    return out
