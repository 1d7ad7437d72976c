import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracmech.annular import (
    BearingGeometry,
    ThinGapWarning,
    gap_strain,
    thin_gap_angle,
    wall_prefactor,
    wall_stress_harmonic,
)
from fracmech.constitutive import FractionalLaw, stress_from_strain
from fracmech.errors import ParameterError
from fracmech.frac_calc import SampledSignal


def _geom(alpha=0.5, r1=1.0, r2=1.05, kappa=2.0):
    return BearingGeometry(r1, r2, FractionalLaw(kappa, alpha))


radii = st.tuples(st.floats(0.5, 5.0), st.floats(0.001, 0.1)).map(lambda p: (p[0], p[0] * (1 + p[1])))


@given(radii, st.floats(0, 1), st.floats(-3, 3))
def test_rigid_rotation(rr, frac, value):
    r1, r2 = rr
    g = BearingGeometry(r1, r2, FractionalLaw(1.0, 0.5))
    r = r1 + frac * (r2 - r1)
    assert thin_gap_angle(g, r, 0.0, lambda t: value, lambda t: value) == pytest.approx(value, abs=1e-12)


def test_no_slip_at_walls():
    g = _geom()
    f1, f2 = (lambda t: math.sin(t)), (lambda t: 2.0 * t)
    assert thin_gap_angle(g, 1.0, 0.7, f1, f2) == pytest.approx(math.sin(0.7))
    assert thin_gap_angle(g, 1.05, 0.7, f1, f2) == pytest.approx(1.4)


def test_midgap_value():
    g = _geom()
    r = 1.025
    assert thin_gap_angle(g, r, 0.0, lambda t: 0.0, lambda t: 1.0) == pytest.approx(1.05 * (r - 1.0) / (0.05 * r), rel=1e-14)


@given(st.floats(0.0, 1.0), st.floats(-2, 2))
def test_strain_is_radial_derivative_of_angle(frac, psi):
    g = _geom()
    r = 1.0 + 1e-6 + frac * (0.05 - 2e-6)
    h = 1e-7
    ang = lambda rr: thin_gap_angle(g, rr, 0.0, lambda t: 0.0, lambda t: psi)
    fd = r * (ang(r + h) - ang(r - h)) / (2 * h)
    assert gap_strain(g, r, psi) == pytest.approx(fd, abs=1e-7)


def test_strain_at_inner_wall():
    g = _geom()
    assert gap_strain(g, 1.0, 0.3) == pytest.approx(1.05 * 0.3 / 0.05)
    assert gap_strain(g, 1.02, 0.0) == 0.0


def test_newton_and_hooke_limits():
    t = np.linspace(0, 4, 9)
    newton = wall_stress_harmonic(_geom(1.0), [(0.2, 3.0)], t)
    np.testing.assert_allclose(newton, 2.0 * 1.05 / 0.05 * 0.2 * 3.0 * np.cos(3.0 * t), atol=1e-12)
    hooke = wall_stress_harmonic(_geom(0.0), [(0.2, 3.0)], t)
    np.testing.assert_allclose(hooke, 2.0 * 1.05 / 0.05 * 0.2 * np.sin(3.0 * t), atol=1e-12)


@given(st.floats(0, 1), st.floats(0.1, 10), st.floats(0, 20))
def test_inner_outer_ratio(alpha, omega, t):
    g = _geom(alpha)
    inner = wall_prefactor(g, "inner")
    outer = wall_prefactor(g, "outer")
    assert inner / outer == pytest.approx(1.05 / 1.0, rel=1e-14)
    a = wall_stress_harmonic(g, [(1.0, omega)], t, "inner")
    b = wall_stress_harmonic(g, [(1.0, omega)], t, "outer")
    assert a == pytest.approx(1.05 * b, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_zero_crossings_lead_by_phase(alpha):
    omega = 2.0
    g = _geom(alpha)
    f = lambda t: wall_stress_harmonic(g, [(1.0, omega)], t)
    # the response crosses zero upward at omega t + alpha pi / 2 = 2 pi
    t_star = (2 * math.pi - alpha * math.pi / 2) / omega
    assert abs(f(t_star)) < 1e-12
    assert f(t_star - 1e-3) < 0 < f(t_star + 1e-3)


def test_empty_harmonics_give_zero():
    assert wall_stress_harmonic(_geom(), [], 1.0) == 0.0


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_grid_derivative_of_wall_strain_converges(alpha):
    omega, a = 2.0, 0.3
    g = _geom(alpha)
    period = 2 * math.pi / omega
    sig = SampledSignal.from_function(lambda t: gap_strain(g, g.r1, 1.0) * a * np.sin(omega * t), period / 2000, 11 * 2000 + 1)
    stress = stress_from_strain(g.law, sig)
    tail = sig.times >= 10 * period
    exact = wall_stress_harmonic(g, [(a, omega)], sig.times[tail])
    scale = np.max(np.abs(exact))
    assert np.max(np.abs(stress.values[tail] - exact)) / scale < 0.03


def test_validation_and_warning():
    with pytest.raises(ParameterError):
        BearingGeometry(1.0, 1.0, FractionalLaw(1.0, 0.5))
    with pytest.warns(ThinGapWarning):
        wide = BearingGeometry(1.0, 1.5, FractionalLaw(1.0, 0.5))
    assert not wide.thin_gap_valid
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert _geom().thin_gap_valid
    with pytest.raises(ParameterError):
        gap_strain(_geom(), 2.0, 1.0)
    with pytest.raises(ParameterError):
        wall_prefactor(_geom(), "middle")
