import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracmech.constitutive import (
    DerivativeMeasure,
    FractionalLaw,
    SmallStrainState,
    combined_stress,
    grid_derivative,
    measure_law_residual,
    stress_from_strain,
    transfer_scale,
)
from fracmech.errors import ParameterError
from fracmech.frac_calc import SampledSignal

atoms = st.lists(
    st.tuples(st.floats(0, 3), st.floats(0.1, 10) | st.floats(-10, -0.1)),
    min_size=1,
    max_size=4,
    unique_by=lambda a: a[0],
)


def test_fractional_law_scales_with_kappa():
    strain = SampledSignal.from_function(lambda t: t**2, 0.01, 200)
    a = stress_from_strain(FractionalLaw(1.0, 0.4), strain).values
    b = stress_from_strain(FractionalLaw(3.0, 0.4), strain).values
    np.testing.assert_allclose(b, 3.0 * a)


def test_hooke_and_newton_limits():
    strain = SampledSignal.from_function(np.sin, 0.001, 1000)
    hooke = stress_from_strain(FractionalLaw(2.0, 0.0), strain).values
    np.testing.assert_allclose(hooke, 2.0 * strain.values)
    newton = stress_from_strain(FractionalLaw(2.0, 1.0), strain).values
    assert np.max(np.abs(newton[1:] - 2.0 * np.cos(strain.times[1:]))) < 2e-3


def test_law_residual_vanishes_for_matching_pair():
    e, s = DerivativeMeasure.fractional(1.5, 0.3)
    strain = SampledSignal.from_function(lambda t: 1 - np.exp(-t), 0.01, 300)
    stress = stress_from_strain(FractionalLaw(1.5, 0.3), strain)
    assert np.max(np.abs(measure_law_residual(e, s, stress, strain).values)) < 1e-12


def _solid_residual(n: int) -> float:
    E, q, nn = 2.0, 3.0, 5.0
    # sigma = A sin + B cos solves sigma + sigma'/q = E (sin + cos / n)
    M = np.array([[1.0, -1.0 / q], [1.0 / q, 1.0]])
    A, B = np.linalg.solve(M, [E, E / nn])
    h = 2.0 / n
    strain = SampledSignal.from_function(np.sin, h, n + 1)
    stress = strain.with_values(A * np.sin(strain.times) + B * np.cos(strain.times))
    e, s = DerivativeMeasure.standard_solid(E, q, nn)
    return float(np.max(np.abs(measure_law_residual(e, s, stress, strain).values[1:])))


def test_standard_solid_residual_is_grid_error():
    r = [_solid_residual(n) for n in (200, 400, 800)]
    assert r[2] < 2e-3
    assert 0.8 < math.log2(r[0] / r[1]) < 1.2


def test_grid_derivative_composes_whole_and_fractional_steps():
    sig = SampledSignal.from_function(lambda t: t**3, 0.001, 2001)
    d = grid_derivative(sig, 1.5).values
    exact = 6.0 * sig.times**1.5 / math.gamma(2.5)
    assert np.max(np.abs(d[10:] - exact[10:])) < 0.02
    with pytest.raises(ParameterError):
        grid_derivative(sig, -0.5)


@given(st.floats(0.05, 0.95), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-10, 10), st.floats(0.1, 10))
def test_transfer_scale_for_fractional_law(alpha, kappa, rho, im, re):
    e, s = DerivativeMeasure.fractional(kappa, alpha)
    p = complex(re, im)
    A = transfer_scale(e, s, rho, p)
    assert A * A == pytest.approx(rho / (kappa * cmath.exp(alpha * cmath.log(p))), rel=1e-12)
    assert A.real >= 0.0


def test_transfer_scale_rejects_branch_cut():
    e, s = DerivativeMeasure.hooke(1.0)
    with pytest.raises(ParameterError):
        transfer_scale(e, s, 1.0, -2.0)
    with pytest.raises(ParameterError):
        transfer_scale(e, s, 0.0, 1.0)


@given(atoms)
def test_measure_json_round_trip(pairs):
    m = DerivativeMeasure.of(pairs)
    again = DerivativeMeasure.from_json(m.to_json())
    assert again == m
    assert [o for o, _ in m.atoms] == sorted(o for o, _ in pairs)


@given(atoms, st.floats(0.1, 5), st.floats(-5, 5))
def test_symbol_is_sum_of_powers(pairs, re, im):
    p = complex(re, im)
    m = DerivativeMeasure.of(pairs)
    expected = sum(w * (1.0 if o == 0 else cmath.exp(o * cmath.log(p))) for o, w in pairs)
    assert m.symbol(p) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_measure_validation():
    with pytest.raises(ParameterError):
        DerivativeMeasure.of([(0.5, 1.0), (0.5, 2.0)])
    with pytest.raises(ParameterError):
        DerivativeMeasure.of([(-1.0, 1.0)])
    with pytest.raises(ParameterError):
        DerivativeMeasure.of([(1.0, 0.0)])
    with pytest.raises(ParameterError):
        DerivativeMeasure.from_json('{"order": 1}')
    with pytest.raises(ParameterError):
        FractionalLaw(-1.0, 0.5)


sym = st.lists(st.floats(-3, 3), min_size=6, max_size=6).map(
    lambda v: np.array([[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]])
)


@given(sym, sym, st.floats(-5, 5), st.tuples(*[st.floats(0, 4)] * 4))
def test_combined_stress_trace_and_symmetry(u, udot, p, lame):
    state = SmallStrainState(u, udot, p, lame)
    out = combined_stress(state)
    l1, m1, l2, m2 = lame
    expected_trace = (2 * m1 + 3 * l1) * np.trace(u) + (2 * m2 + 3 * l2) * np.trace(udot) - 3 * p
    assert np.allclose(out, out.T)
    assert np.trace(out) == pytest.approx(expected_trace, abs=1e-10)


def test_state_rejects_asymmetric_tensor():
    with pytest.raises(ParameterError):
        SmallStrainState(np.triu(np.ones((3, 3))), np.zeros((3, 3)))
    with pytest.raises(ParameterError):
        SmallStrainState(np.zeros((3, 3)), np.zeros((3, 3)), lame=(1, -1, 0, 0))
