import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from fracmech import drafting
from fracmech.errors import NumericalError, ParameterError

EXAMPLE_1 = drafting.DraftZone(1.0, 6.0, 0.01, 0.3)

# Printed speed table of the first worked example: v, x, n.
EXAMPLE_1_ROWS = [
    (1.05, 0.000, 9524), (1.20, 0.139, 8000), (1.50, 0.253, 6667), (2.00, 0.374, 5000),
    (2.50, 0.480, 4000), (3.00, 0.586, 3333), (3.50, 0.703, 2857), (4.00, 0.835, 2500),
    (4.50, 1.000, 2222),
]
# The printed count at v = 1.20 is the count for v = 1.25.
EXAMPLE_1_COUNT_MISPRINTS = {1.20}

slips = st.tuples(st.floats(1e-3, 0.6), st.floats(1e-3, 0.6)).filter(lambda ab: ab[0] + ab[1] < 0.95)
drafts = st.floats(1.2, 20.0)


# ---------------------------------------------------------------- stationary zone


def test_endpoint_speeds_example():
    v_in, v_out, b = drafting.endpoint_speeds(EXAMPLE_1)
    assert v_in == pytest.approx(1.05, rel=1e-14)
    assert v_out == pytest.approx(4.50, rel=1e-14)
    assert b == pytest.approx(4.5 / 1.05, rel=1e-14)


def test_endpoint_speeds_without_slip():
    assert drafting.endpoint_speeds(drafting.DraftZone(2.0, 3.0, 0.0, 0.0)) == (2.0, 6.0, 3.0)


def test_entry_speed_with_heavy_entry_slip():
    assert drafting.endpoint_speeds(drafting.DraftZone(1.0, 6.0, 0.3, 0.01))[0] == pytest.approx(2.5)


@given(drafts, slips)
def test_actual_draft_below_limit(B, ab):
    assert drafting.endpoint_speeds(drafting.DraftZone(1.0, B, *ab))[2] < B


def test_zone_validation():
    with pytest.raises(ParameterError):
        drafting.DraftZone(1.0, 1.0, 0.1, 0.1)
    with pytest.raises(ParameterError):
        drafting.DraftZone(-1.0, 3.0, 0.1, 0.1)
    with pytest.raises(ParameterError):
        drafting.DraftZone(1.0, 3.0, 1.0, 0.1)


def test_excess_slip_warns_and_blocks_profile():
    with pytest.warns(drafting.SlippageWarning):
        zone = drafting.DraftZone(1.0, 6.0, 0.5, 0.8)
    assert not zone.slip_valid
    with pytest.raises(ParameterError):
        drafting.velocity_profile(zone)
    with pytest.raises(ParameterError):
        drafting.draft_length_S(6.0, 0.5, 0.8)


def test_dissipative_values():
    zone = drafting.DraftZone(1.0, 6.0, 0.01, 0.3, n0=2.0)
    assert drafting.dissipative(zone, 2.0) == pytest.approx(2.0, rel=1e-14)
    assert drafting.dissipative(zone, 1.0) == 0.0
    assert drafting.dissipative(zone, 6.0) == 0.0
    with pytest.raises(ParameterError):
        drafting.dissipative(zone, 6.5)


def test_dissipative_peak_at_geometric_mean():
    v = np.linspace(1.0, 6.0, 200001)
    d = drafting.dissipative(EXAMPLE_1, v)
    assert np.all(d >= 0.0)
    assert v[np.argmax(d)] == pytest.approx(math.sqrt(6.0), abs=1e-4)
    assert drafting.inflection_speed(EXAMPLE_1) == pytest.approx(2.4, abs=0.05)


def test_sigma_max():
    assert drafting.sigma_max(100.0) == pytest.approx(25.6, rel=5e-3)
    assert drafting.sigma_max(1.0) == 1.0
    assert drafting.sigma_max(3.0) == pytest.approx(4.0 / 3.0, rel=1e-15)


@given(st.floats(1.0, 1e4))
def test_sigma_max_at_least_one(B):
    assert drafting.sigma_max(B) >= 1.0


def test_draft_length_examples():
    assert drafting.draft_length_S(6.0, 0.01, 0.3) > 0.0
    # The second worked example prints entry speed 1.02, which fixes alpha = 0.01.
    assert drafting.endpoint_speeds(drafting.DraftZone(1.0, 3.0, 0.01, 0.01))[0] == pytest.approx(1.02)
    assert drafting.draft_length_S(3.0, 0.01, 0.01) == pytest.approx(0.055, abs=1e-3)


def test_draft_length_rejects_small_Q():
    with pytest.raises(ParameterError):
        drafting.draft_length_S(2.0, 0.9, 0.9)


@pytest.mark.parametrize("v, x, n", EXAMPLE_1_ROWS)
def test_example_1_table(v, x, n):
    profile = drafting.velocity_profile(EXAMPLE_1)
    assert profile.x_of_v(v) == pytest.approx(x, abs=0.005)
    if v not in EXAMPLE_1_COUNT_MISPRINTS:
        assert drafting.fiber_counts(EXAMPLE_1, v)[0] == pytest.approx(n, abs=0.5)


def test_profile_endpoints():
    profile = drafting.velocity_profile(EXAMPLE_1)
    assert profile.x_of_v(1.05) == pytest.approx(0.0, abs=1e-12)
    assert profile.x_of_v(4.50) == pytest.approx(1.0, abs=1e-12)
    assert profile.v_of_x(0.0) == 1.05
    assert profile.v_of_x(1.0) == 4.50
    with pytest.raises(ParameterError):
        profile.x_of_v(1.0)
    with pytest.raises(ParameterError):
        profile.v_of_x(1.5)


def test_profile_scales_with_length():
    long_zone = drafting.DraftZone(1.0, 6.0, 0.01, 0.3, length=3.0)
    assert drafting.velocity_profile(long_zone).x_of_v(2.0) == pytest.approx(
        3.0 * drafting.velocity_profile(EXAMPLE_1).x_of_v(2.0), rel=1e-14
    )


@given(drafts, slips, st.floats(0.0, 1.0))
def test_profile_round_trip(B, ab, xi):
    profile = drafting.velocity_profile(drafting.DraftZone(1.0, B, *ab))
    assert profile.x_of_v(profile.v_of_x(xi)) == pytest.approx(xi, abs=1e-10)


@given(drafts, slips)
def test_profile_monotone(B, ab):
    zone = drafting.DraftZone(1.0, B, *ab)
    x = drafting.velocity_profile(zone).x_of_v(np.linspace(zone.v_in, zone.v_out, 64))
    assert np.all(np.diff(x) >= 0.0)


def test_fiber_counts_without_entry_slip():
    zone = drafting.DraftZone(1.0, 4.0, 0.0, 0.2, n0=500.0)
    n, n_slow, n_fast = drafting.fiber_counts(zone, 1.0)
    assert (n, n_slow, n_fast) == (500.0, 500.0, 0.0)


def test_fiber_count_conservation():
    rng = np.random.default_rng(7)
    zone = drafting.DraftZone(1.5, 5.0, 0.02, 0.1, n0=8000.0)
    v = rng.uniform(zone.v_in, zone.v_out, 100)
    n, n_slow, n_fast = drafting.fiber_counts(zone, v)
    np.testing.assert_allclose(n_slow + n_fast, n, rtol=1e-13)
    np.testing.assert_allclose(n_slow + zone.B * n_fast, zone.n0, rtol=1e-13)
    np.testing.assert_allclose(n, zone.n0 * zone.v0 / v, rtol=1e-14)


def test_thinning_z_in_unit_interval():
    for B in (1.5, 3.0, 10.0, 100.0):
        rep = drafting.thinning_classification(drafting.DraftZone(1.0, B, 0.01, 0.01))
        n1 = 10000.0 / B
        z = 3.0 * rep.n_star_lo / n1 - 1.0
        assert 0.0 < z < 1.0
        assert rep.n_star_hi > rep.n_star_lo


def test_thinning_classification_kinds():
    low = drafting.thinning_classification(drafting.DraftZone(1.0, 6.0, 0.01, 0.01))
    assert low.kind == "one_inflection" and low.location == "inside"
    assert low.n_exit <= low.n_star_hi <= low.n_entry
    high = drafting.thinning_classification(drafting.DraftZone(1.0, 6.0, 0.01, 0.95))
    assert high.kind == "no_inflection" and high.location == "downstream"
    assert high.n_star_hi < high.n_exit


@given(st.floats(1.1, 50.0))
def test_beta_threshold_separates_classes(B):
    rep = drafting.thinning_classification(drafting.DraftZone(1.0, B, 0.001, 0.01))
    thr = rep.beta_threshold
    n1 = 10000.0 / B
    # the exit count crosses the upper ordinate exactly at the threshold
    n_exit = 10000.0 / (B - (B - 1.0) * thr)
    assert n_exit == pytest.approx(rep.n_star_hi, rel=1e-12)
    assert n1 < rep.n_star_hi


def test_general_law_without_elastic_part():
    w0, w1, a, b = drafting.general_law_convert(drafting.GeneralLawParams(0.0, 2.0, 3.0), 1.0, 6.0)
    assert (w0, w1) == pytest.approx((1.0, 6.0), abs=1e-12)
    assert (a, b) == pytest.approx((0.0, 0.0), abs=1e-12)


@given(st.floats(0.0, 1e3), st.floats(1e-2, 1e2), st.floats(1e-2, 1e2), st.floats(0.1, 10.0), st.floats(1.01, 30.0))
def test_general_law_product_invariant(r, delta, q, v0, B):
    w0, w1, a, b = drafting.general_law_convert(drafting.GeneralLawParams(r, delta, q), v0, B * v0)
    assert w0 * w1 == pytest.approx(v0 * B * v0, rel=1e-12)
    assert w0 <= v0 * (1 + 1e-12) and w1 >= B * v0 * (1 - 1e-12)
    assert -1e-12 <= a + b < 1.0 + 1e-12


def test_general_law_monotone_in_r():
    out = np.array(
        [drafting.general_law_convert(drafting.GeneralLawParams(r, 1.0, 1.0), 1.0, 4.0)[:2] for r in np.linspace(0, 20, 41)]
    )
    assert np.all(np.diff(out[:, 1]) > 0.0)
    assert np.all(np.diff(out[:, 0]) < 0.0)


# ---------------------------------------------------------------- nonstationary fields


def _stationary_density(zone):
    profile = drafting.velocity_profile(zone)
    x = np.linspace(0.0, 1.0, 41)
    v = profile.v_of_x(x)
    return x, v


def test_recover_from_stationary_density():
    x, v = _stationary_density(EXAMPLE_1)
    t = np.linspace(0.0, 1.0, 11)
    lam = drafting.FieldGrid(x, t, np.tile(EXAMPLE_1.flux / v, (t.size, 1)))
    rec = drafting.recover_from_lambda(lam, lambda s: np.full_like(s, EXAMPLE_1.flux))
    np.testing.assert_allclose(rec.q.values, EXAMPLE_1.flux, rtol=1e-13)
    np.testing.assert_allclose(rec.v.values, np.tile(v, (t.size, 1)), rtol=1e-12)
    expected = np.broadcast_to(EXAMPLE_1.flux * (v - v[0]), rec.F.values.shape)
    np.testing.assert_allclose(rec.F.values, expected, rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(rec.draft, v[-1] / v[0], rtol=1e-12)


def test_recover_from_constant_flux():
    x = np.linspace(0.0, 1.0, 21)
    t = np.linspace(0.0, 2.0, 9)
    lam0 = lambda s: 3.0 + np.cos(s)  # noqa: E731
    q = drafting.FieldGrid(x, t, np.full((t.size, x.size), 5.0))
    rec = drafting.recover_from_q(q, lam0)
    np.testing.assert_allclose(rec.lam.values, np.tile(lam0(x), (t.size, 1)), rtol=1e-14)
    np.testing.assert_allclose(rec.v.values, 5.0 / rec.lam.values, rtol=1e-14)


def test_recover_rejects_bad_fields():
    x = np.linspace(0.0, 1.0, 5)
    t = np.linspace(0.0, 1.0, 5)
    with pytest.raises(ParameterError):
        drafting.recover_from_lambda(drafting.FieldGrid(x, t, -np.ones((5, 5))), lambda s: s)
    with pytest.raises(NumericalError):
        drafting.recover_from_q(drafting.FieldGrid(x, t, np.zeros((5, 5))), lambda s: np.ones_like(s))
    # a density draining faster than the entry flux can supply
    lam = drafting.FieldGrid.sample(lambda X, T: 1.0 + 50.0 * T, x, t)
    with pytest.raises(NumericalError):
        drafting.recover_from_lambda(lam, lambda s: np.full_like(s, 1.0))


def test_field_grid_validation():
    with pytest.raises(ParameterError):
        drafting.FieldGrid([0.0, 0.1, 0.5], [0.0, 1.0, 2.0], np.ones((3, 3)))
    with pytest.raises(ParameterError):
        drafting.FieldGrid([0.0, 0.5, 1.0], [0.0, 1.0, 2.0], np.ones((2, 3)))


def test_lambda_series_stationary_speed_is_one_term():
    x, v = _stationary_density(EXAMPLE_1)
    t = np.linspace(0.0, 1.0, 21)
    vg = drafting.FieldGrid(x, t, np.tile(v, (t.size, 1)))
    res = drafting.lambda_series_from_v(vg, lambda s: np.full_like(s, EXAMPLE_1.n0 / 1.05), terms=6)
    assert res.terms_used == 1
    assert not res.diverging
    np.testing.assert_allclose(res.lam.values, EXAMPLE_1.flux / vg.values, rtol=1e-12)


def test_lambda_series_validation():
    x = np.linspace(0.0, 1.0, 5)
    vg = drafting.FieldGrid(x, x, np.ones((5, 5)))
    with pytest.raises(ParameterError):
        drafting.lambda_series_from_v(vg, lambda s: np.ones_like(s), terms=0)
    with pytest.raises(ParameterError):
        drafting.lambda_series_from_v(vg, lambda s: -np.ones_like(s), terms=2)


# ---------------------------------------------------------------- floating fibers


def _floating_oracle(vin, vout, B, kappa, x, l=1.0):
    rhs = (B - 1.0) * math.log(vout - vin) + kappa * B * (math.log(l - x) - math.log(x))
    return brentq(lambda w: B * math.log(vout - w) - math.log(w - vin) - rhs, vin + 1e-14, vout - 1e-14, xtol=1e-15)


def test_floating_speed_limits():
    assert drafting.floating_speed(1.0, 6.0, 6.0, 2.0, 0.0) == 1.0
    assert drafting.floating_speed(1.0, 6.0, 6.0, 2.0, 1.0) == 6.0
    assert drafting.floating_speed(1.0, 6.0, 6.0, 2.0, 1e-6) == pytest.approx(1.0, abs=1e-6)
    assert drafting.floating_speed(1.0, 6.0, 6.0, 2.0, 1.0 - 1e-6) == pytest.approx(6.0, abs=1e-6)


@pytest.mark.parametrize("x", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_floating_speed_matches_root_oracle(x):
    got = drafting.floating_speed(1.0, 6.0, 6.0, 2.0, x)
    assert got == pytest.approx(_floating_oracle(1.0, 6.0, 6.0, 2.0, x), rel=1e-12)


@given(st.floats(0.5, 5.0), st.floats(1.1, 10.0), st.floats(0.3, 4.0), st.floats(0.05, 0.95))
def test_floating_speed_solves_its_equation(vin, ratio, kappa, xi):
    vout = ratio * vin
    w = drafting.floating_speed(vin, vout, ratio, kappa, 2.0 * xi, l=2.0)
    assert vin <= w <= vout
    # the residual is only meaningful away from the ends, where w - vin and vout - w keep their digits
    span = vout - vin
    if w - vin > 1e-6 * span and vout - w > 1e-6 * span:
        lhs = ratio * math.log(vout - w) - math.log(w - vin)
        rhs = (ratio - 1.0) * math.log(vout - vin) + kappa * ratio * math.log((1.0 - xi) / xi)
        assert lhs == pytest.approx(rhs, abs=1e-8 * max(1.0, abs(rhs)))


def test_dynamic_fiber_length():
    assert drafting.dynamic_fiber_length(6.0, 2.0, 1.0) == pytest.approx(5.0 / 24.0, rel=1e-15)
    assert drafting.dynamic_fiber_length(1.0, 2.0) == 0.0


@pytest.mark.parametrize("xi", [0.25, 0.5, 0.8])
def test_quasi_stationary_draft(xi):
    assert drafting.quasi_stationary_Bx(6.0, 2.0, xi) == pytest.approx(
        _floating_oracle(1.0, 6.0, 6.0, 2.0, xi), rel=1e-12
    )
    assert drafting.quasi_stationary_Bx(6.0, 2.0, 0.0) == 1.0
    assert drafting.quasi_stationary_Bx(6.0, 2.0, 1.0) == 6.0


def test_quasi_stationary_draft_matches_speed_ratio():
    # B_x is the floating speed divided by the entry speed whatever the common time factor
    for g in (0.5, 1.0, 3.7):
        w = drafting.floating_speed(g, 6.0 * g, 6.0, 2.0, 0.4)
        assert w / g == pytest.approx(drafting.quasi_stationary_Bx(6.0, 2.0, 0.4), rel=1e-12)


def test_quasi_stationary_force():
    v = lambda x, t: (1.0 + x) * (2.0 + math.sin(t))  # noqa: E731
    q = lambda t: 4.0 + t  # noqa: E731
    assert drafting.quasi_stationary_force(q, lambda t: 1.0, v, 0.0, 0.7) == 0.0
    stationary = drafting.quasi_stationary_force(lambda t: 4.0, lambda t: 0.0, v, 0.6, 0.7)
    assert stationary == pytest.approx(4.0 * (v(0.6, 0.7) - v(0.0, 0.7)), rel=1e-15)
    assert drafting.quasi_stationary_force(q, lambda t: 1.0, v, 0.6, 0.7) == pytest.approx(
        q(0.7) * (v(0.6, 0.7) - v(0.0, 0.7)) + 0.6, rel=1e-15
    )


def test_floating_validation():
    with pytest.raises(ParameterError):
        drafting.floating_speed(2.0, 1.0, 6.0, 2.0, 0.5)
    with pytest.raises(ParameterError):
        drafting.floating_speed(1.0, 6.0, 6.0, 0.0, 0.5)
    with pytest.raises(ParameterError):
        drafting.quasi_stationary_Bx(6.0, 2.0, 1.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        drafting.floating_speed(1.0, 6.0, 6.0, 2.0, 0.5)


@pytest.mark.parametrize("xp", [0.1, 0.35, 0.5, 0.8])
def test_dynamic_length_is_stationary_draft_length(xp):
    # Mapping x' in (0, l) onto the whole line by x = -l ln((l - x')/x') turns the
    # floating speed law into dw/dx = (1/S)(w - v0)(v1 - w)/(2w).
    B, kappa, l = 6.0, 2.0, 1.5
    S = drafting.dynamic_fiber_length(B, kappa, l)
    h = 1e-6
    w = drafting.floating_speed(1.0, B, B, kappa, xp, l)
    dw_dxp = (drafting.floating_speed(1.0, B, B, kappa, xp + h, l) - drafting.floating_speed(1.0, B, B, kappa, xp - h, l)) / (2 * h)
    dx_dxp = l * l / (xp * (l - xp))
    assert dw_dxp / dx_dxp == pytest.approx((w - 1.0) * (B - w) / (2.0 * w) / S, rel=1e-6)
