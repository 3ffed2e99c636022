import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dbs_planner as dp
import oracles

# Frozen from high-precision root finding on the stationarity equation.
THETA_STAR_URBAN = 0.7406925576955851
TAN_THETA_STAR = 0.9143603026218960
# Transmit powers that exactly cover the given radii in the urban preset
# (epsilon = -60 dBm), frozen from high-precision evaluation.
PT_500 = 36.99655722656017
PT_1000 = 43.01715713983980
PT_2000 = 49.03775705311943
# Urban minimum pathloss is 20*log10(R) + this constant below the clamp,
# which makes the 1 km transmit power at epsilon = -60 dBm equal to the
# constant itself.
URBAN_LOSS_CONST = PT_1000


def test_optimal_angle_frozen_value(urban_env):
    theta = dp.optimal_elevation_angle(urban_env)
    assert theta == pytest.approx(THETA_STAR_URBAN, abs=1e-10)
    assert math.tan(theta) == pytest.approx(TAN_THETA_STAR, abs=1e-10)


def test_optimal_angle_matches_grid_argmin(urban_env):
    theta = dp.optimal_elevation_angle(urban_env)
    grid = oracles.optimal_angle_grid(num=400_000)
    assert theta == pytest.approx(grid, abs=1e-5)


def test_optimal_angle_requires_los_advantage(urban_env):
    flat = dataclasses.replace(urban_env, eta_los_db=20.0, eta_nlos_db=20.0)
    with pytest.raises(dp.NoRootError):
        dp.optimal_elevation_angle(flat)


def test_radius_to_power_frozen_values(urban_env):
    for radius, want in ((500.0, PT_500), (1000.0, PT_1000),
                         (2000.0, PT_2000)):
        sol = dp.radius_to_power(radius, urban_env)
        assert sol.pt_dbm == pytest.approx(want, abs=1e-9)
        assert sol.radius_m == radius
        assert sol.h_used_m == pytest.approx(radius * TAN_THETA_STAR,
                                             abs=1e-6)
        assert sol.h_used_m == sol.h_opt_m


def test_radius_to_power_matches_oracle(urban_env):
    theta_star = oracles.optimal_angle_grid(num=400_000)
    for radius in (120.0, 750.0, 1500.0, 2900.0, 4000.0):
        want = oracles.required_power_dbm(radius, theta_star=theta_star,
                                          floor_m=0.0)
        got = dp.radius_to_power(radius, urban_env).pt_dbm
        assert got == pytest.approx(want, abs=1e-6)


def test_altitude_clamp(urban_env):
    clamp_radius = urban_env.h_max_m / TAN_THETA_STAR
    sol = dp.radius_to_power(clamp_radius * 1.5, urban_env)
    assert sol.h_opt_m > urban_env.h_max_m
    assert sol.h_used_m == urban_env.h_max_m
    # Clamping costs power relative to the unconstrained scaling law.
    unclamped_extrapolation = PT_1000 + 20.0 * math.log10(
        clamp_radius * 1.5 / 1000.0)
    assert sol.pt_dbm > unclamped_extrapolation
    # The clamped altitude is still the best available: any feasible h
    # does no better.
    for h in np.linspace(100.0, urban_env.h_max_m, 50):
        loss_h = dp.mean_pathloss_db(dp.LinkGeometry(h, clamp_radius * 1.5),
                                     urban_env)
        assert sol.pt_dbm <= loss_h + urban_env.epsilon_dbm + 1e-9


def test_pathloss_unimodal_in_altitude(urban_env):
    for r in (1000.0, 3000.0):
        hs = np.arange(10.0, 10_000.0 + 10.0, 10.0)
        losses = np.array([
            dp.mean_pathloss_db(dp.LinkGeometry(h, r), urban_env)
            for h in hs
        ])
        diffs = np.diff(losses)
        diffs[np.abs(diffs) <= 1e-12] = 0.0
        signs = np.sign(diffs)
        signs = signs[signs != 0]
        transitions = np.count_nonzero(np.diff(signs) != 0)
        assert transitions == 1
        assert signs[0] < 0 < signs[-1]


def test_power_radius_roundtrip(urban_env):
    rng = np.random.default_rng(3)
    for pt in rng.uniform(10.0, 55.0, 20):
        sol = dp.power_to_radius(pt, urban_env)
        assert sol.pt_dbm == pytest.approx(pt, abs=1e-7)
        back = dp.radius_to_power(sol.radius_m, urban_env)
        assert back.pt_dbm == pytest.approx(pt, abs=1e-7)


def test_power_to_radius_closed_form(urban_env):
    # Below the altitude clamp the urban radius follows a pure 20 dB per
    # decade law anchored at the 1 km point.
    for pt in (25.0, 33.0, 41.0):
        want = 10.0 ** ((pt - urban_env.epsilon_dbm - URBAN_LOSS_CONST)
                        / 20.0)
        got = dp.power_to_radius(pt, urban_env).radius_m
        assert got == pytest.approx(want, rel=1e-9)


@settings(max_examples=80, deadline=None)
@given(r1=st.floats(1.0, 8000.0), r2=st.floats(1.0, 8000.0))
def test_required_power_strictly_increasing(r1, r2):
    env = dp.ENVIRONMENT_PRESETS["urban"]
    if abs(r1 - r2) < 1e-6:
        return
    lo, hi = sorted((r1, r2))
    assert dp.radius_to_power(lo, env).pt_dbm < dp.radius_to_power(
        hi, env).pt_dbm


def test_power_to_radius_no_coverage(urban_env):
    floor = dp.radius_to_power(1e-9, urban_env).pt_dbm
    with pytest.raises(dp.NoCoverageError):
        dp.power_to_radius(floor - 1.0, urban_env)
    with pytest.raises(ValueError):
        dp.power_to_radius(math.nan, urban_env)


def test_radius_to_power_rejects_bad_radius(urban_env):
    with pytest.raises(ValueError):
        dp.radius_to_power(0.0, urban_env)
    with pytest.raises(ValueError):
        dp.radius_to_power(-5.0, urban_env)


def test_angle_independent_of_radius(urban_env):
    # The same stationary angle must minimize the pathloss at any radius.
    theta = dp.optimal_elevation_angle(urban_env)
    for r in (500.0, 2000.0, 5000.0):
        thetas = np.linspace(theta - 0.05, theta + 0.05, 2001)
        losses = oracles.pathloss_compact_db(r * np.tan(thetas), r)
        assert thetas[np.argmin(losses)] == pytest.approx(theta, abs=1e-4)
