import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dbs_planner as dp
import oracles

# Sigmoid and pathloss values frozen from high-precision evaluation of the
# defining formulas (mpmath, 40 digits).
PSI_AT_ZERO = 0.02187262123328341
PSI_AT_90 = 0.9999750745379030
PSI_AT_A_DEG = 0.09425070688030160
FSPL_1KM_2GHZ = 98.46838313516300
GAMMA_1K_1K = 103.09253699280521


def test_los_probability_frozen_values(urban_env):
    assert dp.los_probability(0.0, urban_env) == pytest.approx(
        PSI_AT_ZERO, abs=1e-14)
    assert dp.los_probability(math.pi / 2, urban_env) == pytest.approx(
        PSI_AT_90, abs=1e-14)
    theta_a = math.radians(urban_env.a)
    assert dp.los_probability(theta_a, urban_env) == pytest.approx(
        PSI_AT_A_DEG, abs=1e-14)
    # At theta_deg == a the sigmoid exponent vanishes, so the value is
    # exactly 1 / (1 + a).
    assert dp.los_probability(theta_a, urban_env) == pytest.approx(
        1.0 / (1.0 + urban_env.a), abs=1e-15)


def test_los_probability_monotone_and_complement(urban_env):
    thetas = np.linspace(0.0, math.pi / 2, 500)
    vals = np.array([dp.los_probability(t, urban_env) for t in thetas])
    assert (np.diff(vals) > 0).all()
    assert ((vals > 0) & (vals < 1)).all()
    for t in (0.0, 0.3, 1.2):
        assert dp.nlos_probability(t, urban_env) == pytest.approx(
            1.0 - dp.los_probability(t, urban_env), abs=1e-15)


def test_los_probability_domain(urban_env):
    with pytest.raises(ValueError):
        dp.los_probability(-0.01, urban_env)
    with pytest.raises(ValueError):
        dp.los_probability(math.pi / 2 + 0.01, urban_env)


def test_fspl_frozen_value_and_scaling():
    assert dp.fspl_db(1000.0, 2.0e9) == pytest.approx(
        FSPL_1KM_2GHZ, abs=1e-12)
    # Doubling distance or frequency adds exactly 20*log10(2) dB.
    six = 20.0 * math.log10(2.0)
    assert dp.fspl_db(2000.0, 2.0e9) - dp.fspl_db(1000.0, 2.0e9) == \
        pytest.approx(six, abs=1e-12)
    assert dp.fspl_db(1000.0, 4.0e9) - dp.fspl_db(1000.0, 2.0e9) == \
        pytest.approx(six, abs=1e-12)


def test_mean_pathloss_frozen_value(urban_env):
    geom = dp.LinkGeometry(1000.0, 1000.0)
    assert dp.mean_pathloss_db(geom, urban_env) == pytest.approx(
        GAMMA_1K_1K, abs=1e-12)


def test_mean_pathloss_matches_compact_form(urban_env):
    rng = np.random.default_rng(42)
    hs = rng.uniform(1.0, 5000.0, 100)
    rs = rng.uniform(0.0, 8000.0, 100)
    expected = oracles.pathloss_compact_db(hs, rs)
    for h, r, want in zip(hs, rs, expected):
        got = dp.mean_pathloss_db(dp.LinkGeometry(h, r), urban_env)
        assert got == pytest.approx(want, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(h=st.floats(0.5, 9000.0), r=st.floats(0.0, 9000.0))
def test_mean_pathloss_between_pure_los_and_nlos(h, r):
    env = dp.ENVIRONMENT_PRESETS["urban"]
    geom = dp.LinkGeometry(h, r)
    base = dp.fspl_db(geom.distance_m, env.fc_hz)
    loss = dp.mean_pathloss_db(geom, env)
    assert base + env.eta_los_db - 1e-9 <= loss <= base + env.eta_nlos_db + 1e-9


def test_geometry_properties():
    geom = dp.LinkGeometry(300.0, 400.0)
    assert geom.distance_m == pytest.approx(500.0, abs=1e-12)
    assert geom.elevation_rad == pytest.approx(math.atan(300.0 / 400.0))
    assert dp.LinkGeometry(100.0, 0.0).elevation_rad == pytest.approx(
        math.pi / 2)
    with pytest.raises(ValueError):
        dp.LinkGeometry(0.0, 100.0)
    with pytest.raises(ValueError):
        dp.LinkGeometry(100.0, -1.0)


def test_power_conversions():
    assert dp.dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-15)
    assert dp.dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-15)
    assert dp.watts_to_dbm(1.0) == pytest.approx(30.0, abs=1e-12)
    for dbm in (-70.0, -10.0, 3.0, 41.5):
        assert dp.watts_to_dbm(dp.dbm_to_watts(dbm)) == pytest.approx(
            dbm, abs=1e-12)
    assert dp.db_to_linear(10.0) == pytest.approx(10.0, rel=1e-15)
    assert dp.linear_to_db(100.0) == pytest.approx(20.0, abs=1e-12)


def test_coverage_threshold_is_inclusive(urban_env):
    geom = dp.LinkGeometry(900.0, 1200.0)
    loss = dp.mean_pathloss_db(geom, urban_env)
    pt_exact = loss + urban_env.epsilon_dbm
    assert dp.is_covered(pt_exact, geom, urban_env)
    assert dp.is_covered(pt_exact + 0.1, geom, urban_env)
    assert not dp.is_covered(pt_exact - 1e-6, geom, urban_env)
    assert dp.received_power_dbm(pt_exact, geom, urban_env) == pytest.approx(
        urban_env.epsilon_dbm, abs=1e-12)


def test_environment_validation():
    with pytest.raises(ValueError):
        dp.Environment(a=-1.0, b=0.16, eta_los_db=1.0, eta_nlos_db=20.0,
                       fc_hz=2e9, epsilon_dbm=-60.0, h_max_m=3000.0)
    with pytest.raises(ValueError):
        dp.Environment(a=9.61, b=0.16, eta_los_db=21.0, eta_nlos_db=20.0,
                       fc_hz=2e9, epsilon_dbm=-60.0, h_max_m=3000.0)
    with pytest.raises(ValueError):
        dp.Environment(a=9.61, b=0.16, eta_los_db=1.0, eta_nlos_db=20.0,
                       fc_hz=0.0, epsilon_dbm=-60.0, h_max_m=3000.0)


def test_load_environment_forms(tmp_path, urban_env):
    mapping = {"a": 9.61, "b": 0.16, "eta_los_db": 1.0, "eta_nlos_db": 20.0,
               "fc_hz": 2.0e9, "epsilon_dbm": -60.0, "h_max_m": 3000.0}
    assert dp.load_environment(mapping) == urban_env
    assert dp.load_environment("urban") == urban_env
    path = tmp_path / "env.json"
    path.write_text(json.dumps(mapping))
    assert dp.load_environment(str(path)) == urban_env
    with pytest.raises(ValueError):
        dp.load_environment({**mapping, "bogus": 1.0})
    incomplete = dict(mapping)
    del incomplete["fc_hz"]
    with pytest.raises(ValueError):
        dp.load_environment(incomplete)
    with pytest.raises(ValueError):
        dp.load_environment("no-such-preset")
