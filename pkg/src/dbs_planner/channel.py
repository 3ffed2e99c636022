"""Air-to-ground channel model for low-altitude aerial base stations.

Mean pathloss combines free-space loss with excess losses for line-of-sight
and non-line-of-sight propagation, weighted by an elevation-angle sigmoid.
All angles are radians at the API surface; degrees appear only inside the
sigmoid, whose fit constants are degree-based.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Mapping

SPEED_OF_LIGHT = 2.99792458e8  # m/s


@dataclass(frozen=True)
class Environment:
    """Propagation environment: sigmoid fit constants plus link budget knobs.

    a, b            unitless sigmoid constants (degree-based fit)
    eta_los_db      mean excess loss on LoS links, dB
    eta_nlos_db     mean excess loss on NLoS links, dB (>= eta_los_db)
    fc_hz           carrier frequency, Hz
    epsilon_dbm     minimum received power for coverage, dBm
    h_max_m         maximum platform altitude, m
    """

    a: float
    b: float
    eta_los_db: float
    eta_nlos_db: float
    fc_hz: float
    epsilon_dbm: float
    h_max_m: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "eta_los_db", "eta_nlos_db", "fc_hz",
                     "epsilon_dbm", "h_max_m"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.a <= 0 or self.b <= 0:
            raise ValueError("sigmoid constants a and b must be positive")
        if self.fc_hz <= 0:
            raise ValueError("carrier frequency must be positive")
        if self.h_max_m <= 0:
            raise ValueError("altitude ceiling must be positive")
        if self.eta_nlos_db < self.eta_los_db:
            raise ValueError("NLoS excess loss must be >= LoS excess loss")

    @property
    def excess_gap_db(self) -> float:
        """LoS-minus-NLoS excess loss (<= 0 in meaningful environments)."""
        return self.eta_los_db - self.eta_nlos_db


#: Named presets: the four standard 2 GHz environment fits. Sigmoid and
#: excess-loss constants differ per class; carrier, coverage threshold and
#: ceiling share the urban defaults and can be overridden with
#: dataclasses.replace.
ENVIRONMENT_PRESETS: dict[str, Environment] = {
    "suburban": Environment(
        a=4.88,
        b=0.43,
        eta_los_db=0.1,
        eta_nlos_db=21.0,
        fc_hz=2.0e9,
        epsilon_dbm=-60.0,
        h_max_m=3000.0,
    ),
    "urban": Environment(
        a=9.61,
        b=0.16,
        eta_los_db=1.0,
        eta_nlos_db=20.0,
        fc_hz=2.0e9,
        epsilon_dbm=-60.0,
        h_max_m=3000.0,
    ),
    "dense-urban": Environment(
        a=12.08,
        b=0.11,
        eta_los_db=1.6,
        eta_nlos_db=23.0,
        fc_hz=2.0e9,
        epsilon_dbm=-60.0,
        h_max_m=3000.0,
    ),
    "highrise": Environment(
        a=27.23,
        b=0.08,
        eta_los_db=2.3,
        eta_nlos_db=34.0,
        fc_hz=2.0e9,
        epsilon_dbm=-60.0,
        h_max_m=3000.0,
    ),
}

_ENV_FIELDS = ("a", "b", "eta_los_db", "eta_nlos_db", "fc_hz",
               "epsilon_dbm", "h_max_m")


def environment_from_mapping(data: Mapping[str, float]) -> Environment:
    """Builds an Environment from a mapping; unknown keys are rejected."""
    unknown = set(data) - set(_ENV_FIELDS)
    if unknown:
        raise ValueError(f"unknown environment fields: {sorted(unknown)}")
    missing = set(_ENV_FIELDS) - set(data)
    if missing:
        raise ValueError(f"missing environment fields: {sorted(missing)}")
    return Environment(**{k: float(data[k]) for k in _ENV_FIELDS})


def load_environment(spec: str | Mapping[str, float]) -> Environment:
    """Resolves a preset name, a JSON file path, or an inline mapping."""
    if isinstance(spec, Mapping):
        return environment_from_mapping(spec)
    if spec in ENVIRONMENT_PRESETS:
        return ENVIRONMENT_PRESETS[spec]
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            return environment_from_mapping(json.load(fh))
    raise ValueError(f"unknown environment preset or file: {spec!r}")


@dataclass(frozen=True)
class LinkGeometry:
    """Altitude h and ground range r of one platform-to-user link, meters."""

    h_m: float
    r_m: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "h_m", float(self.h_m))
        object.__setattr__(self, "r_m", float(self.r_m))
        if self.h_m <= 0:
            raise ValueError("altitude must be positive")
        if self.r_m < 0:
            raise ValueError("ground range must be non-negative")

    @property
    def distance_m(self) -> float:
        return math.hypot(self.h_m, self.r_m)

    @property
    def elevation_rad(self) -> float:
        # atan2 gives pi/2 in the overhead limit r = 0.
        return math.atan2(self.h_m, self.r_m)


def los_probability(theta_rad: float, env: Environment) -> float:
    """Line-of-sight probability at elevation angle theta (radians)."""
    if not 0.0 <= theta_rad <= math.pi / 2:
        raise ValueError("elevation angle must lie in [0, pi/2]")
    theta_deg = math.degrees(theta_rad)
    return 1.0 / (1.0 + env.a * math.exp(-env.b * (theta_deg - env.a)))


def nlos_probability(theta_rad: float, env: Environment) -> float:
    return 1.0 - los_probability(theta_rad, env)


def fspl_db(distance_m: float, fc_hz: float) -> float:
    """Free-space pathloss over distance_m at carrier fc_hz, in dB."""
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    if fc_hz <= 0:
        raise ValueError("carrier frequency must be positive")
    return 20.0 * math.log10(4.0 * math.pi * fc_hz * distance_m / SPEED_OF_LIGHT)


def mean_pathloss_db(geom: LinkGeometry, env: Environment) -> float:
    """LoS-probability-weighted mean pathloss of the link, in dB."""
    p_los = los_probability(geom.elevation_rad, env)
    excess = env.eta_los_db * p_los + env.eta_nlos_db * (1.0 - p_los)
    return fspl_db(geom.distance_m, env.fc_hz) + excess


def received_power_dbm(pt_dbm: float, geom: LinkGeometry, env: Environment) -> float:
    return pt_dbm - mean_pathloss_db(geom, env)


def is_covered(pt_dbm: float, geom: LinkGeometry, env: Environment) -> bool:
    """True when mean received power meets the coverage threshold.

    The boundary counts as covered (non-strict comparison).
    """
    return mean_pathloss_db(geom, env) <= pt_dbm - env.epsilon_dbm


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    if p_w <= 0:
        raise ValueError("power must be positive")
    return 10.0 * math.log10(p_w) + 30.0


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("value must be positive")
    return 10.0 * math.log10(x)
