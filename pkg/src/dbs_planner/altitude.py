"""Altitude and transmit power sizing for a target coverage radius.

At the cell edge the mean pathloss is minimized at one environment-specific
elevation angle, so for an unclamped platform the best altitude is
proportional to the coverage radius. The proportionality angle solves a
one-dimensional stationarity condition and does not depend on the radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.optimize import brentq

from .channel import Environment, LinkGeometry, mean_pathloss_db

#: Degenerate coverage disks are priced at this radius to keep the edge
#: pathloss finite; it is far below any radius the planner produces.
MIN_PRICING_RADIUS_M = 1.0

_BRACKET_PAD_RAD = 1e-9


class NoRootError(ValueError):
    """The stationarity condition has no root in (0, pi/2)."""


class NoCoverageError(ValueError):
    """No positive radius is coverable at the requested transmit power."""


@dataclass(frozen=True)
class AltitudeSolution:
    """Edge-optimal sizing of one coverage disk.

    theta_rad   environment's optimal elevation angle at the cell edge
    h_opt_m     unclamped optimal altitude, radius * tan(theta)
    h_used_m    altitude after applying the platform ceiling
    radius_m    coverage radius the power was sized for
    pt_dbm      minimum transmit power that covers the disk edge
    """

    theta_rad: float
    h_opt_m: float
    h_used_m: float
    radius_m: float
    pt_dbm: float


def _stationarity_residual(theta_rad: float, env: Environment) -> float:
    theta_deg = math.degrees(theta_rad)
    decay = env.a * math.exp(-env.b * (theta_deg - env.a))
    gap = env.excess_gap_db
    # 9 ln(10) / pi folds the deg-to-rad slope into the dB-to-neper slope.
    return math.tan(theta_rad) + (
        9.0 * math.log(10.0) * env.b * gap * decay
        / (math.pi * (decay + 1.0) ** 2)
    )


@lru_cache(maxsize=None)
def optimal_elevation_angle(env: Environment) -> float:
    """Edge elevation angle minimizing mean pathloss, radians.

    Independent of the coverage radius. Raises NoRootError when the LoS
    excess loss does not undercut the NLoS one (no interior minimum).
    """
    if env.excess_gap_db >= 0:
        raise NoRootError(
            "no optimal elevation angle: LoS excess loss must be below NLoS"
        )
    lo = _BRACKET_PAD_RAD
    hi = math.pi / 2 - _BRACKET_PAD_RAD
    # Residual is negative near 0 and dominated by tan near pi/2.
    theta = brentq(_stationarity_residual, lo, hi, args=(env,),
                   xtol=1e-15, rtol=8.9e-16, maxiter=200)
    residual = _stationarity_residual(theta, env)
    if abs(residual) > 1e-10:
        raise NoRootError(f"root refinement failed, residual {residual:.3e}")
    return float(theta)


def radius_to_power(radius_m: float, env: Environment) -> AltitudeSolution:
    """Minimum transmit power and altitude covering the given radius."""
    if radius_m <= 0:
        raise ValueError("radius must be positive")
    theta = optimal_elevation_angle(env)
    h_opt = radius_m * math.tan(theta)
    h_used = min(h_opt, env.h_max_m)
    edge = LinkGeometry(h_m=h_used, r_m=radius_m)
    pt_dbm = mean_pathloss_db(edge, env) + env.epsilon_dbm
    return AltitudeSolution(
        theta_rad=theta,
        h_opt_m=h_opt,
        h_used_m=h_used,
        radius_m=radius_m,
        pt_dbm=pt_dbm,
    )


def power_to_radius(pt_dbm: float, env: Environment) -> AltitudeSolution:
    """Largest coverage radius affordable at pt_dbm, edge-optimally sized.

    The required power is strictly increasing in the radius, so the radius
    is recovered by bracketing plus bisection.
    """
    if not math.isfinite(pt_dbm):
        raise ValueError("transmit power must be finite")
    r_lo = 1e-9
    if radius_to_power(r_lo, env).pt_dbm > pt_dbm:
        raise NoCoverageError(
            f"{pt_dbm:.2f} dBm cannot cover any positive radius"
        )
    r_hi = 1.0
    for _ in range(200):
        if radius_to_power(r_hi, env).pt_dbm > pt_dbm:
            break
        r_lo = r_hi
        r_hi *= 2.0
    else:  # pragma: no cover - power grows without bound in the radius
        raise NoCoverageError("radius bracket expansion failed")
    while (r_hi - r_lo) > 1e-12 * r_hi:
        mid = 0.5 * (r_lo + r_hi)
        if radius_to_power(mid, env).pt_dbm <= pt_dbm:
            r_lo = mid
        else:
            r_hi = mid
    return radius_to_power(r_lo, env)
