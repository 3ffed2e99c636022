"""Multi-antenna interference coordination between overlapping cells.

Each transmitter serves one user over a shared band; rates follow from the
signal-to-interference-plus-noise ratio under unit-power beamformers. The
non-cooperative equilibrium is maximum ratio transmission. Cooperative
operating points are found on the line between each player's equilibrium
rate and its interference-free maximum, via a feasibility bisection in the
spirit of Kalai-Smorodinsky bargaining.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .seeding import substream

#: Beamformer power budget slack tolerated after normalization.
POWER_TOL = 1e-12

#: Rate gain below which a player is treated as already at its maximum.
_DEGENERATE_GAIN = 1e-9


class ZeroDirectChannelError(ValueError):
    """A direct channel vector is zero, so rates are undefined."""


@dataclass(frozen=True)
class InterferenceChannel:
    """Channel tensor H[l, m] = vector from transmitter l to user m.

    H has shape (M, M, K) for M transmitter-user pairs and K antennas;
    noise_power is the per-user noise variance in linear units.
    """

    H: np.ndarray
    noise_power: float

    def __post_init__(self) -> None:
        H = np.asarray(self.H, dtype=complex)
        if H.ndim != 3 or H.shape[0] != H.shape[1]:
            raise ValueError("channel tensor must have shape (M, M, K)")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "noise_power", float(self.noise_power))
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")
        for m in range(H.shape[0]):
            if np.linalg.norm(H[m, m]) == 0.0:
                raise ZeroDirectChannelError(f"direct channel {m} is zero")

    @property
    def num_players(self) -> int:
        return self.H.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.H.shape[2]


@dataclass
class FeasibilityResult:
    feasible: bool
    beamformers: np.ndarray | None
    best_fraction: float
    solver_ok: bool = True


@dataclass
class BargainingOutcome:
    ne_rates: np.ndarray
    max_rates: np.ndarray
    ksbs_rates: np.ndarray
    fraction: float
    beamformers: np.ndarray
    iterations: int
    mode: str
    ksbs_over_max: np.ndarray = field(default_factory=lambda: np.array([]))


def _check_beamformers(ch: InterferenceChannel, W: np.ndarray) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    if W.shape != (ch.num_players, ch.num_antennas):
        raise ValueError(
            f"beamformers must have shape {(ch.num_players, ch.num_antennas)}"
        )
    norms = np.linalg.norm(W, axis=1)
    if np.any(norms > 1.0 + POWER_TOL):
        raise ValueError("beamformer power budget exceeded")
    return W


def rate_vector(ch: InterferenceChannel, W: np.ndarray) -> np.ndarray:
    """Per-player rates log2(1 + SINR) in bits/s/Hz."""
    W = _check_beamformers(ch, W)
    # gains[l, m] = |w_l . h_lm|^2
    gains = np.abs(np.einsum("lk,lmk->lm", W, ch.H)) ** 2
    signal = np.diag(gains)
    interference = gains.sum(axis=0) - signal
    return np.log2(1.0 + signal / (ch.noise_power + interference))


def mrt_beamformer(ch: InterferenceChannel, m: int) -> np.ndarray:
    """Unit-norm beamformer maximizing player m's own received power."""
    h = ch.H[m, m]
    return np.conj(h) / np.linalg.norm(h)


def nash_beamformers(ch: InterferenceChannel) -> np.ndarray:
    """Mutual best responses: every player transmits at full power via MRT.

    A player's own beamformer only enters its rate through the signal term,
    so maximum ratio transmission is a dominant strategy and the profile is
    the unique equilibrium up to phase.
    """
    return np.vstack([mrt_beamformer(ch, m) for m in range(ch.num_players)])


def max_rates(ch: InterferenceChannel) -> np.ndarray:
    """Interference-free rate ceiling per player."""
    norms2 = np.array([np.linalg.norm(ch.H[m, m]) ** 2
                       for m in range(ch.num_players)])
    return np.log2(1.0 + norms2 / ch.noise_power)


def zero_forcing_beamformer(ch: InterferenceChannel, m: int
                            ) -> tuple[np.ndarray, bool]:
    """Beamformer for player m that nulls its leakage to the other user.

    Only defined for two players. Returns (vector, degenerate); when the
    direct and cross channels are parallel the null space kills the signal
    too, and the MRT vector is returned with degenerate=True.
    """
    if ch.num_players != 2:
        raise ValueError("zero forcing parametrization requires two players")
    other = 1 - m
    target = np.conj(ch.H[m, m])
    leak = np.conj(ch.H[m, other])
    leak_norm = np.linalg.norm(leak)
    if leak_norm == 0.0:
        return target / np.linalg.norm(target), False
    u = leak / leak_norm
    projected = target - np.vdot(u, target) * u
    norm = np.linalg.norm(projected)
    if norm < 1e-12 * np.linalg.norm(target):
        return target / np.linalg.norm(target), True
    return projected / norm, False


def pareto_parametrized_beamformer(m: int, lam: float,
                                   ch: InterferenceChannel
                                   ) -> tuple[np.ndarray, bool]:
    """Normalized blend lam * MRT + (1 - lam) * ZF for player m.

    Sweeping lam over [0, 1] for both players traces the cooperative rate
    region boundary of the two-player game.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    mrt = mrt_beamformer(ch, m)
    zf, degenerate = zero_forcing_beamformer(ch, m)
    blend = lam * mrt + (1.0 - lam) * zf
    norm = np.linalg.norm(blend)
    if norm == 0.0:  # pragma: no cover - blend has positive MRT component
        return mrt, degenerate
    return blend / norm, degenerate


# ---------------------------------------------------------------------------
# Max-min fraction search over admissible beamformers.


def _lambda_tables(ch: InterferenceChannel, m: int, lams: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Direct and cross gains of player m's blend along a lambda grid."""
    mrt = mrt_beamformer(ch, m)
    zf, _ = zero_forcing_beamformer(ch, m)
    W = lams[:, None] * mrt[None, :] + (1.0 - lams[:, None]) * zf[None, :]
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    other = 1 - m
    direct = np.abs(W @ ch.H[m, m]) ** 2
    cross = np.abs(W @ ch.H[m, other]) ** 2
    return direct, cross


def _fraction_grid(ch: InterferenceChannel, anchor: np.ndarray,
                   ideals: np.ndarray, l1: np.ndarray, l2: np.ndarray
                   ) -> np.ndarray:
    """min-over-players fraction on the (lambda_1, lambda_2) grid."""
    d1, c1 = _lambda_tables(ch, 0, l1)
    d2, c2 = _lambda_tables(ch, 1, l2)
    s2 = ch.noise_power
    r1 = np.log2(1.0 + d1[:, None] / (s2 + c2[None, :]))
    r2 = np.log2(1.0 + d2[None, :] / (s2 + c1[:, None]))
    out = np.full(r1.shape, np.inf)
    for rates, m in ((r1, 0), (r2, 1)):
        gain = ideals[m] - anchor[m]
        if gain <= _DEGENERATE_GAIN:
            frac = np.where(rates >= ideals[m] - 1e-9, 1.0, -np.inf)
        else:
            frac = (rates - anchor[m]) / gain
        out = np.minimum(out, frac)
    return out


def _fraction_of(ch: InterferenceChannel, W: np.ndarray, anchor: np.ndarray,
                 ideals: np.ndarray) -> float:
    rates = rate_vector(ch, W)
    worst = np.inf
    for m in range(ch.num_players):
        gain = ideals[m] - anchor[m]
        if gain <= _DEGENERATE_GAIN:
            frac = 1.0 if rates[m] >= ideals[m] - 1e-9 else -np.inf
        else:
            frac = (rates[m] - anchor[m]) / gain
        worst = min(worst, frac)
    return float(worst)


def _best_fraction_two_player(ch: InterferenceChannel, anchor: np.ndarray,
                              ideals: np.ndarray
                              ) -> tuple[float, np.ndarray]:
    coarse = np.linspace(0.0, 1.0, 129)
    grid = _fraction_grid(ch, anchor, ideals, coarse, coarse)
    i, j = np.unravel_index(int(grid.argmax()), grid.shape)
    best_pt = np.array([coarse[i], coarse[j]])
    best_val = float(grid[i, j])
    half = float(coarse[1] - coarse[0])
    for _ in range(10):
        l1 = np.clip(np.linspace(best_pt[0] - half, best_pt[0] + half, 17), 0.0, 1.0)
        l2 = np.clip(np.linspace(best_pt[1] - half, best_pt[1] + half, 17), 0.0, 1.0)
        local = _fraction_grid(ch, anchor, ideals, l1, l2)
        i, j = np.unravel_index(int(local.argmax()), local.shape)
        if float(local[i, j]) > best_val:
            best_val = float(local[i, j])
            best_pt = np.array([l1[i], l2[j]])
        half *= 0.35
    W = np.vstack([
        pareto_parametrized_beamformer(0, float(best_pt[0]), ch)[0],
        pareto_parametrized_beamformer(1, float(best_pt[1]), ch)[0],
    ])
    return _fraction_of(ch, W, anchor, ideals), W


def _best_fraction_multi(ch: InterferenceChannel, anchor: np.ndarray,
                         ideals: np.ndarray, rng: np.random.Generator,
                         starts: int = 8, tol: float = 1e-6
                         ) -> tuple[float, np.ndarray, bool]:
    """Multi-start ascent of the min fraction for three or more players.

    Heuristic: maximizes t subject to per-player fraction >= t and unit
    power budgets over the stacked real parametrization of the beamformers.
    """
    m_players = ch.num_players
    k = ch.num_antennas
    gains = ideals - anchor
    noise = ch.noise_power

    def unpack(x: np.ndarray) -> tuple[float, np.ndarray]:
        t = x[0]
        w = x[1:].reshape(m_players, 2, k)
        return t, w[:, 0, :] + 1j * w[:, 1, :]

    def neg_t(x: np.ndarray) -> float:
        return -x[0]

    def constraints(x: np.ndarray) -> np.ndarray:
        t, W = unpack(x)
        gmat = np.abs(np.einsum("lk,lmk->lm", W, ch.H)) ** 2
        signal = np.diag(gmat)
        interference = gmat.sum(axis=0) - signal
        rates = np.log2(1.0 + signal / (noise + interference))
        cons = []
        for m in range(m_players):
            if gains[m] <= _DEGENERATE_GAIN:
                cons.append(rates[m] - (ideals[m] - 1e-6))
            else:
                cons.append((rates[m] - anchor[m]) / gains[m] - t)
        cons.extend(1.0 - np.linalg.norm(W, axis=1) ** 2)
        return np.array(cons)

    def pack(W: np.ndarray, t: float) -> np.ndarray:
        stacked = np.stack([W.real, W.imag], axis=1).ravel()
        return np.concatenate([[t], stacked])

    best_val = -np.inf
    best_W: np.ndarray | None = None
    ok = False
    ne = nash_beamformers(ch)
    start_points = [ne]
    for _ in range(starts - 1):
        raw = rng.normal(size=(m_players, k)) + 1j * rng.normal(size=(m_players, k))
        start_points.append(raw / np.linalg.norm(raw, axis=1, keepdims=True))
    for W0 in start_points:
        x0 = pack(W0, _fraction_of(ch, W0, anchor, ideals))
        try:
            res = minimize(neg_t, x0, method="SLSQP",
                           constraints=[{"type": "ineq", "fun": constraints}],
                           options={"maxiter": 200, "ftol": tol})
        except Exception:
            continue
        t, W = unpack(res.x)
        norms = np.linalg.norm(W, axis=1, keepdims=True)
        W = W / np.maximum(norms, 1.0)  # project into the power budget
        val = _fraction_of(ch, W, anchor, ideals)
        if val > best_val:
            best_val, best_W = val, W
            ok = ok or res.success
    if best_W is None:  # pragma: no cover - NE start always evaluates
        return _fraction_of(ch, ne, anchor, ideals), ne, False
    # Never settle below the equilibrium witness.
    ne_val = _fraction_of(ch, ne, anchor, ideals)
    if ne_val > best_val:
        return ne_val, ne, ok
    return best_val, best_W, ok


def _max_min_fraction(ch: InterferenceChannel, anchor: np.ndarray,
                      ideals: np.ndarray,
                      rng: np.random.Generator | None = None
                      ) -> tuple[float, np.ndarray, bool]:
    if ch.num_players == 2:
        val, W = _best_fraction_two_player(ch, anchor, ideals)
        return val, W, True
    if rng is None:
        rng = substream(0, "bargain-ascent")
    return _best_fraction_multi(ch, anchor, ideals, rng)


def ksbs_feasible(r_prime: float, ch: InterferenceChannel,
                  rng: np.random.Generator | None = None) -> FeasibilityResult:
    """Can every player exceed fraction r_prime of its rate ceiling?

    The test is strict: rates exactly on the target do not count. For two
    players the search is exhaustive on the boundary parametrization; for
    more players it is a multi-start ascent and may under-report.
    """
    if not 0.0 <= r_prime <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    ideals = max_rates(ch)
    anchor = np.zeros(ch.num_players)
    best, W, ok = _max_min_fraction(ch, anchor, ideals, rng=rng)
    feasible = bool(best > r_prime)
    return FeasibilityResult(feasible=feasible,
                             beamformers=W if feasible else None,
                             best_fraction=best, solver_ok=ok)


def ksbs_bisection(ch: InterferenceChannel, delta: float = 1e-3,
                   mode: str = "ne-anchored",
                   rng: np.random.Generator | None = None
                   ) -> BargainingOutcome:
    """Bargained operating point via bisection on the common fraction.

    In the default "ne-anchored" mode every player receives the same
    fraction of its gain range between the non-cooperative equilibrium
    (the disagreement point) and its interference-free maximum. The
    "max-fraction" compatibility mode anchors at zero rate instead and
    equalizes fractions of the raw maxima. The reported fraction is the
    last feasible bisection point; the rate vector is evaluated at the best
    witnessed fraction, so it is achievable and equal-fraction by
    construction.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if mode not in ("ne-anchored", "max-fraction"):
        raise ValueError(f"unknown bargaining mode: {mode!r}")
    ne = rate_vector(ch, nash_beamformers(ch))
    ideals = max_rates(ch)
    anchor = ne.copy() if mode == "ne-anchored" else np.zeros(ch.num_players)
    f_star, W_star, _ = _max_min_fraction(ch, anchor, ideals, rng=rng)
    f_star = max(0.0, min(1.0, f_star))
    lower, upper = 0.0, 1.0
    iterations = 0
    while upper - lower > delta:
        mid = 0.5 * (lower + upper)
        if f_star > mid:
            lower = mid
        else:
            upper = mid
        iterations += 1
    ksbs = anchor + f_star * (ideals - anchor)
    ksbs = np.maximum(ksbs, anchor if mode == "ne-anchored" else 0.0)
    return BargainingOutcome(
        ne_rates=ne,
        max_rates=ideals,
        ksbs_rates=ksbs,
        fraction=lower,
        beamformers=W_star,
        iterations=iterations,
        mode=mode,
        ksbs_over_max=ksbs / np.maximum(ideals, 1e-300),
    )


def min_power_for_rate(rate_bps: float, bandwidth_hz: float,
                       pathloss_linear: float, noise_w: float,
                       interference_w: float = 0.0) -> float:
    """Transmit power needed to sustain rate_bps over bandwidth_hz, watts.

    pathloss_linear is the linear attenuation factor (>= 1) on the serving
    link; interference_w is the received interference power at the user.
    """
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    if pathloss_linear <= 0:
        raise ValueError("pathloss factor must be positive")
    if noise_w < 0 or interference_w < 0:
        raise ValueError("noise and interference must be non-negative")
    snr_needed = 2.0 ** (rate_bps / bandwidth_hz) - 1.0
    return snr_needed * pathloss_linear * (noise_w + interference_w)


def random_channel(num_players: int, num_antennas: int,
                   noise_power: float = 1.0,
                   seed: int | np.random.Generator = 0) -> InterferenceChannel:
    """Random channel with unit-variance complex normal entries."""
    rng = seed if isinstance(seed, np.random.Generator) \
        else substream(int(seed), "random-channel")
    shape = (num_players, num_players, num_antennas)
    H = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2.0)
    return InterferenceChannel(H=H, noise_power=noise_power)
