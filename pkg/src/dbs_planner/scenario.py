"""End-to-end scenarios: user sampling, deployment, rates, and sweeps.

The pipeline places coverage disks, prices them, associates users to the
strongest deployment, and resolves inter-cell interference in overlap
regions through the bargaining machinery. Per-user rates use the mean
channel for isolated links and seeded small-scale fading on beamformed
links, so that reruns with one seed are bit-reproducible.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import beamforming
from .altitude import radius_to_power
from .channel import (Environment, LinkGeometry, dbm_to_watts,
                      mean_pathloss_db)
from .placement import (Deployment, DroneSpec, GroundUser, InfeasibleError,
                        NoFeasibleSolutionError, PlacementSolution,
                        assign_to_nearest, candidate_solutions, match_drones,
                        user_ids, _as_xy)
from .seeding import substream

#: Acceptance probability below which truncated sampling refuses to run.
REJECTION_STALL_THRESHOLD = 1e-6

#: Overlap margin when testing disk membership, meters.
OVERLAP_MARGIN_M = 0.0


class RejectionStallError(RuntimeError):
    """Truncated sampling would almost never accept a draw."""


@dataclass(frozen=True)
class AreaConfig:
    """Rectangular service area; "centered" puts the origin at its middle."""

    l_x_m: float
    l_y_m: float
    origin: str = "centered"

    def __post_init__(self) -> None:
        if self.l_x_m <= 0 or self.l_y_m <= 0:
            raise ValueError("area side lengths must be positive")
        if self.origin not in ("centered", "corner"):
            raise ValueError("origin must be 'centered' or 'corner'")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        if self.origin == "centered":
            return (-self.l_x_m / 2, self.l_x_m / 2,
                    -self.l_y_m / 2, self.l_y_m / 2)
        return (0.0, self.l_x_m, 0.0, self.l_y_m)

    @property
    def center(self) -> tuple[float, float]:
        x_lo, x_hi, y_lo, y_hi = self.bounds
        return ((x_lo + x_hi) / 2, (y_lo + y_hi) / 2)


@dataclass(frozen=True)
class DistributionSpec:
    """User location law: uniform, or axis-wise truncated Gaussian."""

    kind: str = "uniform"
    mu_x_m: float = 0.0
    mu_y_m: float = 0.0
    sigma_x_m: float = 1.0
    sigma_y_m: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "truncated_gaussian"):
            raise ValueError("kind must be 'uniform' or 'truncated_gaussian'")
        if self.kind == "truncated_gaussian":
            if self.sigma_x_m <= 0 or self.sigma_y_m <= 0:
                raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class RadioConfig:
    """Downlink radio settings shared by every deployment."""

    bandwidth_hz: float = 1.0e6
    noise_dbm: float = -100.0
    beta_bps: float = 1.0e6
    num_antennas: int = 4

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        if self.beta_bps < 0:
            raise ValueError("rate requirement must be non-negative")
        if self.num_antennas < 1:
            raise ValueError("need at least one antenna")

    @property
    def noise_w(self) -> float:
        return dbm_to_watts(self.noise_dbm)


def _axis_acceptance(lo: float, hi: float, mu: float, sigma: float) -> float:
    z = 1.0 / (sigma * math.sqrt(2.0))
    return 0.5 * (math.erf((hi - mu) * z) - math.erf((lo - mu) * z))


def _sample_truncated_axis(num: int, lo: float, hi: float, mu: float,
                           sigma: float, rng: np.random.Generator
                           ) -> np.ndarray:
    accept = _axis_acceptance(lo, hi, mu, sigma)
    if accept < REJECTION_STALL_THRESHOLD:
        raise RejectionStallError(
            f"acceptance probability {accept:.2e} below threshold"
        )
    out = np.empty(0)
    batch = max(64, int(math.ceil(2.0 * num / accept)))
    while out.size < num:
        draws = rng.normal(mu, sigma, size=batch)
        out = np.concatenate([out, draws[(draws >= lo) & (draws <= hi)]])
    return out[:num]


def sample_users(num_users: int, area: AreaConfig, dist: DistributionSpec,
                 seed: int | np.random.Generator = 0) -> list[GroundUser]:
    """Draws user positions inside the area; deterministic per seed."""
    if num_users < 1:
        raise ValueError("need at least one user")
    rng = seed if isinstance(seed, np.random.Generator) \
        else substream(int(seed), "users")
    x_lo, x_hi, y_lo, y_hi = area.bounds
    if dist.kind == "uniform":
        xs = rng.uniform(x_lo, x_hi, size=num_users)
        ys = rng.uniform(y_lo, y_hi, size=num_users)
    else:
        xs = _sample_truncated_axis(num_users, x_lo, x_hi, dist.mu_x_m,
                                    dist.sigma_x_m, rng)
        ys = _sample_truncated_axis(num_users, y_lo, y_hi, dist.mu_y_m,
                                    dist.sigma_y_m, rng)
    return [GroundUser(float(x), float(y), i)
            for i, (x, y) in enumerate(zip(xs, ys))]


# ---------------------------------------------------------------------------
# Grid baseline.


def grid_shape(num_disks: int) -> tuple[int, int]:
    """Near-square (rows, cols) with rows*cols >= num_disks."""
    cols = int(math.ceil(math.sqrt(num_disks)))
    rows = int(math.ceil(num_disks / cols))
    return rows, cols


def voronoi_baseline(num_disks: int, area: AreaConfig,
                     users: Sequence[GroundUser] | np.ndarray,
                     repository: Sequence[DroneSpec], env: Environment,
                     strategy: str = "best_fit") -> PlacementSolution:
    """Equal-cell baseline: drones at grid cell centers, users to nearest.

    Per-drone radius is the farthest assigned user. Raises InfeasibleError
    when the repository cannot power the resulting disks.
    """
    if num_disks < 1:
        raise ValueError("need at least one disk")
    if num_disks > len(repository):
        raise ValueError("more disks than drones in the repository")
    rows, cols = grid_shape(num_disks)
    x_lo, x_hi, y_lo, y_hi = area.bounds
    dx = (x_hi - x_lo) / cols
    dy = (y_hi - y_lo) / rows
    centers = np.array([
        [x_lo + (j + 0.5) * dx, y_lo + (i + 0.5) * dy]
        for i in range(rows) for j in range(cols)
    ][:num_disks])
    xy = _as_xy(users)
    ids = user_ids(users)
    labels = assign_to_nearest(xy, centers)
    radii = np.zeros(num_disks)
    for i in range(num_disks):
        cell = xy[labels == i]
        if cell.shape[0]:
            radii[i] = float(np.sqrt(((cell - centers[i]) ** 2).sum(axis=1)).max())
    order = sorted(range(num_disks), key=lambda i: -radii[i])
    assignment_sorted = match_drones([radii[i] for i in order],
                                     repository, env, strategy=strategy)
    assignment = [0] * num_disks
    for pos, disk_idx in enumerate(order):
        assignment[disk_idx] = assignment_sorted[pos]
    deployments = []
    for i in range(num_disks):
        alt = radius_to_power(max(radii[i], 1.0), env)
        deployments.append(Deployment(
            drone_id=assignment[i],
            type_id=repository[assignment[i]].type_id,
            x_m=float(centers[i, 0]),
            y_m=float(centers[i, 1]),
            h_m=alt.h_used_m,
            radius_m=alt.radius_m,
            pt_dbm=alt.pt_dbm,
        ))
    partition = {ids[u]: assignment[labels[u]] for u in range(len(ids))}
    aggregate = sum(dbm_to_watts(d.pt_dbm) for d in deployments)
    return PlacementSolution(deployments=deployments, partition=partition,
                             aggregate_power_w=aggregate,
                             num_deployed=num_disks)


# ---------------------------------------------------------------------------
# Pipeline: placement, association, bargaining, per-user rates.


@dataclass
class ExperimentReport:
    solution: PlacementSolution
    aggregate_power_w: float
    per_user_rate_bps: np.ndarray
    avg_rate_bps: float
    num_deployed: int
    rate_satisfied: list[bool]
    all_rates_met: bool
    convergence_trace: list[tuple[int, int, int]]
    serving: np.ndarray | None = None


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _fading_vector(seed: int, drone_id: int, uid: int, k: int) -> np.ndarray:
    rng = substream(seed, "fading", drone_id, uid)
    return (rng.normal(size=k) + 1j * rng.normal(size=k)) / math.sqrt(2.0)


def evaluate_rates(solution: PlacementSolution,
                   users: Sequence[GroundUser] | np.ndarray,
                   env: Environment, radio: RadioConfig,
                   seed: int = 0, delta: float = 1e-3
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Per-user downlink rates for a fixed deployment, bits/s.

    Users associate with the deployment offering the highest mean received
    power. Deployments whose coverage disks share at least one user form a
    bargaining group and beamform jointly; users outside every overlap see
    the plain mean-channel signal-to-noise rate. Returns (rates, serving).
    """
    xy = _as_xy(users)
    ids = user_ids(users)
    deps = solution.deployments
    n_dep, n_usr = len(deps), xy.shape[0]
    noise_w = radio.noise_w
    k_ant = radio.num_antennas

    dist = np.sqrt(((np.array([[d.x_m, d.y_m] for d in deps])[:, None, :]
                     - xy[None, :, :]) ** 2).sum(axis=2))
    recv_w = np.empty((n_dep, n_usr))
    for i, d in enumerate(deps):
        for u in range(n_usr):
            loss = mean_pathloss_db(LinkGeometry(d.h_m, float(dist[i, u])), env)
            recv_w[i, u] = dbm_to_watts(d.pt_dbm - loss)
    serving = recv_w.argmax(axis=0)
    transmitting = np.zeros(n_dep, dtype=bool)
    for i in serving:
        transmitting[i] = True
    covered = dist <= (np.array([d.radius_m for d in deps])[:, None]
                       + OVERLAP_MARGIN_M + 1e-9)

    # Bargaining groups: transmitting deployments whose disks share a user.
    uf = _UnionFind(n_dep)
    for u in range(n_usr):
        coverers = [i for i in range(n_dep) if covered[i, u] and transmitting[i]]
        for a, b in zip(coverers, coverers[1:]):
            uf.union(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(n_dep):
        if transmitting[i]:
            groups.setdefault(uf.find(i), []).append(i)

    beam: dict[int, np.ndarray] = {}
    for gi, members in enumerate(sorted(groups.values())):
        if len(members) < 2:
            continue
        reps = []
        for i in members:
            served = np.flatnonzero(serving == i)
            proxy = np.array([
                sum(recv_w[l, u] for l in members if l != i and covered[l, u])
                for u in served
            ])
            reps.append(int(served[proxy.argmax()]))
        m = len(members)
        H = np.empty((m, m, k_ant), dtype=complex)
        for li, l in enumerate(members):
            for ji, j_rep in enumerate(reps):
                g = _fading_vector(seed, deps[l].drone_id, ids[j_rep], k_ant)
                H[li, ji] = g * math.sqrt(recv_w[l, j_rep])
        ch = beamforming.InterferenceChannel(H=H, noise_power=noise_w)
        outcome = beamforming.ksbs_bisection(
            ch, delta=delta, rng=substream(seed, "bargain", gi))
        for li, l in enumerate(members):
            beam[l] = outcome.beamformers[li]

    rates = np.empty(n_usr)
    for u in range(n_usr):
        i = int(serving[u])
        uid = ids[u]

        def link_gain(l: int) -> float:
            if l in beam:
                g = _fading_vector(seed, deps[l].drone_id, uid, k_ant)
                return float(np.abs(np.dot(beam[l], g)) ** 2)
            return 1.0

        signal = recv_w[i, u] * link_gain(i)
        interference = sum(
            recv_w[l, u] * link_gain(l)
            for l in range(n_dep)
            if l != i and transmitting[l] and covered[l, u]
        )
        rates[u] = radio.bandwidth_hz * math.log2(
            1.0 + signal / (noise_w + interference))
    return rates, serving


def run_pipeline(users: Sequence[GroundUser] | np.ndarray,
                 repository: Sequence[DroneSpec], env: Environment,
                 radio: RadioConfig, seed: int = 0, restarts: int = 32,
                 max_iters: int = 100, delta: float = 1e-3,
                 strategy: str = "best_fit") -> ExperimentReport:
    """Cheapest feasible deployment whose per-user rates meet the demand.

    Candidates are tried in ascending aggregate power; if none satisfies
    every user the best-covered candidate is reported with unmet flags
    rather than aborting.
    """
    cands = candidate_solutions(users, repository, env, restarts=restarts,
                                max_iters=max_iters, seed=seed,
                                strategy=strategy)
    if not cands:
        raise NoFeasibleSolutionError(
            "no deployment count admits a feasible drone matching"
        )
    beta = radio.beta_bps
    trace: list[tuple[int, int, int]] = []
    best: ExperimentReport | None = None
    for idx, cand in enumerate(cands):
        rates, serving = evaluate_rates(cand, users, env, radio,
                                        seed=seed, delta=delta)
        satisfied = [bool(r >= beta) for r in rates]
        unmet = len(satisfied) - sum(satisfied)
        trace.append((idx, cand.num_deployed, unmet))
        report = ExperimentReport(
            solution=cand,
            aggregate_power_w=cand.aggregate_power_w,
            per_user_rate_bps=rates,
            avg_rate_bps=float(rates.mean()),
            num_deployed=cand.num_deployed,
            rate_satisfied=satisfied,
            all_rates_met=unmet == 0,
            convergence_trace=trace,
            serving=serving,
        )
        if unmet == 0:
            return report
        if best is None or unmet < (len(best.rate_satisfied)
                                    - sum(best.rate_satisfied)):
            best = report
    assert best is not None
    best.convergence_trace = trace
    return best


# ---------------------------------------------------------------------------
# Monte Carlo sweeps.


@dataclass
class SweepRow:
    value: float
    mean_power_w: float
    mean_rate_bps: float
    mean_num_deployed: float
    trials: int
    voronoi_power_w: float | None = None


@dataclass(frozen=True)
class SweepSetup:
    env: Environment
    repository: tuple[DroneSpec, ...]
    area: AreaConfig
    dist: DistributionSpec
    radio: RadioConfig
    num_users: int
    restarts: int = 32
    max_iters: int = 100
    delta: float = 1e-3
    strategy: str = "best_fit"
    include_voronoi: bool = False


def _trial_settings(setup: SweepSetup, vary: str, value: float
                    ) -> tuple[int, DistributionSpec]:
    if vary == "users":
        num = int(round(value))
        if num < 1:
            raise ValueError("user counts must be >= 1")
        return num, setup.dist
    if vary == "density":
        if setup.dist.kind != "truncated_gaussian":
            raise ValueError(
                "density sweeps require a truncated_gaussian distribution"
            )
        if value <= 0:
            raise ValueError("densities must be positive")
        # value is users per km^2 at the hotspot peak; solve the peak of
        # the bivariate normal K / (2 pi sx sy) = density for sigma.
        density_m2 = value * 1e-6
        sigma = math.sqrt(setup.num_users / (2.0 * math.pi * density_m2))
        side = max(setup.area.l_x_m, setup.area.l_y_m)
        sigma = min(max(sigma, 1.0), 10.0 * side)
        return setup.num_users, replace(setup.dist, sigma_x_m=sigma,
                                        sigma_y_m=sigma)
    raise ValueError(f"unknown sweep axis: {vary!r}")


def _sweep_trial(args: tuple[SweepSetup, str, float, int, int, int]
                 ) -> tuple[float, float, float, float | None] | None:
    setup, vary, value, vi, trial, seed = args
    num_users, dist = _trial_settings(setup, vary, value)
    users = sample_users(num_users, setup.area, dist,
                         seed=substream(seed, "sweep-users", vi, trial))
    trial_seed = int(substream(seed, "sweep-trial", vi, trial)
                     .integers(2 ** 62))
    try:
        report = run_pipeline(users, list(setup.repository), setup.env,
                              setup.radio, seed=trial_seed,
                              restarts=setup.restarts,
                              max_iters=setup.max_iters, delta=setup.delta,
                              strategy=setup.strategy)
    except NoFeasibleSolutionError:
        return None
    voronoi_power: float | None = None
    if setup.include_voronoi:
        try:
            base = voronoi_baseline(report.num_deployed, setup.area, users,
                                    list(setup.repository), setup.env,
                                    strategy=setup.strategy)
            voronoi_power = base.aggregate_power_w
        except InfeasibleError:
            voronoi_power = None
    return (report.aggregate_power_w, report.avg_rate_bps,
            float(report.num_deployed), voronoi_power)


def sweep(setup: SweepSetup, vary: str, values: Sequence[float],
          trials: int, seed: int = 0, threads: int | None = None
          ) -> list[SweepRow]:
    """Monte Carlo sweep over an axis; per-trial streams are seed-derived.

    Trials that admit no feasible deployment are dropped from the row
    averages; the row records how many trials contributed. Results are
    identical whether trials run serially or in a process pool.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if threads is None:
        threads = int(os.environ.get("DBS_PLANNER_THREADS", "1") or "1")
    jobs = [(setup, vary, float(value), vi, t, seed)
            for vi, value in enumerate(values) for t in range(trials)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_trial, jobs))
    else:
        results = [_sweep_trial(job) for job in jobs]
    rows: list[SweepRow] = []
    for vi, value in enumerate(values):
        chunk = [r for r in results[vi * trials:(vi + 1) * trials]
                 if r is not None]
        if not chunk:
            rows.append(SweepRow(value=float(value), mean_power_w=math.nan,
                                 mean_rate_bps=math.nan,
                                 mean_num_deployed=math.nan, trials=0))
            continue
        powers = [c[0] for c in chunk]
        rates = [c[1] for c in chunk]
        counts = [c[2] for c in chunk]
        vor = [c[3] for c in chunk if c[3] is not None]
        rows.append(SweepRow(
            value=float(value),
            mean_power_w=float(np.mean(powers)),
            mean_rate_bps=float(np.mean(rates)),
            mean_num_deployed=float(np.mean(counts)),
            trials=len(chunk),
            voronoi_power_w=float(np.mean(vor)) if vor else (
                math.nan if setup.include_voronoi else None),
        ))
    return rows
