"""Planar coverage-disk placement and transmit-power-aware drone matching.

The planner partitions ground users into coverage disks with a Lloyd-style
k-center heuristic (nearest assignment alternating with exact one-center
updates), shrinks the disk profile by freezing the largest disk and
re-solving the remainder, and then prices each disk against a repository of
drones with bounded transmit power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .altitude import MIN_PRICING_RADIUS_M, radius_to_power
from .channel import Environment, dbm_to_watts
from .seeding import substream


class InfeasibleError(ValueError):
    """A disk profile cannot be matched to the drone repository."""


class NoFeasibleSolutionError(ValueError):
    """No deployment count admits a feasible drone matching."""


@dataclass(frozen=True)
class GroundUser:
    x_m: float
    y_m: float
    user_id: int


@dataclass(frozen=True)
class Disk:
    cx_m: float
    cy_m: float
    radius_m: float

    def contains(self, x: float, y: float, tol: float = 1e-9) -> bool:
        return math.hypot(x - self.cx_m, y - self.cy_m) <= self.radius_m + tol


@dataclass(frozen=True)
class DroneSpec:
    """One physical drone: a transmit power interval plus a type label."""

    type_id: str
    p_max_dbm: float
    p_min_dbm: float = float("-inf")

    def admits(self, pt_dbm: float) -> bool:
        return self.p_min_dbm <= pt_dbm <= self.p_max_dbm


@dataclass(frozen=True)
class Deployment:
    """A drone committed to one coverage disk."""

    drone_id: int
    type_id: str
    x_m: float
    y_m: float
    h_m: float
    radius_m: float
    pt_dbm: float


@dataclass
class PlacementSolution:
    deployments: list[Deployment]
    partition: dict[int, int]  # user_id -> drone_id
    aggregate_power_w: float
    num_deployed: int


@dataclass
class KCenterResult:
    centers: np.ndarray        # (M, 2)
    labels: np.ndarray         # (K,) cell index per user
    radii: np.ndarray          # (M,) one-center radius per cell
    iterations: int
    converged: bool
    max_radius_trace: list[float] = field(default_factory=list)

    @property
    def max_radius(self) -> float:
        return float(self.radii.max()) if self.radii.size else 0.0


def _as_xy(users: Sequence[GroundUser] | np.ndarray) -> np.ndarray:
    if isinstance(users, np.ndarray):
        xy = np.asarray(users, dtype=float)
    elif users and isinstance(users[0], GroundUser):
        xy = np.array([[u.x_m, u.y_m] for u in users], dtype=float)
    else:
        xy = np.asarray(users, dtype=float)
    xy = xy.reshape(-1, 2)
    if not np.all(np.isfinite(xy)):
        raise ValueError("user coordinates must be finite")
    return xy


def user_ids(users: Sequence[GroundUser] | np.ndarray) -> list[int]:
    if not isinstance(users, np.ndarray) and users and isinstance(users[0], GroundUser):
        return [u.user_id for u in users]
    return list(range(len(users)))


# ---------------------------------------------------------------------------
# Exact minimum enclosing disk, randomized incremental construction.
# Expected linear time; containment tests use a multiplicative epsilon so
# the incremental invariants survive roundoff.

_CONTAIN_EPS = 1.0 + 1e-14


def _in_circle(c: tuple[float, float, float], p: tuple[float, float]) -> bool:
    return math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * _CONTAIN_EPS


def _circle_two(p: tuple[float, float], q: tuple[float, float]) -> tuple[float, float, float]:
    cx = (p[0] + q[0]) / 2.0
    cy = (p[1] + q[1]) / 2.0
    r = max(math.hypot(p[0] - cx, p[1] - cy), math.hypot(q[0] - cx, q[1] - cy))
    return (cx, cy, r)


def _circumcircle(p, q, s) -> tuple[float, float, float] | None:
    # Offset toward the bounding-box midpoint before solving to tame
    # cancellation on nearly collinear triples.
    ox = (min(p[0], q[0], s[0]) + max(p[0], q[0], s[0])) / 2.0
    oy = (min(p[1], q[1], s[1]) + max(p[1], q[1], s[1])) / 2.0
    ax, ay = p[0] - ox, p[1] - oy
    bx, by = q[0] - ox, q[1] - oy
    cx, cy = s[0] - ox, s[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    x = ox + ((ax * ax + ay * ay) * (by - cy)
              + (bx * bx + by * by) * (cy - ay)
              + (cx * cx + cy * cy) * (ay - by)) / d
    y = oy + ((ax * ax + ay * ay) * (cx - bx)
              + (bx * bx + by * by) * (ax - cx)
              + (cx * cx + cy * cy) * (bx - ax)) / d
    r = max(math.hypot(p[0] - x, p[1] - y),
            math.hypot(q[0] - x, q[1] - y),
            math.hypot(s[0] - x, s[1] - y))
    return (x, y, r)


def _circle_one_point(pts, p):
    c = (p[0], p[1], 0.0)
    for i, q in enumerate(pts):
        if not _in_circle(c, q):
            if c[2] == 0.0:
                c = _circle_two(p, q)
            else:
                c = _circle_two_points(pts[: i + 1], p, q)
    return c


def _circle_two_points(pts, p, q):
    circ = _circle_two(p, q)
    left = None
    right = None
    px, py = p
    qx, qy = q
    for s in pts:
        if _in_circle(circ, s):
            continue
        cross = (qx - px) * (s[1] - py) - (qy - py) * (s[0] - px)
        c = _circumcircle(p, q, s)
        if c is None:
            continue
        ccross = (qx - px) * (c[1] - py) - (qy - py) * (c[0] - px)
        if cross > 0.0 and (left is None or ccross > (qx - px) * (left[1] - py) - (qy - py) * (left[0] - px)):
            left = c
        elif cross < 0.0 and (right is None or ccross < (qx - px) * (right[1] - py) - (qy - py) * (right[0] - px)):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def min_enclosing_disk(points: Iterable[Sequence[float]] | np.ndarray) -> Disk:
    """Unique smallest disk containing all points."""
    xy = _as_xy(np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float))
    if xy.shape[0] == 0:
        raise ValueError("points must be non-empty")
    pts = [(float(x), float(y)) for x, y in xy]
    order = np.random.default_rng(0x5EED).permutation(len(pts))
    shuffled = [pts[i] for i in order]
    c: tuple[float, float, float] | None = None
    for i, p in enumerate(shuffled):
        if c is None or not _in_circle(c, p):
            c = _circle_one_point(shuffled[:i], p)
    assert c is not None
    return Disk(cx_m=c[0], cy_m=c[1], radius_m=c[2])


# ---------------------------------------------------------------------------
# Lloyd-style k-center.


def assign_to_nearest(users: Sequence[GroundUser] | np.ndarray,
                      centers: np.ndarray) -> np.ndarray:
    """Cell index of the nearest center per user; ties pick the lowest index."""
    xy = _as_xy(users)
    ctr = np.asarray(centers, dtype=float).reshape(-1, 2)
    if ctr.shape[0] == 0:
        raise ValueError("centers must be non-empty")
    d2 = ((xy[:, None, :] - ctr[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _update_centers(xy: np.ndarray, labels: np.ndarray, centers: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    m = centers.shape[0]
    new_centers = centers.copy()
    radii = np.zeros(m)
    for i in range(m):
        cell = xy[labels == i]
        if cell.shape[0]:
            disk = min_enclosing_disk(cell)
            new_centers[i] = (disk.cx_m, disk.cy_m)
            radii[i] = disk.radius_m
        # Empty cells keep their previous center at radius zero.
    return new_centers, radii


def lloyd_kcenter(users: Sequence[GroundUser] | np.ndarray,
                  num_disks: int,
                  init_centers: np.ndarray,
                  max_iters: int = 100) -> KCenterResult:
    """Alternates nearest assignment with exact one-center updates.

    Stops as soon as the partition is stable; `converged=False` means the
    iteration cap was hit first. The per-iteration max radius never
    increases because the one-center update is optimal for its cell.
    """
    xy = _as_xy(users)
    if xy.shape[0] == 0:
        raise ValueError("users must be non-empty")
    if num_disks < 1:
        raise ValueError("need at least one disk")
    centers = np.asarray(init_centers, dtype=float).reshape(num_disks, 2).copy()
    labels = assign_to_nearest(xy, centers)
    trace: list[float] = []
    converged = False
    iterations = 0
    radii = np.zeros(num_disks)
    for it in range(1, max_iters + 1):
        iterations = it
        centers, radii = _update_centers(xy, labels, centers)
        trace.append(float(radii.max()))
        new_labels = assign_to_nearest(xy, centers)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
    if not converged:
        # Make the returned triple self-consistent for the final partition.
        centers, radii = _update_centers(xy, labels, centers)
        trace.append(float(radii.max()))
    return KCenterResult(centers=centers, labels=labels, radii=radii,
                         iterations=iterations, converged=converged,
                         max_radius_trace=trace)


def farthest_point_init(xy: np.ndarray, num_disks: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Greedy max-min seeding from a random first user."""
    n = xy.shape[0]
    first = int(rng.integers(n))
    chosen = [first]
    d2 = ((xy - xy[first]) ** 2).sum(axis=1)
    while len(chosen) < num_disks:
        nxt = int(d2.argmax())
        chosen.append(nxt)
        d2 = np.minimum(d2, ((xy - xy[nxt]) ** 2).sum(axis=1))
    return xy[chosen].copy()


def _random_init(xy: np.ndarray, num_disks: int,
                 rng: np.random.Generator) -> np.ndarray:
    n = xy.shape[0]
    if num_disks <= n:
        idx = rng.choice(n, size=num_disks, replace=False)
        return xy[idx].copy()
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    extra = rng.uniform(lo, hi, size=(num_disks - n, 2)) if np.any(hi > lo) \
        else np.tile(lo, (num_disks - n, 1))
    return np.vstack([xy.copy(), extra])


def best_kcenter(users: Sequence[GroundUser] | np.ndarray,
                 num_disks: int,
                 restarts: int = 32,
                 rng: np.random.Generator | None = None,
                 extra_inits: Sequence[np.ndarray] = (),
                 max_iters: int = 100) -> KCenterResult:
    """Best of several seeded Lloyd runs.

    Restart 0 uses farthest-point seeding, the rest are random; callers may
    prepend warm-start center sets. Winner has the lexicographically
    smallest (max radius, sum of radii).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    xy = _as_xy(users)
    inits: list[np.ndarray] = [np.asarray(c, dtype=float).reshape(num_disks, 2)
                               for c in extra_inits]
    if len(inits) < restarts:
        inits.append(farthest_point_init(xy, num_disks, rng))
    while len(inits) < restarts:
        inits.append(_random_init(xy, num_disks, rng))
    best: KCenterResult | None = None
    best_key: tuple[float, float] | None = None
    for init in inits:
        res = lloyd_kcenter(xy, num_disks, init, max_iters=max_iters)
        key = (res.max_radius, float(res.radii.sum()))
        if best_key is None or key < best_key:
            best, best_key = res, key
    assert best is not None
    return best


def recursive_radius_minimization(users: Sequence[GroundUser] | np.ndarray,
                                  num_disks: int,
                                  restarts: int = 32,
                                  max_iters: int = 100,
                                  rng: np.random.Generator | None = None
                                  ) -> tuple[list[Disk], np.ndarray]:
    """Shrinks the disk profile by freezing the largest disk per round.

    Each round runs a multi-restart k-center on the users not yet frozen,
    freezes the largest disk together with its cell, and recurses with one
    disk fewer. The surviving centers warm-start the next round, so frozen
    radii are non-increasing. Returns disks sorted by descending radius and
    the per-user disk index.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    xy = _as_xy(users)
    if xy.shape[0] == 0:
        raise ValueError("users must be non-empty")
    if num_disks < 1:
        raise ValueError("need at least one disk")
    owner = np.full(xy.shape[0], -1, dtype=int)
    remaining = np.arange(xy.shape[0])
    disks: list[Disk] = []
    warm: np.ndarray | None = None
    for m in range(num_disks, 0, -1):
        if remaining.size == 0:
            anchor = disks[-1] if disks else Disk(0.0, 0.0, 0.0)
            disks.append(Disk(anchor.cx_m, anchor.cy_m, 0.0))
            continue
        extra = [warm] if warm is not None else []
        res = best_kcenter(xy[remaining], m, restarts=restarts, rng=rng,
                           extra_inits=extra, max_iters=max_iters)
        counts = np.bincount(res.labels, minlength=m)
        candidates = np.flatnonzero(counts > 0)
        j = int(candidates[res.radii[candidates].argmax()])
        disks.append(Disk(float(res.centers[j, 0]), float(res.centers[j, 1]),
                          float(res.radii[j])))
        frozen = res.labels == j
        owner[remaining[frozen]] = len(disks) - 1
        remaining = remaining[~frozen]
        warm = np.delete(res.centers, j, axis=0) if m > 1 else None
    order = sorted(range(len(disks)), key=lambda i: -disks[i].radius_m)
    rank = {old: new for new, old in enumerate(order)}
    disks_sorted = [disks[i] for i in order]
    owner = np.array([rank[o] for o in owner], dtype=int)
    return disks_sorted, owner


# ---------------------------------------------------------------------------
# Drone matching and the deployment-count search.


def match_drones(radii_m: Sequence[float],
                 repository: Sequence[DroneSpec],
                 env: Environment,
                 strategy: str = "best_fit") -> list[int]:
    """Assigns each disk a distinct drone whose power interval admits it.

    `best_fit` picks the admissible drone with the smallest power ceiling;
    `first_fit` scans the repository in listed order. Raises
    InfeasibleError when some disk cannot be served.
    """
    if strategy not in ("best_fit", "first_fit"):
        raise ValueError(f"unknown matching strategy: {strategy!r}")
    used: set[int] = set()
    out: list[int] = []
    for radius in radii_m:
        priced = max(float(radius), MIN_PRICING_RADIUS_M)
        pt = radius_to_power(priced, env).pt_dbm
        if strategy == "best_fit":
            candidates = [(repository[i].p_max_dbm, i)
                          for i in range(len(repository))
                          if i not in used and repository[i].admits(pt)]
            if not candidates:
                raise InfeasibleError(
                    f"no unused drone admits {pt:.2f} dBm for radius {radius:.1f} m"
                )
            _, pick = min(candidates)
        else:
            pick = next((i for i in range(len(repository))
                         if i not in used and repository[i].admits(pt)), -1)
            if pick < 0:
                raise InfeasibleError(
                    f"no unused drone admits {pt:.2f} dBm for radius {radius:.1f} m"
                )
        used.add(pick)
        out.append(pick)
    return out


def _build_solution(disks: list[Disk], owner: np.ndarray,
                    assignment: list[int],
                    ids: list[int],
                    repository: Sequence[DroneSpec],
                    env: Environment) -> PlacementSolution:
    deployments = []
    for disk, drone_idx in zip(disks, assignment):
        priced = max(disk.radius_m, MIN_PRICING_RADIUS_M)
        alt = radius_to_power(priced, env)
        deployments.append(Deployment(
            drone_id=drone_idx,
            type_id=repository[drone_idx].type_id,
            x_m=disk.cx_m,
            y_m=disk.cy_m,
            h_m=alt.h_used_m,
            radius_m=alt.radius_m,
            pt_dbm=alt.pt_dbm,
        ))
    partition = {ids[u]: assignment[owner[u]] for u in range(len(ids))}
    aggregate = sum(dbm_to_watts(d.pt_dbm) for d in deployments)
    return PlacementSolution(deployments=deployments, partition=partition,
                             aggregate_power_w=aggregate,
                             num_deployed=len(deployments))


def candidate_solutions(users: Sequence[GroundUser] | np.ndarray,
                        repository: Sequence[DroneSpec],
                        env: Environment,
                        restarts: int = 32,
                        max_iters: int = 100,
                        seed: int = 0,
                        strategy: str = "best_fit") -> list[PlacementSolution]:
    """All feasible deployments for 1..N disks, cheapest aggregate first."""
    if not repository:
        raise ValueError("repository must be non-empty")
    xy = _as_xy(users)
    if xy.shape[0] == 0:
        raise ValueError("users must be non-empty")
    ids = user_ids(users)
    solutions: list[PlacementSolution] = []
    for m in range(1, len(repository) + 1):
        rng = substream(seed, "placement", m)
        disks, owner = recursive_radius_minimization(
            xy, m, restarts=restarts, max_iters=max_iters, rng=rng)
        try:
            assignment = match_drones([d.radius_m for d in disks],
                                      repository, env, strategy=strategy)
        except InfeasibleError:
            continue
        solutions.append(_build_solution(disks, owner, assignment, ids,
                                         repository, env))
    solutions.sort(key=lambda s: (s.aggregate_power_w, s.num_deployed))
    return solutions


def solve_placement(users: Sequence[GroundUser] | np.ndarray,
                    repository: Sequence[DroneSpec],
                    env: Environment,
                    restarts: int = 32,
                    max_iters: int = 100,
                    seed: int = 0,
                    strategy: str = "best_fit") -> PlacementSolution:
    """Feasible deployment with minimum aggregate transmit power (watts)."""
    solutions = candidate_solutions(users, repository, env,
                                    restarts=restarts, max_iters=max_iters,
                                    seed=seed, strategy=strategy)
    if not solutions:
        raise NoFeasibleSolutionError(
            "no deployment count admits a feasible drone matching"
        )
    return solutions[0]
