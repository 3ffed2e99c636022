"""Independent brute-force reference implementations used by the tests.

Everything here is written directly against the underlying math with plain
numpy and the standard library, never by calling the package under test, so
a library bug cannot hide behind a shared code path.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

SPEED_OF_LIGHT = 2.99792458e8

URBAN = {
    "a": 9.61,
    "b": 0.16,
    "eta_los_db": 1.0,
    "eta_nlos_db": 20.0,
    "fc_hz": 2.0e9,
    "epsilon_dbm": -60.0,
    "h_max_m": 3000.0,
}


# ---------------------------------------------------------------------------
# Pathloss, written in the single-expression form (the library composes it
# from FSPL plus sigmoid-weighted excess losses instead).


def pathloss_compact_db(h_m, r_m, p=URBAN):
    h = np.asarray(h_m, dtype=float)
    r = np.asarray(r_m, dtype=float)
    d = np.hypot(h, r)
    theta_deg = np.degrees(np.arctan2(h, r))
    gap = p["eta_los_db"] - p["eta_nlos_db"]
    sigmoid = 1.0 + p["a"] * np.exp(-p["b"] * (theta_deg - p["a"]))
    const = p["eta_nlos_db"] + 20.0 * np.log10(
        4.0 * math.pi * p["fc_hz"] / SPEED_OF_LIGHT)
    return 20.0 * np.log10(d) + gap / sigmoid + const


def optimal_angle_grid(p=URBAN, num=200_000):
    """Argmin of pathloss at fixed ground radius over a dense angle grid."""
    theta = np.linspace(1e-6, math.pi / 2 - 1e-6, num)
    r = 1000.0
    losses = pathloss_compact_db(r * np.tan(theta), r, p)
    return float(theta[np.argmin(losses)])


def required_power_dbm(radius_m, p=URBAN, theta_star=None, floor_m=1.0):
    """Transmit power that just covers a disk of the given radius."""
    if theta_star is None:
        theta_star = optimal_angle_grid(p)
    r = max(float(radius_m), floor_m)
    h = min(r * math.tan(theta_star), p["h_max_m"])
    return float(pathloss_compact_db(h, r, p)) + p["epsilon_dbm"]


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


# ---------------------------------------------------------------------------
# Minimum enclosing disk by pair/triple enumeration.


def med_bruteforce(points):
    """Smallest enclosing circle via all pair and triple candidates."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("empty point set")
    if n == 1:
        return pts[0, 0], pts[0, 1], 0.0
    centers = []
    radii2 = []
    ii, jj = np.triu_indices(n, 1)
    mids = (pts[ii] + pts[jj]) / 2.0
    centers.append(mids)
    radii2.append(((pts[ii] - pts[jj]) ** 2).sum(axis=1) / 4.0)
    if n >= 3:
        trips = np.array(list(itertools.combinations(range(n), 3)))
        a, b, c = pts[trips[:, 0]], pts[trips[:, 1]], pts[trips[:, 2]]
        d = 2.0 * (a[:, 0] * (b[:, 1] - c[:, 1])
                   + b[:, 0] * (c[:, 1] - a[:, 1])
                   + c[:, 0] * (a[:, 1] - b[:, 1]))
        ok = np.abs(d) > 1e-12
        a, b, c, d = a[ok], b[ok], c[ok], d[ok]
        na = (a ** 2).sum(axis=1)
        nb = (b ** 2).sum(axis=1)
        nc = (c ** 2).sum(axis=1)
        ux = (na * (b[:, 1] - c[:, 1]) + nb * (c[:, 1] - a[:, 1])
              + nc * (a[:, 1] - b[:, 1])) / d
        uy = (na * (c[:, 0] - b[:, 0]) + nb * (a[:, 0] - c[:, 0])
              + nc * (b[:, 0] - a[:, 0])) / d
        cc = np.stack([ux, uy], axis=1)
        centers.append(cc)
        radii2.append(((cc - a) ** 2).sum(axis=1))
    centers = np.concatenate(centers, axis=0)
    radii2 = np.concatenate(radii2)
    dist2 = ((centers[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    contains = (dist2 <= radii2[:, None] * (1.0 + 1e-10) + 1e-24).all(axis=1)
    idx = np.flatnonzero(contains)
    best = idx[np.argmin(radii2[idx])]
    return (float(centers[best, 0]), float(centers[best, 1]),
            float(math.sqrt(radii2[best])))


def two_partition_optimum(points):
    """Exact planar 2-center max radius by enumerating every split."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    best = math.inf
    for mask in range(1, 2 ** (n - 1)):
        left = [i for i in range(n) if mask >> i & 1]
        right = [i for i in range(n) if not mask >> i & 1]
        r_left = med_bruteforce(pts[left])[2] if left else 0.0
        r_right = med_bruteforce(pts[right])[2] if right else 0.0
        best = min(best, max(r_left, r_right))
    return best


def set_partitions(n, max_blocks):
    """All partitions of n items into at most max_blocks nonempty blocks."""
    labels = [0] * n

    def rec(i, used):
        if i == n:
            yield tuple(labels)
            return
        for v in range(used):
            labels[i] = v
            yield from rec(i + 1, used)
        if used < max_blocks:
            labels[i] = used
            yield from rec(i + 1, used + 1)

    if n:
        yield from rec(1, 1)


def partition_power_optimum(points, p_max_list, p=URBAN, theta_star=None):
    """Minimum aggregate watts over every user partition, or None."""
    pts = np.asarray(points, dtype=float)
    if theta_star is None:
        theta_star = optimal_angle_grid(p)
    best = None
    for labels in set_partitions(pts.shape[0], len(p_max_list)):
        blocks = {}
        for i, lab in enumerate(labels):
            blocks.setdefault(lab, []).append(i)
        needs = sorted(
            (required_power_dbm(med_bruteforce(pts[idx])[2], p, theta_star)
             for idx in blocks.values()),
            reverse=True,
        )
        caps = sorted(p_max_list)
        used = [False] * len(caps)
        feasible = True
        for need in needs:
            placed = False
            for k, cap in enumerate(caps):
                if not used[k] and cap >= need:
                    used[k] = True
                    placed = True
                    break
            if not placed:
                feasible = False
                break
        if feasible:
            total = sum(dbm_to_watts(p_dbm) for p_dbm in needs)
            if best is None or total < best:
                best = total
    return best


# ---------------------------------------------------------------------------
# Beamforming references.


def profile_rates(W, H, noise):
    """Per-player rates of a beamformer profile, straight from the SINR."""
    M = H.shape[0]
    out = np.empty(M)
    for m in range(M):
        signal = abs(np.dot(W[m], H[m, m])) ** 2
        inter = sum(abs(np.dot(W[l], H[l, m])) ** 2
                    for l in range(M) if l != m)
        out[m] = math.log2(1.0 + signal / (noise + inter))
    return out


def mrt_direction(H, m):
    h = H[m, m]
    return np.conj(h) / np.linalg.norm(h)


def zf_direction(H, m):
    """Best direction transmitting nothing toward the other receiver."""
    other = 1 - m
    target = np.conj(H[m, m])
    null = np.conj(H[m, other])
    null = null / np.linalg.norm(null)
    proj = target - np.vdot(null, target) * null
    norm = np.linalg.norm(proj)
    if norm < 1e-12 * np.linalg.norm(target):
        return mrt_direction(H, m)
    return proj / norm


def lambda_grid_rates(H, noise, lams):
    """Two-player rate surfaces over the MRT-ZF mixing grid.

    Entry [i, j] holds the rates when player 1 uses weight lams[i] and
    player 2 uses lams[j].
    """
    lams = np.asarray(lams, dtype=float)
    d_gain = []
    c_gain = []
    for m in (0, 1):
        mix = (lams[:, None] * mrt_direction(H, m)[None, :]
               + (1.0 - lams)[:, None] * zf_direction(H, m)[None, :])
        norms = np.linalg.norm(mix, axis=1)
        bad = norms < 1e-300
        if bad.any():
            mix[bad] = mrt_direction(H, m)
            norms[bad] = 1.0
        mix = mix / norms[:, None]
        d_gain.append(np.abs(mix @ H[m, m]) ** 2)
        c_gain.append(np.abs(mix @ H[m, 1 - m]) ** 2)
    r1 = np.log2(1.0 + d_gain[0][:, None] / (noise + c_gain[1][None, :]))
    r2 = np.log2(1.0 + d_gain[1][None, :] / (noise + c_gain[0][:, None]))
    return r1, r2
