"""Solve one deployment instance and draw users, disks and altitudes.

Usage: python3 scripts/placement_snapshot.py [--users 60] [--seed 3]
"""

import argparse
import dataclasses

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import dbs_planner as dp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=60)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--epsilon-dbm", type=float, default=-75.0)
    ap.add_argument("--hotspot", action="store_true")
    ap.add_argument("--out", default="placement_snapshot.png")
    args = ap.parse_args()

    env = dataclasses.replace(dp.ENVIRONMENT_PRESETS["urban"],
                              epsilon_dbm=args.epsilon_dbm)
    area = dp.AreaConfig(10_000.0, 10_000.0)
    repo = [dp.DroneSpec(f"t{p}", float(p))
            for p in (35, 39, 43) for _ in range(4)]
    dist = dp.DistributionSpec(kind="truncated_gaussian", sigma_x_m=1800.0,
                               sigma_y_m=1800.0) if args.hotspot \
        else dp.DistributionSpec()

    users = dp.sample_users(args.users, area, dist, seed=args.seed)
    sol = dp.solve_placement(users, repo, env, seed=args.seed)

    fig, ax = plt.subplots(figsize=(6.5, 6.5))
    ax.scatter([u.x_m for u in users], [u.y_m for u in users], s=12,
               color="gray", label="users")
    for d in sol.deployments:
        circle = plt.Circle((d.x_m, d.y_m), d.radius_m, fill=False,
                            color="tab:blue", alpha=0.8)
        ax.add_patch(circle)
        ax.plot(d.x_m, d.y_m, "b^")
        ax.annotate(f"{d.type_id}\n{d.pt_dbm:.1f} dBm\nh={d.h_m:.0f} m",
                    (d.x_m, d.y_m), fontsize=7, textcoords="offset points",
                    xytext=(5, 5))
    lo_x, hi_x, lo_y, hi_y = area.bounds
    ax.set_xlim(lo_x - 200, hi_x + 200)
    ax.set_ylim(lo_y - 200, hi_y + 200)
    ax.set_aspect("equal")
    ax.set_title(f"M = {sol.num_deployed}, "
                 f"aggregate {sol.aggregate_power_w:.3f} W")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}: M={sol.num_deployed}, "
          f"power={sol.aggregate_power_w:.4f} W")


if __name__ == "__main__":
    main()
