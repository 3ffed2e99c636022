"""Compare optimized placement against the fixed-grid Voronoi baseline.

Runs hotspot (truncated Gaussian) instances and reports how often the
optimizer's aggregate power beats the baseline's at equal fleet size.

Usage: python3 scripts/voronoi_compare.py [--instances 50]
"""

import argparse
import dataclasses

import numpy as np

import dbs_planner as dp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--users", type=int, default=20)
    ap.add_argument("--sigma-m", type=float, default=1500.0)
    ap.add_argument("--epsilon-dbm", type=float, default=-70.0)
    ap.add_argument("--restarts", type=int, default=8)
    args = ap.parse_args()

    env = dataclasses.replace(dp.ENVIRONMENT_PRESETS["urban"],
                              epsilon_dbm=args.epsilon_dbm)
    area = dp.AreaConfig(10_000.0, 10_000.0)
    repo = [dp.DroneSpec(f"t{p}", float(p))
            for p in (35, 39, 43) for _ in range(4)]
    dist = dp.DistributionSpec(kind="truncated_gaussian",
                               sigma_x_m=args.sigma_m, sigma_y_m=args.sigma_m)

    wins = 0
    ratios = []
    for trial in range(args.instances):
        users = dp.sample_users(args.users, area, dist, seed=300 + trial)
        sol = dp.solve_placement(users, repo, env, restarts=args.restarts,
                                 seed=300 + trial)
        try:
            base = dp.voronoi_baseline(sol.num_deployed, area, users, repo,
                                       env)
        except dp.InfeasibleError:
            wins += 1
            print(f"trial {trial}: optimized {sol.aggregate_power_w:.4f} W, "
                  f"baseline infeasible")
            continue
        ok = sol.aggregate_power_w <= base.aggregate_power_w
        wins += ok
        ratios.append(sol.aggregate_power_w / base.aggregate_power_w)
        print(f"trial {trial}: optimized {sol.aggregate_power_w:.4f} W vs "
              f"baseline {base.aggregate_power_w:.4f} W "
              f"({'win' if ok else 'loss'})")

    print(f"\noptimizer wins {wins}/{args.instances}"
          + (f", median power ratio {np.median(ratios):.3f}" if ratios else ""))


if __name__ == "__main__":
    main()
