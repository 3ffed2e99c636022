"""Sweep user count and plot mean aggregate power and fleet size.

Usage: python3 scripts/power_vs_users.py [--trials 10] [--out power_vs_users.png]
"""

import argparse
import dataclasses

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import dbs_planner as dp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--epsilon-dbm", type=float, default=-78.0)
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--out", default="power_vs_users.png")
    args = ap.parse_args()

    env = dataclasses.replace(dp.ENVIRONMENT_PRESETS["urban"],
                              epsilon_dbm=args.epsilon_dbm)
    repo = tuple(dp.DroneSpec(f"t{p}", float(p))
                 for p in (35, 39, 43) for _ in range(4))
    setup = dp.SweepSetup(env=env, repository=repo,
                          area=dp.AreaConfig(10_000.0, 10_000.0),
                          dist=dp.DistributionSpec(),
                          radio=dp.RadioConfig(),
                          num_users=100, restarts=args.restarts)
    values = [10, 50, 100, 150]
    rows = dp.sweep(setup, "users", values, trials=args.trials, seed=7)

    fig, ax1 = plt.subplots(figsize=(7, 4.5))
    ax1.plot(values, [r.mean_power_w for r in rows], "o-", color="tab:blue")
    ax1.set_xlabel("number of users K")
    ax1.set_ylabel("mean aggregate power (W)", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(values, [r.mean_num_deployed for r in rows], "s--",
             color="tab:red")
    ax2.set_ylabel("mean deployed drones", color="tab:red")
    ax1.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    for v, r in zip(values, rows):
        print(f"K={v}: power={r.mean_power_w:.3f} W, "
              f"M={r.mean_num_deployed:.2f}, rate={r.mean_rate_bps:.3e} bps, "
              f"trials={r.trials}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
