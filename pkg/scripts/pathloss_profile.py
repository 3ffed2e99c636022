"""Plot mean pathloss versus altitude for a few ground ranges.

Shows the single interior minimum that the optimal-angle solver targets.

Usage: python3 scripts/pathloss_profile.py [--env urban] [--out profile.png]
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import dbs_planner as dp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--env", default="urban",
                    choices=sorted(dp.ENVIRONMENT_PRESETS))
    ap.add_argument("--out", default="pathloss_profile.png")
    args = ap.parse_args()

    env = dp.ENVIRONMENT_PRESETS[args.env]
    theta = dp.optimal_elevation_angle(env)
    hs = np.linspace(50.0, 6000.0, 600)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for r in (500.0, 1000.0, 2000.0, 3000.0):
        losses = [dp.mean_pathloss_db(dp.LinkGeometry(h, r), env) for h in hs]
        ax.plot(hs, losses, label=f"r = {r:.0f} m")
        h_opt = r * np.tan(theta)
        if h_opt <= hs[-1]:
            ax.plot(h_opt, dp.mean_pathloss_db(dp.LinkGeometry(h_opt, r), env),
                    "k*", markersize=9)
    ax.set_xlabel("altitude h (m)")
    ax.set_ylabel("mean pathloss (dB)")
    ax.set_title(f"{args.env}: stars mark h = r tan(theta*), "
                 f"theta* = {np.degrees(theta):.2f} deg")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
