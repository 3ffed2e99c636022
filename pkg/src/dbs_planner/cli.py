"""Command line front end: solve, sweep, channel, and bargain subcommands.

Exit codes: 0 success, 1 bad configuration or arguments, 2 no feasible
deployment, 3 deployment found but some user rates unmet (outputs are
still written in that case).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import beamforming
from .altitude import NoRootError, optimal_elevation_angle, radius_to_power
from .channel import (Environment, LinkGeometry, load_environment,
                      mean_pathloss_db)
from .placement import DroneSpec, NoFeasibleSolutionError
from .scenario import (AreaConfig, DistributionSpec, RadioConfig, SweepSetup,
                       run_pipeline, sample_users, sweep)
from .seeding import substream

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_SOLUTION = 2
EXIT_RATE_UNMET = 3


class ConfigError(ValueError):
    """Configuration file or argument rejected."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _require_mapping(obj: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{path}: expected an object")
    return obj


def _check_keys(obj: Mapping[str, Any], allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"unknown field {path}.{name}"
                          if path else f"unknown field {name}")


def _get_number(obj: Mapping[str, Any], key: str, path: str,
                default: float | None = None) -> float:
    if key not in obj:
        if default is None:
            raise ConfigError(f"missing field {path}.{key}")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    return float(val)


def parse_values(spec: str) -> list[float]:
    """Sweep axis values: "10,50,90", "1..5", or "0..100:25"."""
    spec = spec.strip()
    if not spec:
        raise ConfigError("empty values specification")
    if ".." in spec:
        body, _, step_part = spec.partition(":")
        lo_s, sep, hi_s = body.partition("..")
        if not sep:
            raise ConfigError(f"bad range: {spec!r}")
        try:
            lo, hi = float(lo_s), float(hi_s)
            step = float(step_part) if step_part else 1.0
        except ValueError as exc:
            raise ConfigError(f"bad range: {spec!r}") from exc
        if step <= 0 or hi < lo:
            raise ConfigError(f"bad range: {spec!r}")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + i * step for i in range(count)]
    try:
        return [float(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad values list: {spec!r}") from exc


@dataclass
class RunConfig:
    env: Environment
    repository: list[DroneSpec]
    area: AreaConfig
    dist: DistributionSpec
    radio: RadioConfig
    num_users: int
    seed: int = 0
    restarts: int = 32
    max_iters: int = 100
    delta: float = 1e-3
    strategy: str = "best_fit"
    sweep_vary: str = "users"
    sweep_values: list[float] = field(default_factory=list)
    sweep_trials: int = 1


def _parse_repository(raw: Any) -> list[DroneSpec]:
    if not isinstance(raw, list):
        raise ConfigError("repository: expected a list")
    if not raw:
        raise ConfigError("repository must be non-empty")
    repo: list[DroneSpec] = []
    for idx, entry in enumerate(raw):
        path = f"repository[{idx}]"
        entry = _require_mapping(entry, path)
        _check_keys(entry, {"type_id", "p_max_dbm", "p_min_dbm", "count"},
                    path)
        p_max = _get_number(entry, "p_max_dbm", path)
        p_min = _get_number(entry, "p_min_dbm", path, default=-math.inf)
        count = int(_get_number(entry, "count", path, default=1.0))
        if count < 1:
            raise ConfigError(f"{path}.count: must be >= 1")
        type_id = entry.get("type_id", f"type{idx}")
        if not isinstance(type_id, str):
            raise ConfigError(f"{path}.type_id: expected a string")
        for _ in range(count):
            repo.append(DroneSpec(type_id=type_id, p_max_dbm=p_max,
                                  p_min_dbm=p_min))
    return repo


def _parse_environment(raw: Any) -> Environment:
    try:
        return load_environment(raw)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"environment: {exc}") from exc


def _parse_area(raw: Any) -> AreaConfig:
    raw = _require_mapping(raw, "area")
    _check_keys(raw, {"l_x_m", "l_y_m", "origin"}, "area")
    origin = raw.get("origin", "centered")
    if not isinstance(origin, str):
        raise ConfigError("area.origin: expected a string")
    try:
        return AreaConfig(l_x_m=_get_number(raw, "l_x_m", "area"),
                          l_y_m=_get_number(raw, "l_y_m", "area"),
                          origin=origin)
    except ValueError as exc:
        raise ConfigError(f"area: {exc}") from exc


def _parse_users(raw: Any) -> tuple[int, DistributionSpec]:
    raw = _require_mapping(raw, "users")
    _check_keys(raw, {"count", "distribution"}, "users")
    count = int(_get_number(raw, "count", "users"))
    dist_raw = _require_mapping(raw.get("distribution", {}),
                                "users.distribution")
    _check_keys(dist_raw, {"kind", "mu_x_m", "mu_y_m", "sigma_x_m",
                           "sigma_y_m"}, "users.distribution")
    kind = dist_raw.get("kind", "uniform")
    if not isinstance(kind, str):
        raise ConfigError("users.distribution.kind: expected a string")
    try:
        dist = DistributionSpec(
            kind=kind,
            mu_x_m=_get_number(dist_raw, "mu_x_m", "users.distribution", 0.0),
            mu_y_m=_get_number(dist_raw, "mu_y_m", "users.distribution", 0.0),
            sigma_x_m=_get_number(dist_raw, "sigma_x_m",
                                  "users.distribution", 1.0),
            sigma_y_m=_get_number(dist_raw, "sigma_y_m",
                                  "users.distribution", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"users.distribution: {exc}") from exc
    if count < 1:
        raise ConfigError("users.count: must be >= 1")
    return count, dist


def _parse_radio(raw: Any) -> RadioConfig:
    raw = _require_mapping(raw, "radio")
    _check_keys(raw, {"bandwidth_hz", "noise_dbm", "beta_bps",
                      "num_antennas"}, "radio")
    try:
        return RadioConfig(
            bandwidth_hz=_get_number(raw, "bandwidth_hz", "radio", 1.0e6),
            noise_dbm=_get_number(raw, "noise_dbm", "radio", -100.0),
            beta_bps=_get_number(raw, "beta_bps", "radio", 1.0e6),
            num_antennas=int(_get_number(raw, "num_antennas", "radio", 4.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"radio: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Reads and validates a JSON run configuration."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    raw = _require_mapping(raw, "config")
    _check_keys(raw, {"environment", "repository", "area", "users", "radio",
                      "solver", "seed", "sweep"}, "")
    for key in ("environment", "repository", "area", "users"):
        if key not in raw:
            raise ConfigError(f"missing field {key}")
    env = _parse_environment(raw["environment"])
    repo = _parse_repository(raw["repository"])
    area = _parse_area(raw["area"])
    num_users, dist = _parse_users(raw["users"])
    radio = _parse_radio(raw.get("radio", {}))
    solver = _require_mapping(raw.get("solver", {}), "solver")
    _check_keys(solver, {"restarts", "max_iters", "delta", "strategy"},
                "solver")
    strategy = solver.get("strategy", "best_fit")
    if strategy not in ("best_fit", "first_fit"):
        raise ConfigError("solver.strategy: must be best_fit or first_fit")
    seed_raw = raw.get("seed", 0)
    if isinstance(seed_raw, bool) or not isinstance(seed_raw, int):
        raise ConfigError("seed: expected an integer")
    cfg = RunConfig(
        env=env, repository=repo, area=area, dist=dist, radio=radio,
        num_users=num_users, seed=seed_raw,
        restarts=int(_get_number(solver, "restarts", "solver", 32.0)),
        max_iters=int(_get_number(solver, "max_iters", "solver", 100.0)),
        delta=_get_number(solver, "delta", "solver", 1e-3),
        strategy=strategy,
    )
    if cfg.restarts < 1 or cfg.max_iters < 1:
        raise ConfigError("solver: restarts and max_iters must be >= 1")
    if not 0.0 < cfg.delta < 1.0:
        raise ConfigError("solver.delta: must be in (0, 1)")
    sweep_raw = _require_mapping(raw.get("sweep", {}), "sweep")
    _check_keys(sweep_raw, {"vary", "values", "trials"}, "sweep")
    vary = sweep_raw.get("vary", "users")
    if vary not in ("users", "density"):
        raise ConfigError("sweep.vary: must be users or density")
    cfg.sweep_vary = vary
    values_raw = sweep_raw.get("values", [])
    if isinstance(values_raw, str):
        cfg.sweep_values = parse_values(values_raw)
    elif isinstance(values_raw, list):
        try:
            cfg.sweep_values = [float(v) for v in values_raw]
        except (TypeError, ValueError) as exc:
            raise ConfigError("sweep.values: expected numbers") from exc
    else:
        raise ConfigError("sweep.values: expected a list or range string")
    cfg.sweep_trials = int(_get_number(sweep_raw, "trials", "sweep", 1.0))
    if cfg.sweep_trials < 1:
        raise ConfigError("sweep.trials: must be >= 1")
    return cfg


# ---------------------------------------------------------------------------
# Subcommands.


def _write_solution_files(out_dir: Path, report, users) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "solution.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["drone_id", "x", "y", "h", "R", "pt_dbm"])
        for d in report.solution.deployments:
            writer.writerow([d.drone_id, _fmt(d.x_m), _fmt(d.y_m),
                             _fmt(d.h_m), _fmt(d.radius_m), _fmt(d.pt_dbm)])
    payload = {
        "aggregate_power_w": report.aggregate_power_w,
        "num_deployed": report.num_deployed,
        "avg_rate_bps": report.avg_rate_bps,
        "all_rates_met": report.all_rates_met,
        "deployments": [
            {"drone_id": d.drone_id, "type_id": d.type_id, "x_m": d.x_m,
             "y_m": d.y_m, "h_m": d.h_m, "radius_m": d.radius_m,
             "pt_dbm": d.pt_dbm}
            for d in report.solution.deployments
        ],
        "partition": {str(k): v for k, v in
                      sorted(report.solution.partition.items())},
        "per_user_rate_bps": [float(r) for r in report.per_user_rate_bps],
        "rate_satisfied": list(report.rate_satisfied),
        "users": [[u.x_m, u.y_m] for u in users],
        "convergence_trace": [list(t) for t in report.convergence_trace],
    }
    with open(out_dir / "solution.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    users = sample_users(cfg.num_users, cfg.area, cfg.dist, seed=seed)
    try:
        report = run_pipeline(users, cfg.repository, cfg.env, cfg.radio,
                              seed=seed, restarts=cfg.restarts,
                              max_iters=cfg.max_iters, delta=cfg.delta,
                              strategy=cfg.strategy)
    except NoFeasibleSolutionError as exc:
        print(f"no feasible solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    _write_solution_files(Path(args.out_dir), report, users)
    print(f"deployed {report.num_deployed} drones, "
          f"{report.aggregate_power_w:.6g} W aggregate, "
          f"avg rate {report.avg_rate_bps:.6g} bit/s")
    if not report.all_rates_met:
        unmet = len(report.rate_satisfied) - sum(report.rate_satisfied)
        print(f"rate requirement unmet for {unmet} users", file=sys.stderr)
        return EXIT_RATE_UNMET
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    vary = args.vary or cfg.sweep_vary
    values = parse_values(args.values) if args.values else cfg.sweep_values
    if not values:
        raise ConfigError("no sweep values given")
    trials = args.trials or cfg.sweep_trials
    include_voronoi = args.baseline == "voronoi"
    setup = SweepSetup(env=cfg.env, repository=tuple(cfg.repository),
                       area=cfg.area, dist=cfg.dist, radio=cfg.radio,
                       num_users=cfg.num_users, restarts=cfg.restarts,
                       max_iters=cfg.max_iters, delta=cfg.delta,
                       strategy=cfg.strategy,
                       include_voronoi=include_voronoi)
    rows = sweep(setup, vary, values, trials, seed=seed,
                 threads=args.threads)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["value", "mean_power_w", "mean_rate_bps", "mean_M", "trials"]
    if include_voronoi:
        header.append("voronoi_power_w")
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            record = [_fmt(row.value), _fmt(row.mean_power_w),
                      _fmt(row.mean_rate_bps), _fmt(row.mean_num_deployed),
                      row.trials]
            if include_voronoi:
                record.append(_fmt(row.voronoi_power_w)
                              if row.voronoi_power_w is not None else "nan")
            writer.writerow(record)
    print(f"wrote {len(rows)} sweep rows to {out_dir / 'sweep.csv'}")
    return EXIT_OK


def cmd_channel(args: argparse.Namespace) -> int:
    env = _parse_environment(args.env)
    if args.fc is not None:
        if args.fc <= 0:
            raise ConfigError("--fc must be positive")
        env = Environment(a=env.a, b=env.b, eta_los_db=env.eta_los_db,
                          eta_nlos_db=env.eta_nlos_db, fc_hz=args.fc,
                          epsilon_dbm=env.epsilon_dbm, h_max_m=env.h_max_m)
    radii = parse_values(args.radii)
    if any(r <= 0 for r in radii):
        raise ConfigError("radii must be positive")
    try:
        theta = optimal_elevation_angle(env)
    except NoRootError as exc:
        raise ConfigError(f"environment admits no optimal angle: {exc}")
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "h", "gamma_db", "theta_opt_rad", "h_opt_m"])
        for r in radii:
            sol = radius_to_power(r, env)
            gamma = mean_pathloss_db(LinkGeometry(sol.h_used_m, r), env)
            writer.writerow([_fmt(r), _fmt(sol.h_used_m), _fmt(gamma),
                             _fmt(theta), _fmt(sol.h_opt_m)])
    print(f"wrote {len(radii)} rows to {out}")
    return EXIT_OK


def _load_channel_file(path: str) -> beamforming.InterferenceChannel:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read channel file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"channel file is not valid JSON: {exc}") from exc
    raw = _require_mapping(raw, "channel")
    _check_keys(raw, {"H", "noise_power"}, "channel")
    if "H" not in raw:
        raise ConfigError("missing field channel.H")
    noise = _get_number(raw, "noise_power", "channel", 1.0)
    try:
        arr = np.asarray(raw["H"], dtype=float)
        if arr.ndim != 4 or arr.shape[3] != 2:
            raise ValueError("expected shape (M, M, K, 2)")
        H = arr[..., 0] + 1j * arr[..., 1]
        return beamforming.InterferenceChannel(H=H, noise_power=noise)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"channel.H: {exc}") from exc


def cmd_bargain(args: argparse.Namespace) -> int:
    if args.channel_file is not None:
        ch = _load_channel_file(args.channel_file)
    elif args.random is not None:
        try:
            m, k, seed = (int(v) for v in args.random)
        except ValueError as exc:
            raise ConfigError("--random expects three integers") from exc
        if m < 2 or k < 1:
            raise ConfigError("--random needs M >= 2 and K >= 1")
        ch = beamforming.random_channel(m, k, seed=seed)
    else:
        raise ConfigError("bargain needs --channel-file or --random")
    if not 0.0 < args.delta < 1.0:
        raise ConfigError("--delta must be in (0, 1)")
    outcome = beamforming.ksbs_bisection(
        ch, delta=args.delta, mode=args.mode,
        rng=substream(args.seed or 0, "bargain-cli"))
    payload = {
        "mode": outcome.mode,
        "iterations": outcome.iterations,
        "fraction": outcome.fraction,
        "ne_rates": [float(r) for r in outcome.ne_rates],
        "max_rates": [float(r) for r in outcome.max_rates],
        "ksbs_rates": [float(r) for r in outcome.ksbs_rates],
        "beamformers": [
            [[float(w.real), float(w.imag)] for w in row]
            for row in outcome.beamformers
        ],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote bargaining outcome to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbs-planner",
        description="Plan minimum-power aerial base station deployments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one placement instance")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out-dir", required=True)
    p_solve.add_argument("--seed", type=int, default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="Monte Carlo parameter sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out-dir", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--vary", choices=("users", "density"),
                         default=None)
    p_sweep.add_argument("--values", default=None,
                         help='e.g. "10,50,90" or "10..90:20"')
    p_sweep.add_argument("--trials", type=int, default=None)
    p_sweep.add_argument("--baseline", choices=("voronoi",), default=None)
    p_sweep.add_argument("--threads", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_chan = sub.add_parser("channel", help="tabulate the pathloss profile")
    p_chan.add_argument("--env", default="urban")
    p_chan.add_argument("--radii", default="100..3000:100")
    p_chan.add_argument("--fc", type=float, default=None)
    p_chan.add_argument("--out", required=True)
    p_chan.set_defaults(func=cmd_channel)

    p_barg = sub.add_parser("bargain",
                            help="bargain over an interference channel")
    p_barg.add_argument("--channel-file", default=None)
    p_barg.add_argument("--random", nargs=3, metavar=("M", "K", "SEED"),
                        default=None)
    p_barg.add_argument("--delta", type=float, default=1e-3)
    p_barg.add_argument("--mode", choices=("ne-anchored", "max-fraction"),
                        default="ne-anchored")
    p_barg.add_argument("--seed", type=int, default=0)
    p_barg.add_argument("--out", default=None)
    p_barg.set_defaults(func=cmd_bargain)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return EXIT_OK if code == 0 else EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoFeasibleSolutionError as exc:
        print(f"no feasible solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION


if __name__ == "__main__":
    sys.exit(main())
