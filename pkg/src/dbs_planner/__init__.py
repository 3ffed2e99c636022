"""Minimum-power drone base station placement and interference bargaining."""

from .altitude import (AltitudeSolution, MIN_PRICING_RADIUS_M,
                       NoCoverageError, NoRootError, optimal_elevation_angle,
                       power_to_radius, radius_to_power)
from .beamforming import (BargainingOutcome, FeasibilityResult,
                          InterferenceChannel, ZeroDirectChannelError,
                          ksbs_bisection, ksbs_feasible, max_rates,
                          min_power_for_rate, mrt_beamformer,
                          nash_beamformers, pareto_parametrized_beamformer,
                          random_channel, rate_vector,
                          zero_forcing_beamformer)
from .channel import (ENVIRONMENT_PRESETS, Environment, LinkGeometry,
                      SPEED_OF_LIGHT, db_to_linear, dbm_to_watts, fspl_db,
                      is_covered, linear_to_db, load_environment,
                      los_probability, mean_pathloss_db, nlos_probability,
                      received_power_dbm, watts_to_dbm)
from .placement import (Deployment, Disk, DroneSpec, GroundUser,
                        InfeasibleError, KCenterResult,
                        NoFeasibleSolutionError, PlacementSolution,
                        assign_to_nearest, best_kcenter, candidate_solutions,
                        farthest_point_init, lloyd_kcenter, match_drones,
                        min_enclosing_disk, recursive_radius_minimization,
                        solve_placement)
from .scenario import (AreaConfig, DistributionSpec, ExperimentReport,
                       RadioConfig, RejectionStallError, SweepRow,
                       SweepSetup, evaluate_rates, run_pipeline,
                       sample_users, sweep, voronoi_baseline)
from .seeding import substream

__version__ = "0.1.0"

__all__ = [
    "AltitudeSolution", "AreaConfig", "BargainingOutcome", "Deployment",
    "Disk", "DistributionSpec", "DroneSpec", "ENVIRONMENT_PRESETS",
    "Environment", "ExperimentReport", "FeasibilityResult", "GroundUser",
    "InfeasibleError", "InterferenceChannel", "KCenterResult",
    "LinkGeometry", "MIN_PRICING_RADIUS_M", "NoCoverageError",
    "NoFeasibleSolutionError", "NoRootError", "PlacementSolution",
    "RadioConfig", "RejectionStallError", "SPEED_OF_LIGHT", "SweepRow",
    "SweepSetup", "ZeroDirectChannelError", "assign_to_nearest",
    "best_kcenter", "candidate_solutions", "db_to_linear", "dbm_to_watts",
    "evaluate_rates", "farthest_point_init", "fspl_db", "is_covered",
    "ksbs_bisection", "ksbs_feasible", "linear_to_db", "lloyd_kcenter",
    "load_environment", "los_probability", "match_drones", "max_rates",
    "mean_pathloss_db", "min_enclosing_disk", "min_power_for_rate",
    "mrt_beamformer", "nash_beamformers", "nlos_probability",
    "optimal_elevation_angle", "pareto_parametrized_beamformer",
    "power_to_radius", "radius_to_power", "random_channel", "rate_vector",
    "received_power_dbm", "recursive_radius_minimization", "run_pipeline",
    "sample_users", "solve_placement", "substream", "sweep",
    "voronoi_baseline", "watts_to_dbm", "zero_forcing_beamformer",
]
