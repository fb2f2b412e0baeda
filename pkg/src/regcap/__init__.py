"""Risk-averse frequency-regulation capacity offering for DER aggregators.

Pipeline: regulation-signal statistics -> scenario-based day-ahead
commitment (MILP) -> distributionally robust hour-ahead reoffer (cone
cuts on an LP) -> 2-second dispatch replay and settlement. All solvers
are self-contained; all randomness flows from explicit seeds.
"""

__version__ = "0.1.0"

from . import signals, uncertainty, solver, dayahead, hourahead, simulator, fleetgen
from .signals import (SignalTrajectory, HourlyAggregate, parse_trajectories,
                      rearrange, mileage, aggregate, unconstrained_energy,
                      synthesize_trajectories)
from .uncertainty import (SignalStatistics, CapacityForecast, MomentData,
                          chi2_divergence, adjusted_epsilon, gaussian_quantile,
                          fit_signal_stats, estimate_e0, assemble_moments)
from .solver import (LinearProgram, MixedIntegerProgram, LPResult, CutPool,
                     ModelBuilder, SolverError, solve_lp, solve_milp)
from .dayahead import (MarketPrices, ScenarioHour, FleetScenarioSet,
                       DayAheadSolution, ModelError, build_dayahead,
                       solve_dayahead)
from .hourahead import (ConeConstraint, HourAheadProblem, HourAheadSolution,
                        build_cones, build_hourahead, solve_hourahead)
from .simulator import (HourlyEnvelope, DispatchResult, DispatchError,
                        dispatch, performance_score, settle, run_campaign,
                        summarize_campaign, CampaignConfig, CampaignRow,
                        benchmark_config, default_prices, hourly_forecast,
                        STRATEGIES)
from .fleetgen import FleetConfig, generate_scenarios, realize_fleet
