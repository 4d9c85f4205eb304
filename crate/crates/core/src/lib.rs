//! Throughput-optimal transmit power scheduling for energy-harvesting
//! transmitters whose radio draws a constant circuit power while on.
//!
//! - [`model`]: arrival profiles, rate and circuit models, schedules.
//! - [`eeopt`]: the EE-maximizing power and the single-epoch closed form.
//! - [`offline`]: the two-phase offline optimum, the always-on staircase
//!   baseline and a brute-force DP oracle.
//! - [`multichannel`]: parallel channels via the reduced rate and water-filling.
//! - [`online`]: causal policies and the discrete-time simulator.
//! - [`stochastics`]: seeded arrival and cell generators.
//! - [`config`], [`experiment`], [`report`]: JSON ingestion, sweeps and output.

pub mod config;
pub mod eeopt;
pub mod experiment;
pub mod error;
pub mod model;
pub mod multichannel;
pub mod numeric;
pub mod offline;
pub mod online;
pub mod report;
pub mod stochastics;
pub mod units;

pub use eeopt::{compute_p_ee, solve_single_epoch, EePower, SingleEpochSolution};
pub use error::{Error, Result};
pub use model::{
    evaluate_schedule, Arrival, CircuitModel, EnergyProfile, Epoch, MultiRateModel, PowerSchedule, RateFunction,
    RateModel, ScheduleEvaluation, Segment, VectorSchedule, VectorSegment,
};
pub use offline::{compute_i_ee, dp_oracle, solve_offline, solve_staircase, OracleConfig, TwoPhaseSolution};
pub use multichannel::{compute_p_ee_mc, reduced_rate, solve_offline_mc, water_fill, ReducedRate, WaterFillResult};
pub use online::{simulate, ArrivalStats, OnlineState, Policy, PolicyKind, SimTrace, Simulator};
pub use stochastics::{cell_to_multimodel, gen_compound_poisson, gen_hppp_users, trial_rng, CellConfig, User};
pub use config::{ExperimentConfig, PolicyName, Scenario};
pub use experiment::{run_ofdma, run_sweep, run_sweep_horizon, run_sweep_lambda, ExperimentResult, TrialRow};
