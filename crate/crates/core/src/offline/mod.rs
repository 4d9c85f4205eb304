//! Offline-optimal single-channel scheduling with full knowledge of arrivals.
//!
//! The optimum has two phases. Up to `t_{i_ee}` the transmitter alternates
//! between off and on at the EE-maximizing power `p_ee`. After `t_{i_ee}` it
//! is always on, following a non-decreasing staircase whose levels are
//! windowed average harvest rates minus the circuit power.

mod oracle;

pub use oracle::{dp_oracle, OracleConfig, OracleSolution, MAX_ENERGY_BIN, MAX_SLOTS};

use serde::{Deserialize, Serialize};

use crate::eeopt;
use crate::error::Result;
use crate::model::{CircuitModel, EnergyProfile, PowerSchedule, RateFunction, RateModel, ScheduleBuilder};

/// Outcome of the `i_ee` recursion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EePhaseBoundary {
    /// Last epoch of the EE phase; 0 when there is no EE phase.
    pub i_ee: usize,
    /// `i_{ee,1}, ..., i_{ee,J}`.
    pub boundaries: Vec<usize>,
}

/// Walks forward from `i_{ee,0} = 0`, each time taking the smallest later
/// boundary whose windowed average power minus `alpha` is at most `p_ee`.
pub fn compute_i_ee(profile: &EnergyProfile, p_ee: f64, circuit: &CircuitModel) -> EePhaseBoundary {
    let n = profile.num_epochs();
    let alpha = circuit.alpha();
    let mut boundaries = Vec::new();
    let mut prev = 0;
    while prev < n {
        match (prev + 1..=n).find(|&i| profile.window_average(prev, i) - alpha <= p_ee) {
            Some(i) => {
                boundaries.push(i);
                prev = i;
            }
            None => break,
        }
    }
    EePhaseBoundary { i_ee: prev, boundaries }
}

/// A run of consecutive always-on epochs sharing one power level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StairGroup {
    /// 1-based first and last epoch of the group.
    pub first_epoch: usize,
    pub last_epoch: usize,
    /// Windowed average power minus `alpha` over the group, before clamping.
    pub level: f64,
    /// Transmit power used; `level` clamped at 0.
    pub power: f64,
}

/// Staircase groups over epochs `start+1 ..= N`: from each group start the
/// window with the smallest average is taken, ties to the longest window.
pub fn staircase_groups(profile: &EnergyProfile, start: usize, circuit: &CircuitModel) -> Vec<StairGroup> {
    let n = profile.num_epochs();
    let alpha = circuit.alpha();
    let mut groups = Vec::new();
    let mut prev = start;
    while prev < n {
        let mut best_j = prev + 1;
        let mut best = profile.window_average(prev, best_j) - alpha;
        for j in prev + 2..=n {
            let v = profile.window_average(prev, j) - alpha;
            if v <= best {
                best = v;
                best_j = j;
            }
        }
        groups.push(StairGroup { first_epoch: prev + 1, last_epoch: best_j, level: best, power: best.max(0.0) });
        prev = best_j;
    }
    groups
}

/// The assembled offline-optimal policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseSolution {
    /// EE-maximizing power; `None` when the circuit power is zero.
    pub p_ee: Option<f64>,
    pub i_ee: usize,
    pub ee_boundaries: Vec<usize>,
    /// On-time of each EE-phase epoch `1..=i_ee`.
    pub ee_on_times: Vec<f64>,
    pub staircase: Vec<StairGroup>,
    /// Power of each always-on epoch `i_ee+1..=N`.
    pub staircase_powers: Vec<f64>,
    pub schedule: PowerSchedule,
    pub throughput: f64,
}

impl TwoPhaseSolution {
    /// Power of the first epoch's on-period.
    pub fn initial_power(&self) -> f64 {
        match (self.i_ee, self.p_ee) {
            (i, Some(p)) if i > 0 => p,
            _ => self.staircase.first().map_or(0.0, |g| g.power),
        }
    }
}

fn push_staircase(builder: &mut ScheduleBuilder, profile: &EnergyProfile, groups: &[StairGroup]) -> Vec<f64> {
    let b = profile.boundaries();
    let mut powers = Vec::new();
    for g in groups {
        for i in g.first_epoch..=g.last_epoch {
            builder.push(b[i - 1], b[i], g.power);
            powers.push(g.power);
        }
    }
    powers
}

/// Two-phase solver for an arbitrary rate function with a precomputed `p_ee`.
pub fn solve_offline_with<R: RateFunction + ?Sized>(
    profile: &EnergyProfile,
    rate: &R,
    circuit: &CircuitModel,
    p_ee: f64,
) -> TwoPhaseSolution {
    let b = profile.boundaries();
    let lengths = profile.lengths();
    let energies = profile.energies();
    let draw = p_ee + circuit.alpha();
    let boundary = compute_i_ee(profile, p_ee, circuit);
    let i_ee = boundary.i_ee;

    let mut builder = ScheduleBuilder::default();
    let mut ee_on_times = Vec::with_capacity(i_ee);
    let mut stored = 0.0;
    for i in 0..i_ee {
        stored += energies[i];
        let wanted = stored / draw;
        let (on_time, end) = if wanted >= lengths[i] { (lengths[i], b[i + 1]) } else { (wanted, b[i] + wanted) };
        stored = if wanted >= lengths[i] { stored - on_time * draw } else { 0.0 };
        builder.push(b[i], end, p_ee);
        builder.push(end, b[i + 1], 0.0);
        ee_on_times.push(on_time);
    }

    let staircase = staircase_groups(profile, i_ee, circuit);
    let staircase_powers = push_staircase(&mut builder, profile, &staircase);
    let schedule = builder.finish(profile.horizon());
    let throughput = schedule.throughput(rate);
    TwoPhaseSolution {
        p_ee: Some(p_ee),
        i_ee,
        ee_boundaries: boundary.boundaries,
        ee_on_times,
        staircase,
        staircase_powers,
        schedule,
        throughput,
    }
}

/// Offline-optimal schedule on a single AWGN channel. With zero circuit power
/// the always-on staircase is optimal and is returned directly.
pub fn solve_offline(profile: &EnergyProfile, model: &RateModel, circuit: &CircuitModel) -> Result<TwoPhaseSolution> {
    if circuit.alpha() == 0.0 {
        let stair = solve_staircase(profile, circuit);
        let throughput = stair.schedule.throughput(model);
        return Ok(TwoPhaseSolution {
            p_ee: None,
            i_ee: 0,
            ee_boundaries: Vec::new(),
            ee_on_times: Vec::new(),
            staircase_powers: stair.powers,
            staircase: stair.groups,
            schedule: stair.schedule,
            throughput,
        });
    }
    let ee = eeopt::compute_p_ee(model, circuit)?;
    Ok(solve_offline_with(profile, model, circuit, ee.p_ee))
}

/// Always-on staircase baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Staircase {
    pub groups: Vec<StairGroup>,
    /// Power per epoch.
    pub powers: Vec<f64>,
    pub schedule: PowerSchedule,
}

/// Baseline that keeps the transmitter on in every epoch and applies the
/// staircase recursion from `t = 0`. Groups whose average harvest rate does
/// not cover the circuit power are switched off.
pub fn solve_staircase(profile: &EnergyProfile, circuit: &CircuitModel) -> Staircase {
    let groups = staircase_groups(profile, 0, circuit);
    let mut builder = ScheduleBuilder::default();
    let powers = push_staircase(&mut builder, profile, &groups);
    Staircase { groups, powers, schedule: builder.finish(profile.horizon()) }
}
