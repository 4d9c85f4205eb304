//! Parallel AWGN channels under a shared harvesting budget.
//!
//! The vector problem nests: for a total power `P` the best split is
//! water-filling, which defines the reduced rate `R̄(P)`. `R̄` is again zero at
//! the origin, increasing and strictly concave, so the single-channel
//! two-phase solver runs on it unchanged and each segment's total is then
//! split by water-filling.

use serde::{Deserialize, Serialize};

use crate::eeopt::{self, EePower};
use crate::error::{non_negative, Result};
use crate::model::{CircuitModel, EnergyProfile, MultiRateModel, RateFunction, VectorSchedule, VectorSegment};
use crate::numeric::CompensatedSum;
use crate::offline::{self, TwoPhaseSolution};

const BISECTION_STEPS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFillResult {
    /// Power per channel (W).
    pub allocations: Vec<f64>,
    /// Water level `nu` (W); active channels get `nu - floor_k`.
    pub water_level: f64,
    pub active_set: Vec<usize>,
}

impl WaterFillResult {
    /// Largest violation of the water-filling optimality conditions for `model` at `total_power`.
    pub fn kkt_residual(&self, model: &MultiRateModel, total_power: f64) -> f64 {
        let sum: f64 = self.allocations.iter().copied().collect::<CompensatedSum>().value();
        let mut worst = (sum - total_power).abs();
        for (k, &q) in self.allocations.iter().enumerate() {
            match model.noise_floor(k) {
                Some(floor) if self.active_set.contains(&k) => {
                    worst = worst.max((self.water_level - floor - q).abs());
                }
                Some(floor) => worst = worst.max((self.water_level - floor).max(0.0)).max(q),
                None => worst = worst.max(q),
            }
        }
        worst
    }
}

/// Splits `total_power` across channels to maximize the sum rate:
/// `Q_k = max(0, nu - floor_k)` with the level `nu` bracketed by bisection and
/// then solved exactly on the resulting active set.
pub fn water_fill(model: &MultiRateModel, total_power: f64) -> Result<WaterFillResult> {
    non_negative("total_power", total_power)?;
    let floors: Vec<(usize, f64)> = (0..model.num_channels()).filter_map(|k| model.noise_floor(k).map(|f| (k, f))).collect();
    let min_floor = floors.iter().map(|&(_, f)| f).fold(f64::INFINITY, f64::min);
    let mut allocations = vec![0.0; model.num_channels()];
    if total_power == 0.0 {
        return Ok(WaterFillResult { allocations, water_level: min_floor, active_set: Vec::new() });
    }

    let filled = |nu: f64| floors.iter().map(|&(_, f)| (nu - f).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (min_floor, min_floor + total_power);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if filled(mid) < total_power {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // exact level on the bracketed active set, adjusted until consistent
    let mut nu = 0.5 * (lo + hi);
    let mut active: Vec<(usize, f64)> = Vec::new();
    for _ in 0..=floors.len() {
        active = floors.iter().copied().filter(|&(_, f)| f < nu).collect();
        if active.is_empty() {
            active = floors.iter().copied().filter(|&(_, f)| f == min_floor).collect();
        }
        let floor_sum: f64 = active.iter().map(|&(_, f)| f).collect::<CompensatedSum>().value();
        let level = (total_power + floor_sum) / active.len() as f64;
        let consistent = active.iter().all(|&(_, f)| f < level)
            && floors.iter().all(|&(k, f)| f >= level || active.iter().any(|&(a, _)| a == k));
        nu = level;
        if consistent {
            break;
        }
    }
    if let [(k, _)] = active[..] {
        allocations[k] = total_power;
    } else {
        for &(k, f) in &active {
            allocations[k] = nu - f;
        }
    }
    let mut active_set: Vec<usize> = active.iter().map(|&(k, _)| k).collect();
    active_set.sort_unstable();
    Ok(WaterFillResult { allocations, water_level: nu, active_set })
}

/// `R̄(P)`, the sum rate of the water-filling split of `P`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedRate<'a> {
    model: &'a MultiRateModel,
}

impl<'a> ReducedRate<'a> {
    pub fn new(model: &'a MultiRateModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &MultiRateModel {
        self.model
    }
}

impl RateFunction for ReducedRate<'_> {
    fn bits_per_second(&self, power: f64) -> f64 {
        if power <= 0.0 {
            return 0.0;
        }
        let split = water_fill(self.model, power).expect("non-negative power");
        self.model.sum_rate(&split.allocations)
    }
}

pub fn reduced_rate(model: &MultiRateModel, total_power: f64) -> Result<f64> {
    non_negative("total_power", total_power)?;
    Ok(ReducedRate::new(model).bits_per_second(total_power))
}

/// EE-maximizing total power and its split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiEePower {
    pub ee: EePower,
    pub q_ee: Vec<f64>,
}

impl MultiEePower {
    pub fn p_ee(&self) -> f64 {
        self.ee.p_ee
    }
}

pub fn compute_p_ee_mc(model: &MultiRateModel, circuit: &CircuitModel) -> Result<MultiEePower> {
    let ee = eeopt::ee_maximizer(&ReducedRate::new(model), circuit)?;
    let q_ee = water_fill(model, ee.p_ee)?.allocations;
    Ok(MultiEePower { ee, q_ee })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiChannelSolution {
    pub p_ee: MultiEePower,
    /// Scalar total-power solution under the reduced rate.
    pub total: TwoPhaseSolution,
    pub schedule: VectorSchedule,
    pub throughput: f64,
}

/// Offline optimum over parallel channels: the two-phase solver on `R̄`,
/// followed by a water-filling split of every segment.
pub fn solve_offline_mc(
    profile: &EnergyProfile,
    model: &MultiRateModel,
    circuit: &CircuitModel,
) -> Result<MultiChannelSolution> {
    let p_ee = compute_p_ee_mc(model, circuit)?;
    let total = offline::solve_offline_with(profile, &ReducedRate::new(model), circuit, p_ee.p_ee());
    let segments = total
        .schedule
        .segments()
        .iter()
        .map(|s| {
            Ok(VectorSegment { start: s.start, end: s.end, powers: water_fill(model, s.power)?.allocations })
        })
        .collect::<Result<Vec<_>>>()?;
    let schedule = VectorSchedule::new(profile.horizon(), model.num_channels(), segments)?;
    let throughput = schedule.throughput(model);
    Ok(MultiChannelSolution { p_ee, total, schedule, throughput })
}
