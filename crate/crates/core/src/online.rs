//! Policies that only see past and present energy state, and the
//! discrete-time simulator that drives them.
//!
//! Policies are pure functions of [`OnlineState`]; the simulator owns the
//! battery. Time advances in fixed steps, split at arrival instants and at
//! policy breakpoints, and the policy is re-queried at the start of every
//! piece. When the store runs dry mid-piece the transmitter stays on only for
//! the affordable fraction.

use serde::{Deserialize, Serialize};

use crate::eeopt;
use crate::error::{positive, Error, Result};
use crate::model::{CircuitModel, EnergyProfile, PowerSchedule, RateFunction, RateModel};
use crate::numeric::CompensatedSum;

/// Default simulator step (s).
pub const DEFAULT_TIME_STEP: f64 = 0.01;

/// Compound-Poisson arrival statistics known to the transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalStats {
    rate: f64,
    mean_energy: f64,
}

impl ArrivalStats {
    pub fn new(rate: f64, mean_energy: f64) -> Result<Self> {
        Ok(Self { rate: positive("arrival_rate", rate)?, mean_energy: positive("mean_energy", mean_energy)? })
    }

    /// Statistics with a given mean harvested power `rate * mean_energy`, at unit rate.
    pub fn from_mean_power(mean_power: f64) -> Result<Self> {
        Self::new(1.0, mean_power)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean_energy(&self) -> f64 {
        self.mean_energy
    }

    /// Long-run harvested power `lambda_e * E_bar` (W).
    pub fn mean_power(&self) -> f64 {
        self.rate * self.mean_energy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineState {
    pub time: f64,
    pub stored_energy: f64,
    pub horizon: f64,
}

/// Online heuristic: `max(E_s/(T - t) + lambda_e E_bar - alpha, p_ee)` while
/// energy is stored, else off.
pub fn online_power(state: &OnlineState, stats: &ArrivalStats, p_ee: f64, circuit: &CircuitModel) -> f64 {
    if state.stored_energy <= 0.0 {
        return 0.0;
    }
    let expected = state.stored_energy / (state.horizon - state.time) + stats.mean_power() - circuit.alpha();
    expected.max(p_ee)
}

/// Energy-efficient policy: `p_ee` whenever energy is stored.
pub fn eep_power(state: &OnlineState, p_ee: f64) -> f64 {
    if state.stored_energy > 0.0 {
        p_ee
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnpPower {
    pub power: f64,
    /// Set when the mean harvested power does not exceed the circuit power.
    pub degenerate: bool,
}

/// Energy-neutral policy: `lambda_e E_bar - alpha` whenever energy is stored,
/// clamped at 0.
pub fn enp_power(state: &OnlineState, stats: &ArrivalStats, circuit: &CircuitModel) -> EnpPower {
    let level = stats.mean_power() - circuit.alpha();
    let degenerate = level <= 0.0;
    let power = if state.stored_energy > 0.0 && !degenerate { level } else { 0.0 };
    EnpPower { power, degenerate }
}

/// Offline-optimal power at `t = 0`:
/// `max(min_i (E_0 + ... + E_{i-1}) / t_i - alpha, p_ee)`.
/// Needs the whole profile, so it serves only as a check on the solver.
pub fn p_star_zero(profile: &EnergyProfile, p_ee: f64, circuit: &CircuitModel) -> f64 {
    let b = profile.boundaries();
    let worst = (1..=profile.num_epochs())
        .map(|i| profile.harvested_before(i) / b[i])
        .fold(f64::INFINITY, f64::min);
    (worst - circuit.alpha()).max(p_ee)
}

/// The approximation of [`p_star_zero`] available online at `t = 0`:
/// `max(E_0/T + lambda_e E_bar - alpha, p_ee)`.
pub fn p_star_zero_estimate(initial_energy: f64, horizon: f64, stats: &ArrivalStats, p_ee: f64, circuit: &CircuitModel) -> f64 {
    (initial_energy / horizon + stats.mean_power() - circuit.alpha()).max(p_ee)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Proposed,
    Eep,
    Enp,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Proposed => "proposed",
            PolicyKind::Eep => "eep",
            PolicyKind::Enp => "enp",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(PolicyKind::Proposed),
            "eep" => Ok(PolicyKind::Eep),
            "enp" => Ok(PolicyKind::Enp),
            other => Err(Error::Config(format!("unknown online policy `{other}`"))),
        }
    }
}

/// What the simulator runs.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Online(PolicyKind),
    /// Replays a precomputed schedule, still limited by the stored energy.
    Fixed(&'a PowerSchedule),
}

/// One simulated piece `(time, time + duration]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: f64,
    pub duration: f64,
    /// Stored energy at `time`, after crediting any arrival at `time`.
    pub stored_energy: f64,
    pub power: f64,
    pub on_fraction: f64,
    pub bits: f64,
    /// Energy drawn during the piece, circuit power included.
    pub consumed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub records: Vec<StepRecord>,
    pub throughput: f64,
    pub harvested: f64,
    pub consumed: f64,
    pub residual_energy: f64,
}

/// Discrete-time simulator for one channel model and parameter set.
#[derive(Debug, Clone)]
pub struct Simulator<'r, R: ?Sized> {
    rate: &'r R,
    circuit: CircuitModel,
    stats: ArrivalStats,
    p_ee: f64,
    time_step: f64,
    record: bool,
}

impl<'r, R: RateFunction + ?Sized> Simulator<'r, R> {
    pub fn new(rate: &'r R, circuit: CircuitModel, stats: ArrivalStats, p_ee: f64, time_step: f64) -> Result<Self> {
        Ok(Self { rate, circuit, stats, p_ee, time_step: positive("time_step", time_step)?, record: true })
    }

    /// Skips per-piece records; totals are still reported.
    pub fn totals_only(mut self) -> Self {
        self.record = false;
        self
    }

    fn command(&self, policy: &Policy<'_>, state: &OnlineState) -> (f64, f64) {
        match policy {
            Policy::Online(PolicyKind::Proposed) => (online_power(state, &self.stats, self.p_ee, &self.circuit), f64::INFINITY),
            Policy::Online(PolicyKind::Eep) => (eep_power(state, self.p_ee), f64::INFINITY),
            Policy::Online(PolicyKind::Enp) => (enp_power(state, &self.stats, &self.circuit).power, f64::INFINITY),
            Policy::Fixed(schedule) => {
                let segs = schedule.segments();
                let k = segs.partition_point(|s| s.end <= state.time).min(segs.len() - 1);
                (segs[k].power, segs[k].end)
            }
        }
    }

    pub fn run(&self, policy: Policy<'_>, profile: &EnergyProfile) -> SimTrace {
        let horizon = profile.horizon();
        let arrivals = profile.arrivals();
        let mut next_arrival = 0;
        let mut stored = profile.initial_energy();
        let mut harvested = CompensatedSum::new();
        harvested.add(stored);
        let mut consumed = CompensatedSum::new();
        let mut bits = CompensatedSum::new();
        let mut records = Vec::new();

        let steps = (horizon / self.time_step).ceil() as usize;
        let mut t = 0.0;
        for n in 0..steps {
            let step_end = if n + 1 == steps { horizon } else { (n + 1) as f64 * self.time_step };
            while t < step_end {
                while next_arrival < arrivals.len() && arrivals[next_arrival].time <= t {
                    stored += arrivals[next_arrival].amount;
                    harvested.add(arrivals[next_arrival].amount);
                    next_arrival += 1;
                }
                let state = OnlineState { time: t, stored_energy: stored, horizon };
                let (power, breakpoint) = self.command(&policy, &state);
                let mut end = step_end.min(breakpoint);
                if let Some(a) = arrivals.get(next_arrival) {
                    end = end.min(a.time);
                }
                let duration = end - t;
                let (on_fraction, draw) = if power > 0.0 && stored > 0.0 {
                    let need = self.circuit.total_power(power) * duration;
                    if need <= stored {
                        (1.0, need)
                    } else {
                        (stored / need, stored)
                    }
                } else {
                    (0.0, 0.0)
                };
                let delivered = if on_fraction > 0.0 { on_fraction * duration * self.rate.bits_per_second(power) } else { 0.0 };
                if self.record {
                    records.push(StepRecord { time: t, duration, stored_energy: stored, power, on_fraction, bits: delivered, consumed: draw });
                }
                stored = if on_fraction < 1.0 && on_fraction > 0.0 { 0.0 } else { stored - draw };
                consumed.add(draw);
                bits.add(delivered);
                t = end;
            }
        }
        SimTrace {
            records,
            throughput: bits.value(),
            harvested: harvested.value(),
            consumed: consumed.value(),
            residual_energy: stored,
        }
    }
}

/// Simulates one single-channel policy, deriving `p_ee` from the channel.
pub fn simulate(
    policy: Policy<'_>,
    profile: &EnergyProfile,
    model: &RateModel,
    circuit: &CircuitModel,
    stats: &ArrivalStats,
    time_step: f64,
) -> Result<SimTrace> {
    let p_ee = eeopt::compute_p_ee(model, circuit)?.p_ee;
    Ok(Simulator::new(model, *circuit, *stats, p_ee, time_step)?.run(policy, profile))
}
