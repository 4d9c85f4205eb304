//! Brute-force dynamic program over discretized time, quantized power and
//! quantized cumulative energy. It shares no logic with the two-phase solver
//! and is used to certify it: every schedule it returns is feasible, so its
//! value is a lower bound on the continuous optimum.
//!
//! Each epoch is cut into equal slots no longer than the requested step, so
//! arrivals always fall on slot boundaries. The state is the cumulative
//! consumed energy in bins of `energy_bin` joules and the epoch caps are
//! rounded down. Within each epoch the grid powers are snapped to the nearest
//! power whose slot energy is a whole number of bins, so slot costs are exact
//! and no energy is lost to rounding.

use crate::error::{Error, Result};
use crate::model::{CircuitModel, EnergyProfile, PowerSchedule, RateFunction, ScheduleBuilder};

pub const MAX_SLOTS: usize = 2000;
pub const MAX_ENERGY_BIN: f64 = 1e-4;
const MAX_STATES: usize = 250_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Longest slot duration (s).
    pub time_step: f64,
    /// Candidate transmit powers (W); 0 is always added.
    pub power_grid: Vec<f64>,
    /// Energy quantum (J), at most [`MAX_ENERGY_BIN`].
    pub energy_bin: f64,
    /// Each epoch gets `ceil(length / time_step) * subdivision` equal slots.
    pub subdivision: usize,
}

impl OracleConfig {
    pub fn new(time_step: f64, power_grid: Vec<f64>) -> Self {
        Self { time_step, power_grid, energy_bin: MAX_ENERGY_BIN, subdivision: 1 }
    }

    /// Twice as fine in time, power and energy, and nested in this
    /// configuration: every schedule feasible here stays feasible there, so
    /// the oracle value can only grow.
    pub fn refined(&self) -> Self {
        let mut grid = self.power_grid.clone();
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mids: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        grid.extend(mids);
        grid.retain(|&p| p > 0.0);
        grid.sort_by(f64::total_cmp);
        Self { time_step: self.time_step, power_grid: grid, energy_bin: self.energy_bin / 2.0, subdivision: self.subdivision * 2 }
    }

    pub fn with_energy_bin(mut self, energy_bin: f64) -> Self {
        self.energy_bin = energy_bin;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Exact throughput (bits) of `schedule`.
    pub throughput: f64,
    pub schedule: PowerSchedule,
    pub slots: usize,
    pub energy_bins: usize,
}

pub fn dp_oracle<R: RateFunction + ?Sized>(
    profile: &EnergyProfile,
    rate: &R,
    circuit: &CircuitModel,
    config: &OracleConfig,
) -> Result<OracleSolution> {
    let step = crate::error::positive("time_step", config.time_step)?;
    let bin = crate::error::positive("energy_bin", config.energy_bin)?;
    if bin > MAX_ENERGY_BIN {
        return Err(Error::InvalidParameter { name: "energy_bin", reason: format!("must be <= {MAX_ENERGY_BIN} J") });
    }
    let mut grid: Vec<f64> = Vec::with_capacity(config.power_grid.len() + 1);
    grid.push(0.0);
    for &p in &config.power_grid {
        crate::error::non_negative("power_grid", p)?;
        grid.push(p);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() > u16::MAX as usize {
        return Err(Error::BudgetExceeded(format!("{} grid powers", grid.len())));
    }

    let lengths = profile.lengths();
    if config.subdivision == 0 {
        return Err(Error::InvalidParameter { name: "subdivision", reason: "must be at least 1".into() });
    }
    let slots_per_epoch: Vec<usize> =
        lengths.iter().map(|&l| ((l / step) - 1e-9).ceil().max(1.0) as usize * config.subdivision).collect();
    let slots: usize = slots_per_epoch.iter().sum();
    if slots > MAX_SLOTS {
        return Err(Error::BudgetExceeded(format!("{slots} time slots exceed {MAX_SLOTS}")));
    }
    let n = profile.num_epochs();
    let caps: Vec<usize> = (1..=n).map(|i| (profile.harvested_before(i) / bin).floor() as usize).collect();
    let bins = caps[n - 1] + 1;
    if slots.saturating_mul(bins) > MAX_STATES {
        return Err(Error::BudgetExceeded(format!("{slots} slots x {bins} energy bins")));
    }

    // slot -> epoch, and per-epoch action tables (power, cost in bins, bits)
    let slot_epoch: Vec<usize> =
        slots_per_epoch.iter().enumerate().flat_map(|(i, &m)| std::iter::repeat_n(i, m)).collect();
    let durations: Vec<f64> = lengths.iter().zip(&slots_per_epoch).map(|(&l, &m)| l / m as f64).collect();
    let actions: Vec<Vec<(f64, usize, f64)>> = durations
        .iter()
        .map(|&d| {
            let quantum = bin / d;
            let min_cost = (circuit.alpha() / quantum - 1e-9).ceil().max(1.0) as usize;
            let mut costs: Vec<usize> = grid[1..].iter().map(|&p| (((p + circuit.alpha()) / quantum).round() as usize).max(min_cost)).collect();
            costs.sort_unstable();
            costs.dedup();
            let mut table = vec![(0.0, 0, 0.0)];
            for c in costs {
                let p = (c as f64 * quantum - circuit.alpha()).max(0.0);
                table.push((p, c, d * rate.bits_per_second(p)));
            }
            table
        })
        .collect();
    let mut next = vec![0.0f64; bins];
    let mut cur = vec![f64::NEG_INFINITY; bins];
    let mut choice = vec![0u16; slots * bins];
    for s in (0..slots).rev() {
        let i = slot_epoch[s];
        let cap = caps[i];
        cur.fill(f64::NEG_INFINITY);
        let arg = &mut choice[s * bins..(s + 1) * bins];
        for (k, &(_, cost, reward)) in actions[i].iter().enumerate() {
            if cost > cap {
                continue;
            }
            let reach = cap - cost + 1;
            let src = &next[cost..cost + reach];
            for ((c, a), &v) in cur[..reach].iter_mut().zip(arg[..reach].iter_mut()).zip(src) {
                let cand = reward + v;
                if cand > *c {
                    *c = cand;
                    *a = k as u16;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    if !next[0].is_finite() {
        return Err(Error::BudgetExceeded("no feasible grid schedule".into()));
    }

    let b = profile.boundaries();
    let mut builder = ScheduleBuilder::default();
    let mut state = 0usize;
    let mut run: Option<(f64, f64, f64)> = None;
    let mut s = 0;
    for (i, &m) in slots_per_epoch.iter().enumerate() {
        for j in 0..m {
            let (p, cost, _) = actions[i][choice[s * bins + state] as usize];
            state += cost;
            let start = if j == 0 { b[i] } else { b[i] + durations[i] * j as f64 };
            let end = if j + 1 == m { b[i + 1] } else { b[i] + durations[i] * (j + 1) as f64 };
            run = match run {
                Some((rs, _, rp)) if rp == p => Some((rs, end, rp)),
                Some((rs, re, rp)) => {
                    builder.push(rs, re, rp);
                    Some((start, end, p))
                }
                None => Some((start, end, p)),
            };
            s += 1;
        }
    }
    if let Some((rs, re, rp)) = run {
        builder.push(rs, re, rp);
    }
    let schedule = builder.finish(profile.horizon());
    Ok(OracleSolution { throughput: schedule.throughput(rate), schedule, slots, energy_bins: bins })
}
