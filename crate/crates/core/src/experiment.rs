//! Monte-Carlo sweeps over arrival rate, horizon and the OFDMA cell.
//!
//! Each (sweep point, trial) pair gets its own RNG stream derived from the
//! base seed, draws one realization and runs every enabled policy on it.
//! Trials run on the rayon pool; rows come back in (sweep point, trial,
//! policy) order regardless of scheduling.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, PolicyName, Scenario, SweepConfig};
use crate::eeopt;
use crate::error::{Error, Result};
use crate::model::{CircuitModel, EnergyProfile, RateFunction, RateModel};
use crate::multichannel::{self, ReducedRate};
use crate::offline;
use crate::online::{ArrivalStats, Policy, Simulator};
use crate::stochastics::{self, CellConfig};

/// One policy on one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub sweep_value: f64,
    pub seed: u64,
    pub policy: PolicyName,
    pub throughput_bits: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sweep_value: f64,
    pub policy: PolicyName,
    pub trials: usize,
    pub mean_bits: f64,
    pub std_error_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scenario: Scenario,
    pub base_seed: u64,
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentResult {
    pub fn new(scenario: Scenario, base_seed: u64, rows: Vec<TrialRow>) -> Self {
        let aggregates = aggregate(&rows);
        Self { scenario, base_seed, rows, aggregates }
    }

    pub fn mean(&self, sweep_value: f64, policy: PolicyName) -> Option<f64> {
        self.aggregates.iter().find(|a| a.sweep_value == sweep_value && a.policy == policy).map(|a| a.mean_bits)
    }
}

/// Mean and standard error per (sweep value, policy), in first-appearance order.
pub fn aggregate(rows: &[TrialRow]) -> Vec<Aggregate> {
    let mut keys: Vec<(f64, PolicyName)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(v, p)| v == r.sweep_value && p == r.policy) {
            keys.push((r.sweep_value, r.policy));
        }
    }
    keys.into_iter()
        .map(|(v, p)| {
            let xs: Vec<f64> = rows.iter().filter(|r| r.sweep_value == v && r.policy == p).map(|r| r.throughput_bits).collect();
            let n = xs.len();
            let mean = crate::numeric::sum(&xs) / n as f64;
            let std_error = if n > 1 {
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            Aggregate { sweep_value: v, policy: p, trials: n, mean_bits: mean, std_error_bits: std_error }
        })
        .collect()
}

/// RNG stream for trial `trial` at sweep point `point`.
pub fn trial_stream(point: usize, trial: usize) -> u64 {
    ((point as u64) << 32) | trial as u64
}

/// Rate and EE power of one realization's channel.
struct Link<'a, R: ?Sized> {
    rate: &'a R,
    p_ee: f64,
}

fn run_policies<R: RateFunction + ?Sized>(
    sweep: &SweepConfig,
    profile: &EnergyProfile,
    link: &Link<'_, R>,
    circuit: &CircuitModel,
    stats: &ArrivalStats,
    offline: &dyn Fn() -> Result<f64>,
) -> Result<Vec<(PolicyName, f64, f64)>> {
    let sim = Simulator::new(link.rate, *circuit, *stats, link.p_ee, sweep.time_step_s)?.totals_only();
    sweep
        .policies
        .iter()
        .map(|&policy| {
            let start = Instant::now();
            let bits = match policy.online() {
                None => offline()?,
                Some(kind) => sim.run(Policy::Online(kind), profile).throughput,
            };
            let ms = if sweep.record_runtime { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            Ok((policy, bits, ms))
        })
        .collect()
}

fn run_grid<F>(sweep: &SweepConfig, trial: F) -> Result<Vec<TrialRow>>
where
    F: Fn(f64, u64) -> Result<Vec<(PolicyName, f64, f64)>> + Sync,
{
    let jobs: Vec<(f64, u64)> = sweep
        .values
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| (0..sweep.trials).map(move |k| (v, trial_stream(i, k))))
        .collect();
    let per_job: Vec<Vec<TrialRow>> = jobs
        .par_iter()
        .map(|&(v, seed)| {
            Ok(trial(v, seed)?
                .into_iter()
                .map(|(policy, throughput_bits, runtime_ms)| TrialRow { sweep_value: v, seed, policy, throughput_bits, runtime_ms })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

fn single_channel_sweep(
    sweep: &SweepConfig,
    model: &RateModel,
    circuit: &CircuitModel,
    point: impl Fn(f64) -> (f64, f64) + Sync,
) -> Result<Vec<TrialRow>> {
    let p_ee = eeopt::compute_p_ee(model, circuit)?.p_ee;
    let link = Link { rate: model, p_ee };
    run_grid(sweep, |value, seed| {
        let (rate, horizon) = point(value);
        let stats = ArrivalStats::new(rate, sweep.mean_energy_j)?;
        let mut rng = stochastics::trial_rng(sweep.base_seed, seed);
        let profile = stochastics::gen_compound_poisson(&stats, horizon, sweep.initial_energy_j, &mut rng)?;
        let offline = || Ok(offline::solve_offline_with(&profile, model, circuit, p_ee).throughput);
        run_policies(sweep, &profile, &link, circuit, &stats, &offline)
    })
}

/// Throughput versus arrival rate at a fixed horizon.
pub fn run_sweep_lambda(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate_for(Scenario::SweepLambda)?;
    let sweep = config.sweep()?;
    let horizon = sweep.horizon_s.expect("validated");
    let model = config.channel()?.rate_model()?;
    let rows = single_channel_sweep(sweep, &model, &config.circuit()?, |rate| (rate, horizon))?;
    Ok(ExperimentResult::new(Scenario::SweepLambda, sweep.base_seed, rows))
}

/// Throughput versus horizon at a fixed arrival rate.
pub fn run_sweep_horizon(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate_for(Scenario::SweepHorizon)?;
    let sweep = config.sweep()?;
    let rate = sweep.arrival_rate_hz.expect("validated");
    let model = config.channel()?.rate_model()?;
    let rows = single_channel_sweep(sweep, &model, &config.circuit()?, |horizon| (rate, horizon))?;
    Ok(ExperimentResult::new(Scenario::SweepHorizon, sweep.base_seed, rows))
}

fn ofdma_trial(sweep: &SweepConfig, cell: &CellConfig, rate: f64, horizon: f64, seed: u64) -> Result<Vec<(PolicyName, f64, f64)>> {
    let mut rng = stochastics::trial_rng(sweep.base_seed, seed);
    let users = stochastics::gen_hppp_users(cell, &mut rng)?;
    let stats = ArrivalStats::new(rate, sweep.mean_energy_j)?;
    let profile = stochastics::gen_compound_poisson(&stats, horizon, sweep.initial_energy_j, &mut rng)?;
    let circuit = CircuitModel::new(cell.circuit_power)?;
    let Some(model) = stochastics::cell_to_multimodel(&users, cell)? else {
        return Ok(sweep.policies.iter().map(|&p| (p, 0.0, 0.0)).collect());
    };
    let p_ee = multichannel::compute_p_ee_mc(&model, &circuit)?;
    let reduced = ReducedRate::new(&model);
    let link = Link { rate: &reduced, p_ee: p_ee.p_ee() };
    let offline = || Ok(multichannel::solve_offline_mc(&profile, &model, &circuit)?.throughput);
    run_policies(sweep, &profile, &link, &circuit, &stats, &offline)
}

/// OFDMA downlink from an energy-harvesting base station, versus arrival rate.
/// Online policies act on the water-filled sum rate with the multichannel `p_ee`.
pub fn run_ofdma(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate_for(Scenario::Ofdma)?;
    let sweep = config.sweep()?;
    let cell = config.cell()?;
    let horizon = sweep.horizon_s.expect("validated");
    let rows = run_grid(sweep, |rate, seed| ofdma_trial(sweep, &cell, rate, horizon, seed))?;
    Ok(ExperimentResult::new(Scenario::Ofdma, sweep.base_seed, rows))
}

pub fn run_sweep(scenario: Scenario, config: &ExperimentConfig) -> Result<ExperimentResult> {
    match scenario {
        Scenario::SweepLambda => run_sweep_lambda(config),
        Scenario::SweepHorizon => run_sweep_horizon(config),
        Scenario::Ofdma => run_ofdma(config),
        other => Err(Error::Config(format!("`{}` is not a sweep scenario", other.name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate_schedule;

    fn small(scenario: Scenario, trials: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::default_for(scenario);
        c.sweep.as_mut().unwrap().trials = trials;
        c
    }

    #[test]
    fn row_count_and_order() {
        let r = run_sweep_lambda(&small(Scenario::SweepLambda, 3)).unwrap();
        assert_eq!(r.rows.len(), 10 * 3 * 4);
        assert_eq!(r.aggregates.len(), 10 * 4);
        let first: Vec<_> = r.rows[..4].iter().map(|x| x.policy).collect();
        assert_eq!(first, PolicyName::ALL.to_vec());
        assert!(r.rows.windows(2).all(|w| (w[0].sweep_value, w[0].seed) <= (w[1].sweep_value, w[1].seed)));
        assert!(r.rows.iter().all(|x| x.runtime_ms == 0.0));
    }

    #[test]
    fn single_trial_is_deterministic() {
        let mut c = small(Scenario::SweepLambda, 1);
        c.sweep.as_mut().unwrap().values = vec![0.5];
        let a = run_sweep_lambda(&c).unwrap();
        let b = run_sweep_lambda(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 4);
    }

    #[test]
    fn aggregates_match_rows() {
        let r = run_sweep_horizon(&small(Scenario::SweepHorizon, 5)).unwrap();
        for a in &r.aggregates {
            let xs: Vec<f64> = r.rows.iter().filter(|x| x.sweep_value == a.sweep_value && x.policy == a.policy).map(|x| x.throughput_bits).collect();
            assert_eq!(xs.len(), a.trials);
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            assert!((mean - a.mean_bits).abs() <= 1e-9 * mean.abs().max(1.0));
        }
    }

    #[test]
    fn offline_rows_equal_schedule_evaluation() {
        let mut c = small(Scenario::SweepLambda, 4);
        c.sweep.as_mut().unwrap().values = vec![0.4];
        c.sweep.as_mut().unwrap().policies = vec![PolicyName::Offline];
        let r = run_sweep_lambda(&c).unwrap();
        let sweep = c.sweep().unwrap();
        let model = c.channel().unwrap().rate_model().unwrap();
        let circuit = c.circuit().unwrap();
        for row in &r.rows {
            let stats = ArrivalStats::new(0.4, sweep.mean_energy_j).unwrap();
            let mut rng = stochastics::trial_rng(sweep.base_seed, row.seed);
            let p = stochastics::gen_compound_poisson(&stats, 20.0, 0.0, &mut rng).unwrap();
            let sol = offline::solve_offline(&p, &model, &circuit).unwrap();
            let ev = evaluate_schedule(&sol.schedule, &model, &circuit, &p).unwrap();
            assert!(ev.feasible);
            assert!((ev.throughput - row.throughput_bits).abs() <= 1e-9 * ev.throughput.max(1.0));
        }
    }

    #[test]
    fn offline_dominates_every_row() {
        let r = run_sweep_lambda(&small(Scenario::SweepLambda, 4)).unwrap();
        for chunk in r.rows.chunks(4) {
            let off = chunk[0].throughput_bits;
            assert!(chunk[1..].iter().all(|x| x.throughput_bits <= off * (1.0 + 1e-6)));
        }
    }

    #[test]
    fn ofdma_offline_dominates() {
        let mut c = small(Scenario::Ofdma, 10);
        c.sweep.as_mut().unwrap().values = vec![0.8];
        let r = run_ofdma(&c).unwrap();
        assert_eq!(r.rows.len(), 10 * 4);
        for chunk in r.rows.chunks(4) {
            assert!(chunk[1..].iter().all(|x| x.throughput_bits <= chunk[0].throughput_bits * (1.0 + 1e-6)));
        }
    }

    #[test]
    fn ofdma_keeps_empty_cells() {
        let mut c = small(Scenario::Ofdma, 5);
        c.sweep.as_mut().unwrap().values = vec![0.8];
        // about 3e-6 expected users: every drop is empty
        c.cell.as_mut().unwrap().user_density_per_m2 = 1e-12;
        let r = run_ofdma(&c).unwrap();
        assert_eq!(r.rows.len(), 5 * 4);
        assert!(r.rows.iter().all(|x| x.throughput_bits == 0.0));
    }

    #[test]
    fn non_sweep_scenario_rejected() {
        assert!(run_sweep(Scenario::Pee, &ExperimentConfig::default_for(Scenario::Pee)).is_err());
    }
}
