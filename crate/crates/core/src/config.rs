//! JSON experiment configuration. Every quantity carries its unit in the key;
//! decibel variants (`*_db`, `*_dbm_per_hz`) are accepted where noted and
//! converted to linear SI units on ingestion.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Arrival, CircuitModel, EnergyProfile, MultiRateModel, RateModel};
use crate::online::{ArrivalStats, PolicyKind, DEFAULT_TIME_STEP};
use crate::stochastics::{self, CellConfig};
use crate::units::{db_to_linear, dbm_to_watts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Pee,
    Offline,
    Staircase,
    Multichannel,
    Online,
    SweepLambda,
    SweepHorizon,
    Ofdma,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Pee,
        Scenario::Offline,
        Scenario::Staircase,
        Scenario::Multichannel,
        Scenario::Online,
        Scenario::SweepLambda,
        Scenario::SweepHorizon,
        Scenario::Ofdma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Pee => "pee",
            Scenario::Offline => "offline",
            Scenario::Staircase => "staircase",
            Scenario::Multichannel => "multichannel",
            Scenario::Online => "online",
            Scenario::SweepLambda => "sweep_lambda",
            Scenario::SweepHorizon => "sweep_horizon",
            Scenario::Ofdma => "ofdma",
        }
    }
}

/// Policies an experiment can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Offline,
    Proposed,
    Eep,
    Enp,
}

impl PolicyName {
    pub const ALL: [PolicyName; 4] = [PolicyName::Offline, PolicyName::Proposed, PolicyName::Eep, PolicyName::Enp];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyName::Offline => "offline",
            PolicyName::Proposed => "proposed",
            PolicyName::Eep => "eep",
            PolicyName::Enp => "enp",
        }
    }

    /// The online policy, or `None` for the offline solver.
    pub fn online(&self) -> Option<PolicyKind> {
        match self {
            PolicyName::Offline => None,
            PolicyName::Proposed => Some(PolicyKind::Proposed),
            PolicyName::Eep => Some(PolicyKind::Eep),
            PolicyName::Enp => Some(PolicyKind::Enp),
        }
    }
}

fn one_of<T: Copy>(name: &str, linear: Option<T>, db: Option<T>) -> Result<Option<(T, bool)>> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(Error::Config(format!("give either `{name}` or its decibel form, not both"))),
        (Some(v), None) => Ok(Some((v, false))),
        (None, Some(v)) => Ok(Some((v, true))),
        (None, None) => Ok(None),
    }
}

fn noise_from(w_per_hz: Option<f64>, dbm_per_hz: Option<f64>) -> Result<f64> {
    match one_of("noise_density_w_per_hz", w_per_hz, dbm_per_hz)? {
        Some((v, false)) => Ok(v),
        Some((v, true)) => Ok(dbm_to_watts(v)),
        None => Err(Error::Config("missing noise density (`noise_density_w_per_hz` or `noise_density_dbm_per_hz`)".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub bandwidth_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_density_w_per_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_density_dbm_per_hz: Option<f64>,
    /// SNR gap in dB; 0 dB means capacity-achieving coding.
    #[serde(default)]
    pub gap_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_db: Option<f64>,
    /// Per-channel gains for the multichannel scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains_db: Option<Vec<f64>>,
}

impl ChannelConfig {
    pub fn noise_density(&self) -> Result<f64> {
        noise_from(self.noise_density_w_per_hz, self.noise_density_dbm_per_hz)
    }

    pub fn gap(&self) -> f64 {
        db_to_linear(self.gap_db)
    }

    fn single_gain(&self) -> Result<Option<f64>> {
        Ok(one_of("gain", self.gain, self.gain_db)?.map(|(v, db)| if db { db_to_linear(v) } else { v }))
    }

    fn gain_list(&self) -> Result<Option<Vec<f64>>> {
        match (&self.gains, &self.gains_db) {
            (Some(_), Some(_)) => Err(Error::Config("give either `gains` or `gains_db`, not both".into())),
            (Some(g), None) => Ok(Some(g.clone())),
            (None, Some(g)) => Ok(Some(g.iter().map(|&d| db_to_linear(d)).collect())),
            (None, None) => Ok(None),
        }
    }

    pub fn rate_model(&self) -> Result<RateModel> {
        let gain = self.single_gain()?.ok_or_else(|| Error::Config("channel needs `gain` or `gain_db`".into()))?;
        RateModel::new(self.bandwidth_hz, self.noise_density()?, self.gap(), gain)
    }

    /// The parallel-channel model; a single `gain` gives one channel.
    pub fn multi_model(&self) -> Result<MultiRateModel> {
        let gains = match (self.gain_list()?, self.single_gain()?) {
            (Some(_), Some(_)) => return Err(Error::Config("give either a single gain or a gain list, not both".into())),
            (Some(g), None) => g,
            (None, Some(g)) => vec![g],
            (None, None) => return Err(Error::Config("channel needs `gains`, `gains_db`, `gain` or `gain_db`".into())),
        };
        MultiRateModel::new(self.bandwidth_hz, self.noise_density()?, self.gap(), gains)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub alpha_w: f64,
}

impl CircuitConfig {
    pub fn model(&self) -> Result<CircuitModel> {
        CircuitModel::new(self.alpha_w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalConfig {
    pub time_s: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub initial_energy_j: f64,
    pub horizon_s: f64,
    #[serde(default)]
    pub arrivals: Vec<ArrivalConfig>,
}

impl ProfileConfig {
    pub fn profile(&self) -> Result<EnergyProfile> {
        let arrivals: Vec<Arrival> = self.arrivals.iter().map(|a| Arrival::new(a.time_s, a.energy_j)).collect();
        EnergyProfile::new(self.initial_energy_j, &arrivals, self.horizon_s)
    }
}

/// Draws one compound-Poisson profile instead of listing arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub arrival_rate_hz: f64,
    pub mean_energy_j: f64,
    pub horizon_s: f64,
    #[serde(default)]
    pub initial_energy_j: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn stats(&self) -> Result<ArrivalStats> {
        ArrivalStats::new(self.arrival_rate_hz, self.mean_energy_j)
    }

    pub fn profile(&self) -> Result<EnergyProfile> {
        let mut rng = stochastics::trial_rng(self.seed, 0);
        stochastics::gen_compound_poisson(&self.stats()?, self.horizon_s, self.initial_energy_j, &mut rng)
    }
}

fn default_time_step() -> f64 {
    DEFAULT_TIME_STEP
}

fn default_policy() -> PolicyKind {
    PolicyKind::Proposed
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnlineConfig {
    #[serde(default = "default_policy")]
    pub policy: PolicyKind,
    #[serde(default = "default_time_step")]
    pub time_step_s: f64,
    /// Known `lambda_e * E_bar` (W); overrides the rate/energy pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_energy_j: Option<f64>,
}

impl OnlineConfig {
    /// Arrival statistics known to the policy, falling back to the generator's.
    pub fn stats(&self, generator: Option<&GeneratorConfig>) -> Result<ArrivalStats> {
        if let Some(p) = self.mean_power_w {
            return ArrivalStats::from_mean_power(p);
        }
        match (self.arrival_rate_hz, self.mean_energy_j, generator) {
            (Some(r), Some(e), _) => ArrivalStats::new(r, e),
            (None, None, Some(g)) => g.stats(),
            _ => Err(Error::Config("online needs `mean_power_w`, both `arrival_rate_hz` and `mean_energy_j`, or a generator".into())),
        }
    }
}

fn default_trials() -> usize {
    200
}

fn default_policies() -> Vec<PolicyName> {
    PolicyName::ALL.to_vec()
}

/// Monte-Carlo sweep settings. `values` is the swept variable: the arrival
/// rate (1/s) for `sweep_lambda` and `ofdma`, the horizon (s) for `sweep_horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicyName>,
    #[serde(default = "default_time_step")]
    pub time_step_s: f64,
    pub mean_energy_j: f64,
    /// Fixed horizon when sweeping the arrival rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_s: Option<f64>,
    /// Fixed arrival rate when sweeping the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_rate_hz: Option<f64>,
    #[serde(default)]
    pub initial_energy_j: f64,
    /// Measure wall time per trial. Off by default because timings are not
    /// reproducible; rows then carry `runtime_ms = 0`.
    #[serde(default)]
    pub record_runtime: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep `values` is empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("`trials` must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("sweep `policies` is empty".into()));
        }
        if !(self.time_step_s > 0.0) {
            return Err(Error::Config("`time_step_s` must be positive".into()));
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("sweep `values` must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    pub radius_m: f64,
    pub user_density_per_m2: f64,
    pub reference_loss_db: f64,
    pub reference_distance_m: f64,
    pub path_loss_exponent: f64,
    pub total_bandwidth_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_density_w_per_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_density_dbm_per_hz: Option<f64>,
    #[serde(default)]
    pub gap_db: f64,
    pub circuit_power_w: f64,
}

impl CellSection {
    pub fn cell(&self) -> Result<CellConfig> {
        let cell = CellConfig {
            radius: self.radius_m,
            density: self.user_density_per_m2,
            reference_gain: db_to_linear(self.reference_loss_db),
            reference_distance: self.reference_distance_m,
            path_loss_exponent: self.path_loss_exponent,
            bandwidth: self.total_bandwidth_hz,
            noise_density: noise_from(self.noise_density_w_per_hz, self.noise_density_dbm_per_hz)?,
            gap: db_to_linear(self.gap_db),
            circuit_power: self.circuit_power_w,
        };
        cell.validate()?;
        Ok(cell)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub online: Option<OnlineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellSection>,
}

fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
    section.as_ref().ok_or_else(|| Error::Config(format!("missing `{name}` section")))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn channel(&self) -> Result<&ChannelConfig> {
        require(&self.channel, "channel")
    }

    pub fn circuit(&self) -> Result<CircuitModel> {
        require(&self.circuit, "circuit")?.model()
    }

    pub fn sweep(&self) -> Result<&SweepConfig> {
        require(&self.sweep, "sweep")
    }

    pub fn cell(&self) -> Result<CellConfig> {
        require(&self.cell, "cell")?.cell()
    }

    /// The realized profile: listed arrivals, else one generated draw.
    pub fn energy_profile(&self) -> Result<EnergyProfile> {
        match (&self.profile, &self.generator) {
            (Some(p), _) => p.profile(),
            (None, Some(g)) => g.profile(),
            (None, None) => Err(Error::Config("missing `profile` or `generator` section".into())),
        }
    }

    pub fn online(&self) -> OnlineConfig {
        self.online.unwrap_or(OnlineConfig {
            policy: default_policy(),
            time_step_s: DEFAULT_TIME_STEP,
            mean_power_w: None,
            arrival_rate_hz: None,
            mean_energy_j: None,
        })
    }

    /// Applies command-line overrides.
    pub fn apply_overrides(&mut self, seed: Option<u64>, trials: Option<usize>, step: Option<f64>) {
        if let Some(sweep) = self.sweep.as_mut() {
            if let Some(s) = seed {
                sweep.base_seed = s;
            }
            if let Some(t) = trials {
                sweep.trials = t;
            }
            if let Some(dt) = step {
                sweep.time_step_s = dt;
            }
        }
        if let Some(s) = seed {
            if let Some(g) = self.generator.as_mut() {
                g.seed = s;
            }
        }
        if let Some(dt) = step {
            let mut online = self.online();
            online.time_step_s = dt;
            self.online = Some(online);
        }
    }

    /// Checks that every section the scenario needs is present and valid.
    pub fn validate_for(&self, scenario: Scenario) -> Result<()> {
        match scenario {
            Scenario::Pee => {
                self.channel()?.rate_model()?;
                self.circuit()?;
            }
            Scenario::Offline | Scenario::Staircase => {
                self.channel()?.rate_model()?;
                self.circuit()?;
                self.energy_profile()?;
            }
            Scenario::Multichannel => {
                self.channel()?.multi_model()?;
                self.circuit()?;
                self.energy_profile()?;
            }
            Scenario::Online => {
                self.channel()?.rate_model()?;
                self.circuit()?;
                self.energy_profile()?;
                let online = self.online();
                online.stats(self.generator.as_ref())?;
                if !(online.time_step_s > 0.0) {
                    return Err(Error::Config("`time_step_s` must be positive".into()));
                }
            }
            Scenario::SweepLambda => {
                self.channel()?.rate_model()?;
                self.circuit()?;
                let s = self.sweep()?;
                s.validate()?;
                s.horizon_s.ok_or_else(|| Error::Config("sweep_lambda needs `sweep.horizon_s`".into()))?;
            }
            Scenario::SweepHorizon => {
                self.channel()?.rate_model()?;
                self.circuit()?;
                let s = self.sweep()?;
                s.validate()?;
                s.arrival_rate_hz.ok_or_else(|| Error::Config("sweep_horizon needs `sweep.arrival_rate_hz`".into()))?;
            }
            Scenario::Ofdma => {
                self.cell()?;
                let s = self.sweep()?;
                s.validate()?;
                s.horizon_s.ok_or_else(|| Error::Config("ofdma needs `sweep.horizon_s`".into()))?;
            }
        }
        Ok(())
    }

    /// Built-in configuration reproducing the worked examples and figure setups.
    pub fn default_for(scenario: Scenario) -> Self {
        let channel = ChannelConfig {
            bandwidth_hz: 1e6,
            noise_density_w_per_hz: Some(1e-16),
            noise_density_dbm_per_hz: None,
            gap_db: 0.0,
            gain: Some(1e-8),
            gain_db: None,
            gains: None,
            gains_db: None,
        };
        let circuit = CircuitConfig { alpha_w: 0.1159 };
        let example = ProfileConfig {
            initial_energy_j: 0.5,
            horizon_s: 20.0,
            arrivals: [(4.0, 0.5), (6.0, 0.5), (11.0, 1.0), (14.0, 0.5), (16.0, 0.75), (18.0, 0.5)]
                .iter()
                .map(|&(time_s, energy_j)| ArrivalConfig { time_s, energy_j })
                .collect(),
        };
        let sweep = SweepConfig {
            values: vec![],
            trials: default_trials(),
            base_seed: 1,
            policies: default_policies(),
            time_step_s: DEFAULT_TIME_STEP,
            mean_energy_j: 0.5,
            horizon_s: None,
            arrival_rate_hz: None,
            initial_energy_j: 0.0,
            record_runtime: false,
        };
        let base = ExperimentConfig { channel: Some(channel.clone()), circuit: Some(circuit), ..Default::default() };
        match scenario {
            Scenario::Pee => base,
            Scenario::Offline | Scenario::Staircase => ExperimentConfig { profile: Some(example), ..base },
            Scenario::Multichannel => ExperimentConfig {
                channel: Some(ChannelConfig { gain: None, gains: Some(vec![1e-8, 5e-9, 1e-9]), ..channel }),
                profile: Some(example),
                ..base
            },
            Scenario::Online => ExperimentConfig {
                profile: Some(example),
                online: Some(OnlineConfig { mean_power_w: Some(0.1875), ..ExperimentConfig::default().online() }),
                ..base
            },
            Scenario::SweepLambda => ExperimentConfig {
                sweep: Some(SweepConfig {
                    values: (1..=10).map(|k| k as f64 / 10.0).collect(),
                    horizon_s: Some(20.0),
                    ..sweep
                }),
                ..base
            },
            Scenario::SweepHorizon => ExperimentConfig {
                sweep: Some(SweepConfig { values: vec![5.0, 10.0, 20.0, 40.0], arrival_rate_hz: Some(0.3), ..sweep }),
                ..base
            },
            Scenario::Ofdma => ExperimentConfig {
                sweep: Some(SweepConfig {
                    values: vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2],
                    mean_energy_j: 200.0,
                    horizon_s: Some(20.0),
                    ..sweep
                }),
                cell: Some(CellSection {
                    radius_m: 1000.0,
                    user_density_per_m2: 1e-6,
                    reference_loss_db: -60.0,
                    reference_distance_m: 10.0,
                    path_loss_exponent: 3.0,
                    total_bandwidth_hz: 5e6,
                    noise_density_w_per_hz: None,
                    noise_density_dbm_per_hz: Some(-174.0),
                    gap_db: 0.0,
                    circuit_power_w: 60.0,
                }),
                ..ExperimentConfig::default()
            },
        }
    }
}
