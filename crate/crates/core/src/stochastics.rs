//! Seeded generators for energy arrivals and OFDMA cell geometry.
//!
//! Every trial draws from its own ChaCha8 stream, `(base_seed, trial)`, so
//! results do not depend on how trials are scheduled across threads.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::model::{Arrival, EnergyProfile, MultiRateModel};
use crate::online::ArrivalStats;

/// Independent RNG for one trial of an experiment.
pub fn trial_rng(base_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream);
    rng
}

fn poisson_count<G: Rng + ?Sized>(mean: f64, rng: &mut G) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::InvalidParameter { name: "poisson_mean", reason: e.to_string() })?;
    Ok(d.sample(rng) as usize)
}

/// Compound-Poisson arrivals on `(0, T)`: a Poisson(`lambda_e T`) number of
/// arrivals at uniform times, each `Uniform(0, 2 E_bar)` joules.
/// Draws landing on the same instant are merged.
pub fn gen_compound_poisson<G: Rng + ?Sized>(
    stats: &ArrivalStats,
    horizon: f64,
    initial_energy: f64,
    rng: &mut G,
) -> Result<EnergyProfile> {
    positive("horizon", horizon)?;
    non_negative("initial_energy", initial_energy)?;
    let n = poisson_count(stats.rate() * horizon, rng)?;
    let mut arrivals: Vec<Arrival> = Vec::with_capacity(n);
    for _ in 0..n {
        let time = loop {
            let u: f64 = Open01.sample(rng);
            let t = u * horizon;
            if t > 0.0 && t < horizon {
                break t;
            }
        };
        let amount = loop {
            let u: f64 = Open01.sample(rng);
            let a = 2.0 * stats.mean_energy() * u;
            if a > 0.0 {
                break a;
            }
        };
        arrivals.push(Arrival::new(time, amount));
    }
    arrivals.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut merged: Vec<Arrival> = Vec::with_capacity(arrivals.len());
    for a in arrivals {
        match merged.last_mut() {
            Some(last) if last.time == a.time => last.amount += a.amount,
            _ => merged.push(a),
        }
    }
    EnergyProfile::new(initial_energy, &merged, horizon)
}

/// Circular cell with users dropped by a homogeneous Poisson point process
/// and distance-based path loss `c0 (r / r0)^-zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    /// Cell radius (m).
    pub radius: f64,
    /// Users per square metre.
    pub density: f64,
    /// Linear path gain at the reference distance.
    pub reference_gain: f64,
    /// Reference distance (m); closer users are clamped to it.
    pub reference_distance: f64,
    /// At least 2.
    pub path_loss_exponent: f64,
    /// Total downlink bandwidth (Hz), shared equally by the users.
    pub bandwidth: f64,
    /// Noise power spectral density (W/Hz).
    pub noise_density: f64,
    /// Linear SNR gap, at least 1.
    pub gap: f64,
    /// Constant circuit power of the base station (W).
    pub circuit_power: f64,
}

impl CellConfig {
    pub fn validate(&self) -> Result<()> {
        positive("radius", self.radius)?;
        positive("density", self.density)?;
        positive("reference_gain", self.reference_gain)?;
        positive("reference_distance", self.reference_distance)?;
        if !(self.path_loss_exponent >= 2.0) {
            return Err(Error::InvalidParameter { name: "path_loss_exponent", reason: "must be at least 2".into() });
        }
        positive("bandwidth", self.bandwidth)?;
        positive("noise_density", self.noise_density)?;
        if !(self.gap >= 1.0) {
            return Err(Error::InvalidParameter { name: "gap", reason: "must be at least 1".into() });
        }
        positive("circuit_power", self.circuit_power)?;
        Ok(())
    }

    pub fn mean_users(&self) -> f64 {
        self.density * std::f64::consts::PI * self.radius * self.radius
    }

    pub fn gain_at(&self, distance: f64) -> f64 {
        self.reference_gain * (distance.max(self.reference_distance) / self.reference_distance).powf(-self.path_loss_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub distance: f64,
    pub gain: f64,
}

pub fn gen_hppp_users<G: Rng + ?Sized>(cell: &CellConfig, rng: &mut G) -> Result<Vec<User>> {
    cell.validate()?;
    let n = poisson_count(cell.mean_users(), rng)?;
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let distance = cell.radius * u.sqrt();
            User { distance, gain: cell.gain_at(distance) }
        })
        .collect())
}

/// Splits the cell bandwidth equally among the users; `None` for an empty cell.
pub fn cell_to_multimodel(users: &[User], cell: &CellConfig) -> Result<Option<MultiRateModel>> {
    if users.is_empty() {
        return Ok(None);
    }
    let per_user = cell.bandwidth / users.len() as f64;
    MultiRateModel::new(per_user, cell.noise_density, cell.gap, users.iter().map(|u| u.gain).collect()).map(Some)
}
