//! Shared fixtures for the benchmarks.

use ehtx::{Arrival, CircuitModel, EnergyProfile, MultiRateModel, RateModel};

pub fn example_channel() -> RateModel {
    RateModel::new(1e6, 1e-16, 1.0, 1e-8).expect("valid channel")
}

pub fn example_circuit() -> CircuitModel {
    CircuitModel::new(0.1159).expect("valid circuit")
}

pub fn example_profile() -> EnergyProfile {
    let arrivals: Vec<Arrival> = [(4.0, 0.5), (6.0, 0.5), (11.0, 1.0), (14.0, 0.5), (16.0, 0.75), (18.0, 0.5)]
        .iter()
        .map(|&(t, e)| Arrival::new(t, e))
        .collect();
    EnergyProfile::new(0.5, &arrivals, 20.0).expect("valid profile")
}

/// `k` channels with gains spread over two decades.
pub fn spread_channels(k: usize) -> MultiRateModel {
    let gains = (0..k).map(|i| 1e-8 * 10f64.powf(-2.0 * i as f64 / k.max(1) as f64)).collect();
    MultiRateModel::new(1e6 / k as f64, 1e-16, 1.0, gains).expect("valid model")
}
