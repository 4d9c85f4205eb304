//! Domain types shared by every solver: energy arrival profiles and their
//! epochs, the rate and circuit-power models, and piecewise-constant power
//! schedules together with throughput/feasibility evaluation.
//!
//! Units are fixed throughout: W, J, s, Hz, bits.

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::numeric::{self, CompensatedSum};

/// Absolute tolerance (J) for the cumulative energy-harvesting constraint.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// One energy arrival: `amount` joules become available at `time` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: f64,
    pub amount: f64,
}

impl Arrival {
    pub fn new(time: f64, amount: f64) -> Self {
        Self { time, amount }
    }
}

/// The interval `(start, end]` between two consecutive arrival instants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epoch {
    /// 1-based epoch index.
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub length: f64,
    /// Energy that arrives at `start` (the initial store for epoch 1).
    pub energy: f64,
}

/// Validated energy arrival profile over one scheduling block `(0, horizon]`.
///
/// Internally the profile holds the boundary instants `t_0 = 0 < t_1 < ... < t_N = T`
/// and the energies `E_0, ..., E_{N-1}`, where `E_0` is the initial store.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    boundaries: Vec<f64>,
    energies: Vec<f64>,
    lengths: Vec<f64>,
    energy_prefix: Vec<f64>,
}

impl EnergyProfile {
    /// Validates arrivals against the horizon and derives the epochs.
    pub fn new(initial_energy: f64, arrivals: &[Arrival], horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidHorizon(horizon));
        }
        if !(initial_energy.is_finite() && initial_energy >= 0.0) {
            return Err(Error::NegativeInitialEnergy(initial_energy));
        }
        let mut boundaries = Vec::with_capacity(arrivals.len() + 2);
        let mut energies = Vec::with_capacity(arrivals.len() + 1);
        boundaries.push(0.0);
        energies.push(initial_energy);
        for (index, a) in arrivals.iter().enumerate() {
            if !(a.time.is_finite() && a.time > 0.0 && a.time < horizon) {
                return Err(Error::ArrivalOutsideHorizon { index, time: a.time, horizon });
            }
            let previous = *boundaries.last().unwrap();
            if index > 0 && a.time <= previous {
                return Err(Error::NonIncreasingArrival { index, time: a.time, previous });
            }
            if !(a.amount.is_finite() && a.amount > 0.0) {
                return Err(Error::NonPositiveArrival { index, amount: a.amount });
            }
            boundaries.push(a.time);
            energies.push(a.amount);
        }
        boundaries.push(horizon);
        let lengths: Vec<f64> = boundaries.windows(2).map(|w| w[1] - w[0]).collect();
        let energy_prefix = numeric::prefix_sums(&energies);
        Ok(Self { boundaries, energies, lengths, energy_prefix })
    }

    /// Profile with no arrivals after `t = 0`.
    pub fn single_epoch(initial_energy: f64, horizon: f64) -> Result<Self> {
        Self::new(initial_energy, &[], horizon)
    }

    pub fn horizon(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn initial_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Number of epochs `N` (one more than the number of arrivals).
    pub fn num_epochs(&self) -> usize {
        self.lengths.len()
    }

    /// `t_0, ..., t_N`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// `E_0, ..., E_{N-1}`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `L_1, ..., L_N`.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn arrivals(&self) -> Vec<Arrival> {
        self.boundaries[1..self.boundaries.len() - 1]
            .iter()
            .zip(&self.energies[1..])
            .map(|(&time, &amount)| Arrival { time, amount })
            .collect()
    }

    pub fn epochs(&self) -> impl Iterator<Item = Epoch> + '_ {
        (0..self.num_epochs()).map(move |i| Epoch {
            index: i + 1,
            start: self.boundaries[i],
            end: self.boundaries[i + 1],
            length: self.lengths[i],
            energy: self.energies[i],
        })
    }

    /// Energy harvested before `t_i`, i.e. `E_0 + ... + E_{i-1}`.
    pub fn harvested_before(&self, i: usize) -> f64 {
        self.energy_prefix[i]
    }

    pub fn total_energy(&self) -> f64 {
        self.energy_prefix[self.num_epochs()]
    }

    /// Average power `(E_s + ... + E_{i-1}) / (t_i - t_s)` of the window of
    /// epochs `s+1 ..= i`, for boundary indices `s < i`.
    pub fn window_average(&self, s: usize, i: usize) -> f64 {
        debug_assert!(s < i && i <= self.num_epochs());
        (self.energy_prefix[i] - self.energy_prefix[s]) / (self.boundaries[i] - self.boundaries[s])
    }

    /// Index `i` of the epoch containing `t`, 0-based (epoch `i+1` in 1-based terms).
    pub fn epoch_containing(&self, t: f64) -> usize {
        let k = self.boundaries[1..].partition_point(|&b| b < t);
        k.min(self.num_epochs() - 1)
    }
}

/// On-mode circuit power. The RF efficiency is fixed to 1 and the off-mode
/// power to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitModel {
    alpha: f64,
}

impl CircuitModel {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self { alpha: non_negative("alpha", alpha)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub const fn efficiency(&self) -> f64 {
        1.0
    }

    pub const fn off_power(&self) -> f64 {
        0.0
    }

    /// Total consumed power for a transmit power `p`.
    pub fn total_power(&self, p: f64) -> f64 {
        if p > 0.0 {
            p / self.efficiency() + self.alpha
        } else {
            self.off_power()
        }
    }
}

/// A scalar achievable-rate function `R(P)` in bits/s: non-negative with
/// `R(0) = 0`, strictly concave and increasing in `P`.
pub trait RateFunction: Sync {
    /// Rate at transmit power `power >= 0`. Callers guarantee the sign.
    fn bits_per_second(&self, power: f64) -> f64;

    /// `dR/dP`. The default is a central difference with step `1e-6 * max(P, 1e-6)`.
    fn derivative(&self, power: f64) -> f64 {
        let h = 1e-6 * power.max(1e-6);
        let lo = (power - h).max(0.0);
        let hi = power + h;
        (self.bits_per_second(hi) - self.bits_per_second(lo)) / (hi - lo)
    }
}

/// Single AWGN channel `R(P) = W log2(1 + h P / (Gamma W N_0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    bandwidth: f64,
    noise_density: f64,
    gap: f64,
    gain: f64,
}

impl RateModel {
    pub fn new(bandwidth: f64, noise_density: f64, gap: f64, gain: f64) -> Result<Self> {
        let gap = positive("gap", gap)?;
        if gap < 1.0 {
            return Err(Error::InvalidParameter { name: "gap", reason: format!("must be >= 1, got {gap}") });
        }
        Ok(Self {
            bandwidth: positive("bandwidth", bandwidth)?,
            noise_density: positive("noise_density", noise_density)?,
            gap,
            gain: positive("gain", gain)?,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn noise_density(&self) -> f64 {
        self.noise_density
    }
    pub fn gap(&self) -> f64 {
        self.gap
    }
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// SNR per transmitted watt, `h / (Gamma W N_0)`.
    pub fn snr_per_watt(&self) -> f64 {
        self.gain / (self.gap * self.bandwidth * self.noise_density)
    }

    /// Checked rate evaluation.
    pub fn rate(&self, power: f64) -> Result<f64> {
        if !(power >= 0.0) {
            return Err(Error::NegativePower(power));
        }
        Ok(self.bits_per_second(power))
    }
}

impl RateFunction for RateModel {
    fn bits_per_second(&self, power: f64) -> f64 {
        self.bandwidth * (self.snr_per_watt() * power).ln_1p() / std::f64::consts::LN_2
    }

    fn derivative(&self, power: f64) -> f64 {
        let c = self.snr_per_watt();
        self.bandwidth * c / ((1.0 + c * power) * std::f64::consts::LN_2)
    }
}

/// `K` parallel AWGN channels of equal bandwidth with sum rate
/// `W sum_k log2(1 + h_k Q_k / (Gamma W N_0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiRateModel {
    bandwidth: f64,
    noise_density: f64,
    gap: f64,
    gains: Vec<f64>,
}

impl MultiRateModel {
    pub fn new(bandwidth: f64, noise_density: f64, gap: f64, gains: Vec<f64>) -> Result<Self> {
        let gap = positive("gap", gap)?;
        if gap < 1.0 {
            return Err(Error::InvalidParameter { name: "gap", reason: format!("must be >= 1, got {gap}") });
        }
        if gains.is_empty() {
            return Err(Error::InvalidParameter { name: "gains", reason: "need at least one channel".into() });
        }
        for &g in &gains {
            non_negative("gains", g)?;
        }
        if gains.iter().all(|&g| g == 0.0) {
            return Err(Error::InvalidParameter { name: "gains", reason: "at least one gain must be positive".into() });
        }
        Ok(Self {
            bandwidth: positive("bandwidth", bandwidth)?,
            noise_density: positive("noise_density", noise_density)?,
            gap,
            gains,
        })
    }

    pub fn from_single(model: &RateModel) -> Self {
        Self {
            bandwidth: model.bandwidth,
            noise_density: model.noise_density,
            gap: model.gap,
            gains: vec![model.gain],
        }
    }

    pub fn num_channels(&self) -> usize {
        self.gains.len()
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn noise_density(&self) -> f64 {
        self.noise_density
    }
    pub fn gap(&self) -> f64 {
        self.gap
    }
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Noise floor `Gamma W N_0 / h_k` in watts; `None` for channels with zero gain.
    pub fn noise_floor(&self, k: usize) -> Option<f64> {
        let h = self.gains[k];
        (h > 0.0).then(|| self.gap * self.bandwidth * self.noise_density / h)
    }

    /// Rate of channel `k` at power `q`.
    pub fn channel_rate(&self, k: usize, q: f64) -> f64 {
        match self.noise_floor(k) {
            Some(floor) if q > 0.0 => self.bandwidth * (q / floor).ln_1p() / std::f64::consts::LN_2,
            _ => 0.0,
        }
    }

    /// Sum rate of an allocation.
    pub fn sum_rate(&self, powers: &[f64]) -> f64 {
        assert_eq!(powers.len(), self.gains.len(), "one power per channel");
        powers.iter().enumerate().map(|(k, &q)| self.channel_rate(k, q)).collect::<CompensatedSum>().value()
    }
}

/// One constant-power piece `(start, end]` of a scalar schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub power: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_on(&self) -> bool {
        self.power > 0.0
    }
}

fn check_tiling<'a>(horizon: f64, spans: impl Iterator<Item = (f64, f64)> + 'a) -> Result<()> {
    let mut expected = 0.0;
    let mut count = 0;
    for (i, (start, end)) in spans.enumerate() {
        if start != expected {
            return Err(Error::InvalidSchedule(format!("segment {i} starts at {start}, expected {expected}")));
        }
        if !(end > start) {
            return Err(Error::InvalidSchedule(format!("segment {i} is empty or reversed ({start}, {end}]")));
        }
        expected = end;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidSchedule("no segments".into()));
    }
    if expected != horizon {
        return Err(Error::InvalidSchedule(format!("last segment ends at {expected}, horizon is {horizon}")));
    }
    Ok(())
}

/// Piecewise-constant transmit power over `(0, horizon]`. Power 0 means the
/// transmitter is off; every off interval is an explicit segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSchedule {
    horizon: f64,
    segments: Vec<Segment>,
}

impl PowerSchedule {
    pub fn new(horizon: f64, segments: Vec<Segment>) -> Result<Self> {
        check_tiling(horizon, segments.iter().map(|s| (s.start, s.end)))?;
        if let Some(s) = segments.iter().find(|s| !(s.power >= 0.0) || !s.power.is_finite()) {
            return Err(Error::InvalidSchedule(format!("invalid power {} on ({}, {}]", s.power, s.start, s.end)));
        }
        Ok(Self { horizon, segments })
    }

    /// Transmitter off for the whole horizon.
    pub fn all_off(horizon: f64) -> Self {
        Self { horizon, segments: vec![Segment { start: 0.0, end: horizon, power: 0.0 }] }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Power on the segment containing `t`, using the `(start, end]` convention
    /// (`t = 0` maps to the first segment).
    pub fn power_at(&self, t: f64) -> f64 {
        let k = self.segments.partition_point(|s| s.end < t);
        self.segments[k.min(self.segments.len() - 1)].power
    }

    /// Splits segment `k` at its midpoint without changing the power trajectory.
    pub fn split_segment(&self, k: usize) -> Self {
        let s = self.segments[k];
        let mid = 0.5 * (s.start + s.end);
        let mut segments = self.segments.clone();
        segments.splice(k..=k, [Segment { end: mid, ..s }, Segment { start: mid, ..s }]);
        Self { horizon: self.horizon, segments }
    }

    /// Energy consumed (including circuit power) over `(0, t]`.
    pub fn energy_consumed_until(&self, t: f64, circuit: &CircuitModel) -> f64 {
        let mut acc = CompensatedSum::new();
        for s in &self.segments {
            if s.start >= t {
                break;
            }
            let overlap = s.end.min(t) - s.start;
            acc.add(circuit.total_power(s.power) * overlap);
        }
        acc.value()
    }

    pub fn total_energy(&self, circuit: &CircuitModel) -> f64 {
        self.segments.iter().map(|s| circuit.total_power(s.power) * s.duration()).collect::<CompensatedSum>().value()
    }

    /// Throughput in bits under `rate`.
    pub fn throughput<R: RateFunction + ?Sized>(&self, rate: &R) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.is_on())
            .map(|s| s.duration() * rate.bits_per_second(s.power))
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Incrementally assembles a schedule, dropping empty pieces.
#[derive(Debug, Default)]
pub(crate) struct ScheduleBuilder {
    segments: Vec<Segment>,
}

impl ScheduleBuilder {
    pub fn push(&mut self, start: f64, end: f64, power: f64) {
        if end > start {
            self.segments.push(Segment { start, end, power });
        }
    }

    pub fn finish(self, horizon: f64) -> PowerSchedule {
        PowerSchedule::new(horizon, self.segments).expect("builder produced a tiling schedule")
    }
}

/// One piece of a vector (per-channel) schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSegment {
    pub start: f64,
    pub end: f64,
    pub powers: Vec<f64>,
}

impl VectorSegment {
    pub fn total(&self) -> f64 {
        numeric::sum(&self.powers)
    }
}

/// Per-channel power trajectory `Q(t)` over `(0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSchedule {
    horizon: f64,
    channels: usize,
    segments: Vec<VectorSegment>,
}

impl VectorSchedule {
    pub fn new(horizon: f64, channels: usize, segments: Vec<VectorSegment>) -> Result<Self> {
        check_tiling(horizon, segments.iter().map(|s| (s.start, s.end)))?;
        for s in &segments {
            if s.powers.len() != channels {
                return Err(Error::InvalidSchedule(format!("segment has {} powers, expected {channels}", s.powers.len())));
            }
            if s.powers.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) {
                return Err(Error::InvalidSchedule("negative or non-finite channel power".into()));
            }
        }
        Ok(Self { horizon, channels, segments })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn segments(&self) -> &[VectorSegment] {
        &self.segments
    }

    /// The scalar schedule of total transmit power per segment.
    pub fn total_schedule(&self) -> PowerSchedule {
        let segments =
            self.segments.iter().map(|s| Segment { start: s.start, end: s.end, power: s.total() }).collect();
        PowerSchedule { horizon: self.horizon, segments }
    }

    pub fn throughput(&self, model: &MultiRateModel) -> f64 {
        self.segments
            .iter()
            .map(|s| (s.end - s.start) * model.sum_rate(&s.powers))
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Result of checking a schedule against a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleEvaluation {
    pub throughput: f64,
    pub feasible: bool,
    /// Worst exceedance of consumed over harvested energy at an arrival instant (J), 0 if none.
    pub max_violation: f64,
}

/// Throughput of `schedule` and whether it respects the cumulative
/// energy-harvesting constraint at every `t_i`, `i = 1..=N`.
pub fn evaluate_schedule<R: RateFunction + ?Sized>(
    schedule: &PowerSchedule,
    rate: &R,
    circuit: &CircuitModel,
    profile: &EnergyProfile,
) -> Result<ScheduleEvaluation> {
    let (t_s, t_p) = (schedule.horizon(), profile.horizon());
    if (t_s - t_p).abs() > 1e-12 * t_p {
        return Err(Error::HorizonMismatch { schedule: t_s, profile: t_p });
    }
    let mut max_violation = 0.0f64;
    for i in 1..=profile.num_epochs() {
        let consumed = schedule.energy_consumed_until(profile.boundaries()[i], circuit);
        max_violation = max_violation.max(consumed - profile.harvested_before(i));
    }
    Ok(ScheduleEvaluation {
        throughput: schedule.throughput(rate),
        feasible: max_violation <= FEASIBILITY_TOL,
        max_violation: max_violation.max(0.0),
    })
}
