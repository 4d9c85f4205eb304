//! Energy-efficiency-maximizing transmit power and the single-epoch closed form.
//!
//! `R(P) / (P + alpha)` is concave-over-linear, hence quasi-concave, with a
//! unique interior maximizer `p_ee` whenever `alpha > 0`. Its derivative has
//! the sign of `g(P) = R'(P) (P + alpha) - R(P)`, which is positive below
//! `p_ee` and negative above, so `p_ee` is located by bisection on that sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CircuitModel, RateFunction, RateModel};

const INITIAL_LO: f64 = 1e-9;
const INITIAL_HI: f64 = 1.0;
const MAX_DOUBLINGS: u32 = 40;
/// Bracket width at termination never exceeds this (W).
pub const P_EE_TOL: f64 = 1e-7;
const RELATIVE_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 400;

/// The EE-maximizing power and its bits-per-joule value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EePower {
    pub p_ee: f64,
    /// `R(p_ee) / (p_ee + alpha)` in bits/J.
    pub ee_value: f64,
    pub iterations: usize,
    /// Bracket width at termination (W).
    pub residual: f64,
}

/// Bisection on the sign of the EE-ratio derivative for any rate function.
pub fn ee_maximizer<R: RateFunction + ?Sized>(rate: &R, circuit: &CircuitModel) -> Result<EePower> {
    let alpha = circuit.alpha();
    if alpha <= 0.0 {
        return Err(Error::NoInteriorMaximizer);
    }
    let slope = |p: f64| rate.derivative(p) * (p + alpha) - rate.bits_per_second(p);

    let mut lo = INITIAL_LO;
    let mut shrink = 0;
    while slope(lo) <= 0.0 {
        lo *= 0.5;
        shrink += 1;
        if shrink > MAX_DOUBLINGS {
            return Err(Error::BracketNotFound);
        }
    }
    let mut hi = INITIAL_HI.max(lo * 2.0);
    let mut grow = 0;
    while slope(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > MAX_DOUBLINGS {
            return Err(Error::BracketNotFound);
        }
    }

    let mut iterations = 0;
    while hi - lo > P_EE_TOL.min(RELATIVE_TOL * hi) && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let p_ee = 0.5 * (lo + hi);
    Ok(EePower { p_ee, ee_value: rate.bits_per_second(p_ee) / (p_ee + alpha), iterations, residual: hi - lo })
}

/// EE-maximizing power of a single AWGN channel.
pub fn compute_p_ee(model: &RateModel, circuit: &CircuitModel) -> Result<EePower> {
    ee_maximizer(model, circuit)
}

/// Optimal power and on-time for a block with a single epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleEpochSolution {
    /// `None` when there is no energy to spend.
    pub power: Option<f64>,
    pub on_time: f64,
}

/// Closed form for one epoch given `p_ee`: `P* = max(p_ee, E_0/T - alpha)`,
/// on for `E_0 / (P* + alpha)` seconds.
pub fn single_epoch_with(e0: f64, horizon: f64, p_ee: f64, circuit: &CircuitModel) -> SingleEpochSolution {
    if e0 <= 0.0 {
        return SingleEpochSolution { power: None, on_time: 0.0 };
    }
    let alpha = circuit.alpha();
    let continuous = e0 / horizon - alpha;
    if continuous >= p_ee {
        SingleEpochSolution { power: Some(continuous), on_time: horizon }
    } else {
        SingleEpochSolution { power: Some(p_ee), on_time: (e0 / (p_ee + alpha)).min(horizon) }
    }
}

pub fn solve_single_epoch(
    e0: f64,
    horizon: f64,
    model: &RateModel,
    circuit: &CircuitModel,
) -> Result<SingleEpochSolution> {
    crate::error::non_negative("e0", e0)?;
    crate::error::positive("horizon", horizon)?;
    if e0 == 0.0 {
        return Ok(SingleEpochSolution { power: None, on_time: 0.0 });
    }
    let ee = compute_p_ee(model, circuit)?;
    Ok(single_epoch_with(e0, horizon, ee.p_ee, circuit))
}
