//! Rewards of a first-price auction and the value quantization used by the
//! successive-elimination policy.

use crate::distribution::BidDistribution;
use crate::error::{check_unit, Result};

/// Realized reward `(v - b)·1(b >= m)`. A tie `b = m` is a win.
pub fn instantaneous_reward(value: f64, bid: f64, others: f64) -> Result<f64> {
    check_unit("value", value)?;
    check_unit("bid", bid)?;
    check_unit("m", others)?;
    Ok(if bid >= others { value - bid } else { 0.0 })
}

/// A validated `(v, b)` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardQuery {
    value: f64,
    bid: f64,
}

impl RewardQuery {
    pub fn new(value: f64, bid: f64) -> Result<Self> {
        check_unit("value", value)?;
        check_unit("bid", bid)?;
        Ok(Self { value, bid })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn bid(&self) -> f64 {
        self.bid
    }
}

/// `R(v, b) = (v - b)·G(b)`.
pub fn expected_reward(query: RewardQuery, dist: &BidDistribution) -> f64 {
    (query.value - query.bid) * dist.cdf(query.bid)
}

/// One-based index `i` of the smallest `i/M >= v`.
pub fn quantize_index(value: f64, m: usize) -> usize {
    debug_assert!(m > 0);
    let scaled = value * m as f64;
    let nearest = scaled.round();
    // Values already on the grid must not be pushed up by rounding noise.
    let i = if (scaled - nearest).abs() <= 1e-9 * m as f64 {
        nearest
    } else {
        scaled.ceil()
    };
    (i as usize).clamp(1, m)
}

/// Clip `v` up to the value grid `{1/M, ..., 1}`.
pub fn quantize_value(value: f64, m: usize) -> Result<f64> {
    check_unit("value", value)?;
    Ok(quantize_index(value, m) as f64 / m as f64)
}

/// Additive regret from running a quantized policy on continuous values:
/// `(2/M + 1/K)·T`.
pub fn quantization_regret_gap(m: usize, k: usize, horizon: usize) -> f64 {
    (2.0 / m as f64 + 1.0 / k as f64) * horizon as f64
}
