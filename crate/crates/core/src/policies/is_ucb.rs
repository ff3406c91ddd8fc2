//! Interval-splitting UCB on the offset grid `b^i = (i-1)/K`.
//!
//! `p̂_i` estimates `P(b^i < m <= b^{i+1})` from the rounds that bid at or
//! below `b^i`, the only rounds where membership of `m` in that interval is
//! known. The bid maximizes
//! `(v - b^i)·[1 - Σ_{j>=i} p̂_j + γ(√(Σ_{j>=i} p̂_j/n_j) + 1/n_i)]`,
//! unclipped, ties to the smallest bid.

use crate::error::{check_unit, Result};
use crate::feedback::CensoredOutcome;
use crate::grid::GridSpec;
use crate::policies::BidPolicy;

#[derive(Clone, Debug)]
pub struct IsUcb {
    grid: GridSpec,
    gamma: f64,
    probs: Vec<f64>,
    counts: Vec<u64>,
    round: usize,
    pending: Option<usize>,
}

impl IsUcb {
    pub fn new(k: usize, gamma: f64) -> Result<Self> {
        let grid = GridSpec::offset(k)?;
        Ok(Self { grid, gamma, probs: vec![0.0; k], counts: vec![0; k], round: 0, pending: None })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The UCB index of every grid point for value `v`.
    pub fn indices(&self, value: f64) -> Vec<f64> {
        let k = self.grid.len();
        let mut out = vec![0.0; k];
        let (mut tail, mut tail_var) = (0.0, 0.0);
        for i in (0..k).rev() {
            let n = self.counts[i] as f64;
            tail += self.probs[i];
            tail_var += self.probs[i] / n;
            let bracket = 1.0 - tail + self.gamma * (tail_var.sqrt() + 1.0 / n);
            out[i] = (value - self.grid.point(i)) * bracket;
        }
        out
    }
}

impl BidPolicy for IsUcb {
    fn name(&self) -> &'static str {
        "is_ucb"
    }

    fn bid(&mut self, value: f64) -> Result<f64> {
        check_unit("value", value)?;
        let i = if self.round == 0 {
            0
        } else {
            let idx = self.indices(value);
            let mut best = 0;
            for (i, &x) in idx.iter().enumerate().skip(1) {
                if x > idx[best] {
                    best = i;
                }
            }
            best
        };
        self.pending = Some(i);
        Ok(self.grid.point(i))
    }

    fn observe(&mut self, outcome: &CensoredOutcome) -> Result<()> {
        let played = self.pending.take().expect("observe called without a preceding bid");
        let hit = outcome.revealed().and_then(|m| self.grid.interval_of(m));
        for i in played..self.grid.len() {
            let n = self.counts[i] as f64;
            let x = if hit == Some(i) { 1.0 } else { 0.0 };
            self.probs[i] = n / (n + 1.0) * self.probs[i] + x / (n + 1.0);
            self.counts[i] += 1;
        }
        self.round += 1;
        Ok(())
    }

    fn bid_points(&self) -> Vec<f64> {
        self.grid.points()
    }
}
