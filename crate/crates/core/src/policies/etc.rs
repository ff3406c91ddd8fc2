//! Explore-then-commit: bid 0 to see every price, then bid the plug-in
//! optimum of the empirical CDF.

use crate::error::{check_unit, Result};
use crate::feedback::CensoredOutcome;
use crate::grid::GridSpec;
use crate::policies::BidPolicy;

/// `⌈T^{2/3}⌉`.
pub fn default_explore(horizon: usize) -> usize {
    let t2 = (horizon as u128) * (horizon as u128);
    let mut n = (horizon as f64).powf(2.0 / 3.0) as u128;
    while n * n * n < t2 {
        n += 1;
    }
    while n > 0 && (n - 1).pow(3) >= t2 {
        n -= 1;
    }
    n as usize
}

#[derive(Clone, Debug)]
pub struct ExploreThenCommit {
    grid: GridSpec,
    explore: usize,
    prices: Vec<f64>,
    /// `Ĝ(b^i)` once exploration ends.
    plug_in: Option<Vec<f64>>,
    round: usize,
}

impl ExploreThenCommit {
    /// Commit on the offset grid of size `k`.
    pub fn new(horizon: usize, k: usize, explore: Option<usize>) -> Result<Self> {
        let grid = GridSpec::offset(k)?;
        let explore = explore.unwrap_or_else(|| default_explore(horizon));
        Ok(Self { grid, explore, prices: Vec::with_capacity(explore), plug_in: None, round: 0 })
    }

    pub fn explore_rounds(&self) -> usize {
        self.explore
    }

    /// Commit directly on a given CDF table over the grid.
    pub fn with_cdf(k: usize, cdf: Vec<f64>) -> Result<Self> {
        let mut p = Self::new(1, k, Some(0))?;
        p.plug_in = Some(cdf);
        Ok(p)
    }

    fn freeze(&mut self) {
        let mut sorted = std::mem::take(&mut self.prices);
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len().max(1) as f64;
        let table = self
            .grid
            .points()
            .iter()
            .map(|&b| sorted.partition_point(|&m| m <= b) as f64 / n)
            .collect();
        self.plug_in = Some(table);
    }
}

impl BidPolicy for ExploreThenCommit {
    fn name(&self) -> &'static str {
        "etc"
    }

    fn bid(&mut self, value: f64) -> Result<f64> {
        check_unit("value", value)?;
        if self.round < self.explore {
            return Ok(0.0);
        }
        if self.plug_in.is_none() {
            self.freeze();
        }
        let table = self.plug_in.as_ref().expect("frozen above");
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &g) in table.iter().enumerate() {
            let r = (value - self.grid.point(i)) * g;
            if r >= best.1 {
                best = (i, r);
            }
        }
        Ok(self.grid.point(best.0))
    }

    fn observe(&mut self, outcome: &CensoredOutcome) -> Result<()> {
        if self.round < self.explore {
            // A zero bid wins only against m = 0.
            self.prices.push(outcome.revealed().unwrap_or(0.0));
        }
        self.round += 1;
        Ok(())
    }

    fn bid_points(&self) -> Vec<f64> {
        self.grid.points()
    }
}
