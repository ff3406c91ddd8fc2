//! Perishable inventory with lost sales and censored demand.
//!
//! Ordering `a` against demand `d` sells `min(a, d)`. Only that quantity is
//! seen, yet the reward `p·min(a, d) - h·(a - d)^+` of every smaller order
//! `a' <= a` follows from it, since `min(a', d) = min(a', min(a, d))`. This
//! is MSE with one context and the reveal direction flipped: the policy
//! orders the largest surviving level.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distribution::BidDistribution;
use crate::error::{check_unit, Error, Result};
use crate::grid::{ceil_sqrt, GridSpec};
use crate::policies::mse::{EliminationCheck, MonotoneStats, MseConfig, MseState};

/// `p·min(a, d) - h·(a - d)^+`.
pub fn inventory_reward(level: f64, demand: f64, price: f64, overage: f64) -> Result<f64> {
    check_unit("order level", level)?;
    check_unit("demand", demand)?;
    Ok(price * level.min(demand) - overage * (level - demand).max(0.0))
}

/// Reward of a smaller order `a <= a_t` rebuilt from the sales `min(a_t, d)`.
pub fn downward_reveal(ordered: f64, sold: f64, level: f64, price: f64, overage: f64) -> Result<f64> {
    check_unit("order level", ordered)?;
    check_unit("sales", sold)?;
    check_unit("order level", level)?;
    if sold > ordered {
        return Err(Error::InvalidConfig(format!("sales {sold} exceed the order {ordered}")));
    }
    if level > ordered {
        return Err(Error::InvalidConfig(format!(
            "level {level} above the order {ordered} is not revealed"
        )));
    }
    Ok(price * level.min(sold) - overage * (level - sold).max(0.0))
}

/// `E[p·min(a, d) - h·(a - d)^+] = p·a - (p + h)·∫_0^a F`.
pub fn expected_inventory_reward(level: f64, demand: &BidDistribution, price: f64, overage: f64) -> f64 {
    price * level - (price + overage) * demand.integrated_cdf(level)
}

/// Expected cost `h·E(a - d)^+ + p·E(d - a)^+`. Differs from the negated
/// reward by `p·E[d]`, which does not depend on `a`.
pub fn expected_inventory_cost(level: f64, demand: &BidDistribution, price: f64, overage: f64) -> f64 {
    let below = demand.integrated_cdf(level);
    let mean_demand = 1.0 - demand.integrated_cdf(1.0);
    // E(d - a)^+ = E d - a + E(a - d)^+.
    overage * below + price * (mean_demand - level + below)
}

#[derive(Clone, Debug)]
pub struct InventoryEnv {
    demand: BidDistribution,
    price: f64,
    overage: f64,
    rng: ChaCha8Rng,
}

impl InventoryEnv {
    pub fn new(demand: BidDistribution, price: f64, overage: f64, seed: u64) -> Result<Self> {
        if !(price >= 0.0 && overage >= 0.0 && price.is_finite() && overage.is_finite()) {
            return Err(Error::InvalidConfig("price and overage cost must be finite and >= 0".into()));
        }
        Ok(Self { demand, price, overage, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn demand(&self) -> &BidDistribution {
        &self.demand
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn overage(&self) -> f64 {
        self.overage
    }

    /// Sales `min(a, d)` for the policy, plus the true demand.
    pub fn step(&mut self, level: f64) -> Result<(f64, f64)> {
        check_unit("order level", level)?;
        let d = self.demand.sample(&mut self.rng);
        Ok((level.min(d), d))
    }

    pub fn sample_demand<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.demand.sample(rng)
    }
}

/// Running means indexed from the largest level down, so that the MSE
/// engine's "smallest surviving index" is the largest surviving level.
#[derive(Clone, Debug)]
pub struct InventoryStats {
    levels: GridSpec,
    price: f64,
    overage: f64,
    means: Vec<f64>,
    counts: Vec<u64>,
}

impl InventoryStats {
    fn level(&self, index: usize) -> f64 {
        self.levels.point(self.levels.len() - 1 - index)
    }

    fn absorb(&mut self, played: usize, sold: f64) {
        for j in played..self.levels.len() {
            let a = self.level(j);
            let r = self.price * a.min(sold) - self.overage * (a - sold).max(0.0);
            let n = self.counts[j] as f64;
            self.means[j] = n / (n + 1.0) * self.means[j] + r / (n + 1.0);
            self.counts[j] += 1;
        }
    }
}

impl MonotoneStats for InventoryStats {
    fn contexts(&self) -> usize {
        1
    }
    fn actions(&self) -> usize {
        self.levels.len()
    }
    fn count(&self, _context: usize, action: usize) -> u64 {
        self.counts[action]
    }
    fn mean(&mut self, _context: usize, action: usize) -> f64 {
        self.means[action]
    }
    fn span(&self, _context: usize, action: usize) -> f64 {
        (self.price + self.overage) * self.level(action)
    }
}

#[derive(Clone, Debug)]
pub struct InventoryMse {
    state: MseState<InventoryStats>,
    pending: Option<usize>,
}

impl InventoryMse {
    /// Levels `{1/K, ..., 1}` with `K = ⌈√T⌉` unless given; band
    /// `γ·ln T·(n_a^{-1/2} + n_max^{-1/2})`.
    pub fn new(horizon: usize, levels: Option<usize>, gamma: f64, price: f64, overage: f64) -> Result<Self> {
        Self::with_check(horizon, levels, gamma, price, overage, EliminationCheck::Certified)
    }

    pub fn with_check(
        horizon: usize,
        levels: Option<usize>,
        gamma: f64,
        price: f64,
        overage: f64,
        check: EliminationCheck,
    ) -> Result<Self> {
        let k = levels.unwrap_or_else(|| ceil_sqrt(horizon));
        let grid = GridSpec::unit(k)?;
        let cfg = MseConfig::new(1, k, horizon, gamma)?
            .with_log_term((horizon as f64).ln())
            .with_check(check);
        let stats = InventoryStats { levels: grid, price, overage, means: vec![0.0; k], counts: vec![0; k] };
        Ok(Self { state: MseState::new(cfg, stats)?, pending: None })
    }

    pub fn levels(&self) -> &GridSpec {
        &self.state.stats().levels
    }

    pub fn state(&self) -> &MseState<InventoryStats> {
        &self.state
    }

    /// `max A`.
    pub fn order(&mut self) -> Result<f64> {
        let j = self.state.choose(0)?;
        self.pending = Some(j);
        Ok(self.state.stats().level(j))
    }

    pub fn observe(&mut self, sold: f64) -> Result<()> {
        let j = self.pending.take().expect("observe called without a preceding order");
        check_unit("sales", sold)?;
        self.state.stats_mut().absorb(j, sold);
        self.state.after_update();
        Ok(())
    }

    /// Surviving levels, ascending.
    pub fn surviving(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.state.active_set(0).into_iter().map(|j| self.state.stats().level(j)).collect();
        out.reverse();
        out
    }

    /// Surviving level with the largest empirical mean; ties go to the larger
    /// count, then the larger level.
    pub fn best_level(&self) -> f64 {
        let stats = self.state.stats();
        let mut best: Option<usize> = None;
        for j in self.state.active_set(0) {
            best = match best {
                None => Some(j),
                Some(b) => {
                    let better = stats.means[j] > stats.means[b]
                        || (stats.means[j] == stats.means[b] && stats.counts[j] > stats.counts[b]);
                    Some(if better { j } else { b })
                }
            };
        }
        stats.level(best.expect("active set is never empty"))
    }
}
