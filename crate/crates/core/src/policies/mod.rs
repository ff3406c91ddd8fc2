//! Bidding policies behind a common round-based interface.

pub mod auction_mse;
pub mod etc;
pub mod is_ucb;
pub mod ml_is_ucb;
pub mod mse;
pub mod suffix;

use serde::{Deserialize, Serialize};

use crate::distribution::BidDistribution;
use crate::error::{check_unit, Error, Result};
use crate::feedback::CensoredOutcome;
use crate::grid::{ceil_log2, ceil_sqrt};
use crate::oracle::GridOracle;

pub use auction_mse::MseBidder;
pub use etc::ExploreThenCommit;
pub use is_ucb::IsUcb;
pub use ml_is_ucb::MlIsUcb;
pub use mse::{EliminationCheck, MseConfig, MseState};

/// One bid per round, then the censored outcome of that bid.
///
/// `bid` and `observe` alternate strictly. A policy never sees `m_t` on a
/// win and never sees anything about future rounds.
pub trait BidPolicy: Send {
    fn name(&self) -> &'static str;
    fn bid(&mut self, value: f64) -> Result<f64>;
    fn observe(&mut self, outcome: &CensoredOutcome) -> Result<()>;
    /// Every bid the policy can ever place.
    fn bid_points(&self) -> Vec<f64>;
}

/// Bids the grid optimum of the true `G`. Regret reference only.
#[derive(Clone, Debug)]
pub struct OracleBidder {
    oracle: GridOracle,
}

impl OracleBidder {
    pub fn new(points: Vec<f64>, dist: &BidDistribution) -> Self {
        Self { oracle: GridOracle::new(points, dist) }
    }
}

impl BidPolicy for OracleBidder {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn bid(&mut self, value: f64) -> Result<f64> {
        check_unit("value", value)?;
        Ok(self.oracle.best(value).bid)
    }

    fn observe(&mut self, _outcome: &CensoredOutcome) -> Result<()> {
        Ok(())
    }

    fn bid_points(&self) -> Vec<f64> {
        self.oracle.points().to_vec()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PolicyKind {
    Mse,
    IsUcb,
    MlIsUcb,
    Etc,
    Oracle,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Mse => "mse",
            PolicyKind::IsUcb => "is_ucb",
            PolicyKind::MlIsUcb => "ml_is_ucb",
            PolicyKind::Etc => "etc",
            PolicyKind::Oracle => "oracle",
        }
    }
}

/// Policy construction record. Unset sizes take each algorithm's default
/// for the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub gamma: f64,
    /// Value levels `M` (MSE only).
    pub contexts: Option<usize>,
    /// Bid grid size `K`.
    pub grid_size: Option<usize>,
    /// Number of levels `L` (ML-IS-UCB only).
    pub levels: Option<usize>,
    /// Exploration length (ETC only).
    pub explore: Option<usize>,
    #[serde(default, skip_serializing_if = "is_default_check")]
    pub certified_elimination: Option<bool>,
}

fn is_default_check(v: &Option<bool>) -> bool {
    v.is_none()
}

pub const DEFAULT_GAMMA: f64 = 3.0;

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            gamma: DEFAULT_GAMMA,
            contexts: None,
            grid_size: None,
            levels: None,
            explore: None,
            certified_elimination: None,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// `K`, defaulting to `⌈√T⌉`.
    pub fn grid_size_for(&self, horizon: usize) -> usize {
        self.grid_size.unwrap_or_else(|| ceil_sqrt(horizon))
    }

    /// Build the policy for horizon `T`. `dist` and `reference` are read only
    /// by the oracle bidder.
    pub fn build(&self, horizon: usize, dist: &BidDistribution, reference: &[f64]) -> Result<Box<dyn BidPolicy>> {
        if horizon == 0 {
            return Err(Error::InvalidConfig("T must be positive".into()));
        }
        let k = self.grid_size_for(horizon);
        Ok(match self.kind {
            PolicyKind::Mse => {
                let m = self.contexts.unwrap_or(k);
                let mut cfg = MseConfig::new(m, k, horizon, self.gamma)?;
                if self.certified_elimination == Some(false) {
                    cfg = cfg.with_check(EliminationCheck::EveryRound);
                }
                Box::new(MseBidder::new(cfg)?)
            }
            PolicyKind::IsUcb => Box::new(IsUcb::new(k, self.gamma)?),
            PolicyKind::MlIsUcb => {
                let levels = self.levels.unwrap_or_else(|| ceil_log2(horizon));
                Box::new(MlIsUcb::new(horizon, k, levels, self.gamma)?)
            }
            PolicyKind::Etc => Box::new(ExploreThenCommit::new(horizon, k, self.explore)?),
            PolicyKind::Oracle => Box::new(OracleBidder::new(reference.to_vec(), dist)),
        })
    }
}
