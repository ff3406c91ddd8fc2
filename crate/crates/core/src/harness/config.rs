use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::distribution::{DistributionSpec, TwoPointBranch};
use crate::environments::ValueSchedule;
use crate::error::{Error, Result};
use crate::grid::{ceil_cbrt, ceil_log2, ceil_sqrt};
use crate::policies::{PolicyConfig, PolicyKind, DEFAULT_GAMMA};

/// What one replication runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// A bidding policy against iid prices from `G`.
    Auction { policy: PolicyConfig, prices: DistributionSpec, values: ValueSchedule },
    /// A bidding policy with `v ≡ 1` on both two-point branches,
    /// `Δ = 1/(4√T)`; the trace is the average of the two regrets.
    TwoPoint { policy: PolicyConfig },
    /// MSE on the Bernoulli hard instance with decreasing block contexts.
    /// `M = ⌈T^{1/3}⌉` and `K = 2M` unless given; ε is uniform per
    /// replication unless fixed.
    LowerBound {
        gamma: f64,
        contexts: Option<usize>,
        actions: Option<usize>,
        signs: Option<Vec<i8>>,
    },
    /// Inventory MSE against iid demand.
    Inventory { demand: DistributionSpec, price: f64, overage: f64, gamma: f64, levels: Option<usize> },
}

impl Experiment {
    pub fn label(&self) -> String {
        match self {
            Experiment::Auction { policy, prices, values } => {
                format!("{} / {} / {}", policy.kind.as_str(), price_label(prices), values.label())
            }
            Experiment::TwoPoint { policy } => format!("{} / two-point pair", policy.kind.as_str()),
            Experiment::LowerBound { .. } => "mse / lower-bound instance".into(),
            Experiment::Inventory { .. } => "inventory mse".into(),
        }
    }

    /// Smallest usable horizon check, before any replication starts.
    pub fn validate(&self, horizon: usize) -> Result<()> {
        if horizon == 0 {
            return Err(Error::InvalidConfig("T must be positive".into()));
        }
        let policy = match self {
            Experiment::Auction { policy, .. } | Experiment::TwoPoint { policy } => Some(policy),
            _ => None,
        };
        if let Some(p) = policy {
            if p.kind == PolicyKind::MlIsUcb {
                let levels = p.levels.unwrap_or_else(|| ceil_log2(horizon));
                let warmup = (levels + 1) * ceil_sqrt(horizon);
                if warmup >= horizon {
                    return Err(Error::HorizonTooSmall { horizon, warmup });
                }
            }
        }
        if let Experiment::TwoPoint { .. } = self {
            if horizon < 4 {
                return Err(Error::InvalidConfig("two-point instance needs T >= 4".into()));
            }
        }
        if let Experiment::LowerBound { contexts, .. } = self {
            let m = contexts.unwrap_or_else(|| ceil_cbrt(horizon));
            if m > horizon {
                return Err(Error::InvalidConfig(format!("M = {m} exceeds T = {horizon}")));
            }
        }
        Ok(())
    }
}

fn price_label(spec: &DistributionSpec) -> String {
    match spec {
        DistributionSpec::Uniform => "uniform".into(),
        DistributionSpec::TwoPoint { branch: TwoPointBranch::G1, .. } => "two_point_g1".into(),
        DistributionSpec::TwoPoint { branch: TwoPointBranch::G2, .. } => "two_point_g2".into(),
        DistributionSpec::RandomHistogram { .. } => "piecewise".into(),
        DistributionSpec::TruncatedNormal { .. } => "truncnorm".into(),
        DistributionSpec::Discrete { .. } => "discrete".into(),
        DistributionSpec::Histogram { .. } => "histogram".into(),
    }
}

/// Price distributions by name: `uniform`, `two_point_g1`, `two_point_g2`
/// (Δ = `delta`), `piecewise` (ten-bin random histogram fixed by `seed`),
/// `truncnorm` (N(0.4, 0.2²) truncated to [0, 1]).
pub fn named_distribution(name: &str, delta: f64, seed: u64) -> Result<DistributionSpec> {
    Ok(match name {
        "uniform" => DistributionSpec::Uniform,
        "two_point_g1" => DistributionSpec::TwoPoint { delta, branch: TwoPointBranch::G1 },
        "two_point_g2" => DistributionSpec::TwoPoint { delta, branch: TwoPointBranch::G2 },
        "piecewise" => DistributionSpec::RandomHistogram { bins: 10, seed },
        "truncnorm" => DistributionSpec::TruncatedNormal { mean: 0.4, std_dev: 0.2 },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown environment `{other}` (expected uniform, two_point_g1, two_point_g2, piecewise, truncnorm)"
            )))
        }
    })
}

/// Everything needed to reproduce a batch of replications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    /// Rounds at which cumulative regret is recorded; empty means powers of
    /// two up to `T`, plus `T`.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, horizon: usize, replications: usize, seed: u64) -> Self {
        Self { experiment, horizon, replications, seed, checkpoints: Vec::new(), out: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("need at least one replication".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("checkpoints must be strictly increasing".into()));
        }
        if self.checkpoints.iter().any(|&c| c == 0 || c > self.horizon) {
            return Err(Error::InvalidConfig(format!("checkpoints must lie in [1, T = {}]", self.horizon)));
        }
        self.experiment.validate(self.horizon)
    }

    pub fn checkpoint_rounds(&self) -> Vec<usize> {
        if self.checkpoints.is_empty() {
            default_checkpoints(self.horizon)
        } else {
            self.checkpoints.clone()
        }
    }
}

/// `1, 2, 4, ...` up to `T`, plus `T` itself.
pub fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut t = 1;
    while t <= horizon {
        out.push(t);
        t *= 2;
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

pub fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}
