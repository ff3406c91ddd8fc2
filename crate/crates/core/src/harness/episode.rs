use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig};
use super::seeds::{replication_seed, stream_seed, Stream};
use crate::distribution::{BidDistribution, DistributionSpec, TwoPointBranch};
use crate::environments::{block_contexts, AuctionEnv, LazyBernoulliStats, LowerBoundInstance, TwoPointInstance, ValueSchedule};
use crate::error::{Error, Result};
use crate::grid::{ceil_cbrt, merge_points, GridSpec};
use crate::inventory::{expected_inventory_reward, InventoryEnv, InventoryMse};
use crate::oracle::GridOracle;
use crate::policies::{MseConfig, MseState, PolicyConfig};

/// Resolution of the extra levels the inventory regret is measured against.
const INVENTORY_REFERENCE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: usize,
    pub cum_regret: f64,
}

/// Cumulative expected regret of one replication at each checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub replication: usize,
    pub seed: u64,
    pub label: String,
    pub checkpoints: Vec<Checkpoint>,
    /// `Σ_t max_b R(v_t, b)` over the reference grid (averaged over the two
    /// branches for the paired instance).
    pub oracle_reward: f64,
    pub wall_clock_secs: f64,
    /// Inventory runs only: the surviving level with the best empirical mean.
    pub best_level: Option<f64>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.cum_regret)
    }
}

/// Regret bookkeeping shared by all experiment loops.
struct Recorder<'a> {
    checkpoints: &'a [usize],
    next: usize,
    cum: f64,
    seed: u64,
    out: Vec<Checkpoint>,
}

impl<'a> Recorder<'a> {
    fn new(checkpoints: &'a [usize], seed: u64) -> Self {
        Self { checkpoints, next: 0, cum: 0.0, seed, out: Vec::with_capacity(checkpoints.len()) }
    }

    /// Adds the regret of round `t` (one-based).
    fn push(&mut self, t: usize, regret: f64) -> Result<()> {
        if !regret.is_finite() {
            return Err(Error::NotFinite { round: t, seed: self.seed });
        }
        self.cum += regret;
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] == t {
            self.out.push(Checkpoint { t, cum_regret: self.cum });
            self.next += 1;
        }
        Ok(())
    }
}

/// Bid points the regret of an auction policy is measured against:
/// `offset(K) ∪ {1} ∪ atoms(G)`, before the policy's own points are added.
pub fn base_reference(grid_size: usize, dist: &BidDistribution) -> Result<Vec<f64>> {
    let grid = GridSpec::offset(grid_size)?.points();
    Ok(merge_points(&[&grid, &[1.0], dist.atoms()]))
}

/// Result of a single auction run before it is packaged as a trace.
struct AuctionRun {
    checkpoints: Vec<Checkpoint>,
    oracle_reward: f64,
}

fn run_auction(
    policy_cfg: &PolicyConfig,
    dist: BidDistribution,
    values: &[f64],
    env_seed: u64,
    seed: u64,
    checkpoints: &[usize],
) -> Result<AuctionRun> {
    let horizon = values.len();
    let base = base_reference(policy_cfg.grid_size_for(horizon), &dist)?;
    let mut policy = policy_cfg.build(horizon, &dist, &base)?;
    let reference = merge_points(&[&base, &policy.bid_points()]);
    let oracle = GridOracle::new(reference, &dist);
    let mut env = AuctionEnv::new(dist, env_seed);
    let mut rec = Recorder::new(checkpoints, seed);
    let mut oracle_reward = 0.0;
    let mut cached: Option<(f64, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        let best = match cached {
            Some((cv, r)) if cv == v => r,
            _ => {
                let r = oracle.best(v).reward;
                cached = Some((v, r));
                r
            }
        };
        oracle_reward += best;
        let bid = policy.bid(v)?;
        if !bid.is_finite() {
            return Err(Error::NotFinite { round: i + 1, seed });
        }
        let earned = (v - bid) * env.dist().cdf(bid);
        rec.push(i + 1, best - earned)?;
        let (outcome, _m) = env.step(bid)?;
        policy.observe(&outcome)?;
    }
    Ok(AuctionRun { checkpoints: rec.out, oracle_reward })
}

fn values_for(schedule: &ValueSchedule, horizon: usize, rep_seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(rep_seed, Stream::Values));
    schedule.generate(horizon, &mut rng)
}

/// One replication. Regret is computed from the true `G` (or the true means
/// of the hard instance), never from realized payoffs. The result depends
/// only on `(config.seed, replication)`.
pub fn run_episode(config: &ExperimentConfig, replication: usize) -> Result<RegretTrace> {
    let started = Instant::now();
    let horizon = config.horizon;
    let seed = replication_seed(config.seed, replication);
    let checkpoints = config.checkpoint_rounds();
    let mut best_level = None;
    let (points, oracle_reward) = match &config.experiment {
        Experiment::Auction { policy, prices, values } => {
            let dist = BidDistribution::new(prices.clone())?;
            let values = values_for(values, horizon, seed)?;
            let run = run_auction(policy, dist, &values, stream_seed(seed, Stream::Auction), seed, &checkpoints)?;
            (run.checkpoints, run.oracle_reward)
        }
        Experiment::TwoPoint { policy } => {
            let inst = TwoPointInstance::for_horizon(horizon)?;
            let values = vec![1.0; horizon];
            let g1 = run_auction(
                policy,
                inst.dist(TwoPointBranch::G1),
                &values,
                stream_seed(seed, Stream::Auction),
                seed,
                &checkpoints,
            )?;
            let g2 = run_auction(
                policy,
                inst.dist(TwoPointBranch::G2),
                &values,
                stream_seed(seed, Stream::AuctionPaired),
                seed,
                &checkpoints,
            )?;
            let points = g1
                .checkpoints
                .iter()
                .zip(&g2.checkpoints)
                .map(|(a, b)| Checkpoint { t: a.t, cum_regret: 0.5 * (a.cum_regret + b.cum_regret) })
                .collect();
            (points, 0.5 * (g1.oracle_reward + g2.oracle_reward))
        }
        Experiment::LowerBound { gamma, contexts, actions, signs } => {
            let m = contexts.unwrap_or_else(|| ceil_cbrt(horizon));
            let k = actions.unwrap_or(2 * m);
            let inst = match signs {
                Some(s) => LowerBoundInstance::new(m, k, s.clone())?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, Stream::Epsilon));
                    LowerBoundInstance::random(m, k, &mut rng)?
                }
            };
            let schedule = block_contexts(m, horizon)?;
            let stats = LazyBernoulliStats::new(
                inst.clone(),
                ChaCha8Rng::seed_from_u64(stream_seed(seed, Stream::Rewards)),
            );
            let mut mse = MseState::new(MseConfig::new(m, k, horizon, *gamma)?, stats)?;
            let mut rec = Recorder::new(&checkpoints, seed);
            let mut oracle_reward = 0.0;
            for (i, &c) in schedule.iter().enumerate() {
                let c = c - 1;
                oracle_reward += inst.mean(c, inst.best_action(c));
                let a = mse.choose(c)?;
                rec.push(i + 1, inst.regret(c, a))?;
                mse.stats_mut().absorb(a);
                mse.after_update();
            }
            (rec.out, oracle_reward)
        }
        Experiment::Inventory { demand, price, overage, gamma, levels } => {
            let demand = BidDistribution::new(demand.clone())?;
            let mut policy = InventoryMse::new(horizon, *levels, *gamma, *price, *overage)?;
            let reference = merge_points(&[
                &policy.levels().points(),
                &GridSpec::offset(INVENTORY_REFERENCE)?.points(),
                &[1.0],
            ]);
            let best = reference
                .iter()
                .map(|&a| expected_inventory_reward(a, &demand, *price, *overage))
                .fold(f64::NEG_INFINITY, f64::max);
            let mut env = InventoryEnv::new(demand.clone(), *price, *overage, stream_seed(seed, Stream::Demand))?;
            let mut rec = Recorder::new(&checkpoints, seed);
            for t in 1..=horizon {
                let level = policy.order()?;
                rec.push(t, best - expected_inventory_reward(level, &demand, *price, *overage))?;
                let (sold, _d) = env.step(level)?;
                policy.observe(sold)?;
            }
            best_level = Some(policy.best_level());
            (rec.out, best * horizon as f64)
        }
    };
    Ok(RegretTrace {
        replication,
        seed,
        label: config.experiment.label(),
        checkpoints: points,
        oracle_reward,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        best_level,
    })
}

/// Uniform demand unless told otherwise.
pub fn default_demand() -> DistributionSpec {
    DistributionSpec::Uniform
}
