//! Replicated regret experiments: episodes, summaries, slope fits and
//! result files.

pub mod config;
pub mod episode;
pub mod output;
pub mod seeds;
pub mod slope;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{default_checkpoints, named_distribution, Experiment, ExperimentConfig};
pub use episode::{run_episode, Checkpoint, RegretTrace};
pub use output::{write_results, Sidecar};
pub use seeds::{replication_seed, splitmix64, stream_seed, Stream};
pub use slope::{fit_slope, SlopeFit};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub t: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single replication.
    pub std: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub horizon: usize,
    pub checkpoints: Vec<CheckpointStats>,
}

impl Summary {
    pub fn final_mean(&self) -> Option<f64> {
        self.checkpoints.last().map(|c| c.mean)
    }
}

/// Per-checkpoint statistics, accumulated in replication order.
pub fn summarize(horizon: usize, traces: &[RegretTrace]) -> Summary {
    let Some(first) = traces.first() else {
        return Summary { horizon, checkpoints: Vec::new() };
    };
    let checkpoints = (0..first.checkpoints.len())
        .map(|i| {
            let xs: Vec<f64> = traces.iter().map(|tr| tr.checkpoints[i].cum_regret).collect();
            let n = xs.len();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            CheckpointStats { t: first.checkpoints[i].t, mean, std, n }
        })
        .collect();
    Summary { horizon, checkpoints }
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub traces: Vec<RegretTrace>,
    pub summary: Summary,
}

/// Runs every replication, in parallel on the current rayon pool. Traces
/// come back in replication order whatever the pool size.
pub fn run_replications(config: &ExperimentConfig) -> Result<BatchResult> {
    config.validate()?;
    let results: Vec<Result<RegretTrace>> =
        (0..config.replications).into_par_iter().map(|rep| run_episode(config, rep)).collect();
    let mut traces = Vec::with_capacity(results.len());
    for (rep, r) in results.into_iter().enumerate() {
        match r {
            Ok(t) => traces.push(t),
            Err(source) => {
                return Err(Error::Replication {
                    replication: rep,
                    seed: replication_seed(config.seed, rep),
                    source: Box::new(source),
                })
            }
        }
    }
    let summary = summarize(config.horizon, &traces);
    Ok(BatchResult { traces, summary })
}

/// `2 + 4γ·ln(KMT)·(1 + ln T)·√T`: the expected-regret bound for MSE.
pub fn mse_regret_bound(gamma: f64, contexts: usize, actions: usize, horizon: usize) -> f64 {
    let t = horizon as f64;
    2.0 + 4.0 * gamma * (actions as f64 * contexts as f64 * t).ln() * (1.0 + t.ln()) * t.sqrt()
}

/// `4 + (L + 4)⌈√T⌉ + 80γ·ln(LKT)·(1 + ln T)·L√T`: the expected-regret bound
/// for ML-IS-UCB.
pub fn ml_is_ucb_regret_bound(gamma: f64, levels: usize, actions: usize, horizon: usize) -> f64 {
    let t = horizon as f64;
    let l = levels as f64;
    4.0 + (l + 4.0) * crate::grid::ceil_sqrt(horizon) as f64
        + 80.0 * gamma * (l * actions as f64 * t).ln() * (1.0 + t.ln()) * l * t.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::DistributionSpec;
    use crate::environments::ValueSchedule;
    use crate::policies::{PolicyConfig, PolicyKind};

    fn mse_config(reps: usize) -> ExperimentConfig {
        let mut policy = PolicyConfig::new(PolicyKind::Mse).with_gamma(0.2);
        policy.contexts = Some(10);
        policy.grid_size = Some(10);
        ExperimentConfig::new(
            Experiment::Auction { policy, prices: DistributionSpec::Uniform, values: ValueSchedule::iid_uniform() },
            1000,
            reps,
            7,
        )
    }

    #[test]
    fn single_replication_summary_is_the_trace() {
        let batch = run_replications(&mse_config(1)).unwrap();
        let trace = &batch.traces[0];
        for (s, c) in batch.summary.checkpoints.iter().zip(&trace.checkpoints) {
            assert_eq!((s.t, s.mean, s.std, s.n), (c.t, c.cum_regret, 0.0, 1));
        }
    }

    #[test]
    fn oracle_batch_is_all_zero() {
        let cfg = ExperimentConfig::new(
            Experiment::Auction {
                policy: PolicyConfig::new(PolicyKind::Oracle),
                prices: DistributionSpec::Uniform,
                values: ValueSchedule::iid_uniform(),
            },
            200,
            100,
            3,
        );
        let batch = run_replications(&cfg).unwrap();
        assert!(batch.summary.checkpoints.iter().all(|c| c.mean == 0.0 && c.std == 0.0 && c.n == 100));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = mse_config(12);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_replications(&cfg).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.summary, four.summary);
        for (a, b) in one.traces.iter().zip(&four.traces) {
            assert_eq!((a.replication, a.seed, &a.checkpoints), (b.replication, b.seed, &b.checkpoints));
        }
    }

    #[test]
    fn failures_report_the_seed() {
        let cfg = ExperimentConfig::new(
            Experiment::Auction {
                policy: PolicyConfig::new(PolicyKind::Mse),
                prices: DistributionSpec::Uniform,
                values: ValueSchedule::Explicit { values: vec![0.5; 5] },
            },
            10,
            3,
            11,
        );
        match run_replications(&cfg) {
            Err(Error::Replication { replication: 0, seed, .. }) => assert_eq!(seed, replication_seed(11, 0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bound_expressions() {
        // T = 2^14, K = M = 128, γ = 3.
        let t = 16384f64;
        let direct = 2.0 + 12.0 * (128.0 * 128.0 * t).ln() * (1.0 + t.ln()) * 128.0;
        assert!((mse_regret_bound(3.0, 128, 128, 16384) - direct).abs() < 1e-6);
        assert!((mse_regret_bound(3.0, 128, 128, 16384) - 319_099.399).abs() < 1e-2);
        let b = ml_is_ucb_regret_bound(3.0, 12, 64, 4096);
        let direct = 4.0 + 16.0 * 64.0 + 240.0 * (12.0f64 * 64.0 * 4096.0).ln() * (1.0 + 4096f64.ln()) * 12.0 * 64.0;
        assert!((b - direct).abs() < 1e-6);
    }
}
