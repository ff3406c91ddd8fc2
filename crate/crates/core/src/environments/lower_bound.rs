//! Bernoulli monotone group bandit on which any policy facing decreasing
//! contexts pays order `T^{2/3}`.
//!
//! Means (one-based `c`, `a`):
//! `R_{c,a} = 3/4 - |a + 1/2 - 2c|/(2K)` for `a != 2c-1` and
//! `R_{c,2c-1} = 3/4 - (ε_c + 1)/(4K)`. The best action under `c` is `2c`
//! when `ε_c = +1` and `2c - 1` otherwise.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::policies::mse::{MonotoneStats, Reveal};
use crate::policies::suffix::SuffixCounts;

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundInstance {
    contexts: usize,
    actions: usize,
    signs: Vec<i8>,
    means: Vec<f64>,
    best: Vec<usize>,
}

impl LowerBoundInstance {
    /// `K >= 2M` actions; `signs[c]` is `ε_{c+1}`.
    pub fn new(contexts: usize, actions: usize, signs: Vec<i8>) -> Result<Self> {
        if contexts == 0 || actions < 2 * contexts {
            return Err(Error::InvalidConfig(format!(
                "lower-bound instance needs M >= 1 and K >= 2M, got M = {contexts}, K = {actions}"
            )));
        }
        if signs.len() != contexts || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidConfig("ε must hold M entries in {-1, +1}".into()));
        }
        let k = actions as f64;
        let mut means = Vec::with_capacity(contexts * actions);
        for c in 1..=contexts {
            for a in 1..=actions {
                let r = if a == 2 * c - 1 {
                    0.75 - (signs[c - 1] as f64 + 1.0) / (4.0 * k)
                } else {
                    0.75 - (a as f64 + 0.5 - 2.0 * c as f64).abs() / (2.0 * k)
                };
                means.push(r);
            }
        }
        let best = (0..contexts)
            .map(|c| {
                let row = &means[c * actions..(c + 1) * actions];
                // Largest maximizer, as for the auction oracle.
                (0..actions).fold(0, |b, a| if row[a] >= row[b] { a } else { b })
            })
            .collect();
        Ok(Self { contexts, actions, signs, means, best })
    }

    /// ε uniform on `{±1}^M`.
    pub fn random<R: Rng + ?Sized>(contexts: usize, actions: usize, rng: &mut R) -> Result<Self> {
        let signs = (0..contexts).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self::new(contexts, actions, signs)
    }

    pub fn contexts(&self) -> usize {
        self.contexts
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Zero-based lookup.
    pub fn mean(&self, context: usize, action: usize) -> f64 {
        self.means[context * self.actions + action]
    }

    /// Zero-based best action of a zero-based context.
    pub fn best_action(&self, context: usize) -> usize {
        self.best[context]
    }

    pub fn regret(&self, context: usize, action: usize) -> f64 {
        self.mean(context, self.best[context]) - self.mean(context, action)
    }

    /// Independent Bernoulli rewards for every `(c, a >= played)`.
    pub fn reveal<R: Rng + ?Sized>(&self, played: usize, rng: &mut R) -> Result<Reveal> {
        if played >= self.actions {
            return Err(Error::InvalidConfig(format!("action {} outside [1, {}]", played + 1, self.actions)));
        }
        let mut rewards = Vec::with_capacity(self.contexts * (self.actions - played));
        for c in 0..self.contexts {
            for a in played..self.actions {
                rewards.push(if rng.random::<f64>() < self.mean(c, a) { 1.0 } else { 0.0 });
            }
        }
        Reveal::new(played, self.contexts, self.actions, rewards)
    }
}

/// Bernoulli reward statistics that postpone sampling until a mean is read.
///
/// Every pair `(c, a)` with `a >= a_t` receives one fresh Bernoulli reward
/// per round. Its unread rewards are iid and independent of everything seen
/// so far, so their sum is drawn as a single Binomial when the mean is read.
#[derive(Clone, Debug)]
pub struct LazyBernoulliStats<R> {
    instance: LowerBoundInstance,
    counts: SuffixCounts,
    seen: Vec<u64>,
    successes: Vec<u64>,
    rng: R,
}

impl<R: Rng> LazyBernoulliStats<R> {
    pub fn new(instance: LowerBoundInstance, rng: R) -> Self {
        let size = instance.contexts * instance.actions;
        Self { counts: SuffixCounts::new(instance.actions), seen: vec![0; size], successes: vec![0; size], instance, rng }
    }

    pub fn instance(&self) -> &LowerBoundInstance {
        &self.instance
    }

    /// A round played `played`: every pair at or above it gets a reward.
    pub fn absorb(&mut self, played: usize) {
        self.counts.bump_from(played);
    }
}

impl<R: Rng> MonotoneStats for LazyBernoulliStats<R> {
    fn contexts(&self) -> usize {
        self.instance.contexts
    }
    fn actions(&self) -> usize {
        self.instance.actions
    }
    fn count(&self, _context: usize, action: usize) -> u64 {
        self.counts.get(action)
    }
    fn mean(&mut self, context: usize, action: usize) -> f64 {
        let n = self.counts.get(action);
        if n == 0 {
            return 0.0;
        }
        let idx = context * self.instance.actions + action;
        let fresh = n - self.seen[idx];
        if fresh > 0 {
            let p = self.instance.mean(context, action);
            let draw = Binomial::new(fresh, p).expect("means lie in [0, 1]");
            self.successes[idx] += draw.sample(&mut self.rng);
            self.seen[idx] = n;
        }
        self.successes[idx] as f64 / n as f64
    }
    fn span(&self, _context: usize, _action: usize) -> f64 {
        1.0
    }
}
