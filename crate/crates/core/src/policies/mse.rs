//! Monotone successive elimination for monotone group contextual bandits.
//!
//! Each context `c` keeps an active set `A_c` of candidate actions. The
//! learner plays `min A_{c_t}`, which reveals the rewards of every pair
//! `(c, a)` with `a >= a_t`. After the update, contexts are swept in
//! increasing order and two rules are applied:
//!
//! 1. drop every `a < min A_{c-1}` (with `A_0` the full action set);
//! 2. drop `a` when
//!    `r̄_{c,a} < r̄_{c,max} - β·(n_{c,a}^{-1/2} + n_{c,max}^{-1/2})`,
//!    `β = γ·ln(KMT)`.
//!
//! Running rule 2 on every context every round costs `O(MK)` per round. With
//! [`EliminationCheck::Certified`] a context is rechecked only once rule 2
//! could possibly fire: after a check, every mean can move by at most
//! `span/(n+1)` per round and the band can only shrink as counts grow, which
//! gives a conservative number of rounds during which no elimination is
//! possible. The active sets are identical to checking every round.

use crate::error::{Error, Result};

/// Empirical reward statistics behind the elimination rule.
pub trait MonotoneStats {
    fn contexts(&self) -> usize;
    fn actions(&self) -> usize;
    fn count(&self, context: usize, action: usize) -> u64;
    /// Empirical mean of the pair. Takes `&mut self` so that lazily
    /// aggregated reveals can be materialized on read.
    fn mean(&mut self, context: usize, action: usize) -> f64;
    /// Width of the range a single reward of the pair can take.
    fn span(&self, context: usize, action: usize) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EliminationCheck {
    EveryRound,
    #[default]
    Certified,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MseConfig {
    pub contexts: usize,
    pub actions: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub check: EliminationCheck,
    log_term: f64,
}

impl MseConfig {
    pub fn new(contexts: usize, actions: usize, horizon: usize, gamma: f64) -> Result<Self> {
        if contexts == 0 || actions == 0 || horizon == 0 {
            return Err(Error::InvalidConfig("MSE needs M, K, T >= 1".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma must be positive, got {gamma}")));
        }
        let log_term = ((actions as f64) * (contexts as f64) * (horizon as f64)).ln();
        Ok(Self { contexts, actions, horizon, gamma, check: EliminationCheck::Certified, log_term })
    }

    /// Replace `ln(KMT)` in the band by another logarithmic factor.
    pub fn with_log_term(mut self, log_term: f64) -> Self {
        self.log_term = log_term;
        self
    }

    pub fn with_check(mut self, check: EliminationCheck) -> Self {
        self.check = check;
        self
    }

    /// `γ·ln(KMT)` unless overridden.
    pub fn band_scale(&self) -> f64 {
        self.gamma * self.log_term
    }
}

/// Active sets plus the elimination bookkeeping, generic over the statistics.
#[derive(Clone, Debug)]
pub struct MseState<S> {
    config: MseConfig,
    beta: f64,
    stats: S,
    active: Vec<bool>,
    min_active: Vec<usize>,
    len_active: Vec<usize>,
    next_check: Vec<usize>,
    next_due: usize,
    round: usize,
    // Visits per context from round 2 on, for the count-bound check.
    visits_after_first: Vec<u64>,
    last_context: Option<usize>,
    eliminated_total: u64,
    scratch: Scratch,
}

/// Per-check buffers, kept to avoid reallocating on every sweep.
#[derive(Clone, Debug, Default)]
struct Scratch {
    members: Vec<usize>,
    means: Vec<f64>,
    counts: Vec<u64>,
    inv_sqrt: Vec<f64>,
}

impl Scratch {
    fn clear(&mut self) {
        self.truncate(0);
    }

    fn truncate(&mut self, len: usize) {
        self.members.truncate(len);
        self.means.truncate(len);
        self.counts.truncate(len);
        self.inv_sqrt.truncate(len);
    }
}

impl<S: MonotoneStats> MseState<S> {
    pub fn new(config: MseConfig, stats: S) -> Result<Self> {
        if stats.contexts() != config.contexts || stats.actions() != config.actions {
            return Err(Error::InvalidConfig(format!(
                "statistics shape {}x{} does not match M = {}, K = {}",
                stats.contexts(),
                stats.actions(),
                config.contexts,
                config.actions
            )));
        }
        let (m, k) = (config.contexts, config.actions);
        Ok(Self {
            beta: config.band_scale(),
            config,
            stats,
            active: vec![true; m * k],
            min_active: vec![0; m],
            len_active: vec![k; m],
            next_check: vec![0; m],
            next_due: 0,
            round: 0,
            visits_after_first: vec![0; m],
            last_context: None,
            eliminated_total: 0,
            scratch: Scratch::default(),
        })
    }

    pub fn config(&self) -> &MseConfig {
        &self.config
    }

    pub fn stats(&self) -> &S {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut S {
        &mut self.stats
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn eliminated_total(&self) -> u64 {
        self.eliminated_total
    }

    /// `min A_c`, the action played under context `c` (zero-based).
    pub fn choose(&mut self, context: usize) -> Result<usize> {
        if context >= self.config.contexts {
            return Err(Error::InvalidConfig(format!(
                "context {} outside [1, {}]",
                context + 1,
                self.config.contexts
            )));
        }
        self.last_context = Some(context);
        Ok(self.min_active[context])
    }

    pub fn is_active(&self, context: usize, action: usize) -> bool {
        self.active[context * self.config.actions + action]
    }

    pub fn active_set(&self, context: usize) -> Vec<usize> {
        let k = self.config.actions;
        (0..k).filter(|&a| self.active[context * k + a]).collect()
    }

    pub fn min_active(&self, context: usize) -> usize {
        self.min_active[context]
    }

    /// Apply both elimination rules after the statistics absorbed the reveal
    /// of the current round.
    pub fn after_update(&mut self) {
        self.round += 1;
        if self.round >= 2 {
            if let Some(c) = self.last_context {
                self.visits_after_first[c] += 1;
            }
        }
        self.last_context = None;
        // Minima only move inside a sweep, so rule 1 is idle until some
        // context is due for rule 2.
        if self.config.check == EliminationCheck::Certified && self.next_due > self.round {
            return;
        }
        let mut floor = 0;
        for c in 0..self.config.contexts {
            self.apply_floor(c, floor);
            let due = match self.config.check {
                EliminationCheck::EveryRound => true,
                EliminationCheck::Certified => self.round >= self.next_check[c],
            };
            if due {
                self.eliminate(c);
            }
            floor = self.min_active[c];
        }
        self.next_due = self.next_check.iter().copied().min().unwrap_or(0);
    }

    fn remove(&mut self, c: usize, a: usize) {
        let idx = c * self.config.actions + a;
        if self.active[idx] {
            self.active[idx] = false;
            self.len_active[c] -= 1;
            self.eliminated_total += 1;
        }
    }

    fn refresh_min(&mut self, c: usize) {
        let k = self.config.actions;
        let row = &self.active[c * k..(c + 1) * k];
        self.min_active[c] = (self.min_active[c]..k).find(|&a| row[a]).unwrap_or(k);
    }

    /// Rule 1. If it would empty `A_c` (possible only when the monotone
    /// optimal action property fails or a lower context lost its optimum),
    /// `A_c` collapses to `{floor}` so that sets stay nonempty and their
    /// minima stay ordered.
    fn apply_floor(&mut self, c: usize, floor: usize) {
        if self.min_active[c] >= floor {
            return;
        }
        let k = self.config.actions;
        let survivors = (floor..k).any(|a| self.active[c * k + a]);
        for a in self.min_active[c]..floor {
            self.remove(c, a);
        }
        if !survivors {
            self.active[c * k + floor] = true;
            self.len_active[c] += 1;
            self.eliminated_total -= 1;
        }
        self.min_active[c] = floor;
        self.refresh_min(c);
    }

    /// Rule 2 on one context, then schedule its next check.
    fn eliminate(&mut self, c: usize) {
        let k = self.config.actions;
        let beta = self.beta;
        let mut sc = std::mem::take(&mut self.scratch);
        sc.clear();
        for a in (self.min_active[c]..k).filter(|&a| self.active[c * k + a]) {
            let n = self.stats.count(c, a);
            if n == 0 {
                // Only before the first reveal; nothing to compare yet.
                self.next_check[c] = self.round + 1;
                self.scratch = sc;
                return;
            }
            sc.members.push(a);
            sc.means.push(self.stats.mean(c, a));
            sc.counts.push(n);
            sc.inv_sqrt.push(1.0 / (n as f64).sqrt());
        }
        // Largest mean, then larger count, then smaller action.
        let mut best = 0;
        for j in 1..sc.members.len() {
            if sc.means[j] > sc.means[best] || (sc.means[j] == sc.means[best] && sc.counts[j] > sc.counts[best]) {
                best = j;
            }
        }
        let r_max = sc.means[best];
        let max_term = sc.inv_sqrt[best];
        let mut kept = 0;
        for j in 0..sc.members.len() {
            if sc.means[j] < r_max - beta * (sc.inv_sqrt[j] + max_term) {
                self.remove(c, sc.members[j]);
            } else {
                sc.members[kept] = sc.members[j];
                sc.means[kept] = sc.means[j];
                sc.counts[kept] = sc.counts[j];
                sc.inv_sqrt[kept] = sc.inv_sqrt[j];
                kept += 1;
            }
        }
        sc.truncate(kept);
        if !self.active[c * k + self.min_active[c]] {
            self.refresh_min(c);
        }
        if self.config.check == EliminationCheck::Certified {
            self.next_check[c] = self.round + 1 + self.quiet_rounds(c, &sc, r_max);
        }
        self.scratch = sc;
    }

    /// Number of upcoming rounds in which rule 2 provably cannot fire on
    /// context `c`, given its surviving members.
    fn quiet_rounds(&self, c: usize, sc: &Scratch, r_max: f64) -> usize {
        let cap = self.config.horizon.saturating_sub(self.round);
        if cap == 0 {
            return 0;
        }
        let drift = |j: usize| self.stats.span(c, sc.members[j]) / (sc.counts[j] as f64 + 1.0);
        let drift_max = (0..sc.members.len()).map(drift).fold(0.0, f64::max);
        let top = sc.inv_sqrt.iter().copied().fold(f64::INFINITY, f64::min);
        let top_decay = 0.5 * top * top * top;
        let mut quiet = cap as f64;
        for j in 0..sc.members.len() {
            // Over `s` rounds the gap grows by at most `s·drift`, and the
            // band, convex in `s`, stays above its tangent at `s = 0`
            // (using the largest count as the worst case for the best arm).
            let inv = sc.inv_sqrt[j];
            let slack = self.beta * (inv + top) - (r_max - sc.means[j]) - 1e-9;
            let rate = drift(j) + drift_max + self.beta * (0.5 * inv * inv * inv + top_decay);
            quiet = quiet.min((slack / rate).floor().max(0.0));
            if quiet == 0.0 {
                break;
            }
        }
        quiet as usize
    }

    /// Checks the structural invariants; `Err` names the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let (m, k) = (self.config.contexts, self.config.actions);
        let mut prev_min = 0;
        let mut visits_upto = 0u64;
        for c in 0..m {
            let set = self.active_set(c);
            if set.is_empty() {
                return Err(format!("A_{} is empty", c + 1));
            }
            if set.len() != self.len_active[c] || set[0] != self.min_active[c] {
                return Err(format!("bookkeeping of A_{} out of sync", c + 1));
            }
            if set[0] < prev_min {
                return Err(format!("min A_{} < min A_{}", c + 1, c));
            }
            prev_min = set[0];
            visits_upto += self.visits_after_first[c];
            if self.round >= 1 {
                for &a in &set {
                    let n = self.stats.count(c, a);
                    if n < 1 + visits_upto {
                        return Err(format!(
                            "count bound fails at (c={}, a={}): n = {n} < {}",
                            c + 1,
                            a + 1,
                            1 + visits_upto
                        ));
                    }
                }
            }
        }
        let _ = k;
        Ok(())
    }
}

/// Explicit per-pair statistics fed by full reveal matrices.
#[derive(Clone, Debug)]
pub struct DenseStats {
    contexts: usize,
    actions: usize,
    means: Vec<f64>,
    counts: Vec<u64>,
    span: f64,
}

/// Rewards `r_{t,c,a}` for every context and every action `a >= first`,
/// stored row-major by context.
#[derive(Clone, Debug, PartialEq)]
pub struct Reveal {
    pub first_action: usize,
    pub contexts: usize,
    pub actions: usize,
    pub rewards: Vec<f64>,
}

impl Reveal {
    pub fn new(first_action: usize, contexts: usize, actions: usize, rewards: Vec<f64>) -> Result<Self> {
        if first_action >= actions {
            return Err(Error::RevealShape(format!(
                "first action {} outside [1, {actions}]",
                first_action + 1
            )));
        }
        let width = actions - first_action;
        if rewards.len() != contexts * width {
            return Err(Error::RevealShape(format!(
                "expected {contexts} x {width} rewards, got {}",
                rewards.len()
            )));
        }
        Ok(Self { first_action, contexts, actions, rewards })
    }

    pub fn get(&self, context: usize, action: usize) -> f64 {
        let width = self.actions - self.first_action;
        self.rewards[context * width + action - self.first_action]
    }
}

impl DenseStats {
    /// `span` bounds the range of any single reward.
    pub fn new(contexts: usize, actions: usize, span: f64) -> Self {
        Self {
            contexts,
            actions,
            means: vec![0.0; contexts * actions],
            counts: vec![0; contexts * actions],
            span,
        }
    }

    pub fn absorb(&mut self, reveal: &Reveal) {
        for c in 0..self.contexts {
            for a in reveal.first_action..self.actions {
                let idx = c * self.actions + a;
                let n = self.counts[idx] as f64;
                self.means[idx] = n / (n + 1.0) * self.means[idx] + reveal.get(c, a) / (n + 1.0);
                self.counts[idx] += 1;
            }
        }
    }
}

impl MonotoneStats for DenseStats {
    fn contexts(&self) -> usize {
        self.contexts
    }
    fn actions(&self) -> usize {
        self.actions
    }
    fn count(&self, context: usize, action: usize) -> u64 {
        self.counts[context * self.actions + action]
    }
    fn mean(&mut self, context: usize, action: usize) -> f64 {
        self.means[context * self.actions + action]
    }
    fn span(&self, _context: usize, _action: usize) -> f64 {
        self.span
    }
}

/// Generic MSE over an abstract instance that hands over explicit reveals.
pub type GenericMse = MseState<DenseStats>;

impl GenericMse {
    pub fn generic(config: MseConfig, reward_span: f64) -> Result<Self> {
        MseState::new(config, DenseStats::new(config.contexts, config.actions, reward_span))
    }

    /// Absorb the reveal for action `played` and run both elimination rules.
    pub fn observe(&mut self, played: usize, reveal: &Reveal) -> Result<()> {
        if reveal.first_action != played
            || reveal.contexts != self.config.contexts
            || reveal.actions != self.config.actions
        {
            return Err(Error::RevealShape(format!(
                "reveal covers (M={}, K={}, a>={}) but the round played a = {} on M={}, K={}",
                reveal.contexts,
                reveal.actions,
                reveal.first_action + 1,
                played + 1,
                self.config.contexts,
                self.config.actions
            )));
        }
        self.stats.absorb(reveal);
        self.after_update();
        Ok(())
    }
}
