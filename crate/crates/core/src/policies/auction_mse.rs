//! MSE run on the auction: contexts are quantized values, actions are bids.
//!
//! Bidding `b_t` reveals `1(m_t <= b)` for every `b >= b_t`, so the pair
//! `(c, a)` with `a >= a_t` receives the reward `(c/M - a/K)·1(m_t <= a/K)`.
//! That reward factors as a context-free win indicator times a known margin,
//! so the statistics keep per-action win counts and rebuild any pair's mean
//! on demand.

use crate::error::Result;
use crate::feedback::CensoredOutcome;
use crate::grid::GridSpec;
use crate::policies::mse::{MonotoneStats, MseConfig, MseState};
use crate::policies::BidPolicy;
use crate::reward::quantize_index;

/// `n_a` and `w_a = #{rounds revealing a with m <= b^a}`, shared by every
/// context.
#[derive(Clone, Debug)]
pub struct AuctionStats {
    contexts: usize,
    bids: GridSpec,
    counts: Vec<u64>,
    wins: Vec<u64>,
}

impl AuctionStats {
    pub fn new(contexts: usize, bids: GridSpec) -> Self {
        Self { contexts, bids, counts: vec![0; bids.len()], wins: vec![0; bids.len()] }
    }

    /// Record a round where action `played` was bid. Suffix updates are
    /// `O(K)`, cheap next to the reads made by the elimination sweeps.
    pub fn absorb(&mut self, played: usize, outcome: &CensoredOutcome) {
        self.counts[played..].iter_mut().for_each(|n| *n += 1);
        let first_win = match outcome.revealed() {
            None => played,
            // Smallest grid bid that would have beaten the revealed price.
            Some(m) => self.bids.interval_of(m).map_or(0, |i| i + 1).max(played),
        };
        if let Some(w) = self.wins.get_mut(first_win..) {
            w.iter_mut().for_each(|n| *n += 1);
        }
    }

    fn margin(&self, context: usize, action: usize) -> f64 {
        (context + 1) as f64 / self.contexts as f64 - self.bids.point(action)
    }

    pub fn wins(&self, action: usize) -> u64 {
        self.wins[action]
    }
}

impl MonotoneStats for AuctionStats {
    fn contexts(&self) -> usize {
        self.contexts
    }
    fn actions(&self) -> usize {
        self.bids.len()
    }
    fn count(&self, _context: usize, action: usize) -> u64 {
        self.counts[action]
    }
    fn mean(&mut self, context: usize, action: usize) -> f64 {
        let n = self.counts[action];
        if n == 0 {
            return 0.0;
        }
        self.margin(context, action) * self.wins[action] as f64 / n as f64
    }
    fn span(&self, context: usize, action: usize) -> f64 {
        self.margin(context, action).abs()
    }
}

#[derive(Clone, Debug)]
pub struct MseBidder {
    state: MseState<AuctionStats>,
    bids: GridSpec,
    pending: Option<usize>,
}

impl MseBidder {
    /// `M` value levels, `K` bids on `{1/K, ..., 1}`.
    pub fn new(config: MseConfig) -> Result<Self> {
        let bids = GridSpec::unit(config.actions)?;
        let state = MseState::new(config, AuctionStats::new(config.contexts, bids))?;
        Ok(Self { state, bids, pending: None })
    }

    pub fn state(&self) -> &MseState<AuctionStats> {
        &self.state
    }

    /// Zero-based context of a value.
    pub fn context_of(&self, value: f64) -> usize {
        quantize_index(value, self.state.config().contexts) - 1
    }
}

impl BidPolicy for MseBidder {
    fn name(&self) -> &'static str {
        "mse"
    }

    fn bid(&mut self, value: f64) -> Result<f64> {
        crate::error::check_unit("value", value)?;
        let c = self.context_of(value);
        let a = self.state.choose(c)?;
        self.pending = Some(a);
        Ok(self.bids.point(a))
    }

    fn observe(&mut self, outcome: &CensoredOutcome) -> Result<()> {
        let a = self.pending.take().expect("observe called without a preceding bid");
        self.state.stats_mut().absorb(a, outcome);
        self.state.after_update();
        Ok(())
    }

    fn bid_points(&self) -> Vec<f64> {
        self.bids.points()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::BidDistribution;
    use crate::policies::mse::{EliminationCheck, GenericMse, Reveal};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fresh_bidder_bids_smallest_grid_point() {
        let mut p = MseBidder::new(MseConfig::new(10, 10, 100, 3.0).unwrap()).unwrap();
        assert_eq!(p.bid(0.73).unwrap(), 0.1);
        assert_eq!(p.context_of(0.73), 7);
    }

    #[test]
    fn win_counts_follow_censoring() {
        let mut s = AuctionStats::new(2, GridSpec::unit(4).unwrap());
        // Bid 0.5 (a = 1), lose to 0.7: wins only at b = 0.75, 1.
        s.absorb(1, &CensoredOutcome::from_auction(0.5, 0.7).unwrap());
        assert_eq!((0..4).map(|a| s.count(0, a)).collect::<Vec<_>>(), vec![0, 1, 1, 1]);
        assert_eq!((0..4).map(|a| s.wins(a)).collect::<Vec<_>>(), vec![0, 0, 1, 1]);
        // Bid 0.25, win: every revealed bid wins.
        s.absorb(0, &CensoredOutcome::from_auction(0.25, 0.1).unwrap());
        assert_eq!((0..4).map(|a| s.wins(a)).collect::<Vec<_>>(), vec![1, 1, 2, 2]);
        // (c = 2, a = 3): margin 1 - 0.75, two wins out of two reveals.
        assert!((s.mean(1, 2) - 0.25).abs() < 1e-15);
        // Revealed price on a grid point counts as a win there.
        s.absorb(0, &CensoredOutcome::from_auction(0.25, 0.5).unwrap());
        assert_eq!(s.wins(1), 2);
    }

    #[test]
    fn matches_generic_mse_fed_explicit_reveals() {
        for (seed, check) in [(1, EliminationCheck::EveryRound), (2, EliminationCheck::Certified)] {
            let (m, k, horizon) = (6, 8, 4000);
            let cfg = MseConfig::new(m, k, horizon, 0.05).unwrap().with_check(check);
            let mut fast = MseBidder::new(cfg).unwrap();
            let mut slow = GenericMse::generic(cfg, 1.0).unwrap();
            let dist = BidDistribution::uniform();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..horizon {
                let v: f64 = rng.random();
                let others = dist.sample(&mut rng);
                let b = fast.bid(v).unwrap();
                let c = fast.context_of(v);
                let a = slow.choose(c).unwrap();
                assert_eq!(b, (a + 1) as f64 / k as f64);
                let mut r = Vec::new();
                for cc in 0..m {
                    for aa in a..k {
                        let bid = (aa + 1) as f64 / k as f64;
                        let margin = (cc + 1) as f64 / m as f64 - bid;
                        r.push(if others <= bid { margin } else { 0.0 });
                    }
                }
                slow.observe(a, &Reveal::new(a, m, k, r).unwrap()).unwrap();
                fast.observe(&CensoredOutcome::from_auction(b, others).unwrap()).unwrap();
                for cc in 0..m {
                    assert_eq!(fast.state().active_set(cc), slow.active_set(cc));
                }
            }
            assert!(slow.eliminated_total() > 0);
            fast.state().check_invariants().unwrap();
        }
    }
}
