//! Multi-level interval-splitting UCB.
//!
//! Rounds are split across levels `0..=L`. Level `ℓ` estimates the interval
//! probabilities only from its own rounds, and a round joins level `ℓ` when
//! some surviving candidate still has a level-`ℓ` width above `2^{-ℓ}`. The
//! width at level `ℓ` is computed from level-`ℓ` bids and lower-level
//! estimates only, so level-`ℓ` prices stay independent given the bids.
//!
//! Rounds `1..=T0`, `T0 = (L+1)·⌈√T⌉`, bid 0 and fill the levels in blocks
//! of `⌈√T⌉`. Level 0 is never used again except for its initial estimate.

use crate::error::{check_unit, Error, Result};
use crate::feedback::CensoredOutcome;
use crate::grid::{ceil_sqrt, GridSpec};
use crate::policies::BidPolicy;

/// Bids and interval hits of one level.
#[derive(Clone, Debug)]
pub struct LevelHistory {
    /// `n_i = #{s in level: b_s <= b^i}`.
    counts: Vec<u64>,
    /// `#{s in level: b_s <= b^i, b^i < m_s <= b^{i+1}}`.
    hits: Vec<u64>,
    rounds: usize,
}

impl LevelHistory {
    fn new(k: usize) -> Self {
        Self { counts: vec![0; k], hits: vec![0; k], rounds: 0 }
    }

    fn record(&mut self, played: usize, interval: Option<usize>) {
        for n in &mut self.counts[played..] {
            *n += 1;
        }
        // A loss reveals `m > b_s`, so its interval is at or above `played`
        // and the gate `b_s <= b^i` holds automatically.
        if let Some(j) = interval {
            self.hits[j] += 1;
        }
        self.rounds += 1;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// `p̂_i = hits_i / n_i`; zero where `n_i = 0`.
    pub fn estimates(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(&self.hits)
            .map(|(&n, &h)| if n == 0 { 0.0 } else { h as f64 / n as f64 })
            .collect()
    }
}

/// Constants of the width formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WidthParams {
    pub gamma: f64,
    /// `log(LKT)`.
    pub log_lkt: f64,
    /// `5/√T`.
    pub floor: f64,
}

/// `w_i = γ(√(λ·Σ_{j>=i} prev_j/n_j) + λ(1/n_i + 5/√T))` for each
/// candidate. Sees level-`ℓ` bid counts and lower-level estimates only.
pub fn widths(params: &WidthParams, prev: &[f64], counts: &[u64], candidates: &[usize]) -> Vec<f64> {
    let k = counts.len();
    let mut tail = vec![0.0; k + 1];
    for j in (0..k).rev() {
        tail[j] = tail[j + 1] + prev[j] / counts[j] as f64;
    }
    let lam = params.log_lkt;
    candidates
        .iter()
        .map(|&i| params.gamma * ((lam * tail[i]).sqrt() + lam * (1.0 / counts[i] as f64 + params.floor)))
        .collect()
}

/// What the level loop did on one round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace {
    /// Level the round joins, `1..=L`.
    pub level: usize,
    pub bid_index: usize,
    /// `B^0, ..., B^{level-1}`.
    pub candidates: Vec<Vec<usize>>,
    /// Widths of the candidates at levels `1..=level`, aligned with
    /// `candidates[ℓ-1]`.
    pub widths: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct MlIsUcb {
    grid: GridSpec,
    horizon: usize,
    levels: usize,
    block: usize,
    warmup: usize,
    params: WidthParams,
    history: Vec<LevelHistory>,
    initial: Vec<f64>,
    round: usize,
    pending: Option<(usize, usize)>,
}

impl MlIsUcb {
    /// `K` bids on `{0, 1/K, ..., (K-1)/K}` and `L` levels. Requires
    /// `T0 = (L+1)·⌈√T⌉ < T`.
    pub fn new(horizon: usize, k: usize, levels: usize, gamma: f64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidConfig("ML-IS-UCB needs L >= 1".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma must be positive, got {gamma}")));
        }
        let block = ceil_sqrt(horizon);
        let warmup = (levels + 1) * block;
        if warmup >= horizon {
            return Err(Error::HorizonTooSmall { horizon, warmup });
        }
        let grid = GridSpec::offset(k)?;
        let params = WidthParams {
            gamma,
            log_lkt: ((levels * k) as f64 * horizon as f64).ln(),
            floor: 5.0 / (horizon as f64).sqrt(),
        };
        Ok(Self {
            grid,
            horizon,
            levels,
            block,
            warmup,
            params,
            history: (0..=levels).map(|_| LevelHistory::new(k)).collect(),
            initial: vec![0.0; k],
            round: 0,
            pending: None,
        })
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn params(&self) -> &WidthParams {
        &self.params
    }

    pub fn level(&self, level: usize) -> &LevelHistory {
        &self.history[level]
    }

    /// `p̂^0` from the level-0 block.
    pub fn initial_estimates(&self) -> &[f64] {
        &self.initial
    }

    /// Run the level loop for value `v` without changing state.
    pub fn plan(&self, value: f64) -> Result<RoundTrace> {
        self.level_loop(value, true)
    }

    fn level_loop(&self, value: f64, record: bool) -> Result<RoundTrace> {
        let k = self.grid.len();
        let mut candidates: Vec<usize> = (0..k).collect();
        let mut prev = self.initial.clone();
        let mut trace = RoundTrace { level: 0, bid_index: 0, candidates: Vec::new(), widths: Vec::new() };
        for level in 1..=self.levels {
            let hist = &self.history[level];
            let w = widths(&self.params, &prev, &hist.counts, &candidates);
            let threshold = 0.5f64.powi(level as i32);
            if record {
                trace.candidates.push(candidates.clone());
            }
            let wide = candidates.iter().zip(&w).find(|(_, &wi)| wi > threshold).map(|(&i, _)| i);
            if record {
                trace.widths.push(w.clone());
            }
            if let Some(i) = wide {
                trace.level = level;
                trace.bid_index = i;
                return Ok(trace);
            }
            let est = hist.estimates();
            let mut tail = vec![0.0; k + 1];
            for j in (0..k).rev() {
                tail[j] = tail[j + 1] + est[j];
            }
            let index: Vec<f64> = candidates
                .iter()
                .zip(&w)
                .map(|(&i, &wi)| (value - self.grid.point(i)) * (1.0 - tail[i]) + wi)
                .collect();
            let top = index.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            candidates = candidates
                .iter()
                .zip(&index)
                .filter(|(_, &x)| x >= top - 2.0 * threshold)
                .map(|(&i, _)| i)
                .collect();
            prev = est;
        }
        Err(Error::LevelsExhausted { round: self.round + 1 })
    }
}

impl BidPolicy for MlIsUcb {
    fn name(&self) -> &'static str {
        "ml_is_ucb"
    }

    fn bid(&mut self, value: f64) -> Result<f64> {
        check_unit("value", value)?;
        let (level, i) = if self.round < self.warmup {
            (self.round / self.block, 0)
        } else {
            let trace = self.level_loop(value, false)?;
            (trace.level, trace.bid_index)
        };
        self.pending = Some((level, i));
        Ok(self.grid.point(i))
    }

    fn observe(&mut self, outcome: &CensoredOutcome) -> Result<()> {
        let (level, played) = self.pending.take().expect("observe called without a preceding bid");
        let interval = outcome.revealed().and_then(|m| self.grid.interval_of(m));
        self.history[level].record(played, interval);
        self.round += 1;
        if self.round == self.warmup {
            self.initial = self.history[0].estimates();
        }
        Ok(())
    }

    fn bid_points(&self) -> Vec<f64> {
        self.grid.points()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::BidDistribution;
    use crate::grid::ceil_log2;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn play(p: &mut MlIsUcb, v: f64, m: f64) -> f64 {
        let b = p.bid(v).unwrap();
        p.observe(&CensoredOutcome::from_auction(b, m).unwrap()).unwrap();
        b
    }

    #[test]
    fn default_sizes() {
        let t = 10_000;
        let p = MlIsUcb::new(t, ceil_sqrt(t), ceil_log2(t), 3.0).unwrap();
        assert_eq!((p.grid().len(), p.levels(), p.warmup()), (100, 14, 1500));
        assert!(matches!(
            MlIsUcb::new(16, 4, ceil_log2(16), 3.0),
            Err(Error::HorizonTooSmall { horizon: 16, warmup: 20 })
        ));
    }

    #[test]
    fn warmup_bids_zero_in_level_blocks() {
        let t = 400;
        let mut p = MlIsUcb::new(t, 20, ceil_log2(t), 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..p.warmup() {
            assert_eq!(play(&mut p, rng.random(), rng.random()), 0.0);
        }
        for level in 0..=p.levels() {
            assert_eq!(p.level(level).rounds(), 20);
            assert!(p.level(level).counts().iter().all(|&n| n == 20));
        }
    }

    #[test]
    fn initial_estimates_under_uniform_prices() {
        // Monte Carlo: K = 100, block of 10^4 level-0 prices.
        let t = 100_000_000;
        let mut p = MlIsUcb::new(t, 100, 2, 3.0).unwrap();
        let dist = BidDistribution::uniform();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..p.warmup() {
            play(&mut p, 1.0, dist.sample(&mut rng));
        }
        let est = p.initial_estimates();
        let total: f64 = est.iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "all prices are positive: {total}");
        // Each p̂_i ~ Bin(10^4, 0.01)/10^4: sd 1e-3.
        assert!(est.iter().all(|&x| (x - 0.01).abs() < 5e-3));
    }

    #[test]
    fn counts_gate_on_bid_at_or_below_grid_point() {
        let mut h = LevelHistory::new(10);
        for played in [0, 3, 7] {
            h.record(played, None);
        }
        assert_eq!(h.counts()[5], 2);
    }

    #[test]
    fn interval_indicator_from_censored_data() {
        let g = GridSpec::offset(10).unwrap();
        let mut h = LevelHistory::new(10);
        // b = 0.2 lost to 0.45: counts for (0.4, 0.5].
        let lost = CensoredOutcome::from_auction(0.2, 0.45).unwrap();
        h.record(2, lost.revealed().and_then(|m| g.interval_of(m)));
        assert_eq!(h.estimates()[4], 1.0);
        // b = 0.2 won: contributes 0.
        h.record(2, None);
        assert_eq!(h.estimates()[4], 0.5);
        // b = 0.6 is excluded from (0.4, 0.5].
        let high = CensoredOutcome::from_auction(0.6, 0.8).unwrap();
        h.record(6, high.revealed().and_then(|m| g.interval_of(m)));
        assert_eq!(h.counts()[4], 2);
        assert_eq!(h.estimates()[4], 0.5);
    }

    #[test]
    fn wide_first_level_bids_smallest_wide_candidate() {
        let t = 4096;
        let mut p = MlIsUcb::new(t, 64, ceil_log2(t), 3.0).unwrap();
        for _ in 0..p.warmup() {
            play(&mut p, 1.0, 0.5);
        }
        let trace = p.plan(0.7).unwrap();
        assert_eq!(trace.level, 1);
        assert_eq!(trace.bid_index, 0);
        assert!(trace.widths[0][0] > 0.5);
        let before = p.level(1).rounds();
        play(&mut p, 0.7, 0.5);
        assert_eq!(p.level(1).rounds(), before + 1);
    }

    /// Drive a small-γ instance and check the structural invariants on every
    /// round.
    fn structural_run(seed: u64, gamma: f64) -> Vec<usize> {
        let t = 1 << 12;
        let mut p = MlIsUcb::new(t, ceil_sqrt(t), ceil_log2(t), gamma).unwrap();
        let dist = BidDistribution::uniform();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut per_level = vec![0; p.levels() + 1];
        for s in 0..t {
            let v: f64 = rng.random();
            if s >= p.warmup() {
                let trace = p.plan(v).unwrap();
                assert_eq!(trace.candidates[0], (0..p.grid().len()).collect::<Vec<_>>());
                for w in trace.candidates.windows(2) {
                    assert!(w[1].iter().all(|i| w[0].contains(i)));
                    assert!(!w[1].is_empty());
                }
                for l in 1..=p.levels() {
                    assert!(p.level(l).counts().iter().all(|&n| n >= p.block as u64));
                }
                per_level[trace.level] += 1;
            }
            play(&mut p, v, dist.sample(&mut rng));
            let assigned: usize = (0..=p.levels()).map(|l| p.level(l).rounds()).sum();
            assert_eq!(assigned, s + 1);
        }
        per_level
    }

    #[test]
    fn levels_partition_rounds_and_candidates_nest() {
        let per_level = structural_run(5, 0.02);
        // Small γ lets rounds reach deeper levels.
        assert!(per_level.iter().skip(2).sum::<usize>() > 0, "{per_level:?}");
    }

    #[test]
    fn width_ignores_level_outcomes() {
        // Same level-ℓ bids, different level-ℓ prices: identical widths.
        let t = 1 << 12;
        let k = ceil_sqrt(t);
        let mut a = MlIsUcb::new(t, k, ceil_log2(t), 0.05).unwrap();
        let mut b = a.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..a.warmup() {
            let m: f64 = rng.random();
            play(&mut a, 1.0, m);
            play(&mut b, 1.0, m);
        }
        let mut rng_b = ChaCha8Rng::seed_from_u64(12);
        let target = 2;
        for _ in 0..300 {
            let v: f64 = rng.random();
            let ta = a.plan(v).unwrap();
            let tb = b.plan(v).unwrap();
            if ta.level < target {
                // Lower levels see identical data in both states.
                assert_eq!(ta, tb);
                let m: f64 = rng.random();
                play(&mut a, v, m);
                play(&mut b, v, m);
                continue;
            }
            let depth = target.min(ta.widths.len()).min(tb.widths.len());
            assert_eq!(ta.widths[depth - 1], tb.widths[depth - 1]);
            // Feed level-`target` rounds different prices but the same bid.
            let bid = a.grid().point(ta.bid_index);
            a.pending = Some((ta.level, ta.bid_index));
            a.observe(&CensoredOutcome::from_auction(bid, rng.random()).unwrap()).unwrap();
            b.pending = Some((ta.level, ta.bid_index));
            b.observe(&CensoredOutcome::from_auction(bid, rng_b.random()).unwrap()).unwrap();
        }
        assert_eq!(a.level(target).counts(), b.level(target).counts());
    }

    #[test]
    fn widths_are_pure_in_their_inputs() {
        let params = WidthParams { gamma: 3.0, log_lkt: 10.0, floor: 0.05 };
        let counts = vec![4, 6, 9, 12];
        let prev = vec![0.1, 0.2, 0.3, 0.4];
        let w = widths(&params, &prev, &counts, &[0, 2]);
        let tail0: f64 = (0..4).map(|j| prev[j] / counts[j] as f64).sum();
        let tail2: f64 = (2..4).map(|j| prev[j] / counts[j] as f64).sum();
        assert!((w[0] - 3.0 * ((10.0 * tail0).sqrt() + 10.0 * (0.25 + 0.05))).abs() < 1e-12);
        assert!((w[1] - 3.0 * ((10.0 * tail2).sqrt() + 10.0 * (1.0 / 9.0 + 0.05))).abs() < 1e-12);
    }

    #[test]
    fn widths_never_fall_below_floor() {
        let t = 1 << 16;
        let p = MlIsUcb::new(t, ceil_sqrt(t), ceil_log2(t), 3.0).unwrap();
        let floor = p.params().gamma * p.params().log_lkt * p.params().floor;
        assert!(floor > 0.5f64.powi(p.levels() as i32));
    }
}
