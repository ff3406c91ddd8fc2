use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distribution::{BidDistribution, TwoPointBranch};
use crate::error::{Error, Result};
use crate::feedback::CensoredOutcome;

/// Draws `m_t ~ G` iid from its own stream.
#[derive(Clone, Debug)]
pub struct AuctionEnv {
    dist: BidDistribution,
    rng: ChaCha8Rng,
}

impl AuctionEnv {
    pub fn new(dist: BidDistribution, seed: u64) -> Self {
        Self { dist, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn dist(&self) -> &BidDistribution {
        &self.dist
    }

    /// Censored outcome for the policy, plus the true `m_t` for the harness.
    pub fn step(&mut self, bid: f64) -> Result<(CensoredOutcome, f64)> {
        let m = self.dist.sample(&mut self.rng);
        Ok((CensoredOutcome::from_auction(bid, m)?, m))
    }
}

/// The pair of price distributions that no policy can tell apart quickly
/// when `v ≡ 1`: atoms at 1/3 and 2/3 with masses `1/2 ± Δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPointInstance {
    pub delta: f64,
}

impl TwoPointInstance {
    /// `Δ = 1/(4√T)`.
    pub fn for_horizon(horizon: usize) -> Result<Self> {
        if horizon < 4 {
            return Err(Error::InvalidConfig(format!("two-point instance needs T >= 4, got {horizon}")));
        }
        Ok(Self { delta: 0.25 / (horizon as f64).sqrt() })
    }

    pub fn dist(&self, branch: TwoPointBranch) -> BidDistribution {
        BidDistribution::two_point(self.delta, branch).expect("Δ < 1/4 for T >= 4")
    }

    pub fn pair(&self) -> (BidDistribution, BidDistribution) {
        (self.dist(TwoPointBranch::G1), self.dist(TwoPointBranch::G2))
    }

    /// `max_b (1 - b)G(b)`: `(1 + 2Δ)/3` under G1, `1/3` under G2.
    pub fn optimal_reward(&self, branch: TwoPointBranch) -> f64 {
        match branch {
            TwoPointBranch::G1 => (1.0 + 2.0 * self.delta) / 3.0,
            TwoPointBranch::G2 => 1.0 / 3.0,
        }
    }

    /// `√T/(24e²)`: below this no policy's averaged regret can go.
    pub fn regret_floor(horizon: usize) -> f64 {
        (horizon as f64).sqrt() / (24.0 * std::f64::consts::E.powi(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{merge_points, GridSpec};
    use crate::oracle::GridOracle;

    #[test]
    fn step_examples() {
        let mut env = AuctionEnv::new(BidDistribution::uniform(), 1);
        for _ in 0..100 {
            let (o, _) = env.step(1.0).unwrap();
            assert!(o.won() && o.revealed().is_none());
        }
        let (o, m) = env.step(0.0).unwrap();
        assert_eq!(o.revealed(), Some(m));
        let g1 = BidDistribution::two_point(0.1, TwoPointBranch::G1).unwrap();
        assert!((g1.cdf(0.5) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn win_rate_at_half_under_two_point() {
        let g1 = BidDistribution::two_point(0.1, TwoPointBranch::G1).unwrap();
        let mut env = AuctionEnv::new(g1, 3);
        let n = 100_000;
        let wins = (0..n).filter(|_| env.step(0.5).unwrap().0.won()).count();
        let p = wins as f64 / n as f64;
        assert!((p - 0.6).abs() < 3.0 * (0.24f64 / n as f64).sqrt(), "{p}");
    }

    #[test]
    fn delta_from_horizon() {
        let inst = TwoPointInstance::for_horizon(10_000).unwrap();
        assert!((inst.delta - 0.0025).abs() < 1e-15);
        let g1 = inst.dist(TwoPointBranch::G1);
        assert!((g1.cdf(0.5) - 0.5025).abs() < 1e-15);
        assert!((1.0 - g1.cdf(0.5) - 0.4975).abs() < 1e-15);
        assert!(TwoPointInstance::for_horizon(3).is_err());
        assert!((TwoPointInstance::regret_floor(10_000) - 100.0 / (24.0 * std::f64::consts::E.powi(2))).abs() < 1e-12);
        assert!((TwoPointInstance::regret_floor(1) - 0.0056).abs() < 1e-4);
    }

    #[test]
    fn optimal_rewards_match_fine_grid() {
        let inst = TwoPointInstance::for_horizon(1 << 12).unwrap();
        let pts = GridSpec::offset(10_000).unwrap().points();
        let pts = merge_points(&[&pts, &[1.0 / 3.0, 2.0 / 3.0, 1.0]]);
        for branch in [TwoPointBranch::G1, TwoPointBranch::G2] {
            let best = GridOracle::new(pts.clone(), &inst.dist(branch)).best(1.0);
            // Equal up to rounding in `(1 - b)·G(b)`.
            assert!((best.reward - inst.optimal_reward(branch)).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn atom_frequencies() {
        let inst = TwoPointInstance { delta: 0.1 };
        for (branch, p_low) in [(TwoPointBranch::G1, 0.6), (TwoPointBranch::G2, 0.4)] {
            let mut env = AuctionEnv::new(inst.dist(branch), 8);
            let n = 100_000;
            let low = (0..n).filter(|_| env.step(0.0).unwrap().1 < 0.5).count();
            let f = low as f64 / n as f64;
            let se = (p_low * (1.0 - p_low) / n as f64).sqrt();
            assert!((f - p_low).abs() < 3.0 * se, "{f}");
        }
    }
}
