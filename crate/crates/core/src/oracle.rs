//! The bidder who knows `G`: grid argmax of `(v - b)·G(b)`.
//!
//! Ties go to the largest maximizer so that `v ↦ b*(v)` is non-decreasing.

use crate::distribution::BidDistribution;
use crate::grid::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleBid {
    pub index: usize,
    pub bid: f64,
    pub reward: f64,
}

/// Grid points with `G` tabulated once, for repeated per-round queries.
#[derive(Clone, Debug)]
pub struct GridOracle {
    points: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridOracle {
    pub fn new(points: Vec<f64>, dist: &BidDistribution) -> Self {
        assert!(!points.is_empty(), "oracle grid must be nonempty");
        let cdf = points.iter().map(|&b| dist.cdf(b)).collect();
        Self { points, cdf }
    }

    pub fn from_grid(grid: &GridSpec, dist: &BidDistribution) -> Self {
        Self::new(grid.points(), dist)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn best(&self, value: f64) -> OracleBid {
        let (index, reward) = self
            .points
            .iter()
            .zip(&self.cdf)
            .map(|(b, g)| (value - b) * g)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, r)| if r >= best.1 { (i, r) } else { best });
        OracleBid { index, bid: self.points[index], reward }
    }
}

/// Best grid bid and its expected reward for value `v`.
pub fn oracle_best_bid(value: f64, dist: &BidDistribution, grid: &GridSpec) -> OracleBid {
    GridOracle::from_grid(grid, dist).best(value)
}

/// `Σ_t max_b R(v_t, b)` over the grid: the regret baseline of a value
/// trajectory.
pub fn oracle_trajectory_reward(values: &[f64], dist: &BidDistribution, points: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let oracle = GridOracle::new(points.to_vec(), dist);
    values.iter().map(|&v| oracle.best(v).reward).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{DistributionSpec, TwoPointBranch};
    use crate::grid::GridStyle;
    use crate::reward::{expected_reward, quantize_value, RewardQuery};
    use proptest::prelude::*;

    /// Independent full scan through `expected_reward`, largest maximizer.
    fn naive_best(value: f64, dist: &BidDistribution, points: &[f64]) -> (f64, f64) {
        let mut best = (points[0], expected_reward(RewardQuery::new(value, points[0]).unwrap(), dist));
        for &b in &points[1..] {
            let r = expected_reward(RewardQuery::new(value, b).unwrap(), dist);
            if r >= best.1 {
                best = (b, r);
            }
        }
        best
    }

    fn random_dist(seed: u64, kind: u8) -> BidDistribution {
        let spec = match kind % 3 {
            0 => DistributionSpec::RandomHistogram { bins: 1 + (seed % 12) as usize, seed },
            1 => {
                let n = 1 + (seed % 6) as usize;
                let atoms: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
                let masses = (0..n).map(|i| 1.0 + ((seed >> i) % 5) as f64).collect();
                DistributionSpec::Discrete { atoms, masses }
            }
            _ => DistributionSpec::TruncatedNormal {
                mean: (seed % 100) as f64 / 100.0,
                std_dev: 0.05 + (seed % 7) as f64 / 20.0,
            },
        };
        BidDistribution::new(spec).unwrap()
    }

    #[test]
    fn uniform_value_one_bids_half() {
        let grid = GridSpec::unit(100).unwrap();
        let best = oracle_best_bid(1.0, &BidDistribution::uniform(), &grid);
        assert_eq!(best.bid, 0.5);
        assert_eq!(best.reward, 0.25);
        assert_eq!(naive_best(1.0, &BidDistribution::uniform(), &grid.points()), (0.5, 0.25));
    }

    #[test]
    fn zero_value_tie_outcome() {
        // Every bid with G(b) = 0 earns exactly 0; the largest such grid point
        // wins the tie. Under Uniform no grid point of {1/K..1} has G = 0, so
        // the least negative reward -1/K^2 at b = 1/K is chosen.
        let grid = GridSpec::unit(10).unwrap();
        let best = oracle_best_bid(0.0, &BidDistribution::uniform(), &grid);
        assert_eq!(best.bid, 0.1);
        assert!((best.reward + 0.01).abs() < 1e-15);
        // Offset grid contains b = 0 with reward 0.
        let best = oracle_best_bid(0.0, &BidDistribution::uniform(), &GridSpec::offset(10).unwrap());
        assert_eq!((best.bid, best.reward), (0.0, 0.0));
        // Two-point: G = 0 below 1/3, so the largest grid point below 1/3 wins.
        let g2 = BidDistribution::two_point(0.1, TwoPointBranch::G2).unwrap();
        let best = oracle_best_bid(0.0, &g2, &GridSpec::offset(10).unwrap());
        assert_eq!((best.bid, best.reward), (0.3, 0.0));
    }

    #[test]
    fn two_point_optima_on_fine_grid() {
        let delta = 0.1;
        let mut points = GridSpec::offset(10_000).unwrap().points();
        points.extend([1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let points = crate::grid::merge_points(&[&points]);
        let g1 = BidDistribution::two_point(delta, TwoPointBranch::G1).unwrap();
        let g2 = BidDistribution::two_point(delta, TwoPointBranch::G2).unwrap();
        let o1 = GridOracle::new(points.clone(), &g1).best(1.0);
        let o2 = GridOracle::new(points, &g2).best(1.0);
        assert!((o1.reward - (1.0 + 2.0 * delta) / 3.0).abs() < 1e-15);
        assert!((o2.reward - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn trajectory_reward_examples() {
        let u = BidDistribution::uniform();
        let pts = GridSpec::unit(100).unwrap().points();
        assert_eq!(oracle_trajectory_reward(&[1.0, 1.0], &u, &pts), 0.5);
        assert_eq!(oracle_trajectory_reward(&[], &u, &pts), 0.0);
        let zero_pts = GridSpec::offset(10).unwrap().points();
        assert_eq!(oracle_trajectory_reward(&[0.0, 0.0, 0.0], &u, &zero_pts), 0.0);
    }

    proptest! {
        #[test]
        fn tabulated_oracle_matches_naive_scan(seed in 0u64..10_000, kind in 0u8..3, k in 1usize..80, v in 0.0f64..=1.0) {
            let dist = random_dist(seed, kind);
            for style in [GridStyle::Offset, GridStyle::Unit] {
                let grid = GridSpec::new(k, style).unwrap();
                let fast = oracle_best_bid(v, &dist, &grid);
                let (bid, reward) = naive_best(v, &dist, &grid.points());
                prop_assert_eq!(fast.bid, bid);
                prop_assert_eq!(fast.reward, reward);
            }
        }

        #[test]
        fn optimal_bid_is_monotone_in_value(seed in 0u64..10_000, kind in 0u8..3, k in 2usize..60, m in 2usize..60) {
            let dist = random_dist(seed, kind);
            let oracle = GridOracle::from_grid(&GridSpec::unit(k).unwrap(), &dist);
            let mut prev = f64::NEG_INFINITY;
            for c in 1..=m {
                let b = oracle.best(c as f64 / m as f64).bid;
                prop_assert!(b >= prev);
                prev = b;
            }
        }

        #[test]
        fn quantized_oracle_gap_within_bound(seed in 0u64..10_000, kind in 0u8..3, m in 2usize..40, k in 2usize..40) {
            let dist = random_dist(seed, kind);
            let horizon = 200;
            // "Continuous" optimum on a grid ten times finer than either quantization.
            let fine = GridOracle::new(GridSpec::offset(10 * k.max(m)).unwrap().points().into_iter().chain([1.0]).collect(), &dist);
            let coarse = GridOracle::from_grid(&GridSpec::unit(k).unwrap(), &dist);
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut total = 0.0;
            for _ in 0..horizon {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = (state >> 11) as f64 / (1u64 << 53) as f64;
                let vq = quantize_value(v, m).unwrap();
                total += fine.best(v).reward - coarse.best(vq).reward;
            }
            prop_assert!(total <= crate::reward::quantization_regret_gap(m, k, horizon) + 1e-9);
        }
    }
}
