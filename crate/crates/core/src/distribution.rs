//! Distributions of the highest competing bid `m_t` (and of demand in the
//! inventory application). Every family lives on `[0, 1]`, exposes an exact
//! CDF and draws samples from a caller-owned generator.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPointBranch {
    /// Mass `1/2 + Δ` on `1/3`.
    G1,
    /// Mass `1/2 - Δ` on `1/3`.
    G2,
}

/// Serializable description of a distribution family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform,
    /// Atoms at 1/3 and 2/3 with masses `(1/2 ± Δ, 1/2 ∓ Δ)`.
    TwoPoint { delta: f64, branch: TwoPointBranch },
    /// Step CDF from a breakpoint list.
    Discrete { atoms: Vec<f64>, masses: Vec<f64> },
    /// Piecewise-constant density on the bins `edges[j]..edges[j+1]`.
    Histogram { edges: Vec<f64>, weights: Vec<f64> },
    /// Histogram with `bins` equal-width bins and Dirichlet(1) weights drawn
    /// from `seed`.
    RandomHistogram { bins: usize, seed: u64 },
    /// Normal(mean, std_dev) conditioned on `[0, 1]`.
    TruncatedNormal { mean: f64, std_dev: f64 },
}

#[derive(Clone, Debug)]
enum Family {
    Uniform,
    Discrete { atoms: Vec<f64>, cumulative: Vec<f64> },
    Histogram { edges: Vec<f64>, cumulative: Vec<f64> },
    TruncatedNormal { mean: f64, std_dev: f64, lower: f64, mass: f64 },
}

/// A validated distribution on `[0, 1]` with precomputed lookup tables.
#[derive(Clone, Debug)]
pub struct BidDistribution {
    spec: DistributionSpec,
    family: Family,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

impl BidDistribution {
    pub fn new(spec: DistributionSpec) -> Result<Self> {
        let family = match &spec {
            DistributionSpec::Uniform => Family::Uniform,
            DistributionSpec::TwoPoint { delta, branch } => {
                if !(*delta > 0.0 && *delta < 0.25) {
                    return Err(Error::InvalidDistribution(format!(
                        "two-point Δ = {delta} must lie in (0, 1/4)"
                    )));
                }
                let low = match branch {
                    TwoPointBranch::G1 => 0.5 + delta,
                    TwoPointBranch::G2 => 0.5 - delta,
                };
                discrete(&[1.0 / 3.0, 2.0 / 3.0], &[low, 1.0 - low])?
            }
            DistributionSpec::Discrete { atoms, masses } => discrete(atoms, masses)?,
            DistributionSpec::Histogram { edges, weights } => histogram(edges, weights)?,
            DistributionSpec::RandomHistogram { bins, seed } => {
                let (edges, weights) = random_histogram(*bins, *seed)?;
                histogram(&edges, &weights)?
            }
            DistributionSpec::TruncatedNormal { mean, std_dev } => {
                if !(mean.is_finite() && *std_dev > 0.0 && std_dev.is_finite()) {
                    return Err(Error::InvalidDistribution(format!(
                        "truncated normal needs finite mean and positive std_dev, got ({mean}, {std_dev})"
                    )));
                }
                let lower = std_normal_cdf(-mean / std_dev);
                let mass = std_normal_cdf((1.0 - mean) / std_dev) - lower;
                if mass.is_nan() || mass <= 1e-12 {
                    return Err(Error::InvalidDistribution(
                        "truncated normal has no mass on [0, 1]".into(),
                    ));
                }
                Family::TruncatedNormal { mean: *mean, std_dev: *std_dev, lower, mass }
            }
        };
        Ok(Self { spec, family })
    }

    pub fn uniform() -> Self {
        Self::new(DistributionSpec::Uniform).expect("uniform is valid")
    }

    pub fn two_point(delta: f64, branch: TwoPointBranch) -> Result<Self> {
        Self::new(DistributionSpec::TwoPoint { delta, branch })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn family_name(&self) -> &'static str {
        match self.spec {
            DistributionSpec::Uniform => "uniform",
            DistributionSpec::TwoPoint { .. } => "two_point",
            DistributionSpec::Discrete { .. } => "discrete",
            DistributionSpec::Histogram { .. } => "histogram",
            DistributionSpec::RandomHistogram { .. } => "random_histogram",
            DistributionSpec::TruncatedNormal { .. } => "truncated_normal",
        }
    }

    /// `G(b) = P(m <= b)`.
    pub fn cdf(&self, b: f64) -> f64 {
        if b >= 1.0 {
            return 1.0;
        }
        if b < 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Uniform => b,
            Family::Discrete { atoms, cumulative } => {
                // Number of atoms <= b.
                let n = atoms.partition_point(|&a| a <= b);
                if n == 0 {
                    0.0
                } else {
                    cumulative[n - 1]
                }
            }
            Family::Histogram { edges, cumulative } => {
                let j = edges.partition_point(|&e| e <= b).saturating_sub(1);
                let j = j.min(edges.len() - 2);
                let frac = (b - edges[j]) / (edges[j + 1] - edges[j]);
                cumulative[j] + frac * (cumulative[j + 1] - cumulative[j])
            }
            Family::TruncatedNormal { mean, std_dev, lower, mass } => {
                ((std_normal_cdf((b - mean) / std_dev) - lower) / mass).clamp(0.0, 1.0)
            }
        }
    }

    /// `∫_0^a G(x) dx`, the expected overage `E[(a - m)^+]`.
    pub fn integrated_cdf(&self, a: f64) -> f64 {
        let a = a.clamp(0.0, 1.0);
        match &self.family {
            Family::Uniform => 0.5 * a * a,
            Family::Discrete { atoms, cumulative } => {
                let mut prev = 0.0;
                let mut total = 0.0;
                for (x, c) in atoms.iter().zip(cumulative) {
                    total += (c - prev) * (a - x).max(0.0);
                    prev = *c;
                }
                total
            }
            Family::Histogram { edges, cumulative } => {
                let mut total = 0.0;
                for j in 0..edges.len() - 1 {
                    let (lo, hi) = (edges[j], edges[j + 1]);
                    if a <= lo {
                        break;
                    }
                    let top = a.min(hi);
                    let g_lo = cumulative[j];
                    let g_top = self.cdf(top).max(g_lo);
                    total += 0.5 * (g_lo + g_top) * (top - lo);
                }
                total
            }
            Family::TruncatedNormal { .. } => {
                // Composite Simpson; the integrand is smooth.
                let n = 2000;
                let h = a / n as f64;
                if h == 0.0 {
                    return 0.0;
                }
                let mut s = self.cdf(0.0) + self.cdf(a);
                for i in 1..n {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    s += w * self.cdf(i as f64 * h);
                }
                s * h / 3.0
            }
        }
    }

    /// Atoms of the distribution; empty for continuous families.
    pub fn atoms(&self) -> &[f64] {
        match &self.family {
            Family::Discrete { atoms, .. } => atoms,
            _ => &[],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match &self.family {
            Family::Uniform => u,
            Family::Discrete { atoms, cumulative } => {
                let i = cumulative.partition_point(|&c| c <= u).min(atoms.len() - 1);
                atoms[i]
            }
            Family::Histogram { edges, cumulative } => {
                let j = cumulative
                    .partition_point(|&c| c <= u)
                    .saturating_sub(1)
                    .min(edges.len() - 2);
                let width = cumulative[j + 1] - cumulative[j];
                let frac = if width > 0.0 { (u - cumulative[j]) / width } else { 0.0 };
                edges[j] + frac * (edges[j + 1] - edges[j])
            }
            Family::TruncatedNormal { .. } => {
                // Inverse CDF by bisection; one uniform per draw keeps the
                // stream position independent of the parameters.
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }
}

fn discrete(atoms: &[f64], masses: &[f64]) -> Result<Family> {
    if atoms.is_empty() || atoms.len() != masses.len() {
        return Err(Error::InvalidDistribution(
            "discrete needs equally many atoms and masses (at least one)".into(),
        ));
    }
    if atoms.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::InvalidDistribution("atoms must lie in [0, 1]".into()));
    }
    if atoms.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidDistribution("atoms must be strictly increasing".into()));
    }
    let cumulative = normalized_cumulative(masses)?;
    Ok(Family::Discrete { atoms: atoms.to_vec(), cumulative })
}

fn histogram(edges: &[f64], weights: &[f64]) -> Result<Family> {
    if weights.is_empty() || edges.len() != weights.len() + 1 {
        return Err(Error::InvalidDistribution(
            "histogram needs bins + 1 edges and at least one bin".into(),
        ));
    }
    if edges[0] != 0.0 || *edges.last().unwrap() != 1.0 {
        return Err(Error::InvalidDistribution("histogram edges must span [0, 1]".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidDistribution("histogram edges must be strictly increasing".into()));
    }
    let mut cumulative = vec![0.0];
    cumulative.extend(normalized_cumulative(weights)?);
    Ok(Family::Histogram { edges: edges.to_vec(), cumulative })
}

fn normalized_cumulative(masses: &[f64]) -> Result<Vec<f64>> {
    if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::InvalidDistribution("masses must be finite and non-negative".into()));
    }
    let total: f64 = masses.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidDistribution("total mass must be positive".into()));
    }
    let mut acc = 0.0;
    let mut out: Vec<f64> = masses
        .iter()
        .map(|m| {
            acc += m;
            acc / total
        })
        .collect();
    *out.last_mut().unwrap() = 1.0;
    Ok(out)
}

fn random_histogram(bins: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if bins == 0 {
        return Err(Error::InvalidDistribution("random histogram needs at least one bin".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..=bins).map(|j| j as f64 / bins as f64).collect();
    // Exp(1) draws normalize to a Dirichlet(1, ..., 1) weight vector.
    let weights = (0..bins)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    Ok((edges, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kolmogorov_distance(dist: &BidDistribution, n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        xs.sort_by(|a, b| a.total_cmp(b));
        let mut worst: f64 = 0.0;
        let mut i = 0;
        while i < xs.len() {
            let x = xs[i];
            let mut j = i;
            while j < xs.len() && xs[j] == x {
                j += 1;
            }
            let below = i as f64 / n as f64;
            let upto = j as f64 / n as f64;
            // Left limit of G at x is approximated by G(x - tiny).
            let g_left = dist.cdf(x - 1e-12);
            worst = worst.max((upto - dist.cdf(x)).abs()).max((below - g_left).abs());
            i = j;
        }
        worst
    }

    fn families() -> Vec<BidDistribution> {
        vec![
            BidDistribution::uniform(),
            BidDistribution::two_point(0.1, TwoPointBranch::G1).unwrap(),
            BidDistribution::two_point(0.1, TwoPointBranch::G2).unwrap(),
            BidDistribution::new(DistributionSpec::Discrete {
                atoms: vec![0.0, 0.2, 0.55, 1.0],
                masses: vec![1.0, 2.0, 3.0, 4.0],
            })
            .unwrap(),
            BidDistribution::new(DistributionSpec::RandomHistogram { bins: 8, seed: 3 }).unwrap(),
            BidDistribution::new(DistributionSpec::TruncatedNormal { mean: 0.4, std_dev: 0.2 })
                .unwrap(),
        ]
    }

    #[test]
    fn sampler_matches_cdf_in_kolmogorov_distance() {
        for (k, dist) in families().iter().enumerate() {
            let d = kolmogorov_distance(dist, 100_000, 11 + k as u64);
            assert!(d < 0.01, "{}: D = {d}", dist.family_name());
        }
    }

    #[test]
    fn cdf_monotone_and_normalized() {
        for dist in families() {
            assert_eq!(dist.cdf(1.0), 1.0);
            let mut prev = 0.0;
            for i in 0..=1000 {
                let g = dist.cdf(i as f64 / 1000.0);
                assert!(g >= prev - 1e-15 && (0.0..=1.0).contains(&g));
                prev = g;
            }
        }
    }

    #[test]
    fn two_point_cdf_values() {
        let g1 = BidDistribution::two_point(0.1, TwoPointBranch::G1).unwrap();
        assert_eq!(g1.cdf(0.2), 0.0);
        assert!((g1.cdf(1.0 / 3.0) - 0.6).abs() < 1e-15);
        assert!((g1.cdf(0.5) - 0.6).abs() < 1e-15);
        assert_eq!(g1.cdf(2.0 / 3.0), 1.0);
        assert!(BidDistribution::two_point(0.25, TwoPointBranch::G1).is_err());
        assert!(BidDistribution::two_point(0.0, TwoPointBranch::G2).is_err());
    }

    #[test]
    fn integrated_cdf_matches_quadrature() {
        for dist in families() {
            for &a in &[0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
                let n = 200_000;
                let h = a / n as f64;
                let riemann: f64 = (0..n).map(|i| dist.cdf((i as f64 + 0.5) * h)).sum::<f64>() * h;
                let exact = dist.integrated_cdf(a);
                assert!(
                    (exact - riemann).abs() < 2e-5,
                    "{} a={a}: {exact} vs {riemann}",
                    dist.family_name()
                );
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(BidDistribution::new(DistributionSpec::Discrete {
            atoms: vec![0.5, 0.2],
            masses: vec![1.0, 1.0]
        })
        .is_err());
        assert!(BidDistribution::new(DistributionSpec::Histogram {
            edges: vec![0.0, 0.5],
            weights: vec![1.0]
        })
        .is_err());
        assert!(BidDistribution::new(DistributionSpec::TruncatedNormal { mean: 0.5, std_dev: 0.0 })
            .is_err());
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = DistributionSpec::TwoPoint { delta: 0.0025, branch: TwoPointBranch::G2 };
        #[derive(Serialize, Deserialize)]
        struct Wrap {
            bids: DistributionSpec,
        }
        let text = toml::to_string(&Wrap { bids: spec.clone() }).unwrap();
        let back: Wrap = toml::from_str(&text).unwrap();
        assert_eq!(back.bids, spec);
    }
}
