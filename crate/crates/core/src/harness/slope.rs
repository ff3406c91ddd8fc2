use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(ln T, ln mean regret)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub horizons: Vec<usize>,
    pub mean_regret: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

impl SlopeFit {
    pub fn contains(&self, lo: f64, hi: f64) -> bool {
        (lo..=hi).contains(&self.slope)
    }
}

/// Needs at least four horizons with `max T >= 4·min T`, every mean positive.
pub fn fit_slope(horizons: &[usize], mean_regret: &[f64]) -> Result<SlopeFit> {
    if horizons.len() != mean_regret.len() {
        return Err(Error::InvalidConfig(format!(
            "{} horizons but {} regret values",
            horizons.len(),
            mean_regret.len()
        )));
    }
    if horizons.len() < 4 {
        return Err(Error::InvalidConfig(format!("slope fit needs at least 4 horizons, got {}", horizons.len())));
    }
    let lo = *horizons.iter().min().unwrap();
    let hi = *horizons.iter().max().unwrap();
    if lo == 0 || hi < 4 * lo {
        return Err(Error::InvalidConfig(format!("horizons {lo}..{hi} span fewer than two octaves")));
    }
    for (&t, &r) in horizons.iter().zip(mean_regret) {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::NonPositiveRegret { horizon: t, value: r });
        }
    }
    let x: Vec<f64> = horizons.iter().map(|&t| (t as f64).ln()).collect();
    let y: Vec<f64> = mean_regret.iter().map(|r| r.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit { horizons: horizons.to_vec(), mean_regret: mean_regret.to_vec(), slope, intercept, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic(lo: u32, hi: u32) -> Vec<usize> {
        (lo..=hi).map(|e| 1usize << e).collect()
    }

    #[test]
    fn exact_power_laws() {
        let ts = dyadic(10, 17);
        let sqrt: Vec<f64> = ts.iter().map(|&t| 3.0 * (t as f64).sqrt()).collect();
        let fit = fit_slope(&ts, &sqrt).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!(fit.stderr < 1e-9);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-9);
        let two_thirds: Vec<f64> = ts.iter().map(|&t| 0.1 * (t as f64).powf(2.0 / 3.0)).collect();
        assert!((fit_slope(&ts, &two_thirds).unwrap().slope - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_times_log_squared_calibration() {
        // d ln(√T ln²T)/d ln T = 1/2 + 2/ln T, which runs from 0.789 at 2^10
        // to 0.670 at 2^17; the least-squares slope sits in between.
        let ts = dyadic(10, 17);
        let curve: Vec<f64> = ts.iter().map(|&t| (t as f64).sqrt() * (t as f64).ln().powi(2)).collect();
        let fit = fit_slope(&ts, &curve).unwrap();
        let local = |t: f64| 0.5 + 2.0 / t.ln();
        assert!(fit.slope < local(1024.0) && fit.slope > local(131072.0));
        // Any log base gives the same slope.
        assert!((fit.slope - 0.717483).abs() < 1e-6, "{}", fit.slope);
    }

    #[test]
    fn rejections() {
        let ts = dyadic(10, 13);
        assert!(fit_slope(&ts[..3], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_slope(&[100, 110, 120, 130], &[1.0; 4]).is_err());
        match fit_slope(&ts, &[1.0, 0.0, 2.0, 3.0]) {
            Err(Error::NonPositiveRegret { horizon, .. }) => assert_eq!(horizon, 2048),
            other => panic!("{other:?}"),
        }
        assert!(fit_slope(&ts, &[1.0, 2.0]).is_err());
    }
}
