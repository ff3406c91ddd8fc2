//! Bid and value grids.
//!
//! Two layouts are used by the policies:
//!
//! * [`GridStyle::Offset`]: `b^i = (i - 1) / K` for `i = 1..=K`, so the first
//!   point is `0` and the last is `(K - 1) / K`. Interval-splitting policies
//!   use the sentinel `b^{K+1} = 1` as the upper edge of the last interval.
//! * [`GridStyle::Unit`]: `{1/K, 2/K, ..., 1}`, used for quantized values and
//!   for the successive-elimination bid set.
//!
//! Indices in this crate are zero-based: index `i` is the point `b^{i+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridStyle {
    Offset,
    Unit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub k: usize,
    pub style: GridStyle,
}

impl GridSpec {
    pub fn new(k: usize, style: GridStyle) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidGrid("K must be positive".into()));
        }
        Ok(Self { k, style })
    }

    pub fn offset(k: usize) -> Result<Self> {
        Self::new(k, GridStyle::Offset)
    }

    pub fn unit(k: usize) -> Result<Self> {
        Self::new(k, GridStyle::Unit)
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    /// Zero-based point lookup.
    pub fn point(&self, index: usize) -> f64 {
        debug_assert!(index < self.k);
        match self.style {
            GridStyle::Offset => index as f64 / self.k as f64,
            GridStyle::Unit => (index + 1) as f64 / self.k as f64,
        }
    }

    /// Upper edge of the interval owned by `index`: the next point, or the
    /// sentinel `1` past the last one.
    pub fn upper_edge(&self, index: usize) -> f64 {
        if index + 1 >= self.k {
            1.0
        } else {
            self.point(index + 1)
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.k).map(|i| self.point(i)).collect()
    }

    /// Index of the interval `(b^i, b^{i+1}]` that contains `x`, for
    /// `x > b^1`. Returns `None` for `x <= b^1`, which lies in no interval.
    pub fn interval_of(&self, x: f64) -> Option<usize> {
        let first = self.point(0);
        if x <= first {
            return None;
        }
        let k = self.k as f64;
        // Candidate from arithmetic, then nudge to absorb rounding at edges.
        let mut i = match self.style {
            GridStyle::Offset => (x * k).ceil() as isize - 1,
            GridStyle::Unit => (x * k).ceil() as isize - 2,
        };
        i = i.clamp(0, self.k as isize - 1);
        let mut i = i as usize;
        while i > 0 && x <= self.point(i) {
            i -= 1;
        }
        while i + 1 < self.k && x > self.upper_edge(i) {
            i += 1;
        }
        Some(i)
    }
}

/// `⌈√T⌉`, the default grid size for horizon `T`.
pub fn ceil_sqrt(t: usize) -> usize {
    let mut r = (t as f64).sqrt() as usize;
    while r * r < t {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= t {
        r -= 1;
    }
    r
}

/// `⌈log₂ T⌉` for `T >= 1`.
pub fn ceil_log2(t: usize) -> usize {
    assert!(t >= 1);
    (usize::BITS - (t - 1).leading_zeros()) as usize
}

/// `⌈T^{1/3}⌉`.
pub fn ceil_cbrt(t: usize) -> usize {
    let mut r = (t as f64).cbrt() as usize;
    while r * r * r < t {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) * (r - 1) >= t {
        r -= 1;
    }
    r
}

/// Sorted, de-duplicated union of point sets. Used to build the reference
/// grid the regret oracle scans, which must contain every bid a policy can
/// place.
pub fn merge_points(sets: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    all.sort_by(|a, b| a.total_cmp(b));
    all.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    all
}
