//! Private value sequences. All schedules are oblivious: they are fixed
//! from their own seed before play and never see the bids.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{BidDistribution, DistributionSpec};
use crate::error::{check_unit, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueSchedule {
    /// iid draws from a distribution on `[0, 1]`.
    Iid { dist: DistributionSpec },
    Constant { value: f64 },
    /// `M` equal blocks with values `M/M, (M-1)/M, ..., 1/M`; the last block
    /// absorbs the remainder of `T/M`.
    DecreasingBlocks { blocks: usize },
    /// One block per round: `v_t = (T + 1 - t)/T`.
    Decreasing,
    Explicit { values: Vec<f64> },
    File { path: PathBuf },
}

impl ValueSchedule {
    pub fn iid_uniform() -> Self {
        ValueSchedule::Iid { dist: DistributionSpec::Uniform }
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self {
            ValueSchedule::Iid { dist: DistributionSpec::Uniform } => "iid_uniform".into(),
            ValueSchedule::Iid { .. } => "iid".into(),
            ValueSchedule::Constant { value } => format!("constant:{value}"),
            ValueSchedule::DecreasingBlocks { blocks } => format!("blocks:{blocks}"),
            ValueSchedule::Decreasing => "decreasing".into(),
            ValueSchedule::Explicit { .. } => "explicit".into(),
            ValueSchedule::File { path } => format!("file:{}", path.display()),
        }
    }

    /// The first `T` values. Randomness is drawn only from `rng`.
    pub fn generate<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            ValueSchedule::Iid { dist } => {
                let dist = BidDistribution::new(dist.clone())?;
                Ok((0..horizon).map(|_| dist.sample(rng)).collect())
            }
            ValueSchedule::Constant { value } => {
                check_unit("value", *value)?;
                Ok(vec![*value; horizon])
            }
            ValueSchedule::DecreasingBlocks { blocks } => {
                let contexts = block_contexts(*blocks, horizon)?;
                Ok(contexts.into_iter().map(|c| c as f64 / *blocks as f64).collect())
            }
            ValueSchedule::Decreasing => {
                let contexts = block_contexts(horizon, horizon)?;
                Ok(contexts.into_iter().map(|c| c as f64 / horizon as f64).collect())
            }
            ValueSchedule::Explicit { values } => take_prefix(values, horizon),
            ValueSchedule::File { path } => take_prefix(&read_values(path)?, horizon),
        }
    }
}

fn take_prefix(values: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if values.len() < horizon {
        return Err(Error::ScheduleExhausted { available: values.len(), needed: horizon });
    }
    for &v in &values[..horizon] {
        check_unit("value", v)?;
    }
    Ok(values[..horizon].to_vec())
}

/// One decimal value per line. Blank lines are skipped.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: `{line}` is not a number", n + 1),
        })?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: value {v} outside [0, 1]", n + 1),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// One-based contexts `c_t = M + 1 - m` for `t` in block `m`. Blocks have
/// length `⌊T/M⌋`; the last one absorbs the remainder.
pub fn block_contexts(blocks: usize, horizon: usize) -> Result<Vec<usize>> {
    if blocks == 0 || blocks > horizon {
        return Err(Error::InvalidConfig(format!(
            "block schedule needs 1 <= M <= T, got M = {blocks}, T = {horizon}"
        )));
    }
    let len = horizon / blocks;
    Ok((0..horizon).map(|t| blocks - (t / len).min(blocks - 1)).collect())
}

/// `iid_uniform`, `constant:<v>`, `decreasing`, `blocks:<M>`, `file:<path>`.
impl FromStr for ValueSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidConfig(format!("values `{s}`: {msg}"));
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("iid_uniform", None) => Ok(Self::iid_uniform()),
            ("decreasing", None) => Ok(ValueSchedule::Decreasing),
            ("constant", Some(a)) => {
                let value: f64 = a.parse().map_err(|_| bad("not a number"))?;
                check_unit("value", value)?;
                Ok(ValueSchedule::Constant { value })
            }
            ("blocks", Some(a)) => Ok(ValueSchedule::DecreasingBlocks {
                blocks: a.parse().map_err(|_| bad("block count must be a positive integer"))?,
            }),
            ("file", Some(a)) => Ok(ValueSchedule::File { path: PathBuf::from(a) }),
            _ => Err(bad("expected iid_uniform, constant:<v>, decreasing, blocks:<M> or file:<path>")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    #[test]
    fn block_examples() {
        assert_eq!(block_contexts(2, 4).unwrap(), vec![2, 2, 1, 1]);
        assert_eq!(block_contexts(5, 5).unwrap(), vec![5, 4, 3, 2, 1]);
        // Remainder goes to the last block.
        assert_eq!(block_contexts(3, 8).unwrap(), vec![3, 3, 2, 2, 1, 1, 1, 1]);
        assert!(block_contexts(5, 4).is_err());
        assert!(block_contexts(0, 4).is_err());
    }

    #[test]
    fn block_count_at_cube_root() {
        let t = 1 << 12;
        let m = crate::grid::ceil_cbrt(t);
        let c = block_contexts(m, t).unwrap();
        assert_eq!(c[0], m);
        assert_eq!(*c.last().unwrap(), 1);
        assert!(c.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn decreasing_values_are_strict() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = ValueSchedule::Decreasing.generate(4, &mut rng).unwrap();
        assert_eq!(v, vec![1.0, 0.75, 0.5, 0.25]);
    }

    #[test]
    fn iid_is_reproducible_and_in_range() {
        let s = ValueSchedule::iid_uniform();
        let a = s.generate(1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = s.generate(1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn explicit_and_file_schedules() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = ValueSchedule::Explicit { values: vec![0.1, 0.2, 0.3] };
        assert_eq!(s.generate(2, &mut rng).unwrap(), vec![0.1, 0.2]);
        assert!(matches!(s.generate(4, &mut rng), Err(Error::ScheduleExhausted { available: 3, needed: 4 })));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.5\n\n0.25\n1").unwrap();
        let s = ValueSchedule::File { path: f.path().to_path_buf() };
        assert_eq!(s.generate(3, &mut rng).unwrap(), vec![0.5, 0.25, 1.0]);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0.5\n1.5").unwrap();
        let err = read_values(bad.path()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let missing = ValueSchedule::File { path: "/nonexistent/values.txt".into() };
        assert!(missing.generate(1, &mut rng).unwrap_err().to_string().contains("/nonexistent/values.txt"));
    }

    #[test]
    fn parse_names() {
        assert_eq!("iid_uniform".parse::<ValueSchedule>().unwrap(), ValueSchedule::iid_uniform());
        assert_eq!("constant:1".parse::<ValueSchedule>().unwrap(), ValueSchedule::Constant { value: 1.0 });
        assert_eq!("blocks:7".parse::<ValueSchedule>().unwrap(), ValueSchedule::DecreasingBlocks { blocks: 7 });
        assert!("constant:2".parse::<ValueSchedule>().is_err());
        assert!("sideways".parse::<ValueSchedule>().is_err());
    }
}
