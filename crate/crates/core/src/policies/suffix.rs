/// Per-action counters that only ever receive suffix increments
/// `x[a..] += 1`, stored as a Fenwick tree over the difference array so both
/// the increment and a point read cost `O(log K)`.
#[derive(Clone, Debug)]
pub struct SuffixCounts {
    tree: Vec<u64>,
}

impl SuffixCounts {
    pub fn new(len: usize) -> Self {
        Self { tree: vec![0; len + 1] }
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `x[from..] += 1`. A `from` past the end is a no-op.
    pub fn bump_from(&mut self, from: usize) {
        let mut i = from + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    pub fn get(&self, index: usize) -> u64 {
        let mut i = index + 1;
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_naive_suffix_increments(len in 1usize..60, ops in proptest::collection::vec(0usize..70, 0..200)) {
            let mut fast = SuffixCounts::new(len);
            let mut slow = vec![0u64; len];
            for &from in &ops {
                fast.bump_from(from);
                for x in slow.iter_mut().skip(from) {
                    *x += 1;
                }
            }
            for (i, &x) in slow.iter().enumerate() {
                prop_assert_eq!(fast.get(i), x);
            }
        }
    }
}
