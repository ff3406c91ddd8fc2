//! Stable seed derivation. A replication's seed depends only on the base
//! seed and its id, and each source of randomness in a replication gets
//! its own stream, so traces are reproducible and citable.

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replication_seed(base: u64, replication: usize) -> u64 {
    splitmix64(splitmix64(base) ^ replication as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Values,
    Auction,
    Epsilon,
    Rewards,
    /// Second branch of a paired experiment.
    AuctionPaired,
    Demand,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Values => 1,
            Stream::Auction => 2,
            Stream::Epsilon => 3,
            Stream::Rewards => 4,
            Stream::AuctionPaired => 5,
            Stream::Demand => 6,
        }
    }
}

pub fn stream_seed(replication_seed: u64, stream: Stream) -> u64 {
    splitmix64(replication_seed ^ stream.tag().wrapping_mul(0xD1B5_4A32_D192_ED03))
}
