//! Value schedules, the auction environment and the hard instances.

pub mod auction;
pub mod lower_bound;
pub mod values;

pub use auction::{AuctionEnv, TwoPointInstance};
pub use lower_bound::{LazyBernoulliStats, LowerBoundInstance};
pub use values::{block_contexts, ValueSchedule};
