//! Learning to bid in repeated first-price auctions when the highest
//! competing bid is seen only after a loss.

pub mod cli;
pub mod distribution;
pub mod environments;
pub mod error;
pub mod feedback;
pub mod grid;
pub mod harness;
pub mod inventory;
pub mod oracle;
pub mod policies;
pub mod reward;

pub use distribution::{BidDistribution, DistributionSpec, TwoPointBranch};
pub use error::{Error, Result};
pub use feedback::CensoredOutcome;
pub use grid::{GridSpec, GridStyle};
pub use policies::{BidPolicy, PolicyConfig, PolicyKind};
