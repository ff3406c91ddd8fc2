use crate::error::{check_unit, Result};

/// What the bidder sees after a round: whether she won, and the highest
/// competing bid only when she lost.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CensoredOutcome {
    won: bool,
    revealed: Option<f64>,
}

impl CensoredOutcome {
    /// Censor the true `m` against the placed bid. Ties win.
    pub fn from_auction(bid: f64, others: f64) -> Result<Self> {
        check_unit("bid", bid)?;
        check_unit("m", others)?;
        Ok(if bid >= others {
            Self { won: true, revealed: None }
        } else {
            Self { won: false, revealed: Some(others) }
        })
    }

    pub fn won(&self) -> bool {
        self.won
    }

    pub fn revealed(&self) -> Option<f64> {
        self.revealed
    }

    /// `1(m <= b)` for any `b` at or above the bid that produced this
    /// outcome; the censoring makes it known exactly there.
    pub fn wins_at(&self, b: f64) -> bool {
        match self.revealed {
            None => true,
            Some(m) => m <= b,
        }
    }
}
