use thiserror::Error;

use crate::vertex::Element;

/// Which side of the game produced a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Cops,
    Robber,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Cops => f.write_str("cop"),
            Side::Robber => f.write_str("robber"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("ground set size must lie in 1..=64, got {0}")]
    InvalidGroundSize(u32),
    #[error("element {element} is outside the ground set 1..={n}")]
    ElementOutOfRange { element: Element, n: u32 },
    #[error("cop {cop} already holds element {element}")]
    ElementAlreadyHeld { cop: u32, element: Element },
    #[error("element {0} is not in the robber's set")]
    NotInRobberSet(Element),
    #[error("expected {expected} cop choices, got {got}")]
    ChoiceCountMismatch { expected: usize, got: usize },
    #[error("{action} is not legal in round {round} during the {phase} phase")]
    WrongPhase {
        action: &'static str,
        round: u32,
        phase: &'static str,
    },
    #[error("final strike applies only to odd n (n = {0})")]
    StrikeOnEvenBoard(u32),
    #[error("invalid chain commitment for cop {cop}: {reason}")]
    BadCommitment { cop: u32, reason: String },
    #[error("cop {0} has no committed path to follow")]
    MissingCommitment(u32),
    #[error("strategy configuration error: {0}")]
    Config(String),
    #[error("{side} strategy `{strategy}` made an illegal move in round {round}: {source}")]
    IllegalMove {
        side: Side,
        strategy: String,
        round: u32,
        #[source]
        source: Box<GameError>,
    },
    #[error("transcript parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("transcript replay diverged in round {round}: {reason}")]
    ReplayMismatch { round: u32, reason: String },
}
