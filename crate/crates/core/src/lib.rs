//! The levelled cops-and-robber game on the hypercube.
//!
//! The robber starts at the full set `{1..n}` and deletes one element per
//! round; the cops start at the empty set and add one element per round.
//! Capture can only happen on the middle level. This crate provides the game
//! engine, robber and cop strategies, exact bounds, an exhaustive solver for
//! small `n` and a Monte Carlo harness.

pub mod bounds;
pub mod error;
pub mod game;
pub mod montecarlo;
pub mod solver;
pub mod strategies;
pub mod transcript;
pub mod vertex;

pub use bounds::{BoundReport, ExactRational};
pub use error::{GameError, Side};
pub use game::{
    play_game, ChainCommitment, CopId, CopPolicy, CopTurn, GameConfig, GameRng, GameState, Outcome,
    Phase, RobberPolicy, TrialSeeds, Winner,
};
pub use montecarlo::{EstimateResult, TrialConfig};
pub use solver::{SolveResult, Verdict};
pub use strategies::{CopStrategySpec, LookaheadModel, RobberStrategySpec};
pub use transcript::{DiagnosticEvent, Transcript};
pub use vertex::{Element, VertexSet};
