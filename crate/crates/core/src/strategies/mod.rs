//! Cop and robber strategies.
//!
//! Specs parse from the strings the command line accepts: `uniform`,
//! `chain`, `paper` / `paper:t=7`, `cover`, `cover-capped` for the cops and
//! `greedy`, `random`, `lookahead` / `lookahead:minimax` /
//! `lookahead:expectimax` for the robber.

mod cop;
mod robber;

use std::fmt;
use std::str::FromStr;

pub use cop::{
    chain_cop_moves, colex_unrank, cover_target, full_cover_strategy, make_chain_commitments,
    paper_cop_strategy, uniform_cop_moves, DEFAULT_SWITCH_OFFSET,
};
pub use robber::{greedy_ranking, greedy_robber_choice, lookahead_robber_choice, random_robber_choice};

use crate::error::GameError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CopStrategySpec {
    /// Every round, each cop adds a uniformly random element of `R - S`.
    Uniform,
    /// Commit to uniformly random chains into the middle family at round 1.
    Chain,
    /// Uniform growth, then committed chains for the last `switch_offset`
    /// rounds before the middle.
    Paper { switch_offset: u32 },
    /// Route distinct cops to every middle-level set. With `capped` the
    /// strategy also runs with too few cops, covering a prefix of the level.
    FullCover { capped: bool },
}

impl CopStrategySpec {
    /// Round in which chain commitments are made, if the strategy ever
    /// commits. Rounds before it are uniform.
    pub fn switch_round(&self, full_rounds: u32) -> Option<u32> {
        match *self {
            CopStrategySpec::Chain => (full_rounds >= 1).then_some(1),
            CopStrategySpec::Paper { switch_offset } => {
                let round = if full_rounds > switch_offset {
                    full_rounds - switch_offset + 1
                } else {
                    1
                };
                (round <= full_rounds).then_some(round)
            }
            _ => None,
        }
    }

    /// Whether the strategy uses randomness at all.
    pub fn is_randomized(&self) -> bool {
        !matches!(self, CopStrategySpec::FullCover { .. })
    }
}

impl fmt::Display for CopStrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopStrategySpec::Uniform => f.write_str("uniform"),
            CopStrategySpec::Chain => f.write_str("chain"),
            CopStrategySpec::Paper { switch_offset } => write!(f, "paper:t={switch_offset}"),
            CopStrategySpec::FullCover { capped: false } => f.write_str("cover"),
            CopStrategySpec::FullCover { capped: true } => f.write_str("cover-capped"),
        }
    }
}

impl FromStr for CopStrategySpec {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, GameError> {
        let bad = || GameError::Config(format!("unknown cop strategy `{s}`"));
        match s {
            "uniform" => Ok(CopStrategySpec::Uniform),
            "chain" => Ok(CopStrategySpec::Chain),
            "paper" => Ok(CopStrategySpec::Paper {
                switch_offset: DEFAULT_SWITCH_OFFSET,
            }),
            "cover" => Ok(CopStrategySpec::FullCover { capped: false }),
            "cover-capped" => Ok(CopStrategySpec::FullCover { capped: true }),
            _ => {
                let t = s
                    .strip_prefix("paper:t=")
                    .ok_or_else(bad)?
                    .parse()
                    .map_err(|_| bad())?;
                Ok(CopStrategySpec::Paper { switch_offset: t })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LookaheadModel {
    /// Worst case over all cop replies.
    Minimax,
    /// Cops assumed to play the uniform strategy; maximizes escape
    /// probability.
    Expectimax,
}

pub const DEFAULT_LOOKAHEAD_CAP: u32 = 12;
pub const DEFAULT_LOOKAHEAD_NODES: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RobberStrategySpec {
    Greedy,
    Random,
    Lookahead {
        model: LookaheadModel,
        /// Largest `n` the exhaustive search accepts.
        cap: u32,
        /// Search nodes per decision before falling back to greedy order.
        node_budget: u64,
    },
}

impl RobberStrategySpec {
    pub fn lookahead(model: LookaheadModel) -> Self {
        RobberStrategySpec::Lookahead {
            model,
            cap: DEFAULT_LOOKAHEAD_CAP,
            node_budget: DEFAULT_LOOKAHEAD_NODES,
        }
    }
}

impl fmt::Display for RobberStrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobberStrategySpec::Greedy => f.write_str("greedy"),
            RobberStrategySpec::Random => f.write_str("random"),
            RobberStrategySpec::Lookahead {
                model: LookaheadModel::Minimax,
                ..
            } => f.write_str("lookahead:minimax"),
            RobberStrategySpec::Lookahead {
                model: LookaheadModel::Expectimax,
                ..
            } => f.write_str("lookahead:expectimax"),
        }
    }
}

impl FromStr for RobberStrategySpec {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, GameError> {
        match s {
            "greedy" => Ok(RobberStrategySpec::Greedy),
            "random" => Ok(RobberStrategySpec::Random),
            "lookahead" | "lookahead:minimax" => {
                Ok(RobberStrategySpec::lookahead(LookaheadModel::Minimax))
            }
            "lookahead:expectimax" => Ok(RobberStrategySpec::lookahead(LookaheadModel::Expectimax)),
            _ => Err(GameError::Config(format!("unknown robber strategy `{s}`"))),
        }
    }
}
