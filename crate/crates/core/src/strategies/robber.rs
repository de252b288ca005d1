use rand::Rng;

use super::{LookaheadModel, RobberStrategySpec};
use crate::error::GameError;
use crate::game::{GameConfig, GameRng, GameState, RobberPolicy};
use crate::solver::{Solver, SolverOptions, Verdict};
use crate::vertex::Element;

/// Robber elements ordered by greedy preference: most cops evaded first,
/// then (on the last move of an even game) unoccupied destinations, then
/// the smallest element.
pub fn greedy_ranking(state: &GameState) -> Vec<Element> {
    let cfg = state.config();
    let last_even = cfg.is_even() && state.round() == cfg.full_rounds();
    let r = state.robber();
    let mut ranked: Vec<(usize, bool, Element)> = state
        .evasion_profile()
        .into_iter()
        .map(|(e, count)| {
            let occupied = last_even && state.cop_sets().any(|s| s == r.without(e));
            (count, occupied, e)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    ranked.into_iter().map(|(_, _, e)| e).collect()
}

/// Deletes the element held by the most surviving cops, smallest element on
/// ties.
pub fn greedy_robber_choice(state: &GameState) -> Result<Element, GameError> {
    let choice = *greedy_ranking(state)
        .first()
        .ok_or_else(|| GameError::Config("robber set is empty".into()))?;
    if cfg!(debug_assertions) {
        // at least the average: ceil(N k / (n - k + 1))
        let k = state.round() as usize;
        let n = state.config().n() as usize;
        let survivors = state.survivors();
        let evaded = state.evasion_count(choice)?;
        debug_assert!(evaded * (n - k + 1) >= survivors * k);
    }
    Ok(choice)
}

pub fn random_robber_choice(state: &GameState, rng: &mut GameRng) -> Result<Element, GameError> {
    let r = state.robber();
    if r.is_empty() {
        return Err(GameError::Config("robber set is empty".into()));
    }
    Ok(r.nth_element(rng.random_range(0..r.level())).expect("in range"))
}

/// Looks ahead to the end of the game. Under `Minimax` it plays a move that
/// wins against every cop reply if one exists; under `Expectimax` it
/// maximizes escape probability against uniform cops. Ties, and moves the
/// search could not settle within `node_budget`, fall back to greedy order.
pub fn lookahead_robber_choice(
    state: &GameState,
    model: LookaheadModel,
    cap: u32,
    node_budget: u64,
) -> Result<Element, GameError> {
    let n = state.config().n();
    if n > cap {
        return Err(GameError::Config(format!(
            "lookahead robber supports n <= {cap}, got {n}"
        )));
    }
    let ranking = greedy_ranking(state);
    let opts = SolverOptions {
        node_budget: Some(node_budget),
        ..SolverOptions::default()
    };
    let mut solver = Solver::new(n, opts);
    match model {
        LookaheadModel::Minimax => {
            let verdicts = solver.robber_move_verdicts(state);
            Ok(ranking
                .iter()
                .copied()
                .find(|e| {
                    verdicts
                        .iter()
                        .any(|&(x, v)| x == *e && v == Verdict::RobberWins)
                })
                .unwrap_or(ranking[0]))
        }
        LookaheadModel::Expectimax => {
            let values = solver.robber_escape_probabilities(state);
            let best = values
                .iter()
                .filter_map(|&(_, v)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(ranking
                .iter()
                .copied()
                .find(|e| {
                    values
                        .iter()
                        .any(|&(x, v)| x == *e && v.is_some_and(|v| v >= best - 1e-12))
                })
                .unwrap_or(ranking[0]))
        }
    }
}

impl RobberPolicy for RobberStrategySpec {
    fn label(&self) -> String {
        self.to_string()
    }

    fn validate(&self, config: &GameConfig) -> Result<(), GameError> {
        if let RobberStrategySpec::Lookahead { cap, .. } = self {
            if config.n() > *cap {
                return Err(GameError::Config(format!(
                    "lookahead robber supports n <= {cap}, got {}",
                    config.n()
                )));
            }
        }
        Ok(())
    }

    fn choose(&self, state: &GameState, rng: &mut GameRng) -> Result<Element, GameError> {
        match *self {
            RobberStrategySpec::Greedy => greedy_robber_choice(state),
            RobberStrategySpec::Random => random_robber_choice(state, rng),
            RobberStrategySpec::Lookahead {
                model,
                cap,
                node_budget,
            } => lookahead_robber_choice(state, model, cap, node_budget),
        }
    }
}
