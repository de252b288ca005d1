use rand::Rng;

use super::CopStrategySpec;
use crate::error::GameError;
use crate::game::{ChainCommitment, CopId, CopPolicy, CopTurn, GameConfig, GameRng, GameState};
use crate::vertex::{binomial_u128, Element, VertexSet};

/// Rounds before the middle in which the two-phase strategy follows chains.
pub const DEFAULT_SWITCH_OFFSET: u32 = 7;

/// Each surviving cop independently adds a uniformly random element of
/// `R - S`.
pub fn uniform_cop_moves(state: &GameState, rng: &mut GameRng) -> Result<Vec<Element>, GameError> {
    let r = state.robber();
    state
        .cops()
        .iter()
        .map(|cop| {
            let free = r.difference(cop.set);
            let count = free.level();
            if count == 0 {
                return Err(GameError::Config(format!(
                    "cop {} already sits on the robber",
                    cop.id.0
                )));
            }
            Ok(free
                .nth_element(rng.random_range(0..count))
                .expect("index below popcount"))
        })
        .collect()
}

/// Every surviving cop draws a uniformly random maximal chain from its set
/// into the level-`L` sets under the robber (`L = floor(n / 2)`).
///
/// The chain is drawn as a uniformly random ordered sample of `L - |S|`
/// elements of `R - S`: the unordered sample is a uniform target and the
/// order a uniform path to it. Every target is reached by the same number
/// of paths, so this is also uniform over paths.
pub fn make_chain_commitments(
    state: &GameState,
    rng: &mut GameRng,
) -> Result<Vec<(CopId, ChainCommitment)>, GameError> {
    let level = state.config().full_rounds();
    let r = state.robber();
    state
        .cops()
        .iter()
        .map(|cop| {
            let mut free: Vec<Element> = r.difference(cop.set).elements().collect();
            let need = level
                .checked_sub(cop.set.level())
                .filter(|&d| d >= 1 && d as usize <= free.len())
                .ok_or_else(|| GameError::BadCommitment {
                    cop: cop.id.0,
                    reason: format!("no level-{level} set is reachable from {}", cop.set),
                })? as usize;
            for i in 0..need {
                let j = rng.random_range(i..free.len());
                free.swap(i, j);
            }
            free.truncate(need);
            let target = free.iter().fold(cop.set, |s, &e| s.with(e));
            Ok((
                cop.id,
                ChainCommitment {
                    target,
                    remaining: free,
                },
            ))
        })
        .collect()
}

/// Next element of every committed chain. Cops whose chain leaves the
/// robber's set are removed by the engine when they step out.
pub fn chain_cop_moves(state: &GameState) -> Result<Vec<Element>, GameError> {
    state.planned_moves()
}

/// The two-phase randomized strategy with switch offset `t`.
pub fn paper_cop_strategy(switch_offset: u32) -> CopStrategySpec {
    CopStrategySpec::Paper { switch_offset }
}

/// The covering baseline; fails validation when there are fewer cops than
/// level-`L` sets.
pub fn full_cover_strategy(config: &GameConfig) -> Result<CopStrategySpec, GameError> {
    let spec = CopStrategySpec::FullCover { capped: false };
    spec.validate(config)?;
    Ok(spec)
}

/// The `index`-th `k`-subset of `{1, ..., n}` in colexicographic order.
pub fn colex_unrank(mut index: u128, n: u32, k: u32) -> Option<VertexSet> {
    if binomial_u128(n as u64, k as u64)? <= index {
        return None;
    }
    let mut set = VertexSet::EMPTY;
    let mut top = n;
    for j in (1..=k).rev() {
        // largest c < top with C(c, j) <= index
        let mut c = top - 1;
        while binomial_u128(c as u64, j as u64)? > index {
            c -= 1;
        }
        index -= binomial_u128(c as u64, j as u64)?;
        set = set.with(c as Element + 1);
        top = c;
    }
    Some(set)
}

/// Target of cop `id` under the covering strategy: the level-`L` sets are
/// dealt out in colex order, wrapping around when cops outnumber them.
pub fn cover_target(config: &GameConfig, id: CopId) -> VertexSet {
    let level = config.full_rounds();
    let count = binomial_u128(config.n() as u64, level as u64).expect("n <= 64 fits");
    colex_unrank(id.0 as u128 % count, config.n(), level).expect("index in range")
}

fn cover_moves(state: &GameState) -> Vec<Element> {
    state
        .cops()
        .iter()
        .map(|cop| {
            cover_target(state.config(), cop.id)
                .difference(cop.set)
                .min_element()
                .expect("cover chains end at the middle level")
        })
        .collect()
}

impl CopPolicy for CopStrategySpec {
    fn label(&self) -> String {
        self.to_string()
    }

    fn validate(&self, config: &GameConfig) -> Result<(), GameError> {
        if let CopStrategySpec::FullCover { capped: false } = self {
            let need = binomial_u128(config.n() as u64, config.full_rounds() as u64)
                .unwrap_or(u128::MAX);
            if (config.cop_count() as u128) < need {
                return Err(GameError::Config(format!(
                    "covering strategy needs {need} cops for n = {}, got {}",
                    config.n(),
                    config.cop_count()
                )));
            }
        }
        Ok(())
    }

    fn turn(&self, state: &GameState, rng: &mut GameRng) -> Result<CopTurn, GameError> {
        let k = state.round();
        match self {
            CopStrategySpec::Uniform => uniform_cop_moves(state, rng).map(CopTurn::Moves),
            CopStrategySpec::FullCover { .. } => Ok(CopTurn::Moves(cover_moves(state))),
            CopStrategySpec::Chain | CopStrategySpec::Paper { .. } => {
                match self.switch_round(state.config().full_rounds()) {
                    Some(s) if k == s => make_chain_commitments(state, rng).map(CopTurn::Commit),
                    Some(s) if k > s => chain_cop_moves(state).map(CopTurn::Moves),
                    _ => uniform_cop_moves(state, rng).map(CopTurn::Moves),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{play_game, TrialSeeds};
    use crate::strategies::RobberStrategySpec;
    use crate::vertex::subsets_of_size;
    use rand::SeedableRng;

    fn vs(e: &[Element]) -> VertexSet {
        VertexSet::from_elements(e.iter().copied())
    }

    #[test]
    fn uniform_single_option() {
        // cop {1,2} under robber {1,2,3}: the only move is 3
        let cfg = GameConfig::new(5, 1).unwrap();
        let s = GameState::at_round(cfg, 3, vs(&[1, 2, 3]), &[vs(&[1, 2])]).unwrap();
        let mut rng = GameRng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(uniform_cop_moves(&s, &mut rng).unwrap(), vec![3]);
        }
    }

    #[test]
    fn uniform_singleton_support() {
        let cfg = GameConfig::new(7, 2).unwrap();
        let s = GameState::at_round(cfg, 3, vs(&[1, 2, 3, 4, 5]), &[vs(&[1, 2]), vs(&[4, 5])])
            .unwrap();
        let mut rng = GameRng::seed_from_u64(3);
        let m = uniform_cop_moves(&s, &mut rng).unwrap();
        assert!([3, 4, 5].contains(&m[0]));
        assert!([1, 2, 3].contains(&m[1]));
    }

    #[test]
    fn chain_commitments_reach_middle_level() {
        let cfg = GameConfig::new(10, 20).unwrap();
        let s = GameState::new(cfg);
        let mut rng = GameRng::seed_from_u64(9);
        let plans = make_chain_commitments(&s, &mut rng).unwrap();
        assert_eq!(plans.len(), 20);
        for (_, p) in &plans {
            assert_eq!(p.target.level(), 5);
            assert_eq!(p.remaining.len(), 5);
            assert_eq!(VertexSet::from_elements(p.remaining.iter().copied()), p.target);
        }
        assert!(s.with_commitments(plans).is_ok());
    }

    #[test]
    fn chain_switch_counts() {
        // even n, t = 7, at the switch |R| = m + 7 and the cop is at level m - 7
        let m = 10u64;
        let free = 14u64;
        assert_eq!(binomial_u128(free, 7), Some(3432));
        assert_eq!((1..=7u64).product::<u64>(), 5040);
        assert_eq!(binomial_u128(m + 7, 7), Some(19448));
        // t = 1: two free elements, two targets, chains of length one
        let cfg = GameConfig::new(8, 1).unwrap();
        let s = GameState::at_round(cfg, 4, vs(&[1, 2, 3, 4, 5]), &[vs(&[1, 2, 3])]).unwrap();
        let mut rng = GameRng::seed_from_u64(5);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..64 {
            let plans = make_chain_commitments(&s, &mut rng).unwrap();
            assert_eq!(plans[0].1.remaining.len(), 1);
            seen.insert(plans[0].1.target);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn chain_moves_follow_commitment() {
        let cfg = GameConfig::new(10, 1).unwrap();
        let s = GameState::at_round(cfg, 2, vs(&[1, 2, 3, 4, 5, 6, 7, 8, 9]), &[vs(&[1])]).unwrap();
        let plan = ChainCommitment {
            target: vs(&[1, 3, 5, 7, 9]),
            remaining: vec![3, 5, 7, 9],
        };
        let s = s.with_commitments(vec![(CopId(0), plan)]).unwrap();
        assert_eq!(chain_cop_moves(&s).unwrap(), vec![3]);
        let s = s.apply_cop_moves(&[3]).unwrap().state;
        let s = s.apply_robber_move(2).unwrap().state;
        assert_eq!(chain_cop_moves(&s).unwrap(), vec![5]);
        let bare = GameState::new(cfg);
        assert!(matches!(chain_cop_moves(&bare), Err(GameError::MissingCommitment(0))));
    }

    #[test]
    fn colex_matches_enumeration() {
        for n in 1..=9 {
            for k in 0..=n {
                let listed: Vec<_> = subsets_of_size(VertexSet::full(n), k).collect();
                for (i, s) in listed.iter().enumerate() {
                    assert_eq!(colex_unrank(i as u128, n, k), Some(*s));
                }
                assert_eq!(colex_unrank(listed.len() as u128, n, k), None);
            }
        }
    }

    #[test]
    fn cover_validation() {
        let cfg = GameConfig::new(4, 5).unwrap();
        assert!(full_cover_strategy(&cfg).is_err());
        let cfg = GameConfig::new(4, 6).unwrap();
        assert!(full_cover_strategy(&cfg).is_ok());
        let cfg = GameConfig::new(5, 10).unwrap();
        assert!(full_cover_strategy(&cfg).is_ok());
        let capped = CopStrategySpec::FullCover { capped: true };
        assert!(capped.validate(&GameConfig::new(6, 3).unwrap()).is_ok());
    }

    #[test]
    fn cover_beats_every_robber_play_exhaustively() {
        // n = 4 with 6 cops and n = 5 with 10 cops, against every deletion
        // sequence of the robber.
        for (n, c) in [(2u32, 2u32), (4, 6), (5, 10)] {
            let cfg = GameConfig::new(n, c).unwrap();
            let spec = CopStrategySpec::FullCover { capped: false };
            let mut rng = GameRng::seed_from_u64(0);
            let mut stack = vec![GameState::new(cfg)];
            let mut leaves = 0;
            while let Some(s) = stack.pop() {
                if s.phase() == crate::game::Phase::Strike {
                    assert!(s.final_cop_strike().unwrap().cops_won());
                    leaves += 1;
                    continue;
                }
                let CopTurn::Moves(m) = spec.turn(&s, &mut rng).unwrap() else {
                    unreachable!()
                };
                let s = s.apply_cop_moves(&m).unwrap().state;
                for e in s.robber().elements() {
                    let step = s.apply_robber_move(e).unwrap();
                    match step.outcome {
                        Some(o) => {
                            assert!(o.cops_won());
                            leaves += 1;
                        }
                        None => stack.push(step.state),
                    }
                }
            }
            assert!(leaves > 0);
        }
    }

    #[test]
    fn paper_strategy_commits_once() {
        let cfg = GameConfig::new(16, 40).unwrap();
        let t = play_game(
            cfg,
            &paper_cop_strategy(7),
            &RobberStrategySpec::Greedy,
            TrialSeeds::single(11),
        )
        .unwrap();
        let sw = t.switch.expect("paper strategy switches");
        assert_eq!(sw.round, 2);
        assert_eq!(sw.family_level, 8);
    }
}
