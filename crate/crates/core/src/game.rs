//! The levelled pursuit game on the subsets of an `n`-set.
//!
//! The robber starts at `{1, ..., n}` and all cops start at the empty set.
//! In round `k` every surviving cop adds one element (level `k - 1` to `k`),
//! then the robber deletes one element (level `n - k + 1` to `n - k`).
//! A cop whose set stops being a subset of the robber's set can never catch
//! the robber again, so the engine removes it as soon as that happens.
//!
//! With `L = floor(n / 2)` full rounds, capture can only happen on round
//! `ceil(n / 2)`: for even `n` when the robber's last deletion lands on a cop,
//! for odd `n` in a cop-only strike round `L + 1` in which any cop still below
//! the robber steps onto it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GameError, Side};
use crate::transcript::{DiagnosticEvent, RoundRecord, SwitchRecord, Transcript};
use crate::vertex::{binomial_u128, subsets_of_size, Element, VertexSet, MAX_GROUND};

/// Random source used by strategies.
pub type GameRng = ChaCha8Rng;

/// Largest family for which coverage of the chain targets is checked.
pub const COVERAGE_FAMILY_CAP: u128 = 250_000;
const MAX_UNCOVERED_EVENTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GameConfig {
    n: u32,
    cop_count: u32,
}

impl GameConfig {
    pub fn new(n: u32, cop_count: u32) -> Result<Self, GameError> {
        if n == 0 || n > MAX_GROUND {
            return Err(GameError::InvalidGroundSize(n));
        }
        Ok(GameConfig { n, cop_count })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn cop_count(&self) -> u32 {
        self.cop_count
    }

    /// The capture level and round, `ceil(n / 2)`.
    pub fn middle(&self) -> u32 {
        self.n.div_ceil(2)
    }

    /// Number of rounds in which both sides move, `floor(n / 2)`. This is
    /// also the level the cops occupy when the robber makes its last move.
    pub fn full_rounds(&self) -> u32 {
        self.n / 2
    }

    pub fn is_even(&self) -> bool {
        self.n % 2 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CopId(pub u32);

/// A committed chain: the cop will add `remaining` in order and end at
/// `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainCommitment {
    pub target: VertexSet,
    pub remaining: Vec<Element>,
}

impl ChainCommitment {
    pub fn next_element(&self) -> Option<Element> {
        self.remaining.first().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cop {
    pub id: CopId,
    pub set: VertexSet,
    pub plan: Option<ChainCommitment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Cops,
    Robber,
    Strike,
    Over,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Cops => "cop move",
            Phase::Robber => "robber move",
            Phase::Strike => "final strike",
            Phase::Over => "finished",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Winner {
    Cops,
    Robber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub winner: Winner,
    pub final_robber: VertexSet,
    pub capture_round: Option<u32>,
}

impl Outcome {
    pub fn cops_won(&self) -> bool {
        self.winner == Winner::Cops
    }
}

/// Observable state of a game. States are values: every move returns a new
/// state and leaves the old one untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    config: GameConfig,
    round: u32,
    phase: Phase,
    robber: VertexSet,
    cops: Vec<Cop>,
}

#[derive(Debug, Clone)]
pub struct CopStep {
    pub state: GameState,
    /// Cops that stepped outside the robber's set and were removed.
    pub evaded: Vec<CopId>,
}

#[derive(Debug, Clone)]
pub struct RobberStep {
    pub state: GameState,
    pub outcome: Option<Outcome>,
    pub evaded: Vec<CopId>,
}

impl GameState {
    /// Initial position: robber on the full set, every cop on the empty set.
    pub fn new(config: GameConfig) -> Self {
        let cops = (0..config.cop_count)
            .map(|i| Cop {
                id: CopId(i),
                set: VertexSet::EMPTY,
                plan: None,
            })
            .collect();
        let phase = if config.full_rounds() == 0 {
            Phase::Strike
        } else {
            Phase::Cops
        };
        GameState {
            config,
            round: 1,
            phase,
            robber: VertexSet::full(config.n),
            cops,
        }
    }

    /// Builds a state mid-game, checking the round-boundary invariants.
    /// The cop sets must be at level `round - 1` and inside `robber`
    /// (cops outside it are dropped, as the engine would have done).
    pub fn at_round(
        config: GameConfig,
        round: u32,
        robber: VertexSet,
        cop_sets: &[VertexSet],
    ) -> Result<Self, GameError> {
        let phase = if round <= config.full_rounds() {
            Phase::Cops
        } else if round == config.full_rounds() + 1 && !config.is_even() {
            Phase::Strike
        } else {
            return Err(GameError::WrongPhase {
                action: "constructing a state",
                round,
                phase: Phase::Over.name(),
            });
        };
        let n = config.n;
        if round == 0 || robber.level() != n - round + 1 || !robber.is_subset_of(VertexSet::full(n)) {
            return Err(GameError::Config(format!(
                "robber set {robber} is not at level {} for round {round}",
                n + 1 - round.max(1)
            )));
        }
        let mut cops = Vec::with_capacity(cop_sets.len());
        for (i, &s) in cop_sets.iter().enumerate() {
            if s.level() != round - 1 {
                return Err(GameError::Config(format!(
                    "cop set {s} is not at level {}",
                    round - 1
                )));
            }
            if s.is_subset_of(robber) {
                cops.push(Cop {
                    id: CopId(i as u32),
                    set: s,
                    plan: None,
                });
            }
        }
        Ok(GameState {
            config,
            round,
            phase,
            robber,
            cops,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn robber(&self) -> VertexSet {
        self.robber
    }

    /// Surviving cops, in a stable order. Cop choices are always given in
    /// this order.
    pub fn cops(&self) -> &[Cop] {
        &self.cops
    }

    pub fn cop_sets(&self) -> impl Iterator<Item = VertexSet> + '_ {
        self.cops.iter().map(|c| c.set)
    }

    pub fn survivors(&self) -> usize {
        self.cops.len()
    }

    pub fn has_commitments(&self) -> bool {
        self.cops.iter().any(|c| c.plan.is_some())
    }

    fn phase_error(&self, action: &'static str) -> GameError {
        GameError::WrongPhase {
            action,
            round: self.round,
            phase: self.phase.name(),
        }
    }

    /// Each surviving cop adds its chosen element. Cops leaving the robber's
    /// set are removed. Moves outside the robber's set are legal but
    /// self-eliminating.
    pub fn apply_cop_moves(&self, choices: &[Element]) -> Result<CopStep, GameError> {
        if self.phase != Phase::Cops {
            return Err(self.phase_error("a cop move"));
        }
        if choices.len() != self.cops.len() {
            return Err(GameError::ChoiceCountMismatch {
                expected: self.cops.len(),
                got: choices.len(),
            });
        }
        let n = self.config.n;
        let mut cops = Vec::with_capacity(self.cops.len());
        let mut evaded = Vec::new();
        for (cop, &e) in self.cops.iter().zip(choices) {
            if e == 0 || u32::from(e) > n {
                return Err(GameError::ElementOutOfRange { element: e, n });
            }
            if cop.set.contains(e) {
                return Err(GameError::ElementAlreadyHeld {
                    cop: cop.id.0,
                    element: e,
                });
            }
            let set = cop.set.with(e);
            if !set.is_subset_of(self.robber) {
                evaded.push(cop.id);
                continue;
            }
            let plan = cop.plan.as_ref().and_then(|p| {
                let pos = p.remaining.iter().position(|&x| x == e)?;
                let mut remaining = p.remaining.clone();
                remaining.remove(pos);
                Some(ChainCommitment {
                    target: p.target,
                    remaining,
                })
            });
            cops.push(Cop {
                id: cop.id,
                set,
                plan,
            });
        }
        Ok(CopStep {
            state: GameState {
                config: self.config,
                round: self.round,
                phase: Phase::Robber,
                robber: self.robber,
                cops,
            },
            evaded,
        })
    }

    /// The robber deletes `element`; every cop holding it is evaded. On the
    /// last round of an even game the outcome is decided here.
    pub fn apply_robber_move(&self, element: Element) -> Result<RobberStep, GameError> {
        if self.phase != Phase::Robber {
            return Err(self.phase_error("a robber move"));
        }
        if !self.robber.contains(element) {
            return Err(GameError::NotInRobberSet(element));
        }
        let robber = self.robber.without(element);
        let (cops, gone): (Vec<Cop>, Vec<Cop>) =
            self.cops.iter().cloned().partition(|c| !c.set.contains(element));
        let evaded = gone.into_iter().map(|c| c.id).collect();
        let last = self.round == self.config.full_rounds();
        let (round, phase, outcome) = if !last {
            (self.round + 1, Phase::Cops, None)
        } else if self.config.is_even() {
            // survivors sit at the robber's level inside its set: equal to it
            let caught = cops.iter().any(|c| c.set == robber);
            let outcome = Outcome {
                winner: if caught { Winner::Cops } else { Winner::Robber },
                final_robber: robber,
                capture_round: caught.then_some(self.round),
            };
            (self.round, Phase::Over, Some(outcome))
        } else {
            (self.round + 1, Phase::Strike, None)
        };
        Ok(RobberStep {
            state: GameState {
                config: self.config,
                round,
                phase,
                robber,
                cops,
            },
            outcome,
            evaded,
        })
    }

    /// The cop-only final move of an odd game: any cop still below the robber
    /// steps onto it.
    pub fn final_cop_strike(&self) -> Result<Outcome, GameError> {
        if self.config.is_even() {
            return Err(GameError::StrikeOnEvenBoard(self.config.n));
        }
        if self.phase != Phase::Strike {
            return Err(self.phase_error("the final strike"));
        }
        let caught = self.cops.iter().any(|c| c.set.is_subset_of(self.robber));
        Ok(Outcome {
            winner: if caught { Winner::Cops } else { Winner::Robber },
            final_robber: self.robber,
            capture_round: caught.then_some(self.round),
        })
    }

    /// Number of surviving cops evaded if the robber deletes `element`.
    pub fn evasion_count(&self, element: Element) -> Result<usize, GameError> {
        if !self.robber.contains(element) {
            return Err(GameError::NotInRobberSet(element));
        }
        Ok(self.cops.iter().filter(|c| c.set.contains(element)).count())
    }

    /// Evasion counts for every element of the robber's set, ascending by
    /// element.
    pub fn evasion_profile(&self) -> Vec<(Element, usize)> {
        let mut counts = [0usize; 64];
        for c in &self.cops {
            for e in c.set.elements() {
                counts[e as usize - 1] += 1;
            }
        }
        self.robber
            .elements()
            .map(|e| (e, counts[e as usize - 1]))
            .collect()
    }

    /// Installs chain commitments. Each target must equal the cop's set
    /// plus the remaining elements, with no repeats.
    pub fn with_commitments(
        &self,
        plans: Vec<(CopId, ChainCommitment)>,
    ) -> Result<GameState, GameError> {
        let mut next = self.clone();
        for (id, plan) in plans {
            let cop = next
                .cops
                .iter_mut()
                .find(|c| c.id == id)
                .ok_or_else(|| GameError::BadCommitment {
                    cop: id.0,
                    reason: "no surviving cop with this id".into(),
                })?;
            let mut built = cop.set;
            for &e in &plan.remaining {
                if built.contains(e) {
                    return Err(GameError::BadCommitment {
                        cop: id.0,
                        reason: format!("element {e} repeated or already held"),
                    });
                }
                built = built.with(e);
            }
            if built != plan.target {
                return Err(GameError::BadCommitment {
                    cop: id.0,
                    reason: format!("path ends at {built}, not at target {}", plan.target),
                });
            }
            cop.plan = Some(plan);
        }
        Ok(next)
    }

    /// The next element of every cop's committed chain.
    pub fn planned_moves(&self) -> Result<Vec<Element>, GameError> {
        self.cops
            .iter()
            .map(|c| {
                c.plan
                    .as_ref()
                    .and_then(ChainCommitment::next_element)
                    .ok_or(GameError::MissingCommitment(c.id.0))
            })
            .collect()
    }
}

/// What the cops do on their half-move.
#[derive(Debug, Clone)]
pub enum CopTurn {
    /// One element per surviving cop, in [`GameState::cops`] order.
    Moves(Vec<Element>),
    /// Install these chains, then every cop plays its chain's next element.
    Commit(Vec<(CopId, ChainCommitment)>),
}

pub trait CopPolicy: Send + Sync {
    fn label(&self) -> String;

    fn validate(&self, config: &GameConfig) -> Result<(), GameError>;

    fn turn(&self, state: &GameState, rng: &mut GameRng) -> Result<CopTurn, GameError>;
}

pub trait RobberPolicy: Send + Sync {
    fn label(&self) -> String;

    fn validate(&self, config: &GameConfig) -> Result<(), GameError>;

    fn choose(&self, state: &GameState, rng: &mut GameRng) -> Result<Element, GameError>;
}

/// Seeds for the independent random streams of one game. The cop side and
/// the robber side are seeded separately so experiments can share one side's
/// randomness while refreshing the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialSeeds {
    pub cop: u64,
    pub robber: u64,
}

impl TrialSeeds {
    pub fn single(seed: u64) -> Self {
        TrialSeeds {
            cop: seed,
            robber: seed,
        }
    }

    pub fn cop_rng(&self) -> GameRng {
        stream(self.cop, 0)
    }

    pub fn robber_rng(&self) -> GameRng {
        stream(self.robber, 1)
    }

    /// Stream for measurement only; it never influences play.
    pub fn probe_rng(&self) -> GameRng {
        stream(self.robber, 2)
    }
}

fn stream(seed: u64, id: u64) -> GameRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn illegal(side: Side, strategy: String, round: u32, err: GameError) -> GameError {
    GameError::IllegalMove {
        side,
        strategy,
        round,
        source: Box::new(err),
    }
}

/// Plays one game to the end and records everything that happened.
pub fn play_game(
    config: GameConfig,
    cops: &dyn CopPolicy,
    robber: &dyn RobberPolicy,
    seeds: TrialSeeds,
) -> Result<Transcript, GameError> {
    use rand::Rng;

    cops.validate(&config)?;
    robber.validate(&config)?;
    let mut cop_rng = seeds.cop_rng();
    let mut robber_rng = seeds.robber_rng();
    let mut probe_rng = seeds.probe_rng();
    let n = config.n;

    let mut state = GameState::new(config);
    let mut rounds = Vec::new();
    let mut diagnostics = Vec::new();
    let mut switch = None;

    let outcome = loop {
        if state.phase == Phase::Strike {
            let outcome = state.final_cop_strike()?;
            rounds.push(RoundRecord::strike(state.round, state.survivors() as u32));
            break outcome;
        }
        let k = state.round;
        let before = state.survivors() as u32;

        let turn = cops
            .turn(&state, &mut cop_rng)
            .map_err(|e| illegal(Side::Cops, cops.label(), k, e))?;
        let (committed, choices) = match turn {
            CopTurn::Moves(choices) => (state.clone(), choices),
            CopTurn::Commit(plans) => {
                let committed = state
                    .with_commitments(plans)
                    .map_err(|e| illegal(Side::Cops, cops.label(), k, e))?;
                if switch.is_none() {
                    switch = Some(switch_record(&committed, &mut diagnostics));
                }
                let choices = committed
                    .planned_moves()
                    .map_err(|e| illegal(Side::Cops, cops.label(), k, e))?;
                (committed, choices)
            }
        };
        let step = committed
            .apply_cop_moves(&choices)
            .map_err(|e| illegal(Side::Cops, cops.label(), k, e))?;
        state = step.state;

        let survivors = state.survivors() as u32;
        let profile = state.evasion_profile();
        let max_evadable = profile.iter().map(|&(_, c)| c).max().unwrap_or(0) as u32;
        let probe = if survivors > 0 {
            let (e, c) = profile[probe_rng.random_range(0..profile.len())];
            Some((e, c as u32))
        } else {
            None
        };
        if bk_exceeded(n, k, max_evadable, survivors) {
            diagnostics.push(DiagnosticEvent::BkExceeded {
                round: k,
                evaded: max_evadable,
                survivors,
            });
        }

        let deletion = robber
            .choose(&state, &mut robber_rng)
            .map_err(|e| illegal(Side::Robber, robber.label(), k, e))?;
        let rstep = state
            .apply_robber_move(deletion)
            .map_err(|e| illegal(Side::Robber, robber.label(), k, e))?;
        let robber_evaded = rstep.evaded.len() as u32;
        diagnostics.push(DiagnosticEvent::Evasion {
            round: k,
            count: robber_evaded,
        });
        rounds.push(RoundRecord {
            round: k,
            cop_choices: choices,
            self_evaded: before - survivors,
            survivors_after_cops: survivors,
            max_evadable,
            probe,
            deletion: Some(deletion),
            robber_evaded,
            survivors_after: rstep.state.survivors() as u32,
        });
        state = rstep.state;
        if let Some(outcome) = rstep.outcome {
            break outcome;
        }
    };

    Ok(Transcript {
        config,
        seeds,
        cop_label: cops.label(),
        robber_label: robber.label(),
        rounds,
        outcome,
        diagnostics,
        switch,
    })
}

/// Exact test of `evaded / survivors > (1 + 1/k^3) * k / (n - k + 1)`.
pub fn bk_exceeded(n: u32, k: u32, evaded: u32, survivors: u32) -> bool {
    if survivors == 0 {
        return false;
    }
    let k = k as u128;
    let lhs = evaded as u128 * k * k * (n as u128 - k + 1);
    let rhs = (k * k * k + 1) * survivors as u128;
    lhs > rhs
}

fn switch_record(state: &GameState, diagnostics: &mut Vec<DiagnosticEvent>) -> SwitchRecord {
    let config = state.config;
    let level = config.full_rounds();
    let r = state.robber;
    let targets: Vec<(CopId, VertexSet)> = state
        .cops
        .iter()
        .filter_map(|c| c.plan.as_ref().map(|p| (c.id, p.target)))
        .collect();
    // odd boards need a target below every level-(L+1) set instead
    let family_level = if config.is_even() { level } else { level + 1 };
    let family_size = binomial_u128(r.level() as u64, family_level as u64).unwrap_or(u128::MAX);
    let uncovered = (family_size <= COVERAGE_FAMILY_CAP).then(|| {
        let reached: std::collections::HashSet<VertexSet> =
            targets.iter().map(|&(_, t)| t).collect();
        let mut missing = 0u64;
        for a in subsets_of_size(r, family_level) {
            let covered = if config.is_even() {
                reached.contains(&a)
            } else {
                a.elements().any(|x| reached.contains(&a.without(x)))
            };
            if !covered {
                if (missing as usize) < MAX_UNCOVERED_EVENTS {
                    diagnostics.push(DiagnosticEvent::UncoveredTarget(a));
                }
                missing += 1;
            }
        }
        missing
    });
    SwitchRecord {
        round: state.round,
        family_level,
        family_size,
        targets,
        uncovered,
    }
}
