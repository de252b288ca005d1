//! Play-through records and their line-oriented text form.
//!
//! ```text
//! # levelchase transcript v1
//! config n=4 cops=2 cop=uniform robber=greedy cop_seed=7 robber_seed=7
//! round 1 cops=1,2 evaded=1 robber=2 survivors=1
//! round 2 cops=3 evaded=0 robber=4 survivors=1
//! outcome winner=cops round=2 robber=1,3
//! ```
//!
//! One `round` line per round, in order. `cops` lists the element each
//! surviving cop added, in the engine's cop order (`-` when no cop is left,
//! `strike` for the cop-only final round of an odd game). `evaded` counts the
//! cops removed during the round by either half-move, `robber` is the deleted
//! element (`-` in a strike round) and `survivors` is the number of cops left
//! at the end of the round. The `outcome` line gives the winner, the capture
//! round (`-` if the robber escaped) and the robber's final set. Lines
//! starting with `#` are comments; a file may hold several transcripts back to
//! back, each starting at its `config` line.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::GameError;
use crate::game::{CopId, GameConfig, GameState, Outcome, TrialSeeds, Winner};
use crate::vertex::{Element, VertexSet};

pub const TRANSCRIPT_HEADER: &str = "# levelchase transcript v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub cop_choices: Vec<Element>,
    /// Cops that walked out of the robber's set on their own move.
    pub self_evaded: u32,
    /// Survivors after the cops moved: `N_k`.
    pub survivors_after_cops: u32,
    /// Most cops a single deletion could evade this round.
    pub max_evadable: u32,
    /// A uniformly drawn element of the robber's set and the number of cops
    /// deleting it would evade. Drawn from a measurement-only stream.
    pub probe: Option<(Element, u32)>,
    pub deletion: Option<Element>,
    pub robber_evaded: u32,
    pub survivors_after: u32,
}

impl RoundRecord {
    pub(crate) fn strike(round: u32, survivors: u32) -> Self {
        RoundRecord {
            round,
            cop_choices: Vec::new(),
            self_evaded: 0,
            survivors_after_cops: survivors,
            max_evadable: 0,
            probe: None,
            deletion: None,
            robber_evaded: 0,
            survivors_after: survivors,
        }
    }

    pub fn is_strike(&self) -> bool {
        self.deletion.is_none()
    }

    pub fn evaded(&self) -> u32 {
        self.self_evaded + self.robber_evaded
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DiagnosticEvent {
    /// Some deletion would evade more than `(1 + 1/k^3) k / (n - k + 1)` of
    /// the survivors.
    BkExceeded {
        round: u32,
        evaded: u32,
        survivors: u32,
    },
    /// No committed chain reaches this member of the target family.
    UncoveredTarget(VertexSet),
    Evasion { round: u32, count: u32 },
}

/// Chain commitments made at the phase switch and how well they cover the
/// target family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchRecord {
    pub round: u32,
    /// Level of the family that must be covered: `L` for even boards,
    /// `L + 1` (sets that need a target below them) for odd boards.
    pub family_level: u32,
    pub family_size: u128,
    pub targets: Vec<(CopId, VertexSet)>,
    /// Members of the family left uncovered; `None` when the family was too
    /// large to check.
    pub uncovered: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub seeds: TrialSeeds,
    pub cop_label: String,
    pub robber_label: String,
    pub rounds: Vec<RoundRecord>,
    pub outcome: Outcome,
    pub diagnostics: Vec<DiagnosticEvent>,
    pub switch: Option<SwitchRecord>,
}

fn join(elements: impl Iterator<Item = Element>) -> String {
    let parts: Vec<String> = elements.map(|e| e.to_string()).collect();
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join(",")
    }
}

impl Transcript {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(TRANSCRIPT_HEADER);
        out.push('\n');
        let _ = writeln!(
            out,
            "config n={} cops={} cop={} robber={} cop_seed={} robber_seed={}",
            self.config.n(),
            self.config.cop_count(),
            self.cop_label,
            self.robber_label,
            self.seeds.cop,
            self.seeds.robber
        );
        for r in &self.rounds {
            let cops = if r.is_strike() {
                "strike".to_string()
            } else {
                join(r.cop_choices.iter().copied())
            };
            let robber = r.deletion.map_or("-".to_string(), |e| e.to_string());
            let _ = writeln!(
                out,
                "round {} cops={} evaded={} robber={} survivors={}",
                r.round,
                cops,
                r.evaded(),
                robber,
                r.survivors_after
            );
        }
        let winner = match self.outcome.winner {
            Winner::Cops => "cops",
            Winner::Robber => "robber",
        };
        let round = self
            .outcome
            .capture_round
            .map_or("-".to_string(), |k| k.to_string());
        let _ = writeln!(
            out,
            "outcome winner={} round={} robber={}",
            winner,
            round,
            join(self.outcome.final_robber.elements())
        );
        out
    }

    /// Robber positions at the start of each round and at the end.
    pub fn robber_path(&self) -> Vec<VertexSet> {
        let mut r = VertexSet::full(self.config.n());
        let mut path = vec![r];
        for d in self.rounds.iter().filter_map(|x| x.deletion) {
            r = r.without(d);
            path.push(r);
        }
        path
    }
}

/// A transcript read back from text: enough to replay the game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTranscript {
    pub config: GameConfig,
    pub rounds: Vec<ParsedRound>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedRound {
    pub round: u32,
    /// `None` marks the strike round.
    pub cop_choices: Option<Vec<Element>>,
    pub evaded: u32,
    pub deletion: Option<Element>,
    pub survivors: u32,
}

fn parse_err(line: usize, reason: impl Into<String>) -> GameError {
    GameError::Parse {
        line,
        reason: reason.into(),
    }
}

fn fields<'a>(line: usize, parts: &[&'a str]) -> Result<Vec<(&'a str, &'a str)>, GameError> {
    parts
        .iter()
        .map(|p| {
            p.split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected key=value, got `{p}`")))
        })
        .collect()
}

fn field<'a>(line: usize, kv: &[(&str, &'a str)], key: &str) -> Result<&'a str, GameError> {
    kv.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| parse_err(line, format!("missing field `{key}`")))
}

fn number<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, GameError> {
    s.parse()
        .map_err(|_| parse_err(line, format!("not a number: `{s}`")))
}

fn element_list(line: usize, s: &str) -> Result<Vec<Element>, GameError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| number(line, x)).collect()
}

impl ParsedTranscript {
    /// Parses every transcript in `text`.
    pub fn parse_all(text: &str) -> Result<Vec<ParsedTranscript>, GameError> {
        let mut out = Vec::new();
        let mut config: Option<GameConfig> = None;
        let mut rounds = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = raw.split_whitespace().collect();
            match parts[0] {
                "config" => {
                    if config.is_some() {
                        return Err(parse_err(line, "config before previous outcome"));
                    }
                    let kv = fields(line, &parts[1..])?;
                    let n = number(line, field(line, &kv, "n")?)?;
                    let cops = number(line, field(line, &kv, "cops")?)?;
                    config = Some(GameConfig::new(n, cops).map_err(|e| parse_err(line, e.to_string()))?);
                }
                "round" => {
                    if config.is_none() || parts.len() < 2 {
                        return Err(parse_err(line, "round line outside a transcript"));
                    }
                    let round = number(line, parts[1])?;
                    let kv = fields(line, &parts[2..])?;
                    let cops = field(line, &kv, "cops")?;
                    let robber = field(line, &kv, "robber")?;
                    rounds.push(ParsedRound {
                        round,
                        cop_choices: if cops == "strike" {
                            None
                        } else {
                            Some(element_list(line, cops)?)
                        },
                        evaded: number(line, field(line, &kv, "evaded")?)?,
                        deletion: if robber == "-" {
                            None
                        } else {
                            Some(number(line, robber)?)
                        },
                        survivors: number(line, field(line, &kv, "survivors")?)?,
                    });
                }
                "outcome" => {
                    let cfg = config
                        .take()
                        .ok_or_else(|| parse_err(line, "outcome line outside a transcript"))?;
                    let kv = fields(line, &parts[1..])?;
                    let winner = match field(line, &kv, "winner")? {
                        "cops" => Winner::Cops,
                        "robber" => Winner::Robber,
                        other => return Err(parse_err(line, format!("unknown winner `{other}`"))),
                    };
                    let round = field(line, &kv, "round")?;
                    let capture_round = if round == "-" {
                        None
                    } else {
                        Some(number(line, round)?)
                    };
                    let final_robber =
                        VertexSet::from_elements(element_list(line, field(line, &kv, "robber")?)?);
                    out.push(ParsedTranscript {
                        config: cfg,
                        rounds: std::mem::take(&mut rounds),
                        outcome: Outcome {
                            winner,
                            final_robber,
                            capture_round,
                        },
                    });
                }
                other => return Err(parse_err(line, format!("unknown record `{other}`"))),
            }
        }
        if config.is_some() {
            return Err(parse_err(text.lines().count(), "transcript without outcome"));
        }
        Ok(out)
    }

    /// Re-plays the recorded moves from the initial position and checks
    /// every recorded count and the outcome.
    pub fn replay(&self) -> Result<Outcome, GameError> {
        let mut state = GameState::new(self.config);
        let mismatch = |round: u32, reason: String| GameError::ReplayMismatch { round, reason };
        for r in &self.rounds {
            if r.round != state.round() {
                return Err(mismatch(r.round, format!("engine is at round {}", state.round())));
            }
            let before = state.survivors() as u32;
            let outcome = match (&r.cop_choices, r.deletion) {
                (None, None) => Some(state.final_cop_strike()?),
                (Some(choices), Some(d)) => {
                    let s = state.apply_cop_moves(choices)?.state;
                    let step = s.apply_robber_move(d)?;
                    state = step.state;
                    step.outcome
                }
                _ => return Err(mismatch(r.round, "malformed round".into())),
            };
            let after = state.survivors() as u32;
            if after != r.survivors || before - after != r.evaded {
                return Err(mismatch(
                    r.round,
                    format!(
                        "recorded evaded={} survivors={}, replay gives {} and {}",
                        r.evaded,
                        r.survivors,
                        before - after,
                        after
                    ),
                ));
            }
            if let Some(o) = outcome {
                if o != self.outcome {
                    return Err(mismatch(r.round, format!("outcome {o:?} differs")));
                }
                return Ok(o);
            }
        }
        let phase = state.phase();
        Err(mismatch(
            state.round(),
            format!("transcript ends before the game does ({phase:?})"),
        ))
    }
}
