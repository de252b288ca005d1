//! Seeded, parallel estimation of the cops' win probability.
//!
//! Trials run in parallel but every statistic is accumulated as integer
//! counts, so merging shards is exact and the result does not depend on
//! scheduling. Per-trial seeds are derived in [`seeds`].

mod seeds;
mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

pub use seeds::{mix, splitmix64, trial_seeds};
pub use stats::{
    binomial_se, chi_square_uniform, wilson_interval, ChiSquareTest, Interval, Z_95,
    Z_95_ONE_SIDED,
};

use crate::bounds::{chernoff_bk_bound, RoundDiagnosticsParams};
use crate::error::GameError;
use crate::game::{play_game, CopPolicy, GameConfig, RobberPolicy};
use crate::strategies::{CopStrategySpec, RobberStrategySpec};
use crate::transcript::{DiagnosticEvent, Transcript};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialConfig {
    pub n: u32,
    pub cop_count: u32,
    #[serde(serialize_with = "display")]
    pub cop: CopStrategySpec,
    #[serde(serialize_with = "display")]
    pub robber: RobberStrategySpec,
    pub trials: u64,
    pub seed: u64,
}

fn display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl TrialConfig {
    pub fn game_config(&self) -> Result<GameConfig, GameError> {
        GameConfig::new(self.n, self.cop_count)
    }

    pub fn validate(&self) -> Result<GameConfig, GameError> {
        if self.trials == 0 {
            return Err(GameError::Config("at least one trial is required".into()));
        }
        let config = self.game_config()?;
        self.cop.validate(&config)?;
        self.robber.validate(&config)?;
        Ok(config)
    }

    /// Plays trial `index` and returns its transcript.
    pub fn play(&self, index: u64) -> Result<Transcript, GameError> {
        play_game(
            self.game_config()?,
            &self.cop,
            &self.robber,
            trial_seeds(self.seed, self.cop_count, index),
        )
    }
}

/// Integer tallies for one full round across trials.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RoundTally {
    /// Sum of `N_k`, survivors after the cop move.
    pub survivors: u64,
    /// Trials with `N_k > 0`.
    pub live_trials: u64,
    /// Trials where the bad event fired.
    pub bk_events: u64,
    /// Cops evaded by the robber's actual deletion.
    pub robber_evaded: u64,
    /// Cops holding the uniformly drawn probe element.
    pub probe_evaded: u64,
    /// Sum of `N_k` over trials that drew a probe.
    pub probe_survivors: u64,
    /// Survivors at the end of the round.
    pub survivors_after: u64,
    /// How often each `N_k` occurred.
    pub histogram: BTreeMap<u32, u64>,
}

impl RoundTally {
    fn merge(&mut self, other: &RoundTally) {
        self.survivors += other.survivors;
        self.live_trials += other.live_trials;
        self.bk_events += other.bk_events;
        self.robber_evaded += other.robber_evaded;
        self.probe_evaded += other.probe_evaded;
        self.probe_survivors += other.probe_survivors;
        self.survivors_after += other.survivors_after;
        for (&k, &v) in &other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
    }
}

/// Mergeable per-shard totals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EstimateAccumulator {
    pub trials: u64,
    pub wins: u64,
    /// Indexed by full round, `k - 1`.
    pub rounds: Vec<RoundTally>,
    /// Trials in which the cops committed to chains.
    pub switched: u64,
    /// Of those, trials where the family was small enough to check coverage.
    pub coverage_checked: u64,
    /// Trials with at least one uncovered target.
    pub coverage_failures: u64,
    /// Fully covered trials that the cops still lost; must stay zero.
    pub covered_but_lost: u64,
}

impl EstimateAccumulator {
    pub fn record(&mut self, t: &Transcript) {
        self.trials += 1;
        if t.outcome.cops_won() {
            self.wins += 1;
        }
        let full: Vec<_> = t.rounds.iter().filter(|r| !r.is_strike()).collect();
        if self.rounds.len() < full.len() {
            self.rounds.resize_with(full.len(), RoundTally::default);
        }
        for (tally, r) in self.rounds.iter_mut().zip(&full) {
            let nk = r.survivors_after_cops;
            tally.survivors += nk as u64;
            if nk > 0 {
                tally.live_trials += 1;
            }
            tally.robber_evaded += r.robber_evaded as u64;
            if let Some((_, c)) = r.probe {
                tally.probe_evaded += c as u64;
                tally.probe_survivors += nk as u64;
            }
            tally.survivors_after += r.survivors_after as u64;
            *tally.histogram.entry(nk).or_default() += 1;
        }
        for ev in &t.diagnostics {
            if let DiagnosticEvent::BkExceeded { round, .. } = ev {
                self.rounds[*round as usize - 1].bk_events += 1;
            }
        }
        if let Some(sw) = &t.switch {
            self.switched += 1;
            if let Some(missing) = sw.uncovered {
                self.coverage_checked += 1;
                if missing > 0 {
                    self.coverage_failures += 1;
                } else if !t.outcome.cops_won() {
                    self.covered_but_lost += 1;
                }
            }
        }
    }

    pub fn merge(mut self, other: EstimateAccumulator) -> EstimateAccumulator {
        self.trials += other.trials;
        self.wins += other.wins;
        if self.rounds.len() < other.rounds.len() {
            self.rounds.resize_with(other.rounds.len(), RoundTally::default);
        }
        for (a, b) in self.rounds.iter_mut().zip(&other.rounds) {
            a.merge(b);
        }
        self.switched += other.switched;
        self.coverage_checked += other.coverage_checked;
        self.coverage_failures += other.coverage_failures;
        self.covered_but_lost += other.covered_but_lost;
        self
    }
}

/// Runs the trials with indices in `range`.
pub fn estimate_shard(cfg: &TrialConfig, range: Range<u64>) -> Result<EstimateAccumulator, GameError> {
    cfg.validate()?;
    range
        .into_par_iter()
        .try_fold(EstimateAccumulator::default, |mut acc, i| {
            acc.record(&cfg.play(i)?);
            Ok(acc)
        })
        .try_reduce(EstimateAccumulator::default, |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub config: TrialConfig,
    pub wins: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub interval: Interval,
    /// Fraction of trials in which the bad event fired, per round.
    pub bk_frequency: Vec<f64>,
    /// Fraction of committing trials that left some target unreached.
    pub coverage_failure_rate: Option<f64>,
    /// Mean survivors at the start and after each round.
    pub mean_survivors: Vec<f64>,
    pub totals: EstimateAccumulator,
}

impl EstimateResult {
    pub fn from_totals(config: TrialConfig, totals: EstimateAccumulator) -> Self {
        let t = totals.trials as f64;
        let mut mean_survivors = vec![config.cop_count as f64];
        mean_survivors.extend(totals.rounds.iter().map(|r| r.survivors_after as f64 / t));
        EstimateResult {
            wins: totals.wins,
            trials: totals.trials,
            p_hat: totals.wins as f64 / t,
            interval: wilson_interval(totals.wins, totals.trials),
            bk_frequency: totals.rounds.iter().map(|r| r.bk_events as f64 / t).collect(),
            coverage_failure_rate: (totals.coverage_checked > 0)
                .then(|| totals.coverage_failures as f64 / totals.coverage_checked as f64),
            mean_survivors,
            config,
            totals,
        }
    }
}

pub fn estimate_win_probability(cfg: &TrialConfig) -> Result<EstimateResult, GameError> {
    let totals = estimate_shard(cfg, 0..cfg.trials)?;
    Ok(EstimateResult::from_totals(cfg.clone(), totals))
}

pub const CSV_HEADER: [&str; 8] = ["n", "C", "trials", "wins", "p_hat", "ci_low", "ci_high", "seed"];

/// Writes one CSV row per estimate.
pub fn write_csv<W: io::Write>(rows: &[EstimateResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.config.n.to_string(),
            r.config.cop_count.to_string(),
            r.trials.to_string(),
            r.wins.to_string(),
            r.p_hat.to_string(),
            r.interval.low.to_string(),
            r.interval.high.to_string(),
            r.config.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n: u32,
    pub from: u32,
    pub to: u32,
    pub step: u32,
    pub trials: u64,
    pub seed: u64,
    #[serde(serialize_with = "display")]
    pub cop: CopStrategySpec,
    #[serde(serialize_with = "display")]
    pub robber: RobberStrategySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub level: f64,
    pub cop_count: u32,
    pub p_hat: f64,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<EstimateResult>,
    /// Least cop count with `p_hat >= 0.5`.
    pub half: Option<Threshold>,
    /// Least cop count with `p_hat >= 0.99`.
    pub near_sure: Option<Threshold>,
}

/// One estimate per cop count in `from..=to` (every `step`). Robber seeds are
/// shared across rows.
pub fn sweep_cop_counts(cfg: &SweepConfig) -> Result<SweepResult, GameError> {
    if cfg.from > cfg.to {
        return Err(GameError::Config(format!(
            "empty sweep: from {} > to {}",
            cfg.from, cfg.to
        )));
    }
    if cfg.step == 0 {
        return Err(GameError::Config("sweep step must be positive".into()));
    }
    let mut rows = Vec::new();
    for c in (cfg.from..=cfg.to).step_by(cfg.step as usize) {
        rows.push(estimate_win_probability(&TrialConfig {
            n: cfg.n,
            cop_count: c,
            cop: cfg.cop,
            robber: cfg.robber,
            trials: cfg.trials,
            seed: cfg.seed,
        })?);
    }
    let threshold = |level: f64| {
        rows.iter().find(|r| r.p_hat >= level).map(|r| Threshold {
            level,
            cop_count: r.config.cop_count,
            p_hat: r.p_hat,
            interval: r.interval,
        })
    };
    let half = threshold(0.5);
    let near_sure = threshold(0.99);
    Ok(SweepResult {
        rows,
        half,
        near_sure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundDiagnostics {
    pub k: u32,
    /// `k / (n - k + 1)`, the chance a given survivor holds a given element.
    pub expected_fraction: f64,
    /// Pooled fraction of survivors holding a uniformly drawn element.
    pub probe_fraction: f64,
    /// Binomial standard error of `probe_fraction` around the expectation.
    pub probe_se: f64,
    /// Pooled fraction evaded by the robber's actual deletion.
    pub robber_fraction: f64,
    /// Threshold the bad event compares against, `(1 + 1/k^3) k/(n-k+1)`.
    pub bk_threshold: f64,
    pub bk_frequency: f64,
    /// Mean of the concentration bound at the observed `N_k`, each clamped
    /// to 1.
    pub bk_reference: f64,
    pub mean_survivors: f64,
}

impl RoundDiagnostics {
    /// Distance of the probe fraction from its expectation in standard
    /// errors.
    pub fn z_score(&self) -> f64 {
        if self.probe_se == 0.0 {
            0.0
        } else {
            (self.probe_fraction - self.expected_fraction) / self.probe_se
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub estimate: EstimateResult,
    pub rounds: Vec<RoundDiagnostics>,
    pub switched: u64,
    pub coverage_checked: u64,
    /// Fraction of checked trials where every target was reached.
    pub full_coverage_rate: Option<f64>,
    pub covered_but_lost: u64,
}

/// Per-round evasion statistics, bad-event frequencies and chain coverage.
pub fn diagnose(cfg: &TrialConfig) -> Result<DiagnosticReport, GameError> {
    if matches!(cfg.cop, CopStrategySpec::FullCover { .. }) {
        return Err(GameError::Config(
            "diagnostics need a randomized cop strategy; the covering strategy has none".into(),
        ));
    }
    let estimate = estimate_win_probability(cfg)?;
    let totals = &estimate.totals;
    let n = cfg.n;
    let t = totals.trials as f64;
    let rounds = totals
        .rounds
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let k = i as u32 + 1;
            let params = RoundDiagnosticsParams::new(n, k, 0);
            let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            let reference = r
                .histogram
                .iter()
                .map(|(&nk, &count)| chernoff_bk_bound(n, k, nk as u64).min(1.0) * count as f64)
                .sum::<f64>()
                / t;
            RoundDiagnostics {
                k,
                expected_fraction: params.p,
                probe_fraction: ratio(r.probe_evaded, r.probe_survivors),
                probe_se: if r.probe_survivors == 0 {
                    0.0
                } else {
                    binomial_se(params.p, r.probe_survivors)
                },
                robber_fraction: ratio(r.robber_evaded, r.survivors),
                bk_threshold: params.threshold(),
                bk_frequency: r.bk_events as f64 / t,
                bk_reference: reference,
                mean_survivors: r.survivors as f64 / t,
            }
        })
        .collect();
    Ok(DiagnosticReport {
        rounds,
        switched: totals.switched,
        coverage_checked: totals.coverage_checked,
        full_coverage_rate: (totals.coverage_checked > 0).then(|| {
            (totals.coverage_checked - totals.coverage_failures) as f64
                / totals.coverage_checked as f64
        }),
        covered_but_lost: totals.covered_but_lost,
        estimate,
    })
}

impl fmt::Display for DiagnosticReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.estimate.config;
        writeln!(
            f,
            "n={} cops={} cop={} robber={} trials={} seed={}",
            c.n, c.cop_count, c.cop, c.robber, c.trials, c.seed
        )?;
        writeln!(
            f,
            "wins {} / {}  p_hat {:.6}  ci [{:.6}, {:.6}]",
            self.estimate.wins,
            self.estimate.trials,
            self.estimate.p_hat,
            self.estimate.interval.low,
            self.estimate.interval.high
        )?;
        writeln!(
            f,
            "{:>3} {:>10} {:>10} {:>8} {:>10} {:>10} {:>10} {:>10} {:>12}",
            "k", "expected", "probe", "z", "robber", "B_k thr", "B_k freq", "B_k ref", "mean N_k"
        )?;
        for r in &self.rounds {
            writeln!(
                f,
                "{:>3} {:>10.6} {:>10.6} {:>8.3} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>12.3}",
                r.k,
                r.expected_fraction,
                r.probe_fraction,
                r.z_score(),
                r.robber_fraction,
                r.bk_threshold,
                r.bk_frequency,
                r.bk_reference,
                r.mean_survivors
            )?;
        }
        match self.full_coverage_rate {
            Some(rate) => write!(
                f,
                "chain coverage: {} of {} checked trials fully covered ({:.6}); covered but lost: {}",
                (rate * self.coverage_checked as f64).round() as u64,
                self.coverage_checked,
                rate,
                self.covered_but_lost
            ),
            None if self.switched > 0 => write!(
                f,
                "chain coverage: target family too large to check ({} trials switched)",
                self.switched
            ),
            None => write!(f, "chain coverage: no chain phase"),
        }
    }
}
