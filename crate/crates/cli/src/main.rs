use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use levelchase::bounds::BoundReport;
use levelchase::montecarlo::{self, SweepConfig, TrialConfig};
use levelchase::solver::{self, SolverOptions, Verdict};
use levelchase::{CopStrategySpec, RobberStrategySpec};

#[derive(Parser)]
#[command(name = "levelchase", version, about = "Levelled cops and robber on the hypercube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact lower bound, covering bound and randomized-strategy budget.
    Bounds {
        #[arg(long)]
        n: u32,
        /// Replace the budget constant c.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Exact cop number by exhaustive search.
    Solve {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        max_cops: Option<u32>,
        #[arg(long)]
        budget_seconds: Option<f64>,
        /// Give up after this many search nodes.
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Memoize on raw positions instead of canonical forms.
        #[arg(long)]
        no_symmetry: bool,
        /// Disable the exact cut-offs.
        #[arg(long)]
        no_prune: bool,
        #[arg(long)]
        json: bool,
    },
    /// Estimate the cops' win probability.
    Simulate {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        cops: u32,
        #[command(flatten)]
        strategies: Strategies,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write every game's transcript to this file.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Estimate the win probability over a range of cop counts.
    Sweep {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[arg(long, default_value_t = 1)]
        step: u32,
        #[command(flatten)]
        strategies: Strategies,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Per-round evasion statistics, bad-event rates and chain coverage.
    Diagnose {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        cops: u32,
        #[command(flatten)]
        strategies: Strategies,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Strategies {
    /// uniform, chain, paper, paper:t=N, cover or cover-capped.
    #[arg(long, default_value = "paper")]
    cop: String,
    /// greedy, random, lookahead, lookahead:minimax or lookahead:expectimax.
    #[arg(long, default_value = "greedy")]
    robber: String,
    /// Switch offset for the paper strategy.
    #[arg(long)]
    t: Option<u32>,
}

impl Strategies {
    fn parse(&self) -> Result<(CopStrategySpec, RobberStrategySpec), Failure> {
        let mut cop: CopStrategySpec = self.cop.parse().map_err(Failure::invalid)?;
        let robber: RobberStrategySpec = self.robber.parse().map_err(Failure::invalid)?;
        if let Some(t) = self.t {
            match cop {
                CopStrategySpec::Paper { .. } => cop = CopStrategySpec::Paper { switch_offset: t },
                _ => {
                    return Err(Failure::Invalid(anyhow::anyhow!(
                        "--t only applies to the paper cop strategy, got `{cop}`"
                    )))
                }
            }
        }
        Ok((cop, robber))
    }
}

enum Failure {
    /// Exit code 2.
    Invalid(anyhow::Error),
    /// Exit code 3.
    Budget(String),
    /// Exit code 1.
    Other(anyhow::Error),
}

impl Failure {
    fn invalid(e: impl Into<anyhow::Error>) -> Self {
        Failure::Invalid(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn game_failure(e: levelchase::GameError) -> Failure {
    use levelchase::GameError::*;
    match e {
        InvalidGroundSize { .. } | Config(_) => Failure::Invalid(e.into()),
        other => Failure::Other(other.into()),
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Failure> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Bounds { n, c, json } => {
            if n == 0 {
                return Err(Failure::Invalid(anyhow::anyhow!("n must be at least 1")));
            }
            if c.is_some_and(|c| !(c.is_finite() && c > 0.0)) {
                return Err(Failure::Invalid(anyhow::anyhow!("c must be positive")));
            }
            let report = BoundReport::new(n, c);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).context("json")?)?;
            } else {
                writeln!(out, "{report}")?;
            }
        }
        Command::Solve {
            n,
            max_cops,
            budget_seconds,
            max_nodes,
            no_symmetry,
            no_prune,
            json,
        } => {
            let time_budget = match budget_seconds {
                Some(b) if !(b.is_finite() && b > 0.0) => {
                    return Err(Failure::Invalid(anyhow::anyhow!("budget must be positive")))
                }
                b => b.map(Duration::from_secs_f64),
            };
            let opts = SolverOptions {
                canonicalize: !no_symmetry,
                prune: !no_prune,
                time_budget,
                node_budget: max_nodes,
                ..SolverOptions::default()
            };
            let result = solver::cop_number_exact(n, max_cops, opts).map_err(Failure::invalid)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&result).context("json")?)?;
            } else {
                writeln!(out, "n={}", result.n)?;
                for (c, v) in &result.table {
                    let v = match v {
                        Verdict::CopsWin => "cops win",
                        Verdict::RobberWins => "robber wins",
                        Verdict::Unknown => "unknown",
                    };
                    writeln!(out, "  C={c:<4} {v}")?;
                }
                match (result.cop_number, result.unknown_range) {
                    (Some(c), _) => writeln!(out, "cop number {c}")?,
                    (None, Some((lo, hi))) => writeln!(out, "cop number in [{lo}, {hi}]")?,
                    (None, None) => writeln!(out, "cop number not determined")?,
                }
                let s = result.stats;
                writeln!(
                    out,
                    "nodes {} memo hits {} memo entries {} floor cut-offs {} cover cut-offs {}",
                    s.nodes, s.memo_hits, s.memo_entries, s.floor_cutoffs, s.cover_cutoffs
                )?;
            }
            if result.table.iter().any(|&(_, v)| v == Verdict::Unknown) {
                return Err(Failure::Budget("search budget exhausted".into()));
            }
        }
        Command::Simulate {
            n,
            cops,
            strategies,
            trials,
            seed,
            csv,
            transcripts,
            json,
        } => {
            let (cop, robber) = strategies.parse()?;
            let cfg = TrialConfig {
                n,
                cop_count: cops,
                cop,
                robber,
                trials,
                seed,
            };
            let result = montecarlo::estimate_win_probability(&cfg).map_err(game_failure)?;
            if let Some(path) = transcripts {
                let mut w = create(&path)?;
                for i in 0..trials {
                    let t = cfg.play(i).map_err(game_failure)?;
                    w.write_all(t.to_text().as_bytes())?;
                }
                w.flush()?;
            }
            if let Some(path) = csv {
                montecarlo::write_csv(std::slice::from_ref(&result), create(&path)?).context("csv")?;
            }
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&result).context("json")?)?;
            } else {
                writeln!(
                    out,
                    "n={} cops={} cop={} robber={} trials={} seed={}",
                    n, cops, cop, robber, trials, seed
                )?;
                writeln!(
                    out,
                    "wins {} / {}  p_hat {:.6}  95% ci [{:.6}, {:.6}]{}",
                    result.wins,
                    result.trials,
                    result.p_hat,
                    result.interval.low,
                    result.interval.high,
                    if result.interval.one_sided { " (one-sided)" } else { "" }
                )?;
                let curve: Vec<String> =
                    result.mean_survivors.iter().map(|v| format!("{v:.3}")).collect();
                writeln!(out, "mean survivors {}", curve.join(" "))?;
            }
        }
        Command::Sweep {
            n,
            from,
            to,
            step,
            strategies,
            trials,
            seed,
            csv,
        } => {
            let (cop, robber) = strategies.parse()?;
            let cfg = SweepConfig {
                n,
                from,
                to,
                step,
                trials,
                seed,
                cop,
                robber,
            };
            let sweep = montecarlo::sweep_cop_counts(&cfg).map_err(game_failure)?;
            match csv {
                Some(path) => {
                    montecarlo::write_csv(&sweep.rows, create(&path)?).context("csv")?;
                }
                None => montecarlo::write_csv(&sweep.rows, &mut out).context("csv")?,
            }
            for (name, t) in [("50%", &sweep.half), ("99%", &sweep.near_sure)] {
                match t {
                    Some(t) => eprintln!(
                        "{name} threshold: C={} p_hat {:.6} ci [{:.6}, {:.6}]",
                        t.cop_count, t.p_hat, t.interval.low, t.interval.high
                    ),
                    None => eprintln!("{name} threshold: not reached in [{from}, {to}]"),
                }
            }
        }
        Command::Diagnose {
            n,
            cops,
            strategies,
            trials,
            seed,
            json,
        } => {
            let (cop, robber) = strategies.parse()?;
            let cfg = TrialConfig {
                n,
                cop_count: cops,
                cop,
                robber,
                trials,
                seed,
            };
            let report = montecarlo::diagnose(&cfg).map_err(game_failure)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).context("json")?)?;
            } else {
                writeln!(out, "{report}")?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
