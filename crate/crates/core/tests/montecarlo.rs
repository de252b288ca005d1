use levelchase::bounds::{lower_bound, trivial_upper_bound};
use levelchase::montecarlo::{diagnose, estimate_win_probability, trial_seeds, TrialConfig};
use levelchase::{CopStrategySpec, RobberStrategySpec};
use num_traits::ToPrimitive;

fn cfg(n: u32, cop_count: u32, cop: CopStrategySpec, trials: u64, seed: u64) -> TrialConfig {
    TrialConfig {
        n,
        cop_count,
        cop,
        robber: RobberStrategySpec::Greedy,
        trials,
        seed,
    }
}

#[test]
fn regression_anchor() {
    // frozen from the first run; changes here mean the random streams moved
    let r = estimate_win_probability(&cfg(8, 70, CopStrategySpec::Paper { switch_offset: 7 }, 10_000, 8070))
        .unwrap();
    assert_eq!(r.wins, 141);
    assert!(r.p_hat > 0.0 && r.p_hat < 1.0);
}

#[test]
fn trials_replay_individually() {
    let c = cfg(6, 9, CopStrategySpec::Uniform, 200, 5);
    let r = estimate_win_probability(&c).unwrap();
    let wins = (0..200).filter(|&i| c.play(i).unwrap().outcome.cops_won()).count() as u64;
    assert_eq!(r.wins, wins);
    assert_eq!(c.play(17).unwrap().seeds, trial_seeds(5, 9, 17));
}

#[test]
fn no_cop_wins_below_the_bound_for_any_catalog_strategy() {
    let catalog = [
        CopStrategySpec::Uniform,
        CopStrategySpec::Chain,
        CopStrategySpec::Paper { switch_offset: 7 },
        CopStrategySpec::Paper { switch_offset: 2 },
        CopStrategySpec::FullCover { capped: true },
    ];
    for n in 2..=14u32 {
        let c = lower_bound(n).ceil_u32() - 1;
        for cop in catalog {
            let r = estimate_win_probability(&cfg(n, c, cop, 200, n as u64)).unwrap();
            assert_eq!(r.wins, 0, "n={n} {cop}");
        }
    }
}

#[test]
fn heavy_chain_budget_covers_the_middle() {
    let r = estimate_win_probability(&cfg(8, 50 * 70, CopStrategySpec::Chain, 1000, 3)).unwrap();
    let rate = r.coverage_failure_rate.unwrap();
    assert!(rate <= 0.01, "{rate}");
    assert_eq!(r.totals.covered_but_lost, 0);
}

#[test]
fn coverage_implies_capture_on_both_parities() {
    for (n, c) in [(6, 200), (7, 150), (8, 600), (9, 500)] {
        let r = estimate_win_probability(&cfg(n, c, CopStrategySpec::Chain, 500, 4)).unwrap();
        assert!(r.totals.coverage_checked == 500);
        assert_eq!(r.totals.covered_but_lost, 0, "n={n}");
    }
}

#[test]
fn bad_event_frequency_below_clamped_reference() {
    for (n, c) in [(10, 252), (12, 924), (16, 3000)] {
        let report = diagnose(&cfg(n, c, CopStrategySpec::Paper { switch_offset: 7 }, 2000, 1)).unwrap();
        for r in &report.rounds {
            // the reference is an upper bound on a probability; allow
            // sampling noise of a few standard errors
            let slack = 4.0 * (r.bk_reference * (1.0 - r.bk_reference) / 2000.0).sqrt() + 1e-9;
            assert!(r.bk_frequency <= r.bk_reference + slack, "n={n} k={}: {r:?}", r.k);
        }
    }
}

#[test]
fn paper_switch_is_recorded_after_uniform_rounds() {
    let t = cfg(16, 40, CopStrategySpec::Paper { switch_offset: 7 }, 1, 0).play(0).unwrap();
    let sw = t.switch.expect("switch");
    assert_eq!(sw.round, 2);
    assert_eq!(sw.family_level, 8);
    // |S| = C(m + 7, 7) for the level-8 family under a 15-element robber set
    assert_eq!(sw.family_size, 6435);
}

#[test]
fn middle_level_sizes() {
    assert_eq!(trivial_upper_bound(8).to_u32(), Some(70));
    assert_eq!(trivial_upper_bound(12).to_u32(), Some(924));
}
