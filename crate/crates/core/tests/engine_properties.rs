//! Properties that must hold for every play-through.

use levelchase::bounds::{lower_bound, trivial_upper_bound};
use levelchase::transcript::ParsedTranscript;
use levelchase::{
    play_game, CopStrategySpec, GameConfig, LookaheadModel, RobberStrategySpec, Transcript,
    TrialSeeds, Winner,
};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn cop_strategy(n: u32, cops: u32, pick: u8, t: u32) -> CopStrategySpec {
    let middle = trivial_upper_bound(n).to_u32().unwrap_or(u32::MAX);
    match pick % 5 {
        0 => CopStrategySpec::Uniform,
        1 => CopStrategySpec::Chain,
        2 => CopStrategySpec::Paper { switch_offset: t },
        3 if cops >= middle => CopStrategySpec::FullCover { capped: false },
        _ => CopStrategySpec::FullCover { capped: true },
    }
}

fn robber_strategy(pick: u8) -> RobberStrategySpec {
    if pick % 2 == 0 {
        RobberStrategySpec::Greedy
    } else {
        RobberStrategySpec::Random
    }
}

fn check_transcript(t: &Transcript) -> Result<(), TestCaseError> {
    let n = t.config.n();
    let half = n / 2;
    let path = t.robber_path();
    prop_assert_eq!(path.len() as u32, half + 1);
    for w in path.windows(2) {
        prop_assert!(w[1].is_subset_of(w[0]) && w[0].level() == w[1].level() + 1);
    }
    let mut last = t.config.cop_count();
    for r in &t.rounds {
        prop_assert!(r.survivors_after_cops <= last);
        prop_assert!(r.survivors_after <= r.survivors_after_cops);
        prop_assert_eq!(last - r.survivors_after, r.evaded());
        last = r.survivors_after;
    }
    match t.outcome.winner {
        Winner::Cops => prop_assert_eq!(t.outcome.capture_round, Some(n.div_ceil(2))),
        Winner::Robber => prop_assert_eq!(t.outcome.capture_round, None),
    }
    if t.config.cop_count() == 0 {
        prop_assert_eq!(t.outcome.winner, Winner::Robber);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn play_through_invariants(
        n in 1u32..=12,
        cops in 0u32..60,
        cop_pick: u8,
        robber_pick: u8,
        t in 0u32..9,
        seed: u64,
    ) {
        let config = GameConfig::new(n, cops).unwrap();
        let cop = cop_strategy(n, cops, cop_pick, t);
        let robber = robber_strategy(robber_pick);
        let seeds = TrialSeeds::single(seed);
        let a = play_game(config, &cop, &robber, seeds).unwrap();
        check_transcript(&a)?;

        let b = play_game(config, &cop, &robber, seeds).unwrap();
        prop_assert_eq!(&a, &b);

        let parsed = ParsedTranscript::parse_all(&a.to_text()).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        prop_assert_eq!(parsed[0].replay().unwrap(), a.outcome.clone());

        if robber == RobberStrategySpec::Greedy {
            for r in a.rounds.iter().filter(|r| !r.is_strike()) {
                // evades at least ceil(N_k k / (n - k + 1))
                let k = r.round as u64;
                let nk = r.survivors_after_cops as u64;
                prop_assert!(r.robber_evaded as u64 * (n as u64 - k + 1) >= nk * k);
            }
            if cops < lower_bound(n).ceil_u32() {
                prop_assert_eq!(a.outcome.winner, Winner::Robber);
            }
        }

        if let Some(sw) = &a.switch {
            if sw.uncovered == Some(0) {
                prop_assert_eq!(a.outcome.winner, Winner::Cops);
            }
        }
    }

    #[test]
    fn lookahead_dominates_greedy(n in 2u32..=6, extra in 0u32..6, pick: u8, seed: u64) {
        let cops = lower_bound(n).ceil_u32() + extra;
        let config = GameConfig::new(n, cops).unwrap();
        let cop = cop_strategy(n, cops, pick, 7);
        let seeds = TrialSeeds::single(seed);
        let greedy = play_game(config, &cop, &RobberStrategySpec::Greedy, seeds).unwrap();
        let look = play_game(
            config,
            &cop,
            &RobberStrategySpec::lookahead(LookaheadModel::Minimax),
            seeds,
        )
        .unwrap();
        if greedy.outcome.winner == Winner::Robber {
            prop_assert_eq!(look.outcome.winner, Winner::Robber);
        }
    }
}

#[test]
fn small_board_games() {
    let greedy = RobberStrategySpec::Greedy;
    let cover = CopStrategySpec::FullCover { capped: false };
    let t = play_game(GameConfig::new(2, 2).unwrap(), &cover, &RobberStrategySpec::Random, TrialSeeds::single(1))
        .unwrap();
    assert_eq!(t.outcome.winner, Winner::Cops);
    for cop in [CopStrategySpec::Uniform, CopStrategySpec::Chain, cover] {
        let cops = if cop == cover { 2 } else { 1 };
        let t = play_game(GameConfig::new(2, cops).unwrap(), &cop, &greedy, TrialSeeds::single(3)).unwrap();
        let expect = if cops == 2 { Winner::Cops } else { Winner::Robber };
        assert_eq!(t.outcome.winner, expect);
    }
    let t = play_game(GameConfig::new(1, 1).unwrap(), &CopStrategySpec::Uniform, &greedy, TrialSeeds::single(0))
        .unwrap();
    assert_eq!(t.outcome.winner, Winner::Cops);
    assert_eq!(t.outcome.capture_round, Some(1));
}

#[test]
fn cover_totality_on_odd_boards() {
    for n in [3u32, 5, 7, 9] {
        let c = trivial_upper_bound(n).to_u32().unwrap();
        for robber in [RobberStrategySpec::Greedy, RobberStrategySpec::Random] {
            for seed in 0..50 {
                let t = play_game(
                    GameConfig::new(n, c).unwrap(),
                    &CopStrategySpec::FullCover { capped: false },
                    &robber,
                    TrialSeeds::single(seed),
                )
                .unwrap();
                assert_eq!(t.outcome.winner, Winner::Cops, "n={n} {robber} seed={seed}");
            }
        }
    }
}

#[test]
fn cover_rejects_too_few_cops() {
    let err = play_game(
        GameConfig::new(4, 5).unwrap(),
        &CopStrategySpec::FullCover { capped: false },
        &RobberStrategySpec::Greedy,
        TrialSeeds::single(0),
    );
    assert!(err.is_err());
}

#[test]
fn transcripts_concatenate() {
    let cfg = GameConfig::new(7, 12).unwrap();
    let mut text = String::new();
    let mut outcomes = Vec::new();
    for seed in 0..5 {
        let t = play_game(cfg, &CopStrategySpec::Paper { switch_offset: 2 }, &RobberStrategySpec::Random, TrialSeeds::single(seed))
            .unwrap();
        text.push_str(&t.to_text());
        outcomes.push(t.outcome);
    }
    let parsed = ParsedTranscript::parse_all(&text).unwrap();
    let replayed: Vec<_> = parsed.iter().map(|p| p.replay().unwrap()).collect();
    assert_eq!(replayed, outcomes);
}

#[test]
fn tampered_transcript_fails_replay() {
    let t = play_game(
        GameConfig::new(6, 10).unwrap(),
        &CopStrategySpec::Uniform,
        &RobberStrategySpec::Greedy,
        TrialSeeds::single(11),
    )
    .unwrap();
    let text = t.to_text();
    let line = text.lines().find(|l| l.starts_with("round 1 ")).unwrap();
    let survivors: u32 = line.rsplit("survivors=").next().unwrap().parse().unwrap();
    let bad = text.replace(line, &line.replace(&format!("survivors={survivors}"), &format!("survivors={}", survivors + 1)));
    let parsed = ParsedTranscript::parse_all(&bad).unwrap();
    assert!(parsed[0].replay().is_err());
}
