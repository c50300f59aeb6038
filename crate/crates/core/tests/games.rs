//! Whole-game properties: engine bookkeeping, opponents' bias discipline,
//! transcripts, and the Maker strategies on small grids.

use proptest::prelude::*;

use positional::breakers::{by_name, RandomBreaker, BREAKER_NAMES};
use positional::engine::{
    play, replay, verify, EngineError, GameConfig, InvariantLog, Side, Transcript, Verdict, Winner,
};
use positional::harness::{derive_seed, run_named};
use positional::strategy::{Strategy, StrategyFailure, Turn};
use positional::winset::Family;
use positional::Edge;

/// Wraps a strategy and records how many edges it returned against how many were due.
struct Audit<S> {
    inner: S,
    short: Vec<(usize, usize)>,
}

impl<S: Strategy> Strategy for Audit<S> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let out = self.inner.choose_move(turn, log)?;
        let distinct = {
            let mut v = out.clone();
            v.sort();
            v.dedup();
            v.len()
        };
        let free = out.iter().all(|e| turn.board().is_free(e.u, e.v));
        if out.len() != turn.steps || distinct != out.len() || !free {
            self.short.push((out.len(), turn.steps));
        }
        Ok(out)
    }
}

fn family(idx: usize) -> Family {
    [
        Family::PerfectMatching,
        Family::Hamilton,
        Family::PathFactor(3),
        Family::StarFactor(3),
    ][idx]
        .clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_games_keep_the_books(n in 4usize..=14, a in 1usize..=3, b in 1usize..=3, seed in any::<u64>(), fam in 0usize..2) {
        let cfg = GameConfig::maker_breaker(family(fam), n, a, b, seed);
        let mut m = RandomBreaker::new(seed ^ 1);
        let mut br = RandomBreaker::new(seed ^ 2);
        let t = play(cfg, &mut m, &mut br).unwrap();
        prop_assert!(t.winner.is_some());
        for name in ["engine.conservation", "engine.degree_tables", "engine.bias_discipline"] {
            prop_assert_eq!(t.invariant_report.get(name), Some(&Verdict::Pass));
        }
        // every move but the last uses the full bias
        let last = t.moves.len() - 1;
        for (i, mv) in t.moves.iter().enumerate() {
            let bias = if mv.player.side() == Side::Maker { a } else { b };
            prop_assert!(mv.edges.len() == bias || i == last);
        }
        let state = verify(&t).unwrap();
        prop_assert_eq!(state.finished, t.winner);
        let back = Transcript::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn opponents_return_exactly_their_bias(name_idx in 0usize..7, n in 12usize..=30, bias in 1usize..=4, seed in any::<u64>()) {
        let name = BREAKER_NAMES[name_idx];
        let cfg = GameConfig::maker_breaker(Family::Hamilton, n, bias, bias, seed);
        let mut maker = Audit { inner: RandomBreaker::new(seed), short: Vec::new() };
        let mut breaker = Audit { inner: by_name(name, seed).unwrap(), short: Vec::new() };
        let t = play(cfg, &mut maker, &mut breaker);
        prop_assert!(t.is_ok(), "{name}: {:?}", t.err().map(|e| e.to_string()));
        prop_assert!(breaker.short.is_empty(), "{name} returned {:?}", breaker.short);
    }

    #[test]
    fn truncated_transcripts_replay_to_unfinished_states(seed in any::<u64>(), cut in 1usize..10) {
        let cfg = GameConfig::maker_breaker(Family::PerfectMatching, 40, 2, 2, seed);
        let r = run_named(cfg, "auto", "random").unwrap();
        let mut t = r.transcript.clone();
        let keep = t.moves.len().saturating_sub(cut).max(1);
        t.moves.truncate(keep);
        let state = replay(&t).unwrap();
        prop_assert!(state.finished.is_none());
        prop_assert!(matches!(verify(&t), Err(EngineError::CorruptTranscript(_))));
    }
}

/// Runs `auto` Maker against every opponent on a small grid and returns
/// the runs that did not finish within the closed-form bound.
fn sweep(fam: Family, ns: &[usize], biases: &[usize], seeds: u64) -> Vec<String> {
    let mut misses = Vec::new();
    for &a in biases {
        for &n in ns {
            for (bi, br) in BREAKER_NAMES.iter().enumerate() {
                for s in 0..seeds {
                    let seed = derive_seed(99, &[n as u64, a as u64, bi as u64, s]);
                    let cfg = GameConfig::maker_breaker(fam.clone(), n, a, a, seed);
                    let r = run_named(cfg, "auto", br).unwrap();
                    if !r.within_bound() {
                        misses.push(format!("{fam} n={n} a={a} {br} seed={seed}: {:?}", r.error));
                    }
                }
            }
        }
    }
    misses
}

#[test]
fn perfect_matching_beats_every_opponent() {
    let misses = sweep(Family::PerfectMatching, &[36, 61, 80], &[2, 3], 3);
    assert!(misses.is_empty(), "{misses:#?}");
}

#[test]
fn hamilton_beats_every_opponent() {
    let misses = sweep(Family::Hamilton, &[40, 61, 80], &[2, 3], 3);
    assert!(misses.is_empty(), "{misses:#?}");
}

#[test]
fn path_factor_beats_every_opponent() {
    let misses = sweep(Family::PathFactor(3), &[60, 120], &[1, 2, 3], 2);
    assert!(misses.is_empty(), "{misses:#?}");
}

#[test]
fn star_factor_beats_every_opponent() {
    let misses = sweep(Family::StarFactor(3), &[60, 120], &[2, 3], 2);
    assert!(misses.is_empty(), "{misses:#?}");
}

#[test]
fn path_factor_is_perfectly_fast_on_the_smallest_board() {
    // 12 vertices, P3-factor: 8 edges at 2 per move
    let cfg = GameConfig::maker_breaker(Family::PathFactor(3), 12, 2, 2, 1);
    let r = run_named(cfg, "auto", "random").unwrap();
    assert_eq!(r.transcript.winner, Some(Winner::Maker));
    assert_eq!(r.transcript.maker_moves_used, 4);
}

#[test]
fn ham_delayer_forces_the_extra_move() {
    for n in [40, 50, 62] {
        let cfg = GameConfig::maker_breaker(Family::Hamilton, n, 2, 2, 0);
        let r = run_named(cfg, "auto", "ham_delayer").unwrap();
        assert_eq!(r.transcript.maker_moves_used, n / 2 + 1, "n={n}");
    }
}

#[test]
fn red_wins_the_strong_game() {
    for (i, blue) in ["random", "ham", "matching_blocker"].iter().enumerate() {
        for n in [40, 60] {
            let cfg = GameConfig::strong(
                Family::Hamilton,
                n,
                2,
                2,
                derive_seed(5, &[n as u64, i as u64]),
            );
            let r = run_named(cfg, "auto", blue).unwrap();
            assert_eq!(
                r.transcript.winner,
                Some(Winner::Red),
                "{blue} n={n}: {:?}",
                r.error
            );
            assert!(r.transcript.maker_moves_used <= n / 2 + 1);
        }
    }
}

#[test]
fn strategies_refuse_unsuitable_games() {
    let cfg = GameConfig::maker_breaker(Family::StarFactor(3), 12, 1, 1, 0);
    let r = run_named(cfg, "auto", "random").unwrap();
    assert!(r.error.as_deref().is_some_and(|e| e.contains("a >= 2")));
    let cfg = GameConfig::maker_breaker(Family::Hamilton, 40, 2, 2, 0);
    let r = run_named(cfg, "red", "random").unwrap();
    assert!(r.error.is_some());
}

#[test]
fn same_seed_same_transcript() {
    for (fam, n) in [
        (Family::PerfectMatching, 60),
        (Family::Hamilton, 60),
        (Family::PathFactor(4), 120),
    ] {
        let cfg = GameConfig::maker_breaker(fam, n, 2, 2, 42);
        let a = run_named(cfg.clone(), "auto", "isolate_blocker").unwrap();
        let b = run_named(cfg, "auto", "isolate_blocker").unwrap();
        assert_eq!(a.transcript.to_json(), b.transcript.to_json());
    }
}
