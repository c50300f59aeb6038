//! Running single games and seeded batches of games.

use rayon::prelude::*;

use crate::breakers::{self, Fallback, RandomBreaker};
use crate::engine::{play, GameConfig, Mode, Transcript, Winner};
use crate::strategy::{HamStrategy, PkStrategy, PmStrategy, RedStrategy, SkStrategy, Strategy};
use crate::winset::{round_bound, Family, TauValue};

/// Maker (or Red) strategy suited to the family and mode.
pub fn default_maker(config: &GameConfig) -> Box<dyn Strategy> {
    match (&config.family, config.mode) {
        (Family::Hamilton, Mode::Strong) => Box::new(RedStrategy::new()),
        (Family::PerfectMatching, _) | (Family::PathFactor(2), _) | (Family::StarFactor(2), _) => {
            Box::new(PmStrategy::new())
        }
        (Family::Hamilton, _) => Box::new(HamStrategy::new()),
        (Family::PathFactor(_), _) => Box::new(PkStrategy::new()),
        (Family::StarFactor(_), _) => Box::new(SkStrategy::new()),
        (Family::Custom(_), _) => Box::new(breakers::FirstFree),
    }
}

/// Maker strategy by name; `auto` picks [`default_maker`].
pub fn maker_by_name(name: &str, config: &GameConfig) -> Option<Box<dyn Strategy>> {
    Some(match name {
        "auto" => default_maker(config),
        "pm" => Box::new(PmStrategy::new()),
        "ham" => Box::new(HamStrategy::new()),
        "red" => Box::new(RedStrategy::new()),
        "pkf" => Box::new(PkStrategy::new()),
        "skf" => Box::new(SkStrategy::new()),
        other => return breakers::by_name(other, config.seed ^ 0xA5A5),
    })
}

/// Opponent by name. `ham` gives the Hamilton strategy playing for the
/// opponent's seat, falling back to random play once it cannot continue.
pub fn breaker_by_name(name: &str, config: &GameConfig) -> Option<Box<dyn Strategy>> {
    match name {
        "ham" => Some(Box::new(Fallback::new(
            HamStrategy::new(),
            RandomBreaker::new(config.seed),
        ))),
        other => breakers::by_name(other, config.seed),
    }
}

/// Outcome of one game with its closed-form bound.
#[derive(Clone, Debug)]
pub struct GameResult {
    pub transcript: Transcript,
    /// Strategy failure or engine error that stopped the game early.
    pub error: Option<String>,
    pub bound: Option<TauValue>,
}

impl GameResult {
    /// Did the pursuing player win within the bound (when one applies)?
    pub fn within_bound(&self) -> bool {
        let t = &self.transcript;
        let won = matches!(t.winner, Some(Winner::Maker) | Some(Winner::Red));
        if !won || self.error.is_some() {
            return false;
        }
        match self.bound.and_then(|b| b.rounds()) {
            Some(r) => t.maker_moves_used <= r,
            None => true,
        }
    }

    pub fn invariants_passed(&self) -> bool {
        self.transcript.invariants_passed()
    }
}

/// Closed-form bound for the configuration, if one applies.
pub fn bound_for(config: &GameConfig) -> Option<TauValue> {
    match (&config.family, config.mode) {
        (Family::Hamilton, Mode::Strong) => round_bound(&Family::Hamilton, config.a, config.n)
            .ok()
            .map(|_| TauValue::exact(config.n / 2 + 1)),
        (f, _) => round_bound(f, config.a, config.n).ok(),
    }
}

pub fn run_game(
    config: GameConfig,
    maker: &mut dyn Strategy,
    breaker: &mut dyn Strategy,
) -> GameResult {
    let bound = bound_for(&config);
    match play(config, maker, breaker) {
        Ok(transcript) => GameResult {
            transcript,
            error: None,
            bound,
        },
        Err(e) => GameResult {
            transcript: e.transcript().clone(),
            error: Some(e.to_string()),
            bound,
        },
    }
}

/// Runs one game with strategies looked up by name.
pub fn run_named(config: GameConfig, maker: &str, breaker: &str) -> Result<GameResult, String> {
    let mut m =
        maker_by_name(maker, &config).ok_or_else(|| format!("unknown maker strategy {maker:?}"))?;
    let mut b = breaker_by_name(breaker, &config)
        .ok_or_else(|| format!("unknown breaker strategy {breaker:?}"))?;
    Ok(run_game(config, m.as_mut(), b.as_mut()))
}

/// One cell of a batch.
#[derive(Clone, Debug)]
pub struct BatchJob {
    pub config: GameConfig,
    pub maker: String,
    pub breaker: String,
}

/// Runs jobs in parallel; results come back in job order.
pub fn run_batch(jobs: &[BatchJob]) -> Vec<Result<GameResult, String>> {
    jobs.par_iter()
        .map(|j| run_named(j.config.clone(), &j.maker, &j.breaker))
        .collect()
}

/// Derives a per-game seed from a batch seed and the game's coordinates.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = base ^ 0xCBF2_9CE4_8422_2325;
    for &p in parts {
        h ^= p;
        h = h.wrapping_mul(0x100_0000_01B3);
        h ^= h >> 29;
    }
    h
}
