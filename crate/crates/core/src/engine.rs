//! Board representation, move legality, turn order and transcripts.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{pair_count, pair_index, Edge, SimpleGraph};
use crate::strategy::{Strategy, Turn};
use crate::winset::Family;

/// One of the two seats at the table. In strong games Red sits in the
/// Maker seat and Blue in the Breaker seat.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Maker,
    Breaker,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Maker => Side::Breaker,
            Side::Breaker => Side::Maker,
        }
    }

    fn idx(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    MakerBreaker,
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstPlayer {
    Maker,
    Breaker,
    Red,
}

impl FirstPlayer {
    pub fn side(self) -> Side {
        match self {
            FirstPlayer::Maker | FirstPlayer::Red => Side::Maker,
            FirstPlayer::Breaker => Side::Breaker,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Maker,
    Breaker,
    Red,
    Blue,
    Draw,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Winner::Maker => "maker",
            Winner::Breaker => "breaker",
            Winner::Red => "red",
            Winner::Blue => "blue",
            Winner::Draw => "draw",
        };
        f.write_str(s)
    }
}

/// Name of a seat as it appears in transcripts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayerName {
    Maker,
    Breaker,
    Red,
    Blue,
}

impl PlayerName {
    pub fn of(side: Side, mode: Mode) -> Self {
        match (side, mode) {
            (Side::Maker, Mode::MakerBreaker) => PlayerName::Maker,
            (Side::Breaker, Mode::MakerBreaker) => PlayerName::Breaker,
            (Side::Maker, Mode::Strong) => PlayerName::Red,
            (Side::Breaker, Mode::Strong) => PlayerName::Blue,
        }
    }

    pub fn side(self) -> Side {
        match self {
            PlayerName::Maker | PlayerName::Red => Side::Maker,
            PlayerName::Breaker | PlayerName::Blue => Side::Breaker,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoardKind {
    Complete,
    /// Balanced complete bipartite board: left side `0..n/2`, right side `n/2..n`.
    Bipartite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Owner {
    Free,
    Maker,
    Breaker,
    /// Pair that is not an edge of the board (same side of a bipartite board).
    Absent,
}

impl Owner {
    fn of(side: Side) -> Owner {
        match side {
            Side::Maker => Owner::Maker,
            Side::Breaker => Owner::Breaker,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid handicap: {0}")]
    InvalidHandicap(String),
    #[error("illegal step: {0}")]
    IllegalStep(String),
    #[error("corrupt transcript: {0}")]
    CorruptTranscript(String),
}

/// Edge-state table with incrementally maintained degree tables.
#[derive(Clone, Debug)]
pub struct Board {
    n: usize,
    kind: BoardKind,
    state: Vec<Owner>,
    deg: [Vec<usize>; 2],
    adj: [Vec<Vec<usize>>; 2],
    claimed: [usize; 2],
    free: usize,
    total: usize,
}

impl Board {
    pub fn new(n: usize, kind: BoardKind) -> Self {
        let mut state = vec![Owner::Free; pair_count(n)];
        let mut total = state.len();
        if kind == BoardKind::Bipartite {
            let half = n / 2;
            for v in 0..n {
                for u in 0..v {
                    if (u < half) == (v < half) {
                        state[pair_index(Edge::new(u, v))] = Owner::Absent;
                        total -= 1;
                    }
                }
            }
        }
        Board {
            n,
            kind,
            state,
            deg: [vec![0; n], vec![0; n]],
            adj: [vec![Vec::new(); n], vec![Vec::new(); n]],
            claimed: [0, 0],
            free: total,
            total,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> BoardKind {
        self.kind
    }

    pub fn in_range(&self, e: Edge) -> bool {
        e.u != e.v && e.v < self.n
    }

    pub fn owner(&self, u: usize, v: usize) -> Owner {
        if u == v {
            return Owner::Absent;
        }
        self.state[pair_index(Edge::new(u, v))]
    }

    pub fn is_free(&self, u: usize, v: usize) -> bool {
        self.owner(u, v) == Owner::Free
    }

    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        self.owner(u, v) != Owner::Absent
    }

    pub fn owned_by(&self, side: Side, u: usize, v: usize) -> bool {
        self.owner(u, v) == Owner::of(side)
    }

    pub fn degree(&self, side: Side, v: usize) -> usize {
        self.deg[side.idx()][v]
    }

    pub fn degrees(&self, side: Side) -> &[usize] {
        &self.deg[side.idx()]
    }

    /// Neighbours of `v` in `side`'s graph, in claim order.
    pub fn neighbors(&self, side: Side, v: usize) -> &[usize] {
        &self.adj[side.idx()][v]
    }

    pub fn claimed_count(&self, side: Side) -> usize {
        self.claimed[side.idx()]
    }

    pub fn free_count(&self) -> usize {
        self.free
    }

    pub fn total_edges(&self) -> usize {
        self.total
    }

    /// Claims a free edge. Panics if the edge is not free; callers validate.
    pub fn claim(&mut self, e: Edge, side: Side) {
        let slot = &mut self.state[pair_index(e)];
        assert_eq!(*slot, Owner::Free, "claiming non-free edge {e}");
        *slot = Owner::of(side);
        let s = side.idx();
        self.deg[s][e.u] += 1;
        self.deg[s][e.v] += 1;
        self.adj[s][e.u].push(e.v);
        self.adj[s][e.v].push(e.u);
        self.claimed[s] += 1;
        self.free -= 1;
    }

    pub fn edges_of(&self, side: Side) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.claimed[side.idx()]);
        for (u, list) in self.adj[side.idx()].iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| Edge::new(u, v)));
        }
        out.sort_unstable();
        out
    }

    pub fn graph_of(&self, side: Side) -> SimpleGraph {
        SimpleGraph::from_edges(self.n, self.edges_of(side))
    }

    /// Free edges in lexicographic order.
    pub fn free_edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.free);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.is_free(u, v) {
                    out.push(Edge::new(u, v));
                }
            }
        }
        out
    }

    /// Recounts every table from the edge states; true iff they agree.
    pub fn tables_consistent(&self) -> bool {
        let mut deg = [vec![0usize; self.n], vec![0usize; self.n]];
        let mut claimed = [0usize; 2];
        let mut free = 0;
        let mut total = 0;
        for v in 0..self.n {
            for u in 0..v {
                match self.owner(u, v) {
                    Owner::Absent => continue,
                    Owner::Free => free += 1,
                    Owner::Maker | Owner::Breaker => {
                        let s = if self.owner(u, v) == Owner::Maker {
                            0
                        } else {
                            1
                        };
                        deg[s][u] += 1;
                        deg[s][v] += 1;
                        claimed[s] += 1;
                    }
                }
                total += 1;
            }
        }
        let adj_ok = (0..2).all(|s| (0..self.n).all(|v| self.adj[s][v].len() == deg[s][v]));
        deg == self.deg
            && claimed == self.claimed
            && free == self.free
            && total == self.total
            && adj_ok
    }
}

/// Game parameters. Serialises to the flat transcript `config` record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRecord", into = "ConfigRecord")]
pub struct GameConfig {
    pub family: Family,
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub first: FirstPlayer,
    pub mode: Mode,
    pub board: BoardKind,
    pub handicap: Vec<Edge>,
    pub seed: u64,
}

impl GameConfig {
    /// Maker-Breaker game on `K_n` with Breaker moving first.
    pub fn maker_breaker(family: Family, n: usize, a: usize, b: usize, seed: u64) -> Self {
        GameConfig {
            family,
            n,
            a,
            b,
            first: FirstPlayer::Breaker,
            mode: Mode::MakerBreaker,
            board: BoardKind::Complete,
            handicap: Vec::new(),
            seed,
        }
    }

    /// Strong game on `K_n` with Red moving first.
    pub fn strong(family: Family, n: usize, a: usize, b: usize, seed: u64) -> Self {
        GameConfig {
            first: FirstPlayer::Red,
            mode: Mode::Strong,
            ..Self::maker_breaker(family, n, a, b, seed)
        }
    }

    pub fn bias(&self, side: Side) -> usize {
        match side {
            Side::Maker => self.a,
            Side::Breaker => self.b,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        if self.a == 0 || self.b == 0 {
            return bad("biases must be positive".into());
        }
        if self.n < 2 {
            return bad(format!("n={} is too small", self.n));
        }
        if let Some(k) = self.family.k() {
            if k < 2 || !self.n.is_multiple_of(k) {
                return bad(format!("k={k} must be at least 2 and divide n={}", self.n));
            }
        }
        if self.board == BoardKind::Bipartite && !self.n.is_multiple_of(2) {
            return bad("bipartite boards need an even number of vertices".into());
        }
        match (self.mode, self.first) {
            (Mode::Strong, FirstPlayer::Red) => {}
            (Mode::Strong, _) => return bad("strong games start with red".into()),
            (Mode::MakerBreaker, FirstPlayer::Red) => {
                return bad("red only plays strong games".into())
            }
            _ => {}
        }
        if let Family::Custom(sets) = &self.family {
            for e in sets.iter().flatten() {
                if e.v >= self.n {
                    return bad(format!("winning set edge {e} out of range"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ConfigRecord {
    family: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    k: Option<usize>,
    a: usize,
    b: usize,
    first: FirstPlayer,
    mode: Mode,
    board: String,
    handicap: Vec<Edge>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    sets: Option<Vec<Vec<Edge>>>,
}

impl From<GameConfig> for ConfigRecord {
    fn from(c: GameConfig) -> Self {
        let sets = match &c.family {
            Family::Custom(s) => Some(s.clone()),
            _ => None,
        };
        ConfigRecord {
            family: c.family.tag().to_string(),
            n: c.n,
            k: c.family.k(),
            a: c.a,
            b: c.b,
            first: c.first,
            mode: c.mode,
            board: match c.board {
                BoardKind::Complete => "kn".into(),
                BoardKind::Bipartite => "bip".into(),
            },
            handicap: c.handicap,
            seed: c.seed,
            sets,
        }
    }
}

impl TryFrom<ConfigRecord> for GameConfig {
    type Error = String;

    fn try_from(r: ConfigRecord) -> Result<Self, String> {
        let need_k = || r.k.ok_or_else(|| format!("family {} needs k", r.family));
        let family = match r.family.as_str() {
            "pm" => Family::PerfectMatching,
            "ham" => Family::Hamilton,
            "pkf" => Family::PathFactor(need_k()?),
            "skf" => Family::StarFactor(need_k()?),
            "custom" => Family::Custom(r.sets.clone().ok_or("custom family needs sets")?),
            other => return Err(format!("unknown family {other:?}")),
        };
        let board = match r.board.as_str() {
            "kn" => BoardKind::Complete,
            "bip" => BoardKind::Bipartite,
            other => return Err(format!("unknown board {other:?}")),
        };
        Ok(GameConfig {
            family,
            n: r.n,
            a: r.a,
            b: r.b,
            first: r.first,
            mode: r.mode,
            board,
            handicap: r.handicap,
            seed: r.seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub player: PlayerName,
    pub round: usize,
    pub edges: Vec<Edge>,
}

/// Board plus turn bookkeeping for one game in progress.
#[derive(Clone, Debug)]
pub struct GameState {
    pub board: Board,
    pub config: GameConfig,
    /// Index of the current round, starting at 1 with the first player's first move.
    pub round: usize,
    pub to_move: Side,
    /// Steps already taken in the move in progress.
    pub steps_in_move: usize,
    pub moves: Vec<MoveRecord>,
    pub maker_moves: usize,
    pub finished: Option<Winner>,
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let mut board = Board::new(config.n, config.board);
        for &e in &config.handicap {
            if !board.in_range(e) || !board.is_edge(e.u, e.v) {
                return Err(EngineError::InvalidHandicap(format!(
                    "{e} is not an edge of the board"
                )));
            }
            if !board.is_free(e.u, e.v) {
                return Err(EngineError::InvalidHandicap(format!("{e} listed twice")));
            }
            board.claim(e, Side::Breaker);
        }
        let to_move = config.first.side();
        let mut state = GameState {
            board,
            config,
            round: 0,
            to_move,
            steps_in_move: 0,
            moves: Vec::new(),
            maker_moves: 0,
            finished: None,
        };
        if state.board.free_count() == 0 {
            state.finished = Some(state.exhaustion_winner());
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.board.n()
    }

    pub fn family(&self) -> &Family {
        &self.config.family
    }

    pub fn bias(&self, side: Side) -> usize {
        self.config.bias(side)
    }

    /// Number of edges the mover must claim this move.
    pub fn steps_due(&self) -> usize {
        (self.bias(self.to_move) - self.steps_in_move).min(self.board.free_count())
    }

    /// Edges of the most recent completed or running move of `side`.
    pub fn last_move_of(&self, side: Side) -> &[Edge] {
        self.moves
            .iter()
            .rev()
            .find(|m| m.player.side() == side)
            .map(|m| m.edges.as_slice())
            .unwrap_or(&[])
    }

    /// Number of moves `side` has started so far.
    pub fn moves_by(&self, side: Side) -> usize {
        self.moves
            .iter()
            .filter(|m| m.player.side() == side)
            .count()
    }

    fn exhaustion_winner(&self) -> Winner {
        match self.config.mode {
            Mode::MakerBreaker => Winner::Breaker,
            Mode::Strong => Winner::Draw,
        }
    }

    fn pursues(&self, side: Side) -> bool {
        side == Side::Maker || self.config.mode == Mode::Strong
    }

    /// Whether `side`'s graph currently contains a winning set.
    pub fn has_won(&self, side: Side) -> bool {
        let fam = &self.config.family;
        let b = &self.board;
        if !fam.could_be_satisfied(b.n(), b.claimed_count(side), b.degrees(side)) {
            return false;
        }
        fam.is_satisfied_by(&b.graph_of(side))
    }

    /// Claims one edge for `side`, running win detection afterwards.
    pub fn apply_step(&mut self, side: Side, e: Edge) -> Result<Option<Winner>, EngineError> {
        if self.finished.is_some() {
            return Err(EngineError::IllegalStep("game is over".into()));
        }
        if side != self.to_move {
            return Err(EngineError::IllegalStep(format!(
                "{:?} is not to move",
                PlayerName::of(side, self.config.mode)
            )));
        }
        if !self.board.in_range(e) || !self.board.is_edge(e.u, e.v) {
            return Err(EngineError::IllegalStep(format!(
                "{e} is not an edge of the board"
            )));
        }
        if !self.board.is_free(e.u, e.v) {
            return Err(EngineError::IllegalStep(format!("{e} is already claimed")));
        }
        if self.steps_in_move == 0 {
            if side == self.config.first.side() {
                self.round += 1;
            }
            if side == Side::Maker {
                self.maker_moves += 1;
            }
            let player = PlayerName::of(side, self.config.mode);
            self.moves.push(MoveRecord {
                player,
                round: self.round.max(1),
                edges: Vec::new(),
            });
        }
        self.board.claim(e, side);
        self.moves.last_mut().expect("move started").edges.push(e);
        self.steps_in_move += 1;

        if self.pursues(side) && self.has_won(side) {
            let w = match (self.config.mode, side) {
                (Mode::MakerBreaker, _) => Winner::Maker,
                (Mode::Strong, Side::Maker) => Winner::Red,
                (Mode::Strong, Side::Breaker) => Winner::Blue,
            };
            self.finished = Some(w);
            return Ok(self.finished);
        }
        if self.board.free_count() == 0 {
            self.finished = Some(self.exhaustion_winner());
            return Ok(self.finished);
        }
        if self.steps_in_move == self.bias(side) {
            self.steps_in_move = 0;
            self.to_move = side.other();
        }
        Ok(None)
    }
}

/// Outcome of one named invariant over a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Default)]
struct InvariantEntry {
    checks: usize,
    failures: usize,
    first_failure: Option<String>,
}

/// Collects named invariant checks made during a game. Names starting with
/// `observed:` are recorded but do not affect [`InvariantLog::all_passed`].
#[derive(Clone, Debug, Default)]
pub struct InvariantLog {
    entries: BTreeMap<String, InvariantEntry>,
    prefix: String,
}

pub const OBSERVED_PREFIX: &str = "observed:";

impl InvariantLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Prefix prepended to every name recorded until it is reset.
    pub fn set_prefix(&mut self, prefix: &str) {
        self.prefix = prefix.to_string();
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        let key = format!("{}{}", self.prefix, name);
        let entry = self.entries.entry(key).or_default();
        entry.checks += 1;
        if !ok {
            entry.failures += 1;
            if entry.first_failure.is_none() {
                entry.first_failure = Some(detail());
            }
        }
    }

    pub fn all_passed(&self) -> bool {
        self.entries
            .iter()
            .all(|(k, e)| k.starts_with(OBSERVED_PREFIX) || e.failures == 0)
    }

    pub fn failures(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter(|(_, e)| e.failures > 0)
            .map(|(k, e)| (k.clone(), e.first_failure.clone().unwrap_or_default()))
            .collect()
    }

    pub fn checks(&self, name: &str) -> usize {
        self.entries.get(name).map_or(0, |e| e.checks)
    }

    pub fn report(&self) -> BTreeMap<String, Verdict> {
        self.entries
            .iter()
            .map(|(k, e)| {
                (
                    k.clone(),
                    if e.failures == 0 {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    },
                )
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub moves: Vec<MoveRecord>,
    pub winner: Option<Winner>,
    pub maker_moves_used: usize,
    pub invariant_report: BTreeMap<String, Verdict>,
}

impl Transcript {
    pub fn from_state(state: &GameState, log: &InvariantLog) -> Self {
        Transcript {
            config: state.config.clone(),
            moves: state.moves.clone(),
            winner: state.finished,
            maker_moves_used: state.maker_moves,
            invariant_report: log.report(),
        }
    }

    pub fn invariants_passed(&self) -> bool {
        self.invariant_report
            .iter()
            .all(|(k, v)| k.starts_with(OBSERVED_PREFIX) || *v == Verdict::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, EngineError> {
        serde_json::from_str(s).map_err(|e| EngineError::CorruptTranscript(e.to_string()))
    }
}

/// Rebuilds the game from a transcript, re-validating every step. A
/// truncated transcript yields an unfinished state.
pub fn replay(t: &Transcript) -> Result<GameState, EngineError> {
    let corrupt = |m: String| EngineError::CorruptTranscript(m);
    let mut state = GameState::new(t.config.clone()).map_err(|e| corrupt(e.to_string()))?;
    for (i, mv) in t.moves.iter().enumerate() {
        if mv.player != PlayerName::of(mv.player.side(), state.config.mode) {
            return Err(corrupt(format!(
                "move {i}: player {:?} does not belong to this mode",
                mv.player
            )));
        }
        if state.steps_in_move != 0 {
            return Err(corrupt(format!("move {i}: previous move was cut short")));
        }
        for &e in &mv.edges {
            state
                .apply_step(mv.player.side(), e)
                .map_err(|err| corrupt(format!("move {i}: {err}")))?;
        }
        if state.round != mv.round {
            return Err(corrupt(format!(
                "move {i}: recorded round {} but replay is in round {}",
                mv.round, state.round
            )));
        }
    }
    Ok(state)
}

/// Replays `t` and checks that the recorded result matches the replay.
pub fn verify(t: &Transcript) -> Result<GameState, EngineError> {
    let state = replay(t)?;
    if state.finished != t.winner {
        return Err(EngineError::CorruptTranscript(format!(
            "recorded winner {:?} but replay gives {:?}",
            t.winner, state.finished
        )));
    }
    if state.maker_moves != t.maker_moves_used {
        return Err(EngineError::CorruptTranscript(format!(
            "recorded {} maker moves but replay gives {}",
            t.maker_moves_used, state.maker_moves
        )));
    }
    Ok(state)
}

/// A game that stopped because a strategy failed; carries the partial transcript.
#[derive(Debug, Error)]
pub enum PlayError {
    #[error("{failure}")]
    Strategy {
        failure: crate::strategy::StrategyFailure,
        transcript: Box<Transcript>,
    },
    #[error("{error}")]
    Engine {
        error: EngineError,
        transcript: Box<Transcript>,
    },
}

impl PlayError {
    pub fn transcript(&self) -> &Transcript {
        match self {
            PlayError::Strategy { transcript, .. } | PlayError::Engine { transcript, .. } => {
                transcript
            }
        }
    }
}

/// Plays a full game between two strategies.
pub fn play(
    config: GameConfig,
    maker: &mut dyn Strategy,
    breaker: &mut dyn Strategy,
) -> Result<Transcript, PlayError> {
    let mut log = InvariantLog::new();
    play_logged(config, maker, breaker, &mut log)
}

pub fn play_logged(
    config: GameConfig,
    maker: &mut dyn Strategy,
    breaker: &mut dyn Strategy,
    log: &mut InvariantLog,
) -> Result<Transcript, PlayError> {
    let mut state = match GameState::new(config.clone()) {
        Ok(s) => s,
        Err(error) => {
            let transcript = Box::new(Transcript {
                config,
                moves: Vec::new(),
                winner: None,
                maker_moves_used: 0,
                invariant_report: BTreeMap::new(),
            });
            return Err(PlayError::Engine { error, transcript });
        }
    };
    while state.finished.is_none() {
        let side = state.to_move;
        let steps = state.steps_due();
        let strategy: &mut dyn Strategy = match side {
            Side::Maker => &mut *maker,
            Side::Breaker => &mut *breaker,
        };
        let turn = Turn {
            state: &state,
            side,
            steps,
        };
        let edges = match strategy.choose_move(&turn, log) {
            Ok(e) => e,
            Err(failure) => {
                let transcript = Box::new(Transcript::from_state(&state, log));
                return Err(PlayError::Strategy {
                    failure,
                    transcript,
                });
            }
        };
        if edges.len() > steps {
            let error = EngineError::IllegalStep(format!(
                "{} returned {} edges for a {steps}-step move",
                strategy.name(),
                edges.len()
            ));
            return Err(PlayError::Engine {
                error,
                transcript: Box::new(Transcript::from_state(&state, log)),
            });
        }
        let given = edges.len();
        for e in edges {
            match state.apply_step(side, e) {
                Ok(Some(_)) => break,
                Ok(None) => {}
                Err(error) => {
                    let error = EngineError::IllegalStep(format!("{}: {error}", strategy.name()));
                    return Err(PlayError::Engine {
                        error,
                        transcript: Box::new(Transcript::from_state(&state, log)),
                    });
                }
            }
        }
        if state.finished.is_none() && given < steps {
            let failure = crate::strategy::StrategyFailure::new(
                strategy.name(),
                format!("returned {given} of {steps} edges without winning"),
            );
            return Err(PlayError::Strategy {
                failure,
                transcript: Box::new(Transcript::from_state(&state, log)),
            });
        }
    }
    check_game_invariants(&state, log);
    Ok(Transcript::from_state(&state, log))
}

/// Engine-level invariants checked once a game is over.
pub fn check_game_invariants(state: &GameState, log: &mut InvariantLog) {
    let b = &state.board;
    log.check(
        "engine.conservation",
        b.claimed_count(Side::Maker) + b.claimed_count(Side::Breaker) + b.free_count()
            == b.total_edges(),
        || "claimed plus free edges differ from the board size".into(),
    );
    log.check("engine.degree_tables", b.tables_consistent(), || {
        "degree tables disagree with a recount".into()
    });
    let last = state.moves.len().saturating_sub(1);
    let mut short = None;
    for (i, m) in state.moves.iter().enumerate() {
        if i != last && m.edges.len() != state.bias(m.player.side()) {
            short = Some(i);
            break;
        }
    }
    log.check("engine.bias_discipline", short.is_none(), || {
        format!("move {} has the wrong number of edges", short.unwrap())
    });
    let winner_side = match state.finished {
        Some(Winner::Maker) | Some(Winner::Red) => Some(Side::Maker),
        Some(Winner::Blue) => Some(Side::Breaker),
        _ => None,
    };
    if let Some(side) = winner_side {
        let need = state.family().min_winning_size(state.n());
        let have = b.claimed_count(side);
        log.check("engine.lower_bound", have >= need, || {
            format!("winner holds {have} edges, fewer than {need}")
        });
        let moves = state.moves_by(side);
        let bias = state.bias(side);
        log.check(
            "engine.move_lower_bound",
            moves >= need.div_ceil(bias),
            || {
                format!(
                    "win after {moves} moves, below the counting bound {}",
                    need.div_ceil(bias)
                )
            },
        );
    }
}
