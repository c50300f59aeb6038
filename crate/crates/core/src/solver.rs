//! Exact game values on tiny boards by minimax over edge states.
//!
//! A value counts Maker moves: from a position it is the number of Maker
//! moves (the current one included when Maker is to move) she needs to win
//! against best defence, or a Breaker win.

use std::collections::HashMap;

use thiserror::Error;

use crate::engine::{BoardKind, Side};
use crate::graph::{Edge, SimpleGraph};
use crate::winset::{Family, TauValue};

/// Edges are held in a `u32` mask.
const MASK_BITS: usize = 32;
const INF: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_edges: usize,
    /// Transposition-table entries before the solver gives up.
    pub max_states: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_edges: 16,
            max_states: 4_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("invalid board: {0}")]
    InvalidBoard(String),
}

/// A tiny board with its winning sets as edge masks.
#[derive(Clone, Debug)]
pub struct ToyGame {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub a: usize,
    pub b: usize,
    /// Minimal winning sets.
    wins: Vec<u32>,
}

impl ToyGame {
    pub fn new(
        n: usize,
        edges: Vec<Edge>,
        family: &Family,
        a: usize,
        b: usize,
        limits: SolveLimits,
    ) -> Result<Self, SolveError> {
        if edges.len() > limits.max_edges.min(MASK_BITS) {
            return Err(SolveError::LimitExceeded(format!(
                "{} edges (limit {})",
                edges.len(),
                limits.max_edges.min(MASK_BITS)
            )));
        }
        if a == 0 || b == 0 {
            return Err(SolveError::InvalidBoard("biases must be positive".into()));
        }
        if let Some(e) = edges.iter().find(|e| e.v >= n || e.u == e.v) {
            return Err(SolveError::InvalidBoard(format!("edge {e} out of range")));
        }
        let wins = match family {
            Family::Custom(sets) => {
                let mut wins: Vec<u32> = sets
                    .iter()
                    .filter_map(|s| {
                        s.iter().try_fold(0u32, |m, e| {
                            edges.iter().position(|f| f == e).map(|i| m | 1 << i)
                        })
                    })
                    .collect();
                wins.sort_by_key(|m| (m.count_ones(), *m));
                minimal(wins)
            }
            _ => minimal_winning_sets(n, &edges, family),
        };
        Ok(ToyGame {
            n,
            edges,
            a,
            b,
            wins,
        })
    }

    /// The whole of `K_n` or the balanced `K_{n/2,n/2}`.
    pub fn on(
        kind: BoardKind,
        n: usize,
        family: &Family,
        a: usize,
        b: usize,
        limits: SolveLimits,
    ) -> Result<Self, SolveError> {
        let half = n / 2;
        let edges = (0..n)
            .flat_map(|v| (0..v).map(move |u| Edge::new(u, v)))
            .filter(|e| kind == BoardKind::Complete || (e.u < half) != (e.v < half))
            .collect();
        Self::new(n, edges, family, a, b, limits)
    }

    pub fn winning_sets(&self) -> Vec<Vec<Edge>> {
        self.wins.iter().map(|&m| self.edges_of(m)).collect()
    }

    pub fn edges_of(&self, mask: u32) -> Vec<Edge> {
        (0..self.edges.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.edges[i])
            .collect()
    }

    pub fn mask_of(&self, edges: &[Edge]) -> Result<u32, SolveError> {
        edges.iter().try_fold(0u32, |m, e| {
            self.edges
                .iter()
                .position(|f| f == e)
                .map(|i| m | 1 << i)
                .ok_or_else(|| SolveError::InvalidBoard(format!("edge {e} is not on the board")))
        })
    }

    fn full(&self) -> u32 {
        if self.edges.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.edges.len()) - 1
        }
    }

    fn bias(&self, side: Side) -> usize {
        match side {
            Side::Maker => self.a,
            Side::Breaker => self.b,
        }
    }

    fn won(&self, maker: u32) -> bool {
        self.wins.iter().any(|&w| is_subset(w, maker))
    }

    /// Fewest edges Maker still needs, or `None` if Breaker has hit every winning set.
    fn need(&self, maker: u32, breaker: u32) -> Option<u32> {
        self.wins
            .iter()
            .filter(|&&w| w & breaker == 0)
            .map(|&w| (w & !maker).count_ones())
            .min()
    }
}

fn is_subset(small: u32, big: u32) -> bool {
    small & big == small
}

/// Keeps the sets (sorted by size) that contain no earlier set.
fn minimal(sorted: Vec<u32>) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    for m in sorted {
        if !out.iter().any(|&w| is_subset(w, m)) {
            out.push(m);
        }
    }
    out
}

fn minimal_winning_sets(n: usize, edges: &[Edge], family: &Family) -> Vec<u32> {
    let e = edges.len();
    let mut masks: Vec<u32> = (0..(1u64 << e)).map(|m| m as u32).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut out: Vec<u32> = Vec::new();
    for m in masks {
        if out.iter().any(|&w| is_subset(w, m)) {
            continue;
        }
        let g = SimpleGraph::from_edges(n, (0..e).filter(|i| m >> i & 1 == 1).map(|i| edges[i]));
        if family.is_satisfied_by(&g) {
            out.push(m);
        }
    }
    out
}

/// A position: who holds what, who moves, and how many steps remain in the move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Position {
    pub maker: u32,
    pub breaker: u32,
    pub to_move: Side,
    pub steps_left: usize,
}

impl Position {
    pub fn start(game: &ToyGame, first: Side) -> Self {
        Position {
            maker: 0,
            breaker: 0,
            to_move: first,
            steps_left: game.bias(first),
        }
    }
}

fn to_tau(v: u32) -> TauValue {
    if v == INF {
        TauValue::BreakerWin
    } else {
        TauValue::exact(v as usize)
    }
}

/// Memoizing solver; one instance can answer many positions of the same game.
pub struct Solver<'g> {
    game: &'g ToyGame,
    limits: SolveLimits,
    memo: HashMap<Position, u32>,
}

impl<'g> Solver<'g> {
    pub fn new(game: &'g ToyGame, limits: SolveLimits) -> Self {
        Solver {
            game,
            limits,
            memo: HashMap::new(),
        }
    }

    pub fn states(&self) -> usize {
        self.memo.len()
    }

    pub fn value(&mut self, pos: Position) -> Result<TauValue, SolveError> {
        self.eval(pos).map(to_tau)
    }

    /// After `e` is claimed, the position and whether Maker just won.
    fn after(&self, pos: Position, bit: u32) -> (Position, bool) {
        let g = self.game;
        let mut p = pos;
        match pos.to_move {
            Side::Maker => p.maker |= bit,
            Side::Breaker => p.breaker |= bit,
        }
        let won = pos.to_move == Side::Maker && g.won(p.maker);
        p.steps_left -= 1;
        if p.steps_left == 0 {
            p.to_move = pos.to_move.other();
            p.steps_left = g.bias(p.to_move);
        }
        (p, won)
    }

    /// Maker moves still needed, with 1 added when a Maker move completes.
    fn child_value(&mut self, pos: Position, bit: u32) -> Result<u32, SolveError> {
        let (p, won) = self.after(pos, bit);
        if won {
            return Ok(1);
        }
        let v = self.eval(p)?;
        let ends_maker_move = pos.to_move == Side::Maker && p.to_move == Side::Breaker;
        Ok(if ends_maker_move && v != INF {
            v + 1
        } else {
            v
        })
    }

    fn eval(&mut self, pos: Position) -> Result<u32, SolveError> {
        let g = self.game;
        let Some(need) = g.need(pos.maker, pos.breaker) else {
            return Ok(INF);
        };
        let free = g.full() & !(pos.maker | pos.breaker);
        if free == 0 {
            return Ok(INF);
        }
        // a move that runs out of free edges ends early
        let pos = Position {
            steps_left: pos.steps_left.min(free.count_ones() as usize),
            ..pos
        };
        if let Some(&v) = self.memo.get(&pos) {
            return Ok(v);
        }
        if self.memo.len() >= self.limits.max_states {
            return Err(SolveError::LimitExceeded(format!(
                "more than {} states",
                self.limits.max_states
            )));
        }
        let v = match pos.to_move {
            Side::Maker => {
                let floor = lower_bound(need, pos.steps_left, g.a);
                let mut best = INF;
                for i in bits(free) {
                    best = best.min(self.child_value(pos, 1 << i)?);
                    if best == floor {
                        break;
                    }
                }
                best
            }
            Side::Breaker => {
                let mut worst = 0;
                for i in bits(free) {
                    worst = worst.max(self.child_value(pos, 1 << i)?);
                    if worst == INF {
                        break;
                    }
                }
                worst
            }
        };
        self.memo.insert(pos, v);
        Ok(v)
    }

    /// Steps of an optimal move from `pos`, stopping early on a win.
    pub fn best_move(&mut self, pos: Position) -> Result<(Vec<Edge>, TauValue), SolveError> {
        let value = self.eval(pos)?;
        let g = self.game;
        let side = pos.to_move;
        let mut cur = pos;
        let mut out = Vec::new();
        loop {
            let free = g.full() & !(cur.maker | cur.breaker);
            if free == 0 {
                break;
            }
            // value of the position reached, measured from `pos`'s move
            let mut pick = None;
            for i in bits(free) {
                let v = self.child_value(cur, 1 << i)?;
                let better = match (pick, side) {
                    (None, _) => true,
                    (Some((_, b)), Side::Maker) => v < b,
                    (Some((_, b)), Side::Breaker) => v > b,
                };
                if better {
                    pick = Some((i, v));
                }
            }
            let (i, _) = pick.unwrap();
            out.push(g.edges[i]);
            let (next, won) = self.after(cur, 1 << i);
            if won || next.to_move != side {
                break;
            }
            cur = next;
        }
        Ok((out, to_tau(value)))
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..MASK_BITS).filter(move |i| mask >> i & 1 == 1)
}

/// Fewest Maker moves to collect `need` edges with `steps` left in the current move.
fn lower_bound(need: u32, steps: usize, a: usize) -> u32 {
    let need = need as usize;
    if need <= steps {
        1
    } else {
        (1 + (need - steps).div_ceil(a)) as u32
    }
}

/// τ of the game: Maker moves needed from the empty board with `first` to move.
pub fn solve_tau(game: &ToyGame, first: Side, limits: SolveLimits) -> Result<TauValue, SolveError> {
    Solver::new(game, limits).value(Position::start(game, first))
}

/// An optimal move for the side to move at `pos`, with the position's value.
pub fn best_move(
    game: &ToyGame,
    pos: Position,
    limits: SolveLimits,
) -> Result<(Vec<Edge>, TauValue), SolveError> {
    Solver::new(game, limits).best_move(pos)
}

/// Plain minimax without memo or pruning, for cross-checking small boards.
pub fn solve_tau_unmemoized(
    game: &ToyGame,
    first: Side,
    limits: SolveLimits,
) -> Result<TauValue, SolveError> {
    if game.edges.len() > limits.max_edges.min(12) {
        return Err(SolveError::LimitExceeded(format!(
            "{} edges for the plain search",
            game.edges.len()
        )));
    }
    fn go(g: &ToyGame, maker: u32, breaker: u32, side: Side, steps: usize) -> u32 {
        let free = g.full() & !(maker | breaker);
        if free == 0 {
            return INF;
        }
        let steps = steps.min(free.count_ones() as usize);
        let vals = bits(free).map(|i| {
            let bit = 1u32 << i;
            let (m, b) = if side == Side::Maker {
                (maker | bit, breaker)
            } else {
                (maker, breaker | bit)
            };
            if side == Side::Maker && g.won(m) {
                return 1;
            }
            if steps > 1 {
                return go(g, m, b, side, steps - 1);
            }
            let v = go(g, m, b, side.other(), g.bias(side.other()));
            if side == Side::Maker && v != INF {
                v + 1
            } else {
                v
            }
        });
        match side {
            Side::Maker => vals.min().unwrap(),
            Side::Breaker => vals.max().unwrap(),
        }
    }
    Ok(to_tau(go(game, 0, 0, first, game.bias(first))))
}
