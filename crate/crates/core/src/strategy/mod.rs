//! The strategy interface and the fast-winning Maker strategies.

use thiserror::Error;

use crate::engine::{Board, GameState, InvariantLog, Side};
use crate::graph::Edge;

pub mod ham;
pub mod pk;
pub mod pm;
pub mod red;
pub mod sk;

pub use ham::HamStrategy;
pub use pk::PkStrategy;
pub use pm::PmStrategy;
pub use red::RedStrategy;
pub use sk::SkStrategy;

/// A strategy could not produce the move its rules mandate.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{strategy}: {reason}")]
pub struct StrategyFailure {
    pub strategy: String,
    pub reason: String,
}

impl StrategyFailure {
    pub fn new(strategy: &str, reason: impl Into<String>) -> Self {
        StrategyFailure {
            strategy: strategy.to_string(),
            reason: reason.into(),
        }
    }
}

/// What a strategy sees when asked for a move.
pub struct Turn<'a> {
    pub state: &'a GameState,
    pub side: Side,
    /// Number of edges to return (the bias, or fewer if the board runs out).
    pub steps: usize,
}

impl Turn<'_> {
    pub fn board(&self) -> &Board {
        &self.state.board
    }

    pub fn opponent_last(&self) -> &[Edge] {
        self.state.last_move_of(self.side.other())
    }

    /// 1-based index of the move being chosen, counted per side.
    pub fn move_number(&self) -> usize {
        self.state.moves_by(self.side) + 1
    }
}

pub trait Strategy: Send {
    fn name(&self) -> &str;

    /// Returns the edges of the next move in claim order. Returning fewer
    /// than `turn.steps` edges is only legal if they complete a win.
    fn choose_move(
        &mut self,
        turn: &Turn,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure>;
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn choose_move(
        &mut self,
        turn: &Turn,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        (**self).choose_move(turn, log)
    }
}

/// Board seen from one side: "mine", "theirs" or free.
#[derive(Clone, Copy)]
pub struct View<'a> {
    pub board: &'a Board,
    pub me: Side,
}

impl<'a> View<'a> {
    pub fn new(board: &'a Board, me: Side) -> Self {
        View { board, me }
    }

    pub fn n(&self) -> usize {
        self.board.n()
    }

    pub fn mine(&self, u: usize, v: usize) -> bool {
        self.board.owned_by(self.me, u, v)
    }

    pub fn theirs(&self, u: usize, v: usize) -> bool {
        self.board.owned_by(self.me.other(), u, v)
    }

    pub fn free(&self, u: usize, v: usize) -> bool {
        self.board.is_free(u, v)
    }

    pub fn my_degree(&self, v: usize) -> usize {
        self.board.degree(self.me, v)
    }

    pub fn their_degree(&self, v: usize) -> usize {
        self.board.degree(self.me.other(), v)
    }

    pub fn their_neighbors(&self, v: usize) -> &'a [usize] {
        self.board.neighbors(self.me.other(), v)
    }

    pub fn my_neighbors(&self, v: usize) -> &'a [usize] {
        self.board.neighbors(self.me, v)
    }

    /// Opponent degree of `v` into the vertex set marked in `set`.
    pub fn their_degree_into(&self, v: usize, set: &[bool]) -> usize {
        self.their_neighbors(v).iter().filter(|&&w| set[w]).count()
    }
}

/// Scratch copy of the board a strategy updates while planning a move.
pub struct Planner {
    pub board: Board,
    pub me: Side,
    pub edges: Vec<Edge>,
}

impl Planner {
    pub fn new(turn: &Turn) -> Self {
        Planner {
            board: turn.board().clone(),
            me: turn.side,
            edges: Vec::new(),
        }
    }

    pub fn view(&self) -> View<'_> {
        View::new(&self.board, self.me)
    }

    pub fn claim(&mut self, e: Edge) {
        self.board.claim(e, self.me);
        self.edges.push(e);
    }
}
