//! Fair (a:a) Maker-Breaker and strong positional games on the edges of
//! complete and complete bipartite graphs: an engine, fast Maker strategies
//! for perfect matchings, Hamilton cycles and path/star factors, adversarial
//! Breakers, and an exact solver for tiny boards.

pub mod breakers;
pub mod engine;
pub mod graph;
pub mod graphtools;
pub mod harness;
pub mod solver;
pub mod strategy;
pub mod winset;

pub use engine::{
    play, replay, verify, Board, BoardKind, FirstPlayer, GameConfig, GameState, Mode, Side,
    Transcript, Winner,
};
pub use graph::{Edge, SimpleGraph};
pub use winset::{round_bound, Family, TauValue};
