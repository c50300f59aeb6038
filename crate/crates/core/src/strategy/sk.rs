//! Maker's S_k-factor strategy: grow `n/k` stars over a fixed centre set
//! one leaf per centre per phase, then finish with a perfect matching
//! between the lagging centres and the remaining vertices.

use std::cmp::Reverse;

use crate::engine::{Board, InvariantLog, Side};
use crate::graph::Edge;
use crate::strategy::pm::PmCore;
use crate::strategy::{Planner, Strategy, StrategyFailure, Turn};

const NAME: &str = "sk";

/// Bound on bad edges during phase `i`: `c(a,0) = 0`, `c(a,i) = 2c(a,i-1) + 6a`.
pub fn bad_edge_cap(a: usize, i: usize) -> usize {
    (0..i).fold(0, |c, _| 2 * c + 6 * a)
}

/// Number of centres (and remaining vertices) left for the matching finish.
pub fn handoff_size(n: usize, k: usize, a: usize) -> usize {
    (k - 1) * n / k - a * ((k - 2) * n).div_ceil(a * k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Centre,
    Rest,
    Leaf,
}

#[derive(Clone, Debug)]
pub struct SkCore {
    n: usize,
    k: usize,
    a: usize,
    role: Vec<Role>,
    /// Maker degree of each centre.
    size: Vec<usize>,
    /// Current phase, starting at 1.
    pub phase: usize,
    /// Steps made in the current phase.
    phase_steps: usize,
    /// Stage I moves made so far.
    pub moves: usize,
    pub matching: Option<PmCore>,
}

impl SkCore {
    pub fn new(n: usize, k: usize, a: usize) -> Self {
        let m = n / k;
        let role = (0..n)
            .map(|v| if v < m { Role::Centre } else { Role::Rest })
            .collect();
        SkCore {
            n,
            k,
            a,
            role,
            size: vec![0; n],
            phase: 1,
            phase_steps: 0,
            moves: 0,
            matching: None,
        }
    }

    pub fn stage_one_moves(&self) -> usize {
        ((self.k - 2) * self.n).div_ceil(self.a * self.k)
    }

    pub fn centres(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| self.role[v] == Role::Centre)
            .collect()
    }

    pub fn rest(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| self.role[v] == Role::Rest)
            .collect()
    }

    /// Centres of smallest star size.
    pub fn lagging(&self) -> Vec<usize> {
        let cs = self.centres();
        let low = cs.iter().map(|&c| self.size[c]).min().unwrap_or(0);
        cs.into_iter().filter(|&c| self.size[c] == low).collect()
    }

    /// Breaker edges between centres and remaining vertices.
    pub fn bad_edges(&self, board: &Board, opp: Side) -> usize {
        self.centres()
            .into_iter()
            .map(|c| {
                board
                    .neighbors(opp, c)
                    .iter()
                    .filter(|&&w| self.role[w] == Role::Rest)
                    .count()
            })
            .sum()
    }

    fn bad_at(&self, board: &Board, opp: Side, y: usize) -> usize {
        board
            .neighbors(opp, y)
            .iter()
            .filter(|&&w| self.role[w] == Role::Centre)
            .count()
    }

    pub fn next_move(
        &mut self,
        board: &Board,
        me: Side,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let opp = me.other();
        if self.moves < self.stage_one_moves() {
            return self.stage_one(board, me, steps, log);
        }
        if self.matching.is_none() {
            let xs = self.lagging();
            let ys = self.rest();
            let want = handoff_size(self.n, self.k, self.a);
            log.check(
                "sk.handoff_size",
                xs.len() == want && ys.len() == want,
                || {
                    format!(
                        "{} lagging centres and {} remaining vertices, expected {want}",
                        xs.len(),
                        ys.len()
                    )
                },
            );
            if xs.len() != ys.len() {
                return Err(StrategyFailure::new(NAME, "unbalanced matching board"));
            }
            let c = xs
                .iter()
                .map(|&x| {
                    board
                        .neighbors(opp, x)
                        .iter()
                        .filter(|&&w| self.role[w] == Role::Rest)
                        .count()
                })
                .sum();
            self.matching = Some(PmCore::new(self.n, xs, ys, false, c, self.a));
        }
        log.set_prefix("sk.");
        let out = self
            .matching
            .as_mut()
            .unwrap()
            .next_move(board, me, steps, log);
        log.set_prefix("");
        out
    }

    fn stage_one(
        &mut self,
        board: &Board,
        me: Side,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let opp = me.other();
        let mut plan = Planner {
            board: board.clone(),
            me,
            edges: Vec::new(),
        };
        self.moves += 1;
        let b0 = self.bad_edges(board, opp);
        let cap = bad_edge_cap(self.a, self.phase.min(self.k - 2));
        log.check("sk.bad_edge_cap", b0 <= cap, || {
            format!("{b0} bad edges in phase {} (cap {cap})", self.phase)
        });
        let ahead = self.lagging().len() > b0;
        for _ in 0..steps {
            let ca = self.lagging();
            let rest = self.rest();
            if rest.is_empty() {
                break;
            }
            // rule (1): absorb an endpoint of a bad edge; rule (2): a clean vertex
            let y1 = rest
                .iter()
                .copied()
                .filter(|&y| self.bad_at(&plan.board, opp, y) > 0)
                .filter(|&y| ca.iter().any(|&x| plan.board.is_free(x, y)))
                .max_by_key(|&y| (self.bad_at(&plan.board, opp, y), Reverse(y)));
            let y = match y1 {
                Some(y) => y,
                None => rest
                    .iter()
                    .copied()
                    .find(|&y| self.bad_at(&plan.board, opp, y) == 0)
                    .or_else(|| {
                        rest.iter()
                            .copied()
                            .find(|&y| ca.iter().any(|&x| plan.board.is_free(x, y)))
                    })
                    .ok_or_else(|| {
                        StrategyFailure::new(NAME, "no free edge from a lagging centre")
                    })?,
            };
            let x = ca
                .iter()
                .copied()
                .find(|&x| plan.board.is_free(x, y))
                .ok_or_else(|| {
                    StrategyFailure::new(
                        NAME,
                        format!("vertex {y} has no free edge to a lagging centre"),
                    )
                })?;
            plan.claim(Edge::new(x, y));
            self.role[y] = Role::Leaf;
            self.size[x] += 1;
            self.phase_steps += 1;
            if ca.len() == 1 {
                if self.phase <= self.k - 2 {
                    let m = self.n / self.k;
                    let used = self.phase_steps;
                    log.check("sk.phase_budget", used == m, || {
                        format!("phase {} took {used} steps", self.phase)
                    });
                }
                self.phase += 1;
                self.phase_steps = 0;
            }
        }
        if ahead {
            let b1 = self.bad_edges(&plan.board, opp);
            let want = self.a.min(b0);
            log.check("sk.bad_edges_reduced", b0 - b1.min(b0) >= want, || {
                format!("bad edges went from {b0} to {b1}, expected a drop of {want}")
            });
        }
        let low = self.lagging().first().map(|&c| self.size[c]).unwrap_or(0);
        let even = self.centres().iter().all(|&c| self.size[c] <= low + 1);
        log.check("sk.balanced_stars", even, || {
            "star sizes differ by more than one".into()
        });
        Ok(plan.edges)
    }
}

/// The S_k-factor strategy for Maker.
#[derive(Clone, Debug, Default)]
pub struct SkStrategy {
    core: Option<SkCore>,
}

impl SkStrategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn core(&self) -> Option<&SkCore> {
        self.core.as_ref()
    }
}

impl Strategy for SkStrategy {
    fn name(&self) -> &str {
        NAME
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        if self.core.is_none() {
            let k = turn.state.family().k().unwrap_or(0);
            let n = turn.board().n();
            let a = turn.state.bias(turn.side);
            if k < 3 || !n.is_multiple_of(k) {
                return Err(StrategyFailure::new(
                    NAME,
                    format!("needs k >= 3 dividing n (k = {k}, n = {n})"),
                ));
            }
            if a < 2 {
                return Err(StrategyFailure::new(
                    NAME,
                    "the matching finish needs a >= 2",
                ));
            }
            self.core = Some(SkCore::new(n, k, a));
        }
        self.core
            .as_mut()
            .unwrap()
            .next_move(turn.board(), turn.side, turn.steps, log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BoardKind;

    #[test]
    fn bad_edge_cap_closed_form() {
        for a in 1..6 {
            for i in 0..8 {
                assert_eq!(bad_edge_cap(a, i), 6 * a * ((1 << i) - 1));
            }
        }
    }

    #[test]
    fn handoff_leaves_a_square_matching_board() {
        // n = 60, k = 3, a = 2: 40 non-centres, 10 Stage I moves of 2 leaves
        assert_eq!(handoff_size(60, 3, 2), 20);
        assert_eq!(handoff_size(60, 4, 3), 45 - 3 * 10);
        for (n, k, a) in [(60, 3, 2), (120, 4, 3), (240, 3, 3)] {
            let core = SkCore::new(n, k, a);
            assert_eq!(
                core.stage_one_moves() * a + handoff_size(n, k, a),
                (k - 1) * n / k
            );
        }
    }

    #[test]
    fn clean_board_grows_stars_evenly() {
        let board = Board::new(24, BoardKind::Complete);
        let mut core = SkCore::new(24, 3, 3);
        let mut log = InvariantLog::new();
        let mv = core.next_move(&board, Side::Maker, 3, &mut log).unwrap();
        // rule (2): lowest clean non-centre to the lowest lagging centre
        assert_eq!(mv, vec![Edge::new(0, 8), Edge::new(1, 9), Edge::new(2, 10)]);
        assert_eq!(core.lagging(), (3..8).collect::<Vec<_>>());
        assert!(log.all_passed(), "{:?}", log.failures());
    }

    #[test]
    fn bad_edges_are_absorbed_first() {
        let mut board = Board::new(24, BoardKind::Complete);
        board.claim(Edge::new(3, 20), Side::Breaker);
        board.claim(Edge::new(4, 20), Side::Breaker);
        let mut core = SkCore::new(24, 3, 2);
        assert_eq!(core.bad_edges(&board, Side::Breaker), 2);
        let mut log = InvariantLog::new();
        let mv = core.next_move(&board, Side::Maker, 2, &mut log).unwrap();
        assert_eq!(mv[0], Edge::new(0, 20));
        assert_eq!(core.bad_edges(&board, Side::Breaker), 0);
    }
}
