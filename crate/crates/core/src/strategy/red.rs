//! Red's strategy for the strong (2:2) Hamilton-cycle game on even `n`:
//! play the Maker strategy until four paths remain, join them into two
//! paths with no bad edge between their ends, then finish while keeping
//! Blue from closing a cycle first.

use crate::engine::{Board, InvariantLog, Mode, Side, OBSERVED_PREFIX};
use crate::graph::{Edge, SimpleGraph};
use crate::graphtools::{bad_edge_stats, close_path, is_good, OpenTo, PathCollection};
use crate::strategy::ham::{max_d_good_edge, HamCore, HamStage};
use crate::strategy::{Planner, Strategy, StrategyFailure, Turn};
use crate::winset::contains_hamilton_cycle;

const NAME: &str = "red";

#[derive(Clone, Debug)]
#[derive(Default)]
pub struct RedStrategy {
    ham: Option<HamCore>,
    /// Moves made so far.
    i: usize,
    /// Blue's isolated vertices when the joining move is made.
    i2: Vec<bool>,
    /// Hamilton path to close on the last move.
    to_close: Option<Vec<usize>>,
    done: bool,
}


impl RedStrategy {
    pub fn new() -> Self {
        Self::default()
    }

    fn setup(turn: &Turn) -> Result<HamCore, StrategyFailure> {
        let st = turn.state;
        let n = st.n();
        if st.config.mode != Mode::Strong
            || st.bias(Side::Maker) != 2
            || st.bias(Side::Breaker) != 2
            || n % 2 == 1
        {
            return Err(StrategyFailure::new(
                NAME,
                "needs the strong (2:2) game on an even number of vertices",
            ));
        }
        Ok(HamCore::new(n, 2, 0))
    }

    /// The joining move: two good edges leaving two paths with no bad edge
    /// between their ends, touching Blue's isolated ends when there are any.
    fn joining_move(
        &mut self,
        plan: &mut Planner,
        log: &mut InvariantLog,
    ) -> Result<(), StrategyFailure> {
        let board = &plan.board;
        let blue = plan.me.other();
        let n = board.n();
        self.i2 = (0..n).map(|v| board.degree(blue, v) == 0).collect();
        let ham = self.ham.as_ref().unwrap();
        let p2 = ham.paths().unwrap().clone();
        log.check("red.four_paths", p2.len() == 4, || {
            format!("{} paths", p2.len())
        });
        let stats = bad_edge_stats(&p2, board, blue);
        let ends = p2.endpoints();
        let needs_i2 = ends.iter().any(|&v| self.i2[v]);
        let good: Vec<Edge> = pairs(&ends).filter(|&e| is_good(&p2, board, e)).collect();
        let all_low = good.iter().all(|&e| stats.d(e) <= 2);
        // preference for e1: exactly two bad edges in the all-low case, maximal D otherwise
        let mut firsts = good.clone();
        if stats.br == 4 && all_low {
            firsts.sort_by_key(|&e| (stats.d(e) != 2, needs_i2 && !self.touches_i2(e), e));
        } else {
            firsts.sort_by_key(|&e| (std::cmp::Reverse(stats.d(e)), e));
        }
        let mut chosen = None;
        'outer: for &e1 in &firsts {
            let mut p = p2.clone();
            p.join(e1.u, e1.v).expect("good edge joins two paths");
            let mut b = board.clone();
            b.claim(e1, plan.me);
            let ends1 = p.endpoints();
            for e2 in pairs(&ends1).filter(|&e| is_good(&p, &b, e)) {
                let mut q = p.clone();
                q.join(e2.u, e2.v).expect("good edge joins two paths");
                let mut b2 = b.clone();
                b2.claim(e2, plan.me);
                let s1 = q.len() == 2 && bad_edge_stats(&q, &b2, blue).br == 0;
                let s2 = !needs_i2 || self.touches_i2(e1) || self.touches_i2(e2);
                if s1 && s2 {
                    chosen = Some((e1, e2));
                    break 'outer;
                }
            }
        }
        let (e1, e2) = match chosen {
            Some(pair) => pair,
            None => {
                log.check("red.two_clean_paths", false, || {
                    format!("no joining pair with {} bad edges", stats.br)
                });
                let e1 = *firsts
                    .first()
                    .ok_or_else(|| StrategyFailure::new(NAME, "no good edge"))?;
                let mut p = p2.clone();
                p.join(e1.u, e1.v).expect("good edge");
                let mut b = board.clone();
                b.claim(e1, plan.me);
                let e2 = max_d_good_edge(&p, &b, blue)
                    .ok_or_else(|| StrategyFailure::new(NAME, "no good edge"))?;
                (e1, e2)
            }
        };
        plan.claim(e1);
        plan.claim(e2);
        let ham = self.ham.as_mut().unwrap();
        ham.absorb(&[e1, e2])?;
        let p3 = ham.paths().unwrap();
        let clean = p3.len() == 2 && bad_edge_stats(p3, &plan.board, blue).br == 0;
        log.check("red.two_clean_paths", clean, || {
            "bad edge between the two paths' ends".into()
        });
        let s2 = !needs_i2 || self.touches_i2(e1) || self.touches_i2(e2);
        log.check("red.isolated_end_touched", s2, || {
            format!("{e1:?} {e2:?} miss Blue's isolated ends")
        });
        Ok(())
    }

    fn touches_i2(&self, e: Edge) -> bool {
        self.i2[e.u] || self.i2[e.v]
    }

    /// First finishing move; returns `true` if the rest is left to the Maker strategy.
    fn finishing_move(
        &mut self,
        plan: &mut Planner,
        log: &mut InvariantLog,
    ) -> Result<bool, StrategyFailure> {
        let blue = plan.me.other();
        let b3 = plan.board.graph_of(blue);
        let n = plan.board.n();
        let p3 = self.ham.as_ref().unwrap().paths().unwrap().clone();
        let comps = b3.components();
        let has_cycle = b3.edge_count() + comps.len() > n;
        let deg3 = (0..n).any(|v| b3.neighbors(v).len() >= 3);
        if has_cycle || deg3 || comps.len() >= 3 {
            return Ok(true);
        }
        if let Some(pair) = min_closing_pair(&p3, &plan.board) {
            for e in pair {
                plan.claim(e);
            }
            self.done = true;
            return Ok(false);
        }
        // Blue is two paths; expected shape: one isolated vertex z plus a spanning path
        let blue_paths = PathCollection::from_linear_forest(&b3)
            .map_err(|e| StrategyFailure::new(NAME, format!("Blue's graph: {e}")))?;
        let z_shape = blue_paths.paths().any(|p| p.len() == 1);
        log.check("red.blue_isolated_vertex", z_shape, || {
            "Blue's graph has no isolated vertex".into()
        });
        let join = pairs(&p3.endpoints())
            .filter(|&e| is_good(&p3, &plan.board, e))
            .min()
            .ok_or_else(|| StrategyFailure::new(NAME, "no good edge to form a Hamilton path"))?;
        let mut path = p3.clone();
        path.join(join.u, join.v).expect("good edge");
        plan.claim(join);
        let block = blue_threat_block(&blue_paths, &plan.board)
            .ok_or_else(|| StrategyFailure::new(NAME, "cannot block every Blue closing pair"))?;
        if let Some(e) = block {
            plan.claim(e);
        }
        if plan.edges.len() < 2 {
            if let Some(e) = plan.board.free_edges().into_iter().next() {
                plan.claim(e);
            }
        }
        let id = path.ids().next().unwrap();
        self.to_close = Some(path.path(id).to_vec());
        Ok(false)
    }
}

fn pairs(vs: &[usize]) -> impl Iterator<Item = Edge> + '_ {
    vs.iter()
        .enumerate()
        .flat_map(move |(i, &u)| vs[i + 1..].iter().map(move |&v| Edge::new(u, v)))
}

/// The lexicographically smallest pair of free edges closing two paths into a cycle.
fn min_closing_pair(paths: &PathCollection, board: &Board) -> Option<[Edge; 2]> {
    closing_pairs(paths)
        .into_iter()
        .filter(|pair| pair.iter().all(|e| board.is_free(e.u, e.v)))
        .min()
}

/// Both ways of closing two paths into one cycle with two edges.
fn closing_pairs(paths: &PathCollection) -> Vec<[Edge; 2]> {
    let ids: Vec<usize> = paths.ids().collect();
    if ids.len() != 2 {
        return Vec::new();
    }
    let (x1, y1) = paths.ends(ids[0]);
    let (x2, y2) = paths.ends(ids[1]);
    let mut out = Vec::new();
    for [(a, b), (c, d)] in [[(x1, x2), (y1, y2)], [(x1, y2), (y1, x2)]] {
        let (e, f) = (Edge::new(a, b), Edge::new(c, d));
        if e == f {
            continue;
        }
        let mut pair = [e, f];
        pair.sort();
        if !out.contains(&pair) {
            out.push(pair);
        }
    }
    out
}

/// One free edge meeting every pair that would let Blue close a cycle.
/// `Some(None)` when there is nothing to block.
fn blue_threat_block(blue_paths: &PathCollection, board: &Board) -> Option<Option<Edge>> {
    let threats: Vec<[Edge; 2]> = closing_pairs(blue_paths)
        .into_iter()
        .filter(|pair| pair.iter().all(|e| board.is_free(e.u, e.v)))
        .collect();
    if threats.is_empty() {
        return Some(None);
    }
    let mut candidates: Vec<Edge> = threats.iter().flatten().copied().collect();
    candidates.sort();
    candidates
        .into_iter()
        .find(|e| threats.iter().all(|pair| pair.contains(e)))
        .map(Some)
}

fn blue_holds_hamilton_cycle(board: &Board, blue: Side) -> bool {
    let n = board.n();
    if board.claimed_count(blue) < n {
        return false;
    }
    let g: SimpleGraph = board.graph_of(blue);
    contains_hamilton_cycle(&g)
}

impl Strategy for RedStrategy {
    fn name(&self) -> &str {
        NAME
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        if self.ham.is_none() {
            self.ham = Some(Self::setup(turn)?);
        }
        let blue = turn.side.other();
        log.check(
            "red.blue_has_no_cycle",
            !blue_holds_hamilton_cycle(turn.board(), blue),
            || format!("before Red's move {}", self.i + 1),
        );
        let half = turn.board().n() / 2;
        let move_no = self.i + 1;
        let mut plan = Planner::new(turn);
        if self.done {
            return Err(StrategyFailure::new(NAME, "cycle finished without a win"));
        }
        if let Some(path) = self.to_close.take() {
            self.done = true;
            let closing = close_path(&path, &OpenTo::new(&plan.board, blue)).map_err(|e| {
                StrategyFailure::new(NAME, format!("cannot close the Hamilton path: {e}"))
            })?;
            for e in closing {
                if plan.board.is_free(e.u, e.v) {
                    plan.claim(e);
                }
            }
        } else if move_no + 2 <= half || self.ham.as_ref().unwrap().stage == HamStage::Three {
            log.set_prefix(&format!("{OBSERVED_PREFIX}{NAME}."));
            let out =
                self.ham
                    .as_mut()
                    .unwrap()
                    .next_move(turn.board(), turn.side, turn.steps, log);
            log.set_prefix("");
            self.i = move_no;
            return out;
        } else if move_no + 1 == half {
            self.joining_move(&mut plan, log)?;
        } else if self.finishing_move(&mut plan, log)? {
            log.set_prefix(&format!("{OBSERVED_PREFIX}{NAME}."));
            let out =
                self.ham
                    .as_mut()
                    .unwrap()
                    .next_move(turn.board(), turn.side, turn.steps, log);
            log.set_prefix("");
            self.i = move_no;
            return out;
        }
        self.i = move_no;
        Ok(plan.edges)
    }
}
