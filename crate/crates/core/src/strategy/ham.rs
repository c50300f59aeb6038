//! Maker's fast Hamilton-cycle strategy for bias `a >= 2`: a perfect
//! matching first, then a linear forest grown while keeping bad edges in
//! check, then a rotation endgame.

use crate::engine::{Board, InvariantLog, Side};
use crate::graph::Edge;
use crate::graphtools::{
    bad_edge_stats, close_path, complete_hamilton, is_good, rotate_merge, BadEdgeStats, OpenTo,
    PathCollection,
};
use crate::strategy::pm::{PmCore, PmStage};
use crate::strategy::{Planner, Strategy, StrategyFailure, Turn};

const NAME: &str = "ham";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamStage {
    /// Building the initial matching (plus the odd vertex).
    One,
    /// Joining paths, by maximal `D` (IIa) or by Breaker degree (IIb).
    Two,
    /// The one- or two-move finish.
    Three,
    Done,
}

/// Good edge with maximal `D(e)`; ties go to the pair of longest paths, then
/// to the lexicographically smallest edge.
pub fn max_d_good_edge(paths: &PathCollection, board: &Board, opp: Side) -> Option<Edge> {
    let stats = bad_edge_stats(paths, board, opp);
    max_d_good_edge_with(paths, board, &stats)
}

fn max_d_good_edge_with(
    paths: &PathCollection,
    board: &Board,
    stats: &BadEdgeStats,
) -> Option<Edge> {
    let ends = paths.endpoints();
    let mut best: Option<((usize, usize), Edge)> = None;
    for (i, &u) in ends.iter().enumerate() {
        for &v in &ends[i + 1..] {
            let e = Edge::new(u, v);
            if !is_good(paths, board, e) {
                continue;
            }
            let key = (stats.d(e), paths.size_of(u) + paths.size_of(v));
            if best.is_none_or(|(bk, _)| key > bk) {
                best = Some((key, e));
            }
        }
    }
    best.map(|(_, e)| e)
}

/// Two free edges closing two spanning paths into a Hamilton cycle.
pub fn closing_pair(paths: &PathCollection, board: &Board) -> Option<[Edge; 2]> {
    let ids: Vec<usize> = paths.ids().collect();
    if ids.len() != 2 {
        return None;
    }
    let (x1, y1) = paths.ends(ids[0]);
    let (x2, y2) = paths.ends(ids[1]);
    let free = |u: usize, v: usize| u != v && board.is_free(u, v);
    for [(a, b), (c, d)] in [[(x1, x2), (y1, y2)], [(x1, y2), (y1, x2)]] {
        let distinct = Edge::new(a, b) != Edge::new(c, d);
        if free(a, b) && free(c, d) && distinct {
            return Some([Edge::new(a, b), Edge::new(c, d)]);
        }
    }
    None
}

/// Good edge joining the two shortest possible paths, avoiding `skip`.
fn shortest_good_edge(paths: &PathCollection, board: &Board, skip: Option<usize>) -> Option<Edge> {
    let ends: Vec<usize> = paths
        .endpoints()
        .into_iter()
        .filter(|&v| Some(v) != skip)
        .collect();
    let mut best: Option<(usize, Edge)> = None;
    for (i, &u) in ends.iter().enumerate() {
        for &v in &ends[i + 1..] {
            let e = Edge::new(u, v);
            if !is_good(paths, board, e) {
                continue;
            }
            let key = paths.size_of(u) + paths.size_of(v);
            if best.is_none_or(|(bk, _)| key < bk) {
                best = Some((key, e));
            }
        }
    }
    best.map(|(_, e)| e)
}

/// Strategy state shared with the strong-game strategy.
#[derive(Clone, Debug)]
pub struct HamCore {
    pub n: usize,
    pub a: usize,
    pub stage: HamStage,
    pm: PmCore,
    /// Moves made so far.
    pub i: usize,
    pub t1: usize,
    pub t2: usize,
    paths: Option<PathCollection>,
    /// Spanning path waiting to be closed in the second finishing move.
    to_close: Option<Vec<usize>>,
}

impl HamCore {
    pub fn new(n: usize, a: usize, handicap: usize) -> Self {
        let m = n / 2;
        let pm = PmCore::new(n, (0..m).collect(), (m..2 * m).collect(), true, handicap, a);
        let last = n.div_ceil(a);
        HamCore {
            n,
            a,
            stage: HamStage::One,
            pm,
            i: 0,
            t1: 0,
            t2: last - (n.div_ceil(6 * a * a)).min(last),
            paths: None,
            to_close: None,
        }
    }

    /// Last move index of the joining stage.
    pub fn last_joining_move(&self) -> usize {
        self.n.div_ceil(self.a) - 1
    }

    pub fn paths(&self) -> Option<&PathCollection> {
        self.paths.as_ref()
    }

    /// Records a joining move chosen by someone else.
    pub fn absorb(&mut self, edges: &[Edge]) -> Result<(), StrategyFailure> {
        let paths = self
            .paths
            .as_mut()
            .ok_or_else(|| StrategyFailure::new(NAME, "no paths yet"))?;
        for e in edges {
            paths
                .join(e.u, e.v)
                .map_err(|err| StrategyFailure::new(NAME, err.to_string()))?;
        }
        self.i += 1;
        Ok(())
    }

    /// Chooses Maker's next move.
    pub fn next_move(
        &mut self,
        board: &Board,
        me: Side,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let mut plan = Planner {
            board: board.clone(),
            me,
            edges: Vec::new(),
        };
        let move_no = self.i + 1;
        if self.stage == HamStage::Two && move_no > self.last_joining_move() {
            self.stage = HamStage::Three;
        }
        let forest_move = matches!(self.stage, HamStage::One | HamStage::Two);
        match self.stage {
            HamStage::One => self.stage_one(&mut plan, steps, log)?,
            HamStage::Two => self.stage_two(&mut plan, steps, log)?,
            HamStage::Three => self.stage_three(&mut plan, steps, log)?,
            HamStage::Done => {
                return Err(StrategyFailure::new(NAME, "cycle finished without a win"));
            }
        }
        self.i = move_no;
        if forest_move {
            self.after_forest_move(&plan.board, me, log);
        }
        Ok(plan.edges)
    }

    fn stage_one(
        &mut self,
        plan: &mut Planner,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<(), StrategyFailure> {
        let odd = self.n % 2 == 1;
        let spare = self.n - 1;
        if self.pm.stage != PmStage::Done {
            let edges = match self.pm.next_move(&plan.board, plan.me, steps, log) {
                Ok(edges) => edges,
                Err(failure) if self.pm.stage == PmStage::Two => {
                    // a covering forest is enough here: cover the rest shortest-first
                    log.check("observed:ham.matching_finish_fallback", false, || {
                        failure.reason.clone()
                    });
                    self.pm.stage = PmStage::Done;
                    Vec::new()
                }
                Err(failure) => return Err(failure),
            };
            for e in edges {
                plan.claim(e);
            }
            if self.pm.stage != PmStage::Done {
                return Ok(());
            }
            self.paths = Some(self.forest_of(&plan.board, plan.me)?);
            // fill a short last matching move without touching the spare vertex
            self.fill(plan, steps, odd.then_some(spare))?;
            if odd {
                return Ok(());
            }
        } else {
            // odd n: hang the spare vertex on the shortest path it can reach
            let paths = self.paths.as_ref().expect("paths after matching");
            let target = paths
                .endpoints()
                .into_iter()
                .filter(|&v| v != spare && plan.board.is_free(v, spare))
                .min_by_key(|&v| (paths.size_of(v), v))
                .ok_or_else(|| StrategyFailure::new(NAME, "spare vertex cannot be attached"))?;
            self.claim_join(plan, Edge::new(spare, target))?;
            self.fill(plan, steps, None)?;
        }
        self.stage = HamStage::Two;
        self.t1 = self.i + 2;
        Ok(())
    }

    fn forest_of(&self, board: &Board, me: Side) -> Result<PathCollection, StrategyFailure> {
        PathCollection::from_linear_forest(&board.graph_of(me)).map_err(|e| {
            StrategyFailure::new(NAME, format!("matching stage left no linear forest: {e}"))
        })
    }

    fn claim_join(&mut self, plan: &mut Planner, e: Edge) -> Result<(), StrategyFailure> {
        let paths = self.paths.as_mut().expect("paths");
        paths
            .join(e.u, e.v)
            .map_err(|err| StrategyFailure::new(NAME, err.to_string()))?;
        plan.claim(e);
        Ok(())
    }

    /// Tops the move up with forest-preserving edges, shortest paths first.
    fn fill(
        &mut self,
        plan: &mut Planner,
        steps: usize,
        skip: Option<usize>,
    ) -> Result<(), StrategyFailure> {
        while plan.edges.len() < steps {
            let e = shortest_good_edge(self.paths.as_ref().unwrap(), &plan.board, skip)
                .ok_or_else(|| StrategyFailure::new(NAME, "no forest-preserving edge left"))?;
            self.claim_join(plan, e)?;
        }
        Ok(())
    }

    fn is_iib(&self, move_no: usize) -> bool {
        move_no > self.t2 && move_no <= self.t2 + 7
    }

    fn stage_two(
        &mut self,
        plan: &mut Planner,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<(), StrategyFailure> {
        let move_no = self.i + 1;
        let opp = plan.me.other();
        for _ in 0..steps {
            let paths = self.paths.as_ref().unwrap();
            let e = if self.is_iib(move_no) {
                degree_rule_edge(paths, &plan.board, opp)
            } else {
                let stats = bad_edge_stats(paths, &plan.board, opp);
                check_good_edges_exist(paths, &plan.board, &stats, log);
                max_d_good_edge_with(paths, &plan.board, &stats)
            };
            let e =
                e.ok_or_else(|| StrategyFailure::new(NAME, "no good edge left to join paths"))?;
            self.claim_join(plan, e)?;
        }
        Ok(())
    }

    /// Bookkeeping checks after a move that keeps Maker's graph a linear forest.
    fn after_forest_move(&self, board: &Board, me: Side, log: &mut InvariantLog) {
        let i = self.i;
        let Some(paths) = self.paths.as_ref() else {
            return;
        };
        let (n, a) = (self.n, self.a);
        let forest = PathCollection::from_linear_forest(&board.graph_of(me)).is_ok();
        log.check("ham.linear_forest", forest, || format!("move {i}"));
        let p = paths.len();
        log.check("ham.path_count", p + i * a == n, || {
            format!("move {i}: {p} paths")
        });
        if self.stage != HamStage::Two || i < self.t1 {
            return;
        }
        let br = bad_edge_stats(paths, board, me.other()).br;
        let (t1, t2) = (self.t1, self.t2);
        if i <= t2 {
            log.check("ham.bad_edges_early", br <= p + 5 * a, || {
                format!("move {i}: br {br}, p {p}")
            });
            if i >= t1 + 6 * a {
                log.check("ham.bad_edges_early_settled", br + a <= p, || {
                    format!("move {i}: br {br}, p {p}")
                });
            }
        } else {
            log.check("ham.bad_edges_late", br <= p + 13 * a, || {
                format!("move {i}: br {br}, p {p}")
            });
            if i >= t2 + 14 * a + 8 {
                log.check(
                    "ham.bad_edges_late_settled",
                    br <= p.saturating_sub(a),
                    || format!("move {i}: br {br}, p {p}"),
                );
            }
        }
    }

    fn stage_three(
        &mut self,
        plan: &mut Planner,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<(), StrategyFailure> {
        let me = plan.me;
        let opp = me.other();
        if let Some(path) = self.to_close.take() {
            self.stage = HamStage::Done;
            let closing = close_path(&path, &OpenTo::new(&plan.board, opp)).map_err(|e| {
                StrategyFailure::new(NAME, format!("cannot close the spanning path: {e}"))
            })?;
            claim_new(plan, closing);
            return Ok(());
        }
        let (n, a) = (self.n, self.a);
        let paths = self.paths.as_ref().unwrap();
        let p = paths.len();
        let br = bad_edge_stats(paths, &plan.board, opp).br;
        log.check("ham.finish_bad_edges", br <= a, || {
            format!("br {br} > a {a}")
        });
        let worst = paths
            .endpoints()
            .into_iter()
            .map(|v| plan.board.degree(opp, v))
            .max()
            .unwrap_or(0);
        log.check("ham.finish_endpoint_degree", 3 * a * worst < n, || {
            format!("endpoint Breaker degree {worst} with n {n}, a {a}")
        });
        if p == 2 && a == 2 {
            // merge now by one rotation, close next move
            let ids: Vec<usize> = paths.ids().collect();
            let (mut p1, mut p2) = (paths.path(ids[0]).to_vec(), paths.path(ids[1]).to_vec());
            if p2.len() > p1.len() {
                std::mem::swap(&mut p1, &mut p2);
            }
            let merge = rotate_merge(&p1, &p2, &OpenTo::new(&plan.board, opp))
                .map_err(|e| StrategyFailure::new(NAME, format!("two-path merge failed: {e}")))?;
            claim_new(plan, merge.added);
            let (x, y) = (merge.path[0], merge.path[merge.path.len() - 1]);
            while plan.edges.len() < steps {
                // spare edge at an end of the new path, useful for closing
                let pad = (0..n)
                    .flat_map(|w| [Edge::new(x, w), Edge::new(y, w)])
                    .filter(|e| e.u != e.v)
                    .find(|e| plan.board.is_free(e.u, e.v));
                match pad.or_else(|| plan.board.free_edges().into_iter().next()) {
                    Some(e) => plan.claim(e),
                    None => break,
                }
            }
            self.to_close = Some(merge.path);
            return Ok(());
        }
        self.stage = HamStage::Done;
        let joins = if 2 * p <= a {
            0
        } else if 2 * p == a + 1 {
            1
        } else if 2 * p == a + 2 {
            2
        } else {
            p - 2
        };
        let snapshot = (plan.edges.clone(), plan.board.clone(), self.paths.clone());
        match self.finish_by_case(plan, steps, joins, 2 * p >= a + 3) {
            Ok(()) => Ok(()),
            Err(failure) => {
                // the case rule is stuck; try a direct rotation finish within budget
                (plan.edges, plan.board, self.paths) = snapshot;
                let paths = self.paths.as_ref().unwrap();
                let extra = complete_hamilton(paths, &OpenTo::new(&plan.board, opp))
                    .map_err(|_| failure.clone())?;
                claim_new(plan, extra);
                log.check("observed:ham.finish_fallback_used", false, || {
                    failure.reason.clone()
                });
                if plan.edges.len() > steps {
                    return Err(failure);
                }
                Ok(())
            }
        }
    }

    /// The finishing move: `joins` good edges, then either two good edges
    /// closing the last two paths (`by_pair`) or a rotation finish.
    fn finish_by_case(
        &mut self,
        plan: &mut Planner,
        steps: usize,
        joins: usize,
        by_pair: bool,
    ) -> Result<(), StrategyFailure> {
        let opp = plan.me.other();
        for _ in 0..joins {
            let e = max_d_good_edge(self.paths.as_ref().unwrap(), &plan.board, opp)
                .ok_or_else(|| StrategyFailure::new(NAME, "no good edge in the finishing move"))?;
            self.claim_join(plan, e)?;
        }
        let paths = self.paths.as_ref().unwrap();
        if by_pair {
            let pair = closing_pair(paths, &plan.board).ok_or_else(|| {
                StrategyFailure::new(NAME, "no two good edges close the last two paths")
            })?;
            claim_new(plan, pair.to_vec());
            return Ok(());
        }
        let extra = complete_hamilton(paths, &OpenTo::new(&plan.board, opp))
            .map_err(|e| StrategyFailure::new(NAME, format!("rotation finish failed: {e}")))?;
        claim_new(plan, extra);
        if plan.edges.len() > steps {
            return Err(StrategyFailure::new(
                NAME,
                format!(
                    "finish needs {} edges, only {steps} available",
                    plan.edges.len()
                ),
            ));
        }
        Ok(())
    }
}

/// Claims the edges not already Maker's.
fn claim_new(plan: &mut Planner, edges: Vec<Edge>) {
    for e in edges {
        if plan.board.is_free(e.u, e.v) && !plan.edges.contains(&e) {
            plan.claim(e);
        }
    }
}

/// Endpoint of maximal Breaker degree joined to a good partner. Ties and the
/// partner choice favour removing bad edges, then low Breaker degree.
fn degree_rule_edge(paths: &PathCollection, board: &Board, opp: Side) -> Option<Edge> {
    let stats = bad_edge_stats(paths, board, opp);
    let ends = paths.endpoints();
    let partner = |x: usize| {
        ends.iter()
            .copied()
            .filter(|&y| y != x && is_good(paths, board, Edge::new(x, y)))
            .min_by_key(|&y| {
                (
                    std::cmp::Reverse(stats.d(Edge::new(x, y))),
                    board.degree(opp, y),
                    y,
                )
            })
    };
    let mut order = ends.clone();
    order.sort_by_key(|&v| {
        (
            std::cmp::Reverse((board.degree(opp, v), stats.bad_degree[v])),
            v,
        )
    });
    order
        .into_iter()
        .find_map(|x| partner(x).map(|y| Edge::new(x, y)))
}

/// With few bad edges every endpoint still has a good edge.
fn check_good_edges_exist(
    paths: &PathCollection,
    board: &Board,
    stats: &BadEdgeStats,
    log: &mut InvariantLog,
) {
    let p = paths.len();
    if p <= 2 || stats.br + 2 >= 2 * p {
        return;
    }
    let ends = paths.endpoints();
    let lonely = ends.iter().copied().find(|&u| {
        !ends
            .iter()
            .any(|&v| v != u && is_good(paths, board, Edge::new(u, v)))
    });
    log.check("ham.good_edge_at_every_end", lonely.is_none(), || {
        format!(
            "endpoint {lonely:?} has no good edge with br {} and {p} paths",
            stats.br
        )
    });
}

/// The Hamilton-cycle strategy for Maker.
#[derive(Clone, Debug, Default)]
pub struct HamStrategy {
    core: Option<HamCore>,
}

impl HamStrategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn core(&self) -> Option<&HamCore> {
        self.core.as_ref()
    }
}

impl Strategy for HamStrategy {
    fn name(&self) -> &str {
        NAME
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        if self.core.is_none() {
            let a = turn.state.bias(turn.side);
            if a < 2 {
                return Err(StrategyFailure::new(
                    NAME,
                    "the fast Hamilton strategy needs a >= 2",
                ));
            }
            let n = turn.board().n();
            self.core = Some(HamCore::new(n, a, turn.state.config.handicap.len()));
        }
        self.core
            .as_mut()
            .unwrap()
            .next_move(turn.board(), turn.side, turn.steps, log)
    }
}
