//! Maker's fast perfect-matching strategy on a balanced bipartite sub-board
//! `X x Y`, optionally with extra Breaker handicap edges.

use crate::engine::{Board, BoardKind, InvariantLog, Side};
use crate::graph::{Edge, SimpleGraph};
use crate::graphtools::max_bipartite_matching;
use crate::strategy::{Strategy, StrategyFailure, Turn};
use crate::winset::maximum_matching;

const NONE: usize = usize::MAX;
const NAME: &str = "pm";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PmStage {
    One,
    Two,
    Done,
}

/// What is left to do in the second round of a two-round finish.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PendingSwap {
    v: usize,
    w: usize,
}

/// State of the matching strategy on one sub-board.
#[derive(Clone, Debug)]
pub struct PmCore {
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
    in_x: Vec<bool>,
    in_y: Vec<bool>,
    /// The sub-board is a whole complete graph `K_{2m}` (non-bipartite edges usable).
    pub whole_graph: bool,
    /// Number of Breaker edges on the sub-board before the first move.
    pub c: usize,
    pub a: usize,
    /// Stage I moves made so far.
    pub i: usize,
    pub stage: PmStage,
    /// When the one-round finish on `K_{2m}` is blocked, finish in two
    /// rounds instead of failing.
    pub slow_finish: bool,
    mate: Vec<usize>,
    pending: Option<PendingSwap>,
}

impl PmCore {
    pub fn new(
        n: usize,
        xs: Vec<usize>,
        ys: Vec<usize>,
        whole_graph: bool,
        c: usize,
        a: usize,
    ) -> Self {
        assert_eq!(xs.len(), ys.len(), "balanced sides");
        let mut in_x = vec![false; n];
        let mut in_y = vec![false; n];
        for &x in &xs {
            in_x[x] = true;
        }
        for &y in &ys {
            in_y[y] = true;
        }
        PmCore {
            xs,
            ys,
            in_x,
            in_y,
            whole_graph,
            c,
            a,
            i: 0,
            stage: PmStage::One,
            slow_finish: false,
            mate: vec![NONE; n],
            pending: None,
        }
    }

    /// Side size.
    pub fn m(&self) -> usize {
        self.xs.len()
    }

    pub fn stage_one_moves(&self) -> usize {
        self.m().div_ceil(self.a).saturating_sub(1)
    }

    fn opposite(&self, z: usize) -> &[usize] {
        if self.in_x[z] {
            &self.ys
        } else {
            &self.xs
        }
    }

    fn crosses(&self, u: usize, v: usize) -> bool {
        (self.in_x[u] && self.in_y[v]) || (self.in_y[u] && self.in_x[v])
    }

    pub fn isolated(&self) -> Vec<usize> {
        self.xs
            .iter()
            .chain(&self.ys)
            .copied()
            .filter(|&v| self.mate[v] == NONE)
            .collect()
    }

    /// Whether a Breaker edge `zw` counts: on a whole complete graph every
    /// edge of the sub-board counts, otherwise only edges across the bipartition.
    fn counts(&self, z: usize, w: usize, cross_only: bool) -> bool {
        self.crosses(z, w) || (!cross_only && self.whole_graph && (self.in_x[w] || self.in_y[w]))
    }

    /// Breaker degree of `z` into the vertices flagged in `set`.
    fn deg_into(
        &self,
        board: &Board,
        opp: Side,
        z: usize,
        set: &[bool],
        cross_only: bool,
    ) -> usize {
        board
            .neighbors(opp, z)
            .iter()
            .filter(|&&w| set[w] && self.counts(z, w, cross_only))
            .count()
    }

    /// Breaker edges with both ends flagged in `set`.
    fn edges_inside(&self, board: &Board, opp: Side, set: &[bool], cross_only: bool) -> usize {
        let twice: usize = self
            .xs
            .iter()
            .chain(&self.ys)
            .filter(|&&z| set[z])
            .map(|&z| self.deg_into(board, opp, z, set, cross_only))
            .sum();
        twice / 2
    }

    fn iso_flags(&self, n: usize) -> Vec<bool> {
        let mut f = vec![false; n];
        for v in self.isolated() {
            f[v] = true;
        }
        f
    }

    fn record_match(&mut self, e: Edge) {
        self.mate[e.u] = e.v;
        self.mate[e.v] = e.u;
    }

    /// Chooses the next move. `board` is the real board, `me` Maker's side.
    pub fn next_move(
        &mut self,
        board: &Board,
        me: Side,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        if self.stage == PmStage::One && self.i >= self.stage_one_moves() {
            self.stage = PmStage::Two;
        }
        match self.stage {
            PmStage::One => self.stage_one(board, me, steps, log),
            PmStage::Two => self.stage_two(board, me, steps, log),
            PmStage::Done => Err(StrategyFailure::new(
                NAME,
                "matching finished without a win",
            )),
        }
    }

    fn stage_one(
        &mut self,
        board: &Board,
        me: Side,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let opp = me.other();
        let n = board.n();
        let a = self.a;
        self.i += 1;
        let i = self.i as i64;
        let delta = if self.i <= self.c.div_ceil(a) { 0 } else { 1 };
        let mut iso = self.iso_flags(n);
        let mut out = Vec::with_capacity(a);
        let c = self.c as i64;
        let a_i = a as i64;
        for j in 1..=a - delta {
            let (x, y) = self.pick(board, opp, &iso, |core, z| {
                (
                    core.deg_into(board, opp, z, &iso, true),
                    core.deg_into(board, opp, z, &iso, false),
                )
            })?;
            let e = Edge::new(x, y);
            out.push(e);
            iso[x] = false;
            iso[y] = false;
            self.record_match(e);
            let left = self.edges_inside(board, opp, &iso, true) as i64;
            let bound = (c - (i - 2) * a_i - 2 * j as i64)
                .max(a_i - 2 * j as i64)
                .max(0);
            log.check("pm.step_edge_bound", left <= bound, || {
                format!("move {i} step {j}: {left} Breaker edges among isolated vertices, bound {bound}")
            });
        }
        if delta == 1 {
            let all = {
                let mut f = vec![false; n];
                for v in self.xs.iter().chain(&self.ys) {
                    f[*v] = true;
                }
                f
            };
            let (x, y) = self.pick(board, opp, &iso, |core, z| {
                (
                    core.deg_into(board, opp, z, &all, false),
                    core.deg_into(board, opp, z, &iso, false),
                )
            })?;
            let e = Edge::new(x, y);
            out.push(e);
            iso[x] = false;
            iso[y] = false;
            self.record_match(e);
        }
        // properties after the move
        let m = self.m();
        let left = self.edges_inside(board, opp, &iso, true) as i64;
        let bound = (c - i * a_i).max(0);
        log.check("pm.isolated_breaker_edges", left <= bound, || {
            format!("after move {i}: {left} Breaker edges among isolated vertices, bound {bound}")
        });
        let worst = self
            .isolated()
            .into_iter()
            .map(|v| {
                board
                    .neighbors(opp, v)
                    .iter()
                    .filter(|&&w| self.counts(v, w, false))
                    .count()
            })
            .max()
            .unwrap_or(0);
        log.check("pm.isolated_breaker_degree", 8 * worst < m, || {
            format!("after move {i}: an isolated vertex has Breaker degree {worst}, side size {m}")
        });
        let matched = self.xs.iter().filter(|&&x| self.mate[x] != NONE).count();
        log.check("pm.stage1_matching", matched == self.i * a, || {
            format!(
                "after move {i}: matching has {matched} edges, expected {}",
                self.i * a
            )
        });
        if steps < out.len() {
            out.truncate(steps);
        }
        Ok(out)
    }

    /// Picks `x` maximising `score` among isolated vertices with a free
    /// partner, then the partner `y` maximising `score`. Scores compare
    /// lexicographically; the second component breaks ties by Breaker edges
    /// of any kind inside the isolated set, then the lowest index wins.
    fn pick(
        &self,
        board: &Board,
        opp: Side,
        iso: &[bool],
        score: impl Fn(&Self, usize) -> (usize, usize),
    ) -> Result<(usize, usize), StrategyFailure> {
        let partner_ok =
            |z: usize, w: usize| iso[w] && !board.owned_by(opp, z, w) && board.is_free(z, w);
        let mut best: Option<((usize, usize), usize)> = None;
        let mut cand: Vec<usize> = self
            .xs
            .iter()
            .chain(&self.ys)
            .copied()
            .filter(|&z| iso[z])
            .collect();
        cand.sort_unstable();
        for z in cand {
            if !self.opposite(z).iter().any(|&w| partner_ok(z, w)) {
                continue;
            }
            let s = score(self, z);
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, z));
            }
        }
        let (_, x) = best
            .ok_or_else(|| StrategyFailure::new(NAME, "no isolated vertex has a free partner"))?;
        let mut ys: Vec<usize> = self
            .opposite(x)
            .iter()
            .copied()
            .filter(|&w| partner_ok(x, w))
            .collect();
        ys.sort_unstable();
        let mut best_y: Option<((usize, usize), usize)> = None;
        for w in ys {
            let s = score(self, w);
            if best_y.is_none_or(|(bs, _)| s > bs) {
                best_y = Some((s, w));
            }
        }
        let (x, y) = if self.in_x[x] {
            (x, best_y.unwrap().1)
        } else {
            (best_y.unwrap().1, x)
        };
        Ok((x, y))
    }

    fn stage_two(
        &mut self,
        board: &Board,
        me: Side,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let opp = me.other();
        if let Some(p) = self.pending.take() {
            self.stage = PmStage::Done;
            return self.swap_in(board, opp, p.v, p.w, &mut Vec::new(), true);
        }
        let iso = self.isolated();
        let ix: Vec<usize> = iso.iter().copied().filter(|&v| self.in_x[v]).collect();
        let iy: Vec<usize> = iso.iter().copied().filter(|&v| self.in_y[v]).collect();
        let t = ix.len();
        let a = self.a;
        let mut out = Vec::new();
        if t == 0 {
            return Err(StrategyFailure::new(
                NAME,
                "stage II entered with a perfect matching already",
            ));
        }
        if t < a {
            if 2 * t <= a {
                // case 1.1: pair isolated vertices off through distinct matched edges
                let matched: Vec<usize> = self
                    .xs
                    .iter()
                    .copied()
                    .filter(|&x| self.mate[x] != NONE)
                    .collect();
                let adj: Vec<Vec<usize>> = (0..t)
                    .map(|k| {
                        let (v, w) = (iy[k], ix[k]);
                        (0..matched.len())
                            .filter(|&r| {
                                let x = matched[r];
                                let y = self.mate[x];
                                board.is_free(v, x) && board.is_free(w, y)
                            })
                            .collect()
                    })
                    .collect();
                let mm = max_bipartite_matching(t, matched.len(), &adj);
                if mm.size() < t {
                    return Err(StrategyFailure::new(
                        NAME,
                        "case 1.1: no distinct swap edges for every isolated pair",
                    ));
                }
                for &(k, r) in &mm.pairs {
                    let x = matched[r];
                    let y = self.mate[x];
                    out.push(Edge::new(iy[k], x));
                    out.push(Edge::new(ix[k], y));
                }
                self.stage = PmStage::Done;
                return Ok(out);
            }
            // case 1.2
            let mm = self.free_matching(board, &ix, &iy);
            if mm.len() + 1 < t {
                return Err(StrategyFailure::new(
                    NAME,
                    format!("case 1.2: free matching {} below t-1={}", mm.len(), t - 1),
                ));
            }
            for &e in &mm {
                self.record_match(e);
                out.push(e);
            }
            self.stage = PmStage::Done;
            if mm.len() == t {
                return Ok(out);
            }
            let (v, w) = self.last_pair();
            return self.swap_in(board, opp, v, w, &mut out, true);
        }
        if self.whole_graph {
            // case 2.1: a perfect matching on the isolated vertices using any free edges
            let mut g = SimpleGraph::new(board.n());
            for (k, &u) in iso.iter().enumerate() {
                for &v in &iso[k + 1..] {
                    if board.is_free(u, v) {
                        g.add_edge(Edge::new(u, v));
                    }
                }
            }
            let mm = maximum_matching(&g);
            if mm.len() >= t {
                self.stage = PmStage::Done;
                return Ok(mm);
            }
            let reason = format!("case 2.1: only {} of {t} edges available", mm.len());
            if !self.slow_finish {
                return Err(StrategyFailure::new(NAME, reason));
            }
            log.check("observed:pm.two_round_fallback", false, || reason);
        }
        // case 2.2: a matching of size at least a-1 now, the last vertex pair next round
        let mm = self.free_matching(board, &ix, &iy);
        if mm.len() + 1 < t {
            return Err(StrategyFailure::new(
                NAME,
                format!("case 2.2: free matching {} below a-1", mm.len()),
            ));
        }
        for &e in &mm {
            self.record_match(e);
            out.push(e);
        }
        if mm.len() == t {
            self.stage = PmStage::Done;
            return Ok(out);
        }
        let (v, w) = self.last_pair();
        if board.is_free(v, w) {
            out.push(Edge::new(v, w));
            self.stage = PmStage::Done;
            return Ok(out);
        }
        // claim one swap edge now and the other next round
        let mut tmp = Vec::new();
        let swap = self.swap_in(board, opp, v, w, &mut tmp, false)?;
        for e in swap {
            if out.len() < steps {
                out.push(e);
            }
        }
        self.pending = Some(PendingSwap { v, w });
        let mut extra = board.free_edges().into_iter();
        while out.len() < steps {
            match extra.next() {
                Some(e) if !out.contains(&e) => out.push(e),
                Some(_) => {}
                None => break,
            }
        }
        Ok(out)
    }

    fn last_pair(&self) -> (usize, usize) {
        let iso = self.isolated();
        let v = *iso.iter().find(|&&z| self.in_y[z]).unwrap();
        let w = *iso.iter().find(|&&z| self.in_x[z]).unwrap();
        (v, w)
    }

    /// Maximum matching of free cross edges between `ix` and `iy`.
    fn free_matching(&self, board: &Board, ix: &[usize], iy: &[usize]) -> Vec<Edge> {
        let adj: Vec<Vec<usize>> = ix
            .iter()
            .map(|&x| (0..iy.len()).filter(|&r| board.is_free(x, iy[r])).collect())
            .collect();
        let mm = max_bipartite_matching(ix.len(), iy.len(), &adj);
        mm.pairs
            .iter()
            .map(|&(l, r)| Edge::new(ix[l], iy[r]))
            .collect()
    }

    /// Completes the matching for the leftover pair `v in Y`, `w in X`
    /// through a matched edge `xy` with `vx`, `wy` not owned by Breaker.
    /// With `finish` false only the edges are computed.
    fn swap_in(
        &mut self,
        board: &Board,
        opp: Side,
        v: usize,
        w: usize,
        out: &mut Vec<Edge>,
        finish: bool,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let mut best: Option<(usize, usize)> = None;
        let mut xs: Vec<usize> = self
            .xs
            .iter()
            .copied()
            .filter(|&x| self.mate[x] != NONE)
            .collect();
        xs.sort_unstable();
        for x in xs {
            let y = self.mate[x];
            if board.owned_by(opp, v, x) || board.owned_by(opp, w, y) {
                continue;
            }
            let cost = usize::from(board.is_free(v, x)) + usize::from(board.is_free(w, y));
            if best.is_none_or(|(bc, _)| cost < bc) {
                best = Some((cost, x));
            }
        }
        let Some((_, x)) = best else {
            return Err(StrategyFailure::new(
                NAME,
                format!("no matched edge can absorb the pair {v},{w}"),
            ));
        };
        let y = self.mate[x];
        let mut edges = Vec::new();
        for e in [Edge::new(v, x), Edge::new(w, y)] {
            if board.is_free(e.u, e.v) {
                edges.push(e);
            }
        }
        if finish {
            self.mate[v] = x;
            self.mate[x] = v;
            self.mate[w] = y;
            self.mate[y] = w;
            out.extend(edges.iter().copied());
            return Ok(std::mem::take(out));
        }
        Ok(edges)
    }
}

/// Perfect-matching strategy on `K_n` or on a balanced bipartite board.
/// Odd `n` ignores the last vertex.
#[derive(Clone, Debug, Default)]
pub struct PmStrategy {
    core: Option<PmCore>,
}

impl PmStrategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn core(&self) -> Option<&PmCore> {
        self.core.as_ref()
    }

    fn setup(turn: &Turn) -> Result<PmCore, StrategyFailure> {
        let board = turn.board();
        let n = board.n();
        let a = turn.state.bias(turn.side);
        if a < 2 {
            return Err(StrategyFailure::new(
                NAME,
                "the fast matching strategy needs a >= 2",
            ));
        }
        let m = n / 2;
        let xs: Vec<usize> = (0..m).collect();
        let ys: Vec<usize> = (m..2 * m).collect();
        let whole = board.kind() == BoardKind::Complete;
        let handicap = turn.state.config.handicap.len();
        let mut core = PmCore::new(n, xs, ys, whole, handicap, a);
        core.slow_finish = true;
        Ok(core)
    }
}

impl Strategy for PmStrategy {
    fn name(&self) -> &str {
        NAME
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        if self.core.is_none() {
            self.core = Some(Self::setup(turn)?);
        }
        let core = self.core.as_mut().unwrap();
        core.next_move(turn.board(), turn.side, turn.steps, log)
    }
}
