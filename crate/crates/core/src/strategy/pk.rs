//! Maker's P_k-factor strategy for `k >= 3`: grow `n/k` disjoint paths from
//! isolated vertices (Stage I until every path is finished, Stage II to
//! complete them under a potential argument) and close with one matching
//! move.

use std::cmp::Reverse;

use crate::engine::{Board, InvariantLog, Side};
use crate::graph::Edge;
use crate::graphtools::max_bipartite_matching;
use crate::strategy::{Planner, Strategy, StrategyFailure, Turn};

/// Potential after, dirty last edge, then the heaviest endpoints first.
type ExtendKey = (usize, bool, Reverse<usize>, Reverse<usize>, usize, usize);

const NAME: &str = "pk";
const NONE: usize = usize::MAX;

/// Default `delta`, just below `1/(8k)`.
pub fn default_delta(k: usize) -> f64 {
    let k = k as f64;
    1.0 / (8.0 * k) - 1.0 / (64.0 * k * k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathClass {
    Unfinished,
    Finished,
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PkStage {
    One,
    /// Stage II with this many moves left, the current one included.
    Two(usize),
    Three,
    Done,
}

/// Which Stage I rule produced a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    R1,
    R2,
    R3a,
    R3b,
    R4a,
    R4b,
    R4c,
    R5,
}

#[derive(Clone, Debug)]
pub struct PkCore {
    n: usize,
    k: usize,
    a: usize,
    delta: f64,
    pub stage: PkStage,
    paths: Vec<Vec<usize>>,
    owner: Vec<usize>,
    /// Breaker edges set aside so that the rest of Breaker's graph is good.
    witness: Vec<Edge>,
    /// Complete paths when Stage I ended.
    pub t_complete: Option<usize>,
    /// Rules applied in Stage I, in order.
    pub rules: Vec<Rule>,
}

impl PkCore {
    pub fn new(n: usize, k: usize, a: usize, delta: f64) -> Self {
        let m = n / k;
        let mut owner = vec![NONE; n];
        for (v, o) in owner.iter_mut().enumerate().take(m) {
            *o = v;
        }
        PkCore {
            n,
            k,
            a,
            delta,
            stage: PkStage::One,
            paths: (0..m).map(|v| vec![v]).collect(),
            owner,
            witness: Vec::new(),
            t_complete: None,
            rules: Vec::new(),
        }
    }

    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn isolated(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.owner[v] == NONE).collect()
    }

    pub fn class(&self, id: usize) -> PathClass {
        let len = self.paths[id].len() - 1;
        if len + 1 == self.k {
            PathClass::Complete
        } else if len + 2 == self.k {
            PathClass::Finished
        } else {
            PathClass::Unfinished
        }
    }

    fn ids_of(&self, class: PathClass) -> Vec<usize> {
        (0..self.paths.len())
            .filter(|&id| self.class(id) == class)
            .collect()
    }

    fn count(&self, class: PathClass) -> usize {
        (0..self.paths.len())
            .filter(|&id| self.class(id) == class)
            .count()
    }

    fn ends(&self, id: usize) -> (usize, usize) {
        let p = &self.paths[id];
        (p[0], p[p.len() - 1])
    }

    fn is_u(&self, v: usize) -> bool {
        self.owner[v] == NONE
    }

    /// Endpoint of a path that is not complete.
    fn is_open_end(&self, v: usize) -> bool {
        let id = self.owner[v];
        if id == NONE || self.class(id) == PathClass::Complete {
            return false;
        }
        let (x, y) = self.ends(id);
        v == x || v == y
    }

    /// Endpoint of a finished path.
    fn is_finished_end(&self, v: usize) -> bool {
        self.is_open_end(v) && self.class(self.owner[v]) == PathClass::Finished
    }

    fn extend(&mut self, id: usize, end: usize, u: usize) {
        let p = &mut self.paths[id];
        if p[p.len() - 1] == end {
            p.push(u);
        } else {
            debug_assert_eq!(p[0], end);
            p.insert(0, u);
        }
        self.owner[u] = id;
    }

    fn shortest_first(&self, ids: &mut [usize]) {
        ids.sort_by_key(|&id| (self.paths[id].len(), id));
    }

    /// Round count Maker aims for.
    pub fn target_rounds(&self) -> usize {
        ((self.k - 1) * self.n).div_ceil(self.k * self.a)
    }

    pub fn next_move(
        &mut self,
        board: &Board,
        me: Side,
        steps: usize,
        last_breaker_move: &[Edge],
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let mut plan = Planner {
            board: board.clone(),
            me,
            edges: Vec::new(),
        };
        match self.stage {
            PkStage::One => {
                self.stage_one(&mut plan, steps, last_breaker_move, log)?;
                if self.count(PathClass::Unfinished) == 0 {
                    let t = self.count(PathClass::Complete);
                    self.t_complete = Some(t);
                    let left = (self.n / self.k - t).div_ceil(self.a);
                    self.stage = match left {
                        0 => PkStage::Done,
                        1 => PkStage::Three,
                        _ => PkStage::Two(left - 1),
                    };
                }
            }
            PkStage::Two(left) => {
                self.stage_two(&mut plan, steps, left == 1, log)?;
                self.stage = if left == 1 {
                    PkStage::Three
                } else {
                    PkStage::Two(left - 1)
                };
            }
            PkStage::Three => {
                self.stage_three(&mut plan, steps, log)?;
                self.stage = PkStage::Done;
            }
            PkStage::Done => {
                return Err(StrategyFailure::new(NAME, "factor finished without a win"))
            }
        }
        Ok(plan.edges)
    }

    // ---- Stage I -------------------------------------------------------

    fn breaker_nbrs<'b>(
        board: &'b Board,
        opp: Side,
        h: &'b [Edge],
        v: usize,
    ) -> impl Iterator<Item = usize> + 'b {
        board
            .neighbors(opp, v)
            .iter()
            .copied()
            .filter(move |&w| !h.contains(&Edge::new(v, w)))
    }

    fn deg_to_u(&self, board: &Board, opp: Side, h: &[Edge], v: usize) -> usize {
        Self::breaker_nbrs(board, opp, h, v)
            .filter(|&w| self.is_u(w))
            .count()
    }

    fn deg_to_open_ends(&self, board: &Board, opp: Side, h: &[Edge], u: usize) -> usize {
        Self::breaker_nbrs(board, opp, h, u)
            .filter(|&w| self.is_open_end(w))
            .count()
    }

    /// `d(v1, U) + d(v2, U)`, counting a one-vertex path's end twice.
    fn end_sum(&self, board: &Board, opp: Side, h: &[Edge], id: usize) -> usize {
        let (x, y) = self.ends(id);
        self.deg_to_u(board, opp, h, x) + self.deg_to_u(board, opp, h, y)
    }

    /// Is (Breaker's graph minus `h`, paths) good? Returns the first violation.
    fn goodness(&self, board: &Board, opp: Side, h: &[Edge]) -> Result<(), String> {
        let limit = self.delta * self.n as f64;
        for u in (0..self.n).filter(|&u| self.is_u(u)) {
            let d = self.deg_to_open_ends(board, opp, h, u);
            if d as f64 >= limit {
                return Err(format!(
                    "vertex {u} has {d} Breaker edges to open ends (limit {limit:.2})"
                ));
            }
            if let Some(w) = Self::breaker_nbrs(board, opp, h, u).find(|&w| self.is_u(w)) {
                return Err(format!("Breaker edge {u}-{w} among isolated vertices"));
            }
        }
        for id in 0..self.paths.len() {
            if self.class(id) != PathClass::Complete && self.end_sum(board, opp, h, id) > 1 {
                return Err(format!(
                    "path {id} has {} Breaker edges to isolated vertices",
                    self.end_sum(board, opp, h, id)
                ));
            }
        }
        Ok(())
    }

    fn stage_one(
        &mut self,
        plan: &mut Planner,
        steps: usize,
        last_breaker_move: &[Edge],
        log: &mut InvariantLog,
    ) -> Result<(), StrategyFailure> {
        let opp = plan.me.other();
        self.witness = last_breaker_move.to_vec();
        for t in 0..steps {
            if self.isolated().is_empty() {
                break;
            }
            let rule = self.stage_one_step(plan)?;
            self.rules.push(rule);
            let h = self.witness.clone();
            let ok = h.len() + t < steps && self.goodness(&plan.board, opp, &h).is_ok();
            log.check("pk.witness", ok, || {
                let why = self
                    .goodness(&plan.board, opp, &h)
                    .err()
                    .unwrap_or_default();
                format!(
                    "after {rule:?} at step {}: {} set-aside edges; {why}",
                    t + 1,
                    h.len()
                )
            });
        }
        let good = self.goodness(&plan.board, opp, &[]);
        log.check("pk.good_after_move", good.is_ok(), || {
            good.clone().unwrap_err()
        });
        let bound = self.a as f64 + 3.0 / self.delta;
        let pc = self.count(PathClass::Complete);
        log.check("pk.few_complete_paths", pc as f64 <= bound, || {
            format!("{pc} complete paths (limit {bound:.1})")
        });
        Ok(())
    }

    fn take_witness(&mut self, e: Edge) -> bool {
        match self.witness.iter().position(|&f| f == e) {
            Some(i) => {
                self.witness.swap_remove(i);
                true
            }
            None => false,
        }
    }

    fn claim_extend(&mut self, plan: &mut Planner, id: usize, end: usize, u: usize) {
        plan.claim(Edge::new(end, u));
        self.extend(id, end, u);
    }

    /// Free edge from an end of `id` to `u`; prefers the end with more Breaker edges into U.
    fn free_end_to(&self, board: &Board, opp: Side, id: usize, u: usize) -> Option<usize> {
        let (x, y) = self.ends(id);
        let mut cands = vec![x, y];
        cands.sort_by_key(|&v| (Reverse(self.deg_to_u(board, opp, &[], v)), v));
        cands.into_iter().find(|&v| board.is_free(v, u))
    }

    /// Isolated vertex joined to `v` by a free edge, most threatened first.
    fn best_u_for(&self, board: &Board, opp: Side, v: usize) -> Option<usize> {
        (0..self.n)
            .filter(|&u| self.is_u(u) && board.is_free(u, v))
            .min_by_key(|&u| {
                (
                    Reverse(self.deg_to_open_ends(board, opp, &[], u)),
                    Reverse(board.degree(opp, u)),
                    u,
                )
            })
    }

    fn stage_one_step(&mut self, plan: &mut Planner) -> Result<Rule, StrategyFailure> {
        let opp = plan.me.other();
        let dn = self.delta * self.n as f64;
        let board = plan.board.clone();
        let us = self.isolated();
        let d_end = |s: &Self, u: usize| s.deg_to_open_ends(&board, opp, &[], u);
        let fail = |rule: &str, why: &str| StrategyFailure::new(NAME, format!("{rule}: {why}"));

        // R1
        if let Some(u) = us
            .iter()
            .copied()
            .filter(|&u| d_end(self, u) as f64 >= dn)
            .min_by_key(|&u| (Reverse(d_end(self, u)), u))
        {
            let g = self
                .witness
                .iter()
                .copied()
                .find(|e| e.contains(u) && self.is_open_end(e.other(u)));
            let pools = if self.count(PathClass::Unfinished) > self.a {
                [PathClass::Unfinished, PathClass::Finished]
            } else {
                [PathClass::Finished, PathClass::Unfinished]
            };
            for class in pools {
                let mut ids = self.ids_of(class);
                self.shortest_first(&mut ids);
                let pick = ids.into_iter().find_map(|id| {
                    (self.end_sum(&board, opp, &[], id) <= 1)
                        .then(|| self.free_end_to(&board, opp, id, u).map(|v| (id, v)))
                        .flatten()
                });
                if let Some((id, v)) = pick {
                    if let Some(g) = g {
                        self.take_witness(g);
                    }
                    self.claim_extend(plan, id, v, u);
                    return Ok(Rule::R1);
                }
            }
            return Err(fail("R1", &format!("no clean path can take vertex {u}")));
        }

        // R2, R3
        let bad = |s: &Self, class: PathClass| {
            let mut ids: Vec<usize> = s
                .ids_of(class)
                .into_iter()
                .filter(|&id| s.end_sum(&board, opp, &[], id) >= 2)
                .collect();
            ids.sort_by_key(|&id| {
                (
                    Reverse(s.end_sum(&board, opp, &[], id)),
                    s.paths[id].len(),
                    id,
                )
            });
            ids.first().copied()
        };
        for (class, r) in [(PathClass::Unfinished, "R2"), (PathClass::Finished, "R3")] {
            let Some(id) = bad(self, class) else { continue };
            let (x1, x2) = self.ends(id);
            let set_aside = self.witness.iter().copied().find(|e| {
                [x1, x2]
                    .into_iter()
                    .any(|v| e.contains(v) && self.is_u(e.other(v)))
            });
            // the end carrying a set-aside edge, else the end with more Breaker edges into U
            let (vi, x) = match set_aside {
                Some(e) => {
                    let v = if e.contains(x1) { x1 } else { x2 };
                    (v, Some(e.other(v)))
                }
                None => {
                    let v = if self.deg_to_u(&board, opp, &[], x1)
                        >= self.deg_to_u(&board, opp, &[], x2)
                    {
                        x1
                    } else {
                        x2
                    };
                    (v, None)
                }
            };
            if class == PathClass::Finished && self.count(PathClass::Unfinished) > 0 {
                if let Some(x) = x {
                    let mut p0s = self.ids_of(PathClass::Unfinished);
                    self.shortest_first(&mut p0s);
                    if let Some((p0, w)) = p0s
                        .into_iter()
                        .find_map(|p0| self.free_end_to(&board, opp, p0, x).map(|w| (p0, w)))
                    {
                        self.take_witness(Edge::new(vi, x));
                        self.claim_extend(plan, p0, w, x);
                        return Ok(Rule::R3a);
                    }
                    return Err(fail(
                        "R3a",
                        &format!("no unfinished path has a free edge to {x}"),
                    ));
                }
            }
            let u = self
                .best_u_for(&board, opp, vi)
                .ok_or_else(|| fail(r, "no free edge into U"))?;
            if let Some(x) = x {
                self.take_witness(Edge::new(vi, x));
            }
            self.claim_extend(plan, id, vi, u);
            return Ok(if class == PathClass::Unfinished {
                Rule::R2
            } else {
                Rule::R3b
            });
        }

        // R4
        let mut inner: Vec<(usize, usize)> = Vec::new();
        for &u in &us {
            for &w in board.neighbors(opp, u) {
                if w > u && self.is_u(w) {
                    let (du, dw) = (d_end(self, u), d_end(self, w));
                    inner.push(if du >= dw { (u, w) } else { (w, u) });
                }
            }
        }
        inner.sort_by_key(|&(u, w)| (Reverse(d_end(self, u)), Reverse(d_end(self, w)), u, w));
        if let Some(&(u, w)) = inner.first() {
            let (du, dw) = (d_end(self, u) as f64, d_end(self, w) as f64);
            // on small boards dn - 1 < 1, and w needs a Breaker neighbour among open ends
            if du == dw && dw >= dn - 1.0 && dw >= 1.0 {
                let x = board
                    .neighbors(opp, w)
                    .iter()
                    .copied()
                    .filter(|&x| self.is_open_end(x) && board.is_free(u, x))
                    .min_by_key(|&x| (self.class(self.owner[x]) != PathClass::Unfinished, x))
                    .ok_or_else(|| {
                        fail(
                            "R4a",
                            &format!("no free edge from {u} into {w}'s Breaker neighbourhood"),
                        )
                    })?;
                if !self.take_witness(Edge::new(x, w)) {
                    self.take_witness(Edge::new(u, w));
                }
                let id = self.owner[x];
                self.claim_extend(plan, id, x, u);
                return Ok(Rule::R4a);
            }
            if du >= dn - 1.0 {
                let mut ids: Vec<usize> = (0..self.paths.len())
                    .filter(|&id| self.class(id) != PathClass::Complete)
                    .collect();
                self.shortest_first(&mut ids);
                let pick = ids.into_iter().find_map(|id| {
                    let (x1, x2) = self.ends(id);
                    if board.owned_by(opp, x1, u) || board.owned_by(opp, x2, u) {
                        return None;
                    }
                    if self.deg_to_u(&board, opp, &[], x1) == 0 {
                        Some((id, x2))
                    } else if self.deg_to_u(&board, opp, &[], x2) == 0 {
                        Some((id, x1))
                    } else {
                        None
                    }
                });
                let (id, v) =
                    pick.ok_or_else(|| fail("R4b", &format!("no clean path for vertex {u}")))?;
                self.take_witness(Edge::new(u, w));
                self.claim_extend(plan, id, v, u);
                return Ok(Rule::R4b);
            }
            let mut ids = self.ids_of(PathClass::Unfinished);
            self.shortest_first(&mut ids);
            let mut fin = self.ids_of(PathClass::Finished);
            self.shortest_first(&mut fin);
            ids.extend(fin);
            for id in ids {
                let (x1, x2) = self.ends(id);
                let vi =
                    if self.deg_to_u(&board, opp, &[], x1) >= self.deg_to_u(&board, opp, &[], x2) {
                        x1
                    } else {
                        x2
                    };
                if let Some(z) = [u, w].into_iter().find(|&z| board.is_free(vi, z)) {
                    self.take_witness(Edge::new(u, w));
                    self.claim_extend(plan, id, vi, z);
                    return Ok(Rule::R4c);
                }
            }
            return Err(fail(
                "R4c",
                &format!("no path end with a free edge to {u} or {w}"),
            ));
        }

        // R5
        self.witness.clear();
        let mut ids = self.ids_of(PathClass::Unfinished);
        self.shortest_first(&mut ids);
        let mut fin = self.ids_of(PathClass::Finished);
        self.shortest_first(&mut fin);
        ids.extend(fin);
        let mut order = us.clone();
        order.sort_by_key(|&u| (Reverse(d_end(self, u)), Reverse(board.degree(opp, u)), u));
        for u in order {
            let pick = ids
                .iter()
                .copied()
                .find_map(|id| self.free_end_to(&board, opp, id, u).map(|v| (id, v)));
            if let Some((id, v)) = pick {
                self.claim_extend(plan, id, v, u);
                return Ok(Rule::R5);
            }
        }
        Err(fail("R5", "no free edge extends a path"))
    }

    // ---- Stage II ------------------------------------------------------

    /// Per finished path: Breaker edges from its ends into U.
    fn finished_sums(&self, board: &Board, opp: Side) -> Vec<usize> {
        (0..self.paths.len())
            .map(|id| {
                if self.class(id) == PathClass::Finished {
                    self.end_sum(board, opp, &[], id)
                } else {
                    0
                }
            })
            .collect()
    }

    fn phi_of(sums: &[usize]) -> usize {
        sums.iter().map(|&s| s.saturating_sub(1)).sum()
    }

    /// Potential after `u` joins path `id`.
    fn phi_after(&self, board: &Board, opp: Side, sums: &[usize], id: usize, u: usize) -> usize {
        let mut phi = Self::phi_of(sums) - sums[id].saturating_sub(1);
        let mut seen: Vec<usize> = Vec::new();
        for &y in board.neighbors(opp, u) {
            let q = self.owner[y];
            if q == NONE || q == id || !self.is_finished_end(y) || seen.contains(&q) {
                continue;
            }
            seen.push(q);
            let (x1, x2) = self.ends(q);
            let c = [x1, x2]
                .into_iter()
                .filter(|&x| board.owned_by(opp, x, u))
                .count();
            phi -= sums[q].saturating_sub(1) - (sums[q] - c).saturating_sub(1);
        }
        phi
    }

    fn stage_two(
        &mut self,
        plan: &mut Planner,
        steps: usize,
        last_round: bool,
        log: &mut InvariantLog,
    ) -> Result<(), StrategyFailure> {
        let opp = plan.me.other();
        let p0 = self.count(PathClass::Finished);
        log.check("pk.stage_two_paths", p0 > self.a, || {
            format!("{p0} finished paths at move start")
        });
        for j in 0..steps {
            let board = plan.board.clone();
            let sums = self.finished_sums(&board, opp);
            let phi = Self::phi_of(&sums);
            let us = self.isolated();
            let fin = self.ids_of(PathClass::Finished);
            if fin.is_empty() || us.is_empty() {
                break;
            }
            let is_end = last_round && j + 1 == steps;
            let top = fin
                .iter()
                .flat_map(|&id| {
                    let (x, y) = self.ends(id);
                    [x, y]
                })
                .chain(us.iter().copied())
                .map(|v| board.degree(opp, v))
                .max()
                .unwrap_or(0);
            // (ranking key, path id, path end, new vertex)
            let mut best: Option<(ExtendKey, usize, usize, usize)> = None;
            for &id in &fin {
                let (x1, x2) = self.ends(id);
                let path_top = board.degree(opp, x1) == top || board.degree(opp, x2) == top;
                for &u in &us {
                    if !is_end && !path_top && board.degree(opp, u) != top {
                        continue;
                    }
                    let after = self.phi_after(&board, opp, &sums, id, u);
                    if phi > 0 && after >= phi {
                        continue;
                    }
                    let clean = !is_end || self.leaves_clean_path(&board, opp, id, u);
                    for v in [x1, x2] {
                        if !board.is_free(v, u) {
                            continue;
                        }
                        let key = (
                            after,
                            !clean,
                            Reverse(board.degree(opp, u)),
                            Reverse(board.degree(opp, v)),
                            u,
                            v,
                        );
                        if best.as_ref().is_none_or(|b| key < b.0) {
                            best = Some((key, id, v, u));
                        }
                    }
                }
            }
            let (key, id, v, u) = best.ok_or_else(|| {
                StrategyFailure::new(
                    NAME,
                    format!("stage II: no admissible good edge (potential {phi})"),
                )
            })?;
            if is_end {
                log.check("pk.last_edge_leaves_clean_path", !key.1, || {
                    "every finished path keeps a Breaker edge into U".into()
                });
            }
            self.claim_extend(plan, id, v, u);
            let sums = self.finished_sums(&plan.board, opp);
            let phi = Self::phi_of(&sums);
            let p = self.count(PathClass::Finished);
            let br: usize = sums.iter().sum();
            log.check(
                "pk.potential_below_paths",
                p == 0 || (phi < p && br < 2 * p),
                || format!("potential {phi}, {br} bad edges, {p} finished paths"),
            );
        }
        let phi = Self::phi_of(&self.finished_sums(&plan.board, opp));
        log.check("pk.finished_paths_clean", phi == 0, || {
            format!("potential {phi} after the move")
        });
        Ok(())
    }

    /// After `u` joins `id`, some other finished path has no Breaker edge into U.
    fn leaves_clean_path(&self, board: &Board, opp: Side, id: usize, u: usize) -> bool {
        self.ids_of(PathClass::Finished)
            .into_iter()
            .filter(|&q| q != id)
            .any(|q| {
                let (x1, x2) = self.ends(q);
                [x1, x2].into_iter().all(|x| {
                    board
                        .neighbors(opp, x)
                        .iter()
                        .all(|&w| w == u || !self.is_u(w))
                })
            })
    }

    // ---- Stage III -----------------------------------------------------

    fn stage_three(
        &mut self,
        plan: &mut Planner,
        steps: usize,
        log: &mut InvariantLog,
    ) -> Result<(), StrategyFailure> {
        let opp = plan.me.other();
        let board = plan.board.clone();
        let us = self.isolated();
        let fin = self.ids_of(PathClass::Finished);
        if us.is_empty() {
            return Ok(());
        }
        if us.len() != fin.len() {
            return Err(StrategyFailure::new(
                NAME,
                format!(
                    "{} isolated vertices but {} finished paths",
                    us.len(),
                    fin.len()
                ),
            ));
        }
        let limit = 2.0 * self.delta * self.n as f64;
        let hot = us
            .iter()
            .copied()
            .chain(fin.iter().flat_map(|&id| {
                let (x, y) = self.ends(id);
                [x, y]
            }))
            .find(|&v| board.degree(opp, v) as f64 >= limit);
        log.check("pk.endgame_degree", hot.is_none(), || {
            let v = hot.unwrap();
            format!(
                "vertex {v} has Breaker degree {} (limit {limit:.2})",
                board.degree(opp, v)
            )
        });
        let pairs: Vec<(usize, usize)> = if 2 * us.len() <= self.a {
            us.iter().copied().zip(fin.iter().copied()).collect()
        } else {
            // u ~ P when at most one edge from u to End(P) is Breaker's
            let adj: Vec<Vec<usize>> = us
                .iter()
                .map(|&u| {
                    (0..fin.len())
                        .filter(|&j| {
                            let (x, y) = self.ends(fin[j]);
                            board.owned_by(opp, u, x) as usize + board.owned_by(opp, u, y) as usize
                                <= 1
                        })
                        .collect()
                })
                .collect();
            let m = max_bipartite_matching(us.len(), fin.len(), &adj);
            let need = if us.len() == self.a {
                us.len()
            } else {
                us.len() - 1
            };
            log.check("pk.endgame_matching", m.size() >= need, || {
                format!("matching of size {} for {} vertices", m.size(), us.len())
            });
            for &(i, j) in &m.pairs {
                let (x, y) = self.ends(fin[j]);
                let v = if board.is_free(us[i], x) { x } else { y };
                self.claim_extend(plan, fin[j], v, us[i]);
            }
            let mut used_u = vec![false; us.len()];
            let mut used_p = vec![false; fin.len()];
            for &(i, j) in &m.pairs {
                used_u[i] = true;
                used_p[j] = true;
            }
            let left_u = (0..us.len()).filter(|&i| !used_u[i]).map(|i| us[i]);
            let left_p = (0..fin.len()).filter(|&j| !used_p[j]).map(|j| fin[j]);
            left_u.zip(left_p).collect()
        };
        if plan.edges.len() + 2 * pairs.len() > steps {
            return Err(StrategyFailure::new(
                NAME,
                format!("{} splices do not fit in the last move", pairs.len()),
            ));
        }
        self.splice(plan, &board, &pairs)
    }

    /// Joins each (u, P) through its own complete path R as u-R-P, which
    /// splits into two copies of P_k.
    fn splice(
        &mut self,
        plan: &mut Planner,
        board: &Board,
        pairs: &[(usize, usize)],
    ) -> Result<(), StrategyFailure> {
        if pairs.is_empty() {
            return Ok(());
        }
        let complete = self.ids_of(PathClass::Complete);
        let route = |&(u, p): &(usize, usize), r: usize| -> Option<(Edge, Edge)> {
            let (r1, r2) = self.ends(r);
            let (p1, p2) = self.ends(p);
            for (near, far) in [(r1, r2), (r2, r1)] {
                if !board.is_free(u, near) {
                    continue;
                }
                if let Some(x) = [p1, p2].into_iter().find(|&x| board.is_free(far, x)) {
                    return Some((Edge::new(u, near), Edge::new(far, x)));
                }
            }
            None
        };
        let adj: Vec<Vec<usize>> = pairs
            .iter()
            .map(|pair| {
                (0..complete.len())
                    .filter(|&j| route(pair, complete[j]).is_some())
                    .collect()
            })
            .collect();
        let m = max_bipartite_matching(pairs.len(), complete.len(), &adj);
        if m.size() < pairs.len() {
            return Err(StrategyFailure::new(
                NAME,
                format!("only {} of {} splices possible", m.size(), pairs.len()),
            ));
        }
        for &(i, j) in &m.pairs {
            let (e1, e2) = route(&pairs[i], complete[j]).unwrap();
            plan.claim(e1);
            plan.claim(e2);
        }
        Ok(())
    }
}

/// The P_k-factor strategy for Maker.
#[derive(Clone, Debug, Default)]
pub struct PkStrategy {
    core: Option<PkCore>,
    delta: Option<f64>,
}

impl PkStrategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_delta(delta: f64) -> Self {
        PkStrategy {
            core: None,
            delta: Some(delta),
        }
    }

    pub fn core(&self) -> Option<&PkCore> {
        self.core.as_ref()
    }
}

impl Strategy for PkStrategy {
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
            if k < 3 || !n.is_multiple_of(k) {
                return Err(StrategyFailure::new(
                    NAME,
                    format!("needs k >= 3 dividing n (k = {k}, n = {n})"),
                ));
            }
            let delta = self.delta.unwrap_or_else(|| default_delta(k));
            self.core = Some(PkCore::new(n, k, turn.state.bias(turn.side), delta));
        }
        self.core.as_mut().unwrap().next_move(
            turn.board(),
            turn.side,
            turn.steps,
            turn.opponent_last(),
            log,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BoardKind;

    #[test]
    fn delta_sits_below_one_over_8k() {
        assert!((default_delta(3) - 23.0 / 576.0).abs() < 1e-12);
        for k in 3..10 {
            assert!(default_delta(k) < 1.0 / (8.0 * k as f64));
        }
    }

    #[test]
    fn quiet_board_extends_shortest_paths() {
        let board = Board::new(30, BoardKind::Complete);
        let mut core = PkCore::new(30, 3, 3, default_delta(3));
        let mut log = InvariantLog::new();
        let mv = core
            .next_move(&board, Side::Maker, 3, &[], &mut log)
            .unwrap();
        assert_eq!(mv.len(), 3);
        assert_eq!(core.rules, vec![Rule::R5; 3]);
        // three different one-vertex paths each gained a vertex
        assert_eq!(core.paths().iter().filter(|p| p.len() == 2).count(), 3);
        assert_eq!(core.isolated().len(), 30 - 10 - 3);
        assert!(log.all_passed(), "{:?}", log.failures());
    }

    #[test]
    fn threatened_vertex_is_absorbed_first() {
        let n = 120;
        let mut board = Board::new(n, BoardKind::Complete);
        let u = 100;
        // u sees five path ends, above delta * n = 4.79
        let star: Vec<Edge> = (0..5).map(|v| Edge::new(u, v)).collect();
        for &e in &star {
            board.claim(e, Side::Breaker);
        }
        let mut core = PkCore::new(n, 3, 5, default_delta(3));
        let mut log = InvariantLog::new();
        core.next_move(&board, Side::Maker, 5, &star, &mut log)
            .unwrap();
        assert_eq!(core.rules[0], Rule::R1);
        assert!(!core.isolated().contains(&u));
        let home = core.paths().iter().find(|p| p.contains(&u)).unwrap();
        assert!(home.iter().all(|&v| v >= 5 || v == u));
    }

    #[test]
    fn path_classes_follow_length() {
        let mut core = PkCore::new(12, 4, 2, default_delta(4));
        assert_eq!(core.class(0), PathClass::Unfinished);
        core.extend(0, 0, 5);
        core.extend(0, 5, 6);
        assert_eq!(core.class(0), PathClass::Finished);
        core.extend(0, 6, 7);
        assert_eq!(core.class(0), PathClass::Complete);
        assert_eq!(core.paths()[0], vec![0, 5, 6, 7]);
        assert_eq!(core.target_rounds(), 5);
    }
}
