//! Winning-set families, detectors that decide whether a claimed graph
//! contains a winning set, and the closed-form game durations.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, SimpleGraph};

/// The family of winning sets a game is played for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    PerfectMatching,
    Hamilton,
    PathFactor(usize),
    StarFactor(usize),
    /// Explicit list of winning edge sets (toy boards, solver fixtures).
    Custom(Vec<Vec<Edge>>),
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::PerfectMatching => "pm",
            Family::Hamilton => "ham",
            Family::PathFactor(_) => "pkf",
            Family::StarFactor(_) => "skf",
            Family::Custom(_) => "custom",
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            Family::PathFactor(k) | Family::StarFactor(k) => Some(*k),
            _ => None,
        }
    }

    /// Size of the smallest winning set on `n` vertices, which is also the
    /// number of edges Maker must hold when she wins.
    pub fn min_winning_size(&self, n: usize) -> usize {
        match self {
            Family::PerfectMatching => n / 2,
            Family::Hamilton => n,
            Family::PathFactor(k) | Family::StarFactor(k) => n / k * (k - 1),
            Family::Custom(sets) => sets.iter().map(|s| s.len()).min().unwrap_or(0),
        }
    }

    /// Does `g` contain a member of this family?
    pub fn is_satisfied_by(&self, g: &SimpleGraph) -> bool {
        match self {
            Family::PerfectMatching => contains_perfect_matching(g),
            Family::Hamilton => contains_hamilton_cycle(g),
            Family::PathFactor(k) => contains_path_factor(g, *k),
            Family::StarFactor(k) => contains_star_factor(g, *k),
            Family::Custom(sets) => sets.iter().any(|s| s.iter().all(|e| g.contains(e.u, e.v))),
        }
    }

    /// Cheap necessary condition checked before running a detector.
    pub fn could_be_satisfied(&self, n: usize, edges: usize, deg: &[usize]) -> bool {
        match self {
            Family::PerfectMatching => {
                let need = n / 2;
                edges >= need && deg.iter().filter(|&&d| d > 0).count() >= 2 * need
            }
            Family::Hamilton => n >= 3 && edges >= n && deg.iter().all(|&d| d >= 2),
            Family::PathFactor(k) | Family::StarFactor(k) => {
                *k >= 2
                    && n.is_multiple_of(*k)
                    && edges >= self.min_winning_size(n)
                    && deg.iter().all(|&d| d >= 1)
            }
            Family::Custom(sets) => sets.iter().any(|s| s.len() <= edges),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PathFactor(k) | Family::StarFactor(k) => write!(f, "{}(k={k})", self.tag()),
            _ => f.write_str(self.tag()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tightness {
    Exact,
    UpperBound,
}

/// Game duration in Maker moves, or a Breaker win.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauValue {
    Finite { rounds: usize, tightness: Tightness },
    BreakerWin,
}

impl TauValue {
    pub fn exact(rounds: usize) -> Self {
        TauValue::Finite {
            rounds,
            tightness: Tightness::Exact,
        }
    }

    pub fn upper(rounds: usize) -> Self {
        TauValue::Finite {
            rounds,
            tightness: Tightness::UpperBound,
        }
    }

    pub fn rounds(&self) -> Option<usize> {
        match self {
            TauValue::Finite { rounds, .. } => Some(*rounds),
            TauValue::BreakerWin => None,
        }
    }
}

impl fmt::Display for TauValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauValue::Finite {
                rounds,
                tightness: Tightness::Exact,
            } => write!(f, "{rounds}"),
            TauValue::Finite {
                rounds,
                tightness: Tightness::UpperBound,
            } => write!(f, "<={rounds}"),
            TauValue::BreakerWin => f.write_str("breaker-win"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundError {
    #[error("n={n} is below the validity floor {floor} for {family} with a={a}")]
    OutOfValidity {
        family: String,
        a: usize,
        n: usize,
        floor: usize,
    },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// Smallest `n` for which the fast strategies are shipped as valid. The
/// move counts need `n` large enough; these floors were calibrated by
/// running every strategy against the full adversary suite.
pub fn validity_floor(family: &Family, a: usize) -> usize {
    match family {
        Family::PerfectMatching => 8 * a + 4,
        Family::Hamilton => 10 * a,
        Family::PathFactor(k) | Family::StarFactor(k) => (4 * k).max(2 * k * a),
        Family::Custom(_) => 0,
    }
}

fn ceil_div(x: usize, y: usize) -> usize {
    x.div_ceil(y)
}

/// Closed-form duration of the (a:a) game with Breaker moving first.
pub fn round_bound(family: &Family, a: usize, n: usize) -> Result<TauValue, BoundError> {
    if a == 0 {
        return Err(BoundError::InvalidParameters(
            "bias must be positive".into(),
        ));
    }
    if let Some(k) = family.k() {
        if k < 2 || !n.is_multiple_of(k) {
            return Err(BoundError::InvalidParameters(format!(
                "k={k} must be >= 2 and divide n={n}"
            )));
        }
        if matches!(family, Family::StarFactor(_)) && k < 3 {
            return Err(BoundError::InvalidParameters(
                "star factors need k >= 3".into(),
            ));
        }
    }
    if matches!(family, Family::Custom(_)) {
        return Err(BoundError::InvalidParameters(
            "no closed form for custom families".into(),
        ));
    }
    let floor = validity_floor(family, a);
    if n < floor {
        return Err(BoundError::OutOfValidity {
            family: family.to_string(),
            a,
            n,
            floor,
        });
    }
    Ok(match family {
        Family::PerfectMatching => {
            if a == 1 && n.is_multiple_of(2) {
                TauValue::exact(n / 2 + 1)
            } else if (n - 1).is_multiple_of(2 * a) {
                TauValue::exact(ceil_div(n, 2 * a) - 1)
            } else {
                TauValue::exact(ceil_div(n, 2 * a))
            }
        }
        Family::Hamilton => {
            if a == 1 || (a == 2 && n.is_multiple_of(2)) {
                TauValue::exact(n / a + 1)
            } else {
                TauValue::exact(ceil_div(n, a))
            }
        }
        Family::PathFactor(k) => TauValue::exact(ceil_div((k - 1) * n, k * a)),
        Family::StarFactor(k) => {
            let edges = (k - 1) * n / k;
            if !edges.is_multiple_of(a) {
                TauValue::upper(ceil_div(edges, a))
            } else {
                TauValue::upper(edges / a + 1)
            }
        }
        Family::Custom(_) => unreachable!(),
    })
}

// ---------------------------------------------------------------------------
// Perfect matchings (general graphs, Edmonds' blossom algorithm)
// ---------------------------------------------------------------------------

const NONE: usize = usize::MAX;

struct Blossom<'a> {
    g: &'a SimpleGraph,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
}

impl<'a> Blossom<'a> {
    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.g.n()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    fn find_path(&mut self, root: usize) -> usize {
        let n = self.g.n();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &to in self.g.neighbors(v) {
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return to;
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    queue.push_back(next);
                }
            }
        }
        NONE
    }
}

/// Maximum matching of a general graph as a list of edges.
pub fn maximum_matching(g: &SimpleGraph) -> Vec<Edge> {
    let n = g.n();
    let mut b = Blossom {
        g,
        mate: vec![NONE; n],
        parent: vec![NONE; n],
        base: (0..n).collect(),
        used: vec![false; n],
        in_blossom: vec![false; n],
    };
    for v in 0..n {
        if b.mate[v] == NONE {
            if let Some(&u) = g.neighbors(v).iter().find(|&&u| b.mate[u] == NONE) {
                b.mate[v] = u;
                b.mate[u] = v;
            }
        }
    }
    for v in 0..n {
        if b.mate[v] != NONE {
            continue;
        }
        let mut u = b.find_path(v);
        while u != NONE {
            let pv = b.parent[u];
            let ppv = b.mate[pv];
            b.mate[u] = pv;
            b.mate[pv] = u;
            u = ppv;
        }
    }
    (0..n)
        .filter(|&v| b.mate[v] != NONE && v < b.mate[v])
        .map(|v| Edge::new(v, b.mate[v]))
        .collect()
}

/// True iff `g` has a matching covering all but at most one vertex.
pub fn contains_perfect_matching(g: &SimpleGraph) -> bool {
    let need = g.n() / 2;
    if g.edge_count() < need {
        return false;
    }
    maximum_matching(g).len() >= need
}

// ---------------------------------------------------------------------------
// Hamilton cycles
// ---------------------------------------------------------------------------

/// Exact Hamilton-cycle test. Branches on edges (keep or drop) with
/// propagation: every vertex needs exactly two cycle edges, kept edges may
/// not close a short cycle, and the surviving edges must stay 2-connected.
pub fn contains_hamilton_cycle(g: &SimpleGraph) -> bool {
    let n = g.n();
    if n < 3 || g.edge_count() < n {
        return false;
    }
    let edges: Vec<(usize, usize)> = g.edges().map(|e| (e.u, e.v)).collect();
    let mut inc = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        inc[u].push(i);
        inc[v].push(i);
    }
    let search = HamSearch { n, edges, inc };
    search.solve(vec![EdgeState::Open; search.edges.len()])
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EdgeState {
    Open,
    Kept,
    Dropped,
}

struct HamSearch {
    n: usize,
    edges: Vec<(usize, usize)>,
    inc: Vec<Vec<usize>>,
}

impl HamSearch {
    fn other(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    fn count(&self, st: &[EdgeState], v: usize, s: EdgeState) -> usize {
        self.inc[v].iter().filter(|&&e| st[e] == s).count()
    }

    fn solve(&self, mut st: Vec<EdgeState>) -> bool {
        if !self.propagate(&mut st) {
            return false;
        }
        // branch at the vertex with the fewest open edges, path ends first
        let pick = (0..self.n)
            .filter(|&v| self.count(&st, v, EdgeState::Kept) < 2)
            .min_by_key(|&v| {
                (
                    self.count(&st, v, EdgeState::Open),
                    2 - self.count(&st, v, EdgeState::Kept),
                )
            });
        let Some(v) = pick else {
            // all degrees are two and no short cycle survived propagation
            return true;
        };
        let e = *self.inc[v]
            .iter()
            .find(|&&e| st[e] == EdgeState::Open)
            .unwrap();
        let mut keep = st.clone();
        keep[e] = EdgeState::Kept;
        if self.solve(keep) {
            return true;
        }
        st[e] = EdgeState::Dropped;
        self.solve(st)
    }

    fn propagate(&self, st: &mut [EdgeState]) -> bool {
        let n = self.n;
        loop {
            let mut changed = false;
            for v in 0..n {
                let kept = self.count(st, v, EdgeState::Kept);
                let open = self.count(st, v, EdgeState::Open);
                if kept > 2 || kept + open < 2 {
                    return false;
                }
                if open > 0 && (kept == 2 || kept + open == 2) {
                    let to = if kept == 2 {
                        EdgeState::Dropped
                    } else {
                        EdgeState::Kept
                    };
                    for &e in &self.inc[v] {
                        if st[e] == EdgeState::Open {
                            st[e] = to;
                        }
                    }
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // walk the kept paths; drop open edges that would close one early
            let mut end = vec![usize::MAX; n];
            let mut len = vec![0; n];
            let mut seen = vec![false; n];
            for v in 0..n {
                if seen[v] || self.count(st, v, EdgeState::Kept) != 1 {
                    continue;
                }
                let (mut prev, mut cur, mut size) = (usize::MAX, v, 1);
                seen[v] = true;
                while let Some(&e) = self.inc[cur]
                    .iter()
                    .find(|&&e| st[e] == EdgeState::Kept && self.other(e, cur) != prev)
                {
                    prev = cur;
                    cur = self.other(e, cur);
                    seen[cur] = true;
                    size += 1;
                }
                end[v] = cur;
                end[cur] = v;
                len[v] = size;
                len[cur] = size;
            }
            for v in 0..n {
                if !seen[v] && self.count(st, v, EdgeState::Kept) == 2 {
                    // an unseen vertex of kept degree two lies on a kept cycle
                    let (mut prev, mut cur, mut size) = (usize::MAX, v, 0);
                    loop {
                        seen[cur] = true;
                        size += 1;
                        let e = *self.inc[cur]
                            .iter()
                            .find(|&&e| st[e] == EdgeState::Kept && self.other(e, cur) != prev)
                            .unwrap();
                        prev = cur;
                        cur = self.other(e, cur);
                        if cur == v {
                            break;
                        }
                    }
                    if size < n {
                        return false;
                    }
                }
            }
            for (i, &(u, v)) in self.edges.iter().enumerate() {
                if st[i] == EdgeState::Open && end[u] == v && len[u] < n {
                    st[i] = EdgeState::Dropped;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        !self.has_cut_vertex(st)
    }

    /// True when the surviving edges are disconnected or have a cut vertex.
    fn has_cut_vertex(&self, st: &[EdgeState]) -> bool {
        let n = self.n;
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut timer = 0;
        // iterative DFS frames: (vertex, parent, next incidence index)
        let mut stack = vec![(0usize, usize::MAX, 0usize)];
        disc[0] = 0;
        let mut root_children = 0;
        while let Some(top) = stack.last_mut() {
            let (v, parent) = (top.0, top.1);
            if let Some(&e) = self.inc[v].get(top.2) {
                top.2 += 1;
                if st[e] == EdgeState::Dropped {
                    continue;
                }
                let w = self.other(e, v);
                if disc[w] == usize::MAX {
                    timer += 1;
                    disc[w] = timer;
                    low[w] = timer;
                    if v == 0 {
                        root_children += 1;
                    }
                    stack.push((w, v, 0));
                } else if w != parent {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if parent != 0 && low[v] >= disc[parent] {
                        return true;
                    }
                }
            }
        }
        timer + 1 < n || root_children > 1
    }
}

// ---------------------------------------------------------------------------
// Path and star factors
// ---------------------------------------------------------------------------

/// True iff the vertex set splits into copies of `P_k` whose edges lie in `g`.
pub fn contains_path_factor(g: &SimpleGraph, k: usize) -> bool {
    factor_by_component(g, k, FactorShape::Path)
}

/// True iff the vertex set splits into copies of `S_k` (a centre and `k-1`
/// leaves) whose edges lie in `g`.
pub fn contains_star_factor(g: &SimpleGraph, k: usize) -> bool {
    factor_by_component(g, k, FactorShape::Star)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum FactorShape {
    Path,
    Star,
}

fn factor_by_component(g: &SimpleGraph, k: usize, shape: FactorShape) -> bool {
    let n = g.n();
    if k == 0 || !n.is_multiple_of(k) {
        return false;
    }
    if k == 1 {
        return true;
    }
    if g.edge_count() < n / k * (k - 1) {
        return false;
    }
    let mut covered = vec![false; n];
    for comp in g.components() {
        if comp.len() % k != 0 {
            return false;
        }
        let edges: usize = comp.iter().map(|&v| g.neighbors(v).len()).sum::<usize>() / 2;
        let max_deg = comp
            .iter()
            .map(|&v| g.neighbors(v).len())
            .max()
            .unwrap_or(0);
        match shape {
            // paths and cycles split trivially
            FactorShape::Path if max_deg <= 2 => continue,
            FactorShape::Star if comp.len() == k && edges == k - 1 && max_deg == k - 1 => continue,
            FactorShape::Star if k == 3 && max_deg <= 2 => continue,
            _ => {}
        }
        if !cover_component(g, k, shape, &comp, &mut covered) {
            return false;
        }
    }
    true
}

fn cover_component(
    g: &SimpleGraph,
    k: usize,
    shape: FactorShape,
    comp: &[usize],
    covered: &mut [bool],
) -> bool {
    let Some(&v) = comp.iter().find(|&&v| !covered[v]) else {
        return true;
    };
    let pieces = match shape {
        FactorShape::Path => paths_through(g, k, v, covered),
        FactorShape::Star => stars_through(g, k, v, covered),
    };
    for piece in pieces {
        for &x in &piece {
            covered[x] = true;
        }
        if cover_component(g, k, shape, comp, covered) {
            return true;
        }
        for &x in &piece {
            covered[x] = false;
        }
    }
    false
}

/// All vertex sets of `k`-vertex paths in `g` through `v` avoiding `covered`.
fn paths_through(g: &SimpleGraph, k: usize, v: usize, covered: &[bool]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut left = vec![v];
    for left_len in 1..=k {
        arms(g, &mut left, left_len, covered, &mut |l| {
            let mut used: Vec<usize> = l.to_vec();
            let need = k - l.len();
            if need == 0 {
                out.push(used);
                return;
            }
            let mut right = vec![v];
            arms_avoiding(g, &mut right, need + 1, covered, &used.clone(), &mut |r| {
                let mut all = used.clone();
                all.extend_from_slice(&r[1..]);
                out.push(all);
            });
            used.clear();
        });
    }
    for p in out.iter_mut() {
        p.sort_unstable();
    }
    out.sort();
    out.dedup();
    out
}

fn arms(
    g: &SimpleGraph,
    path: &mut Vec<usize>,
    len: usize,
    covered: &[bool],
    f: &mut dyn FnMut(&[usize]),
) {
    arms_avoiding(g, path, len, covered, &[], f)
}

fn arms_avoiding(
    g: &SimpleGraph,
    path: &mut Vec<usize>,
    len: usize,
    covered: &[bool],
    avoid: &[usize],
    f: &mut dyn FnMut(&[usize]),
) {
    if path.len() == len {
        f(path);
        return;
    }
    let last = *path.last().unwrap();
    for &w in g.neighbors(last) {
        if covered[w] || path.contains(&w) || avoid.contains(&w) {
            continue;
        }
        path.push(w);
        arms_avoiding(g, path, len, covered, avoid, f);
        path.pop();
    }
}

fn stars_through(g: &SimpleGraph, k: usize, v: usize, covered: &[bool]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let free_nb = |c: usize, skip: usize| -> Vec<usize> {
        g.neighbors(c)
            .iter()
            .copied()
            .filter(|&w| !covered[w] && w != skip)
            .collect()
    };
    // v as the centre
    for leaves in subsets(&free_nb(v, usize::MAX), k - 1) {
        let mut s = leaves;
        s.push(v);
        out.push(s);
    }
    // v as a leaf of centre c
    for c in free_nb(v, usize::MAX) {
        for leaves in subsets(&free_nb(c, v), k - 2) {
            let mut s = leaves;
            s.push(v);
            s.push(c);
            out.push(s);
        }
    }
    for s in out.iter_mut() {
        s.sort_unstable();
    }
    out.sort();
    out.dedup();
    out
}

fn subsets(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    fn rec(
        items: &[usize],
        r: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < r - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, r, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, r, 0, &mut Vec::new(), &mut out);
    out
}
