//! Path collections, Pósa-style rotations, Hamilton completion, bipartite
//! matchings with König covers, and good/bad edge bookkeeping.

use thiserror::Error;

use crate::engine::{Board, BoardKind, Side};
use crate::graph::{Adjacency, Edge, SimpleGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ToolError {
    #[error("degree condition violated: {0}")]
    DegreeConditionViolated(String),
    #[error("invalid path structure: {0}")]
    InvalidPaths(String),
}

/// Every edge of the board that `opponent` has not claimed.
#[derive(Clone, Copy)]
pub struct OpenTo<'a> {
    pub board: &'a Board,
    pub opponent: Side,
}

impl<'a> OpenTo<'a> {
    pub fn new(board: &'a Board, opponent: Side) -> Self {
        OpenTo { board, opponent }
    }
}

impl Adjacency for OpenTo<'_> {
    fn vertex_count(&self) -> usize {
        self.board.n()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.board.is_edge(u, v) && !self.board.owned_by(self.opponent, u, v)
    }

    fn degree(&self, v: usize) -> usize {
        let n = self.board.n();
        let possible = match self.board.kind() {
            BoardKind::Complete => n - 1,
            BoardKind::Bipartite => n / 2,
        };
        possible - self.board.degree(self.opponent, v)
    }
}

fn non_degree<G: Adjacency>(g: &G, v: usize) -> usize {
    g.vertex_count() - 1 - g.degree(v)
}

/// Vertex-disjoint paths covering a vertex set; single vertices are paths
/// with both ends equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathCollection {
    slots: Vec<Option<Vec<usize>>>,
    id_of: Vec<usize>,
    alive: usize,
}

const UNTRACKED: usize = usize::MAX;

impl PathCollection {
    /// Every vertex of `0..n` as its own path.
    pub fn singletons(n: usize) -> Self {
        PathCollection {
            slots: (0..n).map(|v| Some(vec![v])).collect(),
            id_of: (0..n).collect(),
            alive: n,
        }
    }

    /// Builds a collection from explicit vertex sequences over `0..n`.
    /// Vertices not mentioned are untracked.
    pub fn from_paths(n: usize, paths: Vec<Vec<usize>>) -> Result<Self, ToolError> {
        let mut id_of = vec![UNTRACKED; n];
        for (i, p) in paths.iter().enumerate() {
            if p.is_empty() {
                return Err(ToolError::InvalidPaths("empty path".into()));
            }
            for &v in p {
                if v >= n || id_of[v] != UNTRACKED {
                    return Err(ToolError::InvalidPaths(format!(
                        "vertex {v} repeated or out of range"
                    )));
                }
                id_of[v] = i;
            }
        }
        let alive = paths.len();
        Ok(PathCollection {
            slots: paths.into_iter().map(Some).collect(),
            id_of,
            alive,
        })
    }

    /// The components of a linear forest on `0..n`; errors if `g` is not one.
    pub fn from_linear_forest(g: &SimpleGraph) -> Result<Self, ToolError> {
        let n = g.n();
        let mut seen = vec![false; n];
        let mut paths = Vec::new();
        for s in 0..n {
            if seen[s] || g.neighbors(s).len() > 1 {
                continue;
            }
            let mut p = vec![s];
            seen[s] = true;
            let mut prev = usize::MAX;
            let mut cur = s;
            while let Some(&nx) = g.neighbors(cur).iter().find(|&&w| w != prev) {
                if seen[nx] {
                    return Err(ToolError::InvalidPaths("not a linear forest".into()));
                }
                seen[nx] = true;
                p.push(nx);
                prev = cur;
                cur = nx;
            }
            paths.push(p);
        }
        if seen.iter().any(|s| !s) || (0..n).any(|v| g.neighbors(v).len() > 2) {
            return Err(ToolError::InvalidPaths("not a linear forest".into()));
        }
        PathCollection::from_paths(n, paths)
    }

    pub fn n(&self) -> usize {
        self.id_of.len()
    }

    /// Number of paths.
    pub fn len(&self) -> usize {
        self.alive
    }

    pub fn is_empty(&self) -> bool {
        self.alive == 0
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(i, _)| i)
    }

    pub fn path(&self, id: usize) -> &[usize] {
        self.slots[id].as_deref().expect("live path id")
    }

    pub fn paths(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.slots.iter().filter_map(|s| s.as_deref())
    }

    pub fn id_of(&self, v: usize) -> Option<usize> {
        let id = self.id_of[v];
        (id != UNTRACKED).then_some(id)
    }

    pub fn path_of(&self, v: usize) -> &[usize] {
        self.path(self.id_of[v])
    }

    pub fn size_of(&self, v: usize) -> usize {
        self.path_of(v).len()
    }

    pub fn ends(&self, id: usize) -> (usize, usize) {
        let p = self.path(id);
        (p[0], p[p.len() - 1])
    }

    pub fn is_endpoint(&self, v: usize) -> bool {
        match self.id_of(v) {
            Some(id) => {
                let (x, y) = self.ends(id);
                v == x || v == y
            }
            None => false,
        }
    }

    /// The other end of the path whose endpoint is `v` (itself for singletons).
    pub fn other_end(&self, v: usize) -> usize {
        let (x, y) = self.ends(self.id_of[v]);
        if v == x {
            y
        } else {
            x
        }
    }

    /// All endpoints, each vertex listed once, ascending.
    pub fn endpoints(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::with_capacity(2 * self.alive);
        for id in self.ids() {
            let (x, y) = self.ends(id);
            out.push(x);
            if y != x {
                out.push(y);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn same_path(&self, u: usize, v: usize) -> bool {
        self.id_of(u).is_some() && self.id_of(u) == self.id_of(v)
    }

    /// Joins the paths ending at `u` and `v` with the edge `uv`; returns the new id.
    pub fn join(&mut self, u: usize, v: usize) -> Result<usize, ToolError> {
        if !self.is_endpoint(u) || !self.is_endpoint(v) || self.same_path(u, v) {
            return Err(ToolError::InvalidPaths(format!(
                "{u}-{v} does not join two path ends"
            )));
        }
        let (iu, iv) = (self.id_of[u], self.id_of[v]);
        let mut a = self.slots[iu].take().unwrap();
        let mut b = self.slots[iv].take().unwrap();
        if *a.last().unwrap() != u {
            a.reverse();
        }
        if b[0] != v {
            b.reverse();
        }
        for &w in &b {
            self.id_of[w] = iu;
        }
        a.extend(b);
        self.slots[iu] = Some(a);
        self.alive -= 1;
        Ok(iu)
    }

    /// Replaces the paths containing the vertices of `merged` by `merged`.
    pub fn replace(&mut self, merged: Vec<usize>) -> usize {
        let mut ids: Vec<usize> = merged.iter().map(|&v| self.id_of[v]).collect();
        ids.sort_unstable();
        ids.dedup();
        for &id in &ids {
            if self.slots[id].take().is_some() {
                self.alive -= 1;
            }
        }
        let id = ids[0];
        for &v in &merged {
            self.id_of[v] = id;
        }
        self.slots[id] = Some(merged);
        self.alive += 1;
        id
    }

    /// Edges of all paths.
    pub fn edges(&self) -> Vec<Edge> {
        self.paths()
            .flat_map(|p| p.windows(2).map(|w| Edge::new(w[0], w[1])))
            .collect()
    }

    /// Structural check: disjoint, consistent ownership map.
    pub fn is_consistent(&self) -> bool {
        let mut count = 0;
        for id in self.ids() {
            let p = self.path(id);
            if p.is_empty() || p.iter().any(|&v| self.id_of[v] != id) {
                return false;
            }
            count += 1;
        }
        let tracked = self.id_of.iter().filter(|&&i| i != UNTRACKED).count();
        let sizes: usize = self.paths().map(|p| p.len()).sum();
        count == self.alive && tracked == sizes
    }
}

/// Result of merging two paths by one rotation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Merge {
    pub path: Vec<usize>,
    /// Edges of the new path that were on neither input path.
    pub added: Vec<Edge>,
    /// Edge of the first path that is no longer used, if any.
    pub removed: Option<Edge>,
}

/// Merges `p1` and `p2` into one path using at most two edges of `g`,
/// dropping at most one edge of `p1`. Requires every endpoint to miss at
/// most `|p1|/2 - 1` vertices in `g`.
pub fn rotate_merge<G: Adjacency>(p1: &[usize], p2: &[usize], g: &G) -> Result<Merge, ToolError> {
    let len1 = p1.len();
    for &v in [p1[0], p1[len1 - 1], p2[0], p2[p2.len() - 1]].iter() {
        let miss = non_degree(g, v);
        if 2 * (miss + 1) > len1 {
            return Err(ToolError::DegreeConditionViolated(format!(
                "endpoint {v} misses {miss} vertices, limit for a {len1}-vertex path is {}",
                (len1 / 2).saturating_sub(1)
            )));
        }
    }
    let x1 = p1[0];
    let x2 = p2[0];
    let mut fallback = None;
    let mut best: Option<(usize, usize)> = None;
    // z = p1[i], z+ = p1[i+1]; scan in ascending vertex order of z
    for i in 0..len1 - 1 {
        let z = p1[i];
        let zp = p1[i + 1];
        if !g.has_edge(x2, z) {
            continue;
        }
        if i == 0 {
            fallback = Some(i);
            continue;
        }
        if g.has_edge(x1, zp) && best.is_none_or(|(bz, _)| z < bz) {
            best = Some((z, i));
        }
    }
    let rev2 = || p2.iter().rev().copied().collect::<Vec<usize>>();
    if let Some((_, i)) = best {
        let z = p1[i];
        let zp = p1[i + 1];
        let mut path = rev2();
        path.extend(p1[..=i].iter().rev());
        path.extend(&p1[i + 1..]);
        return Ok(Merge {
            path,
            added: vec![Edge::new(x1, zp), Edge::new(x2, z)],
            removed: Some(Edge::new(z, zp)),
        });
    }
    if fallback.is_some() {
        let mut path = rev2();
        path.extend(p1);
        return Ok(Merge {
            path,
            added: vec![Edge::new(x1, x2)],
            removed: None,
        });
    }
    Err(ToolError::DegreeConditionViolated(
        "no rotation vertex found".into(),
    ))
}

/// At most two edges of `g` that close the spanning path `p` into a cycle.
pub fn close_path<G: Adjacency>(p: &[usize], g: &G) -> Result<Vec<Edge>, ToolError> {
    let n = p.len();
    if n < 3 {
        return Err(ToolError::InvalidPaths(
            "a cycle needs at least three vertices".into(),
        ));
    }
    let (x, y) = (p[0], p[n - 1]);
    if g.has_edge(x, y) {
        return Ok(vec![Edge::new(x, y)]);
    }
    for i in 1..n - 2 {
        if g.has_edge(x, p[i + 1]) && g.has_edge(y, p[i]) {
            return Ok(vec![Edge::new(x, p[i + 1]), Edge::new(y, p[i])]);
        }
    }
    let nv = g.vertex_count();
    Err(ToolError::DegreeConditionViolated(format!(
        "ends {x},{y} have degrees {},{} (need {} each)",
        g.degree(x),
        g.degree(y),
        nv.div_ceil(2)
    )))
}

/// The cycle obtained by closing `p` with the edges returned by [`close_path`].
pub fn closed_cycle(p: &[usize], closing: &[Edge]) -> Vec<usize> {
    if closing.len() == 1 {
        return p.to_vec();
    }
    let x = p[0];
    let i = (0..p.len() - 1)
        .find(|&i| closing.contains(&Edge::new(x, p[i + 1])))
        .expect("closing edge");
    // x .. p[i], then y back down to p[i+1]
    let mut c: Vec<usize> = p[..=i].to_vec();
    c.extend(p[i + 1..].iter().rev());
    c
}

/// Edges of `g` which, together with the paths, contain a Hamilton cycle.
/// Paths are merged into the longest one by repeated rotations and the
/// resulting spanning path is closed.
pub fn complete_hamilton<G: Adjacency>(
    paths: &PathCollection,
    g: &G,
) -> Result<Vec<Edge>, ToolError> {
    let n = g.vertex_count();
    let t = paths.len();
    if t == 0 || paths.paths().map(|p| p.len()).sum::<usize>() != n {
        return Err(ToolError::InvalidPaths(
            "paths must cover every vertex".into(),
        ));
    }
    for v in paths.endpoints() {
        let miss = non_degree(g, v);
        if 2 * t * (miss + 1) > n {
            return Err(ToolError::DegreeConditionViolated(format!(
                "endpoint {v} misses {miss} vertices with {t} paths"
            )));
        }
    }
    let mut order: Vec<Vec<usize>> = paths.paths().map(|p| p.to_vec()).collect();
    // longest first, stable on the collection order otherwise
    let longest = (0..order.len())
        .max_by_key(|&i| (order[i].len(), std::cmp::Reverse(i)))
        .unwrap();
    let mut current = order.remove(longest);
    let mut used: Vec<Edge> = Vec::new();
    for next in order {
        let merge = rotate_merge(&current, &next, g)?;
        for e in merge.added {
            if !used.contains(&e) {
                used.push(e);
            }
        }
        current = merge.path;
    }
    let original: Vec<Edge> = paths.edges();
    let mut closing = close_path(&current, g)?;
    used.append(&mut closing);
    used.retain(|e| !original.contains(e));
    used.dedup();
    Ok(used)
}

/// Maximum matching of a bipartite graph with a König vertex cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteMatching {
    /// Matched pairs (left index, right index).
    pub pairs: Vec<(usize, usize)>,
    pub cover_left: Vec<usize>,
    pub cover_right: Vec<usize>,
}

impl BipartiteMatching {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn cover_size(&self) -> usize {
        self.cover_left.len() + self.cover_right.len()
    }
}

/// Kuhn's augmenting-path matching; `adj[l]` lists right neighbours of left vertex `l`.
pub fn max_bipartite_matching(left: usize, right: usize, adj: &[Vec<usize>]) -> BipartiteMatching {
    fn augment(l: usize, adj: &[Vec<usize>], seen: &mut [bool], match_r: &mut [usize]) -> bool {
        for &r in &adj[l] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if match_r[r] == usize::MAX || augment(match_r[r], adj, seen, match_r) {
                match_r[r] = l;
                return true;
            }
        }
        false
    }
    let mut match_r = vec![usize::MAX; right];
    for l in 0..left {
        let mut seen = vec![false; right];
        augment(l, adj, &mut seen, &mut match_r);
    }
    let mut match_l = vec![usize::MAX; left];
    for (r, &l) in match_r.iter().enumerate() {
        if l != usize::MAX {
            match_l[l] = r;
        }
    }
    // König: alternating reachability from unmatched left vertices
    let mut reach_l = vec![false; left];
    let mut reach_r = vec![false; right];
    let mut stack: Vec<usize> = (0..left).filter(|&l| match_l[l] == usize::MAX).collect();
    for &l in &stack {
        reach_l[l] = true;
    }
    while let Some(l) = stack.pop() {
        for &r in &adj[l] {
            if !reach_r[r] {
                reach_r[r] = true;
                let m = match_r[r];
                if m != usize::MAX && !reach_l[m] {
                    reach_l[m] = true;
                    stack.push(m);
                }
            }
        }
    }
    let pairs = (0..left)
        .filter(|&l| match_l[l] != usize::MAX)
        .map(|l| (l, match_l[l]))
        .collect();
    BipartiteMatching {
        pairs,
        cover_left: (0..left).filter(|&l| !reach_l[l]).collect(),
        cover_right: (0..right).filter(|&r| reach_r[r]).collect(),
    }
}

/// Bad-edge bookkeeping over the endpoints of a path collection: a pair of
/// endpoints of distinct paths is good if free and bad if the opponent owns it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadEdgeStats {
    pub br: usize,
    /// Number of bad edges at each vertex (zero for non-endpoints).
    pub bad_degree: Vec<usize>,
}

impl BadEdgeStats {
    /// D(e): bad edges sharing an endpoint with the good edge `e`.
    pub fn d(&self, e: Edge) -> usize {
        self.bad_degree[e.u] + self.bad_degree[e.v]
    }
}

pub fn bad_edge_stats(paths: &PathCollection, board: &Board, opponent: Side) -> BadEdgeStats {
    let n = board.n();
    let mut bad_degree = vec![0; n];
    let mut br = 0;
    for &u in &paths.endpoints() {
        for &v in board.neighbors(opponent, u) {
            if v > u && paths.is_endpoint(v) && !paths.same_path(u, v) {
                br += 1;
                bad_degree[u] += 1;
                bad_degree[v] += 1;
            }
        }
    }
    BadEdgeStats { br, bad_degree }
}

/// Is `e` a good edge: free and joining endpoints of two distinct paths.
pub fn is_good(paths: &PathCollection, board: &Board, e: Edge) -> bool {
    paths.is_endpoint(e.u)
        && paths.is_endpoint(e.v)
        && !paths.same_path(e.u, e.v)
        && board.is_free(e.u, e.v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotate_merge_complete_example() {
        let g = SimpleGraph::complete(5);
        let m = rotate_merge(&[0, 1, 2, 3], &[4], &g).unwrap();
        assert_eq!(m.removed, Some(Edge::new(1, 2)));
        assert_eq!(m.added, vec![Edge::new(0, 2), Edge::new(1, 4)]);
        let mut rev = m.path.clone();
        rev.reverse();
        assert_eq!(rev, vec![3, 2, 0, 1, 4]);
    }

    #[test]
    fn rotate_merge_rejects_sparse_endpoint() {
        let mut g = SimpleGraph::complete(6);
        for v in [2, 3, 4, 5] {
            g.remove_edge(Edge::new(0, v));
        }
        assert!(matches!(
            rotate_merge(&[0, 1, 2, 3], &[4, 5], &g),
            Err(ToolError::DegreeConditionViolated(_))
        ));
    }

    #[test]
    fn close_path_rotation() {
        let mut g = SimpleGraph::complete(4);
        g.remove_edge(Edge::new(0, 3));
        assert_eq!(
            close_path(&[0, 1, 2, 3], &g).unwrap(),
            vec![Edge::new(0, 2), Edge::new(3, 1)]
        );
        let c = closed_cycle(&[0, 1, 2, 3], &[Edge::new(0, 2), Edge::new(1, 3)]);
        assert_eq!(c, vec![0, 1, 3, 2]);
        let k4 = SimpleGraph::complete(4);
        assert_eq!(
            close_path(&[0, 1, 2, 3], &k4).unwrap(),
            vec![Edge::new(0, 3)]
        );
        let path_only = SimpleGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        assert!(close_path(&[0, 1, 2, 3], &path_only).is_err());
    }

    #[test]
    fn path_collection_join() {
        let mut pc = PathCollection::singletons(5);
        pc.join(0, 1).unwrap();
        pc.join(2, 1).unwrap();
        assert_eq!(pc.len(), 3);
        assert!(pc.is_endpoint(0) && pc.is_endpoint(2) && !pc.is_endpoint(1));
        assert!(pc.join(0, 2).is_err());
        assert_eq!(pc.size_of(0), 3);
        assert!(pc.is_consistent());
        assert_eq!(pc.endpoints(), vec![0, 2, 3, 4]);
    }

    #[test]
    fn konig_cover_matches() {
        let m = max_bipartite_matching(3, 3, &[vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]);
        assert_eq!(m.size(), 3);
        assert_eq!(m.cover_size(), 3);
        let m = max_bipartite_matching(3, 3, &[vec![1, 2], vec![0, 1, 2], vec![0, 1]]);
        assert_eq!(m.size(), 3);
        let m = max_bipartite_matching(0, 0, &[]);
        assert_eq!((m.size(), m.cover_size()), (0, 0));
        let m = max_bipartite_matching(3, 3, &[vec![0], vec![0], vec![0, 1, 2]]);
        assert_eq!(m.size(), 2);
        assert_eq!(m.cover_size(), 2);
    }

    #[test]
    fn bad_edges_counted() {
        let mut b = Board::new(6, BoardKind::Complete);
        b.claim(Edge::new(0, 1), Side::Maker);
        b.claim(Edge::new(2, 3), Side::Maker);
        b.claim(Edge::new(1, 2), Side::Breaker);
        b.claim(Edge::new(0, 4), Side::Breaker);
        let pc = PathCollection::from_linear_forest(&b.graph_of(Side::Maker)).unwrap();
        let s = bad_edge_stats(&pc, &b, Side::Breaker);
        assert_eq!(s.br, 2);
        assert_eq!(s.d(Edge::new(1, 3)), 1);
        assert_eq!(s.d(Edge::new(0, 2)), 2);
    }
}
