//! Basic graph vocabulary shared by every module: normalised edges and a
//! small adjacency-list graph.

use std::fmt;

use serde::{Deserialize, Serialize};

/// An undirected edge, always stored with `u < v`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        debug_assert!(a != b, "self-loop {a}-{b}");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint that is not `x`. Panics in debug builds if `x` is not an endpoint.
    pub fn other(&self, x: usize) -> usize {
        debug_assert!(self.contains(x));
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, other: &Edge) -> bool {
        self.contains(other.u) || self.contains(other.v)
    }
}

impl From<[usize; 2]> for Edge {
    fn from(p: [usize; 2]) -> Self {
        Edge::new(p[0], p[1])
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.u, e.v]
    }
}

impl From<(usize, usize)> for Edge {
    fn from(p: (usize, usize)) -> Self {
        Edge::new(p.0, p.1)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

/// Position of `e` in the row-major enumeration of all pairs of `K_n`.
#[inline]
pub fn pair_index(e: Edge) -> usize {
    e.v * (e.v - 1) / 2 + e.u
}

/// Number of pairs in `K_n`.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Read-only adjacency, used by the rotation machinery so it can work on an
/// explicit graph as well as on "everything the opponent has not claimed".
pub trait Adjacency {
    fn vertex_count(&self) -> usize;
    fn has_edge(&self, u: usize, v: usize) -> bool;
    fn degree(&self, v: usize) -> usize;
}

/// Simple undirected graph on `0..n` stored as sorted adjacency lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        SimpleGraph {
            adj: vec![Vec::new(); n],
            edges: 0,
        }
    }

    pub fn from_edges<I, E>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = E>,
        E: Into<Edge>,
    {
        let mut g = SimpleGraph::new(n);
        for e in edges {
            g.add_edge(e.into());
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = SimpleGraph::new(n);
        for v in 0..n {
            for u in 0..v {
                g.add_edge(Edge::new(u, v));
            }
        }
        g
    }

    /// Adds `e`; returns false if it was already present.
    pub fn add_edge(&mut self, e: Edge) -> bool {
        let list = &mut self.adj[e.u];
        match list.binary_search(&e.v) {
            Ok(_) => false,
            Err(pos) => {
                list.insert(pos, e.v);
                let other = &mut self.adj[e.v];
                let pos = other.binary_search(&e.u).unwrap_err();
                other.insert(pos, e.u);
                self.edges += 1;
                true
            }
        }
    }

    pub fn remove_edge(&mut self, e: Edge) -> bool {
        if let Ok(pos) = self.adj[e.u].binary_search(&e.v) {
            self.adj[e.u].remove(pos);
            let pos = self.adj[e.v]
                .binary_search(&e.u)
                .expect("symmetric adjacency");
            self.adj[e.v].remove(pos);
            self.edges -= 1;
            true
        } else {
            false
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        u != v && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&v| v > u)
                .map(move |&v| Edge { u, v })
        })
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                i += 1;
                for &y in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

impl Adjacency for SimpleGraph {
    fn vertex_count(&self) -> usize {
        self.n()
    }
    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.contains(u, v)
    }
    fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }
}
