//! Opponent strategies used to stress the Maker strategies.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Board, InvariantLog, Side, OBSERVED_PREFIX};
use crate::graph::Edge;
use crate::strategy::{Strategy, StrategyFailure, Turn};

/// Names accepted by [`by_name`].
pub const BREAKER_NAMES: &[&str] = &[
    "random",
    "max_degree",
    "isolate_blocker",
    "matching_blocker",
    "endpoint_blocker",
    "ham_delayer",
    "first_free",
];

/// Builds an opponent strategy from its name.
pub fn by_name(name: &str, seed: u64) -> Option<Box<dyn Strategy>> {
    Some(match name {
        "random" => Box::new(RandomBreaker::new(seed)),
        "max_degree" => Box::new(MaxDegreeBreaker::new()),
        "isolate_blocker" => Box::new(IsolateBlocker::new(seed)),
        "matching_blocker" => Box::new(MatchingBlocker::new(seed)),
        "endpoint_blocker" => Box::new(EndpointBlocker::new(seed)),
        "ham_delayer" => Box::new(HamDelayer::new()),
        "first_free" | "null" => Box::new(FirstFree),
        _ => return None,
    })
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Adds uniformly random free edges until `out` has `steps` edges.
fn fill_random(board: &Board, rng: &mut ChaCha8Rng, out: &mut Vec<Edge>, steps: usize) {
    let n = board.n();
    let mut tries = 0;
    while out.len() < steps && tries < 64 {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        tries += 1;
        if u == v || !board.is_free(u, v) {
            continue;
        }
        let e = Edge::new(u, v);
        if !out.contains(&e) {
            out.push(e);
            tries = 0;
        }
    }
    if out.len() < steps {
        let mut free: Vec<Edge> = board
            .free_edges()
            .into_iter()
            .filter(|e| !out.contains(e))
            .collect();
        free.shuffle(rng);
        out.extend(free.into_iter().take(steps - out.len()));
    }
}

fn fill_lowest(board: &Board, out: &mut Vec<Edge>, steps: usize) {
    let n = board.n();
    'outer: for u in 0..n {
        for v in u + 1..n {
            if out.len() >= steps {
                break 'outer;
            }
            let e = Edge::new(u, v);
            if board.is_free(u, v) && !out.contains(&e) {
                out.push(e);
            }
        }
    }
}

/// Uniformly random free edges.
pub struct RandomBreaker {
    rng: ChaCha8Rng,
}

impl RandomBreaker {
    pub fn new(seed: u64) -> Self {
        RandomBreaker {
            rng: rng_for(seed, 1),
        }
    }
}

impl Strategy for RandomBreaker {
    fn name(&self) -> &str {
        "random"
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        _log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let mut out = Vec::with_capacity(turn.steps);
        fill_random(turn.board(), &mut self.rng, &mut out, turn.steps);
        Ok(out)
    }
}

/// Lexicographically smallest free edges.
pub struct FirstFree;

impl Strategy for FirstFree {
    fn name(&self) -> &str {
        "first_free"
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        _log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let mut out = Vec::with_capacity(turn.steps);
        fill_lowest(turn.board(), &mut out, turn.steps);
        Ok(out)
    }
}

/// Concentrates on one vertex: the one with the smallest opponent degree,
/// then largest own degree, then lowest index; it keeps that target until
/// the opponent touches it or its free edges run out.
#[derive(Default)]
pub struct MaxDegreeBreaker {
    target: Option<(usize, usize)>,
}

impl MaxDegreeBreaker {
    pub fn new() -> Self {
        Self::default()
    }

    fn free_degree(board: &Board, v: usize) -> usize {
        (0..board.n()).filter(|&w| board.is_free(v, w)).count()
    }

    fn pick_target(board: &Board, me: Side) -> Option<usize> {
        let opp = me.other();
        (0..board.n())
            .filter(|&v| Self::free_degree(board, v) > 0)
            .min_by_key(|&v| {
                (
                    board.degree(opp, v),
                    std::cmp::Reverse(board.degree(me, v)),
                    v,
                )
            })
    }

    pub(crate) fn plan(&mut self, board: &Board, me: Side, out: &mut Vec<Edge>, steps: usize) {
        let opp = me.other();
        while out.len() < steps {
            let keep = self.target.filter(|&(t, od)| {
                board.degree(opp, t) == od
                    && (0..board.n())
                        .any(|w| board.is_free(t, w) && !out.contains(&Edge::new(t, w)))
            });
            let t = match keep {
                Some((t, _)) => t,
                None => {
                    let mut planned = board.clone();
                    for &e in out.iter() {
                        planned.claim(e, me);
                    }
                    match Self::pick_target(&planned, me) {
                        Some(t) => {
                            self.target = Some((t, board.degree(opp, t)));
                            t
                        }
                        None => break,
                    }
                }
            };
            let w = (0..board.n())
                .filter(|&w| board.is_free(t, w) && !out.contains(&Edge::new(t, w)))
                .min_by_key(|&w| (board.degree(opp, w), w));
            match w {
                Some(w) => out.push(Edge::new(t, w)),
                None => self.target = None,
            }
        }
        fill_lowest(board, out, steps);
    }
}

impl Strategy for MaxDegreeBreaker {
    fn name(&self) -> &str {
        "max_degree"
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        _log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let mut out = Vec::with_capacity(turn.steps);
        self.plan(turn.board(), turn.side, &mut out, turn.steps);
        Ok(out)
    }
}

/// Random free edges among the vertices the opponent has not touched.
pub struct IsolateBlocker {
    rng: ChaCha8Rng,
}

impl IsolateBlocker {
    pub fn new(seed: u64) -> Self {
        IsolateBlocker {
            rng: rng_for(seed, 2),
        }
    }
}

impl Strategy for IsolateBlocker {
    fn name(&self) -> &str {
        "isolate_blocker"
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        _log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let board = turn.board();
        let opp = turn.side.other();
        let iso: Vec<usize> = (0..board.n())
            .filter(|&v| board.degree(opp, v) == 0)
            .collect();
        let mut cand = Vec::new();
        for (i, &u) in iso.iter().enumerate() {
            for &v in &iso[i + 1..] {
                if board.is_free(u, v) {
                    cand.push(Edge::new(u, v));
                }
            }
        }
        cand.shuffle(&mut self.rng);
        let mut out: Vec<Edge> = cand.into_iter().take(turn.steps).collect();
        fill_random(board, &mut self.rng, &mut out, turn.steps);
        Ok(out)
    }
}

/// Endpoints of the opponent's components that are paths or single vertices,
/// paired with a component id.
fn path_endpoints(board: &Board, opp: Side) -> (Vec<usize>, Vec<usize>) {
    let n = board.n();
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &y in board.neighbors(opp, x) {
                if comp[y] == usize::MAX {
                    comp[y] = c;
                    stack.push(y);
                }
            }
        }
        c += 1;
    }
    let ends = (0..n).filter(|&v| board.degree(opp, v) <= 1).collect();
    (ends, comp)
}

/// Claims edges between endpoints of different opponent paths, preferring
/// endpoints it has not yet blocked, so that its edges form a matching on
/// the endpoints.
pub struct MatchingBlocker {
    rng: ChaCha8Rng,
}

impl MatchingBlocker {
    pub fn new(seed: u64) -> Self {
        MatchingBlocker {
            rng: rng_for(seed, 3),
        }
    }
}

impl Strategy for MatchingBlocker {
    fn name(&self) -> &str {
        "matching_blocker"
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        _log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let mut out = Vec::with_capacity(turn.steps);
        self.plan(turn.board(), turn.side, &mut out, turn.steps);
        Ok(out)
    }
}

impl MatchingBlocker {
    /// Tops `out` up to `steps` edges.
    pub(crate) fn plan(&mut self, board: &Board, me: Side, out: &mut Vec<Edge>, steps: usize) {
        let opp = me.other();
        let (ends, comp) = path_endpoints(board, opp);
        let is_end = {
            let mut f = vec![false; board.n()];
            for &v in &ends {
                f[v] = true;
            }
            f
        };
        let blocked = |v: usize| {
            board
                .neighbors(me, v)
                .iter()
                .any(|&w| is_end[w] && comp[w] != comp[v])
        };
        let mut fresh = Vec::new();
        let mut rest = Vec::new();
        for (i, &u) in ends.iter().enumerate() {
            for &v in &ends[i + 1..] {
                if comp[u] != comp[v] && board.is_free(u, v) && !out.contains(&Edge::new(u, v)) {
                    if !blocked(u) && !blocked(v) {
                        fresh.push(Edge::new(u, v));
                    } else {
                        rest.push(Edge::new(u, v));
                    }
                }
            }
        }
        fresh.shuffle(&mut self.rng);
        rest.shuffle(&mut self.rng);
        let mut used = vec![false; board.n()];
        for e in out.iter() {
            used[e.u] = true;
            used[e.v] = true;
        }
        for e in fresh.iter().chain(rest.iter()) {
            if out.len() == steps {
                break;
            }
            if used[e.u] || used[e.v] {
                continue;
            }
            used[e.u] = true;
            used[e.v] = true;
            out.push(*e);
        }
        for e in fresh.into_iter().chain(rest) {
            if out.len() == steps {
                break;
            }
            if !out.contains(&e) {
                out.push(e);
            }
        }
        fill_random(board, &mut self.rng, out, steps);
    }
}

/// For the bias-2 Hamilton game: whenever the opponent's graph is exactly
/// two spanning paths, claims both edges from one end of the first path to
/// the ends of the second, which rules out closing a cycle next move.
/// Otherwise plays like [`MaxDegreeBreaker`].
#[derive(Default)]
pub struct HamDelayer {
    fallback: MaxDegreeBreaker,
}

impl HamDelayer {
    pub fn new() -> Self {
        Self::default()
    }

    /// The two paths if the opponent's graph is exactly two vertex-disjoint paths covering everything.
    fn two_paths(board: &Board, opp: Side) -> Option<[(usize, usize); 2]> {
        let n = board.n();
        if (0..n).any(|v| board.degree(opp, v) > 2) || board.claimed_count(opp) + 2 != n {
            return None;
        }
        let mut seen = vec![false; n];
        let mut found = Vec::new();
        for s in 0..n {
            if seen[s] || board.degree(opp, s) > 1 {
                continue;
            }
            seen[s] = true;
            let (mut prev, mut cur) = (usize::MAX, s);
            while let Some(&nx) = board.neighbors(opp, cur).iter().find(|&&w| w != prev) {
                seen[nx] = true;
                prev = cur;
                cur = nx;
            }
            found.push((s, cur));
        }
        if found.len() == 2 && seen.iter().all(|&s| s) {
            Some([found[0], found[1]])
        } else {
            None
        }
    }
}

impl Strategy for HamDelayer {
    fn name(&self) -> &str {
        "ham_delayer"
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        _log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let board = turn.board();
        let opp = turn.side.other();
        let mut out = Vec::with_capacity(turn.steps);
        block_closing(board, opp, &mut out, turn.steps);
        self.fallback.plan(board, turn.side, &mut out, turn.steps);
        Ok(out)
    }
}

/// If the opponent's graph is two spanning paths, pushes the free edges from
/// one end of the first path to both ends of the second.
fn block_closing(board: &Board, opp: Side, out: &mut Vec<Edge>, steps: usize) {
    let Some([(x1, y1), (x2, y2)]) = HamDelayer::two_paths(board, opp) else {
        return;
    };
    // the end whose two blocking edges are most available
    let free_count = |x: usize| {
        [x2, y2]
            .iter()
            .filter(|&&z| z != x && board.is_free(x, z))
            .count()
    };
    let x = [x1, y1]
        .into_iter()
        .max_by_key(|&x| (free_count(x), std::cmp::Reverse(x)))
        .unwrap();
    for z in [x2, y2] {
        if z != x && board.is_free(x, z) && out.len() < steps && !out.contains(&Edge::new(x, z)) {
            out.push(Edge::new(x, z));
        }
    }
}

/// Claims edges between endpoints of the opponent's paths like
/// [`MatchingBlocker`], and blocks the closing edges once the opponent is
/// down to two spanning paths.
pub struct EndpointBlocker {
    inner: MatchingBlocker,
}

impl EndpointBlocker {
    pub fn new(seed: u64) -> Self {
        EndpointBlocker {
            inner: MatchingBlocker {
                rng: rng_for(seed, 5),
            },
        }
    }
}

impl Strategy for EndpointBlocker {
    fn name(&self) -> &str {
        "endpoint_blocker"
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        _log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        let board = turn.board();
        let mut out = Vec::with_capacity(turn.steps);
        block_closing(board, turn.side.other(), &mut out, turn.steps);
        self.inner.plan(board, turn.side, &mut out, turn.steps);
        Ok(out)
    }
}

/// Plays `primary` and switches to `backup` for good once `primary` fails.
/// Invariants recorded by `primary` are kept as observations only.
pub struct Fallback<P, B> {
    primary: P,
    backup: B,
    failed: bool,
    label: String,
}

impl<P: Strategy, B: Strategy> Fallback<P, B> {
    pub fn new(primary: P, backup: B) -> Self {
        let label = format!("{}+{}", primary.name(), backup.name());
        Fallback {
            primary,
            backup,
            failed: false,
            label,
        }
    }

    pub fn has_fallen_back(&self) -> bool {
        self.failed
    }
}

impl<P: Strategy, B: Strategy> Strategy for Fallback<P, B> {
    fn name(&self) -> &str {
        &self.label
    }

    fn choose_move(
        &mut self,
        turn: &Turn,
        log: &mut InvariantLog,
    ) -> Result<Vec<Edge>, StrategyFailure> {
        if !self.failed {
            log.set_prefix(&format!("{OBSERVED_PREFIX}{}.", self.primary.name()));
            let r = self.primary.choose_move(turn, log);
            log.set_prefix("");
            match r {
                Ok(mv) if mv.len() == turn.steps && valid_move(turn.board(), &mv) => return Ok(mv),
                _ => self.failed = true,
            }
        }
        self.backup.choose_move(turn, log)
    }
}

fn valid_move(board: &Board, mv: &[Edge]) -> bool {
    mv.iter()
        .enumerate()
        .all(|(i, e)| board.in_range(*e) && board.is_free(e.u, e.v) && !mv[..i].contains(e))
}
