//! Depth-first exploration that reveals the random vertex set `R` as it goes.
//!
//! The state is the partition of `V` into `S` (explored, in `R`), `T`
//! (untouched), `U` (a stack, the live path) and `W` (queried, not in `R`).
//! Each round either flips the coin of one `T` vertex or pops the top of
//! `U` into `S`:
//!
//! * `U` non-empty: scan the top vertex's neighbors in σ-order for one still
//!   in `T`. Heads pushes it onto `U`, tails moves it to `W`. No `T`
//!   neighbor left pops the top into `S`.
//! * `U` empty: flip the coin of the σ-first vertex of `T`.
//!
//! The run ends when `U ∪ T = ∅`, at which point `S = R`. An epoch opens
//! when a vertex enters an empty `U` and closes when `U` next empties; its
//! pushed vertices form one connected component of `G[R]`. A tails flip
//! on an empty stack opens no epoch.
//!
//! Coins are per-vertex: vertex `v` is in `R` iff the counter-generator
//! draw `v` under the run seed falls below the threshold of `p`. A vertex
//! is queried at most once, so consuming these lazily in query order is
//! distributionally the same as feeding the search a sequential Bernoulli
//! stream, and the same seed couples runs at different `p` monotonically.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::rng::{chacha, counter_u64, derive_seed, Probability};

/// Largest graph for which a full transition trace is retained.
pub const TRACE_MAX_N: usize = 10_000;

/// Replays up to this size re-check the frontier and path invariants from
/// scratch after every event; above it the checks are incremental.
pub const EXHAUSTIVE_AUDIT_MAX_N: usize = 2_000;

const SIGMA_STREAM: u64 = 0x5167_3a00;

/// Bernoulli(p) coins addressed by vertex, with a query-order log.
#[derive(Debug, Clone)]
pub struct CoinStream {
    p: Probability,
    seed: u64,
    consumed: u64,
    log: Option<Vec<bool>>,
}

impl CoinStream {
    pub fn new(p: Probability, seed: u64) -> Self {
        CoinStream { p, seed, consumed: 0, log: None }
    }

    /// Also retains every drawn bit, in draw order.
    pub fn logged(p: Probability, seed: u64) -> Self {
        CoinStream { log: Some(Vec::new()), ..CoinStream::new(p, seed) }
    }

    /// The coin of `vertex`, without consuming it.
    #[inline]
    pub fn peek(&self, vertex: usize) -> bool {
        self.p.heads(counter_u64(self.seed, vertex as u64))
    }

    #[inline]
    pub fn flip(&mut self, vertex: usize) -> bool {
        let heads = self.peek(vertex);
        self.consumed += 1;
        if let Some(log) = &mut self.log {
            log.push(heads);
        }
        heads
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn p(&self) -> Probability {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn log(&self) -> Option<&[bool]> {
        self.log.as_deref()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMode {
    /// σ is the identity on vertex ids.
    #[default]
    Identity,
    /// σ is a ChaCha8 shuffle seeded from the run seed.
    SeededPermutation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub sigma: SigmaMode,
    /// Retain every transition (ignored above [`TRACE_MAX_N`] vertices).
    pub trace: bool,
    /// Retain the coin outcomes in query order.
    pub log_coins: bool,
}

/// One round of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    /// A coin flip for `vertex`, queried from the top of `U` (`parent`) or
    /// as the σ-first vertex of `T` when `U` was empty.
    Flip { vertex: u32, parent: Option<u32>, heads: bool },
    /// `vertex` had no neighbor left in `T` and moved from `U` to `S`.
    Pop { vertex: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub component_id: usize,
    /// Sorted.
    pub vertices: Vec<usize>,
    /// 1-based index of the flip that opened the epoch.
    pub first_query: u64,
    /// Index of the last flip made inside the epoch.
    pub last_query: u64,
    pub max_stack: usize,
    /// The stack at the moment it first reached `max_stack`, bottom first.
    pub path_at_max: Vec<usize>,
}

impl EpochRecord {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub n: usize,
    pub d: usize,
    pub p: Probability,
    pub seed: u64,
    pub sigma_mode: SigmaMode,
    pub graph_fingerprint: u64,
    /// Final `S`, which equals `R`.
    pub r: VertexSet,
    pub epochs: Vec<EpochRecord>,
    pub total_queries: u64,
    pub largest_component: usize,
    pub second_component: usize,
    pub max_stack_global: usize,
    pub trace: Option<Vec<Event>>,
    pub coin_log: Option<Vec<bool>>,
}

impl RunReport {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            n: self.n,
            d: self.d,
            p: self.p.value(),
            seed: self.seed,
            sigma_mode: self.sigma_mode,
            total_queries: self.total_queries,
            r_size: self.r.len(),
            num_epochs: self.epochs.len(),
            largest_component: self.largest_component,
            second_component: self.second_component,
            max_stack_global: self.max_stack_global,
            epochs: self
                .epochs
                .iter()
                .map(|e| EpochSummary {
                    size: e.size(),
                    first_query: e.first_query,
                    last_query: e.last_query,
                    max_stack: e.max_stack,
                })
                .collect(),
        }
    }

    /// Epoch vertex sets, ordered by minimum vertex (the order
    /// [`Graph::connected_components`] uses).
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut parts: Vec<Vec<usize>> = self.epochs.iter().map(|e| e.vertices.clone()).collect();
        parts.sort_unstable_by_key(|p| p[0]);
        parts
    }

    /// The witness path of the deepest stack over the whole run.
    pub fn witness_path(&self) -> &[usize] {
        self.epochs
            .iter()
            .find(|e| e.max_stack == self.max_stack_global)
            .map(|e| e.path_at_max.as_slice())
            .unwrap_or(&[])
    }
}

/// Wire format of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub seed: u64,
    pub sigma_mode: SigmaMode,
    pub total_queries: u64,
    pub r_size: usize,
    pub num_epochs: usize,
    pub largest_component: usize,
    pub second_component: usize,
    pub max_stack_global: usize,
    pub epochs: Vec<EpochSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub size: usize,
    pub first_query: u64,
    pub last_query: u64,
    pub max_stack: usize,
}

/// The `(S, T, U, W)` partition plus the σ order and per-vertex scan cursors.
#[derive(Debug, Clone)]
pub struct ExplorationState {
    pub s: VertexSet,
    pub t: VertexSet,
    pub u: Vec<u32>,
    pub w: VertexSet,
    /// σ as a list: `sigma[i]` is the vertex of priority `i`.
    pub sigma: Vec<u32>,
    pub query_index: u64,
    cursors: Vec<u32>,
    next_root: usize,
}

#[derive(Debug, Default)]
struct OpenEpoch {
    vertices: Vec<usize>,
    first_query: u64,
    last_query: u64,
    max_stack: usize,
    best: Vec<u32>,
    /// `best[..valid] == stack[..valid]`.
    valid: usize,
}

/// A live run. Drive it with [`Exploration::step`] or
/// [`Exploration::run_until_queries`], then call [`Exploration::finish`].
#[derive(Debug)]
pub struct Exploration<'g> {
    graph: &'g Graph,
    coins: CoinStream,
    state: ExplorationState,
    sigma_mode: SigmaMode,
    /// Neighbor lists re-sorted by σ rank, aligned with the graph's offsets;
    /// `None` under the identity order.
    scan: Option<Vec<u32>>,
    epochs: Vec<EpochRecord>,
    open: Option<OpenEpoch>,
    trace: Option<Vec<Event>>,
}

impl<'g> Exploration<'g> {
    pub fn new(graph: &'g Graph, p: Probability, seed: u64, options: RunOptions) -> Self {
        let n = graph.n();
        let (sigma, scan) = match options.sigma {
            SigmaMode::Identity => ((0..n as u32).collect(), None),
            SigmaMode::SeededPermutation => {
                let mut order: Vec<u32> = (0..n as u32).collect();
                order.shuffle(&mut chacha(derive_seed(seed, &[SIGMA_STREAM])));
                let mut rank = vec![0u32; n];
                for (i, &v) in order.iter().enumerate() {
                    rank[v as usize] = i as u32;
                }
                let mut scan = Vec::with_capacity(2 * graph.edge_count());
                for v in 0..n {
                    let start = scan.len();
                    scan.extend_from_slice(graph.adj(v));
                    scan[start..].sort_unstable_by_key(|&x| rank[x as usize]);
                }
                (order, Some(scan))
            }
        };
        let coins = if options.log_coins || options.trace {
            CoinStream::logged(p, seed)
        } else {
            CoinStream::new(p, seed)
        };
        Exploration {
            graph,
            coins,
            state: ExplorationState {
                s: VertexSet::new(n),
                t: VertexSet::full(n),
                u: Vec::new(),
                w: VertexSet::new(n),
                sigma,
                query_index: 0,
                cursors: vec![0; n],
                next_root: 0,
            },
            sigma_mode: options.sigma,
            scan,
            epochs: Vec::new(),
            open: None,
            trace: (options.trace && n <= TRACE_MAX_N).then(Vec::new),
        }
    }

    pub fn state(&self) -> &ExplorationState {
        &self.state
    }

    pub fn queries(&self) -> u64 {
        self.coins.consumed()
    }

    pub fn is_finished(&self) -> bool {
        self.state.u.is_empty() && self.state.t.is_empty()
    }

    /// Epochs closed so far.
    pub fn epochs(&self) -> &[EpochRecord] {
        &self.epochs
    }

    #[inline]
    fn scan_list(&self, v: usize) -> &[u32] {
        match &self.scan {
            None => self.graph.adj(v),
            Some(scan) => &scan[self.graph.offset(v)..self.graph.offset(v) + self.graph.degree(v)],
        }
    }

    /// Executes one round. Returns `None` once `U ∪ T` is empty.
    pub fn step(&mut self) -> Option<Event> {
        let event = match self.state.u.last() {
            Some(&top) => {
                let top = top as usize;
                let mut cursor = self.state.cursors[top] as usize;
                let found = {
                    let list = self.scan_list(top);
                    while cursor < list.len() && !self.state.t.contains(list[cursor] as usize) {
                        cursor += 1;
                    }
                    list.get(cursor).map(|&x| x as usize)
                };
                self.state.cursors[top] = cursor as u32;
                match found {
                    Some(next) => self.query(next, Some(top)),
                    None => self.pop(),
                }
            }
            None => {
                let sigma = &self.state.sigma;
                let mut i = self.state.next_root;
                while i < sigma.len() && !self.state.t.contains(sigma[i] as usize) {
                    i += 1;
                }
                self.state.next_root = i;
                let root = *sigma.get(i)? as usize;
                self.query(root, None)
            }
        };
        if let Some(trace) = &mut self.trace {
            trace.push(event);
        }
        Some(event)
    }

    fn query(&mut self, vertex: usize, parent: Option<usize>) -> Event {
        self.state.t.remove(vertex);
        let heads = self.coins.flip(vertex);
        self.state.query_index = self.coins.consumed();
        let q = self.state.query_index;
        if let Some(open) = &mut self.open {
            open.last_query = q;
        }
        if heads {
            if self.state.u.is_empty() {
                self.open = Some(OpenEpoch {
                    first_query: q,
                    last_query: q,
                    ..OpenEpoch::default()
                });
            }
            self.state.u.push(vertex as u32);
            let stack = &self.state.u;
            let open = self.open.as_mut().expect("epoch open while stack is non-empty");
            open.vertices.push(vertex);
            if stack.len() > open.max_stack {
                open.best.truncate(open.valid);
                open.best.extend_from_slice(&stack[open.valid..]);
                open.valid = stack.len();
                open.max_stack = stack.len();
            }
        } else {
            self.state.w.insert(vertex);
        }
        Event::Flip {
            vertex: vertex as u32,
            parent: parent.map(|p| p as u32),
            heads,
        }
    }

    fn pop(&mut self) -> Event {
        let v = self.state.u.pop().expect("pop from empty stack") as usize;
        self.state.s.insert(v);
        let open = self.open.as_mut().expect("epoch open while stack is non-empty");
        open.valid = open.valid.min(self.state.u.len());
        if self.state.u.is_empty() {
            let mut open = self.open.take().expect("epoch open");
            open.vertices.sort_unstable();
            self.epochs.push(EpochRecord {
                component_id: self.epochs.len(),
                vertices: open.vertices,
                first_query: open.first_query,
                last_query: open.last_query,
                max_stack: open.max_stack,
                path_at_max: open.best.into_iter().map(|x| x as usize).collect(),
            });
        }
        Event::Pop { vertex: v as u32 }
    }

    /// Steps until `queries` flips have been made or the run ends; stops
    /// right after the flip that reaches the count.
    pub fn run_until_queries(&mut self, queries: u64) {
        while self.coins.consumed() < queries && self.step().is_some() {}
    }

    pub fn run_to_end(&mut self) {
        while self.step().is_some() {}
    }

    /// Runs to completion and assembles the report.
    pub fn finish(mut self) -> RunReport {
        self.run_to_end();
        let mut sizes: Vec<usize> = self.epochs.iter().map(EpochRecord::size).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let max_stack_global = self.epochs.iter().map(|e| e.max_stack).max().unwrap_or(0);
        RunReport {
            n: self.graph.n(),
            d: self.graph.degree_bound(),
            p: self.coins.p(),
            seed: self.coins.seed(),
            sigma_mode: self.sigma_mode,
            graph_fingerprint: self.graph.fingerprint(),
            r: self.state.s,
            epochs: self.epochs,
            total_queries: self.coins.consumed(),
            largest_component: sizes.first().copied().unwrap_or(0),
            second_component: sizes.get(1).copied().unwrap_or(0),
            max_stack_global,
            trace: self.trace,
            coin_log: self.coins.log,
        }
    }
}

/// Full percolation run with the identity σ.
pub fn run_dfs_percolation(g: &Graph, p: Probability, seed: u64, trace: bool) -> RunReport {
    run_dfs_percolation_with(
        g,
        p,
        seed,
        RunOptions {
            trace,
            ..RunOptions::default()
        },
    )
}

pub fn run_dfs_percolation_with(g: &Graph, p: Probability, seed: u64, options: RunOptions) -> RunReport {
    Exploration::new(g, p, seed, options).finish()
}

/// Samples `R` directly from the per-vertex coins, with no search, and
/// splits it into components. Shares coins with a DFS run of the same seed.
pub fn direct_sample_oracle(g: &Graph, p: Probability, seed: u64) -> (VertexSet, Vec<Vec<usize>>) {
    let coins = CoinStream::new(p, seed);
    let r = VertexSet::from_vertices(g.n(), (0..g.n()).filter(|&v| coins.peek(v)));
    let components = g.connected_components(&r);
    (r, components)
}

/// Certified lower bound on the vertex count of a longest path in `G[R]`,
/// with its witness.
pub fn longest_path_lower_bound(report: &RunReport) -> (usize, &[usize]) {
    (report.max_stack_global, report.witness_path())
}

pub fn validate_path(g: &Graph, path: &[usize]) -> Result<()> {
    let mut seen = VertexSet::new(g.n());
    for &v in path {
        if v >= g.n() {
            return Err(Error::input(format!("path vertex {v} out of range")));
        }
        if !seen.insert(v) {
            return Err(Error::input(format!("path repeats vertex {v}")));
        }
    }
    if let Some(w) = path.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
        return Err(Error::input(format!("path step ({}, {}) is not an edge", w[0], w[1])));
    }
    Ok(())
}

/// Closes a cycle from a path: looks for an edge between the first and the
/// last third of the path and returns the path segment it spans. The
/// cycle is listed along the path; its closing edge joins the last vertex
/// back to the first.
pub fn find_cycle_from_path(g: &Graph, path: &[usize], _lambda: f64) -> Result<Option<Vec<usize>>> {
    validate_path(g, path)?;
    let third = path.len() / 3;
    if third == 0 {
        return Ok(None);
    }
    let head = &path[..third];
    let tail = &path[path.len() - third..];
    let b = VertexSet::from_vertices(g.n(), head.iter().copied());
    let c = VertexSet::from_vertices(g.n(), tail.iter().copied());
    let Some((u, v)) = crate::spectral::edge_exists_between(g, &b, &c)? else {
        return Ok(None);
    };
    let i = path.iter().position(|&x| x == u).expect("u on path");
    let j = path.iter().position(|&x| x == v).expect("v on path");
    Ok(Some(path[i..=j].to_vec()))
}

/// Whether both path thirds exceed `λn/d`, which forces an edge between
/// them in an `(n, d, λ)`-graph.
pub fn cycle_guaranteed(g: &Graph, path_len: usize, lambda: f64) -> bool {
    let bound = lambda * g.n() as f64 / g.degree_bound().max(1) as f64;
    (path_len / 3) as f64 > bound
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index into the trace of the offending event (trace length for
    /// end-of-run checks).
    pub event: usize,
    pub invariant: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "event {}: {} ({})", self.event, self.invariant, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceAudit {
    pub events: usize,
    pub flips: u64,
    pub pops: u64,
    pub epochs: usize,
    /// Largest `flips_in_epoch / (k·d)` numerator-denominator pair seen at
    /// the k-th push of an epoch, as `(flips, k)`.
    pub tightest_window: Option<(u64, usize)>,
}

/// Replays a trace from scratch and checks every structural invariant of
/// the search: partition of `V`, the stack spans a path, no `S`–`T` edge,
/// at most one query per vertex, and the epoch query window (at the moment
/// the k-th vertex of an epoch is pushed, at most `k·d` flips were made
/// inside the epoch). Finally checks the replay against the report.
pub fn audit_trace(g: &Graph, report: &RunReport) -> Result<TraceAudit, Violation> {
    let trace = report.trace.as_deref().ok_or_else(|| Violation {
        event: 0,
        invariant: "trace",
        detail: "report carries no trace".into(),
    })?;
    let n = g.n();
    let d = g.degree_bound() as u64;
    let exhaustive = n <= EXHAUSTIVE_AUDIT_MAX_N;
    let mut s = VertexSet::new(n);
    let mut t = VertexSet::full(n);
    let mut w = VertexSet::new(n);
    let mut u: Vec<usize> = Vec::new();
    let mut in_u = VertexSet::new(n);
    let mut audit = TraceAudit::default();
    let mut epoch_start = 0u64;
    let mut epoch_pushes = 0usize;
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();

    let fail = |event: usize, invariant: &'static str, detail: String| Violation { event, invariant, detail };

    for (i, ev) in trace.iter().enumerate() {
        match *ev {
            Event::Flip { vertex, parent, heads } => {
                let x = vertex as usize;
                if !t.remove(x) {
                    return Err(fail(i, "single query", format!("vertex {x} queried while not in T")));
                }
                audit.flips += 1;
                match (parent, u.last()) {
                    (Some(pa), Some(&top)) if pa as usize == top => {
                        if !g.has_edge(top, x) {
                            return Err(fail(i, "path", format!("{x} queried from non-neighbor {top}")));
                        }
                    }
                    (None, None) => {}
                    _ => return Err(fail(i, "stack discipline", format!("query of {x} not from the top of U"))),
                }
                if heads {
                    if u.is_empty() {
                        epoch_start = audit.flips;
                        epoch_pushes = 0;
                    }
                    u.push(x);
                    in_u.insert(x);
                    current.push(x);
                    epoch_pushes += 1;
                    let window = audit.flips - epoch_start + 1;
                    if window > epoch_pushes as u64 * d {
                        return Err(fail(
                            i,
                            "query window",
                            format!("{window} flips by push {epoch_pushes} with d = {d}"),
                        ));
                    }
                    let tighter = match audit.tightest_window {
                        None => true,
                        Some((f, k)) => window * k as u64 > f * epoch_pushes as u64,
                    };
                    if tighter {
                        audit.tightest_window = Some((window, epoch_pushes));
                    }
                } else {
                    w.insert(x);
                }
            }
            Event::Pop { vertex } => {
                let x = vertex as usize;
                if u.last() != Some(&x) {
                    return Err(fail(i, "stack discipline", format!("pop of {x} which is not the top")));
                }
                if let Some(&y) = g.adj(x).iter().find(|&&y| t.contains(y as usize)) {
                    return Err(fail(i, "frontier", format!("{x} moved to S with neighbor {y} in T")));
                }
                u.pop();
                in_u.remove(x);
                s.insert(x);
                audit.pops += 1;
                if u.is_empty() {
                    current.sort_unstable();
                    parts.push(std::mem::take(&mut current));
                }
            }
        }

        let sizes = s.len() + u.len() + w.len() + t.len();
        let disjoint = s.is_disjoint(&t)
            && s.is_disjoint(&w)
            && w.is_disjoint(&t)
            && in_u.is_disjoint(&s)
            && in_u.is_disjoint(&t)
            && in_u.is_disjoint(&w)
            && in_u.len() == u.len();
        if sizes != n || !disjoint {
            return Err(fail(i, "partition", format!("|S|+|U|+|W|+|T| = {sizes}, n = {n}")));
        }
        if exhaustive {
            if let Some(pair) = u.windows(2).find(|p| !g.has_edge(p[0], p[1])) {
                return Err(fail(i, "path", format!("stack entries {} and {} not adjacent", pair[0], pair[1])));
            }
            for x in s.iter() {
                if let Some(&y) = g.adj(x).iter().find(|&&y| t.contains(y as usize)) {
                    return Err(fail(i, "frontier", format!("edge ({x}, {y}) between S and T")));
                }
            }
        }
    }

    let end = trace.len();
    if !t.is_empty() || !u.is_empty() {
        return Err(fail(end, "termination", "trace ends with U ∪ T non-empty".into()));
    }
    if audit.flips != (s.len() + w.len()) as u64 || audit.flips != report.total_queries {
        return Err(fail(
            end,
            "single query",
            format!("{} flips for |S| + |W| = {}", audit.flips, s.len() + w.len()),
        ));
    }
    if s != report.r {
        return Err(fail(end, "report", "replayed S differs from reported R".into()));
    }
    parts.sort_unstable_by_key(|p| p[0]);
    if parts != report.partition() {
        return Err(fail(end, "report", "replayed epochs differ from reported epochs".into()));
    }
    audit.events = trace.len();
    audit.epochs = parts.len();
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, cycle, disjoint_cliques, random_regular};

    fn prob(p: f64) -> Probability {
        Probability::new(p).unwrap()
    }

    #[test]
    fn complete_graph_at_p_one_stacks_a_hamilton_path() {
        let g = complete(5).unwrap();
        let r = run_dfs_percolation(&g, prob(1.0), 3, true);
        assert_eq!(r.epochs.len(), 1);
        assert_eq!(r.r.len(), 5);
        assert_eq!(r.max_stack_global, 5);
        let (len, path) = longest_path_lower_bound(&r);
        assert_eq!(len, 5);
        assert_eq!(path, &[0, 1, 2, 3, 4]);
        validate_path(&g, path).unwrap();
        audit_trace(&g, &r).unwrap();
    }

    #[test]
    fn p_zero_queries_every_vertex_once() {
        let g = cycle(9).unwrap();
        let r = run_dfs_percolation(&g, prob(0.0), 3, true);
        assert!(r.r.is_empty());
        assert!(r.epochs.is_empty());
        assert_eq!(r.total_queries, 9);
        assert_eq!(longest_path_lower_bound(&r).0, 0);
        assert!(r.coin_log.as_ref().unwrap().iter().all(|&b| !b));
        audit_trace(&g, &r).unwrap();
    }

    #[test]
    fn epochs_match_components_of_direct_sample() {
        let g = random_regular(200, 4, 9).unwrap();
        let p = prob(0.3);
        let report = run_dfs_percolation(&g, p, 11, true);
        let (r, components) = direct_sample_oracle(&g, p, 11);
        assert_eq!(report.r, r);
        assert_eq!(report.partition(), components);
        audit_trace(&g, &report).unwrap();
    }

    #[test]
    fn seeded_sigma_changes_order_not_outcome() {
        let g = random_regular(300, 5, 2).unwrap();
        let p = prob(0.35);
        let options = RunOptions { sigma: SigmaMode::SeededPermutation, trace: true, log_coins: false };
        let a = run_dfs_percolation_with(&g, p, 4, options);
        let b = run_dfs_percolation(&g, p, 4, false);
        assert_eq!(a.r, b.r);
        assert_eq!(a.partition(), b.partition());
        assert_ne!(a.trace.as_ref().unwrap(), &run_dfs_percolation(&g, p, 4, true).trace.unwrap());
        audit_trace(&g, &a).unwrap();
    }

    #[test]
    fn epoch_bookkeeping() {
        let g = disjoint_cliques(12, 3).unwrap();
        let r = run_dfs_percolation(&g, prob(1.0), 0, false);
        assert_eq!(r.epochs.len(), 3);
        assert_eq!(r.largest_component, 4);
        assert_eq!(r.second_component, 4);
        assert_eq!(r.epochs[1].first_query, 5);
        assert_eq!(r.epochs[1].last_query, 8);
        for e in &r.epochs {
            assert_eq!(e.path_at_max.len(), e.max_stack);
            assert!(e.max_stack <= e.size());
        }
        let summary = r.summary();
        assert_eq!(summary.r_size, 12);
        assert_eq!(summary.num_epochs, 3);
    }

    #[test]
    fn trace_respects_memory_guard() {
        let g = cycle(TRACE_MAX_N + 1).unwrap();
        let r = run_dfs_percolation(&g, prob(0.5), 1, true);
        assert!(r.trace.is_none());
        assert!(audit_trace(&g, &r).is_err());
    }

    #[test]
    fn paused_run_exposes_partition() {
        let g = random_regular(500, 6, 3).unwrap();
        let mut run = Exploration::new(&g, prob(0.25), 8, RunOptions::default());
        run.run_until_queries(100);
        assert_eq!(run.queries(), 100);
        let st = run.state();
        assert_eq!(st.s.len() + st.u.len() + st.w.len(), 100);
        assert_eq!(st.s.len() + st.u.len() + st.w.len() + st.t.len(), 500);
    }

    #[test]
    fn audit_detects_tampering() {
        let g = random_regular(60, 4, 1).unwrap();
        let mut r = run_dfs_percolation(&g, prob(0.5), 2, true);
        let trace = r.trace.as_mut().unwrap();
        let i = trace.iter().position(|e| matches!(e, Event::Flip { .. })).unwrap();
        let dup = trace[i];
        trace.insert(i + 1, dup);
        assert_eq!(audit_trace(&g, &r).unwrap_err().invariant, "single query");
    }

    #[test]
    fn cycle_from_path_examples() {
        let k4 = complete(4).unwrap();
        assert_eq!(find_cycle_from_path(&k4, &[0, 1, 2], 1.0).unwrap(), Some(vec![0, 1, 2]));
        let c10 = cycle(10).unwrap();
        assert_eq!(find_cycle_from_path(&c10, &[3, 4, 5], 2.0).unwrap(), None);
        assert!(find_cycle_from_path(&c10, &[3, 5], 2.0).is_err());
        assert!(find_cycle_from_path(&c10, &[3, 4, 3], 2.0).is_err());
        // cycle closing through the wrap-around edge
        let path: Vec<usize> = (0..10).collect();
        assert_eq!(find_cycle_from_path(&c10, &path, 2.0).unwrap(), Some(path.clone()));
    }

    #[test]
    fn summary_json_shape() {
        let g = complete(4).unwrap();
        let r = run_dfs_percolation(&g, prob(1.0), 5, false);
        let v = serde_json::to_value(r.summary()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        for k in [
            "n", "d", "p", "seed", "sigma_mode", "total_queries", "r_size", "num_epochs",
            "largest_component", "second_component", "max_stack_global", "epochs",
        ] {
            assert!(keys.contains(&k), "missing {k}");
        }
        assert_eq!(keys.len(), 12);
        assert_eq!(v["sigma_mode"], "identity");
        assert_eq!(
            v["epochs"][0],
            serde_json::json!({"size": 4, "first_query": 1, "last_query": 4, "max_stack": 4})
        );
    }
}
