//! Immutable simple graphs in compressed adjacency form, dense vertex sets,
//! and the set-level counts `e(B, C)`, `N(S)` and `e(U)`.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::rng::mix64;

/// Dense bit-indexed subset of `[0, n)` with a cached cardinality.
#[derive(Clone, PartialEq, Eq)]
pub struct VertexSet {
    words: Vec<u64>,
    universe: usize,
    len: usize,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        VertexSet {
            words: vec![0; universe.div_ceil(64)],
            universe,
            len: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = VertexSet::new(universe);
        for w in set.words.iter_mut() {
            *w = u64::MAX;
        }
        if !universe.is_multiple_of(64) {
            if let Some(last) = set.words.last_mut() {
                *last = (1u64 << (universe % 64)) - 1;
            }
        }
        set.len = universe;
        set
    }

    /// Panics if a vertex is out of range.
    pub fn from_vertices(universe: usize, vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = VertexSet::new(universe);
        for v in vertices {
            set.insert(v);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && self.words[v / 64] & (1u64 << (v % 64)) != 0
    }

    /// Returns true if `v` was not already present.
    #[inline]
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.universe, "vertex {v} outside universe {}", self.universe);
        let word = &mut self.words[v / 64];
        let bit = 1u64 << (v % 64);
        let fresh = *word & bit == 0;
        *word |= bit;
        self.len += fresh as usize;
        fresh
    }

    /// Returns true if `v` was present.
    #[inline]
    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.universe {
            return false;
        }
        let word = &mut self.words[v / 64];
        let bit = 1u64 << (v % 64);
        let present = *word & bit != 0;
        *word &= !bit;
        self.len -= present as usize;
        present
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + bit)
            })
        })
    }

    pub fn complement(&self) -> VertexSet {
        let mut out = VertexSet::full(self.universe);
        for (o, w) in out.words.iter_mut().zip(&self.words) {
            *o &= !w;
        }
        out.len = self.universe - self.len;
        out
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Recounts the cardinality from the bits.
    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An immutable simple undirected graph. Neighbor lists are sorted
/// ascending, which fixes the scan order of every traversal.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    degree_bound: usize,
    regular: bool,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("edges", &self.edge_count())
            .field("degree_bound", &self.degree_bound)
            .field("regular", &self.regular)
            .finish()
    }
}

impl Graph {
    /// Builds a graph from undirected edges. Rejects loops, repeated edges
    /// and out-of-range endpoints. The degree bound is the maximum degree.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        if n > u32::MAX as usize {
            return Err(Error::input(format!("{n} vertices exceed the u32 id range")));
        }
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at vertex {u}")));
            }
            lists[u].push(v as u32);
            lists[v].push(u as u32);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for (u, mut list) in lists.into_iter().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::input(format!("repeated edge ({u}, {})", w[0])));
            }
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        let degree_bound = (0..n).map(|v| offsets[v + 1] - offsets[v]).max().unwrap_or(0);
        let regular = (0..n).all(|v| offsets[v + 1] - offsets[v] == degree_bound);
        Ok(Graph {
            offsets,
            targets,
            degree_bound,
            regular,
        })
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> Result<&[u32]> {
        if v >= self.n() {
            return Err(Error::input(format!("vertex {v} out of range for n = {}", self.n())));
        }
        Ok(self.adj(v))
    }

    /// Start of `v`'s slice in the flat neighbor array.
    #[inline]
    pub(crate) fn offset(&self, v: usize) -> usize {
        self.offsets[v]
    }

    /// Unchecked-range variant of [`Graph::neighbors`]; panics on a bad id.
    #[inline]
    pub fn adj(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.adj(u).binary_search(&(v as u32)).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.adj(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Number of neighbors of `v` inside `set`.
    #[inline]
    pub fn degree_into(&self, v: usize, set: &VertexSet) -> usize {
        self.adj(v).iter().filter(|&&u| set.contains(u as usize)).count()
    }

    /// `e(B, C)`: ordered pairs `(u, v)` with `u ∈ B`, `v ∈ C` and `uv ∈ E`.
    /// Overlap is allowed; for `B = C` this is twice the internal edge count.
    pub fn ordered_pair_edge_count(&self, b: &VertexSet, c: &VertexSet) -> u64 {
        let (outer, inner) = if b.len() <= c.len() { (b, c) } else { (c, b) };
        outer.iter().map(|u| self.degree_into(u, inner) as u64).sum()
    }

    /// `N(S)`: vertices outside `S` with at least one neighbor in `S`.
    pub fn external_neighborhood(&self, s: &VertexSet) -> VertexSet {
        let mut out = VertexSet::new(self.n());
        for u in s.iter() {
            for &v in self.adj(u) {
                if !s.contains(v as usize) {
                    out.insert(v as usize);
                }
            }
        }
        out
    }

    /// `e(U)`: unordered edges with both endpoints in `U`.
    pub fn internal_edge_count(&self, u: &VertexSet) -> u64 {
        u.iter()
            .map(|x| {
                self.adj(x)
                    .iter()
                    .filter(|&&y| (y as usize) > x && u.contains(y as usize))
                    .count() as u64
            })
            .sum()
    }

    /// Connected components of `G[active]`, each sorted, listed by minimum vertex.
    pub fn connected_components(&self, active: &VertexSet) -> Vec<Vec<usize>> {
        let mut seen = VertexSet::new(self.n());
        let mut components = Vec::new();
        let mut stack = Vec::new();
        for root in active.iter() {
            if !seen.insert(root) {
                continue;
            }
            let mut component = vec![root];
            stack.push(root);
            while let Some(x) = stack.pop() {
                for &y in self.adj(x) {
                    let y = y as usize;
                    if active.contains(y) && seen.insert(y) {
                        component.push(y);
                        stack.push(y);
                    }
                }
            }
            component.sort_unstable();
            components.push(component);
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.connected_components(&VertexSet::full(self.n())).len() == 1
    }

    /// Re-checks the structural invariants: symmetry, no loops, no repeats,
    /// sorted lists, and regularity when flagged.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for u in 0..n {
            let list = self.adj(u);
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input(format!("neighbors of {u} not strictly ascending")));
            }
            for &v in list {
                let v = v as usize;
                if v == u {
                    return Err(Error::input(format!("self-loop at {u}")));
                }
                if !self.has_edge(v, u) {
                    return Err(Error::input(format!("edge ({u}, {v}) is not symmetric")));
                }
            }
            if list.len() > self.degree_bound || (self.regular && list.len() != self.degree_bound) {
                return Err(Error::input(format!("vertex {u} violates the degree bound")));
            }
        }
        Ok(())
    }

    /// Stable 64-bit fingerprint of the adjacency structure.
    pub fn fingerprint(&self) -> u64 {
        let mut h = mix64(self.n() as u64);
        for (u, v) in self.edges() {
            h = mix64(h ^ ((u as u64) << 32 | v as u64));
        }
        h
    }

    /// Writes the edge-list format: a header `n d`, then one `u v` line per
    /// edge with `u < v`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.n(), self.degree_bound)?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph> {
        let mut lines = input.lines().enumerate();
        let (n, d) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing `n d` header".into(),
                });
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (n, d) = parse_pair(&line).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `n d`, found {line:?}"),
            })?;
            break (n, d);
        };
        let mut edges = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (u, v) = parse_pair(&line).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `u v`, found {line:?}"),
            })?;
            if u >= v {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("edge endpoints must satisfy u < v, found {u} {v}"),
                });
            }
            edges.push((u, v));
        }
        let mut g = Graph::from_edges(n, edges)?;
        if g.degree_bound > d {
            return Err(Error::input(format!(
                "header declares d = {d} but a vertex has degree {}",
                g.degree_bound
            )));
        }
        g.regular = (0..n).all(|v| g.degree(v) == d);
        g.degree_bound = d;
        Ok(g)
    }
}

fn parse_pair(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    it.next().is_none().then_some((a, b))
}
