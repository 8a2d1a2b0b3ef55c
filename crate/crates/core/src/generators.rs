//! Seeded constructions of the graph families used in experiments.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::chacha;

/// Whole-pairing restarts allowed before random regular generation fails.
pub const MAX_PAIRING_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RandomRegular,
    Hypercube,
    Cycle,
    Complete,
    Circulant,
    DisjointCliques,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RandomRegular => "random-regular",
            Family::Hypercube => "hypercube",
            Family::Cycle => "cycle",
            Family::Complete => "complete",
            Family::Circulant => "circulant",
            Family::DisjointCliques => "disjoint-cliques",
        }
    }
}

/// JSON-serializable recipe for a graph. For `hypercube`, `d` is the
/// dimension and `n` must be `2^d`; for the other deterministic families
/// `n` and `d` must agree with the construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub offsets: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn random_regular(n: usize, d: usize, seed: u64) -> Self {
        GeneratorSpec { family: Family::RandomRegular, n, d, offsets: Vec::new(), seed }
    }

    pub fn build(&self) -> Result<Graph> {
        let g = match self.family {
            Family::RandomRegular => random_regular(self.n, self.d, self.seed)?,
            Family::Hypercube => {
                let g = hypercube(self.d)?;
                if g.n() != self.n {
                    return Err(Error::input(format!(
                        "hypercube of dimension {} has {} vertices, spec says {}",
                        self.d,
                        g.n(),
                        self.n
                    )));
                }
                g
            }
            Family::Cycle => cycle(self.n)?,
            Family::Complete => complete(self.n)?,
            Family::Circulant => circulant(self.n, &self.offsets)?,
            Family::DisjointCliques => disjoint_cliques(self.n, self.d)?,
        };
        if g.degree_bound() != self.d {
            return Err(Error::input(format!(
                "{} on {} vertices has degree {}, spec says {}",
                self.family.name(),
                self.n,
                g.degree_bound(),
                self.d
            )));
        }
        Ok(g)
    }
}

/// How the configuration model turns a stub pairing into a simple graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingMode {
    /// Discard any pairing with a loop or repeated edge and draw a fresh one.
    /// Exactly uniform over simple d-regular graphs; the acceptance rate is
    /// about `exp(-(d^2 - 1)/4)`.
    Rejection,
    /// Keep the pairing and remove each loop or repeated edge by a random
    /// double-edge swap with a good edge. Approximately uniform.
    Repair,
    /// `Rejection` for `d <= 4`, `Repair` above.
    Auto,
}

impl PairingMode {
    fn resolve(self, d: usize) -> PairingMode {
        match self {
            PairingMode::Auto if d <= 4 => PairingMode::Rejection,
            PairingMode::Auto => PairingMode::Repair,
            other => other,
        }
    }
}

/// Random d-regular graph on `n` vertices via the configuration model.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    random_regular_with(n, d, seed, PairingMode::Auto)
}

pub fn random_regular_with(n: usize, d: usize, seed: u64, mode: PairingMode) -> Result<Graph> {
    if d < 3 || d >= n {
        return Err(Error::input(format!("random regular needs 3 <= d < n, got n={n}, d={d}")));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::input(format!("n*d must be even, got n={n}, d={d}")));
    }
    let mut rng = chacha(seed);
    if 2 * d > n - 1 {
        // complement of a uniform (n-1-d)-regular graph is uniform d-regular,
        // and the sparse side never gets stuck in the repair
        let absent: HashSet<u64> = pairing_edges(n, n - 1 - d, &mut rng, mode)?
            .into_iter()
            .map(|(u, v)| edge_key(u, v))
            .collect();
        let edges = (0..n as u32)
            .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
            .filter(|&(u, v)| !absent.contains(&edge_key(u, v)));
        return Graph::from_edges(n, edges.map(|(u, v)| (u as usize, v as usize)));
    }
    let edges = pairing_edges(n, d, &mut rng, mode)?;
    Graph::from_edges(n, edges.into_iter().map(|(u, v)| (u as usize, v as usize)))
}

/// Edges of a simple d-regular graph from the configuration model
/// (`n*d` even, `d < n`).
fn pairing_edges<R: Rng>(n: usize, d: usize, rng: &mut R, mode: PairingMode) -> Result<Vec<(u32, u32)>> {
    let mut stubs: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, d))
        .collect();
    let resolved = mode.resolve(d);
    let mut seen = HashSet::with_capacity(n * d / 2);
    for _ in 0..MAX_PAIRING_ATTEMPTS {
        stubs.shuffle(rng);
        if resolved == PairingMode::Repair {
            if let Some(edges) = repair_pairing(&stubs, rng) {
                return Ok(edges);
            }
            continue;
        }
        seen.clear();
        let simple = stubs
            .chunks_exact(2)
            .all(|pair| pair[0] != pair[1] && seen.insert(edge_key(pair[0], pair[1])));
        if simple {
            return Ok(stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect());
        }
    }
    Err(Error::Generation { n, d, attempts: MAX_PAIRING_ATTEMPTS })
}

#[inline]
fn edge_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    (a as u64) << 32 | b as u64
}

/// Turns a stub pairing into a simple edge list by double-edge swaps.
/// Returns `None` if the swap budget runs out.
fn repair_pairing<R: Rng>(stubs: &[u32], rng: &mut R) -> Option<Vec<(u32, u32)>> {
    let mut present = HashSet::with_capacity(stubs.len() / 2);
    let mut good = Vec::with_capacity(stubs.len() / 2);
    let mut bad = Vec::new();
    for p in stubs.chunks_exact(2) {
        if p[0] != p[1] && present.insert(edge_key(p[0], p[1])) {
            good.push((p[0], p[1]));
        } else {
            bad.push((p[0], p[1]));
        }
    }
    let mut budget = 1_000_000 + 1000 * bad.len();
    for (a, b) in bad {
        loop {
            if good.is_empty() || budget == 0 {
                return None;
            }
            budget -= 1;
            let j = rng.gen_range(0..good.len());
            let (mut c, mut e) = good[j];
            if rng.gen::<bool>() {
                std::mem::swap(&mut c, &mut e);
            }
            // (a,b) + (c,e) -> (a,c) + (b,e)
            if a == c || b == e {
                continue;
            }
            let k1 = edge_key(a, c);
            let k2 = edge_key(b, e);
            if k1 == k2 || present.contains(&k1) || present.contains(&k2) {
                continue;
            }
            present.remove(&edge_key(c, e));
            present.insert(k1);
            present.insert(k2);
            good[j] = (a, c);
            good.push((b, e));
            break;
        }
    }
    Some(good)
}

/// `Q^dim`: vertex index is the bitstring, edges join Hamming neighbors.
pub fn hypercube(dim: usize) -> Result<Graph> {
    if !(1..=24).contains(&dim) {
        return Err(Error::input(format!("hypercube dimension {dim} outside [1, 24]")));
    }
    let n = 1usize << dim;
    let edges = (0..n).flat_map(move |v| {
        (0..dim)
            .map(move |b| v ^ (1 << b))
            .filter(move |&u| v < u)
            .map(move |u| (v, u))
    });
    Graph::from_edges(n, edges)
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::input(format!("cycle needs n >= 3, got {n}")));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::input(format!("complete graph needs n >= 2, got {n}")));
    }
    Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

/// Vertex `i` adjacent to `i ± s (mod n)` for each offset `s`.
pub fn circulant(n: usize, offsets: &[usize]) -> Result<Graph> {
    if n < 3 {
        return Err(Error::input(format!("circulant needs n >= 3, got {n}")));
    }
    if offsets.is_empty() {
        return Err(Error::input("circulant needs at least one offset"));
    }
    let mut sorted = offsets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != offsets.len() {
        return Err(Error::input("circulant offsets must be distinct"));
    }
    if let Some(&s) = sorted.iter().find(|&&s| s == 0 || 2 * s > n) {
        return Err(Error::input(format!("circulant offset {s} outside [1, n/2]")));
    }
    let edges = sorted.into_iter().flat_map(move |s| {
        // i + n/2 and i - n/2 coincide; emit that chord once per pair
        let count = if 2 * s == n { n / 2 } else { n };
        (0..count).map(move |i| (i, (i + s) % n))
    });
    Graph::from_edges(n, edges)
}

/// `n / (d + 1)` disjoint copies of `K_{d+1}` on consecutive id blocks.
pub fn disjoint_cliques(n: usize, d: usize) -> Result<Graph> {
    let k = d + 1;
    if n == 0 || !n.is_multiple_of(k) {
        return Err(Error::input(format!("d + 1 = {k} must divide n = {n}")));
    }
    let edges = (0..n / k).flat_map(move |c| {
        let base = c * k;
        (0..k).flat_map(move |i| (i + 1..k).map(move |j| (base + i, base + j)))
    });
    Graph::from_edges(n, edges)
}
