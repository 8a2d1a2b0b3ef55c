//! Threshold formulas and checkers for the phase-transition statements, plus
//! the expansion predicates behind the supercritical argument.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exploration::{Event, Exploration, RunOptions};
use crate::graph::{Graph, VertexSet};
use crate::rng::Probability;

/// Largest `C(n, m)` that [`enumerate_non_expanding`] will walk.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Subcritical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub epsilon: f64,
    pub n: usize,
    pub d: usize,
    pub side: Side,
}

impl ThresholdParams {
    pub fn new(epsilon: f64, n: usize, d: usize, side: Side) -> Result<Self> {
        check_epsilon(epsilon)?;
        let params = ThresholdParams { epsilon, n, d, side };
        params.p()?;
        Ok(params)
    }

    /// `(1 − ε)/d` or `(1 + ε)/d`.
    pub fn p(&self) -> Result<Probability> {
        let delta = match self.side {
            Side::Subcritical => -self.epsilon,
            Side::Supercritical => self.epsilon,
        };
        let p = Probability::around_critical(self.d, delta)?;
        if p.value() <= 0.0 || p.value() >= 1.0 {
            return Err(Error::input(format!("p = {} not inside (0, 1)", p.value())));
        }
        Ok(p)
    }
}

/// Parameters of the non-expanding set predicate. The derived `alpha` is
/// exposed separately; its default is `sqrt(alpha0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub alpha0: f64,
    pub c: f64,
    pub n: usize,
    pub d: usize,
}

impl ExpansionParams {
    pub fn new(alpha0: f64, c: f64, n: usize, d: usize) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0 <= 0.5) {
            return Err(Error::input(format!("alpha0 must lie in (0, 1/2], got {alpha0}")));
        }
        if !(c > 0.0 && c <= 1.0 / 3.0) {
            return Err(Error::input(format!("c must lie in (0, 1/3], got {c}")));
        }
        if d == 0 {
            return Err(Error::input("degree must be positive"));
        }
        Ok(ExpansionParams { alpha0, c, n, d })
    }

    /// `⌈c n / d⌉`
    pub fn m_low(&self) -> usize {
        ceil_tolerant(self.c * self.n as f64 / self.d as f64)
    }

    /// `⌊n / (3d)⌋`
    pub fn m_high(&self) -> usize {
        self.n / (3 * self.d)
    }

    pub fn is_vacuous(&self) -> bool {
        self.m_low() > self.m_high()
    }

    /// Solves `1 − α₀ = 1 − α²`.
    pub fn alpha(&self) -> f64 {
        self.alpha0.sqrt()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::input(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// Ceiling that ignores representation noise just above an integer
/// (`0.3 * 1e5 / 100` must round to 300, not 301).
fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// `⌈(4/ε²) ln n⌉`: components at `p = (1 − ε)/d` stay below this whp.
/// Accepts `ε = 1` (the formula is still defined there).
pub fn subcritical_component_bound(n: usize, epsilon: f64) -> Result<usize> {
    if epsilon != 1.0 {
        check_epsilon(epsilon)?;
    }
    if n < 2 {
        return Err(Error::input(format!("need n >= 2, got {n}")));
    }
    Ok(ceil_tolerant(4.0 / (epsilon * epsilon) * (n as f64).ln()))
}

/// True iff the largest component is below the subcritical bound.
pub fn check_subcritical(n: usize, largest_component: usize, epsilon: f64) -> Result<bool> {
    Ok(largest_component < subcritical_component_bound(n, epsilon)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupercriticalTargets {
    /// `⌈ε n / d⌉`
    pub giant_min: usize,
    /// `⌈ε² n / (5d)⌉`
    pub path_min: usize,
}

impl SupercriticalTargets {
    pub fn met_by(&self, largest_component: usize, max_stack: usize) -> bool {
        largest_component >= self.giant_min && max_stack >= self.path_min
    }
}

pub fn supercritical_targets(n: usize, d: usize, epsilon: f64) -> Result<SupercriticalTargets> {
    check_epsilon(epsilon)?;
    if d == 0 {
        return Err(Error::input("degree must be positive"));
    }
    let (n, d) = (n as f64, d as f64);
    Ok(SupercriticalTargets {
        giant_min: ceil_tolerant(epsilon * n / d),
        path_min: ceil_tolerant(epsilon * epsilon * n / (5.0 * d)),
    })
}

/// `(1 − α₀)(dm − d²m²/(2n))`
pub fn expansion_threshold(n: usize, d: usize, m: usize, alpha0: f64) -> f64 {
    let (n, d, m) = (n as f64, d as f64, m as f64);
    (1.0 - alpha0) * (d * m - d * d * m * m / (2.0 * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionVerdict {
    /// True when the set is non-expanding.
    pub verdict: bool,
    pub lhs: usize,
    pub rhs: f64,
}

/// `S` is non-expanding iff `|N(S)| < (1 − α₀)(dm − d²m²/(2n))`, `m = |S|`.
pub fn is_non_expanding(g: &Graph, s: &VertexSet, alpha0: f64) -> Result<ExpansionVerdict> {
    if s.is_empty() {
        return Err(Error::input("non-expanding predicate needs a non-empty set"));
    }
    let lhs = g.external_neighborhood(s).len();
    let rhs = expansion_threshold(g.n(), g.degree_bound(), s.len(), alpha0);
    Ok(ExpansionVerdict {
        verdict: (lhs as f64) < rhs,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationCount {
    pub total: u64,
    pub non_expanding: u64,
}

pub fn binomial(n: usize, m: usize) -> u128 {
    if m > n {
        return 0;
    }
    let m = m.min(n - m);
    // saturates instead of overflowing
    (0..m).fold(1u128, |acc, i| {
        acc.checked_mul((n - i) as u128)
            .map_or(u128::MAX, |x| x / (i + 1) as u128)
    })
}

/// Walks every `m`-subset and counts the non-expanding ones. Work is split
/// by the smallest element of the subset.
pub fn enumerate_non_expanding(g: &Graph, m: usize, alpha0: f64) -> Result<EnumerationCount> {
    let total = check_enumerable(g.n(), m)?;
    let non_expanding: u64 = (0..=g.n() - m)
        .into_par_iter()
        .map(|first| {
            let mut count = 0u64;
            scan_subsets(g, first, m, alpha0, |_| count += 1);
            count
        })
        .sum();
    Ok(EnumerationCount {
        total: total as u64,
        non_expanding,
    })
}

/// The non-expanding `m`-subsets themselves, in lexicographic order.
pub fn list_non_expanding(g: &Graph, m: usize, alpha0: f64) -> Result<Vec<Vec<usize>>> {
    check_enumerable(g.n(), m)?;
    let per_first: Vec<Vec<Vec<usize>>> = (0..=g.n() - m)
        .into_par_iter()
        .map(|first| {
            let mut found = Vec::new();
            scan_subsets(g, first, m, alpha0, |s| found.push(s.to_vec()));
            found
        })
        .collect();
    Ok(per_first.into_iter().flatten().collect())
}

fn check_enumerable(n: usize, m: usize) -> Result<u128> {
    if m == 0 || m > n {
        return Err(Error::input(format!("subset size m = {m} outside [1, {n}]")));
    }
    let total = binomial(n, m);
    if total > ENUMERATION_LIMIT {
        return Err(Error::input(format!(
            "C({n}, {m}) = {total} exceeds the enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    Ok(total)
}

/// Calls `hit` on every non-expanding `m`-subset whose smallest element is
/// `first`.
fn scan_subsets(g: &Graph, first: usize, m: usize, alpha0: f64, mut hit: impl FnMut(&[usize])) {
    let n = g.n();
    let rhs = expansion_threshold(n, g.degree_bound(), m, alpha0);
    let mut stamp = vec![0u64; n];
    let mut generation = 0u64;
    let mut subset: Vec<usize> = (first..first + m).collect();
    loop {
        generation += 1;
        for &v in &subset {
            stamp[v] = generation;
        }
        let mut boundary = 0usize;
        for &v in &subset {
            for &x in g.adj(v) {
                let x = x as usize;
                if stamp[x] != generation {
                    stamp[x] = generation;
                    boundary += 1;
                }
            }
        }
        if (boundary as f64) < rhs {
            hit(&subset);
        }
        if !next_combination_tail(&mut subset, n) {
            break;
        }
    }
}

/// Advances the sorted subset to the next combination while keeping
/// `subset[0]` fixed. Returns false when exhausted.
fn next_combination_tail(subset: &mut [usize], n: usize) -> bool {
    let m = subset.len();
    let mut i = m;
    while i > 1 {
        i -= 1;
        if subset[i] < n - (m - i) {
            subset[i] += 1;
            for j in i + 1..m {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Counts bad positions of a vertex sequence: `v_i` is bad when it has at
/// most `(1 − α)(d/n)(n − (d+1)(i−1))` neighbors outside `S_{i−1} ∪ N(S_{i−1})`.
pub fn bad_vertex_count(g: &Graph, prefix: &[usize], alpha: f64) -> Result<usize> {
    let n = g.n();
    let d = g.degree_bound() as f64;
    let mut closure = VertexSet::new(n);
    let mut seen = VertexSet::new(n);
    let mut bad = 0;
    for (idx, &v) in prefix.iter().enumerate() {
        if v >= n {
            return Err(Error::input(format!("prefix vertex {v} out of range")));
        }
        if !seen.insert(v) {
            return Err(Error::input(format!("prefix repeats vertex {v}")));
        }
        let outside = g.adj(v).iter().filter(|&&x| !closure.contains(x as usize)).count();
        let threshold = (1.0 - alpha) * d / n as f64 * (n as f64 - (d + 1.0) * idx as f64);
        if outside as f64 <= threshold {
            bad += 1;
        }
        closure.insert(v);
        for &x in g.adj(v) {
            closure.insert(x as usize);
        }
    }
    Ok(bad)
}

/// Outcome of the Bernoulli-stream properties; `None` for properties that
/// belong to the other side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamProperties {
    /// (1) no window of length `kd` holds `k` or more ones.
    pub sparse_windows: Option<bool>,
    /// (2) the prefix of length `ε³n` has at most `2ε³n/d` ones.
    pub short_prefix_bounded: Option<bool>,
    /// (3) the prefix of length `εn` has at most `2εn/d` ones.
    pub long_prefix_bounded: Option<bool>,
    /// (4) every prefix of length `t ∈ [ε³n, εn]` has at least `(1 + 3ε/4)t/d` ones.
    pub prefixes_grow: Option<bool>,
}

impl StreamProperties {
    pub fn all_hold(&self) -> bool {
        [
            self.sparse_windows,
            self.short_prefix_bounded,
            self.long_prefix_bounded,
            self.prefixes_grow,
        ]
        .iter()
        .all(|p| p.unwrap_or(true))
    }
}

/// Most ones in any window of `len` consecutive bits (whole sequence if shorter).
pub fn max_window_ones(bits: &[bool], len: usize) -> usize {
    let len = len.min(bits.len());
    let mut count = bits[..len].iter().filter(|&&b| b).count();
    let mut best = count;
    for i in len..bits.len() {
        count += bits[i] as usize;
        count -= bits[i - len] as usize;
        best = best.max(count);
    }
    best
}

pub fn stream_properties(bits: &[bool], epsilon: f64, d: usize, n: usize, side: Side) -> Result<StreamProperties> {
    check_epsilon(epsilon)?;
    if d == 0 {
        return Err(Error::input("degree must be positive"));
    }
    match side {
        Side::Subcritical => {
            if bits.len() < n {
                return Err(Error::input(format!("need {n} bits, got {}", bits.len())));
            }
            let k = subcritical_component_bound(n, epsilon)?;
            let ones = max_window_ones(&bits[..n], k * d);
            Ok(StreamProperties {
                sparse_windows: Some(ones < k),
                ..StreamProperties::default()
            })
        }
        Side::Supercritical => {
            let nf = n as f64;
            let short = ((epsilon.powi(3) * nf).floor() as usize).max(1);
            let long = (epsilon * nf).floor() as usize;
            if bits.len() < long || long < short {
                return Err(Error::input(format!(
                    "need at least {long} bits (and εn >= ε³n >= 1), got {}",
                    bits.len()
                )));
            }
            let df = d as f64;
            let mut ones = 0usize;
            let mut grows = true;
            let mut at_short = 0;
            for (i, &b) in bits[..long].iter().enumerate() {
                ones += b as usize;
                let t = i + 1;
                if t == short {
                    at_short = ones;
                }
                if t >= short && (ones as f64) < (1.0 + 0.75 * epsilon) * t as f64 / df {
                    grows = false;
                }
            }
            Ok(StreamProperties {
                short_prefix_bounded: Some(at_short as f64 <= 2.0 * epsilon.powi(3) * nf / df),
                long_prefix_bounded: Some(ones as f64 <= 2.0 * epsilon * nf / df),
                prefixes_grow: Some(grows),
                ..StreamProperties::default()
            })
        }
    }
}

/// State of a run paused right after a given number of coin flips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PausedRun {
    pub queries: u64,
    pub explored_or_revealed: usize,
    pub stack: usize,
    /// `N(S) ⊆ U ∪ W` at the pause.
    pub neighborhood_covered: bool,
}

impl PausedRun {
    pub fn consistent(&self) -> bool {
        self.explored_or_revealed as u64 == self.queries && self.neighborhood_covered
    }
}

/// Runs the search for `queries` flips and inspects `S ∪ U ∪ W` and `N(S)`.
pub fn pause_after_queries(g: &Graph, p: Probability, seed: u64, queries: u64) -> PausedRun {
    let mut run = Exploration::new(g, p, seed, RunOptions::default());
    run.run_until_queries(queries);
    let st = run.state();
    let mut covered = VertexSet::from_vertices(g.n(), st.u.iter().map(|&x| x as usize));
    for x in st.w.iter() {
        covered.insert(x);
    }
    PausedRun {
        queries: run.queries(),
        explored_or_revealed: st.s.len() + st.u.len() + st.w.len(),
        stack: st.u.len(),
        neighborhood_covered: g.external_neighborhood(&st.s).is_subset(&covered),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackWindow {
    /// `U` was non-empty whenever the flip count was inside the window.
    pub nonempty_throughout: bool,
    /// Heads among flips `lo..=hi`.
    pub heads_in_window: usize,
    /// Size of the epoch that was open at flip `lo`, if any.
    pub spanning_epoch: Option<usize>,
}

impl StackWindow {
    /// When the stack never empties, the open epoch holds every vertex
    /// pushed in the window.
    pub fn consistent(&self) -> bool {
        !self.nonempty_throughout || self.spanning_epoch.is_some_and(|s| s >= self.heads_in_window)
    }
}

/// Watches the stack over the flip-index window `[lo, hi]`.
pub fn stack_window(g: &Graph, p: Probability, seed: u64, lo: u64, hi: u64) -> StackWindow {
    let mut run = Exploration::new(g, p, seed, RunOptions::default());
    let mut nonempty = true;
    let mut heads = 0;
    let mut epoch_at_lo = None;
    while let Some(ev) = run.step() {
        let q = run.queries();
        if let Event::Flip { heads: true, .. } = ev {
            if (lo..=hi).contains(&q) {
                heads += 1;
            }
        }
        if q == lo && matches!(ev, Event::Flip { .. }) {
            epoch_at_lo = (!run.state().u.is_empty()).then(|| run.epochs().len());
        }
        if (lo..=hi).contains(&q) && run.state().u.is_empty() {
            nonempty = false;
        }
        if q > hi {
            break;
        }
    }
    let report = run.finish();
    StackWindow {
        nonempty_throughout: nonempty,
        heads_in_window: heads,
        spanning_epoch: epoch_at_lo.and_then(|i| report.epochs.get(i)).map(|e| e.size()),
    }
}
