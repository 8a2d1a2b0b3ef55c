//! Second-eigenvalue estimation and the spectral inequalities built on it.
//!
//! `lambda` is `max(|λ₂|, |λₙ|)` of the adjacency matrix. Graphs up to
//! [`FULL_EIGENSOLVE_MAX_N`] vertices get a dense symmetric eigensolve;
//! larger ones run Lanczos on the adjacency operator restricted to the
//! complement of the all-ones vector, which is the top eigenvector of every
//! connected regular graph.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::rng::chacha;

pub const FULL_EIGENSOLVE_MAX_N: usize = 4096;

/// Lanczos iteration cap.
pub const MAX_LANCZOS_ITERATIONS: usize = 5000;

const LANCZOS_START_SEED: u64 = 0x1a2c_2057;
const RESIDUAL_CHECK_EVERY: usize = 5;

/// Lanczos vectors are kept for full reorthogonalization while the basis
/// holds at most this many floats (512 MiB).
const REORTH_BUDGET: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FullEigensolve,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub d: usize,
    pub lambda1: f64,
    pub lambda: f64,
    pub ratio: f64,
    pub method: Method,
    pub tolerance: f64,
    /// Lanczos steps taken; zero for the dense solve.
    pub iterations: usize,
}

impl SpectralReport {
    /// Whether the graph certifies as an `(n, d, λ)`-graph with `λ/d < delta`.
    pub fn certifies(&self, delta: f64) -> bool {
        self.ratio < delta
    }
}

/// Picks the method from the graph size.
pub fn spectral_report(g: &Graph, tolerance: f64) -> Result<SpectralReport> {
    let method = if g.n() <= FULL_EIGENSOLVE_MAX_N {
        Method::FullEigensolve
    } else {
        Method::Iterative
    };
    spectral_report_with(g, tolerance, method)
}

pub fn spectral_report_with(g: &Graph, tolerance: f64, method: Method) -> Result<SpectralReport> {
    if !g.is_regular() {
        return Err(Error::input("spectral report requires a regular graph"));
    }
    if g.n() < 2 {
        return Err(Error::input("spectral report requires at least two vertices"));
    }
    if !(tolerance > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tolerance}")));
    }
    let d = g.degree_bound();
    let (lambda1, lambda, iterations) = match method {
        Method::FullEigensolve => {
            let eig = full_spectrum(g);
            let second = eig[1];
            let last = eig[eig.len() - 1];
            (eig[0], second.abs().max(last.abs()), 0)
        }
        Method::Iterative => {
            if !g.is_connected() {
                // d has multiplicity > 1
                (d as f64, d as f64, 0)
            } else {
                let run = deflated_lanczos(g, tolerance, MAX_LANCZOS_ITERATIONS)?;
                (d as f64, run.top.max(-run.bottom), run.iterations)
            }
        }
    };
    Ok(SpectralReport {
        n: g.n(),
        d,
        lambda1,
        lambda,
        ratio: if d == 0 { 0.0 } else { lambda / d as f64 },
        method,
        tolerance,
        iterations,
    })
}

/// All adjacency eigenvalues, descending.
pub fn full_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

#[derive(Debug, Clone, Copy)]
struct LanczosRun {
    top: f64,
    bottom: f64,
    iterations: usize,
}

fn matvec(g: &Graph, x: &[f64], y: &mut [f64]) {
    for (v, out) in y.iter_mut().enumerate() {
        *out = g.adj(v).iter().map(|&u| x[u as usize]).sum();
    }
}

fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for e in x.iter_mut() {
        *e -= mean;
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Lanczos in the complement of the all-ones vector, fully
/// reorthogonalized while the basis fits in [`REORTH_BUDGET`].
///
/// Each extreme Ritz value is accepted the first time its residual bound
/// `β_k |s_k|` drops below `tolerance`. Past the budget the recurrence runs
/// plain, and the bound can oscillate as spurious copies of a converged
/// value appear; by interlacing the extreme Ritz values only move outward,
/// so an accepted value stays accepted.
fn deflated_lanczos(g: &Graph, tolerance: f64, max_iter: usize) -> Result<LanczosRun> {
    let n = g.n();
    let mut rng = chacha(LANCZOS_START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    remove_mean(&mut v);
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut v_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let (mut top_done, mut bottom_done) = (false, false);
    let mut best = (0.0, 0.0, f64::INFINITY);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut reorth = true;

    for j in 0..max_iter {
        matvec(g, &v, &mut w);
        remove_mean(&mut w);
        if let Some(&b) = beta.last() {
            for (wi, pi) in w.iter_mut().zip(&v_prev) {
                *wi -= b * pi;
            }
        }
        let a = dot(&w, &v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= a * vi;
        }
        alpha.push(a);
        reorth &= (basis.len() + 1) * n <= REORTH_BUDGET;
        if reorth {
            basis.push(v.clone());
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        } else {
            basis = Vec::new();
        }
        let b = dot(&w, &w).sqrt();
        let steps = j + 1;

        // Krylov space exhausted: T's spectrum is exact
        let exhausted = b <= 1e-12 * (g.degree_bound() as f64).max(1.0);
        if exhausted || steps % RESIDUAL_CHECK_EVERY == 0 || steps == max_iter {
            let (top, top_last) = top_ritz(&alpha, &beta);
            let neg_alpha: Vec<f64> = alpha.iter().map(|x| -x).collect();
            let (neg_bottom, bottom_last) = top_ritz(&neg_alpha, &beta);
            let (top_res, bottom_res) = if exhausted {
                (0.0, 0.0)
            } else {
                (b * top_last, b * bottom_last)
            };
            top_done |= top_res <= tolerance;
            bottom_done |= bottom_res <= tolerance;
            let pending = [(top_done, top_res), (bottom_done, bottom_res)]
                .iter()
                .filter(|(done, _)| !done)
                .map(|(_, r)| *r)
                .fold(0.0, f64::max);
            best = (top, -neg_bottom, pending);
            if top_done && bottom_done {
                return Ok(LanczosRun {
                    top,
                    bottom: -neg_bottom,
                    iterations: steps,
                });
            }
        }
        if exhausted {
            break;
        }
        for ((p, vi), wi) in v_prev.iter_mut().zip(v.iter_mut()).zip(&w) {
            *p = *vi;
            *vi = wi / b;
        }
        beta.push(b);
    }
    Err(Error::Numerical {
        estimate: best.0.max(-best.1),
        residual: best.2,
        iterations: alpha.len(),
    })
}

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` that are
/// strictly below `x` (Sturm count via LDLᵀ pivots).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = a - x - coupling;
        if q == 0.0 {
            q = -f64::MIN_POSITIVE;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the tridiagonal matrix and the magnitude of the
/// last component of its unit eigenvector.
fn top_ritz(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let k = diag.len();
    let radius = |i: usize| {
        (if i > 0 { off[i - 1].abs() } else { 0.0 }) + (if i + 1 < k { off[i].abs() } else { 0.0 })
    };
    let mut lo = (0..k).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..k).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = hi;
    if k == 1 {
        return (theta, 1.0);
    }
    // Eigenvector from the pivots of θI − T: s_{i+1}/s_i = q_i / β_i, kept
    // in log form. All pivots are positive above the spectrum.
    let mut logs = Vec::with_capacity(k);
    logs.push(0.0f64);
    let mut q = 0.0;
    for i in 0..k - 1 {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = (theta - diag[i] - coupling).max(f64::MIN_POSITIVE);
        let next = logs[i] + q.ln() - off[i].abs().max(f64::MIN_POSITIVE).ln();
        logs.push(next);
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = logs.iter().map(|l| (2.0 * (l - peak)).exp()).sum::<f64>().sqrt();
    (theta, (logs[k - 1] - peak).exp() / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Relative slack on the right-hand side of the mixing inequality.
pub const MIXING_SLACK: f64 = 1e-9;

/// Evaluates `|e(B,C) − (d/n)|B||C|| ≤ λ √(|B||C|)`.
pub fn mixing_lemma_check(g: &Graph, lambda: f64, b: &VertexSet, c: &VertexSet) -> MixingCheck {
    let n = g.n() as f64;
    let d = g.degree_bound() as f64;
    let (sb, sc) = (b.len() as f64, c.len() as f64);
    let e = g.ordered_pair_edge_count(b, c) as f64;
    let lhs = (e - d / n * sb * sc).abs();
    let rhs = lambda * (sb * sc).sqrt();
    MixingCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + MIXING_SLACK * rhs.max(1.0),
    }
}

/// `{v : d(v, B) ≤ (1 − α) |B| d / n}`.
pub fn low_degree_set(g: &Graph, b: &VertexSet, alpha: f64) -> Result<VertexSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let threshold = (1.0 - alpha) * b.len() as f64 * g.degree_bound() as f64 / g.n() as f64;
    Ok(VertexSet::from_vertices(
        g.n(),
        (0..g.n()).filter(|&v| g.degree_into(v, b) as f64 <= threshold),
    ))
}

/// The lexicographically first edge `(u, v)` with `u ∈ B`, `v ∈ C`.
pub fn edge_exists_between(g: &Graph, b: &VertexSet, c: &VertexSet) -> Result<Option<(usize, usize)>> {
    if !b.is_disjoint(c) {
        return Err(Error::input("edge search needs disjoint vertex sets"));
    }
    Ok(b.iter().find_map(|u| {
        g.adj(u)
            .iter()
            .map(|&v| v as usize)
            .find(|&v| c.contains(v))
            .map(|v| (u, v))
    }))
}
