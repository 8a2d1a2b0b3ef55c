use std::fs;
use std::path::Path;
use std::time::Instant;

use perco_core::analysis::{check_subcritical, supercritical_targets};
use perco_core::exploration::{run_dfs_percolation_with, RunOptions};
use perco_core::rng::derive_seed;
use perco_core::spectral::{spectral_report, Method};
use perco_core::{Graph, Probability};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{GridPoint, SweepConfig};
use crate::error::{HarnessError, Result};

pub const CSV_HEADER: &str = "family,n,d,lambda,ratio,p,epsilon,trial,seed,r_size,num_epochs,largest_component,second_component,max_stack,runtime_ms";

/// One `(grid point, trial)` run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub d: usize,
    /// Empty for graphs the spectral report does not apply to.
    pub lambda: Option<f64>,
    pub ratio: Option<f64>,
    pub p: f64,
    pub epsilon: f64,
    pub trial: usize,
    pub seed: u64,
    pub r_size: usize,
    pub num_epochs: usize,
    pub largest_component: usize,
    pub second_component: usize,
    pub max_stack: usize,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Subcritical,
    Supercritical,
    /// `ε` is zero or outside the range the targets are defined for.
    Unchecked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub p_index: usize,
    pub p: f64,
    pub epsilon: f64,
    pub regime: Regime,
    pub trials: usize,
    pub median_largest_component: f64,
    pub max_largest_component: usize,
    pub median_max_stack: f64,
    pub max_second_component: usize,
    /// Trials meeting the regime's target; absent when unchecked.
    pub passes: Option<usize>,
    pub pass_fraction: Option<f64>,
    pub meets_whp_bar: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub p: Option<f64>,
    /// Median largest component a grid point must reach.
    pub target: f64,
    pub diagnostics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub family: String,
    pub n: usize,
    pub d: usize,
    pub lambda: Option<f64>,
    pub ratio: Option<f64>,
    pub spectral_method: Option<Method>,
    pub trials: usize,
    pub base_seed: u64,
    pub whp_bar: f64,
    pub points: Vec<PointSummary>,
    /// True when no checked grid point falls below the bar.
    pub all_verdicts_pass: bool,
    pub threshold: ThresholdEstimate,
    /// SHA-256 of the CSV without the `runtime_ms` column.
    pub digest: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Builds the graph, runs the sweep, and writes whatever outputs the config
/// names.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let graph = config.graph.load()?;
    let outcome = run_sweep_on(&graph, &config.graph.family(), config)?;
    if let Some(path) = &config.outputs.csv {
        write_csv(&outcome.rows, path)?;
    }
    if let Some(path) = &config.outputs.json {
        write_json(&outcome.summary, path)?;
    }
    Ok(outcome)
}

/// Runs the sweep over an already built graph. Seeds are
/// `derive_seed(base_seed, [p_index, trial])`.
pub fn run_sweep_on(graph: &Graph, family: &str, config: &SweepConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let n = graph.n();
    let d = graph.degree_bound();
    let points = config.p_grid.resolve(d)?;
    let probs = points
        .iter()
        .map(|pt| Probability::new(pt.p))
        .collect::<perco_core::Result<Vec<_>>>()?;

    let spectral = if graph.is_regular() && n >= 2 {
        Some(spectral_report(graph, config.spectral_tolerance)?)
    } else {
        None
    };
    let lambda = spectral.as_ref().map(|s| s.lambda);
    let ratio = spectral.as_ref().map(|s| s.ratio);

    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|pi| (0..config.trials).map(move |t| (pi, t)))
        .collect();
    let options = RunOptions { sigma: config.sigma_mode, trace: false, log_coins: false };
    let run_task = |&(pi, trial): &(usize, usize)| {
        let seed = derive_seed(config.base_seed, &[pi as u64, trial as u64]);
        let start = Instant::now();
        let report = run_dfs_percolation_with(graph, probs[pi], seed, options);
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        SweepRow {
            family: family.to_string(),
            n,
            d,
            lambda,
            ratio,
            p: points[pi].p,
            epsilon: points[pi].epsilon,
            trial,
            seed,
            r_size: report.r.len(),
            num_epochs: report.epochs.len(),
            largest_component: report.largest_component,
            second_component: report.second_component,
            max_stack: report.max_stack_global,
            runtime_ms,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| HarnessError::Input(format!("worker pool: {e}")))?;
    // par_iter().collect() keeps task order
    let rows: Vec<SweepRow> = pool.install(|| tasks.par_iter().map(run_task).collect());

    let mut summaries = Vec::with_capacity(points.len());
    for (pi, pt) in points.iter().enumerate() {
        let chunk = &rows[pi * config.trials..(pi + 1) * config.trials];
        summaries.push(summarize_point(pi, *pt, chunk, n, d, config.whp_bar)?);
    }
    let all_verdicts_pass = summaries.iter().all(|s| s.meets_whp_bar != Some(false));
    let summary = SweepSummary {
        family: family.to_string(),
        n,
        d,
        lambda,
        ratio,
        spectral_method: spectral.map(|s| s.method),
        trials: config.trials,
        base_seed: config.base_seed,
        whp_bar: config.whp_bar,
        points: summaries,
        all_verdicts_pass,
        threshold: estimate_threshold(&rows, config.giant_fraction),
        digest: determinism_digest(&rows)?,
    };
    Ok(SweepOutcome { rows, summary })
}

fn summarize_point(
    p_index: usize,
    pt: GridPoint,
    rows: &[SweepRow],
    n: usize,
    d: usize,
    whp_bar: f64,
) -> Result<PointSummary> {
    let eps = pt.epsilon;
    let regime = if (-1.0..0.0).contains(&eps) {
        Regime::Subcritical
    } else if eps > 0.0 && eps < 1.0 {
        Regime::Supercritical
    } else {
        Regime::Unchecked
    };
    let passes = match regime {
        Regime::Subcritical => {
            let mut k = 0;
            for r in rows {
                if check_subcritical(n, r.largest_component, -eps)? {
                    k += 1;
                }
            }
            Some(k)
        }
        Regime::Supercritical => {
            let targets = supercritical_targets(n, d, eps)?;
            Some(rows.iter().filter(|r| targets.met_by(r.largest_component, r.max_stack)).count())
        }
        Regime::Unchecked => None,
    };
    let pass_fraction = passes.map(|k| k as f64 / rows.len() as f64);
    Ok(PointSummary {
        p_index,
        p: pt.p,
        epsilon: eps,
        regime,
        trials: rows.len(),
        median_largest_component: median(rows.iter().map(|r| r.largest_component)),
        max_largest_component: rows.iter().map(|r| r.largest_component).max().unwrap_or(0),
        median_max_stack: median(rows.iter().map(|r| r.max_stack)),
        max_second_component: rows.iter().map(|r| r.second_component).max().unwrap_or(0),
        passes,
        pass_fraction,
        meets_whp_bar: pass_fraction.map(|f| f >= whp_bar),
    })
}

/// Median of the values; the mean of the middle two for even counts.
pub fn median(values: impl Iterator<Item = usize>) -> f64 {
    let mut v: Vec<usize> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    }
}

/// Smallest grid `p` whose median largest component reaches
/// `giant_fraction * n / d`.
pub fn estimate_threshold(table: &[SweepRow], giant_fraction: f64) -> ThresholdEstimate {
    let Some(first) = table.first() else {
        return ThresholdEstimate { p: None, target: 0.0, diagnostics: "empty table".into() };
    };
    let target = giant_fraction * first.n as f64 / first.d.max(1) as f64;

    let mut ps: Vec<f64> = table.iter().map(|r| r.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let medians: Vec<(f64, f64)> = ps
        .iter()
        .map(|&p| {
            let m = median(table.iter().filter(|r| r.p == p).map(|r| r.largest_component));
            (p, m)
        })
        .collect();

    match medians.iter().find(|&&(_, m)| m >= target) {
        Some(&(p, m)) => ThresholdEstimate {
            p: Some(p),
            target,
            diagnostics: format!("median largest component {m} at p={p} reaches {target:.3}"),
        },
        None => {
            let (p, m) = medians
                .iter()
                .copied()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((0.0, 0.0));
            ThresholdEstimate {
                p: None,
                target,
                diagnostics: format!(
                    "grid never crosses: best median {m} at p={p}, below target {target:.3} over {} grid points",
                    medians.len()
                ),
            }
        }
    }
}

/// A row minus `runtime_ms`, for the determinism digest.
#[derive(Serialize)]
struct StableRow<'a> {
    family: &'a str,
    n: usize,
    d: usize,
    lambda: Option<f64>,
    ratio: Option<f64>,
    p: f64,
    epsilon: f64,
    trial: usize,
    seed: u64,
    r_size: usize,
    num_epochs: usize,
    largest_component: usize,
    second_component: usize,
    max_stack: usize,
}

impl<'a> From<&'a SweepRow> for StableRow<'a> {
    fn from(r: &'a SweepRow) -> Self {
        StableRow {
            family: &r.family,
            n: r.n,
            d: r.d,
            lambda: r.lambda,
            ratio: r.ratio,
            p: r.p,
            epsilon: r.epsilon,
            trial: r.trial,
            seed: r.seed,
            r_size: r.r_size,
            num_epochs: r.num_epochs,
            largest_component: r.largest_component,
            second_component: r.second_component,
            max_stack: r.max_stack,
        }
    }
}

fn csv_bytes(rows: &[SweepRow], with_runtime: bool) -> Result<Vec<u8>> {
    // headers are written explicitly so an empty table still has them
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let header: Vec<&str> = CSV_HEADER
        .split(',')
        .filter(|c| with_runtime || *c != "runtime_ms")
        .collect();
    w.write_record(&header)?;
    for r in rows {
        if with_runtime {
            w.serialize(r)?;
        } else {
            w.serialize(StableRow::from(r))?;
        }
    }
    w.into_inner().map_err(|e| HarnessError::Input(format!("csv buffer: {e}")))
}

/// The CSV text exactly as written to disk.
pub fn to_csv_string(rows: &[SweepRow]) -> Result<String> {
    Ok(String::from_utf8(csv_bytes(rows, true)?).expect("csv output is utf-8"))
}

/// SHA-256 over the CSV with the `runtime_ms` column dropped, hex-encoded.
pub fn determinism_digest(rows: &[SweepRow]) -> Result<String> {
    let bytes = csv_bytes(rows, false)?;
    let hash = Sha256::digest(&bytes);
    Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let bytes = csv_bytes(rows, true)?;
    fs::write(path, bytes).map_err(|source| HarnessError::Output { path: path.display().to_string(), source })
}

pub fn write_json(summary: &SweepSummary, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| HarnessError::Output { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: f64, largest: usize) -> SweepRow {
        SweepRow {
            family: "cycle".into(),
            n: 100,
            d: 2,
            lambda: None,
            ratio: None,
            p,
            epsilon: 2.0 * p - 1.0,
            trial: 0,
            seed: 1,
            r_size: largest,
            num_epochs: 1,
            largest_component: largest,
            second_component: 0,
            max_stack: largest,
            runtime_ms: 1.5,
        }
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median([3, 1, 2].into_iter()), 2.0);
        assert_eq!(median([4, 1, 2, 3].into_iter()), 2.5);
        assert_eq!(median(std::iter::empty()), 0.0);
    }

    #[test]
    fn threshold_none_on_all_zero_table() {
        let table = vec![row(0.1, 0), row(0.2, 0)];
        let est = estimate_threshold(&table, 0.1);
        assert_eq!(est.p, None);
        assert!(est.diagnostics.contains("never crosses"));
        assert_eq!(estimate_threshold(&[], 0.1).p, None);
    }

    #[test]
    fn threshold_picks_smallest_crossing_point() {
        // target = 0.1 * 100 / 2 = 5
        let table = vec![row(1.0, 100), row(0.3, 2), row(0.5, 6), row(0.5, 4), row(0.5, 7)];
        assert_eq!(estimate_threshold(&table, 0.1).p, Some(0.5));
        assert_eq!(estimate_threshold(&table, 0.5).p, Some(1.0));
    }

    #[test]
    fn csv_header_and_digest_ignore_runtime() {
        let mut a = vec![row(0.5, 3)];
        let text = to_csv_string(&a).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().nth(1).unwrap(), "cycle,100,2,,,0.5,0.0,0,1,3,1,3,0,3,1.5");
        let before = determinism_digest(&a).unwrap();
        a[0].runtime_ms = 99.0;
        assert_eq!(determinism_digest(&a).unwrap(), before);
        a[0].largest_component = 4;
        assert_ne!(determinism_digest(&a).unwrap(), before);
    }
}
