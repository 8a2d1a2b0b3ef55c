use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perco::config::{GraphSource, SweepConfig};
use perco::error::{HarnessError, Result};
use perco::sweep::{self, SweepOutcome};
use perco_core::analysis::{enumerate_non_expanding, expansion_threshold, list_non_expanding};
use perco_core::exploration::{run_dfs_percolation_with, RunOptions, SigmaMode};
use perco_core::generators::Family;
use perco_core::spectral::{spectral_report, spectral_report_with, Method};
use perco_core::{GeneratorSpec, Probability};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "perco", version, about = "Site percolation on regular graphs via DFS exposure")]
struct Cli {
    /// Seed: generator seed for `generate`, run seed for `run`, base seed
    /// for `sweep`/`check`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (output directory for `sweep`/`check`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSON config: a sweep config for `sweep`/`check`, a graph source
    /// elsewhere.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and write it as an edge list.
    Generate(GraphArgs),
    /// Compute λ and the eigenvalue ratio.
    Spectral {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Certification bar on λ/d.
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// One percolation run; prints the run summary as JSON.
    Run {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = SigmaArg::Identity)]
        sigma: SigmaArg,
        /// Write the deepest stack path, one vertex per line.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Run a sweep config; prints the summary JSON.
    Sweep,
    /// Run a sweep config and fail (exit 3) if any grid point misses the bar.
    Check {
        /// Also require the threshold estimate strictly inside (LO, HI).
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        threshold_between: Option<Vec<f64>>,
    },
    /// Count non-expanding m-subsets by brute force.
    Enumerate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.2)]
        alpha0: f64,
        /// Also print every non-expanding set.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file to load instead of generating.
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    n: Option<usize>,
    /// Degree (dimension for hypercube).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    offsets: Vec<usize>,
    /// Generator seed; defaults to `--seed` for `generate`, 0 elsewhere.
    #[arg(long)]
    graph_seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    RandomRegular,
    Hypercube,
    Cycle,
    Complete,
    Circulant,
    DisjointCliques,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::RandomRegular => Family::RandomRegular,
            FamilyArg::Hypercube => Family::Hypercube,
            FamilyArg::Cycle => Family::Cycle,
            FamilyArg::Complete => Family::Complete,
            FamilyArg::Circulant => Family::Circulant,
            FamilyArg::DisjointCliques => Family::DisjointCliques,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Full,
    Iterative,
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaArg {
    Identity,
    SeededPermutation,
}

impl From<SigmaArg> for SigmaMode {
    fn from(s: SigmaArg) -> SigmaMode {
        match s {
            SigmaArg::Identity => SigmaMode::Identity,
            SigmaArg::SeededPermutation => SigmaMode::SeededPermutation,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => {
            let source = graph_source(cli, args, cli.seed)?;
            let g = source.load()?;
            let mut out = output(cli.out.as_deref())?;
            g.write_edge_list(&mut out)?;
            out.flush().map_err(|e| write_err(cli.out.as_deref(), e))?;
            eprintln!("{}: n={} d={} edges={}", source.family(), g.n(), g.degree_bound(), g.edge_count());
            Ok(())
        }
        Command::Spectral { graph, tolerance, delta, method } => {
            let g = graph_source(cli, graph, None)?.load()?;
            let report = match method {
                MethodArg::Auto => spectral_report(&g, *tolerance)?,
                MethodArg::Full => spectral_report_with(&g, *tolerance, Method::FullEigensolve)?,
                MethodArg::Iterative => spectral_report_with(&g, *tolerance, Method::Iterative)?,
            };
            emit_json(cli.out.as_deref(), &report)?;
            if report.certifies(*delta) {
                eprintln!("certified: lambda/d = {:.6} < {delta}", report.ratio);
            } else {
                eprintln!("not certified: lambda/d = {:.6} >= {delta}", report.ratio);
            }
            Ok(())
        }
        Command::Run { graph, p, sigma, witness } => {
            let g = graph_source(cli, graph, None)?.load()?;
            let p = Probability::new(*p)?;
            let options = RunOptions { sigma: (*sigma).into(), trace: false, log_coins: false };
            let report = run_dfs_percolation_with(&g, p, cli.seed.unwrap_or(0), options);
            emit_json(cli.out.as_deref(), &report.summary())?;
            if let Some(path) = witness {
                let mut text = String::new();
                for v in report.witness_path() {
                    text.push_str(&v.to_string());
                    text.push('\n');
                }
                fs::write(path, text).map_err(|e| write_err(Some(path), e))?;
            }
            Ok(())
        }
        Command::Sweep => {
            let outcome = sweep_from_cli(cli)?;
            emit_json(None, &outcome.summary)
        }
        Command::Check { threshold_between } => {
            let outcome = sweep_from_cli(cli)?;
            emit_json(None, &outcome.summary)?;
            let s = &outcome.summary;
            for pt in &s.points {
                if let (Some(k), Some(ok)) = (pt.passes, pt.meets_whp_bar) {
                    eprintln!(
                        "{} p={} eps={:+}: {k}/{} trials meet target",
                        if ok { "PASS" } else { "FAIL" },
                        pt.p,
                        pt.epsilon,
                        pt.trials
                    );
                }
            }
            if !s.all_verdicts_pass {
                return Err(HarnessError::CheckFailed("a grid point is below the whp bar".into()));
            }
            if let Some(range) = threshold_between {
                let (lo, hi) = (range[0], range[1]);
                match s.threshold.p {
                    Some(p) if p > lo && p < hi => eprintln!("PASS threshold {p} in ({lo}, {hi})"),
                    other => {
                        return Err(HarnessError::CheckFailed(format!(
                            "threshold estimate {other:?} not in ({lo}, {hi}): {}",
                            s.threshold.diagnostics
                        )))
                    }
                }
            }
            Ok(())
        }
        Command::Enumerate { graph, m, alpha0, list } => {
            let g = graph_source(cli, graph, None)?.load()?;
            let count = enumerate_non_expanding(&g, *m, *alpha0)?;
            let sets = if *list { Some(list_non_expanding(&g, *m, *alpha0)?) } else { None };
            #[derive(Serialize)]
            struct Enumeration {
                n: usize,
                d: usize,
                m: usize,
                alpha0: f64,
                threshold: f64,
                total: u64,
                non_expanding: u64,
                #[serde(skip_serializing_if = "Option::is_none")]
                sets: Option<Vec<Vec<usize>>>,
            }
            emit_json(
                cli.out.as_deref(),
                &Enumeration {
                    n: g.n(),
                    d: g.degree_bound(),
                    m: *m,
                    alpha0: *alpha0,
                    threshold: expansion_threshold(g.n(), g.degree_bound(), *m, *alpha0),
                    total: count.total,
                    non_expanding: count.non_expanding,
                    sets,
                },
            )
        }
    }
}

fn graph_source(cli: &Cli, args: &GraphArgs, default_seed: Option<u64>) -> Result<GraphSource> {
    if let Some(path) = &args.graph {
        return Ok(GraphSource::File { file: path.clone() });
    }
    if let Some(family) = args.family {
        let family: Family = family.into();
        let n = args.n.ok_or_else(|| HarnessError::Input("--n is required with --family".into()))?;
        let d = match (args.d, family) {
            (Some(d), _) => d,
            (None, Family::Cycle) => 2,
            (None, Family::Complete) => n.saturating_sub(1),
            (None, Family::Circulant) => circulant_degree(n, &args.offsets),
            (None, _) => return Err(HarnessError::Input("--d is required for this family".into())),
        };
        return Ok(GraphSource::Generated(GeneratorSpec {
            family,
            n,
            d,
            offsets: args.offsets.clone(),
            seed: args.graph_seed.or(default_seed).unwrap_or(0),
        }));
    }
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())));
    }
    Err(HarnessError::Input("no graph: pass --graph FILE, --family ..., or --config".into()))
}

fn circulant_degree(n: usize, offsets: &[usize]) -> usize {
    offsets.iter().map(|&o| if 2 * o == n { 1 } else { 2 }).sum()
}

fn sweep_from_cli(cli: &Cli) -> Result<SweepOutcome> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| HarnessError::Input("sweep needs --config <json>".into()))?;
    let mut config = SweepConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        config.base_seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.parallelism = workers;
    }
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| write_err(Some(dir), e))?;
        config.outputs.csv = Some(dir.join("sweep.csv"));
        config.outputs.json = Some(dir.join("summary.json"));
    }
    sweep::run_sweep(&config)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).map_err(|e| write_err(Some(p), e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| write_err(path, e))
}

fn write_err(path: Option<&Path>, source: io::Error) -> HarnessError {
    HarnessError::Output {
        path: path.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string()),
        source,
    }
}

