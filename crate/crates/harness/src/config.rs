use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use perco_core::exploration::SigmaMode;
use perco_core::{GeneratorSpec, Graph};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Where the ground graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Generated(GeneratorSpec),
    File { file: PathBuf },
}

impl GraphSource {
    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::Generated(spec) => Ok(spec.build()?),
            GraphSource::File { file } => {
                let f = fs::File::open(file)
                    .map_err(|e| HarnessError::Input(format!("{}: {e}", file.display())))?;
                Ok(Graph::read_edge_list(BufReader::new(f))?)
            }
        }
    }

    /// Family label for the CSV `family` column.
    pub fn family(&self) -> String {
        match self {
            GraphSource::Generated(spec) => spec.family.name().to_string(),
            GraphSource::File { .. } => "file".to_string(),
        }
    }
}

/// Either explicit probabilities, or `p = center * (1 + ε)` for each ε.
/// `center` defaults to `1/d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PGrid {
    Explicit(Vec<f64>),
    Epsilons {
        #[serde(default)]
        center: Option<f64>,
        epsilons: Vec<f64>,
    },
}

/// One resolved grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub p: f64,
    /// `p·d − 1` for explicit grids.
    pub epsilon: f64,
}

impl PGrid {
    pub fn resolve(&self, d: usize) -> Result<Vec<GridPoint>> {
        let points: Vec<GridPoint> = match self {
            PGrid::Explicit(ps) => ps
                .iter()
                .map(|&p| GridPoint { p, epsilon: p * d as f64 - 1.0 })
                .collect(),
            PGrid::Epsilons { center, epsilons } => {
                let center = match center {
                    Some(c) => *c,
                    None if d > 0 => 1.0 / d as f64,
                    None => return Err(HarnessError::Input("epsilon grid on a degree-0 graph".into())),
                };
                epsilons
                    .iter()
                    .map(|&eps| GridPoint { p: center * (1.0 + eps), epsilon: eps })
                    .collect()
            }
        };
        if points.is_empty() {
            return Err(HarnessError::Input("empty p grid".into()));
        }
        for pt in &points {
            if !(0.0..=1.0).contains(&pt.p) {
                return Err(HarnessError::Input(format!("grid probability {} outside [0, 1]", pt.p)));
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub graph: GraphSource,
    pub p_grid: PGrid,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub sigma_mode: SigmaMode,
    #[serde(default)]
    pub outputs: Outputs,
    /// Worker threads; 0 lets rayon decide.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default = "default_whp_bar")]
    pub whp_bar: f64,
    #[serde(default = "default_giant_fraction")]
    pub giant_fraction: f64,
    #[serde(default = "default_spectral_tolerance")]
    pub spectral_tolerance: f64,
}

fn default_whp_bar() -> f64 {
    0.95
}

fn default_giant_fraction() -> f64 {
    0.1
}

fn default_spectral_tolerance() -> f64 {
    1e-6
}

impl SweepConfig {
    pub fn new(graph: GraphSource, p_grid: PGrid, trials: usize, base_seed: u64) -> Self {
        SweepConfig {
            graph,
            p_grid,
            trials,
            base_seed,
            sigma_mode: SigmaMode::Identity,
            outputs: Outputs::default(),
            parallelism: 0,
            whp_bar: default_whp_bar(),
            giant_fraction: default_giant_fraction(),
            spectral_tolerance: default_spectral_tolerance(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
        let cfg: SweepConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Input("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.whp_bar) {
            return Err(HarnessError::Input(format!("whp_bar {} outside [0, 1]", self.whp_bar)));
        }
        if !(self.giant_fraction > 0.0) {
            return Err(HarnessError::Input("giant_fraction must be positive".into()));
        }
        if !(self.spectral_tolerance > 0.0) {
            return Err(HarnessError::Input("spectral_tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg: SweepConfig = serde_json::from_str(
            r#"{"graph":{"family":"complete","n":10,"d":9},"p_grid":[0.5],"trials":2}"#,
        )
        .unwrap();
        assert_eq!(cfg.whp_bar, 0.95);
        assert_eq!(cfg.giant_fraction, 0.1);
        assert_eq!(cfg.sigma_mode, SigmaMode::Identity);
        assert_eq!(cfg.graph.family(), "complete");
    }

    #[test]
    fn epsilon_grid_centers_on_inverse_degree() {
        let grid: PGrid = serde_json::from_str(r#"{"epsilons":[-0.5,0.5]}"#).unwrap();
        let pts = grid.resolve(10).unwrap();
        assert!((pts[0].p - 0.05).abs() < 1e-15);
        assert!((pts[1].p - 0.15).abs() < 1e-15);
        assert_eq!(pts[1].epsilon, 0.5);
    }

    #[test]
    fn file_source_parses() {
        let src: GraphSource = serde_json::from_str(r#"{"file":"g.txt"}"#).unwrap();
        assert_eq!(src, GraphSource::File { file: "g.txt".into() });
        assert_eq!(src.family(), "file");
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PGrid::Explicit(vec![]).resolve(3).is_err());
        assert!(PGrid::Explicit(vec![1.5]).resolve(3).is_err());
        let cfg = SweepConfig::new(
            GraphSource::Generated(GeneratorSpec::random_regular(10, 3, 0)),
            PGrid::Explicit(vec![0.1]),
            0,
            0,
        );
        assert!(cfg.validate().is_err());
    }
}
