//! Run configuration: a JSON file overlaid by command-line flags.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ermakov_core::involutory::RhoFamily;
use ermakov_core::report::GridSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Json,
    Svg,
}

/// Where the moving front is specified: directly by `γ` or through `P_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FrontSpec {
    #[serde(rename = "gamma")]
    Gamma(f64),
    #[serde(rename = "P_m")]
    Pm(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub analytic: f64,
    pub finite_difference: f64,
    pub boundary: f64,
    pub path_independence: f64,
    pub origin_drift: f64,
    pub s_star_coeff: f64,
    pub compatibility: f64,
    pub involution: f64,
    pub modulated: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            analytic: 1e-9,
            finite_difference: 1e-5,
            boundary: 1e-9,
            path_independence: 1e-8,
            origin_drift: 1e-10,
            s_star_coeff: 1e-10,
            compatibility: 1e-4,
            involution: 1e-10,
            modulated: 1e-4,
        }
    }
}

/// The `(x*, t*)` lattice of the image-equation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub x_star0: f64,
    pub t_star0: f64,
    pub step: f64,
    pub n: usize,
}

/// Search interval for `γ` when the front is given by `P_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSearch {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl Default for GammaSearch {
    fn default() -> Self {
        GammaSearch { lo: ermakov_core::stefan::MIN_GAMMA, hi: 10.0, cells: 200 }
    }
}

/// Contents of a `--config` file; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "P_m")]
    pub p_m: Option<f64>,
    pub grid: Option<GridSpec>,
    pub quadrature: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub emit: Option<BTreeSet<Emit>>,
    pub tolerances: Option<Tolerances>,
    pub lattice: Option<LatticeConfig>,
    pub modulation: Option<RhoFamily>,
    pub fd_step: Option<f64>,
    pub gamma_search: Option<GammaSearch>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub lambda: f64,
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    pub front: FrontSpec,
    pub grid: GridSpec,
    pub quadrature: usize,
    pub output_dir: PathBuf,
    pub emit: BTreeSet<Emit>,
    pub tolerances: Tolerances,
    pub lattice: Option<LatticeConfig>,
    pub modulation: RhoFamily,
    pub fd_step: f64,
    pub gamma_search: GammaSearch,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, conflicts_with = "pm", allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pm: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance on the analytic and boundary residual maxima.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Artifact kinds to write.
    #[arg(long, value_delimiter = ',')]
    pub emit: Option<Vec<Emit>>,
}

pub fn default_grid() -> GridSpec {
    GridSpec { x0: 0.0, x1: 1.0, t0: 0.0, t1: 10.0, nx: 50, nt: 50 }
}

pub fn default_modulation() -> RhoFamily {
    RhoFamily::Power { exponent: 0.5, a: 1.0 }
}

pub fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let front = match (self.gamma, self.pm) {
            (Some(g), _) => FrontSpec::Gamma(g),
            (_, Some(p)) => FrontSpec::Pm(p),
            _ => match (file.gamma, file.p_m) {
                (Some(_), Some(_)) => return Err(CliError::Config("config must give exactly one of gamma and P_m, not both".into())),
                (Some(g), None) => FrontSpec::Gamma(g),
                (None, Some(p)) => FrontSpec::Pm(p),
                (None, None) => return Err(CliError::Config("config must give exactly one of gamma and P_m".into())),
            },
        };
        let mut tolerances = file.tolerances.unwrap_or_default();
        if let Some(t) = self.tol {
            tolerances.analytic = t;
            tolerances.boundary = t;
        }
        let emit = match &self.emit {
            Some(v) => v.iter().copied().collect(),
            None => file.emit.unwrap_or_else(|| [Emit::Csv, Emit::Json].into_iter().collect()),
        };
        let cfg = RunConfig {
            lambda: self.lambda.or(file.lambda).unwrap_or(1.0),
            a: self.a.or(file.a).unwrap_or(1.0),
            c1: self.c1.or(file.c1).unwrap_or(1.0),
            c2: self.c2.or(file.c2).unwrap_or(0.0),
            front,
            grid: file.grid.unwrap_or_else(default_grid),
            quadrature: file.quadrature.unwrap_or(ermakov_core::reciprocal::DEFAULT_QUAD_NODES),
            output_dir: self.out.clone().or(file.output_dir).unwrap_or_else(|| PathBuf::from("out")),
            emit,
            tolerances,
            lattice: file.lattice,
            modulation: file.modulation.unwrap_or_else(default_modulation),
            fd_step: file.fd_step.unwrap_or(ermakov_core::similarity::DEFAULT_FD_STEP),
            gamma_search: file.gamma_search.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(CliError::Config(format!(
                "lambda = {}: only the positivity regime lambda > 0 is supported",
                self.lambda
            )));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(CliError::Config(format!("a = {}: the time shift must be positive", self.a)));
        }
        if !(self.c1 > 0.0) || !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(CliError::Config(format!("c1 = {}, c2 = {}: c1 must be positive and both finite", self.c1, self.c2)));
        }
        match self.front {
            FrontSpec::Gamma(g) if !(g > 0.0) || !g.is_finite() => {
                return Err(CliError::Config(format!("gamma = {g} must be positive")));
            }
            FrontSpec::Pm(p) if !(p > 0.0) || !p.is_finite() => {
                return Err(CliError::Config(format!("P_m = {p} must be positive")));
            }
            _ => {}
        }
        self.grid.validate().map_err(|e| CliError::Config(format!("grid: {e}")))?;
        if self.quadrature < ermakov_core::reciprocal::MIN_QUAD_NODES {
            return Err(CliError::Config(format!("quadrature must be at least {}", ermakov_core::reciprocal::MIN_QUAD_NODES)));
        }
        if !(self.fd_step > 0.0) {
            return Err(CliError::Config(format!("fd_step = {} must be positive", self.fd_step)));
        }
        for (name, v) in [
            ("analytic", self.tolerances.analytic),
            ("finite_difference", self.tolerances.finite_difference),
            ("boundary", self.tolerances.boundary),
            ("path_independence", self.tolerances.path_independence),
            ("origin_drift", self.tolerances.origin_drift),
            ("s_star_coeff", self.tolerances.s_star_coeff),
            ("compatibility", self.tolerances.compatibility),
            ("involution", self.tolerances.involution),
            ("modulated", self.tolerances.modulated),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Config(format!("tolerance {name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }
}
