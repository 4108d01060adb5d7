//! Run configuration read from TOML.

use crate::eos::{EosMode, EosModel};
use crate::error::{Error, Result};
use crate::field::{FieldSolver, SolverSettings};
use crate::kernels::KernelSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub radius: f64,
    pub nodes: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { radius: 10.0, nodes: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        SolverConfig { tol: s.tol, residual_tol: s.residual_tol, max_iter: s.max_iter }
    }
}

/// Which launches `solve` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BranchChoice {
    Minimal,
    Maximal,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub eos: EosMode,
    pub kernel: KernelSpec,
    pub domain: DomainConfig,
    pub solver: SolverConfig,
    pub alpha_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    /// Particle numbers for fixed-mass solves.
    pub n_grid: Vec<f64>,
    pub branch: BranchChoice,
    /// Compute container transitions in `phase-diagram` (slow).
    pub container: bool,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eos: EosMode::HardSphere,
            kernel: KernelSpec::yukawa(1.0),
            domain: DomainConfig::default(),
            solver: SolverConfig::default(),
            alpha_grid: vec![31.0 / (4.0 * std::f64::consts::PI)],
            gamma_grid: vec![-5.0],
            n_grid: Vec::new(),
            branch: BranchChoice::Both,
            container: false,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

fn sorted(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!("{name} contains a non-finite value")));
    }
    if v.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config(format!("{name} must be sorted ascending")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate().map_err(|e| Error::Config(e.to_string()))?;
        let d = &self.domain;
        if !(d.radius > 0.0 && d.radius.is_finite()) {
            return Err(Error::Config(format!("domain.radius must be positive, got {}", d.radius)));
        }
        if d.nodes < 8 || !d.nodes.is_multiple_of(8) || d.nodes > 4096 {
            return Err(Error::Config(format!("domain.nodes must be a multiple of 8 in [8, 4096], got {}", d.nodes)));
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.residual_tol > 0.0 && s.max_iter > 0) {
            return Err(Error::Config("solver tolerances and max_iter must be positive".into()));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::Config("alpha_grid must not be empty".into()));
        }
        if self.alpha_grid.iter().any(|a| *a < 0.0) {
            return Err(Error::Config("alpha values must be non-negative".into()));
        }
        sorted("alpha_grid", &self.alpha_grid)?;
        sorted("gamma_grid", &self.gamma_grid)?;
        sorted("n_grid", &self.n_grid)?;
        if self.n_grid.iter().any(|n| *n <= 0.0) {
            return Err(Error::Config("n_grid values must be positive".into()));
        }
        Ok(())
    }

    pub fn eos_model(&self) -> EosModel {
        EosModel::new(self.eos)
    }

    pub fn solver(&self) -> Result<FieldSolver> {
        let s = FieldSolver::new(self.eos_model(), self.kernel, self.domain.radius, self.domain.nodes)?;
        Ok(s.with_settings(SolverSettings {
            tol: self.solver.tol,
            residual_tol: self.solver.residual_tol,
            max_iter: self.solver.max_iter,
            ..SolverSettings::default()
        }))
    }

    /// Single-line JSON echo of the configuration for output headers.
    pub fn header(&self, command: &str) -> String {
        let json = serde_json::to_string(self).unwrap_or_default();
        format!("hsdft {command} config={json}")
    }
}
