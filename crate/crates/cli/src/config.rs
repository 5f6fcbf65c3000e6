//! Per-command JSON configuration. Every field has a default; unknown fields
//! are rejected so that typos fail loudly.

use std::path::Path;

use anyhow::{Context, Result};
use dbarlab::dbar::DbarProblem;
use dbarlab::grid::make_grid;
use dbarlab::kr::{default_b_list, default_radii};
use dbarlab::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Picard settings shared by the solving commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub epsilon: f64,
    pub theta: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub continuation_steps: usize,
    pub holomorphic_degree: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let p = DbarProblem::new(make_grid(1.0, 17).expect("valid grid"), Complex64::new(0.0, 0.0));
        SolverSettings {
            epsilon: p.epsilon,
            theta: p.theta,
            tol: p.tol,
            max_iter: p.max_iter,
            continuation_steps: p.continuation_steps,
            holomorphic_degree: p.holomorphic_degree,
        }
    }
}

impl SolverSettings {
    pub fn problem(&self, radius: f64, resolution: usize, b: Complex64) -> Result<DbarProblem> {
        let p = DbarProblem {
            epsilon: self.epsilon,
            theta: self.theta,
            tol: self.tol,
            max_iter: self.max_iter,
            continuation_steps: self.continuation_steps,
            holomorphic_degree: self.holomorphic_degree,
            ..DbarProblem::new(make_grid(radius, resolution)?, b)
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub radius: f64,
    pub resolution: usize,
    /// `[re, im]`.
    pub b: Complex64,
    pub solver: SolverSettings,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            radius: 1.0,
            resolution: 129,
            b: Complex64::new(0.05, 0.0),
            solver: SolverSettings::default(),
        }
    }
}

impl SolveConfig {
    pub fn problem(&self) -> Result<DbarProblem> {
        self.solver.problem(self.radius, self.resolution, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub delta0: f64,
    pub kappa: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            delta0: dbarlab::certify::DEFAULT_DELTA0,
            kappa: dbarlab::certify::DEFAULT_KAPPA,
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(self.delta0 >= 0.0 && self.delta0.is_finite(), "delta0 must be >= 0");
        anyhow::ensure!(self.kappa >= 0.0 && self.kappa.is_finite(), "kappa must be >= 0");
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrScanConfig {
    pub b_list: Vec<Complex64>,
    pub radii: Vec<f64>,
    pub resolution: usize,
    pub solver: SolverSettings,
    /// Write a `|f|` heatmap per scanned solution.
    pub heatmaps: bool,
}

impl Default for KrScanConfig {
    fn default() -> Self {
        KrScanConfig {
            b_list: default_b_list(),
            radii: default_radii(),
            resolution: 129,
            solver: SolverSettings::default(),
            heatmaps: true,
        }
    }
}

impl KrScanConfig {
    pub fn template(&self) -> Result<DbarProblem> {
        anyhow::ensure!(!self.radii.is_empty(), "radii must not be empty");
        for &r in &self.radii {
            anyhow::ensure!(r > 0.0 && r.is_finite(), "radius {r} must be positive");
        }
        self.solver.problem(1.0, self.resolution, Complex64::new(0.05, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeConfig {
    pub g0: f64,
    pub steps: usize,
    /// Parameters `c` of the non-uniqueness family to sample.
    pub family_c: Vec<f64>,
    pub family_samples: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            g0: 0.01,
            steps: 1000,
            family_c: vec![0.0, 0.3, 0.9],
            family_samples: 2000,
        }
    }
}

impl OdeConfig {
    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(self.g0 >= 0.0 && self.g0.is_finite(), "g0 must be >= 0");
        anyhow::ensure!(self.steps >= dbarlab::ode::MIN_STEPS, "steps must be >= {}", dbarlab::ode::MIN_STEPS);
        anyhow::ensure!(self.family_samples >= 2, "family_samples must be >= 2");
        for &c in &self.family_c {
            anyhow::ensure!(c >= 0.0 && c.is_finite(), "family parameter {c} must be >= 0");
        }
        Ok(())
    }
}

/// Defaults, overridden by the file at `path` if given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            parse(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

/// Parses a config document; absent fields take their defaults.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}
