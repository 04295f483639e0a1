//! Run configuration, read from TOML.
//!
//! ```toml
//! [params]
//! d = 0.01
//! L = 1.0
//!
//! [contour]
//! r_min = 0.01
//! r_max = 100.0
//! n_per_ray = 200
//! grading = "log-uniform"
//!
//! [grid]
//! x_min = 0.2
//! x_max = 2.0
//! nx = 10
//! y_margin = 0.1
//! ny = 9
//!
//! [solver]
//! backend = "neumann"
//! tol = 1e-10
//! max_iter = 200
//!
//! [oracle]
//! n_terms = 2001
//!
//! [output]
//! directory = "out"
//! formats = ["csv", "json"]
//! ```
//!
//! Every section is required and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::contour::{ContourSpec, Grading};
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::reconstruct::{GridSpec, SweepConfig};
use crate::rh::{Backend, SolverOptions};
use crate::verify::OracleSeries;

/// Largest `|d|` accepted for a run; `tan(d/2)` is about 2000 there.
pub const D_MAX: f64 = std::f64::consts::PI - 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub d: f64,
    #[serde(rename = "L")]
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSection {
    pub r_min: f64,
    pub r_max: f64,
    pub n_per_ray: usize,
    pub grading: Grading,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub backend: Backend,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub n_terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub contour: ContourSection,
    pub grid: GridSpec,
    pub solver: SolverSection,
    pub oracle: OracleSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = ContourSpec::default();
        let s = SolverOptions::default();
        Self {
            params: ParamsSection { d: 0.01, width: 1.0 },
            contour: ContourSection {
                r_min: c.r_min,
                r_max: c.r_max,
                n_per_ray: c.n_per_ray,
                grading: c.grading,
            },
            grid: GridSpec {
                x_min: 0.2,
                x_max: 2.0,
                nx: 10,
                y_margin: 0.1,
                ny: 9,
            },
            solver: SolverSection {
                backend: s.backend,
                tol: s.tol,
                max_iter: s.max_iter,
            },
            oracle: OracleSection { n_terms: 2001 },
            output: OutputSection {
                directory: PathBuf::from("out"),
                formats: vec![OutputFormat::Csv, OutputFormat::Json],
            },
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every section; grid errors are reported as configuration errors.
    pub fn validate(&self) -> Result<()> {
        let params = self.problem()?;
        if params.d.abs() > D_MAX {
            return Err(Error::Config(format!(
                "|d| = {} is too close to pi; runs support |d| <= {D_MAX:.6}",
                params.d.abs()
            )));
        }
        self.contour_spec().validate()?;
        self.solver_options().validate()?;
        self.grid
            .validate(&params)
            .map_err(|e| Error::Config(e.to_string()))?;
        self.oracle_series()?;
        Ok(())
    }

    pub fn problem(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.params.d, self.params.width).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn contour_spec(&self) -> ContourSpec {
        ContourSpec {
            r_min: self.contour.r_min,
            r_max: self.contour.r_max,
            n_per_ray: self.contour.n_per_ray,
            grading: self.contour.grading,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            backend: self.solver.backend,
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            ..SolverOptions::default()
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            solver: self.solver_options(),
            ..SweepConfig::default()
        }
    }

    pub fn oracle_series(&self) -> Result<OracleSeries> {
        OracleSeries::new(self.params.d, self.params.width, self.oracle.n_terms)
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.output.formats.contains(&format)
    }
}
