//! JSON run configuration.
//!
//! ```json
//! {
//!   "problem": {
//!     "grid": {"origin": [-1, -1], "extent": [2, 2], "n": [33, 33]},
//!     "f1": {"kind": "affine", "lambda": 1, "Lambda": 2, "matrices": [[[1, 0], [0, 1]]]},
//!     "f2": {"kind": "affine", "lambda": 1, "Lambda": 2, "matrices": [[[2, 0], [0, 2]]]},
//!     "f": {"type": "manufactured", "solution": {"type": "polynomial",
//!           "coefficients": [[1, 2, 0], [-0.25, 0, 0]]}},
//!     "g": {"type": "manufactured", "solution": {"type": "polynomial",
//!           "coefficients": [[1, 2, 0], [-0.25, 0, 0]]}}
//!   },
//!   "continuation": {"eps_floor_cells": 1.0},
//!   "seed": 0
//! }
//! ```
//!
//! File paths are resolved against the directory of the configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::discretization::{read_field, DiagnosticsConfig, Grid, GridFunction};
use crate::error::{Error, Result};
use crate::fixed_point::{ContinuationConfig, ProblemSpec};
use crate::operators::{OperatorJson, OperatorSpec};
use crate::oracle::{manufactured_2d, AnalyticField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: Vec<f64>,
    pub extent: Vec<f64>,
    pub n: Vec<usize>,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(&self.origin, &self.extent, &self.n)
    }

    /// Same box with `n0` nodes on the first axis and square cells.
    pub fn refined(&self, n0: usize) -> Result<Self> {
        if n0 < 3 {
            return Err(Error::Config(format!("grid size {n0} below 3")));
        }
        let h = self.extent[0] / (n0 - 1) as f64;
        let n = self
            .extent
            .iter()
            .map(|e| {
                let cells = e / h;
                if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
                    Err(Error::Config(format!(
                        "grid size {n0} does not give square cells on extent {e}"
                    )))
                } else {
                    Ok(cells.round() as usize + 1)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            origin: self.origin.clone(),
            extent: self.extent.clone(),
            n,
        })
    }
}

/// Named field presets for `f`, `g` and reference solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldPreset {
    Constant {
        value: f64,
    },
    /// Rows `[c, px, py]` of `Σ c x^px y^py`.
    Polynomial {
        coefficients: Vec<[f64; 3]>,
    },
    Trig {
        amplitude: f64,
        frequency: Vec<f64>,
    },
    /// Grid-field file on the same grid.
    File {
        path: PathBuf,
    },
    /// For `f`: the right-hand side making `solution` exact. Elsewhere: `solution` itself.
    Manufactured {
        solution: AnalyticField,
    },
}

impl FieldPreset {
    fn analytic(&self) -> Option<AnalyticField> {
        match self {
            Self::Constant { value } => Some(AnalyticField::Constant { value: *value }),
            Self::Polynomial { coefficients } => Some(AnalyticField::Polynomial {
                coefficients: coefficients.clone(),
            }),
            Self::Trig {
                amplitude,
                frequency,
            } => Some(AnalyticField::Trig {
                amplitude: *amplitude,
                frequency: frequency.clone(),
            }),
            Self::Manufactured { solution } => Some(solution.clone()),
            Self::File { .. } => None,
        }
    }

    fn load_file(path: &Path, base: &Path, grid: Grid) -> Result<GridFunction> {
        let full = base.join(path);
        let u = read_field(&full)?;
        if *u.grid() != grid {
            return Err(Error::Config(format!(
                "{} is not sampled on the configured grid",
                full.display()
            )));
        }
        Ok(u)
    }

    /// Samples the preset as a plain field.
    pub fn sample(&self, grid: Grid, base: &Path) -> Result<GridFunction> {
        match self {
            Self::File { path } => Self::load_file(path, base, grid),
            other => Ok(other.analytic().expect("analytic preset").sample(grid)),
        }
    }

    /// Samples the preset as a right-hand side for the phase operators.
    pub fn sample_rhs(
        &self,
        grid: Grid,
        base: &Path,
        f1: &OperatorSpec,
        f2: &OperatorSpec,
    ) -> Result<GridFunction> {
        match self {
            Self::Manufactured { solution } => Ok(manufactured_2d(solution, f1, f2, grid)?.1),
            other => other.sample(grid, base),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub grid: GridConfig,
    pub f1: OperatorJson,
    pub f2: OperatorJson,
    #[serde(default)]
    pub fref: Option<OperatorJson>,
    pub f: FieldPreset,
    pub g: FieldPreset,
    #[serde(default)]
    pub reference: Option<FieldPreset>,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

/// Options of the `check` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub ellipticity_samples: usize,
    pub convexity_samples: usize,
    pub closeness_samples: usize,
    pub beta_pairs: usize,
    pub beta_samples: usize,
    /// Radius for β pairs; defaults to a quarter of the diameter.
    pub r0: Option<f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            ellipticity_samples: 2000,
            convexity_samples: 2000,
            closeness_samples: 4000,
            beta_pairs: 64,
            beta_samples: 64,
            r0: None,
        }
    }
}

/// Options of the `study` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Node counts on the first axis.
    pub grid_sizes: Vec<usize>,
    /// Final-ε floors in cells; `null` keeps the continuation setting.
    pub eps_floor_cells: Vec<Option<f64>>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            grid_sizes: vec![33, 65, 129],
            eps_floor_cells: vec![None],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub continuation: ContinuationConfig,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub study: StudyConfig,
    #[serde(default)]
    pub seed: u64,
    /// Directory used to resolve relative paths; not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Operators parsed without the coefficient-bound check.
pub struct Operators {
    pub f1: OperatorSpec,
    pub f2: OperatorSpec,
    pub fref: Option<OperatorSpec>,
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.continuation
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        cfg.problem
            .grid
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json(&text, base)
    }

    /// Structural parse of the operators; bounds are validated separately.
    pub fn operators(&self) -> Result<Operators> {
        let parse = |j: &OperatorJson| j.to_spec_unchecked().map_err(|e| Error::Config(e.to_string()));
        Ok(Operators {
            f1: parse(&self.problem.f1)?,
            f2: parse(&self.problem.f2)?,
            fref: self.problem.fref.as_ref().map(parse).transpose()?,
        })
    }

    /// Builds the problem on the configured grid or on an override.
    pub fn problem_on(&self, grid_cfg: &GridConfig, ops: &Operators) -> Result<ProblemSpec> {
        let grid = grid_cfg.build().map_err(|e| Error::Config(e.to_string()))?;
        let base = &self.base_dir;
        let p = &self.problem;
        let f = p.f.sample_rhs(grid, base, &ops.f1, &ops.f2)?;
        let g = p.g.sample(grid, base)?;
        let mut prob = ProblemSpec::new(ops.f1.clone(), ops.f2.clone(), f, g)?
            .with_diagnostics(p.diagnostics)?;
        if let Some(fr) = &ops.fref {
            prob = prob.with_reference_operator(fr.clone())?;
        }
        if let Some(r) = &p.reference {
            prob = prob.with_reference_solution(r.sample(grid, base)?)?;
        }
        Ok(prob)
    }

    pub fn problem(&self, ops: &Operators) -> Result<ProblemSpec> {
        self.problem_on(&self.problem.grid, ops)
    }

    pub fn continuation_config(&self) -> ContinuationConfig {
        let mut c = self.continuation.clone();
        c.seed = self.seed;
        c
    }
}
