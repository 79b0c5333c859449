//! Monotone finite-difference solver for two-phase fully nonlinear
//! elliptic problems
//!
//! ```text
//! F1(D²u) χ{u>0} + F2(D²u) χ{u<0} = f  in Ω,   u = g  on ∂Ω,
//! ```
//!
//! on boxes in one or two dimensions. The phase indicator is regularised
//! at width ε, the resulting frozen problems are solved by policy iteration
//! on a monotone wide stencil, the map `v ↦ u^v_ε` is iterated to a fixed
//! point and ε is driven to zero along a schedule.
//!
//! ```no_run
//! use free_transmission::prelude::*;
//!
//! let e = EllipticityPair::new(1.0, 2.0)?;
//! let grid = Grid::square(-1.0, 1.0, 33)?;
//! let f1 = OperatorSpec::pucci_plus(2, e);
//! let f2 = OperatorSpec::pucci_minus(2, e);
//! let f = GridFunction::zeros(grid);
//! let g = GridFunction::from_fn(grid, |p| p[0]);
//! let prob = ProblemSpec::new(f1, f2, f, g)?;
//! let report = continuation(&prob, &ContinuationConfig::default())?;
//! println!("sup|u| = {}", report.diagnostics().sup_norm);
//! # Ok::<(), free_transmission::Error>(())
//! ```

pub mod cli;
pub mod discretization;
pub mod error;
pub mod fixed_point;
pub mod frozen_solver;
pub mod operators;
pub mod oracle;
pub mod regularization;

pub use error::{Error, Result};

/// Types needed by most programs.
pub mod prelude {
    pub use crate::discretization::{DiagnosticsConfig, Grid, GridFunction};
    pub use crate::error::{Error, Result};
    pub use crate::fixed_point::{
        continuation, continuation_with, ContinuationConfig, ProblemSpec, SolveReport,
    };
    pub use crate::frozen_solver::{compute_barriers, solve_frozen, FrozenProblem};
    pub use crate::operators::{Control, EllipticityPair, OperatorSpec, SymMatrix};
}
