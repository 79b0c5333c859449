//! Frozen-coefficient Dirichlet problems and the Pucci barriers.

mod linear;
mod policy;

pub use linear::{linear_solve, LinearSystem, DIRECT_LIMIT, SOR_OMEGA};
pub use policy::{howard, Policy};

use serde::{Deserialize, Serialize};

use crate::discretization::{
    discretize_operator, lp_norm, pucci_corners, GridFunction, LinearStencil, NodeOperator,
    SchemeOperator, SchemePart, StencilSet, Weight,
};
use crate::error::{Error, Result};
use crate::operators::OperatorSpec;
use crate::regularization::AssembledOperator;

/// Default stopping tolerance relative to [`problem_scale`].
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Per-solve bookkeeping.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    /// Number of linear solves.
    pub iterations: usize,
    pub final_residual: f64,
    /// Controls switched before the last linear solve.
    pub policy_changes_last: usize,
    /// Seconds.
    pub wall_time: f64,
    /// Residual sup-norm at the start and after every linear solve.
    pub residual_history: Vec<f64>,
}

/// `G(x, D²u) = f` in the interior, `u = g` on the boundary.
#[derive(Debug, Clone)]
pub struct FrozenProblem {
    scheme: SchemeOperator,
    f: GridFunction,
    g: GridFunction,
}

impl FrozenProblem {
    pub fn new(scheme: SchemeOperator, f: GridFunction, g: GridFunction) -> Result<Self> {
        for other in [f.grid(), g.grid()] {
            if other != scheme.grid() {
                return Err(Error::DimensionMismatch {
                    expected: scheme.grid().len(),
                    found: other.len(),
                });
            }
        }
        Ok(Self { scheme, f, g })
    }

    pub fn from_operator(spec: &OperatorSpec, f: GridFunction, g: GridFunction) -> Result<Self> {
        Self::new(SchemeOperator::single(*f.grid(), spec)?, f, g)
    }

    pub fn from_assembled(op: &AssembledOperator, f: GridFunction, g: GridFunction) -> Result<Self> {
        Self::new(op.to_scheme()?, f, g)
    }

    pub fn scheme(&self) -> &SchemeOperator {
        &self.scheme
    }

    pub fn f(&self) -> &GridFunction {
        &self.f
    }

    pub fn g(&self) -> &GridFunction {
        &self.g
    }

    /// `G(u) - f` at interior nodes, zero on the boundary.
    pub fn residual(&self, u: &GridFunction) -> Vec<f64> {
        self.scheme.residual(u, &self.f)
    }

    pub fn residual_sup(&self, u: &GridFunction) -> f64 {
        self.scheme.residual_sup(u, &self.f)
    }
}

/// Solves a frozen problem by policy iteration to residual sup-norm `tol`.
///
/// The result equals `g` on boundary nodes. Fails with
/// [`Error::NonConvergence`] after `max_iter` linear solves.
pub fn solve_frozen(
    prob: &FrozenProblem,
    init: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<(GridFunction, SolveStats)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    howard(prob, init, tol, max_iter)
}

/// `sup|g| + ‖f‖_p + |F1(0)| + |F2(0)| + 1`.
pub fn problem_scale(
    f1: &OperatorSpec,
    f2: &OperatorSpec,
    f: &GridFunction,
    g: &GridFunction,
    p: f64,
) -> f64 {
    let sup_g = g
        .grid()
        .boundary()
        .into_iter()
        .fold(0.0_f64, |a, k| a.max(g.get(k).abs()));
    sup_g + lp_norm(f, p) + f1.at_zero().abs() + f2.at_zero().abs() + 1.0
}

/// Linear parts of every stencil any phase operator can select, together
/// with the Pucci corners. Its infimum and supremum bound every discretized
/// phase operator from below and above.
pub fn barrier_hull(
    f1: &OperatorSpec,
    f2: &OperatorSpec,
    stencils: &StencilSet,
) -> Result<Vec<LinearStencil>> {
    let mut hull = pucci_corners(f1.dim(), f1.ellipticity());
    for spec in [f1, f2] {
        for s in discretize_operator(spec, stencils)?.stencils() {
            let lin = s.linear_part();
            if !hull.contains(&lin) {
                hull.push(lin);
            }
        }
    }
    Ok(hull)
}

/// Sub- and supersolution enclosing every frozen solution.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierPair {
    pub lower: GridFunction,
    pub upper: GridFunction,
}

impl BarrierPair {
    pub fn midpoint(&self) -> GridFunction {
        self.lower.zip_map(&self.upper, |a, b| 0.5 * (a + b))
    }

    /// Clips `v` nodewise into `[lower, upper]`.
    pub fn clip(&self, v: &GridFunction) -> GridFunction {
        let mut out = v.clone();
        for (k, x) in out.values_mut().iter_mut().enumerate() {
            *x = x.clamp(self.lower.get(k), self.upper.get(k));
        }
        out
    }

    pub fn oscillation(&self) -> f64 {
        self.upper.max() - self.lower.min()
    }
}

/// Barriers with the default tolerance.
pub fn compute_barriers(
    f1: &OperatorSpec,
    f2: &OperatorSpec,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<BarrierPair> {
    let tol = DEFAULT_TOL * problem_scale(f1, f2, f, g, 2.0);
    compute_barriers_with(f1, f2, f, g, tol, DEFAULT_MAX_ITER)
}

/// `P⁻_h(ū) = f + |F1(0)| + |F2(0)|` and `P⁺_h(u̲) = f - |F1(0)| - |F2(0)|`,
/// where `P∓_h` are the infimum and supremum over [`barrier_hull`].
pub fn compute_barriers_with(
    f1: &OperatorSpec,
    f2: &OperatorSpec,
    f: &GridFunction,
    g: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<BarrierPair> {
    if f1.ellipticity() != f2.ellipticity() {
        let (a, b) = (f1.ellipticity(), f2.ellipticity());
        return Err(Error::EllipticityMismatch(
            a.lambda(),
            a.big_lambda(),
            b.lambda(),
            b.big_lambda(),
        ));
    }
    let grid = *f.grid();
    let stencils = StencilSet::standard(grid.dim());
    let hull = barrier_hull(f1, f2, &stencils)?;
    let shift = f1.at_zero().abs() + f2.at_zero().abs();
    let solve = |op: NodeOperator, sign: f64| -> Result<GridFunction> {
        let scheme = SchemeOperator::new(
            grid,
            stencils.clone(),
            vec![SchemePart {
                op,
                weight: Weight::Uniform(1.0),
            }],
        )?;
        let rhs = f.map(|v| v + sign * shift);
        let prob = FrozenProblem::new(scheme, rhs, g.clone())?;
        let init = GridFunction::zeros(grid).with_boundary_of(g);
        Ok(solve_frozen(&prob, &init, tol, max_iter)?.0)
    };
    let upper = solve(NodeOperator::inf_of(hull.clone())?, 1.0)?;
    let lower = solve(NodeOperator::sup_of(hull)?, -1.0)?;
    Ok(BarrierPair { lower, upper })
}

/// Outcome of [`sandwich_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub passed: bool,
    /// `min (u - u̲)`.
    pub lower_margin: f64,
    /// `min (ū - u)`.
    pub upper_margin: f64,
}

/// Checks `u̲ - slack ≤ u ≤ ū + slack` at every node.
pub fn sandwich_check(u: &GridFunction, barriers: &BarrierPair, slack: f64) -> SandwichCheck {
    let lower_margin = u
        .values()
        .iter()
        .zip(barriers.lower.values())
        .fold(f64::INFINITY, |a, (x, l)| a.min(x - l));
    let upper_margin = u
        .values()
        .iter()
        .zip(barriers.upper.values())
        .fold(f64::INFINITY, |a, (x, h)| a.min(h - x));
    SandwichCheck {
        passed: lower_margin >= -slack && upper_margin >= -slack,
        lower_margin,
        upper_margin,
    }
}
