//! Mollified sign indicator and the frozen two-phase operator.
//!
//! For a state `v` and a width `ε > 0`, the indicator is
//! `h = clamp((v + ε) / 2ε, 0, 1) * η_ε` (zero outside the domain), and the
//! frozen operator is `G(x, M) = h(x) F1(M) + (1 - h(x)) F2(M)`.

use crate::discretization::{
    discretize_operator, Grid, GridFunction, SchemeOperator, SchemePart, StencilSet, Weight,
};
use crate::error::{Error, Result};
use crate::operators::{OperatorSpec, SymMatrix};

/// `max(min((t + ε) / 2ε, 1), 0)`.
pub fn clamp_profile(t: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    Ok(((t + eps) / (2.0 * eps)).clamp(0.0, 1.0))
}

/// Discrete mollifier: lattice offsets and weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub offsets: Vec<[i32; 2]>,
    pub weights: Vec<f64>,
}

impl Kernel {
    pub fn identity() -> Self {
        Self {
            offsets: vec![[0, 0]],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Samples the bump `exp(-1 / (1 - |x/ε|²))` at lattice offsets strictly
/// inside the ball of radius `ε` and renormalises. Collapses to the
/// identity when `ε ≤ h`.
pub fn mollifier_kernel(eps: f64, h: f64, dim: usize) -> Kernel {
    if !(eps > h) {
        return Kernel::identity();
    }
    let reach = (eps / h).ceil() as i32;
    let jr = if dim >= 2 { reach } else { 0 };
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    for j in -jr..=jr {
        for i in -reach..=reach {
            let r2 = ((i * i + j * j) as f64) * h * h / (eps * eps);
            if r2 < 1.0 {
                offsets.push([i, j]);
                weights.push((-1.0 / (1.0 - r2)).exp());
            }
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Kernel { offsets, weights }
}

/// Builds the mollified indicator of `v`.
///
/// With `extend_zero` the clamped profile is taken as zero outside the
/// grid. Otherwise the kernel is truncated and renormalised at each node.
pub fn build_h(v: &GridFunction, eps: f64, extend_zero: bool) -> Result<GridFunction> {
    let grid = *v.grid();
    let gv = v
        .values()
        .iter()
        .map(|&t| clamp_profile(t, eps))
        .collect::<Result<Vec<_>>>()?;
    let kernel = mollifier_kernel(eps, grid.spacing(), grid.dim());
    let mut out = vec![0.0; grid.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut mass = 0.0;
        for (off, w) in kernel.offsets.iter().zip(&kernel.weights) {
            if let Some(s) = grid.shift(k, *off) {
                acc += w * gv[s];
                mass += w;
            }
        }
        let val = if extend_zero { acc } else { acc / mass };
        *o = val.clamp(0.0, 1.0);
    }
    GridFunction::new(grid, out)
}

/// `G(x, M) = h(x) F1(M) + (1 - h(x)) F2(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledOperator {
    h: GridFunction,
    f1: OperatorSpec,
    f2: OperatorSpec,
}

impl AssembledOperator {
    pub fn dim(&self) -> usize {
        self.f1.dim()
    }

    pub fn h(&self) -> &GridFunction {
        &self.h
    }

    pub fn f1(&self) -> &OperatorSpec {
        &self.f1
    }

    pub fn f2(&self) -> &OperatorSpec {
        &self.f2
    }

    pub fn grid(&self) -> &Grid {
        self.h.grid()
    }

    /// `G(x, M)` at node `node`.
    pub fn eval(&self, node: usize, m: &SymMatrix) -> f64 {
        let w = self.h.get(node);
        w * self.f1.value(m) + (1.0 - w) * self.f2.value(m)
    }

    /// Monotone discretization with the standard stencil.
    pub fn to_scheme(&self) -> Result<SchemeOperator> {
        let grid = *self.grid();
        let stencils = StencilSet::standard(grid.dim());
        let op1 = discretize_operator(&self.f1, &stencils)?;
        let op2 = discretize_operator(&self.f2, &stencils)?;
        let w1 = self.h.values().to_vec();
        let w2 = w1.iter().map(|w| 1.0 - w).collect();
        SchemeOperator::new(
            grid,
            stencils,
            vec![
                SchemePart {
                    op: op1,
                    weight: Weight::Field(w1),
                },
                SchemePart {
                    op: op2,
                    weight: Weight::Field(w2),
                },
            ],
        )
    }
}

/// Assembles `G` from an indicator field and the two phase operators.
pub fn assemble_g(h: GridFunction, f1: &OperatorSpec, f2: &OperatorSpec) -> Result<AssembledOperator> {
    let (e1, e2) = (f1.ellipticity(), f2.ellipticity());
    if e1 != e2 {
        return Err(Error::EllipticityMismatch(
            e1.lambda(),
            e1.big_lambda(),
            e2.lambda(),
            e2.big_lambda(),
        ));
    }
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            found: f2.dim(),
        });
    }
    if f1.dim() != h.grid().dim() {
        return Err(Error::DimensionMismatch {
            expected: h.grid().dim(),
            found: f1.dim(),
        });
    }
    if h.values().iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::InvalidParameter("indicator values must lie in [0, 1]".into()));
    }
    Ok(AssembledOperator {
        h,
        f1: f1.clone(),
        f2: f2.clone(),
    })
}
