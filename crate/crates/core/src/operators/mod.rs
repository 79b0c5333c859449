//! Uniformly elliptic operators on symmetric matrices.
//!
//! Sign convention: an operator `F` is *decreasing* in its matrix argument,
//! so that `F(D²u) = f` with `F(M) = -Tr(M)` is the Poisson problem
//! `-Δu = f`. The ellipticity condition reads
//! `P⁻(M - N) ≤ F(M) - F(N) ≤ P⁺(M - N)` for all symmetric `M, N`.

mod estimate;
mod json;
mod matrix;

pub use estimate::{
    beta_oscillation, check_convexity, check_ellipticity, estimate_closeness, ClosenessReport,
    EllipticityCheck, MatrixSampler,
};
pub use json::OperatorJson;
pub use matrix::SymMatrix;

use crate::error::{Error, Result};

/// Absolute slack used when validating coefficient bounds `λI ≤ A ≤ ΛI`.
pub const BOUNDS_TOL: f64 = 1e-12;

/// Ellipticity constants `0 < λ ≤ Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityPair {
    lambda: f64,
    big_lambda: f64,
}

impl EllipticityPair {
    pub fn new(lambda: f64, big_lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && big_lambda.is_finite()) || lambda <= 0.0 || big_lambda < lambda
        {
            return Err(Error::InvalidParameter(format!(
                "ellipticity pair requires 0 < lambda <= Lambda, got ({lambda}, {big_lambda})"
            )));
        }
        Ok(Self { lambda, big_lambda })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }
}

/// `P⁺(M) = -λ Tr(M⁺) + Λ Tr(M⁻)`.
pub fn pucci_plus(m: &SymMatrix, e: EllipticityPair) -> f64 {
    let (tp, tm) = m.eigen_split();
    -e.lambda * tp + e.big_lambda * tm
}

/// `P⁻(M) = -Λ Tr(M⁺) + λ Tr(M⁻)`.
pub fn pucci_minus(m: &SymMatrix, e: EllipticityPair) -> f64 {
    let (tp, tm) = m.eigen_split();
    -e.big_lambda * tp + e.lambda * tm
}

/// One linear control: `M ↦ -Tr(A M) + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    pub a: SymMatrix,
    pub c: f64,
}

impl Control {
    pub fn new(a: SymMatrix, c: f64) -> Self {
        Self { a, c }
    }

    #[inline]
    pub fn apply(&self, m: &SymMatrix) -> f64 {
        -self.a.trace_product(m) + self.c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    PucciPlus,
    PucciMinus,
    Affine(Control),
    /// `sup_β (-Tr(A_β M) + c_β)`
    Bellman(Vec<Control>),
    /// `inf_α sup_β (-Tr(A_{α,β} M) + c_{α,β})`, outer index is α.
    Isaacs(Vec<Vec<Control>>),
}

/// Declarative `(λ, Λ)`-elliptic operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    dim: usize,
    kind: OperatorKind,
    ellipticity: EllipticityPair,
}

impl OperatorSpec {
    /// Builds an operator and validates every coefficient matrix against `λI ≤ A ≤ ΛI`.
    pub fn new(dim: usize, kind: OperatorKind, ellipticity: EllipticityPair) -> Result<Self> {
        let spec = Self::new_unchecked(dim, kind, ellipticity)?;
        spec.validate_bounds()?;
        Ok(spec)
    }

    /// Builds an operator checking only structural consistency (dimensions,
    /// non-empty control sets). Used by diagnostics that must be able to
    /// report on operators violating their stated bounds.
    pub fn new_unchecked(
        dim: usize,
        kind: OperatorKind,
        ellipticity: EllipticityPair,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "operator dimension {dim} not in 1..=3"
            )));
        }
        let spec = Self {
            dim,
            kind,
            ellipticity,
        };
        match &spec.kind {
            OperatorKind::Bellman(cs) if cs.is_empty() => {
                return Err(Error::InvalidParameter("empty Bellman control set".into()))
            }
            OperatorKind::Isaacs(groups)
                if groups.is_empty() || groups.iter().any(|g| g.is_empty()) =>
            {
                return Err(Error::InvalidParameter("empty Isaacs control set".into()))
            }
            _ => {}
        }
        for c in spec.controls() {
            if c.a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.a.dim(),
                });
            }
            if !c.a.is_finite() || !c.c.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        Ok(spec)
    }

    pub fn pucci_plus(dim: usize, e: EllipticityPair) -> Self {
        Self::new(dim, OperatorKind::PucciPlus, e).expect("valid dimension")
    }

    pub fn pucci_minus(dim: usize, e: EllipticityPair) -> Self {
        Self::new(dim, OperatorKind::PucciMinus, e).expect("valid dimension")
    }

    pub fn affine(a: SymMatrix, c: f64, e: EllipticityPair) -> Result<Self> {
        Self::new(a.dim(), OperatorKind::Affine(Control::new(a, c)), e)
    }

    pub fn bellman(controls: Vec<Control>, e: EllipticityPair) -> Result<Self> {
        let dim = controls.first().map(|c| c.a.dim()).unwrap_or(0);
        Self::new(dim, OperatorKind::Bellman(controls), e)
    }

    pub fn isaacs(groups: Vec<Vec<Control>>, e: EllipticityPair) -> Result<Self> {
        let dim = groups
            .first()
            .and_then(|g| g.first())
            .map(|c| c.a.dim())
            .unwrap_or(0);
        Self::new(dim, OperatorKind::Isaacs(groups), e)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    #[inline]
    pub fn ellipticity(&self) -> EllipticityPair {
        self.ellipticity
    }

    /// All linear controls (empty for the Pucci operators).
    pub fn controls(&self) -> Vec<&Control> {
        match &self.kind {
            OperatorKind::PucciPlus | OperatorKind::PucciMinus => Vec::new(),
            OperatorKind::Affine(c) => vec![c],
            OperatorKind::Bellman(cs) => cs.iter().collect(),
            OperatorKind::Isaacs(groups) => groups.iter().flatten().collect(),
        }
    }

    /// Checks `λI ≤ A ≤ ΛI` (up to [`BOUNDS_TOL`]) for every coefficient matrix.
    pub fn validate_bounds(&self) -> Result<()> {
        let e = self.ellipticity;
        for c in self.controls() {
            let ev = c.a.eigenvalues();
            let (lo, hi) = (ev[0], ev[ev.len() - 1]);
            if lo < e.lambda - BOUNDS_TOL || hi > e.big_lambda + BOUNDS_TOL {
                return Err(Error::EllipticityBounds {
                    min_eig: lo,
                    max_eig: hi,
                    lambda: e.lambda,
                    big_lambda: e.big_lambda,
                });
            }
        }
        Ok(())
    }

    /// Whether the operator is convex in `M` by construction.
    pub fn is_convex_kind(&self) -> bool {
        match &self.kind {
            OperatorKind::PucciPlus | OperatorKind::Affine(_) | OperatorKind::Bellman(_) => true,
            OperatorKind::PucciMinus => self.ellipticity.lambda == self.ellipticity.big_lambda,
            OperatorKind::Isaacs(groups) => groups.len() == 1,
        }
    }

    /// Evaluates `F(M)`.
    pub fn eval(&self, m: &SymMatrix) -> Result<f64> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        Ok(self.value(m))
    }

    /// Evaluates `F(M)` without the dimension check.
    pub fn value(&self, m: &SymMatrix) -> f64 {
        debug_assert_eq!(m.dim(), self.dim);
        match &self.kind {
            OperatorKind::PucciPlus => pucci_plus(m, self.ellipticity),
            OperatorKind::PucciMinus => pucci_minus(m, self.ellipticity),
            OperatorKind::Affine(c) => c.apply(m),
            OperatorKind::Bellman(cs) => sup_over(cs, m),
            OperatorKind::Isaacs(groups) => groups
                .iter()
                .map(|g| sup_over(g, m))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `F(0)`.
    pub fn at_zero(&self) -> f64 {
        self.value(&SymMatrix::zeros(self.dim))
    }
}

fn sup_over(controls: &[Control], m: &SymMatrix) -> f64 {
    controls
        .iter()
        .map(|c| c.apply(m))
        .fold(f64::NEG_INFINITY, f64::max)
}
