//! Monotone wide-stencil discretization in control form.
//!
//! Every operator is written as `inf_α sup_β L_{α,β}` over linear stencils
//! `L(u)(x) = -Σ_k b_k Δ_k u(x) + c`, where
//! `Δ_k u(x) = (u(x + h e_k) - 2u(x) + u(x - h e_k)) / h²` approximates
//! `e_kᵀ D²u(x) e_k` and every `b_k ≥ 0`. Nonnegative weights make the
//! residual nonincreasing in each neighbour value.

use super::{Grid, GridFunction};
use crate::error::{Error, Result};
use crate::operators::{Control, EllipticityPair, OperatorKind, OperatorSpec, SymMatrix};

pub const MAX_DIRECTIONS: usize = 4;

const DECOMPOSITION_TOL: f64 = 1e-12;

/// Lattice directions of the stencil (reach 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StencilSet {
    directions: Vec<[i32; 2]>,
}

impl StencilSet {
    /// Axes plus both diagonals in 2D; the single axis in 1D.
    pub fn standard(dim: usize) -> Self {
        match dim {
            1 => Self {
                directions: vec![[1, 0]],
            },
            _ => Self {
                directions: vec![[1, 0], [0, 1], [1, 1], [1, -1]],
            },
        }
    }

    pub fn axes(dim: usize) -> Self {
        match dim {
            1 => Self::standard(1),
            _ => Self {
                directions: vec![[1, 0], [0, 1]],
            },
        }
    }

    pub fn directions(&self) -> &[[i32; 2]] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    fn has_diagonals(&self) -> bool {
        self.directions.len() == 4
    }
}

/// `u ↦ -Σ_k coeffs[k] Δ_k u + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearStencil {
    pub coeffs: [f64; MAX_DIRECTIONS],
    pub offset: f64,
}

impl LinearStencil {
    #[inline]
    pub fn value(&self, diffs: &[f64; MAX_DIRECTIONS]) -> f64 {
        let mut acc = self.offset;
        for k in 0..MAX_DIRECTIONS {
            acc -= self.coeffs[k] * diffs[k];
        }
        acc
    }

    pub fn linear_part(&self) -> Self {
        Self {
            coeffs: self.coeffs,
            offset: 0.0,
        }
    }
}

/// Per-node discrete operator: `inf` over groups of `sup` within a group.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeOperator {
    groups: Vec<Vec<LinearStencil>>,
}

impl NodeOperator {
    pub fn new(groups: Vec<Vec<LinearStencil>>) -> Result<Self> {
        if groups.is_empty() || groups.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter("empty control set".into()));
        }
        Ok(Self { groups })
    }

    /// Pure supremum over one control set.
    pub fn sup_of(stencils: Vec<LinearStencil>) -> Result<Self> {
        Self::new(vec![stencils])
    }

    /// Pure infimum over one control set.
    pub fn inf_of(stencils: Vec<LinearStencil>) -> Result<Self> {
        Self::new(stencils.into_iter().map(|s| vec![s]).collect())
    }

    pub fn groups(&self) -> &[Vec<LinearStencil>] {
        &self.groups
    }

    pub fn stencil(&self, alpha: usize, beta: usize) -> &LinearStencil {
        &self.groups[alpha][beta]
    }

    /// Every linear stencil, flattened.
    pub fn stencils(&self) -> impl Iterator<Item = &LinearStencil> {
        self.groups.iter().flatten()
    }

    #[inline]
    pub fn group_sup(&self, alpha: usize, diffs: &[f64; MAX_DIRECTIONS]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (b, s) in self.groups[alpha].iter().enumerate() {
            let v = s.value(diffs);
            if v > best.1 {
                best = (b, v);
            }
        }
        best
    }

    #[inline]
    pub fn value(&self, diffs: &[f64; MAX_DIRECTIONS]) -> f64 {
        (0..self.groups.len())
            .map(|a| self.group_sup(a, diffs).1)
            .fold(f64::INFINITY, f64::min)
    }

    /// Value at `M` computed through the stencils, i.e. with `Δ_k` replaced by `e_kᵀ M e_k`.
    pub fn value_at_matrix(&self, stencils: &StencilSet, m: &SymMatrix) -> f64 {
        let mut diffs = [0.0; MAX_DIRECTIONS];
        for (k, e) in stencils.directions().iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    acc += e[i] as f64 * m.get(i, j) * e[j] as f64;
                }
            }
            diffs[k] = acc;
        }
        self.value(&diffs)
    }
}

/// Nonnegative stencil weights `b` with `A = Σ_k b_k e_k e_kᵀ`.
pub fn decompose(a: &SymMatrix, stencils: &StencilSet) -> Result<[f64; MAX_DIRECTIONS]> {
    let mut b = [0.0; MAX_DIRECTIONS];
    match a.dim() {
        1 => {
            if a.get(0, 0) < 0.0 {
                return Err(Error::Monotonicity(format!("negative coefficient {}", a.get(0, 0))));
            }
            b[0] = a.get(0, 0);
        }
        2 => {
            let (a11, a12, a22) = (a.get(0, 0), a.get(0, 1), a.get(1, 1));
            if !stencils.has_diagonals() && a12.abs() > DECOMPOSITION_TOL {
                return Err(Error::Monotonicity(format!(
                    "off-diagonal entry {a12} needs diagonal stencil directions"
                )));
            }
            let off = a12.abs();
            if off > a11.min(a22) + DECOMPOSITION_TOL {
                return Err(Error::Monotonicity(format!(
                    "|a12| = {off} exceeds min(a11, a22) = {}",
                    a11.min(a22)
                )));
            }
            b[0] = (a11 - off).max(0.0);
            b[1] = (a22 - off).max(0.0);
            if stencils.has_diagonals() {
                b[2] = a12.max(0.0);
                b[3] = (-a12).max(0.0);
            }
        }
        d => {
            return Err(Error::InvalidParameter(format!(
                "the scheme supports dimensions 1 and 2, got {d}"
            )))
        }
    }
    Ok(b)
}

fn control_stencil(c: &Control, stencils: &StencilSet) -> Result<LinearStencil> {
    Ok(LinearStencil {
        coeffs: decompose(&c.a, stencils)?,
        offset: c.c,
    })
}

/// Axis-aligned stencils with per-axis coefficients in `{λ, Λ}`.
pub fn pucci_corners(dim: usize, e: EllipticityPair) -> Vec<LinearStencil> {
    let pick = |bit: bool| if bit { e.big_lambda() } else { e.lambda() };
    let count = 1usize << dim;
    (0..count)
        .map(|mask| {
            let mut coeffs = [0.0; MAX_DIRECTIONS];
            for (k, c) in coeffs.iter_mut().enumerate().take(dim) {
                *c = pick(mask & (1 << k) != 0);
            }
            LinearStencil { coeffs, offset: 0.0 }
        })
        .collect()
}

/// Control-form discretization of an operator.
///
/// Pucci operators use per-axis coefficient controls in `{λ, Λ}`; this is
/// exact on diagonal Hessians. Linear controls are decomposed onto the
/// stencil directions and rejected with [`Error::Monotonicity`] when no
/// nonnegative decomposition exists.
pub fn discretize_operator(spec: &OperatorSpec, stencils: &StencilSet) -> Result<NodeOperator> {
    if spec.dim() > 2 {
        return Err(Error::InvalidParameter(format!(
            "the scheme supports dimensions 1 and 2, got {}",
            spec.dim()
        )));
    }
    let e = spec.ellipticity();
    match spec.kind() {
        OperatorKind::PucciPlus => NodeOperator::sup_of(pucci_corners(spec.dim(), e)),
        OperatorKind::PucciMinus => NodeOperator::inf_of(pucci_corners(spec.dim(), e)),
        OperatorKind::Affine(c) => NodeOperator::sup_of(vec![control_stencil(c, stencils)?]),
        OperatorKind::Bellman(cs) => NodeOperator::sup_of(
            cs.iter()
                .map(|c| control_stencil(c, stencils))
                .collect::<Result<_>>()?,
        ),
        OperatorKind::Isaacs(groups) => NodeOperator::new(
            groups
                .iter()
                .map(|g| g.iter().map(|c| control_stencil(c, stencils)).collect())
                .collect::<Result<_>>()?,
        ),
    }
}

/// Normalised directional second difference `(u(x+he) - 2u(x) + u(x-he)) / (h²|e|²)`.
pub fn second_difference(u: &GridFunction, idx: usize, e: [i32; 2]) -> Result<f64> {
    let g = u.grid();
    let (Some(p), Some(m)) = (g.shift(idx, e), g.shift(idx, [-e[0], -e[1]])) else {
        return Err(Error::InvalidParameter(format!(
            "node {idx} has no neighbours along {e:?}"
        )));
    };
    let norm2 = (e[0] * e[0] + e[1] * e[1]) as f64;
    let h = g.spacing();
    Ok((u.get(p) - 2.0 * u.get(idx) + u.get(m)) / (h * h * norm2))
}

/// Per-node weight of one operator part.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Uniform(f64),
    Field(Vec<f64>),
}

impl Weight {
    #[inline]
    pub fn at(&self, idx: usize) -> f64 {
        match self {
            Weight::Uniform(w) => *w,
            Weight::Field(v) => v[idx],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemePart {
    pub op: NodeOperator,
    pub weight: Weight,
}

/// Grid-level discrete operator `x ↦ Σ_p w_p(x) · op_p(Δu(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOperator {
    grid: Grid,
    stencils: StencilSet,
    parts: Vec<SchemePart>,
    /// Neighbour indices `(x + h e_k, x - h e_k)` for every interior node.
    neighbours: Vec<[(usize, usize); MAX_DIRECTIONS]>,
}

impl SchemeOperator {
    pub fn new(grid: Grid, stencils: StencilSet, parts: Vec<SchemePart>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("scheme needs at least one part".into()));
        }
        for p in &parts {
            if let Weight::Field(v) = &p.weight {
                if v.len() != grid.len() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.len(),
                        found: v.len(),
                    });
                }
            }
        }
        let mut neighbours = vec![[(0, 0); MAX_DIRECTIONS]; grid.len()];
        for idx in grid.interior() {
            for (k, e) in stencils.directions().iter().enumerate() {
                let p = grid.shift(idx, *e).expect("interior node has neighbours");
                let m = grid.shift(idx, [-e[0], -e[1]]).expect("interior node has neighbours");
                neighbours[idx][k] = (p, m);
            }
        }
        Ok(Self {
            grid,
            stencils,
            parts,
            neighbours,
        })
    }

    /// Discretizes a single operator on a grid with the standard stencil.
    pub fn single(grid: Grid, spec: &OperatorSpec) -> Result<Self> {
        if spec.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: spec.dim(),
            });
        }
        let stencils = StencilSet::standard(grid.dim());
        let op = discretize_operator(spec, &stencils)?;
        Self::new(
            grid,
            stencils,
            vec![SchemePart {
                op,
                weight: Weight::Uniform(1.0),
            }],
        )
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn stencils(&self) -> &StencilSet {
        &self.stencils
    }

    #[inline]
    pub fn parts(&self) -> &[SchemePart] {
        &self.parts
    }

    #[inline]
    pub fn neighbours(&self, idx: usize) -> &[(usize, usize); MAX_DIRECTIONS] {
        &self.neighbours[idx]
    }

    /// Raw differences `Δ_k u(x)` at an interior node.
    #[inline]
    pub fn differences(&self, u: &[f64], idx: usize) -> [f64; MAX_DIRECTIONS] {
        let h2 = self.grid.spacing() * self.grid.spacing();
        let mut d = [0.0; MAX_DIRECTIONS];
        let c = u[idx];
        for (k, &(p, m)) in self.neighbours[idx].iter().take(self.stencils.len()).enumerate() {
            d[k] = (u[p] - 2.0 * c + u[m]) / h2;
        }
        d
    }

    /// Operator value at an interior node (without the right-hand side).
    #[inline]
    pub fn value_at(&self, u: &[f64], idx: usize) -> f64 {
        let d = self.differences(u, idx);
        self.parts
            .iter()
            .map(|p| p.weight.at(idx) * p.op.value(&d))
            .sum()
    }

    /// `G(u) - f` at interior nodes, 0 at boundary nodes.
    pub fn residual(&self, u: &GridFunction, f: &GridFunction) -> Vec<f64> {
        let mut r = vec![0.0; self.grid.len()];
        for idx in self.grid.interior() {
            r[idx] = self.value_at(u.values(), idx) - f.get(idx);
        }
        r
    }

    pub fn residual_sup(&self, u: &GridFunction, f: &GridFunction) -> f64 {
        self.residual(u, f).iter().fold(0.0, |a, r| a.max(r.abs()))
    }

    /// Largest diagonal entry `Σ_k 2 b_k / h²` over all controls and nodes.
    pub fn max_diagonal(&self) -> f64 {
        let h2 = self.grid.spacing() * self.grid.spacing();
        let per_part: Vec<(f64, f64)> = self
            .parts
            .iter()
            .map(|p| {
                let wmax = match &p.weight {
                    Weight::Uniform(w) => w.abs(),
                    Weight::Field(v) => v.iter().fold(0.0_f64, |a, w| a.max(w.abs())),
                };
                let smax = p
                    .op
                    .stencils()
                    .map(|s| s.coeffs.iter().sum::<f64>())
                    .fold(0.0, f64::max);
                (wmax, smax)
            })
            .collect();
        per_part.iter().map(|(w, s)| 2.0 * w * s / h2).sum()
    }
}
