//! Dirichlet problems for a single linear monotone stencil per node.

use crate::discretization::{Grid, GridFunction, StencilSet, MAX_DIRECTIONS};
use crate::error::{Error, Result};

use super::SolveStats;

/// Systems with at most this many unknowns are factored directly.
pub const DIRECT_LIMIT: usize = 20_000;
pub const SOR_OMEGA: f64 = 1.5;
pub const SOR_MAX_SWEEPS: usize = 200_000;

/// `-Σ_k b_k(x) Δ_k u(x) = rhs(x)` at interior nodes, `u = g` on the boundary.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    grid: Grid,
    stencils: StencilSet,
    coeffs: Vec<[f64; MAX_DIRECTIONS]>,
    rhs: Vec<f64>,
    boundary: GridFunction,
}

impl LinearSystem {
    pub fn new(
        stencils: StencilSet,
        coeffs: Vec<[f64; MAX_DIRECTIONS]>,
        rhs: Vec<f64>,
        boundary: GridFunction,
    ) -> Result<Self> {
        let grid = *boundary.grid();
        for len in [coeffs.len(), rhs.len()] {
            if len != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    found: len,
                });
            }
        }
        if coeffs.iter().flatten().any(|b| !(*b >= 0.0)) {
            return Err(Error::Monotonicity("negative stencil weight".into()));
        }
        Ok(Self {
            grid,
            stencils,
            coeffs,
            rhs,
            boundary,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Equation residual `rhs + Σ b_k Δ_k u` at an interior node.
    fn residual_at(&self, u: &[f64], k: usize) -> f64 {
        let h2 = self.grid.spacing().powi(2);
        let mut acc = self.rhs[k];
        for (d, e) in self.stencils.directions().iter().enumerate() {
            let b = self.coeffs[k][d];
            if b == 0.0 {
                continue;
            }
            let p = self.grid.shift(k, *e).expect("interior node");
            let m = self.grid.shift(k, [-e[0], -e[1]]).expect("interior node");
            acc += b * (u[p] - 2.0 * u[k] + u[m]) / h2;
        }
        acc
    }

    /// Largest absolute equation residual over interior nodes.
    pub fn residual_sup(&self, u: &GridFunction) -> f64 {
        self.grid
            .interior()
            .into_iter()
            .fold(0.0, |a, k| a.max(self.residual_at(u.values(), k).abs()))
    }
}

/// Solves a linear system to absolute residual `tol`.
///
/// Small systems use banded LU without pivoting (the matrix is an M-matrix
/// so every pivot is positive) followed by one refinement step. Larger ones
/// use SOR sweeps in node order starting from `init`.
pub fn linear_solve(sys: &LinearSystem, init: Option<&GridFunction>, tol: f64) -> Result<GridFunction> {
    let interior = sys.grid.interior();
    if interior.len() <= DIRECT_LIMIT {
        direct_solve(sys, &interior)
    } else {
        sor_solve(sys, init, tol)
    }
}

struct Banded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl Banded {
    #[inline]
    fn width(&self) -> usize {
        2 * self.bw + 1
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        let w = self.width();
        &mut self.data[i * w + j + self.bw - i]
    }

    fn factor(&mut self) -> Result<()> {
        let (n, bw, w) = (self.n, self.bw, self.width());
        for k in 0..n {
            let pivot = self.data[k * w + bw];
            if !(pivot > 0.0) {
                return Err(Error::Monotonicity(format!("non-positive pivot {pivot} at row {k}")));
            }
            let last = (k + bw).min(n - 1);
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let row_k = &head[k * w..];
            // columns k+1..=last of row k
            let upper = &row_k[bw + 1..bw + 1 + (last - k)];
            for i in k + 1..=last {
                let row_i = &mut tail[(i - k - 1) * w..(i - k) * w];
                let col = k + bw - i;
                let l = row_i[col] / pivot;
                row_i[col] = l;
                if l == 0.0 {
                    continue;
                }
                let start = col + 1;
                for (a, b) in row_i[start..start + upper.len()].iter_mut().zip(upper) {
                    *a -= l * b;
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.width());
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = b[i];
            for j in lo..i {
                acc -= row[j + bw - i] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = b[i];
            for j in i + 1..=hi {
                acc -= row[j + bw - i] * b[j];
            }
            b[i] = acc / row[bw];
        }
    }
}

fn direct_solve(sys: &LinearSystem, interior: &[usize]) -> Result<GridFunction> {
    let g = &sys.grid;
    let mut u = sys.boundary.clone();
    if interior.is_empty() {
        return Ok(u);
    }
    let mut pos = vec![usize::MAX; g.len()];
    for (r, &k) in interior.iter().enumerate() {
        pos[k] = r;
    }
    let n = interior.len();
    let bw = if g.dim() == 1 { 1 } else { g.shape()[0] - 1 }.min(n - 1);
    let mut band = Banded {
        n,
        bw,
        data: vec![0.0; n * (2 * bw + 1)],
    };
    let h2 = g.spacing().powi(2);
    let mut rhs = vec![0.0; n];
    for (r, &k) in interior.iter().enumerate() {
        rhs[r] = sys.rhs[k];
        for (d, e) in sys.stencils.directions().iter().enumerate() {
            let c = sys.coeffs[k][d] / h2;
            if c == 0.0 {
                continue;
            }
            *band.at(r, r) += 2.0 * c;
            for nb in [g.shift(k, *e), g.shift(k, [-e[0], -e[1]])] {
                let nb = nb.expect("interior node");
                if pos[nb] == usize::MAX {
                    rhs[r] += c * sys.boundary.get(nb);
                } else {
                    *band.at(r, pos[nb]) -= c;
                }
            }
        }
    }
    band.factor()?;
    band.solve(&mut rhs);
    for (r, &k) in interior.iter().enumerate() {
        u.set(k, rhs[r]);
    }
    // one step of iterative refinement against the stencil form
    let mut corr: Vec<f64> = interior
        .iter()
        .map(|&k| sys.residual_at(u.values(), k))
        .collect();
    band.solve(&mut corr);
    for (r, &k) in interior.iter().enumerate() {
        u.set(k, u.get(k) + corr[r]);
    }
    Ok(u)
}

fn sor_solve(sys: &LinearSystem, init: Option<&GridFunction>, tol: f64) -> Result<GridFunction> {
    let g = &sys.grid;
    let mut u = match init {
        Some(v) => v.clone().with_boundary_of(&sys.boundary),
        None => sys.boundary.clone(),
    };
    let interior = g.interior();
    let h2 = g.spacing().powi(2);
    let dirs = sys.stencils.directions();
    let mut history = Vec::new();
    for sweep in 1..=SOR_MAX_SWEEPS {
        let vals = u.values_mut();
        for &k in &interior {
            let mut diag = 0.0;
            let mut acc = sys.rhs[k];
            for (d, e) in dirs.iter().enumerate() {
                let c = sys.coeffs[k][d] / h2;
                if c == 0.0 {
                    continue;
                }
                let p = g.shift(k, *e).expect("interior node");
                let m = g.shift(k, [-e[0], -e[1]]).expect("interior node");
                diag += 2.0 * c;
                acc += c * (vals[p] + vals[m]);
            }
            vals[k] += SOR_OMEGA * (acc / diag - vals[k]);
        }
        if sweep % 10 == 0 {
            let r = sys.residual_sup(&u);
            history.push(r);
            if r <= tol {
                return Ok(u);
            }
        }
    }
    let final_residual = sys.residual_sup(&u);
    Err(Error::NonConvergence(SolveStats {
        iterations: SOR_MAX_SWEEPS,
        final_residual,
        policy_changes_last: 0,
        wall_time: 0.0,
        residual_history: history,
    }))
}
