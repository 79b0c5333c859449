//! Small dense symmetric matrices (d ≤ 3).

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Symmetric `d × d` matrix, `d ∈ {1, 2, 3}`, storing only the upper triangle.
///
/// Storage order is row-major over the upper triangle:
/// `(0,0) (0,1) (0,2) (1,1) (1,2) (2,2)` for `d = 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    upper: [f64; 6],
}

const SYMMETRY_TOL: f64 = 1e-12;

fn slot(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * i.saturating_sub(1) / 2 + (j - i)
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "SymMatrix dimension must be 1, 2 or 3");
        Self {
            dim,
            upper: [0.0; 6],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, s);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// 2×2 matrix `[[a, b], [b, c]]`.
    pub fn new2(a: f64, b: f64, c: f64) -> Self {
        let mut m = Self::zeros(2);
        m.set(0, 0, a);
        m.set(0, 1, b);
        m.set(1, 1, c);
        m
    }

    /// Builds from full row-major rows; rejects asymmetry above `1e-12` and non-finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "matrix dimension {dim} not in 1..=3"
            )));
        }
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite matrix entry".into()));
            }
        }
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let gap = (rows[i][j] - rows[j][i]).abs();
                if gap > SYMMETRY_TOL {
                    return Err(Error::NonSymmetric { gap });
                }
                m.set(i, j, 0.5 * (rows[i][j] + rows[j][i]));
            }
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[slot(self.dim, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = slot(self.dim, i, j);
        self.upper[k] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(self · other)` for symmetric arguments.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            acc += self.get(i, i) * other.get(i, i);
            for j in (i + 1)..self.dim {
                acc += 2.0 * self.get(i, j) * other.get(i, j);
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.dim {
            1 => vec![self.get(0, 0)],
            2 => {
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let mid = 0.5 * (a + c);
                let rad = (0.5 * (a - c)).hypot(b);
                vec![mid - rad, mid + rad]
            }
            _ => {
                let m = nalgebra::Matrix3::from_fn(|i, j| self.get(i, j));
                let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
                ev.sort_by(f64::total_cmp);
                ev
            }
        }
    }

    /// Sum of positive and of negative parts of the spectrum: `(Tr M⁺, Tr M⁻)`.
    pub fn eigen_split(&self) -> (f64, f64) {
        let mut plus = 0.0;
        let mut minus = 0.0;
        for e in self.eigenvalues() {
            if e > 0.0 {
                plus += e;
            } else {
                minus -= e;
            }
        }
        (plus, minus)
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .fold(0.0_f64, |acc, e| acc.max(e.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        for v in out.upper.iter_mut() {
            *v = f(*v);
        }
        out
    }

    fn zip(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dim, other.dim, "SymMatrix dimension mismatch");
        let mut out = *self;
        for (o, b) in out.upper.iter_mut().zip(other.upper.iter()) {
            *o = f(*o, *b);
        }
        out
    }
}

impl Add for SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: SymMatrix) -> SymMatrix {
        self.zip(&rhs, |a, b| a + b)
    }
}

impl Sub for SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: SymMatrix) -> SymMatrix {
        self.zip(&rhs, |a, b| a - b)
    }
}

impl Neg for SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.map(|a| -a)
    }
}

impl Mul<SymMatrix> for f64 {
    type Output = SymMatrix;
    fn mul(self, rhs: SymMatrix) -> SymMatrix {
        rhs.map(|a| self * a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_slots_are_distinct() {
        for dim in 1..=3 {
            let mut seen = Vec::new();
            for i in 0..dim {
                for j in i..dim {
                    let s = slot(dim, i, j);
                    assert!(s < 6);
                    assert!(!seen.contains(&s), "dim {dim} ({i},{j}) collides");
                    seen.push(s);
                    assert_eq!(s, slot(dim, j, i));
                }
            }
            assert_eq!(seen.len(), dim * (dim + 1) / 2);
        }
    }

    #[test]
    fn eigen_split_examples() {
        assert_eq!(SymMatrix::diag(&[1.0, -1.0]).eigen_split(), (1.0, 1.0));
        assert_eq!(SymMatrix::zeros(2).eigen_split(), (0.0, 0.0));
        assert_eq!(SymMatrix::new2(2.0, 1.0, 2.0).eigen_split(), (4.0, 0.0));
    }

    #[test]
    fn three_by_three_spectrum() {
        let m = SymMatrix::from_rows(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ])
        .unwrap();
        let ev = m.eigenvalues();
        let s = 2f64.sqrt();
        for (got, want) in ev.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((got - want).abs() < 1e-12);
        }
        let (p, n) = m.eigen_split();
        assert!((p - n - m.trace()).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric_rows() {
        let err = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NonSymmetric { .. }));
    }

    #[test]
    fn trace_product_matches_dense() {
        let a = SymMatrix::new2(1.0, 0.3, 2.0);
        let m = SymMatrix::new2(-0.5, 4.0, 3.0);
        let dense = 1.0 * -0.5 + 0.3 * 4.0 + 0.3 * 4.0 + 2.0 * 3.0;
        assert!((a.trace_product(&m) - dense).abs() < 1e-15);
    }
}
