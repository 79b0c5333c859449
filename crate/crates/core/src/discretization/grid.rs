use crate::error::{Error, Result};

/// Uniform box grid in one or two dimensions with square cells.
///
/// Nodes are numbered with the first axis fastest: `idx = i + n0 * j`.
/// Boundary nodes are exactly the nodes on the faces of the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    origin: [f64; 2],
    h: f64,
}

const SPACING_TOL: f64 = 1e-10;

impl Grid {
    pub fn new(origin: &[f64], extent: &[f64], n: &[usize]) -> Result<Self> {
        let dim = n.len();
        if !(1..=2).contains(&dim) || origin.len() != dim || extent.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "grid needs matching origin/extent/n of length 1 or 2 (got {}, {}, {})",
                origin.len(),
                extent.len(),
                n.len()
            )));
        }
        if n.iter().any(|&k| k < 3) {
            return Err(Error::InvalidParameter("grid needs at least 3 nodes per axis".into()));
        }
        if extent.iter().any(|&e| !(e.is_finite() && e > 0.0)) || origin.iter().any(|o| !o.is_finite())
        {
            return Err(Error::InvalidParameter("grid extent must be positive and finite".into()));
        }
        let h = extent[0] / (n[0] - 1) as f64;
        if dim == 2 {
            let h1 = extent[1] / (n[1] - 1) as f64;
            if (h1 - h).abs() > SPACING_TOL * h {
                return Err(Error::InvalidParameter(format!(
                    "cells must be square: spacing {h} vs {h1}"
                )));
            }
        }
        let mut nn = [1usize; 2];
        let mut oo = [0.0; 2];
        nn[..dim].copy_from_slice(n);
        oo[..dim].copy_from_slice(origin);
        Ok(Self {
            dim,
            n: nn,
            origin: oo,
            h,
        })
    }

    pub fn interval(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(&[a], &[b - a], &[n])
    }

    /// Square `[a, b]²` with `n` nodes per axis.
    pub fn square(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(&[a, a], &[b - a, b - a], &[n, n])
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::square(0.0, 1.0, n)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Nodes per axis.
    pub fn shape(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn extent(&self) -> Vec<f64> {
        self.shape()
            .iter()
            .map(|&k| self.h * (k - 1) as f64)
            .collect()
    }

    pub fn diam(&self) -> f64 {
        self.extent().iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    /// Lebesgue measure of the box.
    pub fn volume(&self) -> f64 {
        self.extent().iter().product()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.n[0] * j
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n[0], idx / self.n[0])
    }

    /// Physical position; the second component is 0 in one dimension.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        [
            self.origin[0] + self.h * i as f64,
            self.origin[1] + self.h * j as f64,
        ]
    }

    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.coords(idx);
        i == 0 || i + 1 == self.n[0] || (self.dim == 2 && (j == 0 || j + 1 == self.n[1]))
    }

    /// Node reached by an integer lattice step, if it lies on the grid.
    #[inline]
    pub fn shift(&self, idx: usize, step: [i32; 2]) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let ii = i as i64 + step[0] as i64;
        let jj = j as i64 + step[1] as i64;
        if ii < 0 || jj < 0 || ii >= self.n[0] as i64 || jj >= self.n[1] as i64 {
            None
        } else {
            Some(self.index(ii as usize, jj as usize))
        }
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| !self.is_boundary(k)).collect()
    }

    pub fn boundary(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_boundary(k)).collect()
    }

    /// Physical distance from a node to the nearest box face.
    pub fn distance_to_boundary(&self, idx: usize) -> f64 {
        let (i, j) = self.coords(idx);
        let mut d = i.min(self.n[0] - 1 - i);
        if self.dim == 2 {
            d = d.min(j.min(self.n[1] - 1 - j));
        }
        d as f64 * self.h
    }

    /// Interior nodes at distance at least `margin` from the boundary.
    pub fn inner_nodes(&self, margin: f64) -> Vec<usize> {
        let tol = 1e-9 * self.h;
        (0..self.len())
            .filter(|&k| !self.is_boundary(k) && self.distance_to_boundary(k) + tol >= margin)
            .collect()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (self.point(a), self.point(b));
        (pa[0] - pb[0]).hypot(pa[1] - pb[1])
    }
}

/// Real values at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("grid function has non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.point(k))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: f64) {
        self.values[idx] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `sup |self - other|` over all nodes.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Copies boundary values from `g`.
    pub fn with_boundary_of(mut self, g: &GridFunction) -> Self {
        assert_eq!(self.grid, g.grid, "grid mismatch");
        for k in self.grid.boundary() {
            self.values[k] = g.values[k];
        }
        self
    }
}
