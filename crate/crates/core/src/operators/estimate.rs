//! Sampled sup-estimators for ellipticity, closeness and oscillation.
//!
//! All estimators are lower bounds of the true suprema: they evaluate the
//! quantity on a finite seeded sample of symmetric matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pucci_minus, pucci_plus, OperatorSpec, SymMatrix};
use crate::error::{Error, Result};
use crate::regularization::AssembledOperator;

/// Absolute slack for the ellipticity inequalities.
pub const ELLIPTICITY_SLACK: f64 = 1e-12;

/// Radii swept by the sup-estimators.
pub const RADIUS_SWEEP: [f64; 3] = [1.0, 10.0, 100.0];

/// Seeded generator of random symmetric matrices.
pub struct MatrixSampler {
    dim: usize,
    rng: ChaCha8Rng,
}

impl MatrixSampler {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Entries uniform on `[-r, r]`.
    pub fn uniform_entries(&mut self, r: f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                m.set(i, j, self.rng.random_range(-r..=r));
            }
        }
        m
    }

    /// Random rotation of a diagonal matrix whose eigenvalues are either
    /// uniform on `[-r, r]` or snapped to `±r`.
    pub fn spectral(&mut self, r: f64) -> SymMatrix {
        let eig: Vec<f64> = (0..self.dim)
            .map(|_| {
                if self.rng.random_bool(0.5) {
                    if self.rng.random_bool(0.5) {
                        r
                    } else {
                        -r
                    }
                } else {
                    self.rng.random_range(-r..=r)
                }
            })
            .collect();
        let q = self.rotation();
        let mut m = SymMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let v: f64 = (0..self.dim).map(|k| q[i][k] * eig[k] * q[j][k]).sum();
                m.set(i, j, v);
            }
        }
        m
    }

    fn rotation(&mut self) -> [[f64; 3]; 3] {
        let mut q = [[0.0; 3]; 3];
        match self.dim {
            1 => q[0][0] = 1.0,
            2 => {
                let t = self.rng.random_range(0.0..std::f64::consts::TAU);
                let (s, c) = t.sin_cos();
                q[0] = [c, -s, 0.0];
                q[1] = [s, c, 0.0];
            }
            _ => {
                // uniform unit quaternion from four normals
                let mut v = [0.0f64; 4];
                loop {
                    for x in v.iter_mut() {
                        *x = self.rng.random_range(-1.0..=1.0);
                    }
                    let n2: f64 = v.iter().map(|x| x * x).sum();
                    if n2 > 1e-6 && n2 <= 1.0 {
                        let n = n2.sqrt();
                        v.iter_mut().for_each(|x| *x /= n);
                        break;
                    }
                }
                let [w, x, y, z] = v;
                q = [
                    [
                        1.0 - 2.0 * (y * y + z * z),
                        2.0 * (x * y - z * w),
                        2.0 * (x * z + y * w),
                    ],
                    [
                        2.0 * (x * y + z * w),
                        1.0 - 2.0 * (x * x + z * z),
                        2.0 * (y * z - x * w),
                    ],
                    [
                        2.0 * (x * z - y * w),
                        2.0 * (y * z + x * w),
                        1.0 - 2.0 * (x * x + y * y),
                    ],
                ];
            }
        }
        q
    }

    /// `count` matrices cycling through [`RADIUS_SWEEP`], alternating between
    /// uniform-entry and spectral draws. The zero matrix is always included.
    pub fn sweep(&mut self, count: usize) -> Vec<SymMatrix> {
        let mut out = Vec::with_capacity(count + 1);
        out.push(SymMatrix::zeros(self.dim));
        for k in 0..count {
            let r = RADIUS_SWEEP[k % RADIUS_SWEEP.len()];
            let m = if (k / RADIUS_SWEEP.len()) % 2 == 0 {
                self.uniform_entries(r)
            } else {
                self.spectral(r)
            };
            out.push(m);
        }
        out
    }
}

/// Outcome of a sampled ellipticity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityCheck {
    pub passed: bool,
    /// Largest signed violation of `P⁻(M-N) ≤ F(M)-F(N) ≤ P⁺(M-N)`; positive means violated.
    pub worst_violation: f64,
    pub samples: usize,
}

/// Samples pairs `(M, N)` with entries in `[-10, 10]` and checks the
/// ellipticity sandwich against the operator's own `(λ, Λ)`.
pub fn check_ellipticity(spec: &OperatorSpec, samples: usize, seed: u64) -> EllipticityCheck {
    let samples = samples.max(1);
    let e = spec.ellipticity();
    let mut sampler = MatrixSampler::new(spec.dim(), seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let m = sampler.uniform_entries(10.0);
        let n = sampler.uniform_entries(10.0);
        let d = m - n;
        let diff = spec.value(&m) - spec.value(&n);
        let lower = pucci_minus(&d, e) - diff;
        let upper = diff - pucci_plus(&d, e);
        worst = worst.max(lower).max(upper);
    }
    EllipticityCheck {
        passed: worst <= ELLIPTICITY_SLACK,
        worst_violation: worst,
        samples,
    }
}

/// Sampled midpoint-convexity check `F((M+N)/2) ≤ (F(M)+F(N))/2`.
pub fn check_convexity(spec: &OperatorSpec, samples: usize, seed: u64) -> EllipticityCheck {
    let samples = samples.max(1);
    let mut sampler = MatrixSampler::new(spec.dim(), seed);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..samples {
        let r = RADIUS_SWEEP[k % RADIUS_SWEEP.len()];
        let m = sampler.spectral(r);
        let n = sampler.spectral(r);
        let mid = 0.5 * (m + n);
        let v = spec.value(&mid) - 0.5 * (spec.value(&m) + spec.value(&n));
        worst = worst.max(v);
    }
    EllipticityCheck {
        // values reach O(10²) at radius 100
        passed: worst <= 1e-10,
        worst_violation: worst,
        samples,
    }
}

/// Sampled closeness constants.
///
/// `k_hat`/`tau_hat` estimate `|F1(M) - F2(M)| ≤ K + τ‖M‖`;
/// `l_hat`/`sigma_hat` estimate `|Fi(M) - F(M)| ≤ L + σ‖M‖` against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosenessReport {
    pub k_hat: f64,
    pub tau_hat: f64,
    pub l_hat: f64,
    pub sigma_hat: f64,
    pub sample_count: usize,
}

fn affine_bound(samples: &[(f64, f64)]) -> (f64, f64) {
    let intercept = samples
        .iter()
        .filter(|(norm, _)| *norm <= 1.0)
        .fold(0.0_f64, |acc, (_, d)| acc.max(*d));
    let slope = samples
        .iter()
        .filter(|(norm, _)| *norm >= 1.0)
        .fold(0.0_f64, |acc, (norm, d)| acc.max((d - intercept).max(0.0) / norm));
    (intercept, slope)
}

/// Estimates `(K, τ)` and, when a reference is given, `(L, σ)`.
///
/// The matrix norm is the spectral norm.
pub fn estimate_closeness(
    f1: &OperatorSpec,
    f2: &OperatorSpec,
    reference: Option<&OperatorSpec>,
    samples: usize,
    seed: u64,
) -> Result<ClosenessReport> {
    let dim = f1.dim();
    for other in [Some(f2), reference].into_iter().flatten() {
        if other.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: other.dim(),
            });
        }
    }
    let mats = MatrixSampler::new(dim, seed).sweep(samples);
    let norms: Vec<f64> = mats.iter().map(SymMatrix::spectral_norm).collect();
    let v1: Vec<f64> = mats.iter().map(|m| f1.value(m)).collect();
    let v2: Vec<f64> = mats.iter().map(|m| f2.value(m)).collect();

    let pairs: Vec<(f64, f64)> = norms
        .iter()
        .zip(v1.iter().zip(&v2))
        .map(|(&n, (a, b))| (n, (a - b).abs()))
        .collect();
    let (k_hat, tau_hat) = affine_bound(&pairs);

    let (l_hat, sigma_hat) = match reference {
        Some(fr) => {
            let pairs: Vec<(f64, f64)> = mats
                .iter()
                .zip(&norms)
                .enumerate()
                .map(|(i, (m, &n))| {
                    let r = fr.value(m);
                    (n, (v1[i] - r).abs().max((v2[i] - r).abs()))
                })
                .collect();
            affine_bound(&pairs)
        }
        None => (0.0, 0.0),
    };

    Ok(ClosenessReport {
        k_hat,
        tau_hat,
        l_hat,
        sigma_hat,
        sample_count: mats.len(),
    })
}

/// Sampled `sup_M |G(x, M) - G(x0, M)| / (1 + ‖M‖)` for node indices `x`, `x0`.
pub fn beta_oscillation(
    op: &AssembledOperator,
    x: usize,
    x0: usize,
    samples: usize,
    seed: u64,
) -> f64 {
    if x == x0 {
        return 0.0;
    }
    let mats = MatrixSampler::new(op.dim(), seed).sweep(samples);
    mats.iter()
        .map(|m| (op.eval(x, m) - op.eval(x0, m)).abs() / (1.0 + m.spectral_norm()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Control, EllipticityPair, OperatorKind};

    fn e12() -> EllipticityPair {
        EllipticityPair::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn pucci_passes_its_own_check() {
        for seed in 0..3 {
            for dim in 1..=3 {
                assert!(check_ellipticity(&OperatorSpec::pucci_plus(dim, e12()), 500, seed).passed);
                assert!(check_ellipticity(&OperatorSpec::pucci_minus(dim, e12()), 500, seed).passed);
            }
        }
    }

    #[test]
    fn affine_inside_bounds_passes() {
        let a = SymMatrix::new2(1.5, 0.5, 1.5); // eigenvalues 1 and 2
        let spec = OperatorSpec::affine(a, 0.3, e12()).unwrap();
        let chk = check_ellipticity(&spec, 2000, 7);
        assert!(chk.passed, "{chk:?}");
    }

    #[test]
    fn affine_outside_bounds_fails() {
        let spec = OperatorSpec::new_unchecked(
            2,
            OperatorKind::Affine(Control::new(SymMatrix::diag(&[3.0, 1.0]), 0.0)),
            e12(),
        )
        .unwrap();
        let chk = check_ellipticity(&spec, 2000, 7);
        assert!(!chk.passed);
        assert!(chk.worst_violation > 0.0);
    }

    #[test]
    fn identical_operators_have_zero_closeness() {
        let f = OperatorSpec::pucci_minus(2, e12());
        let rep = estimate_closeness(&f, &f, Some(&f), 300, 1).unwrap();
        assert_eq!(rep.k_hat, 0.0);
        assert_eq!(rep.tau_hat, 0.0);
        assert_eq!(rep.l_hat, 0.0);
        assert_eq!(rep.sigma_hat, 0.0);
    }

    #[test]
    fn closeness_rejects_mixed_dimensions() {
        let a = OperatorSpec::pucci_plus(2, e12());
        let b = OperatorSpec::pucci_plus(3, e12());
        assert!(estimate_closeness(&a, &b, None, 10, 0).is_err());
    }

    #[test]
    fn spectral_samples_respect_radius() {
        let mut s = MatrixSampler::new(3, 4);
        for _ in 0..200 {
            let m = s.spectral(10.0);
            assert!(m.spectral_norm() <= 10.0 + 1e-9);
        }
    }

    #[test]
    fn convexity_check_separates_kinds() {
        let plus = OperatorSpec::pucci_plus(2, e12());
        let minus = OperatorSpec::pucci_minus(2, e12());
        assert!(check_convexity(&plus, 500, 0).passed);
        assert!(!check_convexity(&minus, 500, 0).passed);
    }
}
