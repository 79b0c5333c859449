//! Reference solutions independent of the continuation solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::discretization::{Grid, GridFunction};
use crate::error::{Error, Result};
use crate::frozen_solver::FrozenProblem;
use crate::operators::{OperatorSpec, SymMatrix};

/// One-dimensional two-phase problem `-a1 u'' = f` on `{u > 0}`,
/// `-a2 u'' = f` on `{u < 0}`, `u(a) = g_left`, `u(b) = g_right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhase1DInstance {
    pub a1: f64,
    pub a2: f64,
    pub f: f64,
    pub g_left: f64,
    pub g_right: f64,
    pub a: f64,
    pub b: f64,
}

impl TwoPhase1DInstance {
    pub fn validate(&self, lambda: f64, big_lambda: f64) -> Result<()> {
        for c in [self.a1, self.a2] {
            if c < lambda || c > big_lambda {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {c} outside [{lambda}, {big_lambda}]"
                )));
            }
        }
        if !(self.b > self.a) {
            return Err(Error::InvalidParameter("empty interval".into()));
        }
        Ok(())
    }

    fn curvature(&self, sign: f64) -> f64 {
        if sign > 0.0 {
            -self.f / self.a1
        } else {
            -self.f / self.a2
        }
    }
}

/// Quadratic on `[x0, x1]` with end values `y0, y1` and constant second derivative `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub k: f64,
}

impl Piece {
    pub fn value(&self, x: f64) -> f64 {
        let l = self.x1 - self.x0;
        self.y0 + (self.y1 - self.y0) * (x - self.x0) / l + 0.5 * self.k * (x - self.x0) * (x - self.x1)
    }

    pub fn slope(&self, x: f64) -> f64 {
        let l = self.x1 - self.x0;
        (self.y1 - self.y0) / l + 0.5 * self.k * (2.0 * x - self.x0 - self.x1)
    }

    /// Extreme values over the piece.
    fn range(&self) -> (f64, f64) {
        let mut lo = self.y0.min(self.y1);
        let mut hi = self.y0.max(self.y1);
        if self.k != 0.0 {
            let l = self.x1 - self.x0;
            let xs = 0.5 * (self.x0 + self.x1) - (self.y1 - self.y0) / (l * self.k);
            if xs > self.x0 && xs < self.x1 {
                let v = self.value(xs);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

/// Piecewise-quadratic closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhase1DSolution {
    /// Free-boundary point, absent for single-phase solutions.
    pub x0: Option<f64>,
    pub pieces: Vec<Piece>,
}

impl TwoPhase1DSolution {
    fn piece(&self, x: f64) -> &Piece {
        self.pieces
            .iter()
            .find(|p| x <= p.x1)
            .unwrap_or_else(|| self.pieces.last().expect("at least one piece"))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.piece(x).value(x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.piece(x).slope(x)
    }

    pub fn sample(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |p| self.value(p[0]))
    }
}

const SCAN_POINTS: usize = 2000;

/// Closed-form solution with `C¹` matching at a single free-boundary point.
///
/// Single-phase candidates are tried first. Otherwise the free-boundary
/// point is located by bisection on the slope jump. Configurations that
/// would need more than one interface fail with [`Error::NoBracket`].
pub fn solve_two_phase_1d(inst: &TwoPhase1DInstance, tol: f64) -> Result<TwoPhase1DSolution> {
    let (a, b) = (inst.a, inst.b);
    if !(b > a) || !(tol > 0.0) {
        return Err(Error::InvalidParameter("need a < b and tol > 0".into()));
    }
    for sign in [1.0, -1.0] {
        let p = Piece {
            x0: a,
            x1: b,
            y0: inst.g_left,
            y1: inst.g_right,
            k: inst.curvature(sign),
        };
        let (lo, hi) = p.range();
        if (sign > 0.0 && lo >= 0.0) || (sign < 0.0 && hi <= 0.0) {
            return Ok(TwoPhase1DSolution {
                x0: None,
                pieces: vec![p],
            });
        }
    }
    let (sl, sr) = (inst.g_left.signum(), inst.g_right.signum());
    if inst.g_left == 0.0 || inst.g_right == 0.0 || sl == sr {
        return Err(Error::NoBracket(format!(
            "boundary data ({}, {}) need two interfaces or none",
            inst.g_left, inst.g_right
        )));
    }
    let (kl, kr) = (inst.curvature(sl), inst.curvature(sr));
    let split = |x0: f64| {
        (
            Piece {
                x0: a,
                x1: x0,
                y0: inst.g_left,
                y1: 0.0,
                k: kl,
            },
            Piece {
                x0,
                x1: b,
                y0: 0.0,
                y1: inst.g_right,
                k: kr,
            },
        )
    };
    let jump = |x0: f64| {
        let (l, r) = split(x0);
        l.slope(x0) - r.slope(x0)
    };
    let valid = |x0: f64| {
        let (l, r) = split(x0);
        let ok = |p: &Piece, s: f64| {
            let (lo, hi) = p.range();
            let slack = 1e-12 * (1.0 + inst.g_left.abs() + inst.g_right.abs());
            if s > 0.0 {
                lo >= -slack
            } else {
                hi <= slack
            }
        };
        ok(&l, sl) && ok(&r, sr)
    };
    let xs: Vec<f64> = (1..SCAN_POINTS)
        .map(|i| a + (b - a) * i as f64 / SCAN_POINTS as f64)
        .collect();
    for w in xs.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (jump(lo), jump(hi));
        if flo == 0.0 || flo.signum() != fhi.signum() {
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if jump(mid).signum() == flo.signum() && flo != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x0 = 0.5 * (lo + hi);
            if valid(x0) {
                let (l, r) = split(x0);
                return Ok(TwoPhase1DSolution {
                    x0: Some(x0),
                    pieces: vec![l, r],
                });
            }
        }
    }
    Err(Error::NoBracket("no sign-consistent interface point".into()))
}

/// Smooth closed-form fields with analytic Hessians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticField {
    Constant { value: f64 },
    /// `Σ c x^px y^py` from rows `[c, px, py]`.
    Polynomial { coefficients: Vec<[f64; 3]> },
    /// `amplitude · Π_i sin(π frequency_i x_i)`; zero frequencies are skipped.
    Trig { amplitude: f64, frequency: Vec<f64> },
}

fn power(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        x.powf(p)
    }
}

fn dpower(x: f64, p: f64, order: u32) -> f64 {
    match order {
        0 => power(x, p),
        1 if p == 0.0 => 0.0,
        1 => p * power(x, p - 1.0),
        _ if p == 0.0 || p == 1.0 => 0.0,
        _ => p * (p - 1.0) * power(x, p - 2.0),
    }
}

impl AnalyticField {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Polynomial { coefficients } => coefficients
                .iter()
                .map(|[c, px, py]| c * power(x[0], *px) * power(x[1], *py))
                .sum(),
            Self::Trig {
                amplitude,
                frequency,
            } => {
                amplitude
                    * frequency
                        .iter()
                        .zip(x)
                        .filter(|(f, _)| **f != 0.0)
                        .map(|(f, xi)| (PI * f * xi).sin())
                        .product::<f64>()
            }
        }
    }

    pub fn hessian(&self, x: [f64; 2], dim: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(dim);
        match self {
            Self::Constant { .. } => {}
            Self::Polynomial { coefficients } => {
                for [c, px, py] in coefficients {
                    let t = |ox: u32, oy: u32| c * dpower(x[0], *px, ox) * dpower(x[1], *py, oy);
                    m.set(0, 0, m.get(0, 0) + t(2, 0));
                    if dim == 2 {
                        m.set(0, 1, m.get(0, 1) + t(1, 1));
                        m.set(1, 1, m.get(1, 1) + t(0, 2));
                    }
                }
            }
            Self::Trig {
                amplitude,
                frequency,
            } => {
                let f = |i: usize| frequency.get(i).copied().unwrap_or(0.0);
                let factor = |i: usize, order: u32| {
                    let w = PI * f(i);
                    if f(i) == 0.0 {
                        if order == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        match order {
                            0 => (w * x[i]).sin(),
                            1 => w * (w * x[i]).cos(),
                            _ => -w * w * (w * x[i]).sin(),
                        }
                    }
                };
                if dim == 1 {
                    m.set(0, 0, amplitude * factor(0, 2));
                } else {
                    m.set(0, 0, amplitude * factor(0, 2) * factor(1, 0));
                    m.set(0, 1, amplitude * factor(0, 1) * factor(1, 1));
                    m.set(1, 1, amplitude * factor(0, 0) * factor(1, 2));
                }
            }
        }
        m
    }

    pub fn sample(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |p| self.value(p))
    }
}

/// Samples `u*` and the right-hand side `f = F1(D²u*)` on `{u* > 0}`,
/// `F2(D²u*)` on `{u* < 0}`, and the average of both on `{u* = 0}`.
pub fn manufactured_2d(
    u_star: &AnalyticField,
    f1: &OperatorSpec,
    f2: &OperatorSpec,
    grid: Grid,
) -> Result<(GridFunction, GridFunction)> {
    if f1.dim() != grid.dim() || f2.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: f1.dim().max(f2.dim()),
        });
    }
    let u = u_star.sample(grid);
    let mut f = GridFunction::zeros(grid);
    for k in 0..grid.len() {
        let x = grid.point(k);
        let hess = u_star.hessian(x, grid.dim());
        let v = u.get(k);
        let val = if v > 0.0 {
            f1.value(&hess)
        } else if v < 0.0 {
            f2.value(&hess)
        } else {
            0.5 * (f1.value(&hess) + f2.value(&hess))
        };
        f.set(k, val);
    }
    Ok((u, f))
}

pub const BRUTEFORCE_STARTS: usize = 100;
pub const BRUTEFORCE_AGREEMENT: f64 = 1e-10;
const BRUTEFORCE_MAX_UNKNOWNS: usize = 25;
const BRUTEFORCE_MAX_SWEEPS: usize = 2_000_000;

/// Solves a tiny frozen problem by the damped explicit iteration
/// `u ← u - R(u) / D` from [`BRUTEFORCE_STARTS`] random starts, where `D`
/// bounds every diagonal coefficient. All runs must agree.
pub fn bruteforce_small_solve(prob: &FrozenProblem, seed: u64) -> Result<GridFunction> {
    let grid = *prob.scheme().grid();
    let interior = grid.interior();
    if interior.len() > BRUTEFORCE_MAX_UNKNOWNS {
        return Err(Error::InvalidParameter(format!(
            "{} unknowns exceed the brute-force limit {BRUTEFORCE_MAX_UNKNOWNS}",
            interior.len()
        )));
    }
    let rho = 1.0 / prob.scheme().max_diagonal();
    let spread = 10.0 * (1.0 + sup(prob.g()) + sup(prob.f()));
    let target = 1e-13 * (1.0 + sup(prob.g()) + sup(prob.f()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first: Option<GridFunction> = None;
    for _ in 0..BRUTEFORCE_STARTS {
        let mut u = prob.g().clone();
        for &k in &interior {
            u.set(k, rng.random_range(-spread..=spread));
        }
        let mut converged = false;
        for _ in 0..BRUTEFORCE_MAX_SWEEPS {
            let r = prob.residual(&u);
            let worst = r.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if worst <= target {
                converged = true;
                break;
            }
            for &k in &interior {
                u.set(k, u.get(k) - rho * r[k]);
            }
        }
        if !converged {
            return Err(Error::InvalidParameter("damped iteration stalled".into()));
        }
        match &first {
            None => first = Some(u),
            Some(ref0) => {
                let gap = ref0.max_abs_diff(&u);
                if gap > BRUTEFORCE_AGREEMENT {
                    return Err(Error::MultipleSolutions { gap });
                }
            }
        }
    }
    Ok(first.expect("at least one start"))
}

fn sup(u: &GridFunction) -> f64 {
    u.values().iter().fold(0.0, |a, v| a.max(v.abs()))
}
