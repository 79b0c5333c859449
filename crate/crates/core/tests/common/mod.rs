//! Problem builders shared by the integration tests.
#![allow(dead_code)]

use std::sync::{Mutex, MutexGuard};

use free_transmission::oracle::{manufactured_2d, AnalyticField};
use free_transmission::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

/// Runs heavy tests one at a time so that wall-clock budgets are meaningful.
pub fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

pub fn e12() -> EllipticityPair {
    EllipticityPair::new(1.0, 2.0).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with eigenvalues in `[1, 2]`. In two dimensions the
/// off-diagonal entry stays below 0.5, so the standard stencil decomposes it.
pub fn random_matrix(dim: usize, r: &mut ChaCha8Rng) -> SymMatrix {
    if dim == 1 {
        return SymMatrix::diag(&[r.random_range(1.0..=2.0)]);
    }
    let (m1, m2) = (r.random_range(1.0..=2.0), r.random_range(1.0..=2.0));
    let t: f64 = r.random_range(0.0..std::f64::consts::PI);
    let (s, c) = t.sin_cos();
    SymMatrix::new2(m1 * c * c + m2 * s * s, (m1 - m2) * s * c, m1 * s * s + m2 * c * c)
}

pub fn random_control(dim: usize, r: &mut ChaCha8Rng) -> Control {
    Control::new(random_matrix(dim, r), r.random_range(-0.5..=0.5))
}

pub const KINDS: [&str; 5] = ["affine", "pucci+", "pucci-", "bellman", "isaacs"];

pub fn random_operator(kind: &str, dim: usize, r: &mut ChaCha8Rng) -> OperatorSpec {
    let e = e12();
    match kind {
        "affine" => {
            let c = random_control(dim, r);
            OperatorSpec::affine(c.a, c.c, e).unwrap()
        }
        "pucci+" => OperatorSpec::pucci_plus(dim, e),
        "pucci-" => OperatorSpec::pucci_minus(dim, e),
        "bellman" => {
            let k = r.random_range(2..=3);
            OperatorSpec::bellman((0..k).map(|_| random_control(dim, r)).collect(), e).unwrap()
        }
        "isaacs" => OperatorSpec::isaacs(
            (0..2)
                .map(|_| (0..2).map(|_| random_control(dim, r)).collect())
                .collect(),
            e,
        )
        .unwrap(),
        other => panic!("unknown kind {other}"),
    }
}

/// Random two-phase problem whose boundary data change sign.
pub fn random_problem(seed: u64, dim: usize, n: usize, k1: &str, k2: &str) -> ProblemSpec {
    let mut r = rng(seed);
    let grid = if dim == 1 {
        Grid::interval(-1.0, 1.0, n).unwrap()
    } else {
        Grid::square(-1.0, 1.0, n).unwrap()
    };
    let f1 = random_operator(k1, dim, &mut r);
    let f2 = random_operator(k2, dim, &mut r);
    let amp = r.random_range(-3.0..=3.0);
    let f0 = r.random_range(-1.0..=1.0);
    let f = GridFunction::from_fn(grid, |p| f0 + amp * (1.5 * p[0]).sin() * (1.0 + p[1] * p[1]));
    let (a, b, c) = (
        r.random_range(-0.3..=0.3),
        r.random_range(0.5..=1.5),
        r.random_range(-0.5..=0.5),
    );
    let g = GridFunction::from_fn(grid, |p| a + b * p[0] + c * p[1]);
    ProblemSpec::new(f1, f2, f, g).unwrap()
}

pub fn u_star() -> AnalyticField {
    AnalyticField::Polynomial {
        coefficients: vec![[1.0, 2.0, 0.0], [-0.25, 0.0, 0.0]],
    }
}

/// `u* = x² - 1/4` on `(-1, 1)²` with `F1 = -Δ`, `F2 = -2Δ`.
pub fn manufactured(n: usize) -> ProblemSpec {
    let e = e12();
    let f1 = OperatorSpec::affine(SymMatrix::identity(2), 0.0, e).unwrap();
    let f2 = OperatorSpec::affine(SymMatrix::scaled_identity(2, 2.0), 0.0, e).unwrap();
    let grid = Grid::square(-1.0, 1.0, n).unwrap();
    let (u, f) = manufactured_2d(&u_star(), &f1, &f2, grid).unwrap();
    ProblemSpec::new(f1, f2, f, u.clone())
        .unwrap()
        .with_reference_solution(u)
        .unwrap()
}

/// Five fixed two-phase problems on `(-1, 1)²` used for refinement studies.
pub fn fixed_problem(which: usize, n: usize) -> ProblemSpec {
    let e = e12();
    let grid = Grid::square(-1.0, 1.0, n).unwrap();
    let ctrl = |a: f64, b: f64, c: f64, off: f64| Control::new(SymMatrix::new2(a, b, c), off);
    let (f1, f2, f, g) = match which {
        0 => return manufactured(n),
        1 => (
            OperatorSpec::pucci_plus(2, e),
            OperatorSpec::pucci_minus(2, e),
            GridFunction::from_fn(grid, |p| 2.0 * (std::f64::consts::PI * p[0]).sin()),
            GridFunction::from_fn(grid, |p| p[0] + 0.3),
        ),
        2 => (
            OperatorSpec::bellman(vec![ctrl(1.2, 0.2, 1.5, 0.0), ctrl(1.8, -0.3, 1.3, 0.3)], e).unwrap(),
            OperatorSpec::bellman(vec![ctrl(1.5, 0.0, 1.5, 0.0), ctrl(1.1, 0.1, 1.9, -0.2)], e).unwrap(),
            GridFunction::constant(grid, 1.0),
            GridFunction::from_fn(grid, |p| p[0] * p[1] + 0.2 * p[1]),
        ),
        3 => (
            OperatorSpec::affine(SymMatrix::new2(1.8, 0.4, 1.2), 0.5, e).unwrap(),
            OperatorSpec::affine(SymMatrix::new2(1.1, -0.1, 1.7), -0.5, e).unwrap(),
            GridFunction::from_fn(grid, |p| p[0] - 2.0 * p[1]),
            GridFunction::from_fn(grid, |p| 0.5 * p[1] - 0.1),
        ),
        4 => (
            OperatorSpec::isaacs(
                vec![
                    vec![ctrl(1.2, 0.1, 1.4, 0.0), ctrl(1.6, -0.2, 1.3, 0.0)],
                    vec![ctrl(1.5, 0.0, 1.5, 0.1), ctrl(1.3, 0.3, 1.7, 0.0)],
                ],
                e,
            )
            .unwrap(),
            OperatorSpec::pucci_minus(2, e),
            GridFunction::from_fn(grid, |p| 1.0 + p[0] * p[0]),
            GridFunction::from_fn(grid, |p| p[0] + p[1]),
        ),
        _ => panic!("no fixed problem {which}"),
    };
    ProblemSpec::new(f1, f2, f, g).unwrap()
}

/// Continuation ending at `ε = cells · h`.
pub fn floored(cells: f64) -> ContinuationConfig {
    ContinuationConfig {
        eps_floor_cells: Some(cells),
        ..Default::default()
    }
}

/// One member of the randomized corpus: operator kinds and the problem.
pub fn corpus_entry(seed: u64) -> (&'static str, &'static str, ProblemSpec) {
    let dim = if seed % 3 == 0 { 1 } else { 2 };
    let n = match (dim, seed % 4) {
        (1, 0 | 1) => 33,
        (1, _) => 65,
        (_, 0) => 17,
        (_, 1) => 25,
        _ => 33,
    };
    let k1 = KINDS[(seed as usize) % KINDS.len()];
    let k2 = KINDS[(seed as usize / KINDS.len() + 2 * seed as usize + 1) % KINDS.len()];
    (k1, k2, random_problem(1000 + seed, dim, n, k1, k2))
}

/// The randomized corpus: 24 problems in one and two dimensions with
/// `n ≤ 65`, pairing every operator family.
pub const CORPUS_SIZE: u64 = 24;

/// Prints the single result line of an acceptance criterion.
///
/// Writes to the stdout handle directly so the line survives the test
/// harness's output capture.
pub fn report(id: u32, name: &str, passed: bool, detail: &str) {
    emit(&format!(
        "criterion {id:2} [{name}]: {} | {detail}",
        if passed { "PASS" } else { "FAIL" }
    ));
}

/// An uncaptured line of output.
pub fn emit(line: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
