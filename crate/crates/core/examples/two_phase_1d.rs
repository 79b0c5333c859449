//! One-dimensional two-phase problem against its closed form.
//!
//! `-a1 u'' = f` where `u > 0`, `-a2 u'' = f` where `u < 0`, with boundary
//! values of opposite sign. The closed form is piecewise quadratic with a
//! single free-boundary point.

use free_transmission::oracle::{solve_two_phase_1d, TwoPhase1DInstance};
use free_transmission::prelude::*;

pub fn run_example() -> Result<Vec<(usize, f64)>> {
    let inst = TwoPhase1DInstance {
        a1: 1.0,
        a2: 2.0,
        f: 1.0,
        g_left: -0.5,
        g_right: 1.0,
        a: 0.0,
        b: 1.0,
    };
    let exact = solve_two_phase_1d(&inst, 1e-13)?;
    println!("free boundary at x0 = {:.6}", exact.x0.unwrap_or(f64::NAN));

    let e = EllipticityPair::new(1.0, 2.0)?;
    let f1 = OperatorSpec::affine(SymMatrix::scaled_identity(1, inst.a1), 0.0, e)?;
    let f2 = OperatorSpec::affine(SymMatrix::scaled_identity(1, inst.a2), 0.0, e)?;
    let mut errors = Vec::new();
    for n in [51, 101, 201] {
        let grid = Grid::interval(inst.a, inst.b, n)?;
        let f = GridFunction::constant(grid, inst.f);
        let g = GridFunction::from_fn(grid, |p| if p[0] < 0.5 { inst.g_left } else { inst.g_right });
        let prob = ProblemSpec::new(f1.clone(), f2.clone(), f, g)?
            .with_reference_solution(exact.sample(grid))?;
        let report = continuation(&prob, &ContinuationConfig::default())?;
        let err = report.diagnostics().reference_error.unwrap_or(f64::NAN);
        println!("n = {n:4}  sup error = {err:.3e}");
        errors.push((n, err));
    }
    Ok(errors)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
