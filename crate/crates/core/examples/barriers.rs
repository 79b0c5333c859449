//! Pucci barriers, the mollified indicator and one application of `T`.

use free_transmission::fixed_point::apply_t;
use free_transmission::frozen_solver::sandwich_check;
use free_transmission::regularization::build_h;
use free_transmission::prelude::*;

pub fn run_example() -> Result<bool> {
    let e = EllipticityPair::new(1.0, 3.0)?;
    let grid = Grid::square(-1.0, 1.0, 41)?;
    let f1 = OperatorSpec::pucci_plus(2, e);
    let f2 = OperatorSpec::affine(SymMatrix::new2(2.0, 0.5, 1.5), 0.2, e)?;
    let f = GridFunction::from_fn(grid, |p| 3.0 * p[0] * p[1]);
    let g = GridFunction::from_fn(grid, |p| p[0] + 0.3 * p[1]);
    let prob = ProblemSpec::new(f1.clone(), f2.clone(), f.clone(), g.clone())?;

    let barriers = compute_barriers(&f1, &f2, &f, &g)?;
    println!(
        "barriers: lower in [{:.3}, {:.3}], upper in [{:.3}, {:.3}]",
        barriers.lower.min(),
        barriers.lower.max(),
        barriers.upper.min(),
        barriers.upper.max()
    );

    let v = barriers.midpoint();
    let eps = 0.1;
    let h = build_h(&v, eps, true)?;
    let plus = h.values().iter().filter(|&&x| x == 1.0).count();
    let minus = h.values().iter().filter(|&&x| x == 0.0).count();
    println!("h at eps = {eps}: {plus} nodes at 1, {minus} at 0, rest in between");

    let tv = apply_t(&v, eps, &prob, 1e-9 * prob.scale())?;
    let check = sandwich_check(&tv, &barriers, 1e-6);
    println!(
        "T(v) inside barriers: {} (margins {:.3e}, {:.3e})",
        check.passed, check.lower_margin, check.upper_margin
    );
    Ok(check.passed)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
