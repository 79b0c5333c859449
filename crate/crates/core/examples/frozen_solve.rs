//! Policy iteration on a frozen Bellman problem, compared with a brute-force
//! explicit iteration on a tiny grid.

use free_transmission::frozen_solver::SolveStats;
use free_transmission::oracle::bruteforce_small_solve;
use free_transmission::prelude::*;

fn bellman(e: EllipticityPair) -> Result<OperatorSpec> {
    OperatorSpec::bellman(
        vec![
            Control::new(SymMatrix::new2(1.2, 0.3, 1.6), 0.5),
            Control::new(SymMatrix::new2(1.7, -0.3, 1.3), -0.5),
            Control::new(SymMatrix::scaled_identity(2, 1.5), 0.0),
        ],
        e,
    )
}

pub fn run_example() -> Result<(SolveStats, f64)> {
    let e = EllipticityPair::new(1.0, 2.0)?;
    let op = bellman(e)?;

    let grid = Grid::unit_square(65)?;
    let f = GridFunction::from_fn(grid, |p| 4.0 * (p[0] - p[1]));
    let g = GridFunction::from_fn(grid, |p| p[0] * p[1]);
    let prob = FrozenProblem::from_operator(&op, f, g.clone())?;
    let init = GridFunction::zeros(grid).with_boundary_of(&g);
    let (_, stats) = solve_frozen(&prob, &init, 1e-10, 100)?;
    println!(
        "n = 65: {} linear solves, residual {:.2e}",
        stats.iterations, stats.final_residual
    );
    for (k, r) in stats.residual_history.iter().enumerate() {
        println!("  step {k:2}  residual {r:.3e}");
    }

    let tiny = Grid::unit_square(7)?;
    let f = GridFunction::constant(tiny, 1.0);
    let g = GridFunction::zeros(tiny);
    let prob = FrozenProblem::from_operator(&op, f, g.clone())?;
    let (u, _) = solve_frozen(&prob, &GridFunction::zeros(tiny), 1e-12, 100)?;
    let brute = bruteforce_small_solve(&prob, 7)?;
    let gap = u.max_abs_diff(&brute);
    println!("n = 7: policy iteration vs brute force, sup gap {gap:.2e}");
    Ok((stats, gap))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
