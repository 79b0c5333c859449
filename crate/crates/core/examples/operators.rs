//! Operator families, sampled structure checks and closeness constants.

use free_transmission::operators::{
    check_convexity, check_ellipticity, estimate_closeness, pucci_minus, pucci_plus,
    ClosenessReport,
};
use free_transmission::prelude::*;

/// Isaacs operator `inf_α sup_β -Tr(A_{αβ} M)` with a 2×2 control table.
fn isaacs(shift: f64, e: EllipticityPair) -> Result<OperatorSpec> {
    let c = |a, b, d| Control::new(SymMatrix::new2(a + shift, b, d + shift), 0.0);
    OperatorSpec::isaacs(
        vec![
            vec![c(1.2, 0.1, 1.4), c(1.6, -0.2, 1.3)],
            vec![c(1.5, 0.0, 1.5), c(1.3, 0.3, 1.7)],
        ],
        e,
    )
}

pub fn run_example() -> Result<ClosenessReport> {
    let e = EllipticityPair::new(1.0, 2.0)?;
    let m = SymMatrix::diag(&[1.0, -1.0]);
    println!("P+(diag(1,-1)) = {}", pucci_plus(&m, e));
    println!("P-(diag(1,-1)) = {}", pucci_minus(&m, e));

    let f1 = isaacs(0.0, e)?;
    let f2 = isaacs(0.05, e)?;
    let fref = OperatorSpec::bellman(
        vec![
            Control::new(SymMatrix::scaled_identity(2, 1.3), 0.0),
            Control::new(SymMatrix::scaled_identity(2, 1.5), 0.0),
        ],
        e,
    )?;
    for (name, op) in [("f1", &f1), ("f2", &f2)] {
        let c = check_ellipticity(op, 2000, 0);
        println!("{name}: ellipticity passed = {} (worst {:.2e})", c.passed, c.worst_violation);
    }
    let cvx = check_convexity(&fref, 2000, 0);
    println!("fref convex = {}", cvx.passed);

    let r = estimate_closeness(&f1, &f2, Some(&fref), 4000, 0)?;
    println!(
        "K = {:.4}  tau = {:.4}  L = {:.4}  sigma = {:.4}",
        r.k_hat, r.tau_hat, r.l_hat, r.sigma_hat
    );
    Ok(r)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
