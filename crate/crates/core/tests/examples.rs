//! Every runnable example, exercised as a test.

#[path = "../examples/barriers.rs"]
mod barriers;
#[path = "../examples/cli_workflow.rs"]
mod cli_workflow;
#[path = "../examples/frozen_solve.rs"]
mod frozen_solve;
#[path = "../examples/manufactured_2d.rs"]
mod manufactured_2d;
#[path = "../examples/operators.rs"]
mod operators;
#[path = "../examples/two_phase_1d.rs"]
mod two_phase_1d;

#[test]
fn operators_example() {
    let c = operators::run_example().unwrap();
    assert!(c.tau_hat > 0.0 && c.tau_hat <= 0.1 + 1e-12);
    assert!(c.sigma_hat.is_finite());
}

#[test]
fn frozen_solve_example() {
    let (stats, brute_gap) = frozen_solve::run_example().unwrap();
    assert!(stats.iterations >= 1);
    assert!(brute_gap < 1e-9);
}

#[test]
fn barriers_example() {
    assert!(barriers::run_example().unwrap());
}

#[test]
fn manufactured_example() {
    let err = manufactured_2d::run_example().unwrap();
    assert!(err < 1e-3, "error {err}");
}

#[test]
fn two_phase_example() {
    let errs = two_phase_1d::run_example().unwrap();
    assert!(!errs.is_empty());
    assert!(errs.iter().all(|(_, e)| e.is_finite() && *e < 5e-2));
}

#[test]
fn cli_workflow_example() {
    let study = cli_workflow::run_example().unwrap();
    assert!(study.rows.iter().all(|r| r.converged));
}
