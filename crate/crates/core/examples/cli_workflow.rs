//! The `check`, `solve` and `study` commands driven from configuration files.
//!
//! Equivalent to
//!
//! ```text
//! ftsolve check --config configs/isaacs_check.json --out <tmp>/check
//! ftsolve solve --config configs/pucci_pair.json   --out <tmp>/solve
//! ftsolve study --config configs/manufactured.json --out <tmp>/study
//! ```

use std::path::{Path, PathBuf};

use free_transmission::cli::{cmd_check, cmd_solve, cmd_study, RunConfig, StudyReport};
use free_transmission::Result;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn run_example() -> Result<StudyReport> {
    let out = std::env::temp_dir().join(format!("ftsolve-example-{}", std::process::id()));

    let check = cmd_check(&RunConfig::load(&config("isaacs_check.json"))?, &out.join("check"))?;
    println!(
        "check passed = {}, tau_hat = {:.4}",
        check.passed, check.closeness.tau_hat
    );

    let solve = cmd_solve(&RunConfig::load(&config("pucci_pair.json"))?, &out.join("solve"))?;
    println!(
        "solve converged = {}, sup|u| = {:.4}",
        solve.converged(),
        solve.diagnostics().sup_norm
    );

    let study = cmd_study(&RunConfig::load(&config("manufactured.json"))?, &out.join("study"), 2)?;
    for row in &study.rows {
        println!(
            "n = {:3}  error = {:.3e}  ratio = {}",
            row.n,
            row.sup_error.unwrap_or(f64::NAN),
            row.error_ratio.map_or("-".into(), |r| format!("{r:.2}"))
        );
    }
    println!("outputs in {}", out.display());
    Ok(study)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
