use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::{Operators, RunConfig};
use crate::discretization::{write_field, GridFunction};
use crate::error::{Error, Result};
use crate::fixed_point::{barriers_for, continuation_with, sampled_beta, SolveReport};
use crate::operators::{
    check_convexity, check_ellipticity, estimate_closeness, ClosenessReport, EllipticityCheck,
    OperatorSpec,
};
use crate::regularization::{assemble_g, build_h};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;
pub const EXIT_MONOTONICITY: i32 = 5;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::Json(_)
        | Error::InvalidParameter(_)
        | Error::DimensionMismatch { .. }
        | Error::NonSymmetric { .. } => EXIT_CONFIG,
        Error::EllipticityBounds { .. } | Error::EllipticityMismatch(..) => EXIT_ASSUMPTION,
        Error::NonConvergence(_)
        | Error::FixedPointNonConvergence { .. }
        | Error::MultipleSolutions { .. }
        | Error::NoBracket(_) => EXIT_NONCONVERGENCE,
        Error::Monotonicity(_) => EXIT_MONOTONICITY,
        Error::Io(_) => EXIT_FAILURE,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn checked(ops: &Operators) -> Result<()> {
    for op in [Some(&ops.f1), Some(&ops.f2), ops.fref.as_ref()].into_iter().flatten() {
        op.validate_bounds()?;
    }
    Ok(())
}

/// Per-operator outcome of `check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorCheck {
    pub name: String,
    pub bounds_passed: bool,
    pub bounds_error: Option<String>,
    pub ellipticity: EllipticityCheck,
    /// Only for the reference operator.
    pub convexity: Option<EllipticityCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCheck {
    pub eps0: f64,
    pub r0: f64,
    pub pairs: usize,
    pub beta_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub seed: u64,
    pub operators: Vec<OperatorCheck>,
    pub closeness: ClosenessReport,
    /// Missing when the operators are invalid or the barriers cannot be computed.
    pub beta: Option<BetaCheck>,
    pub beta_error: Option<String>,
}

fn check_operator(name: &str, spec: &OperatorSpec, cfg: &RunConfig, reference: bool) -> OperatorCheck {
    let bounds = spec.validate_bounds();
    let ellipticity = check_ellipticity(spec, cfg.check.ellipticity_samples, cfg.seed);
    let convexity =
        reference.then(|| check_convexity(spec, cfg.check.convexity_samples, cfg.seed));
    OperatorCheck {
        name: name.to_string(),
        bounds_passed: bounds.is_ok(),
        bounds_error: bounds.err().map(|e| e.to_string()),
        ellipticity,
        convexity,
    }
}

fn beta_check(cfg: &RunConfig, ops: &Operators) -> Result<BetaCheck> {
    checked(ops)?;
    let prob = cfg.problem(ops)?;
    let cont = cfg.continuation_config();
    let barriers = barriers_for(&prob, &cont)?;
    let grid = *prob.grid();
    let eps0 = cont.schedule(&barriers, prob.scale(), grid.spacing())[0];
    let h = build_h(&barriers.midpoint(), eps0, cont.extend_zero)?;
    let op = assemble_g(h, &prob.f1, &prob.f2)?;
    let r0 = cfg.check.r0.unwrap_or(0.25 * grid.diam());
    Ok(BetaCheck {
        eps0,
        r0,
        pairs: cfg.check.beta_pairs,
        beta_hat: sampled_beta(&op, cfg.check.beta_pairs, r0, cfg.seed),
    })
}

/// Samples ellipticity, convexity of the reference, closeness and β̂.
/// Writes `report.json` into `out`.
pub fn cmd_check(cfg: &RunConfig, out: &Path) -> Result<CheckReport> {
    let ops = cfg.operators()?;
    let mut operators = vec![
        check_operator("f1", &ops.f1, cfg, false),
        check_operator("f2", &ops.f2, cfg, false),
    ];
    if let Some(fr) = &ops.fref {
        operators.push(check_operator("fref", fr, cfg, true));
    }
    let closeness = estimate_closeness(
        &ops.f1,
        &ops.f2,
        ops.fref.as_ref(),
        cfg.check.closeness_samples,
        cfg.seed,
    )?;
    let (beta, beta_error) = match beta_check(cfg, &ops) {
        Ok(b) => (Some(b), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let passed = operators.iter().all(|o| {
        o.bounds_passed && o.ellipticity.passed && o.convexity.is_none_or(|c| c.passed)
    });
    let report = CheckReport {
        passed,
        seed: cfg.seed,
        operators,
        closeness,
        beta,
        beta_error,
    };
    fs::create_dir_all(out)?;
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

/// File names written by `solve`.
pub const SOLVE_FIELDS: [&str; 7] = [
    "u.dat",
    "h.dat",
    "lower.dat",
    "upper.dat",
    "mask_plus.dat",
    "mask_minus.dat",
    "mask_zero.dat",
];

/// Runs the continuation and writes fields and `report.json`.
///
/// Fixed-point nonconvergence still yields a report with `converged: false`;
/// invalid operators and failed barrier solves are errors.
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<SolveReport> {
    let ops = cfg.operators()?;
    checked(&ops)?;
    let prob = cfg.problem(&ops)?;
    let report = continuation_with(&prob, &cfg.continuation_config(), &mut |_| {})?;
    fs::create_dir_all(out)?;
    let grid = *report.u.grid();
    let fields: [&GridFunction; 4] = [
        &report.u,
        &report.h,
        &report.barriers.lower,
        &report.barriers.upper,
    ];
    let masks = [
        report.masks.indicator(grid, &report.masks.plus),
        report.masks.indicator(grid, &report.masks.minus),
        report.masks.indicator(grid, &report.masks.zero),
    ];
    for (name, field) in SOLVE_FIELDS.iter().zip(fields.into_iter().chain(masks.iter())) {
        write_field(&out.join(name), field)?;
    }
    write_json(&out.join("report.json"), &report.summary)?;
    Ok(report)
}

/// One row of the study table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub eps_floor_cells: Option<f64>,
    pub h: f64,
    pub converged: bool,
    pub failure: Option<String>,
    pub eps_final: Option<f64>,
    pub sup_error: Option<f64>,
    /// Ratio of the previous row's error (same floor, next coarser grid) to this one.
    pub error_ratio: Option<f64>,
    pub sup_norm: Option<f64>,
    pub abp_ratio: Option<f64>,
    pub holder: Option<f64>,
    pub c1alpha: Option<f64>,
    pub w2p: Option<f64>,
    pub beta_hat: Option<f64>,
    pub k_hat: Option<f64>,
    pub tau_hat: Option<f64>,
    pub fp_iterations: usize,
    pub linear_solves: usize,
}

impl StudyRow {
    fn failed(n: usize, floor: Option<f64>, h: f64, err: &Error) -> Self {
        Self {
            n,
            eps_floor_cells: floor,
            h,
            converged: false,
            failure: Some(err.to_string()),
            eps_final: None,
            sup_error: None,
            error_ratio: None,
            sup_norm: None,
            abp_ratio: None,
            holder: None,
            c1alpha: None,
            w2p: None,
            beta_hat: None,
            k_hat: None,
            tau_hat: None,
            fp_iterations: 0,
            linear_solves: 0,
        }
    }

    fn from_report(n: usize, floor: Option<f64>, r: &SolveReport) -> Self {
        let s = &r.summary;
        let d = &s.diagnostics;
        Self {
            n,
            eps_floor_cells: floor,
            h: s.h,
            converged: s.converged,
            failure: s.failure.clone(),
            eps_final: s.eps_final,
            sup_error: d.reference_error,
            error_ratio: None,
            sup_norm: Some(d.sup_norm),
            abp_ratio: Some(d.abp_ratio),
            holder: Some(d.holder),
            c1alpha: Some(d.c1alpha),
            w2p: Some(d.w2p),
            beta_hat: Some(d.beta_hat),
            k_hat: Some(d.k_hat),
            tau_hat: Some(d.tau_hat),
            fp_iterations: s.history.iter().map(|h| h.fp_iterations).sum(),
            linear_solves: s.history.iter().map(|h| h.linear_solves).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub seed: u64,
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

fn study_point(cfg: &RunConfig, ops: &Operators, n: usize, floor: Option<f64>) -> StudyRow {
    let grid_cfg = match cfg.problem.grid.refined(n) {
        Ok(g) => g,
        Err(e) => return StudyRow::failed(n, floor, f64::NAN, &e),
    };
    let h = grid_cfg.extent[0] / (n - 1) as f64;
    let mut cont = cfg.continuation_config();
    if floor.is_some() {
        cont.eps_floor_cells = floor;
    }
    let run = cfg
        .problem_on(&grid_cfg, ops)
        .and_then(|prob| continuation_with(&prob, &cont, &mut |_| {}));
    match run {
        Ok(r) => StudyRow::from_report(n, floor, &r),
        Err(e) => StudyRow::failed(n, floor, h, &e),
    }
}

fn floor_key(f: Option<f64>) -> f64 {
    f.unwrap_or(f64::NEG_INFINITY)
}

/// Runs one continuation per (grid size, ε floor) pair on up to `threads`
/// workers and writes `study.csv` and `study.json`. Failed points are
/// recorded and do not stop the sweep.
pub fn cmd_study(cfg: &RunConfig, out: &Path, threads: usize) -> Result<StudyReport> {
    let ops = cfg.operators()?;
    checked(&ops)?;
    let mut points: Vec<(usize, Option<f64>)> = Vec::new();
    for &n in &cfg.study.grid_sizes {
        for &f in &cfg.study.eps_floor_cells {
            points.push((n, f));
        }
    }
    if points.is_empty() {
        return Err(Error::Config("study needs at least one grid size".into()));
    }
    points.sort_by(|a, b| (a.0, floor_key(a.1)).partial_cmp(&(b.0, floor_key(b.1))).unwrap());
    points.dedup();

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<StudyRow>>> = Mutex::new(vec![None; points.len()]);
    let workers = threads.clamp(1, points.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, floor)) = points.get(i) else {
                    break;
                };
                let row = study_point(cfg, &ops, n, floor);
                results.lock().expect("study worker panicked")[i] = Some(row);
            });
        }
    });
    let mut rows: Vec<StudyRow> = results
        .into_inner()
        .expect("study worker panicked")
        .into_iter()
        .map(|r| r.expect("every point is visited"))
        .collect();

    for i in 0..rows.len() {
        let prev = (0..i)
            .rev()
            .find(|&j| rows[j].eps_floor_cells == rows[i].eps_floor_cells);
        if let Some(j) = prev {
            if let (Some(a), Some(b)) = (rows[j].sup_error, rows[i].sup_error) {
                rows[i].error_ratio = Some(a / b);
            }
        }
    }

    let report = StudyReport {
        seed: cfg.seed,
        rows,
    };
    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("study.csv")).map_err(csv_error)?;
    for row in &report.rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    write_json(&out.join("study.json"), &report)?;
    Ok(report)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Subcommands of the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Check,
    Study,
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Loads the configuration, runs `cmd` and returns the process exit code.
/// A one-line summary goes to stdout, errors to stderr.
pub fn run(cmd: Command, args: &RunArgs) -> i32 {
    match run_inner(cmd, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_inner(cmd: Command, args: &RunArgs) -> Result<i32> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    match cmd {
        Command::Check => {
            let r = cmd_check(&cfg, &args.out)?;
            println!(
                "check {}: tau_hat = {:.3e}, beta_hat = {}",
                if r.passed { "passed" } else { "FAILED" },
                r.closeness.tau_hat,
                r.beta.map_or("n/a".to_string(), |b| format!("{:.3e}", b.beta_hat))
            );
            Ok(if r.passed { EXIT_OK } else { EXIT_ASSUMPTION })
        }
        Command::Solve => {
            let r = cmd_solve(&cfg, &args.out)?;
            let d = r.diagnostics();
            println!(
                "solve {}: sup|u| = {:.6e}, eps_final = {:?}, fields in {}",
                if r.converged() { "converged" } else { "did NOT converge" },
                d.sup_norm,
                r.summary.eps_final,
                args.out.display()
            );
            if let Some(f) = &r.summary.failure {
                eprintln!("error: {f}");
            }
            Ok(if r.converged() { EXIT_OK } else { EXIT_NONCONVERGENCE })
        }
        Command::Study => {
            let threads = args.threads.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let r = cmd_study(&cfg, &args.out, threads)?;
            for row in &r.rows {
                println!(
                    "n = {:4}  floor = {:>6}  err = {:>10}  ratio = {:>6}  {}",
                    row.n,
                    row.eps_floor_cells.map_or("-".into(), |f| f.to_string()),
                    row.sup_error.map_or("-".into(), |e| format!("{e:.3e}")),
                    row.error_ratio.map_or("-".into(), |q| format!("{q:.2}")),
                    if row.converged { "ok" } else { "FAILED" }
                );
            }
            Ok(if r.all_converged() { EXIT_OK } else { EXIT_NONCONVERGENCE })
        }
    }
}
