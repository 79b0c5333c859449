//! Acceptance criteria. Each test prints one `criterion N [...]: PASS|FAIL` line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::time::Instant;

use common::*;
use free_transmission::discretization::w2p_seminorm;
use free_transmission::fixed_point::{barriers_for, continuation_with, ContinuationConfig};
use free_transmission::frozen_solver::{problem_scale, sandwich_check};
use free_transmission::operators::{estimate_closeness, pucci_minus, pucci_plus, MatrixSampler};
use free_transmission::oracle::{bruteforce_small_solve, solve_two_phase_1d, TwoPhase1DInstance};
use free_transmission::prelude::*;
use free_transmission::regularization::{assemble_g, build_h};
use rand::Rng;

fn within_budget(start: Instant, seconds: f64) -> (bool, f64) {
    let t = start.elapsed().as_secs_f64();
    (t <= seconds, t)
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// `max / min - 1` of positive values.
fn variation(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min - 1.0
}

#[test]
fn criterion_01_barrier_sandwich() {
    let _g = serial();
    let start = Instant::now();
    let mut runs = 0;
    let mut events = 0usize;
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    let mut kinds_seen = std::collections::BTreeSet::new();
    for seed in 0..CORPUS_SIZE {
        let (k1, k2, prob) = corpus_entry(seed);
        kinds_seen.insert(k1);
        kinds_seen.insert(k2);
        let cfg = ContinuationConfig {
            seed,
            ..Default::default()
        };
        let slack = 10.0 * cfg.tol_fp * prob.scale();
        let report = continuation_with(&prob, &cfg, &mut |ev| {
            events += 1;
            for u in [ev.v, ev.tv] {
                let c = sandwich_check(u, ev.barriers, slack);
                worst = worst.min(c.lower_margin.min(c.upper_margin));
                if !c.passed {
                    violations += 1;
                }
            }
        })
        .expect("well-posed problem");
        let c = sandwich_check(&report.u, &report.barriers, slack);
        if !c.passed {
            violations += 1;
        }
        runs += 1;
    }
    let (fast, t) = within_budget(start, 300.0);
    let passed = violations == 0 && runs >= 20 && kinds_seen.len() == KINDS.len() && fast;
    report(
        1,
        "barrier sandwich",
        passed,
        &format!(
            "{runs} runs, {events} applications of T, {violations} violations, \
             worst margin {worst:.3e}, {t:.1}s of 300s"
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_02_manufactured_convergence() {
    let _g = serial();
    let start = Instant::now();
    let mut errors = Vec::new();
    for n in [33, 65, 129] {
        let r = continuation(&manufactured(n), &floored(1.0)).expect("converges");
        errors.push(r.diagnostics().reference_error.unwrap());
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let (fast, t) = within_budget(start, 120.0);
    let passed = ratios.iter().all(|q| (3.0..=5.0).contains(q)) && fast;
    report(
        2,
        "manufactured convergence",
        passed,
        &format!("errors {}, ratios {ratios:.2?} in [3, 5], {t:.1}s of 120s", sci(&errors)),
    );
    assert!(passed);
}

/// Ten seeded 1D instances with an interior free-boundary point and `f ≠ 0`.
fn oracle_instances() -> Vec<TwoPhase1DInstance> {
    let mut r = rng(31);
    let mut out = Vec::new();
    while out.len() < 10 {
        let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let inst = TwoPhase1DInstance {
            a1: r.random_range(1.0..=2.0),
            a2: r.random_range(1.0..=2.0),
            f: sign * r.random_range(0.5..=4.0),
            g_left: -r.random_range(0.2..=1.5),
            g_right: r.random_range(0.2..=1.5),
            a: 0.0,
            b: 1.0,
        };
        let inst = if r.random_bool(0.5) {
            TwoPhase1DInstance {
                g_left: -inst.g_right,
                g_right: -inst.g_left,
                ..inst
            }
        } else {
            inst
        };
        if let Ok(sol) = solve_two_phase_1d(&inst, 1e-13) {
            if matches!(sol.x0, Some(x) if x > 0.1 && x < 0.9) {
                out.push(inst);
            }
        }
    }
    out
}

#[test]
fn criterion_03_oracle_1d() {
    let _g = serial();
    let start = Instant::now();
    let e = e12();
    let mut ok = 0;
    let mut worst201 = 0.0_f64;
    let mut lines = Vec::new();
    for inst in oracle_instances() {
        let exact = solve_two_phase_1d(&inst, 1e-13).unwrap();
        let f1 = OperatorSpec::affine(SymMatrix::diag(&[inst.a1]), 0.0, e).unwrap();
        let f2 = OperatorSpec::affine(SymMatrix::diag(&[inst.a2]), 0.0, e).unwrap();
        let mut errs = Vec::new();
        for n in [201, 401, 801] {
            let grid = Grid::interval(inst.a, inst.b, n).unwrap();
            let f = GridFunction::constant(grid, inst.f);
            let g = GridFunction::from_fn(grid, |p| if p[0] < 0.5 { inst.g_left } else { inst.g_right });
            let prob = ProblemSpec::new(f1.clone(), f2.clone(), f, g)
                .unwrap()
                .with_reference_solution(exact.sample(grid))
                .unwrap();
            let r = continuation(&prob, &floored(2.0)).expect("converges");
            errs.push(r.diagnostics().reference_error.unwrap());
        }
        worst201 = worst201.max(errs[0]);
        if errs[0] <= 5e-3 && errs[2] < errs[0] {
            ok += 1;
        }
        lines.push(sci(&errs));
    }
    let (fast, t) = within_budget(start, 60.0);
    let passed = ok == 10 && fast;
    report(
        3,
        "1D oracle equivalence",
        passed,
        &format!(
            "{ok}/10 with err(801) < err(201), worst error at n=201 {worst201:.2e} (limit 5e-3), {t:.1}s of 60s"
        ),
    );
    for l in lines {
        emit(&format!("    n=201,401,801: {l}"));
    }
    assert!(passed);
}

#[test]
fn criterion_04_collapse_invariance() {
    let _g = serial();
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for (i, kind) in ["affine", "pucci+", "bellman", "isaacs", "pucci-"].iter().enumerate() {
        let dim = if i == 4 { 1 } else { 2 };
        let n = if dim == 1 { 65 } else { 33 };
        let base = random_problem(400 + i as u64, dim, n, kind, kind);
        let prob = ProblemSpec::new(base.f1.clone(), base.f1.clone(), base.f.clone(), base.g.clone())
            .unwrap();
        let r = continuation(&prob, &ContinuationConfig::default()).expect("converges");
        let direct = FrozenProblem::from_operator(&prob.f1, prob.f.clone(), prob.g.clone()).unwrap();
        let init = GridFunction::zeros(*prob.grid()).with_boundary_of(&prob.g);
        let (u, _) = solve_frozen(&direct, &init, 1e-12 * prob.scale(), 200).unwrap();
        worst = worst.max(u.max_abs_diff(&r.u));
    }
    let (fast, t) = within_budget(start, 30.0);
    let passed = worst <= 1e-8 && fast;
    report(
        4,
        "collapse invariance",
        passed,
        &format!("5 instances, worst sup gap {worst:.2e} (limit 1e-8), {t:.1}s of 30s"),
    );
    assert!(passed);
}

/// Random frozen problem `G = hF1 + (1-h)F2` with a random indicator field.
fn random_frozen(seed: u64, grid: Grid) -> FrozenProblem {
    let mut r = rng(seed);
    let dim = grid.dim();
    let k1 = KINDS[r.random_range(0..KINDS.len())];
    let k2 = KINDS[r.random_range(0..KINDS.len())];
    let f1 = random_operator(k1, dim, &mut r);
    let f2 = random_operator(k2, dim, &mut r);
    let h = GridFunction::new(grid, (0..grid.len()).map(|_| r.random_range(0.0..=1.0)).collect())
        .unwrap();
    let op = assemble_g(h, &f1, &f2).unwrap();
    let f = GridFunction::new(grid, (0..grid.len()).map(|_| r.random_range(-2.0..=2.0)).collect())
        .unwrap();
    let g = GridFunction::new(grid, (0..grid.len()).map(|_| r.random_range(-1.0..=1.0)).collect())
        .unwrap();
    FrozenProblem::from_assembled(&op, f, g).unwrap()
}

#[test]
fn criterion_05_discrete_uniqueness() {
    let _g = serial();
    let start = Instant::now();
    let mut multiple = 0;
    let mut other_errors = Vec::new();
    for seed in 0..50u64 {
        let grid = if seed % 2 == 0 {
            Grid::unit_square(7).unwrap()
        } else {
            Grid::interval(0.0, 1.0, 20).unwrap()
        };
        match bruteforce_small_solve(&random_frozen(500 + seed, grid), seed) {
            Ok(_) => {}
            Err(Error::MultipleSolutions { .. }) => multiple += 1,
            Err(e) => other_errors.push(e.to_string()),
        }
    }
    let mut worst_ratio = 0.0_f64;
    for seed in 0..20u64 {
        let prob = random_problem(600 + seed, 2, 33, KINDS[seed as usize % 5], KINDS[(seed as usize + 2) % 5]);
        let cfg = ContinuationConfig::default();
        let barriers = barriers_for(&prob, &cfg).unwrap();
        let fp = random_frozen(700 + seed, *prob.grid());
        let frozen = FrozenProblem::new(fp.scheme().clone(), prob.f.clone(), prob.g.clone()).unwrap();
        let tol = cfg.tol * problem_scale(&prob.f1, &prob.f2, &prob.f, &prob.g, prob.diag.p);
        let (a, _) = solve_frozen(&frozen, &barriers.lower, tol, 200).unwrap();
        let (b, _) = solve_frozen(&frozen, &barriers.upper, tol, 200).unwrap();
        worst_ratio = worst_ratio.max(a.max_abs_diff(&b) / (10.0 * tol));
    }
    let (fast, t) = within_budget(start, 120.0);
    let passed = multiple == 0 && other_errors.is_empty() && worst_ratio <= 1.0 && fast;
    report(
        5,
        "discrete uniqueness",
        passed,
        &format!(
            "50 brute-force instances: {multiple} with multiple solutions, {} other errors; \
             20 two-start solves: worst gap {worst_ratio:.2e} x 10 tol; {t:.1}s of 120s",
            other_errors.len()
        ),
    );
    for e in &other_errors {
        emit(&format!("    {e}"));
    }
    assert!(passed);
}

#[test]
fn criterion_06_abp_stability() {
    let _g = serial();
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut lines = Vec::new();
    for which in 0..5 {
        let ratios: Vec<f64> = [33, 65, 129]
            .iter()
            .map(|&n| {
                continuation(&fixed_problem(which, n), &floored(1.0))
                    .expect("converges")
                    .diagnostics()
                    .abp_ratio
            })
            .collect();
        worst = worst.max(variation(&ratios));
        lines.push(format!("problem {which}: {ratios:.4?}"));
    }
    let (fast, t) = within_budget(start, 120.0);
    let passed = worst <= 0.2 && fast;
    report(
        6,
        "ABP stability",
        passed,
        &format!("worst variation {:.1}% (limit 20%), {t:.1}s of 120s", 100.0 * worst),
    );
    for l in lines {
        emit(&format!("    {l}"));
    }
    assert!(passed);
}

/// Bellman pair perturbed from a common convex Bellman operator by `delta`.
fn near_convex(n: usize, delta: f64) -> ProblemSpec {
    let e = e12();
    let grid = Grid::square(-1.0, 1.0, n).unwrap();
    let ctrl = |a: f64, b: f64, c: f64| Control::new(SymMatrix::new2(a, b, c), 0.0);
    let base = [(1.3, 0.2, 1.5), (1.6, -0.1, 1.4)];
    let shifted = |s: f64| {
        OperatorSpec::bellman(
            base.iter().map(|&(a, b, c)| ctrl(a + s, b, c + s)).collect(),
            e,
        )
        .unwrap()
    };
    let fref = shifted(0.0);
    let f = GridFunction::from_fn(grid, |p| 2.0 * p[0] + p[1] * p[1]);
    let g = GridFunction::from_fn(grid, |p| p[0] - 0.2 * p[1] + 0.1);
    ProblemSpec::new(shifted(delta), shifted(-delta), f, g)
        .unwrap()
        .with_reference_operator(fref)
        .unwrap()
}

#[test]
fn criterion_07_w2p_near_convexity() {
    let _g = serial();
    let start = Instant::now();
    let run = |prob: ProblemSpec| -> (f64, f64) {
        let r = continuation(&prob, &floored(1.0)).expect("converges");
        let w = w2p_seminorm(&r.u, 4.0, 0.1).unwrap();
        (w, r.diagnostics().sigma_hat.unwrap())
    };
    let (mut w2p, mut sigma) = (Vec::new(), 0.0_f64);
    for n in [33, 65, 129] {
        let (w, s) = run(near_convex(n, 0.02));
        w2p.push(w);
        sigma = sigma.max(s);
    }
    let var = variation(&w2p);
    let mut control = Vec::new();
    let mut control_sigma = 0.0_f64;
    for n in [33, 65] {
        let p = near_convex(n, 0.0);
        let e = e12();
        let p = ProblemSpec::new(
            OperatorSpec::pucci_plus(2, e),
            OperatorSpec::pucci_minus(2, e),
            p.f.clone(),
            p.g.clone(),
        )
        .unwrap()
        .with_reference_operator(p.fref.clone().unwrap())
        .unwrap();
        let (w, s) = run(p);
        control.push(w);
        control_sigma = s;
    }
    let (fast, t) = within_budget(start, 180.0);
    let passed = sigma <= 0.05 && var <= 0.25 && fast;
    report(
        7,
        "W2p under near-convexity",
        passed,
        &format!(
            "sigma_hat {sigma:.3} (limit 0.05), w2p {w2p:.3?}, variation {:.1}% (limit 25%), \
             {t:.1}s of 180s",
            100.0 * var
        ),
    );
    emit(&format!(
        "    negative control (Pucci pair, sigma_hat {control_sigma:.3}): w2p {control:.3?}, \
         not asserted"
    ));
    assert!(passed);
}

#[test]
fn criterion_08_eps_cauchy() {
    let _g = serial();
    let start = Instant::now();
    let mut runs = 0;
    let mut monotone = 0;
    let mut final_ok = 0;
    let mut lines = Vec::new();
    for seed in 0..CORPUS_SIZE {
        let (_, _, prob) = corpus_entry(seed);
        runs += 1;
        let cfg = ContinuationConfig::default();
        let r = continuation_with(&prob, &cfg, &mut |_| {}).expect("well-posed problem");
        let gaps = &r.diagnostics().eps_cauchy;
        let noise = 10.0 * cfg.tol_fp * prob.scale();
        let ok_mono = r.converged()
            && gaps.len() >= 3
            && gaps[gaps.len() - 3..].windows(2).all(|w| w[1] <= w[0] + noise);
        let last = gaps.last().copied().unwrap_or(f64::INFINITY);
        let ok_final = r.converged() && last <= 1e-4 * (1.0 + r.diagnostics().sup_norm);
        monotone += ok_mono as usize;
        final_ok += ok_final as usize;
        lines.push(format!(
            "converged {}, last gaps {}",
            r.converged(),
            sci(&gaps[gaps.len().saturating_sub(3)..])
        ));
    }
    let (fast, t) = within_budget(start, 180.0);
    let passed = monotone * 10 >= 9 * runs && final_ok == runs && fast;
    report(
        8,
        "eps-Cauchy",
        passed,
        &format!(
            "{monotone}/{runs} nonincreasing over the last 4 steps (need 90%), \
             {final_ok}/{runs} final gap within 1e-4 (1 + sup|u|), {t:.1}s of 180s"
        ),
    );
    for l in lines {
        emit(&format!("    {l}"));
    }
    assert!(passed);
}

#[test]
fn criterion_09_regularized_operator_properties() {
    let _g = serial();
    let start = Instant::now();
    const SAMPLES: usize = 1000;
    const SLACK: f64 = 1e-9;
    let e = e12();
    let mut r = rng(9);
    let grid = Grid::square(-1.0, 1.0, 17).unwrap();

    let mut ell_viol = 0;
    for k in 0..SAMPLES {
        let f1 = random_operator(KINDS[k % 5], 2, &mut r);
        let f2 = random_operator(KINDS[(k / 5) % 5], 2, &mut r);
        let v = GridFunction::new(grid, (0..grid.len()).map(|_| r.random_range(-1.0..=1.0)).collect())
            .unwrap();
        let eps = r.random_range(0.01..=0.5);
        let op = assemble_g(build_h(&v, eps, true).unwrap(), &f1, &f2).unwrap();
        let mut s = MatrixSampler::new(2, 10_000 + k as u64);
        let (m, n) = (s.uniform_entries(10.0), s.uniform_entries(10.0));
        let x = r.random_range(0..grid.len());
        let d = op.eval(x, &m) - op.eval(x, &n);
        let diff = m - n;
        if pucci_minus(&diff, e) - d > SLACK || d - pucci_plus(&diff, e) > SLACK {
            ell_viol += 1;
        }
    }

    let mut a21_viol = 0;
    let mut a2_viol = 0;
    let mut g_osc_viol = 0;
    let mut g_ref_viol = 0;
    let mut checked = 0;
    for inst in 0..5u64 {
        let ctrl = |a: f64, b: f64, c: f64, off: f64| Control::new(SymMatrix::new2(a, b, c), off);
        let d = 0.02 * (inst + 1) as f64;
        let fref = OperatorSpec::bellman(vec![ctrl(1.3, 0.1, 1.5, 0.0), ctrl(1.6, -0.2, 1.4, 0.1)], e).unwrap();
        let f1 = OperatorSpec::bellman(
            vec![ctrl(1.3 + d, 0.1, 1.5 + d, 0.05), ctrl(1.6 + d, -0.2, 1.4 + d, 0.15)],
            e,
        )
        .unwrap();
        let f2 = OperatorSpec::bellman(
            vec![ctrl(1.3 - d, 0.1, 1.5 - d, -0.05), ctrl(1.6 - d, -0.2, 1.4 - d, 0.05)],
            e,
        )
        .unwrap();
        let est = estimate_closeness(&f1, &f2, Some(&fref), 20_000, inst).unwrap();
        let v = GridFunction::new(grid, (0..grid.len()).map(|_| r.random_range(-1.0..=1.0)).collect())
            .unwrap();
        let op = assemble_g(build_h(&v, 0.3, true).unwrap(), &f1, &f2).unwrap();
        let fresh = MatrixSampler::new(2, 90_000 + inst).sweep(SAMPLES);
        for m in &fresh {
            let norm = m.spectral_norm();
            let (x, y) = (r.random_range(0..grid.len()), r.random_range(0..grid.len()));
            let (gx, gy) = (op.eval(x, m), op.eval(y, m));
            if gx - gy > 2.0 * (est.k_hat + est.tau_hat * norm) + SLACK {
                g_osc_viol += 1;
            }
            if (gx - fref.value(m)).abs() > est.l_hat + est.sigma_hat * norm + SLACK {
                g_ref_viol += 1;
            }
            let (v1, v2, vr) = (f1.value(m), f2.value(m), fref.value(m));
            if (v1 - v2).abs() > est.k_hat + est.tau_hat * norm + SLACK {
                a21_viol += 1;
            }
            if (v1 - vr).abs().max((v2 - vr).abs()) > est.l_hat + est.sigma_hat * norm + SLACK {
                a2_viol += 1;
            }
            checked += 1;
        }
    }

    let mut h_viol = 0;
    let mut worst_h = 0.0_f64;
    for k in 0..SAMPLES {
        let g = if k % 2 == 0 { grid } else { Grid::interval(-1.0, 1.0, 41).unwrap() };
        let v1 = GridFunction::new(g, (0..g.len()).map(|_| r.random_range(-1.0..=1.0)).collect()).unwrap();
        let amp = 10f64.powf(r.random_range(-4.0..=0.0));
        let noise = GridFunction::new(g, (0..g.len()).map(|_| r.random_range(-amp..=amp)).collect())
            .unwrap();
        let v2 = v1.zip_map(&noise, |a, b| a + b);
        let eps = 10f64.powf(r.random_range(-3.0..=0.0));
        let dh = build_h(&v1, eps, k % 3 != 0)
            .unwrap()
            .max_abs_diff(&build_h(&v2, eps, k % 3 != 0).unwrap());
        let bound = v1.max_abs_diff(&v2) / (2.0 * eps);
        worst_h = worst_h.max(dh / bound);
        if dh > bound + SLACK {
            h_viol += 1;
        }
    }

    let (fast, t) = within_budget(start, 30.0);
    let passed = ell_viol == 0
        && a21_viol == 0
        && a2_viol == 0
        && g_osc_viol == 0
        && g_ref_viol == 0
        && h_viol == 0
        && fast;
    report(
        9,
        "regularized operator properties",
        passed,
        &format!(
            "ellipticity {ell_viol}/{SAMPLES}, (K,tau) bound {a21_viol}/{checked}, \
             (L,sigma) bound {a2_viol}/{checked}, G(x)-G(y) {g_osc_viol}/{checked}, \
             |G-Fref| {g_ref_viol}/{checked}, h-contraction {h_viol}/{SAMPLES} \
             (worst ratio {worst_h:.3}), {t:.1}s of 30s"
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_10_closeness_estimators() {
    let _g = serial();
    let start = Instant::now();
    let e = e12();
    let mut r = rng(10);
    let mut all_in = true;
    let mut lines = Vec::new();
    for delta in [0.01, 0.05, 0.1] {
        for _ in 0..3 {
            let a = loop {
                let a = random_matrix(2, &mut r);
                let ev = a.eigenvalues();
                if ev.iter().all(|&x| x + 0.1 <= 2.0) {
                    break a;
                }
            };
            let b = a + SymMatrix::scaled_identity(2, delta);
            let f1 = OperatorSpec::affine(a, 0.0, e).unwrap();
            let f2 = OperatorSpec::affine(b, 0.0, e).unwrap();
            let est = estimate_closeness(&f1, &f2, None, 4000, 0).unwrap();
            let inside = est.tau_hat >= delta && est.tau_hat <= 2.0 * delta * 1.1;
            all_in &= inside;
            lines.push(format!("delta {delta}: tau_hat {:.4}", est.tau_hat));
        }
    }
    let (fast, t) = within_budget(start, 30.0);
    let passed = all_in && fast;
    report(
        10,
        "closeness estimators",
        passed,
        &format!("9 singleton pairs, tau_hat in [delta, 2 delta 1.1]: {all_in}, {t:.1}s of 30s"),
    );
    for l in lines {
        emit(&format!("    {l}"));
    }
    assert!(passed);
}
