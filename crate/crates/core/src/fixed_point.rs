//! The map `T v = u^v_ε`, its damped Picard iteration, ε-continuation and
//! free-boundary diagnostics.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::{
    c1alpha_estimate, gradient, holder_seminorm, lp_norm, sup_norm, w2p_seminorm,
    DiagnosticsConfig, Grid, GridFunction, SchemeOperator, StencilSet,
};
use crate::error::{Error, Result};
use crate::frozen_solver::{
    compute_barriers_with, problem_scale, sandwich_check, solve_frozen, BarrierPair, FrozenProblem,
    SandwichCheck, SolveStats, DEFAULT_MAX_ITER,
};
use crate::operators::{beta_oscillation, estimate_closeness, OperatorSpec};
use crate::regularization::{assemble_g, build_h, AssembledOperator};

/// Two-phase Dirichlet problem `F1(D²u)χ{u>0} + F2(D²u)χ{u<0} = f`, `u = g`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub f1: OperatorSpec,
    pub f2: OperatorSpec,
    /// Convex reference operator for the near-convexity estimate.
    pub fref: Option<OperatorSpec>,
    pub f: GridFunction,
    /// Boundary data; only boundary nodes are read.
    pub g: GridFunction,
    /// Optional exact or reference solution for error reporting.
    pub reference: Option<GridFunction>,
    pub diag: DiagnosticsConfig,
}

impl ProblemSpec {
    pub fn new(f1: OperatorSpec, f2: OperatorSpec, f: GridFunction, g: GridFunction) -> Result<Self> {
        let spec = Self {
            f1,
            f2,
            fref: None,
            f,
            g,
            reference: None,
            diag: DiagnosticsConfig::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_reference_operator(mut self, fref: OperatorSpec) -> Result<Self> {
        self.fref = Some(fref);
        self.validate()?;
        Ok(self)
    }

    pub fn with_reference_solution(mut self, u: GridFunction) -> Result<Self> {
        self.reference = Some(u);
        self.validate()?;
        Ok(self)
    }

    pub fn with_diagnostics(mut self, diag: DiagnosticsConfig) -> Result<Self> {
        self.diag = diag;
        self.validate()?;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.f1.ellipticity();
        for op in [Some(&self.f2), self.fref.as_ref()].into_iter().flatten() {
            let o = op.ellipticity();
            if o != e {
                return Err(Error::EllipticityMismatch(
                    e.lambda(),
                    e.big_lambda(),
                    o.lambda(),
                    o.big_lambda(),
                ));
            }
            if op.dim() != self.f1.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.f1.dim(),
                    found: op.dim(),
                });
            }
        }
        let grid = self.grid();
        if self.f1.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: self.f1.dim(),
            });
        }
        for other in [Some(&self.g), self.reference.as_ref()].into_iter().flatten() {
            if other.grid() != grid {
                return Err(Error::InvalidParameter("fields live on different grids".into()));
            }
        }
        self.diag.validate(grid.dim())
    }

    /// `sup|g| + ‖f‖_p + |F1(0)| + |F2(0)| + 1`.
    pub fn scale(&self) -> f64 {
        problem_scale(&self.f1, &self.f2, &self.f, &self.g, self.diag.p)
    }

    /// Boundary data extended by zero, the Dirichlet field used by every solve.
    pub fn dirichlet(&self) -> GridFunction {
        GridFunction::zeros(*self.grid()).with_boundary_of(&self.g)
    }
}

/// Continuation and Picard parameters. Tolerances are relative to [`ProblemSpec::scale`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationConfig {
    /// Explicit strictly decreasing schedule; overrides the geometric one.
    pub eps_schedule: Option<Vec<f64>>,
    /// First ε of the geometric schedule; defaults to a tenth of the barrier oscillation.
    pub eps0: Option<f64>,
    pub eps_steps: usize,
    /// When set, the geometric schedule stops at `eps_floor_cells · h`.
    pub eps_floor_cells: Option<f64>,
    /// Frozen-solve tolerance.
    pub tol: f64,
    /// Fixed-point gap tolerance.
    pub tol_fp: f64,
    pub theta: f64,
    pub max_fp_iter: usize,
    /// Linear solves allowed per frozen problem.
    pub max_iter: usize,
    pub extend_zero: bool,
    pub closeness_samples: usize,
    pub beta_pairs: usize,
    pub seed: u64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            eps_schedule: None,
            eps0: None,
            eps_steps: 8,
            eps_floor_cells: None,
            tol: 1e-9,
            tol_fp: 1e-7,
            theta: 1.0,
            max_fp_iter: 60,
            max_iter: DEFAULT_MAX_ITER,
            extend_zero: true,
            closeness_samples: 2000,
            beta_pairs: 32,
            seed: 0,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.tol > 0.0) || !(self.tol_fp > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad("theta must lie in (0, 1]");
        }
        if self.max_fp_iter == 0 || self.max_iter == 0 || self.eps_steps == 0 {
            return bad("iteration counts must be positive");
        }
        if let Some(s) = &self.eps_schedule {
            if s.is_empty() || s.iter().any(|e| !(*e > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
                return bad("eps schedule must be positive and strictly decreasing");
            }
        }
        if matches!(self.eps0, Some(e) if !(e > 0.0)) {
            return bad("eps0 must be positive");
        }
        if matches!(self.eps_floor_cells, Some(k) if !(k > 0.0)) {
            return bad("eps_floor_cells must be positive");
        }
        Ok(())
    }

    /// Resolves the ε schedule for a grid spacing and barrier pair.
    pub fn schedule(&self, barriers: &BarrierPair, scale: f64, h: f64) -> Vec<f64> {
        if let Some(s) = &self.eps_schedule {
            return s.clone();
        }
        let eps0 = self.eps0.unwrap_or_else(|| {
            let osc = 0.1 * barriers.oscillation();
            if osc > 0.0 {
                osc
            } else {
                0.1 * scale
            }
        });
        match self.eps_floor_cells {
            None => (0..self.eps_steps)
                .map(|k| eps0 * 0.5_f64.powi(k as i32))
                .collect(),
            Some(cells) => {
                let floor = cells * h;
                let mut s: Vec<f64> = std::iter::successors(Some(eps0), |e| Some(0.5 * e))
                    .take_while(|e| *e > floor)
                    .collect();
                s.push(floor);
                s
            }
        }
    }
}

/// One application of `T`, as seen by an observer.
pub struct IterateEvent<'a> {
    pub eps: f64,
    /// Iteration count within the current θ attempt, starting at 1.
    pub iteration: usize,
    pub theta: f64,
    /// Current iterate `v`.
    pub v: &'a GridFunction,
    /// Unclipped image `T v`.
    pub tv: &'a GridFunction,
    pub barriers: &'a BarrierPair,
}

/// Frozen problem for `G^v_ε`.
pub fn frozen_problem(v: &GridFunction, eps: f64, prob: &ProblemSpec, extend_zero: bool) -> Result<(FrozenProblem, AssembledOperator)> {
    let h = build_h(v, eps, extend_zero)?;
    let op = assemble_g(h, &prob.f1, &prob.f2)?;
    let fp = FrozenProblem::from_assembled(&op, prob.f.clone(), prob.dirichlet())?;
    Ok((fp, op))
}

/// `T v`: the frozen solve for `G^v_ε` with data `(f, g)`.
pub fn apply_t(v: &GridFunction, eps: f64, prob: &ProblemSpec, tol: f64) -> Result<GridFunction> {
    Ok(apply_t_with(v, eps, prob, tol, DEFAULT_MAX_ITER, true)?.0)
}

fn apply_t_with(
    v: &GridFunction,
    eps: f64,
    prob: &ProblemSpec,
    tol: f64,
    max_iter: usize,
    extend_zero: bool,
) -> Result<(GridFunction, SolveStats)> {
    let (fp, _) = frozen_problem(v, eps, prob, extend_zero)?;
    solve_frozen(&fp, v, tol, max_iter)
}

/// Per-ε summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRecord {
    pub eps: f64,
    pub converged: bool,
    pub fp_iterations: usize,
    pub fp_gap: f64,
    pub theta: f64,
    /// Gaps `‖T v - v‖` of every attempt, in order.
    pub gaps: Vec<f64>,
    pub linear_solves: usize,
    /// Stats of the last frozen solve.
    pub frozen: SolveStats,
    /// Worst sandwich margins over the unclipped images at this ε.
    pub sandwich: SandwichCheck,
}

struct FixedPointRun {
    u: GridFunction,
    record: EpsRecord,
    failure: Option<Error>,
}

struct Context<'a> {
    prob: &'a ProblemSpec,
    cfg: &'a ContinuationConfig,
    barriers: &'a BarrierPair,
    tol: f64,
    tol_fp: f64,
}

fn merge_sandwich(a: SandwichCheck, b: SandwichCheck) -> SandwichCheck {
    SandwichCheck {
        passed: a.passed && b.passed,
        lower_margin: a.lower_margin.min(b.lower_margin),
        upper_margin: a.upper_margin.min(b.upper_margin),
    }
}

const CLEAN_SANDWICH: SandwichCheck = SandwichCheck {
    passed: true,
    lower_margin: f64::INFINITY,
    upper_margin: f64::INFINITY,
};

fn fixed_point_run(
    ctx: &Context<'_>,
    eps: f64,
    v0: &GridFunction,
    observer: &mut dyn FnMut(IterateEvent<'_>),
) -> Result<FixedPointRun> {
    let slack = 10.0 * ctx.tol_fp;
    let start = ctx.barriers.clip(&v0.clone().with_boundary_of(&ctx.prob.g));
    let mut record = EpsRecord {
        eps,
        converged: false,
        fp_iterations: 0,
        fp_gap: f64::INFINITY,
        theta: ctx.cfg.theta,
        gaps: Vec::new(),
        linear_solves: 0,
        frozen: SolveStats::default(),
        sandwich: CLEAN_SANDWICH,
    };
    let mut last = start.clone();
    let mut failure = None;
    for theta in [ctx.cfg.theta, 0.5 * ctx.cfg.theta, 0.25 * ctx.cfg.theta] {
        record.theta = theta;
        let mut v = start.clone();
        for it in 1..=ctx.cfg.max_fp_iter {
            let tv = match apply_t_with(&v, eps, ctx.prob, ctx.tol, ctx.cfg.max_iter, ctx.cfg.extend_zero) {
                Ok((tv, stats)) => {
                    record.linear_solves += stats.iterations;
                    record.frozen = stats;
                    tv
                }
                Err(Error::NonConvergence(stats)) => {
                    record.frozen = stats.clone();
                    return Ok(FixedPointRun {
                        u: v,
                        record,
                        failure: Some(Error::NonConvergence(stats)),
                    });
                }
                Err(e) => return Err(e),
            };
            observer(IterateEvent {
                eps,
                iteration: it,
                theta,
                v: &v,
                tv: &tv,
                barriers: ctx.barriers,
            });
            record.sandwich = merge_sandwich(record.sandwich, sandwich_check(&tv, ctx.barriers, slack));
            let gap = tv.max_abs_diff(&v);
            record.gaps.push(gap);
            record.fp_iterations = it;
            record.fp_gap = gap;
            if gap <= ctx.tol_fp {
                record.converged = true;
                return Ok(FixedPointRun {
                    u: tv,
                    record,
                    failure: None,
                });
            }
            let next = v.zip_map(&tv, |a, b| (1.0 - theta) * a + theta * b);
            v = ctx.barriers.clip(&next);
            last = tv;
        }
        failure = Some(Error::FixedPointNonConvergence {
            eps,
            last_gap: record.fp_gap,
            gaps: record.gaps.clone(),
        });
    }
    Ok(FixedPointRun {
        u: last,
        record,
        failure,
    })
}

/// Barrier pair at the tolerances of `cfg`.
pub fn barriers_for(prob: &ProblemSpec, cfg: &ContinuationConfig) -> Result<BarrierPair> {
    let tol = cfg.tol * prob.scale();
    compute_barriers_with(&prob.f1, &prob.f2, &prob.f, &prob.dirichlet(), tol, cfg.max_iter)
}

/// Damped Picard iteration of `T` at fixed ε, started from `v0` clipped
/// into the barrier sandwich. Returns the last image and the gap history.
pub fn iterate_t(
    prob: &ProblemSpec,
    eps: f64,
    v0: &GridFunction,
    cfg: &ContinuationConfig,
) -> Result<(GridFunction, Vec<f64>)> {
    cfg.validate()?;
    prob.validate()?;
    let barriers = barriers_for(prob, cfg)?;
    let scale = prob.scale();
    let ctx = Context {
        prob,
        cfg,
        barriers: &barriers,
        tol: cfg.tol * scale,
        tol_fp: cfg.tol_fp * scale,
    };
    let run = fixed_point_run(&ctx, eps, v0, &mut |_| {})?;
    match run.failure {
        Some(e) => Err(e),
        None => Ok((run.u, run.record.gaps)),
    }
}

/// Interior nodes split by the sign of `u` beyond a threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeBoundaryMasks {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
    pub zero: Vec<usize>,
}

impl FreeBoundaryMasks {
    /// Indicator field of one of the sets.
    pub fn indicator(&self, grid: Grid, which: &[usize]) -> GridFunction {
        let mut out = GridFunction::zeros(grid);
        for &k in which {
            out.set(k, 1.0);
        }
        out
    }
}

/// `plus = {u > δ}`, `minus = {u < -δ}`, `zero` = the other interior nodes.
pub fn extract_free_boundary(u: &GridFunction, delta: f64) -> FreeBoundaryMasks {
    let mut masks = FreeBoundaryMasks {
        plus: Vec::new(),
        minus: Vec::new(),
        zero: Vec::new(),
    };
    for k in u.grid().interior() {
        let v = u.get(k);
        if v > delta {
            masks.plus.push(k);
        } else if v < -delta {
            masks.minus.push(k);
        } else {
            masks.zero.push(k);
        }
    }
    masks
}

/// `max(10 tol_fp, h sup|∇u|)` with the gradient taken at interior nodes.
pub fn default_delta(u: &GridFunction, tol_fp: f64) -> f64 {
    let g = *u.grid();
    let grad = gradient(u);
    let sup = g.interior().into_iter().fold(0.0_f64, |a, k| {
        a.max(grad.iter().map(|d| d.get(k).powi(2)).sum::<f64>().sqrt())
    });
    (10.0 * tol_fp).max(g.spacing() * sup)
}

/// Sup of the discrete phase residuals `|F_i,h(u) - f|` over mask nodes
/// whose whole stencil has the same sign.
pub fn phase_residuals(
    u: &GridFunction,
    prob: &ProblemSpec,
    masks: &FreeBoundaryMasks,
    delta: f64,
) -> Result<(f64, f64)> {
    let grid = *u.grid();
    let mut side = vec![0i8; grid.len()];
    for &k in &masks.plus {
        side[k] = 1;
    }
    for &k in &masks.minus {
        side[k] = -1;
    }
    for k in grid.boundary() {
        let v = u.get(k);
        side[k] = if v > delta {
            1
        } else if v < -delta {
            -1
        } else {
            0
        };
    }
    let stencils = StencilSet::standard(grid.dim());
    let mut out = [0.0_f64; 2];
    for (slot, (spec, set, sign)) in [(&prob.f1, &masks.plus, 1i8), (&prob.f2, &masks.minus, -1i8)]
        .into_iter()
        .enumerate()
    {
        let scheme = SchemeOperator::single(grid, spec)?;
        for &k in set {
            let inside = stencils.directions().iter().all(|e| {
                let p = grid.shift(k, *e).expect("interior node");
                let m = grid.shift(k, [-e[0], -e[1]]).expect("interior node");
                side[p] == sign && side[m] == sign
            });
            if inside {
                let r = (scheme.value_at(u.values(), k) - prob.f.get(k)).abs();
                out[slot] = out[slot].max(r);
            }
        }
    }
    Ok((out[0], out[1]))
}

/// Estimates and norms attached to a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub k_hat: f64,
    pub tau_hat: f64,
    pub l_hat: Option<f64>,
    pub sigma_hat: Option<f64>,
    pub beta_hat: f64,
    pub sup_norm: f64,
    pub holder: f64,
    pub c1alpha: f64,
    pub w2p: f64,
    pub abp_ratio: f64,
    pub sandwich_passed: bool,
    pub sandwich_lower_margin: f64,
    pub sandwich_upper_margin: f64,
    pub eps_cauchy: Vec<f64>,
    pub delta: f64,
    pub res_plus: f64,
    pub res_minus: f64,
    pub plus_count: usize,
    pub minus_count: usize,
    pub zero_count: usize,
    pub reference_error: Option<f64>,
}

/// JSON-facing part of a [`SolveReport`]; the key set is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub converged: bool,
    pub failure: Option<String>,
    pub dim: usize,
    pub n: Vec<usize>,
    pub h: f64,
    pub scale: f64,
    pub tol: f64,
    pub tol_fp: f64,
    pub eps_schedule: Vec<f64>,
    pub eps_final: Option<f64>,
    pub history: Vec<EpsRecord>,
    pub diagnostics: Diagnostics,
    pub wall_time: f64,
}

/// Outcome of a continuation run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u: GridFunction,
    /// Indicator at the last ε.
    pub h: GridFunction,
    pub barriers: BarrierPair,
    pub masks: FreeBoundaryMasks,
    /// `u_ε` at every completed ε.
    pub eps_solutions: Vec<GridFunction>,
    pub summary: ReportSummary,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.summary.converged
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.summary.diagnostics
    }

    /// Summary without wall-clock fields, for reproducibility comparisons.
    pub fn deterministic_summary(&self) -> ReportSummary {
        let mut s = self.summary.clone();
        s.wall_time = 0.0;
        for r in &mut s.history {
            r.frozen.wall_time = 0.0;
        }
        s
    }
}

/// ε-continuation; fails if any fixed-point or frozen solve does not converge.
pub fn continuation(prob: &ProblemSpec, cfg: &ContinuationConfig) -> Result<SolveReport> {
    let mut failure = None;
    let report = continuation_inner(prob, cfg, &mut |_| {}, &mut failure)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// ε-continuation that always produces a report unless the problem itself
/// is malformed. Nonconvergence is recorded in the summary; `observer` sees
/// every application of `T`.
pub fn continuation_with(
    prob: &ProblemSpec,
    cfg: &ContinuationConfig,
    observer: &mut dyn FnMut(IterateEvent<'_>),
) -> Result<SolveReport> {
    let mut failure = None;
    continuation_inner(prob, cfg, observer, &mut failure)
}

fn continuation_inner(
    prob: &ProblemSpec,
    cfg: &ContinuationConfig,
    observer: &mut dyn FnMut(IterateEvent<'_>),
    failure: &mut Option<Error>,
) -> Result<SolveReport> {
    let clock = Instant::now();
    cfg.validate()?;
    prob.validate()?;
    let grid = *prob.grid();
    let scale = prob.scale();
    let tol = cfg.tol * scale;
    let tol_fp = cfg.tol_fp * scale;
    let barriers = barriers_for(prob, cfg)?;
    let schedule = cfg.schedule(&barriers, scale, grid.spacing());
    let ctx = Context {
        prob,
        cfg,
        barriers: &barriers,
        tol,
        tol_fp,
    };

    let mut v = barriers.midpoint();
    let mut history = Vec::new();
    let mut eps_solutions: Vec<GridFunction> = Vec::new();
    let mut eps_final = None;
    for &eps in &schedule {
        let run = fixed_point_run(&ctx, eps, &v, observer)?;
        history.push(run.record);
        v = run.u;
        eps_final = Some(eps);
        if let Some(e) = run.failure {
            *failure = Some(e);
            break;
        }
        eps_solutions.push(v.clone());
    }

    let u = v;
    let eps_last = eps_final.unwrap_or(schedule[0]);
    let h = build_h(&u, eps_last, cfg.extend_zero)?;
    let op = assemble_g(h.clone(), &prob.f1, &prob.f2)?;
    let delta = default_delta(&u, tol_fp);
    let masks = extract_free_boundary(&u, delta);
    let diagnostics = diagnostics(prob, cfg, &u, &op, &masks, delta, &history, &eps_solutions)?;
    let summary = ReportSummary {
        converged: failure.is_none(),
        failure: failure.as_ref().map(|e| e.to_string()),
        dim: grid.dim(),
        n: grid.shape().to_vec(),
        h: grid.spacing(),
        scale,
        tol,
        tol_fp,
        eps_schedule: schedule,
        eps_final,
        history,
        diagnostics,
        wall_time: clock.elapsed().as_secs_f64(),
    };
    Ok(SolveReport {
        u,
        h,
        barriers,
        masks,
        eps_solutions,
        summary,
    })
}

#[allow(clippy::too_many_arguments)]
fn diagnostics(
    prob: &ProblemSpec,
    cfg: &ContinuationConfig,
    u: &GridFunction,
    op: &AssembledOperator,
    masks: &FreeBoundaryMasks,
    delta: f64,
    history: &[EpsRecord],
    eps_solutions: &[GridFunction],
) -> Result<Diagnostics> {
    let grid = *u.grid();
    let closeness = estimate_closeness(
        &prob.f1,
        &prob.f2,
        prob.fref.as_ref(),
        cfg.closeness_samples,
        cfg.seed,
    )?;
    let beta_hat = sampled_beta(op, cfg.beta_pairs, 0.25 * grid.diam(), cfg.seed);
    let margin = prob.diag.subdomain_margin;
    let (res_plus, res_minus) = phase_residuals(u, prob, masks, delta)?;
    let sandwich = history
        .iter()
        .fold(CLEAN_SANDWICH, |a, r| merge_sandwich(a, r.sandwich));
    let eps_cauchy = eps_solutions
        .windows(2)
        .map(|w| w[1].max_abs_diff(&w[0]))
        .collect();
    let reference_error = prob.reference.as_ref().map(|r| r.max_abs_diff(u));
    let has_inner = !grid.inner_nodes(margin).is_empty();
    let (holder, c1alpha, w2p) = if has_inner {
        (
            holder_seminorm(u, prob.diag.alpha, margin)?,
            c1alpha_estimate(u, prob.diag.alpha, margin)?,
            w2p_seminorm(u, prob.diag.p, margin)?,
        )
    } else {
        (0.0, 0.0, 0.0)
    };
    let abp_denominator = 1.0
        + prob.f1.at_zero().abs()
        + prob.f2.at_zero().abs()
        + lp_norm(&prob.f, prob.diag.p)
        + grid
            .boundary()
            .into_iter()
            .fold(0.0_f64, |a, k| a.max(prob.g.get(k).abs()));
    Ok(Diagnostics {
        k_hat: closeness.k_hat,
        tau_hat: closeness.tau_hat,
        l_hat: prob.fref.as_ref().map(|_| closeness.l_hat),
        sigma_hat: prob.fref.as_ref().map(|_| closeness.sigma_hat),
        beta_hat,
        sup_norm: sup_norm(u),
        holder,
        c1alpha,
        w2p,
        abp_ratio: sup_norm(u) / abp_denominator,
        sandwich_passed: sandwich.passed,
        sandwich_lower_margin: sandwich.lower_margin,
        sandwich_upper_margin: sandwich.upper_margin,
        eps_cauchy,
        delta,
        res_plus,
        res_minus,
        plus_count: masks.plus.len(),
        minus_count: masks.minus.len(),
        zero_count: masks.zero.len(),
        reference_error,
    })
}

/// Largest sampled `β(x, x0)` over random interior node pairs with
/// `|x - x0| ≤ r0`.
pub fn sampled_beta(op: &AssembledOperator, pairs: usize, r0: f64, seed: u64) -> f64 {
    let grid = *op.grid();
    let nodes = grid.interior();
    if nodes.len() < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbe7a);
    let mut best = 0.0_f64;
    let mut found = 0;
    let mut tries = 0;
    while found < pairs && tries < 50 * pairs.max(1) {
        tries += 1;
        let x = nodes[rng.random_range(0..nodes.len())];
        let x0 = nodes[rng.random_range(0..nodes.len())];
        if grid.distance(x, x0) > r0 {
            continue;
        }
        found += 1;
        best = best.max(beta_oscillation(op, x, x0, 64, seed.wrapping_add(found as u64)));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{EllipticityPair, SymMatrix};

    fn lap(s: f64) -> OperatorSpec {
        OperatorSpec::affine(
            SymMatrix::scaled_identity(1, s),
            0.0,
            EllipticityPair::new(1.0, 2.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn masks_partition_interior() {
        let g = Grid::interval(-1.0, 1.0, 5).unwrap();
        let u = GridFunction::from_fn(g, |p| p[0]);
        let m = extract_free_boundary(&u, 0.0);
        assert_eq!(m.plus, vec![3]);
        assert_eq!(m.minus, vec![1]);
        assert_eq!(m.zero, vec![2]);
    }

    #[test]
    fn schedule_with_floor_ends_at_floor() {
        let g = Grid::interval(0.0, 1.0, 11).unwrap();
        let b = BarrierPair {
            lower: GridFunction::zeros(g),
            upper: GridFunction::constant(g, 1.0),
        };
        let cfg = ContinuationConfig {
            eps_floor_cells: Some(1.0),
            ..Default::default()
        };
        let s = cfg.schedule(&b, 1.0, 0.1);
        assert_eq!(s, vec![0.1]);
        let s = ContinuationConfig::default().schedule(&b, 1.0, 0.1);
        assert_eq!(s.len(), 8);
        assert!((s[7] - 0.1 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn identical_phases_converge_in_one_step() {
        let g = Grid::interval(-1.0, 1.0, 21).unwrap();
        let f = GridFunction::constant(g, 1.0);
        let bc = GridFunction::from_fn(g, |p| p[0]);
        let prob = ProblemSpec::new(lap(1.5), lap(1.5), f, bc).unwrap();
        let cfg = ContinuationConfig::default();
        let mid = GridFunction::zeros(g);
        let (_, gaps) = iterate_t(&prob, 0.1, &mid, &cfg).unwrap();
        assert!(gaps.len() <= 2, "{gaps:?}");
    }
}
