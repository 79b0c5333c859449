//! Howard policy iteration for `Σ_p w_p(x) inf_α sup_β L^p_{α,β} u(x) = f(x)`.

use std::time::Instant;

use crate::discretization::{GridFunction, SchemeOperator, MAX_DIRECTIONS};
use crate::error::{Error, Result};

use super::linear::{linear_solve, LinearSystem};
use super::{FrozenProblem, SolveStats};

/// A control only replaces the current one if it improves the node value
/// by more than this relative amount.
const SWITCH_TOL: f64 = 1e-12;

#[inline]
fn switch_margin(current: f64) -> f64 {
    SWITCH_TOL * (1.0 + current.abs())
}

/// Frozen controls `(α, β)` per node and operator part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    parts: usize,
    alpha: Vec<u32>,
    beta: Vec<u32>,
}

impl Policy {
    pub fn new(scheme: &SchemeOperator) -> Self {
        let parts = scheme.parts().len();
        let len = scheme.grid().len() * parts;
        Self {
            parts,
            alpha: vec![0; len],
            beta: vec![0; len],
        }
    }

    #[inline]
    pub fn get(&self, node: usize, part: usize) -> (usize, usize) {
        let i = node * self.parts + part;
        (self.alpha[i] as usize, self.beta[i] as usize)
    }

    #[inline]
    fn set(&mut self, node: usize, part: usize, alpha: usize, beta: usize) {
        let i = node * self.parts + part;
        self.alpha[i] = alpha as u32;
        self.beta[i] = beta as u32;
    }

    /// Moves every β to a maximiser within its α group. Returns the number of changes.
    pub fn improve_beta(&mut self, scheme: &SchemeOperator, u: &[f64]) -> usize {
        let mut changes = 0;
        for k in scheme.grid().interior() {
            let d = scheme.differences(u, k);
            for (p, part) in scheme.parts().iter().enumerate() {
                let (a, b) = self.get(k, p);
                let current = part.op.stencil(a, b).value(&d);
                let (best, val) = part.op.group_sup(a, &d);
                if best != b && val > current + switch_margin(current) {
                    self.set(k, p, a, best);
                    changes += 1;
                }
            }
        }
        changes
    }

    /// Moves every α to a minimiser of the group supremum, resetting β to the
    /// group's maximiser when α changes. Returns the number of changes.
    pub fn improve_alpha(&mut self, scheme: &SchemeOperator, u: &[f64]) -> usize {
        let mut changes = 0;
        for k in scheme.grid().interior() {
            let d = scheme.differences(u, k);
            for (p, part) in scheme.parts().iter().enumerate() {
                let groups = part.op.groups().len();
                if groups == 1 {
                    continue;
                }
                let (a, _) = self.get(k, p);
                let (_, current) = part.op.group_sup(a, &d);
                let mut best = (a, current);
                for alt in 0..groups {
                    let (_, v) = part.op.group_sup(alt, &d);
                    if v < best.1 {
                        best = (alt, v);
                    }
                }
                if best.0 != a && best.1 < current - switch_margin(current) {
                    let (beta, _) = part.op.group_sup(best.0, &d);
                    self.set(k, p, best.0, beta);
                    changes += 1;
                }
            }
        }
        changes
    }

    /// Linear system obtained by freezing this policy.
    pub fn linear_system(&self, prob: &FrozenProblem) -> Result<LinearSystem> {
        let scheme = prob.scheme();
        let grid = scheme.grid();
        let mut coeffs = vec![[0.0; MAX_DIRECTIONS]; grid.len()];
        let mut rhs = vec![0.0; grid.len()];
        for k in grid.interior() {
            let mut offset = 0.0;
            for (p, part) in scheme.parts().iter().enumerate() {
                let w = part.weight.at(k);
                if w == 0.0 {
                    continue;
                }
                let (a, b) = self.get(k, p);
                let s = part.op.stencil(a, b);
                for (c, sc) in coeffs[k].iter_mut().zip(&s.coeffs) {
                    *c += w * sc;
                }
                offset += w * s.offset;
            }
            rhs[k] = prob.f().get(k) - offset;
        }
        LinearSystem::new(scheme.stencils().clone(), coeffs, rhs, prob.g().clone())
    }
}

/// Howard iteration: solve with frozen controls, re-optimise β until stable,
/// then re-optimise α. `max_iter` bounds the number of linear solves.
pub fn howard(
    prob: &FrozenProblem,
    init: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<(GridFunction, SolveStats)> {
    let start = Instant::now();
    let scheme = prob.scheme();
    let mut u = init.clone().with_boundary_of(prob.g());
    let mut res = prob.residual_sup(&u);
    let mut stats = SolveStats {
        iterations: 0,
        final_residual: res,
        policy_changes_last: 0,
        wall_time: 0.0,
        residual_history: vec![res],
    };
    if res <= tol {
        stats.wall_time = start.elapsed().as_secs_f64();
        return Ok((u, stats));
    }

    let mut policy = Policy::new(scheme);
    let mut changes = policy.improve_alpha(scheme, u.values());
    changes += policy.improve_beta(scheme, u.values());
    loop {
        loop {
            let sys = policy.linear_system(prob)?;
            u = linear_solve(&sys, Some(&u), 0.01 * tol)?;
            res = prob.residual_sup(&u);
            stats.iterations += 1;
            stats.final_residual = res;
            stats.policy_changes_last = changes;
            stats.residual_history.push(res);
            if res <= tol {
                stats.wall_time = start.elapsed().as_secs_f64();
                return Ok((u, stats));
            }
            if stats.iterations >= max_iter {
                stats.wall_time = start.elapsed().as_secs_f64();
                return Err(Error::NonConvergence(stats));
            }
            changes = policy.improve_beta(scheme, u.values());
            if changes == 0 {
                break;
            }
        }
        changes = policy.improve_alpha(scheme, u.values());
        changes += policy.improve_beta(scheme, u.values());
        if changes == 0 {
            // optimal controls but residual above tolerance: nothing left to try
            stats.wall_time = start.elapsed().as_secs_f64();
            return Err(Error::NonConvergence(stats));
        }
    }
}
