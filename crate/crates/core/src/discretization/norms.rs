//! Discrete norms and seminorms on grid functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scheme::{second_difference, StencilSet};
use super::{Grid, GridFunction};
use crate::error::{Error, Result};

/// Largest node set scanned pair by pair.
const EXHAUSTIVE_LIMIT: usize = 3000;
const NEAR_FRACTION: f64 = 0.25;
const FAR_PAIRS: usize = 10_000;
const PAIR_SEED: u64 = 0x484f_4c44;

/// `(Σ_x |f(x)|^p h^d)^{1/p}` over interior nodes.
///
/// # Panics
/// If `p < 1`.
pub fn lp_norm(f: &GridFunction, p: f64) -> f64 {
    let g = f.grid();
    lp_norm_over(f.values(), &g.interior(), cell_volume(g), p)
}

/// Discrete `L^p` norm of `values` restricted to `nodes`, with cell volume `dv`.
pub fn lp_norm_over(values: &[f64], nodes: &[usize], dv: f64, p: f64) -> f64 {
    assert!(p >= 1.0, "L^p norm needs p >= 1, got {p}");
    if p.is_infinite() {
        return nodes.iter().fold(0.0, |a, &k| a.max(values[k].abs()));
    }
    let sum: f64 = nodes.iter().map(|&k| values[k].abs().powf(p)).sum();
    (sum * dv).powf(1.0 / p)
}

/// Largest absolute value over all nodes.
pub fn sup_norm(f: &GridFunction) -> f64 {
    f.values().iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn cell_volume(g: &Grid) -> f64 {
    g.spacing().powi(g.dim() as i32)
}

fn check_margin(g: &Grid, margin: f64) -> Result<Vec<usize>> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidParameter(format!("margin must be nonnegative, got {margin}")));
    }
    let nodes = g.inner_nodes(margin);
    if nodes.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no interior node at distance {margin} from the boundary"
        )));
    }
    Ok(nodes)
}

/// Sampled Hölder seminorm `max |u(x) - u(y)| / |x - y|^α` over nodes at
/// distance at least `margin` from the boundary.
///
/// Small node sets are scanned exhaustively. Larger ones use every pair
/// closer than a quarter of the diameter plus a fixed-seed sample of far
/// pairs.
pub fn holder_seminorm(u: &GridFunction, alpha: f64, margin: f64) -> Result<f64> {
    let nodes = check_margin(u.grid(), margin)?;
    Ok(holder_on(u.grid(), u.values(), &nodes, alpha))
}

fn holder_on(g: &Grid, values: &[f64], nodes: &[usize], alpha: f64) -> f64 {
    let ratio = |a: usize, b: usize| {
        let d = g.distance(a, b);
        (values[a] - values[b]).abs() / d.powf(alpha)
    };
    let mut best = 0.0_f64;
    if nodes.len() <= EXHAUSTIVE_LIMIT {
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                best = best.max(ratio(a, b));
            }
        }
        return best;
    }

    let mut member = vec![false; g.len()];
    for &k in nodes {
        member[k] = true;
    }
    let reach = (NEAR_FRACTION * g.diam() / g.spacing()).floor() as i32;
    let jmax = if g.dim() == 2 { reach } else { 0 };
    for dj in 0..=jmax {
        for di in -reach..=reach {
            if (dj == 0 && di <= 0) || di * di + dj * dj > reach * reach {
                continue;
            }
            for &a in nodes {
                if let Some(b) = g.shift(a, [di, dj]) {
                    if member[b] {
                        best = best.max(ratio(a, b));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
    for _ in 0..FAR_PAIRS {
        let a = nodes[rng.random_range(0..nodes.len())];
        let b = nodes[rng.random_range(0..nodes.len())];
        if a != b {
            best = best.max(ratio(a, b));
        }
    }
    best
}

/// Gradient components: central differences inside, one-sided on the faces.
pub fn gradient(u: &GridFunction) -> Vec<GridFunction> {
    let g = *u.grid();
    let h = g.spacing();
    (0..g.dim())
        .map(|axis| {
            let mut e = [0, 0];
            e[axis] = 1;
            let mut out = GridFunction::zeros(g);
            for k in 0..g.len() {
                let fwd = g.shift(k, e);
                let bwd = g.shift(k, [-e[0], -e[1]]);
                let d = match (fwd, bwd) {
                    (Some(p), Some(m)) => (u.get(p) - u.get(m)) / (2.0 * h),
                    (Some(p), None) => (u.get(p) - u.get(k)) / h,
                    (None, Some(m)) => (u.get(k) - u.get(m)) / h,
                    (None, None) => 0.0,
                };
                out.set(k, d);
            }
            out
        })
        .collect()
}

/// `sup|u| + sup|∇u| + max_i [∂_i u]_α` on the margin-interior.
pub fn c1alpha_estimate(u: &GridFunction, alpha: f64, margin: f64) -> Result<f64> {
    let g = *u.grid();
    let nodes = check_margin(&g, margin)?;
    let grad = gradient(u);
    let sup_u = nodes.iter().fold(0.0_f64, |a, &k| a.max(u.get(k).abs()));
    let sup_grad = nodes.iter().fold(0.0_f64, |a, &k| {
        let norm2: f64 = grad.iter().map(|d| d.get(k) * d.get(k)).sum();
        a.max(norm2.sqrt())
    });
    let holder = grad
        .iter()
        .map(|d| holder_on(&g, d.values(), &nodes, alpha))
        .fold(0.0, f64::max);
    Ok(sup_u + sup_grad + holder)
}

/// Discrete `L^p` norm on the margin-interior of the pointwise maximum of
/// `|normalised second difference|` over the axis and diagonal directions.
pub fn w2p_seminorm(u: &GridFunction, p: f64, margin: f64) -> Result<f64> {
    let g = *u.grid();
    let nodes = check_margin(&g, margin)?;
    let stencils = StencilSet::standard(g.dim());
    let mut dmax = vec![0.0; g.len()];
    for &k in &nodes {
        let mut m = 0.0_f64;
        for e in stencils.directions() {
            m = m.max(second_difference(u, k, *e)?.abs());
        }
        dmax[k] = m;
    }
    Ok(lp_norm_over(&dmax, &nodes, cell_volume(&g), p))
}
