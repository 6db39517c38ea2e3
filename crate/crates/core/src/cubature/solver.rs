use serde::{Deserialize, Serialize};

use super::gram::Gram;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Converged once λᵀGλ ≤ tol_rel · trace(G) / m.
    pub tol_rel: f64,
    pub power_iters: usize,
    /// Stop early when the best node error improves by less than 0.1% over
    /// this many iterations (0 disables).
    pub stall_window: usize,
    /// Keep iterating until max_i |(Gλ)_i| is at most this. (Gλ)_i is the
    /// rule's error on the reproducing kernel centred at node i; unlike
    /// λᵀGλ it is not squared, so it stays measurable far below the
    /// roundoff floor of the quadratic form.
    pub node_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol_rel: 1e-10,
            power_iters: 30,
            stall_window: 100,
            node_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub weights: Vec<f64>,
    pub residual: f64,
    /// max_i |(Gλ)_i| at the returned weights
    pub node_error: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Absolute residual tolerance that was applied.
    pub tolerance: f64,
    pub lipschitz: f64,
    /// Best node error after each iteration.
    pub history: Vec<f64>,
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Euclidean projection onto the probability simplex (sort-and-threshold),
/// renormalized with a compensated sum.
pub fn project_simplex(v: &[f64], out: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let (mut cum, mut tau) = (0.0, 0.0);
    for (k, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    for (o, &x) in out.iter_mut().zip(v) {
        *o = (x - tau).max(0.0);
    }
    let total = compensated_sum(out);
    out.iter_mut().for_each(|o| *o /= total);
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest eigenvalue estimate by power iteration from a fixed start vector.
pub fn power_estimate(g: &Gram, iters: usize) -> f64 {
    let m = g.dim();
    let mut v: Vec<f64> = (0..m).map(|i| 1.0 + ((i as f64 + 1.0) * 0.754_877_666).fract()).collect();
    let mut w = vec![0.0; m];
    let mut est = 0.0;
    for _ in 0..iters.max(1) {
        let n = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        g.matvec(&v, &mut w);
        est = dot(&v, &w);
        std::mem::swap(&mut v, &mut w);
    }
    est
}

/// Minimizes λᵀGλ over the probability simplex by accelerated projected
/// gradient with gradient-based restarts, starting from uniform weights.
pub fn solve_weights(g: &Gram, opts: SolverOptions) -> Solution {
    let m = g.dim();
    let tolerance = opts.tol_rel * g.trace() / m as f64;
    let mut x = vec![1.0 / m as f64; m];
    let mut gx = vec![0.0; m];
    g.matvec(&x, &mut gx);
    let mut best = (x.clone(), dot(&x, &gx), max_abs(&gx));
    let mut history = Vec::new();
    // power iteration underestimates; a little slack keeps the step stable
    let lipschitz = 1.05 * power_estimate(g, opts.power_iters).max(f64::MIN_POSITIVE);
    let step = 1.0 / lipschitz;
    let mut y = x.clone();
    let mut gy = gx.clone();
    let mut t = 1.0f64;
    let mut x_new = vec![0.0; m];
    let mut gx_new = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut iterations = 0;
    while (best.1 > tolerance || best.2 > opts.node_tol) && iterations < opts.max_iter && m > 1 {
        iterations += 1;
        for ((tr, yi), gi) in trial.iter_mut().zip(&y).zip(&gy) {
            *tr = yi - step * gi;
        }
        project_simplex(&trial, &mut x_new);
        g.matvec(&x_new, &mut gx_new);
        let node_error = max_abs(&gx_new);
        if node_error < best.2 {
            best = (x_new.clone(), dot(&x_new, &gx_new), node_error);
        }
        history.push(best.2);
        let w = opts.stall_window;
        if w > 0 && history.len() > w && best.2 > 0.999 * history[history.len() - 1 - w] {
            break;
        }
        // restart when the momentum direction opposes the progress made
        let restart: f64 = y
            .iter()
            .zip(&x_new)
            .zip(&x)
            .map(|((yi, xn), xo)| (yi - xn) * (xn - xo))
            .sum();
        let beta = if restart > 0.0 {
            t = 1.0;
            0.0
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let b = (t - 1.0) / t_next;
            t = t_next;
            b
        };
        for i in 0..m {
            y[i] = x_new[i] + beta * (x_new[i] - x[i]);
            gy[i] = gx_new[i] + beta * (gx_new[i] - gx[i]);
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut gx, &mut gx_new);
    }
    let (weights, residual, node_error) = best;
    Solution {
        converged: residual <= tolerance,
        weights,
        residual,
        node_error,
        iterations,
        tolerance,
        lipschitz,
        history,
    }
}
