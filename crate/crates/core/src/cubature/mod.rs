//! Positive cubature rules exact on Π_D from a quadratic residual minimized
//! over the probability simplex.

mod gram;
mod solver;

pub use gram::{gram_matrix, gram_matrix_limited, Gram, GRAM_MEMORY_LIMIT};
pub use solver::{compensated_sum, power_estimate, project_simplex, solve_weights, Solution, SolverOptions};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::Covering;
use crate::error::{Error, Result};
use crate::jacobi::ReproducingKernel;
use crate::manifold::{zonal_arg_raw, ManifoldSpec, Point, Sampler};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub iterations: usize,
    pub tolerance: f64,
    pub tol_rel: f64,
    pub seed: u64,
    pub converged: bool,
    pub trace: f64,
    /// max over nodes of the rule's error on the kernel centred there
    #[serde(default)]
    pub node_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CubatureRule {
    pub spec: ManifoldSpec,
    pub degree: usize,
    pub n: usize,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub weight_max_scaled: f64,
    pub solver_meta: SolverMeta,
}

impl CubatureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn converged(&self) -> bool {
        self.solver_meta.converged
    }

    /// Σ λ_ω f(ω) for a function given on raw coordinates.
    pub fn apply(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
        let vals: Vec<f64> = self.nodes.par_iter().map(|p| f(p.coords())).collect();
        compensated_sum(&vals.iter().zip(&self.weights).map(|(v, w)| v * w).collect::<Vec<_>>())
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() || self.nodes.is_empty() {
            return Err(Error::param("rule needs matching nonempty nodes and weights"));
        }
        for p in &self.nodes {
            Point::from_coords(&self.spec, p.coords().to_vec())?;
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::param("rule has negative or non-finite weights"));
        }
        let s = compensated_sum(&self.weights);
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("rule weights sum to {s}")));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let rule: CubatureRule = serde_json::from_slice(&std::fs::read(path)?)?;
        rule.validate()?;
        Ok(rule)
    }
}

fn scaled_max(spec: &ManifoldSpec, weights: &[f64], n: usize) -> f64 {
    let s = (n as f64).powi(spec.d as i32 - 1);
    weights.iter().cloned().fold(0.0, f64::max) * s
}

/// Clips tiny negatives and renormalizes; fails on anything below −1e−14.
pub fn clip_weights(weights: &mut [f64]) -> Result<()> {
    if let Some(w) = weights.iter().find(|&&w| w < -1e-14 || !w.is_finite()) {
        return Err(Error::Numeric(format!("weight {w} is not a valid nonnegative weight")));
    }
    weights.iter_mut().for_each(|w| *w = w.max(0.0));
    let s = compensated_sum(weights);
    if !(s > 0.0) {
        return Err(Error::Numeric("weights sum to zero".into()));
    }
    weights.iter_mut().for_each(|w| *w /= s);
    Ok(())
}

/// Solves for a positive rule of degree `degree` on the covering's nodes.
/// A rule is returned even when the solver stops short of its tolerance;
/// `solver_meta.converged` says which.
pub fn build_rule(covering: &Covering, degree: usize, n: usize, opts: SolverOptions, seed: u64) -> Result<CubatureRule> {
    rule_from_nodes(&covering.spec, covering.nodes.clone(), degree, n, opts, seed)
}

pub fn rule_from_nodes(
    spec: &ManifoldSpec,
    nodes: Vec<Point>,
    degree: usize,
    n: usize,
    opts: SolverOptions,
    seed: u64,
) -> Result<CubatureRule> {
    if nodes.is_empty() {
        return Err(Error::param("rule needs at least one node"));
    }
    if degree == 0 {
        return Ok(uniform_rule(spec, nodes, n));
    }
    let g = gram_matrix(spec, &nodes, degree)?;
    let sol = solve_weights(&g, opts);
    let mut weights = sol.weights;
    clip_weights(&mut weights)?;
    let residual = g.quad_form(&weights);
    let mut gw = vec![0.0; weights.len()];
    g.matvec(&weights, &mut gw);
    let meta = SolverMeta {
        node_error: gw.iter().fold(0.0, |m, v| m.max(v.abs())),
        iterations: sol.iterations,
        tolerance: sol.tolerance,
        tol_rel: opts.tol_rel,
        seed,
        converged: residual <= sol.tolerance,
        trace: g.trace(),
    };
    Ok(CubatureRule {
        spec: spec.clone(),
        degree,
        n,
        weight_max_scaled: scaled_max(spec, &weights, n),
        nodes,
        weights,
        residual,
        solver_meta: meta,
    })
}

/// Equal weights; exact for constants only.
pub fn uniform_rule(spec: &ManifoldSpec, nodes: Vec<Point>, n: usize) -> CubatureRule {
    let m = nodes.len();
    let weights = vec![1.0 / m as f64; m];
    CubatureRule {
        spec: spec.clone(),
        degree: 0,
        n,
        weight_max_scaled: scaled_max(spec, &weights, n),
        nodes,
        weights,
        residual: 0.0,
        solver_meta: SolverMeta {
            iterations: 0,
            tolerance: 0.0,
            tol_rel: 0.0,
            seed: 0,
            converged: true,
            trace: 0.0,
            node_error: 0.0,
        },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub trials: usize,
    /// max |Σλ f(ω) − 1| for reproducing kernels centred at random points
    pub max_error_kernel: f64,
    /// max error for random-coefficient sums of five kernels
    pub max_error_random: f64,
    pub max_error: f64,
    /// max of measured error − (sqrt(residual + ε·(dim Π_D − 1))·sqrt(f Gram norm) + 1e−12)
    pub max_bound_excess: f64,
    pub bound_holds: bool,
}

/// Quadrature error of the rule on degree-D test functions with known integrals.
pub fn verify_exactness(rule: &CubatureRule, trials: usize, seed: u64) -> Result<ExactnessReport> {
    let spec = &rule.spec;
    let kind = spec.kind;
    let rk = ReproducingKernel::new(spec, rule.degree);
    let dim_minus_one = rk.at_one() - 1.0;
    let len = spec.real_len()?;
    let flat: Vec<f64> = rule.nodes.iter().flat_map(|p| p.coords().iter().copied()).collect();
    // λᵀGλ carries roundoff of order ε·max|G| = ε·(dim Π_D − 1)
    let root_res = (rule.residual.max(0.0) + f64::EPSILON * (rk.at_one() - 1.0)).sqrt();
    // Σ_ω λ_ω R_D(u(ω, y)) for one centre y
    let apply_kernel = |y: &[f64]| {
        let us: Vec<f64> = flat.chunks_exact(len).map(|c| zonal_arg_raw(kind, c, y)).collect();
        let mut vals = vec![0.0; us.len()];
        rk.eval_batch(&us, &mut vals);
        let terms: Vec<f64> = vals.iter().zip(&rule.weights).map(|(v, w)| v * w).collect();
        compensated_sum(&terms)
    };
    let mut sampler = Sampler::new(spec, seed)?;
    let mut coef_rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut report = ExactnessReport {
        trials,
        max_error_kernel: 0.0,
        max_error_random: 0.0,
        max_error: 0.0,
        max_bound_excess: f64::NEG_INFINITY,
        bound_holds: true,
    };
    for _ in 0..trials {
        let x = sampler.next_point();
        let err = (apply_kernel(x.coords()) - 1.0).abs();
        let bound = root_res * dim_minus_one.max(0.0).sqrt();
        report.max_error_kernel = report.max_error_kernel.max(err);
        report.max_bound_excess = report.max_bound_excess.max(err - bound - 1e-12);

        let ys = sampler.take(5);
        let a: Vec<f64> = (0..5).map(|_| coef_rng.sample(StandardNormal)).collect();
        let q: f64 = ys.iter().zip(&a).map(|(y, a)| a * apply_kernel(y.coords())).sum();
        let exact: f64 = a.iter().sum();
        let mut gnorm = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                let u = zonal_arg_raw(kind, ys[i].coords(), ys[j].coords());
                gnorm += a[i] * a[j] * (rk.eval(u) - 1.0);
            }
        }
        let err = (q - exact).abs();
        report.max_error_random = report.max_error_random.max(err);
        report.max_bound_excess = report.max_bound_excess.max(err - root_res * gnorm.max(0.0).sqrt() - 1e-12);
    }
    report.max_error = report.max_error_kernel.max(report.max_error_random);
    report.bound_holds = report.max_bound_excess <= 0.0;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightBoundReport {
    pub n: usize,
    pub nodes: usize,
    pub max_scaled: f64,
    pub mean_scaled: f64,
    pub zero_weights: usize,
    /// (lower edge, upper edge, count) over [0, max_scaled]
    pub histogram: Vec<(f64, f64, usize)>,
}

/// Distribution of λ_ω · n^{d−1}.
pub fn weight_bound_report(rule: &CubatureRule, n: usize) -> WeightBoundReport {
    const BINS: usize = 20;
    let s = (n as f64).powi(rule.spec.d as i32 - 1);
    let scaled: Vec<f64> = rule.weights.iter().map(|w| w * s).collect();
    let max = scaled.iter().cloned().fold(0.0, f64::max);
    let mut counts = vec![0usize; BINS];
    for v in &scaled {
        let b = if max > 0.0 { ((v / max) * BINS as f64) as usize } else { 0 };
        counts[b.min(BINS - 1)] += 1;
    }
    let width = max / BINS as f64;
    WeightBoundReport {
        n,
        nodes: scaled.len(),
        max_scaled: max,
        mean_scaled: scaled.iter().sum::<f64>() / scaled.len() as f64,
        zero_weights: rule.weights.iter().filter(|&&w| w == 0.0).count(),
        histogram: counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (i as f64 * width, (i + 1) as f64 * width, c))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{make_spec, sample_many, Kind};

    fn s3() -> ManifoldSpec {
        make_spec(Kind::Sphere, 3).unwrap()
    }

    fn antipodal() -> Vec<Point> {
        let s = s3();
        vec![
            Point::from_coords(&s, vec![0.0, 0.0, 1.0]).unwrap(),
            Point::from_coords(&s, vec![0.0, 0.0, -1.0]).unwrap(),
        ]
    }

    #[test]
    fn antipodal_gram_and_solution() {
        let g = gram_matrix(&s3(), &antipodal(), 1).unwrap();
        assert!((g.get(0, 0) - 3.0).abs() < 1e-14);
        assert!((g.get(0, 1) + 3.0).abs() < 1e-14);
        assert!((g.get(1, 0) + 3.0).abs() < 1e-14);
        let sol = solve_weights(&g, SolverOptions::default());
        assert!(sol.converged);
        assert!(sol.residual.abs() < 1e-20);
        assert!((sol.weights[0] - 0.5).abs() < 1e-15);
        let rule = rule_from_nodes(&s3(), antipodal(), 1, 1, SolverOptions::default(), 0).unwrap();
        let rep = verify_exactness(&rule, 100, 3).unwrap();
        assert!(rep.max_error <= 1e-14, "{rep:?}");
    }

    #[test]
    fn single_node_never_converges() {
        let nodes = vec![antipodal()[0].clone()];
        let g = gram_matrix(&s3(), &nodes, 3).unwrap();
        let sol = solve_weights(&g, SolverOptions::default());
        assert!(!sol.converged);
        assert!((sol.residual - g.get(0, 0)).abs() < 1e-12);
        assert_eq!(sol.weights, vec![1.0]);
    }

    #[test]
    fn gram_diagonal_and_psd() {
        use nalgebra::DMatrix;
        let spec = make_spec(Kind::ComplexProjective, 5).unwrap();
        let nodes = sample_many(&spec, 120, 4).unwrap();
        let g = gram_matrix(&spec, &nodes, 6).unwrap();
        let dim: f64 = (0..=6).map(|k| crate::jacobi::dim_harmonic(&spec, k)).sum();
        assert!((g.get(5, 5) - (dim - 1.0)).abs() < 1e-9 * dim);
        let dense = g.to_dense();
        let mat = DMatrix::from_fn(120, 120, |i, j| dense[i][j]);
        let eig = mat.symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8 * g.trace());
    }

    #[test]
    fn matvec_matches_dense() {
        let g = Gram::from_fn(7, |i, j| (i * 3 + j) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 });
        let x: Vec<f64> = (0..7).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; 7];
        g.matvec(&x, &mut y);
        let d = g.to_dense();
        for i in 0..7 {
            let e: f64 = (0..7).map(|j| d[i][j] * x[j]).sum();
            assert!((e - y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn simplex_projection() {
        let v = vec![0.3, -2.0, 5.0, 0.1, 0.2];
        let mut out = vec![0.0; 5];
        project_simplex(&v, &mut out);
        assert!(out.iter().all(|&x| x >= 0.0));
        assert!((compensated_sum(&out) - 1.0).abs() < 1e-15);
        assert_eq!(out, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn uniform_rule_integrates_constants() {
        let nodes = sample_many(&s3(), 17, 2).unwrap();
        let rule = uniform_rule(&s3(), nodes, 4);
        let rep = verify_exactness(&rule, 10, 1).unwrap();
        assert!(rep.max_error < 1e-14);
        let wb = weight_bound_report(&rule, 4);
        assert!((wb.max_scaled - 16.0 / 17.0).abs() < 1e-12);
        assert_eq!(wb.histogram.iter().map(|h| h.2).sum::<usize>(), 17);
    }

    #[test]
    fn clipping() {
        let mut w = vec![0.5, -1e-15, 0.5];
        clip_weights(&mut w).unwrap();
        assert_eq!(w[1], 0.0);
        let mut bad = vec![0.5, -1e-10, 0.5];
        assert!(clip_weights(&mut bad).is_err());
    }
}
