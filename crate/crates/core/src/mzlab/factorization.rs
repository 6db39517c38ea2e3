use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::norms::{random_poly, sup_estimate, NormMethod, NormOptions};
use crate::cubature::{compensated_sum, CubatureRule};
use crate::error::{Error, Result};
use crate::kernels::{CutoffEta, ZonalSum};
use crate::manifold::{ManifoldSpec, Point};

/// U_N f = (f(t_1), …, f(t_m)).
pub fn un_operator(f: &ZonalSum, nodes: &[Point]) -> Result<Vec<f64>> {
    f.eval_many(nodes)
}

/// T(u) = Σ_j w_j u_j K_{N,η}(·, t_j): degree 2N, multipliers η(k/N).
pub fn t_operator(spec: &ManifoldSpec, u: &[f64], weights: &[f64], centers: &[Point], n: usize) -> Result<ZonalSum> {
    if u.len() != weights.len() || u.len() != centers.len() {
        return Err(Error::DimensionMismatch {
            expected: centers.len(),
            got: u.len().min(weights.len()),
        });
    }
    if n == 0 {
        return Err(Error::param("T operator needs N ≥ 1"));
    }
    let coeffs = u.iter().zip(weights).map(|(a, b)| a * b).collect();
    let spectral = (0..=2 * n).map(|k| CutoffEta::Canonical.eval(k as f64 / n as f64)).collect();
    ZonalSum::new(spec, 2 * n, centers.to_vec(), coeffs, Some(spectral))
}

fn weighted_lp(values: &[f64], weights: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let terms: Vec<f64> = values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(q)).collect();
    compensated_sum(&terms).max(0.0).powf(1.0 / q)
}

/// Relative L² error ‖T U_N f − f‖₂ / ‖f‖₂ for random f ∈ Π_N.
/// `rule` provides the nodes and weights of T and U_N; `exact` must be exact
/// on Π_{4N} so that the squared error integrates exactly.
pub fn identity_error(
    rule: &CubatureRule,
    exact: &CubatureRule,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if exact.degree < 4 * n {
        return Err(Error::param(format!(
            "error rule has degree {} but squares of Π_{} need {}",
            exact.degree,
            2 * n,
            4 * n
        )));
    }
    let spec = &rule.spec;
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let f = random_poly(spec, n, 8, seed.wrapping_add(trial as u64))?;
        let g = t_operator(spec, &un_operator(&f, &rule.nodes)?, &rule.weights, &rule.nodes, n)?;
        let fv = f.eval_many(&exact.nodes)?;
        let gv = g.eval_many(&exact.nodes)?;
        let diff: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a - b).collect();
        let err = weighted_lp(&diff, &exact.weights, 2.0);
        let norm = weighted_lp(&fv, &exact.weights, 2.0);
        worst = worst.max(err / norm);
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorNormRow {
    pub n: usize,
    #[serde(with = "crate::report::exponent_plain")]
    pub q: f64,
    /// largest ‖T(u)‖_q / ‖u‖_{ℓ_{q,w}} seen
    pub ratio_max: f64,
    pub method: NormMethod,
}

/// Measured ‖T(u)‖_q / ‖u‖_{ℓ_{q,w}} over Gaussian u and u = U_N f.
/// `rule` defines T; norms of T(u) are taken on `eval_rule`, which is exact
/// for q = 2 when its degree is at least 4N; q = ∞ adds a sampled sup.
pub fn operator_norm_ratios(
    rule: &CubatureRule,
    eval_rule: &CubatureRule,
    n: usize,
    q_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<OperatorNormRow>> {
    let spec = &rule.spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs: Vec<Vec<f64>> = Vec::new();
    for trial in 0..trials {
        inputs.push((0..rule.len()).map(|_| rng.sample(StandardNormal)).collect());
        let f = random_poly(spec, n, 8, seed.wrapping_add(1000 + trial as u64))?;
        inputs.push(un_operator(&f, &rule.nodes)?);
    }
    let mut best = vec![0.0f64; q_list.len()];
    for (i, u) in inputs.iter().enumerate() {
        let g = t_operator(spec, u, &rule.weights, &rule.nodes, n)?;
        let gv = g.eval_many(&eval_rule.nodes)?;
        for (qi, &q) in q_list.iter().enumerate() {
            let mut tq = weighted_lp(&gv, &eval_rule.weights, q);
            if q.is_infinite() {
                let opts = NormOptions {
                    seed: seed ^ i as u64,
                    sup_samples: 2000,
                    refine_radius: 0.5 / n as f64,
                    ..NormOptions::default()
                };
                tq = tq.max(sup_estimate(spec, |x| g.eval_raw(x.coords()), opts)?.value);
            }
            best[qi] = best[qi].max(tq / weighted_lp(u, &rule.weights, q));
        }
    }
    Ok(q_list
        .iter()
        .zip(best)
        .map(|(&q, ratio_max)| OperatorNormRow {
            n,
            q,
            ratio_max,
            method: if q.is_infinite() {
                NormMethod::DenseSampleSup
            } else {
                NormMethod::FineQuadrature
            },
        })
        .collect())
}
