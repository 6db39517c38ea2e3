use rayon::prelude::*;
use serde::Serialize;

use super::norms::{continuous_norm_with, random_poly, NormOptions};
use crate::cubature::CubatureRule;
use crate::error::{Error, Result};
use crate::kernels::ZonalSum;
use crate::report::ExperimentReport;

/// Weighted discrete p-norm of node values:
/// ((1/s) Σ (sλ)^t |v|^p)^{1/p} with s = n^{d−1}, or max (sλ)^t |v| at p = ∞.
pub fn discrete_norm_values(values: &[f64], rule: &CubatureRule, n: usize, p: f64, t: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::param(format!("norm exponent must be positive, got {p}")));
    }
    if !(0.0..=p.min(1.0)).contains(&t) {
        return Err(Error::param(format!("weight exponent t = {t} must lie in [0, min(p, 1)]")));
    }
    if values.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            got: values.len(),
        });
    }
    let s = (n as f64).powi(rule.spec.d as i32 - 1);
    // powf(0, 0) = 1, the convention 0^0 = 1
    let scaled = rule.weights.iter().map(|w| (s * w).powf(t));
    if p.is_infinite() {
        return Ok(scaled.zip(values).map(|(a, v)| a * v.abs()).fold(0.0, f64::max));
    }
    let sum: f64 = scaled.zip(values).map(|(a, v)| a * v.abs().powf(p)).sum();
    Ok((sum / s).powf(1.0 / p))
}

pub fn discrete_norm(f: &ZonalSum, rule: &CubatureRule, n: usize, p: f64, t: f64) -> Result<f64> {
    if f.spec() != &rule.spec {
        return Err(Error::param("function and rule live on different spaces"));
    }
    let values = f.eval_many(&rule.nodes)?;
    discrete_norm_values(&values, rule, n, p, t)
}

#[derive(Clone, Copy, Debug)]
pub struct MzOptions {
    pub centers: usize,
    pub norm: NormOptions,
}

impl Default for MzOptions {
    fn default() -> Self {
        Self {
            centers: 16,
            norm: NormOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioBand {
    pub n: usize,
    pub p: f64,
    pub t: f64,
    pub min: f64,
    pub max: f64,
    pub band: f64,
}

fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    seed ^ ((n as u64) << 32) ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Discrete/continuous ratios over random f ∈ Π_n, one rule per degree.
/// (p, t) pairs with t > min(p, 1) are skipped.
pub fn mz_bands(
    configs: &[(usize, &CubatureRule)],
    p_list: &[f64],
    t_list: &[f64],
    trials: usize,
    seed: u64,
    opts: MzOptions,
) -> Result<Vec<RatioBand>> {
    if trials == 0 {
        return Err(Error::param("need at least one trial"));
    }
    let mut bands = Vec::new();
    for &(n, rule) in configs {
        let ratios: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let s = trial_seed(seed, n, i);
                let f = random_poly(&rule.spec, n, opts.centers, s)?;
                let values = f.eval_many(&rule.nodes)?;
                let mut out = Vec::new();
                for &p in p_list {
                    let cont = continuous_norm_with(&f, p, NormOptions { seed: s ^ 0xabcd, ..opts.norm })?.value;
                    for &t in t_list.iter().filter(|&&t| t <= p.min(1.0)) {
                        out.push(discrete_norm_values(&values, rule, n, p, t)? / cont);
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut col = 0;
        for &p in p_list {
            for &t in t_list.iter().filter(|&&t| t <= p.min(1.0)) {
                let (min, max) = ratios
                    .iter()
                    .map(|r| r[col])
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
                bands.push(RatioBand { n, p, t, min, max, band: max / min });
                col += 1;
            }
        }
    }
    Ok(bands)
}

pub fn mz_report(
    configs: &[(usize, &CubatureRule)],
    p_list: &[f64],
    t_list: &[f64],
    trials: usize,
    seed: u64,
    opts: MzOptions,
) -> Result<ExperimentReport> {
    let bands = mz_bands(configs, p_list, t_list, trials, seed, opts)?;
    let config = serde_json::json!({
        "n": configs.iter().map(|c| c.0).collect::<Vec<_>>(),
        "p": p_list.iter().map(|&p| crate::report::exponent::to_text(p)).collect::<Vec<_>>(),
        "t": t_list,
        "trials": trials,
        "centers": opts.centers,
    });
    let mut rep = ExperimentReport::new("mz", config);
    rep.seeds.push(seed);
    rep.budgets.insert("mc_max_samples".into(), opts.norm.max_samples as f64);
    rep.budgets.insert("mc_rel_stderr".into(), opts.norm.rel_stderr);
    rep.budgets.insert("sup_samples".into(), opts.norm.sup_samples as f64);
    for &(n, rule) in configs {
        rep.push(Some(n), None, None, "nodes", "count", rule.len() as f64);
    }
    for b in bands {
        for (stat, v) in [("ratio_min", b.min), ("ratio_max", b.max), ("band", b.band)] {
            rep.push(Some(b.n), Some(b.p), Some(b.t), "", stat, v);
        }
    }
    Ok(rep)
}
