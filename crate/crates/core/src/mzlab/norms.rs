use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::ZonalSum;
use crate::manifold::{random_point_at, ManifoldSpec, Point, Sampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactSpectralL2,
    MonteCarlo,
    FineQuadrature,
    DenseSampleSup,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    #[serde(with = "crate::report::exponent_plain")]
    pub p: f64,
    pub method: NormMethod,
    /// standard error for Monte Carlo, 0 for exact values; sup estimates are
    /// lower bounds and carry 0 here
    pub stderr_or_bound: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    pub seed: u64,
    pub batch: usize,
    pub rel_stderr: f64,
    pub max_samples: usize,
    pub sup_samples: usize,
    /// Starting search radius of the local sup refinement.
    pub refine_radius: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            batch: 4096,
            rel_stderr: 0.005,
            max_samples: 1_000_000,
            sup_samples: 10_000,
            refine_radius: 0.1,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::param(format!("norm exponent must be positive, got {p}")));
    }
    Ok(())
}

/// Monte Carlo L^p norm of an arbitrary function, sampled in batches until
/// the relative standard error target or the sample cap is reached.
pub fn mc_norm(
    spec: &ManifoldSpec,
    f: impl Fn(&Point) -> f64 + Sync,
    p: f64,
    opts: NormOptions,
) -> Result<NormEstimate> {
    check_p(p)?;
    let mut sampler = Sampler::new(spec, opts.seed)?;
    let (mut sum, mut sum_sq, mut count) = (0.0, 0.0, 0usize);
    loop {
        let pts = sampler.take(opts.batch);
        let vals: Vec<f64> = pts.par_iter().map(|x| f(x).abs().powf(p)).collect();
        for v in vals {
            sum += v;
            sum_sq += v * v;
        }
        count += opts.batch;
        let mean = sum / count as f64;
        let var = (sum_sq / count as f64 - mean * mean).max(0.0);
        let se_mean = (var / count as f64).sqrt();
        let value = mean.powf(1.0 / p);
        // delta method for M^{1/p}
        let se = if mean > 0.0 { value * se_mean / (p * mean) } else { 0.0 };
        if value == 0.0 || se <= opts.rel_stderr * value || count >= opts.max_samples {
            return Ok(NormEstimate {
                value,
                p,
                method: NormMethod::MonteCarlo,
                stderr_or_bound: se,
                samples: count,
            });
        }
    }
}

/// Lower estimate of sup |f| from dense uniform samples plus a shrinking
/// local search around the best few.
pub fn sup_estimate(
    spec: &ManifoldSpec,
    f: impl Fn(&Point) -> f64 + Sync,
    opts: NormOptions,
) -> Result<NormEstimate> {
    let pts = Sampler::new(spec, opts.seed)?.take(opts.sup_samples);
    let vals: Vec<f64> = pts.par_iter().map(|x| f(x).abs()).collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(17));
    let mut best = vals[order[0]];
    let mut evals = pts.len();
    for &start in order.iter().take(5) {
        let (mut x, mut fx) = (pts[start].clone(), vals[start]);
        let mut rad = opts.refine_radius;
        for _ in 0..40 {
            let cands: Vec<Point> = (0..8)
                .map(|_| random_point_at(spec, &x, rad, &mut rng))
                .collect::<Result<_>>()?;
            evals += cands.len();
            let improved = cands
                .iter()
                .map(|c| (c, f(c).abs()))
                .filter(|(_, v)| *v > fx)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match improved {
                Some((c, v)) => {
                    x = c.clone();
                    fx = v;
                }
                None => rad *= 0.5,
            }
        }
        best = best.max(fx);
    }
    Ok(NormEstimate {
        value: best,
        p: f64::INFINITY,
        method: NormMethod::DenseSampleSup,
        stderr_or_bound: 0.0,
        samples: evals,
    })
}

/// ‖f‖_p: exact for p = 2, Monte Carlo for other finite p, sampled sup for ∞.
pub fn continuous_norm(f: &ZonalSum, p: f64) -> Result<NormEstimate> {
    continuous_norm_with(f, p, NormOptions::default())
}

pub fn continuous_norm_with(f: &ZonalSum, p: f64, opts: NormOptions) -> Result<NormEstimate> {
    check_p(p)?;
    if p == 2.0 {
        return Ok(NormEstimate {
            value: f.l2_norm(),
            p,
            method: NormMethod::ExactSpectralL2,
            stderr_or_bound: 0.0,
            samples: 0,
        });
    }
    let eval = |x: &Point| f.eval_raw(x.coords());
    if p.is_infinite() {
        let opts = NormOptions {
            refine_radius: 1.0 / (f.degree().max(1) as f64),
            ..opts
        };
        return sup_estimate(f.spec(), eval, opts);
    }
    mc_norm(f.spec(), eval, p, opts)
}

/// Random f ∈ Π_n: uniform centres, standard normal coefficients, unit multipliers.
pub fn random_poly(spec: &ManifoldSpec, n: usize, centers_count: usize, seed: u64) -> Result<ZonalSum> {
    if centers_count == 0 {
        return Err(Error::param("random polynomial needs at least one centre"));
    }
    let centers = Sampler::new(spec, seed)?.take(centers_count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ef_f1c1_e475);
    let coeffs = (0..centers_count).map(|_| rng.sample(StandardNormal)).collect();
    ZonalSum::new(spec, n, centers, coeffs, None)
}
