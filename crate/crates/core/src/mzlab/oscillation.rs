use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::norms::{continuous_norm_with, random_poly, NormOptions};
use crate::covering::Covering;
use crate::error::{Error, Result};
use crate::kernels::ZonalSum;
use crate::manifold::{distance, point_toward, random_point_at, ManifoldSpec, Point};

#[derive(Clone, Copy, Debug)]
pub struct OscillationOptions {
    pub boundary_samples: usize,
    pub interior_samples: usize,
    pub refine_steps: usize,
    pub centers: usize,
    pub norm: NormOptions,
}

impl Default for OscillationOptions {
    fn default() -> Self {
        Self {
            boundary_samples: 32,
            interior_samples: 32,
            refine_steps: 12,
            centers: 4,
            norm: NormOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationTrial {
    pub lhs: f64,
    pub norm: f64,
    pub implied: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationReport {
    pub n: usize,
    pub p: f64,
    pub delta: f64,
    pub radius: f64,
    pub multiplicity: usize,
    pub nodes: usize,
    pub trials: Vec<OscillationTrial>,
    pub implied_max: f64,
    pub implied_mean: f64,
}

/// max_{x ∈ B(ω, r)} |f(x) − f(ω)| from boundary and interior samples,
/// followed by a shrinking local search clamped to the ball.
fn ball_oscillation<R: Rng>(
    f: &ZonalSum,
    spec: &ManifoldSpec,
    center: &Point,
    r: f64,
    opts: &OscillationOptions,
    rng: &mut R,
) -> Result<f64> {
    let dim = spec.dim() as f64;
    let f0 = f.eval_raw(center.coords());
    let osc = |x: &Point| (f.eval_raw(x.coords()) - f0).abs();
    let mut best_x = center.clone();
    let mut best = 0.0;
    for i in 0..opts.boundary_samples + opts.interior_samples {
        let dist = if i < opts.boundary_samples {
            r
        } else {
            r * rng.random::<f64>().powf(1.0 / dim)
        };
        let x = random_point_at(spec, center, dist, rng)?;
        let v = osc(&x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let mut step = 0.25 * r;
    for _ in 0..opts.refine_steps {
        let mut x = random_point_at(spec, &best_x, step, rng)?;
        if distance(spec, center, &x)? > r {
            x = point_toward(spec, center, &x, r)?;
        }
        let v = osc(&x);
        if v > best {
            best = v;
            best_x = x;
        } else {
            step *= 0.6;
        }
    }
    Ok(best)
}

/// LHS = (Σ_ω |B(ω, δ/n)| max_{B(ω, δ/n)} |f − f(ω)|^p)^{1/p} for random
/// f ∈ Π_{4n}, with implied constant LHS / (a^{1/p} δ ‖f‖_p).
pub fn oscillation_check(
    spec: &ManifoldSpec,
    covering: &Covering,
    n: usize,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<OscillationReport> {
    oscillation_check_with(spec, covering, n, p, trials, seed, OscillationOptions::default())
}

pub fn oscillation_check_with(
    spec: &ManifoldSpec,
    covering: &Covering,
    n: usize,
    p: f64,
    trials: usize,
    seed: u64,
    opts: OscillationOptions,
) -> Result<OscillationReport> {
    if !(1.0..f64::INFINITY).contains(&p) {
        return Err(Error::param(format!("oscillation exponent must lie in [1, ∞), got {p}")));
    }
    if &covering.spec != spec {
        return Err(Error::param("covering lives on a different space"));
    }
    if n == 0 || trials == 0 {
        return Err(Error::param("degree and trial count must be positive"));
    }
    let r = covering.r;
    let delta = r * n as f64;
    let a = covering.multiplicity_observed.max(1);
    let vol = spec.ball_measure(r);
    let mut out = Vec::with_capacity(trials);
    for trial in 0..trials {
        let s = seed.wrapping_add(trial as u64).wrapping_mul(0x2545_f491_4f6c_dd1d);
        let f = random_poly(spec, 4 * n, opts.centers, s)?;
        let maxima: Vec<f64> = covering
            .nodes
            .par_iter()
            .enumerate()
            .map(|(i, w)| {
                let mut rng = ChaCha8Rng::seed_from_u64(s ^ (i as u64).wrapping_mul(0x9e37_79b9));
                ball_oscillation(&f, spec, w, r, &opts, &mut rng)
            })
            .collect::<Result<_>>()?;
        let lhs = (vol * maxima.iter().map(|m| m.powf(p)).sum::<f64>()).powf(1.0 / p);
        let norm = continuous_norm_with(&f, p, NormOptions { seed: s ^ 0x77, ..opts.norm })?.value;
        let implied = lhs / ((a as f64).powf(1.0 / p) * delta * norm);
        out.push(OscillationTrial { lhs, norm, implied });
    }
    let implied_max = out.iter().map(|t| t.implied).fold(0.0, f64::max);
    let implied_mean = out.iter().map(|t| t.implied).sum::<f64>() / out.len() as f64;
    Ok(OscillationReport {
        n,
        p,
        delta,
        radius: r,
        multiplicity: a,
        nodes: covering.len(),
        trials: out,
        implied_max,
        implied_mean,
    })
}

/// Oscillation LHS of an arbitrary function; zero exactly for constants.
pub fn oscillation_lhs(
    spec: &ManifoldSpec,
    covering: &Covering,
    f: &ZonalSum,
    p: f64,
    seed: u64,
) -> Result<f64> {
    let opts = OscillationOptions::default();
    let vol = spec.ball_measure(covering.r);
    let maxima: Vec<f64> = covering
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
            ball_oscillation(f, spec, w, covering.r, &opts, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok((vol * maxima.iter().map(|m| m.powf(p)).sum::<f64>()).powf(1.0 / p))
}
