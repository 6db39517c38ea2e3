use serde::Serialize;

use super::norms::{continuous_norm_with, random_poly, NormOptions};
use crate::error::{Error, Result};
use crate::jacobi::dim_harmonic;
use crate::kernels::least_squares;
use crate::manifold::ManifoldSpec;

#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    /// log N
    pub x: Vec<f64>,
    /// log ‖f − V_N f‖_p
    pub y: Vec<f64>,
    pub slope: f64,
    pub r2: f64,
    /// every error was at or below 1e−14; slope and r² are meaningless
    pub degenerate: bool,
}

/// Fits log ‖f − V_N f‖_p against log N for a random f of smoothness r.
///
/// f = Σ_k s_k Y_k g with g a random element of Π_M, M = 4·max N, and
/// s_k = λ_k^{−r/2} / sqrt(dim H_k · (k+1)) where λ_k = εk(εk+α+β+1).
/// The extra factor turns the white-noise spectrum of g into one whose
/// tail beyond N has L² mass of order N^{−2r}.
pub fn approx_rate(spec: &ManifoldSpec, r: f64, p: f64, n_list: &[usize], seed: u64) -> Result<RateFit> {
    if !(r > 0.0) {
        return Err(Error::param(format!("smoothness must be positive, got {r}")));
    }
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::param("need at least three ascending positive degrees"));
    }
    let m = 4 * n_list[n_list.len() - 1];
    let g = random_poly(spec, m, 32, seed)?;
    let shift = spec.alpha + spec.beta + 1.0;
    let spectral: Vec<f64> = (0..=m)
        .map(|k| {
            if k == 0 {
                return 1.0;
            }
            let ek = (spec.epsilon * k) as f64;
            let lambda = ek * (ek + shift);
            lambda.powf(-0.5 * r) / (dim_harmonic(spec, k) * (k + 1) as f64).sqrt()
        })
        .collect();
    let f = g.with_spectral(spectral)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut errors = Vec::new();
    for &n in n_list {
        let approx = f.vn_apply(n);
        // f − V_N f keeps multipliers m_k (1 − η(k/N))
        let resid: Vec<f64> = (0..=m)
            .map(|k| {
                let kept = if k < approx.spectral().len() { approx.spectral()[k] } else { 0.0 };
                f.spectral()[k] - kept
            })
            .collect();
        let h = f.with_spectral(resid)?;
        let err = continuous_norm_with(&h, p, NormOptions { seed, ..NormOptions::default() })?.value;
        errors.push(err);
        x.push((n as f64).ln());
        y.push(err.max(f64::MIN_POSITIVE).ln());
    }
    let degenerate = errors.iter().all(|&e| e <= 1e-14);
    let pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    let (slope, _, r2) = least_squares(&pts);
    Ok(RateFit { x, y, slope, r2, degenerate })
}
