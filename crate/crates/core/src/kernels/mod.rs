//! Smooth spectral cutoffs, delayed-mean kernels `K_{N,η}`, Cesàro means and
//! the zonal function representation used by the rest of the crate.

mod zonal;

pub use zonal::ZonalSum;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{addition_coeff, deriv_factor, lgamma, JacobiParams, Recurrence};
use crate::manifold::{Kind, ManifoldSpec};

/// Spectral cutoff η. `Canonical` is C^∞, equal to 1 on [0,1] and 0 on [2,∞);
/// `Hard` is the indicator of [0,1] and reproduces the Dirichlet kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffEta {
    #[default]
    Canonical,
    Hard,
}

impl CutoffEta {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            CutoffEta::Canonical => eta_eval(u),
            CutoffEta::Hard => {
                if u <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CutoffEta::Canonical => "canonical",
            CutoffEta::Hard => "hard",
        }
    }
}

/// exp(-1/s) transition from 1 at u = 1 down to 0 at u = 2.
pub fn eta_eval(u: f64) -> f64 {
    if u <= 1.0 {
        1.0
    } else if u >= 2.0 {
        0.0
    } else {
        // f(2-u) / (f(2-u) + f(u-1)) rewritten to avoid underflow
        1.0 / (1.0 + (1.0 / (2.0 - u) - 1.0 / (u - 1.0)).exp())
    }
}

/// Smooth step rising from 0 at s <= 0 to 1 at s >= 1.
pub(crate) fn smooth_step(s: f64) -> f64 {
    1.0 - eta_eval(1.0 + s.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub n: usize,
    pub eta: CutoffEta,
}

impl KernelSpec {
    pub fn new(n: usize, eta: CutoffEta) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("kernel degree parameter N must be >= 1"));
        }
        Ok(Self { n, eta })
    }

    pub fn canonical(n: usize) -> Result<Self> {
        Self::new(n, CutoffEta::Canonical)
    }
}

/// A finite Jacobi series `Σ_k w_k P_k^{(a,b)}(u)`.
#[derive(Clone, Debug)]
pub struct JacobiSeries {
    rec: Recurrence,
    weights: Vec<f64>,
}

impl JacobiSeries {
    pub fn new(params: JacobiParams, weights: Vec<f64>) -> Self {
        let rec = Recurrence::new(params, weights.len().saturating_sub(1));
        Self { rec, weights }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.rec.weighted_sum(&self.weights, u)
    }

    pub fn eval_batch(&self, us: &[f64], out: &mut [f64]) {
        self.rec.weighted_sum_batch(&self.weights, us, out)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Termwise i-th derivative in u.
    pub fn derivative(&self, params: JacobiParams, i: usize) -> JacobiSeries {
        let shifted = JacobiParams {
            a1: params.a1 + i as f64,
            b1: params.b1 + i as f64,
        };
        let w: Vec<f64> = self
            .weights
            .iter()
            .enumerate()
            .skip(i)
            .map(|(k, w)| w * deriv_factor(params, i, k))
            .collect();
        if w.is_empty() {
            return JacobiSeries::new(shifted, vec![0.0]);
        }
        JacobiSeries::new(shifted, w)
    }
}

/// K_{N,η}(u) = Σ_{k=0}^{2N} η(k/N) c_k P_k^{(α,β)}(u).
#[derive(Clone, Debug)]
pub struct Kernel {
    spec: ManifoldSpec,
    kspec: KernelSpec,
    series: JacobiSeries,
}

impl Kernel {
    pub fn new(spec: &ManifoldSpec, kspec: KernelSpec) -> Result<Self> {
        if spec.kind == Kind::RealProjective {
            return Err(Error::UseLift(
                "evaluate the kernel on the sphere of the same d with even degrees".into(),
            ));
        }
        if kspec.n == 0 {
            return Err(Error::param("kernel degree parameter N must be >= 1"));
        }
        let n = kspec.n as f64;
        let weights = (0..=2 * kspec.n)
            .map(|k| kspec.eta.eval(k as f64 / n) * addition_coeff(spec, k))
            .collect();
        Ok(Self {
            spec: spec.clone(),
            kspec,
            series: JacobiSeries::new(JacobiParams::of(spec), weights),
        })
    }

    pub fn kspec(&self) -> KernelSpec {
        self.kspec
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.series.eval(u)
    }

    pub fn derivative(&self, i: usize) -> JacobiSeries {
        self.series.derivative(JacobiParams::of(&self.spec), i)
    }
}

pub fn kernel_eval(spec: &ManifoldSpec, kspec: KernelSpec, u: f64) -> Result<f64> {
    Ok(Kernel::new(spec, kspec)?.eval(u))
}

pub fn kernel_deriv_eval(spec: &ManifoldSpec, kspec: KernelSpec, i: usize, u: f64) -> Result<f64> {
    Ok(Kernel::new(spec, kspec)?.derivative(i).eval(u))
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub x: f64,
    pub theta: f64,
    pub value: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    pub n: usize,
    pub ell: usize,
    pub order: usize,
    pub eta: CutoffEta,
    /// max over the grid of |K^{(i)}(cos θ)| / (N^{d-1+2i} (Nθ)^{-ℓ})
    pub implied_constant: f64,
    pub argmax_x: f64,
    /// log-log slope of |K^{(i)}| against Nθ over the upper half of the
    /// log-range of Nθ, fitted to the decreasing upper envelope
    pub tail_slope: f64,
    pub rows: Vec<DecayRow>,
}

pub const DECAY_GRID_POINTS: usize = 2000;

/// Decay profile of the i-th kernel derivative on a log grid θ ∈ [1/N, π].
pub fn kernel_decay_profile(spec: &ManifoldSpec, kspec: KernelSpec, ell: usize, i: usize) -> Result<DecayProfile> {
    if ell == 0 {
        return Err(Error::param("decay order ell must be >= 1"));
    }
    let kernel = Kernel::new(spec, kspec)?;
    let series = kernel.derivative(i);
    let n = kspec.n as f64;
    let g = DECAY_GRID_POINTS;
    let (lo, hi) = ((1.0 / n).ln(), PI.ln());
    let thetas: Vec<f64> = (0..g).map(|j| (lo + (hi - lo) * j as f64 / (g - 1) as f64).exp()).collect();
    let us: Vec<f64> = thetas.iter().map(|t| t.cos()).collect();
    let mut vals = vec![0.0; g];
    series.eval_batch(&us, &mut vals);
    let scale = n.powi(spec.d as i32 - 1 + 2 * i as i32);
    let rows: Vec<DecayRow> = thetas
        .iter()
        .zip(&vals)
        .map(|(&theta, v)| {
            let x = n * theta;
            let value = v.abs();
            DecayRow {
                x,
                theta,
                value,
                ratio: value / (scale * x.powi(-(ell as i32))),
            }
        })
        .collect();
    let (implied_constant, argmax_x) = rows
        .iter()
        .fold((0.0f64, 0.0), |acc, r| if r.ratio > acc.0 { (r.ratio, r.x) } else { acc });
    let tail_slope = tail_slope(&rows, (n * PI).sqrt());
    Ok(DecayProfile {
        n: kspec.n,
        ell,
        order: i,
        eta: kspec.eta,
        implied_constant,
        argmax_x,
        tail_slope,
        rows,
    })
}

fn tail_slope(rows: &[DecayRow], x_min: f64) -> f64 {
    // decreasing upper envelope: running max taken from the right
    let mut env = vec![0.0; rows.len()];
    let mut run = 0.0f64;
    for (j, r) in rows.iter().enumerate().rev() {
        run = run.max(r.value);
        env[j] = run;
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .zip(&env)
        .filter(|(r, e)| r.x >= x_min && **e > 0.0)
        .map(|(r, e)| (r.x.ln(), e.ln()))
        .collect();
    least_squares(&pts).0
}

/// Slope, intercept and r² of an ordinary least-squares line.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// ∫_0^π |K_{N,η}(cos θ)| α(θ) dθ.
pub fn l1_kernel_norm(spec: &ManifoldSpec, kspec: KernelSpec) -> Result<f64> {
    let kernel = Kernel::new(spec, kspec)?;
    spec.radial_integrate(|t| kernel.eval(t.cos()).abs())
}

/// A_j^δ = Γ(j+δ+1) / (Γ(δ+1) Γ(j+1)).
pub fn cesaro_number(delta: f64, j: usize) -> f64 {
    let jf = j as f64;
    (lgamma(jf + delta + 1.0) - lgamma(delta + 1.0) - lgamma(jf + 1.0)).exp()
}

/// Multipliers A_{K-j}^δ / A_K^δ for j = 0..=K.
pub fn cesaro_multipliers(delta: f64, k: usize) -> Result<Vec<f64>> {
    if !(delta > -1.0) {
        return Err(Error::param(format!("Cesàro order must exceed -1, got {delta}")));
    }
    let top = cesaro_number(delta, k);
    Ok((0..=k).map(|j| cesaro_number(delta, k - j) / top).collect())
}

/// ∞→∞ operator norm of the Cesàro mean σ_K^δ: the L¹ norm of its zonal kernel.
pub fn cesaro_lebesgue_constant(spec: &ManifoldSpec, delta: f64, k: usize) -> Result<f64> {
    if spec.kind == Kind::RealProjective {
        return Err(Error::UseLift("Cesàro kernels are evaluated on the sphere".into()));
    }
    let m = cesaro_multipliers(delta, k)?;
    let w = m.iter().enumerate().map(|(j, m)| m * addition_coeff(spec, j)).collect();
    let series = JacobiSeries::new(JacobiParams::of(spec), w);
    spec.radial_integrate(|t| series.eval(t.cos()).abs())
}
