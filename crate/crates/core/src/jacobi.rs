//! Jacobi polynomials normalized by `P_k(1) = Γ(k+α+1) / (Γ(k+1) Γ(α+1))`,
//! the addition-formula coefficients `c_k`, and reproducing kernels of
//! polynomial spaces in closed form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    pub a1: f64,
    pub b1: f64,
}

impl JacobiParams {
    pub fn new(a1: f64, b1: f64) -> Result<Self> {
        if !(a1 > -1.0 && b1 > -1.0) {
            return Err(Error::param(format!(
                "Jacobi parameters must exceed -1, got ({a1}, {b1})"
            )));
        }
        Ok(Self { a1, b1 })
    }

    /// The pair (α, β) of a manifold.
    pub fn of(spec: &ManifoldSpec) -> Self {
        Self {
            a1: spec.alpha,
            b1: spec.beta,
        }
    }

    fn shifted(self, i: usize) -> Self {
        Self {
            a1: self.a1 + i as f64,
            b1: self.b1 + i as f64,
        }
    }
}

pub(crate) fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Coefficients of `P_k = (A_k t + B_k) P_{k-1} - C_k P_{k-2}`, stored from k = 2.
#[derive(Clone, Debug)]
pub struct Recurrence {
    params: JacobiParams,
    coef: Vec<[f64; 3]>,
}

impl Recurrence {
    pub fn new(params: JacobiParams, k_max: usize) -> Self {
        let (a, b) = (params.a1, params.b1);
        let coef = (2..=k_max.max(1))
            .map(|k| {
                let n = k as f64;
                let s = 2.0 * n + a + b;
                let den = 2.0 * n * (n + a + b) * (s - 2.0);
                [
                    (s - 1.0) * s * (s - 2.0) / den,
                    (s - 1.0) * (a * a - b * b) / den,
                    2.0 * (n + a - 1.0) * (n + b - 1.0) * s / den,
                ]
            })
            .collect();
        Self { params, coef }
    }

    pub fn k_max(&self) -> usize {
        self.coef.len() + 1
    }

    #[inline]
    fn p1(&self, t: f64) -> f64 {
        let (a, b) = (self.params.a1, self.params.b1);
        0.5 * ((a + b + 2.0) * t + (a - b))
    }

    /// P_k(t) for a single degree.
    pub fn eval(&self, k: usize, t: f64) -> f64 {
        assert!(k <= self.k_max());
        if k == 0 {
            return 1.0;
        }
        let (mut p0, mut p1) = (1.0, self.p1(t));
        for c in &self.coef[..k - 1] {
            let p2 = (c[0] * t + c[1]) * p1 - c[2] * p0;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    /// Fills `out[k] = P_k(t)` for k = 0..out.len().
    pub fn eval_all(&self, t: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        assert!(out.len() <= self.k_max() + 1);
        out[0] = 1.0;
        if out.len() > 1 {
            out[1] = self.p1(t);
        }
        for k in 2..out.len() {
            let c = &self.coef[k - 2];
            out[k] = (c[0] * t + c[1]) * out[k - 1] - c[2] * out[k - 2];
        }
    }

    /// Σ_k w_k P_k(t) for one argument.
    pub fn weighted_sum(&self, weights: &[f64], t: f64) -> f64 {
        if weights.is_empty() {
            return 0.0;
        }
        assert!(weights.len() <= self.k_max() + 1);
        let (mut p0, mut p1) = (1.0, self.p1(t));
        let mut acc = weights[0];
        if weights.len() > 1 {
            acc += weights[1] * p1;
        }
        for (c, w) in self.coef.iter().zip(&weights[2..]) {
            let p2 = (c[0] * t + c[1]) * p1 - c[2] * p0;
            p0 = p1;
            p1 = p2;
            acc += w * p1;
        }
        acc
    }

    /// `out[j] = P_k(ts[j])`, vectorized across arguments.
    pub fn eval_batch(&self, k: usize, ts: &[f64], out: &mut [f64]) {
        assert!(k <= self.k_max());
        assert_eq!(out.len(), ts.len());
        if k == 0 {
            out.fill(1.0);
            return;
        }
        let (a, b) = (self.params.a1, self.params.b1);
        let (h1, h0) = (0.5 * (a + b + 2.0), 0.5 * (a - b));
        let mut p0 = vec![1.0; ts.len()];
        for (o, t) in out.iter_mut().zip(ts) {
            *o = h1 * t + h0;
        }
        for c in &self.coef[..k - 1] {
            let (ca, cb, cc) = (c[0], c[1], c[2]);
            for ((o, q), t) in out.iter_mut().zip(p0.iter_mut()).zip(ts) {
                let p2 = (ca * t + cb) * *o - cc * *q;
                *q = *o;
                *o = p2;
            }
        }
    }

    /// `out[j] = Σ_k w_k P_k(ts[j])`, vectorized across arguments.
    pub fn weighted_sum_batch(&self, weights: &[f64], ts: &[f64], out: &mut [f64]) {
        let n = ts.len();
        assert_eq!(out.len(), n);
        if weights.is_empty() {
            out.fill(0.0);
            return;
        }
        assert!(weights.len() <= self.k_max() + 1);
        let (a, b) = (self.params.a1, self.params.b1);
        let (h1, h0) = (0.5 * (a + b + 2.0), 0.5 * (a - b));
        let mut p0 = vec![1.0; n];
        let mut p1: Vec<f64> = ts.iter().map(|t| h1 * t + h0).collect();
        let w1 = weights.get(1).copied().unwrap_or(0.0);
        for j in 0..n {
            out[j] = weights[0] + w1 * p1[j];
        }
        for (c, &w) in self.coef.iter().zip(&weights[2.min(weights.len())..]) {
            let (ca, cb, cc) = (c[0], c[1], c[2]);
            for j in 0..n {
                let p2 = (ca * ts[j] + cb) * p1[j] - cc * p0[j];
                p0[j] = p1[j];
                p1[j] = p2;
                out[j] += w * p2;
            }
        }
    }
}

/// P_k^{(a1,b1)}(t) by forward three-term recurrence.
pub fn jacobi_eval(params: JacobiParams, k: usize, t: f64) -> f64 {
    Recurrence::new(params, k).eval(k, t)
}

/// P_k(1) from the Γ-ratio normalization.
pub fn jacobi_at_one(params: JacobiParams, k: usize) -> f64 {
    let kf = k as f64;
    (lgamma(kf + params.a1 + 1.0) - lgamma(kf + 1.0) - lgamma(params.a1 + 1.0)).exp()
}

/// d/dt P_k(t) = (k + a1 + b1 + 1)/2 · P_{k-1}^{(a1+1, b1+1)}(t).
pub fn jacobi_deriv(params: JacobiParams, k: usize, t: f64) -> f64 {
    jacobi_deriv_n(params, 1, k, t)
}

/// i-th derivative, applying the shift identity i times.
pub fn jacobi_deriv_n(params: JacobiParams, i: usize, k: usize, t: f64) -> f64 {
    if i > k {
        return 0.0;
    }
    deriv_factor(params, i, k) * jacobi_eval(params.shifted(i), k - i, t)
}

/// Γ(k+a+b+1+i) / (2^i Γ(k+a+b+1)).
pub(crate) fn deriv_factor(params: JacobiParams, i: usize, k: usize) -> f64 {
    let s = k as f64 + params.a1 + params.b1 + 1.0;
    (0..i).map(|j| 0.5 * (s + j as f64)).product()
}

/// c_k = Γ(β+1)(2k+α+β+1)Γ(k+α+β+1) / (Γ(α+β+2)Γ(k+β+1)).
pub fn addition_coeff(spec: &ManifoldSpec, k: usize) -> f64 {
    coeff_ab(spec.alpha, spec.beta, k)
}

pub(crate) fn coeff_ab(a: f64, b: f64, k: usize) -> f64 {
    let kf = k as f64;
    let lg = lgamma(b + 1.0) + lgamma(kf + a + b + 1.0) - lgamma(a + b + 2.0) - lgamma(kf + b + 1.0);
    (2.0 * kf + a + b + 1.0) * lg.exp()
}

/// dim H_k = c_{εk} P_{εk}(1).
pub fn dim_harmonic(spec: &ManifoldSpec, k: usize) -> f64 {
    let j = spec.epsilon * k;
    addition_coeff(spec, j) * jacobi_at_one(JacobiParams::of(spec), j)
}

/// dim Π_D = Σ_{k ≤ D} dim H_k.
pub fn dim_poly_space(spec: &ManifoldSpec, degree: usize) -> f64 {
    (0..=degree).map(|k| dim_harmonic(spec, k)).sum()
}

/// Σ_{k=0}^{D} c_k P_k^{(α,β)}(t), through P_D^{(α+1,β)}.
pub fn dirichlet_closed_form(spec: &ManifoldSpec, degree: usize, t: f64) -> f64 {
    let (a, b) = (spec.alpha, spec.beta);
    dirichlet_scale(a, b, degree) * jacobi_eval(JacobiParams { a1: a + 1.0, b1: b }, degree, t)
}

fn dirichlet_scale(a: f64, b: f64, degree: usize) -> f64 {
    let df = degree as f64;
    (lgamma(b + 1.0) - lgamma(a + b + 2.0) + lgamma(df + a + b + 2.0) - lgamma(df + b + 1.0)).exp()
}

/// Reproducing kernel of Π_D as a function of u = cos(d/ε):
/// Σ_{k=0}^{D} c_{εk} P_{εk}(u). On real projective space (α = β) the even
/// part of the degree-2D sphere kernel is taken.
#[derive(Clone, Debug)]
pub struct ReproducingKernel {
    epsilon: usize,
    scale: f64,
    rec: Recurrence,
    degree: usize,
}

impl ReproducingKernel {
    pub fn new(spec: &ManifoldSpec, degree: usize) -> Self {
        let top = spec.epsilon * degree;
        let (a, b) = (spec.alpha, spec.beta);
        Self {
            epsilon: spec.epsilon,
            scale: dirichlet_scale(a, b, top),
            rec: Recurrence::new(JacobiParams { a1: a + 1.0, b1: b }, top),
            degree: top,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let p = |t: f64| self.scale * self.rec.eval(self.degree, t);
        if self.epsilon == 2 {
            0.5 * (p(u) + p(-u))
        } else {
            p(u)
        }
    }

    /// Batched evaluation, used for Gram rows.
    pub fn eval_batch(&self, us: &[f64], out: &mut [f64]) {
        self.rec.eval_batch(self.degree, us, out);
        if self.epsilon == 2 {
            let neg: Vec<f64> = us.iter().map(|u| -u).collect();
            let mut tmp = vec![0.0; us.len()];
            self.rec.eval_batch(self.degree, &neg, &mut tmp);
            out.iter_mut().zip(&tmp).for_each(|(o, t)| *o = 0.5 * self.scale * (*o + t));
        } else {
            out.iter_mut().for_each(|o| *o *= self.scale);
        }
    }

    /// Value at u = 1, i.e. dim Π_D.
    pub fn at_one(&self) -> f64 {
        self.eval(1.0)
    }
}

pub fn reproducing_kernel(spec: &ManifoldSpec, degree: usize, u: f64) -> f64 {
    ReproducingKernel::new(spec, degree).eval(u)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub k: usize,
    pub theta: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub params: JacobiParams,
    pub k_max: usize,
    pub implied_constant: f64,
    pub argmax_k: usize,
    pub argmax_theta: f64,
    /// max over k of |P_k(1)| / k^{a1}
    pub theta0_constant: f64,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Envelope min{k^{a1}, k^{-1/2} θ^{-a1-1/2}} on [0, π/2], mirrored with b1
/// on [π/2, π].
pub fn jacobi_envelope(params: JacobiParams, k: usize, theta: f64) -> f64 {
    let kf = k as f64;
    let (p, th) = if theta <= std::f64::consts::FRAC_PI_2 {
        (params.a1, theta)
    } else {
        (params.b1, std::f64::consts::PI - theta)
    };
    let first = kf.powf(p);
    let env = if th > 0.0 {
        first.min(kf.powf(-0.5) * th.powf(-p - 0.5))
    } else {
        first
    };
    env.max(f64::EPSILON)
}

/// Max of |P_k(cos θ)| / envelope over 1 ≤ k ≤ k_max and the θ grid.
pub fn jacobi_bound_check(params: JacobiParams, k_max: usize, grid: &[f64]) -> Result<BoundReport> {
    if !(params.a1 > -0.5 && params.b1 > -0.5) {
        return Err(Error::param(format!(
            "bound check needs parameters > -1/2, got ({}, {})",
            params.a1, params.b1
        )));
    }
    if k_max == 0 || grid.is_empty() {
        return Err(Error::param("bound check needs k_max >= 1 and a nonempty grid"));
    }
    let rec = Recurrence::new(params, k_max);
    let mut vals = vec![0.0; k_max + 1];
    let mut rows = Vec::with_capacity(k_max * grid.len());
    let (mut best, mut arg_k, mut arg_t) = (0.0f64, 0, 0.0);
    for &theta in grid {
        rec.eval_all(theta.cos(), &mut vals);
        for (k, v) in vals.iter().enumerate().skip(1) {
            let ratio = v.abs() / jacobi_envelope(params, k, theta);
            if ratio > best {
                (best, arg_k, arg_t) = (ratio, k, theta);
            }
            rows.push(BoundRow { k, theta, ratio });
        }
    }
    let theta0_constant = (1..=k_max)
        .map(|k| jacobi_at_one(params, k) / (k as f64).powf(params.a1))
        .fold(0.0, f64::max);
    Ok(BoundReport {
        params,
        k_max,
        implied_constant: best,
        argmax_k: arg_k,
        argmax_theta: arg_t,
        theta0_constant,
        rows,
    })
}
