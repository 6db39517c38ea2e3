use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cesaro_multipliers, CutoffEta};
use crate::error::{Error, Result};
use crate::jacobi::{addition_coeff, JacobiParams, Recurrence, ReproducingKernel};
use crate::manifold::{zonal_arg_raw, ManifoldSpec, Point};

#[derive(Serialize, Deserialize)]
struct ZonalRepr {
    spec: ManifoldSpec,
    degree: usize,
    centers: Vec<Point>,
    coeffs: Vec<f64>,
    spectral: Vec<f64>,
}

/// f(x) = Σ_j a_j Σ_{k=0}^{D} m_k c_{εk} P_{εk}(cos(d(x, y_j)/ε)).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ZonalRepr", into = "ZonalRepr")]
pub struct ZonalSum {
    spec: ManifoldSpec,
    degree: usize,
    centers: Vec<Point>,
    coeffs: Vec<f64>,
    spectral: Vec<f64>,
    // derived: centers packed contiguously and per-Jacobi-index weights
    flat: Vec<f64>,
    jw: Vec<f64>,
    rec: Recurrence,
}

impl From<ZonalSum> for ZonalRepr {
    fn from(z: ZonalSum) -> Self {
        ZonalRepr {
            spec: z.spec,
            degree: z.degree,
            centers: z.centers,
            coeffs: z.coeffs,
            spectral: z.spectral,
        }
    }
}

impl TryFrom<ZonalRepr> for ZonalSum {
    type Error = Error;
    fn try_from(r: ZonalRepr) -> Result<Self> {
        ZonalSum::new(&r.spec, r.degree, r.centers, r.coeffs, Some(r.spectral))
    }
}

const CHUNK: usize = 8;

impl ZonalSum {
    pub fn new(
        spec: &ManifoldSpec,
        degree: usize,
        centers: Vec<Point>,
        coeffs: Vec<f64>,
        spectral: Option<Vec<f64>>,
    ) -> Result<Self> {
        if centers.is_empty() || centers.len() != coeffs.len() {
            return Err(Error::param(format!(
                "need matching nonempty centers/coeffs, got {} and {}",
                centers.len(),
                coeffs.len()
            )));
        }
        let len = spec.real_len()?;
        let mut flat = Vec::with_capacity(len * centers.len());
        for c in &centers {
            if c.coords().len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    got: c.coords().len(),
                });
            }
            flat.extend_from_slice(c.coords());
        }
        let spectral = spectral.unwrap_or_else(|| vec![1.0; degree + 1]);
        if spectral.len() != degree + 1 {
            return Err(Error::param(format!(
                "spectral multipliers need length {}, got {}",
                degree + 1,
                spectral.len()
            )));
        }
        let eps = spec.epsilon;
        let mut jw = vec![0.0; eps * degree + 1];
        for (k, m) in spectral.iter().enumerate() {
            jw[eps * k] = m * addition_coeff(spec, eps * k);
        }
        Ok(Self {
            spec: spec.clone(),
            degree,
            centers,
            coeffs,
            spectral,
            flat,
            jw,
            rec: Recurrence::new(JacobiParams::of(spec), eps * degree),
        })
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn spectral(&self) -> &[f64] {
        &self.spectral
    }

    fn unit_multipliers(&self) -> bool {
        self.spectral.iter().all(|&m| m == 1.0)
    }

    fn check(&self, x: &Point) -> Result<()> {
        let len = self.spec.real_len()?;
        if x.coords().len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: x.coords().len(),
            });
        }
        Ok(())
    }

    /// Evaluates f; with unit multipliers the closed-form reproducing kernel is used.
    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        if self.unit_multipliers() {
            let rk = ReproducingKernel::new(&self.spec, self.degree);
            let len = x.coords().len();
            return Ok(self
                .flat
                .chunks_exact(len)
                .zip(&self.coeffs)
                .map(|(c, a)| a * rk.eval(zonal_arg_raw(self.spec.kind, x.coords(), c)))
                .sum());
        }
        Ok(self.eval_raw(x.coords()))
    }

    /// Evaluates f by the degree-by-degree series, whatever the multipliers.
    pub fn eval_per_degree(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        Ok(self.eval_raw(x.coords()))
    }

    /// Series evaluation from raw coordinates, vectorized over blocks of centers.
    pub(crate) fn eval_raw(&self, x: &[f64]) -> f64 {
        let kind = self.spec.kind;
        let len = x.len();
        let w = &self.jw;
        let mut total = 0.0;
        let mut u = [0.0; CHUNK];
        let mut a = [0.0; CHUNK];
        for (cs, co) in self.flat.chunks(len * CHUNK).zip(self.coeffs.chunks(CHUNK)) {
            let m = co.len();
            u.fill(0.0);
            a.fill(0.0);
            for j in 0..m {
                u[j] = zonal_arg_raw(kind, x, &cs[j * len..(j + 1) * len]);
                a[j] = co[j];
            }
            total += block_series(&self.rec, w, &u, &a);
        }
        total
    }

    pub fn eval_many(&self, xs: &[Point]) -> Result<Vec<f64>> {
        for x in xs {
            self.check(x)?;
        }
        Ok(xs.par_iter().map(|x| self.eval_raw(x.coords())).collect())
    }

    /// ∫ f dσ: only the k = 0 component survives.
    pub fn integral(&self) -> f64 {
        self.spectral[0] * self.coeffs.iter().sum::<f64>()
    }

    /// Same centers and coefficients with new multipliers (length sets the degree).
    pub fn with_spectral(&self, spectral: Vec<f64>) -> Result<ZonalSum> {
        let degree = spectral.len().checked_sub(1).ok_or_else(|| Error::param("empty multiplier list"))?;
        ZonalSum::new(&self.spec, degree, self.centers.clone(), self.coeffs.clone(), Some(spectral))
    }

    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<ZonalSum> {
        ZonalSum::new(&self.spec, self.degree, self.centers.clone(), coeffs, Some(self.spectral.clone()))
    }

    fn map_spectral(&self, degree: usize, f: impl Fn(usize, f64) -> f64) -> ZonalSum {
        let spectral = self.spectral[..=degree].iter().enumerate().map(|(k, &m)| f(k, m)).collect();
        self.with_spectral(spectral).expect("valid multipliers")
    }

    /// Y_k f; the zero function when k exceeds the degree.
    pub fn yk_project(&self, k: usize) -> ZonalSum {
        self.map_spectral(self.degree, |j, m| if j == k { m } else { 0.0 })
    }

    /// V_{N,η} f: multipliers scaled by η(k/N), degree capped at 2N.
    pub fn vn_apply(&self, n: usize) -> ZonalSum {
        self.vn_apply_with(n, CutoffEta::Canonical)
    }

    pub fn vn_apply_with(&self, n: usize, eta: CutoffEta) -> ZonalSum {
        let n = n.max(1);
        let degree = self.degree.min(2 * n);
        self.map_spectral(degree, |k, m| {
            if k <= n {
                m
            } else {
                m * eta.eval(k as f64 / n as f64)
            }
        })
    }

    /// (−Δ)^r f through the eigenvalues εk(εk+α+β+1).
    pub fn frac_laplacian(&self, r: f64) -> Result<ZonalSum> {
        if !(r > 0.0) {
            return Err(Error::param(format!("fractional power must be positive, got {r}")));
        }
        let s = &self.spec;
        let shift = s.alpha + s.beta + 1.0;
        Ok(self.map_spectral(self.degree, |k, m| {
            let ek = (s.epsilon * k) as f64;
            m * (ek * (ek + shift)).powf(r)
        }))
    }

    /// Cesàro mean σ_K^δ f.
    pub fn cesaro_apply(&self, delta: f64, k: usize) -> Result<ZonalSum> {
        let mult = cesaro_multipliers(delta, k)?;
        let degree = self.degree.min(k);
        Ok(self.map_spectral(degree, |j, m| m * mult[j]))
    }

    /// Exact ⟨f, g⟩ in L²(dσ) from the addition formula.
    pub fn l2_inner(&self, other: &ZonalSum) -> Result<f64> {
        if self.spec != other.spec {
            return Err(Error::param("inner product of functions on different spaces"));
        }
        let eps = self.spec.epsilon;
        let top = self.degree.min(other.degree);
        let mut w = vec![0.0; eps * top + 1];
        for k in 0..=top {
            w[eps * k] = self.spectral[k] * other.spectral[k] * addition_coeff(&self.spec, eps * k);
        }
        let rec = Recurrence::new(JacobiParams::of(&self.spec), eps * top);
        let kind = self.spec.kind;
        let len = self.spec.real_len()?;
        let partial: Vec<f64> = self
            .flat
            .par_chunks(len)
            .zip(self.coeffs.par_iter())
            .map(|(x, &ai)| {
                let mut acc = 0.0;
                let mut u = [0.0; CHUNK];
                let mut a = [0.0; CHUNK];
                for (cs, co) in other.flat.chunks(len * CHUNK).zip(other.coeffs.chunks(CHUNK)) {
                    u.fill(0.0);
                    a.fill(0.0);
                    for j in 0..co.len() {
                        u[j] = zonal_arg_raw(kind, x, &cs[j * len..(j + 1) * len]);
                        a[j] = co[j];
                    }
                    acc += block_series(&rec, &w, &u, &a);
                }
                ai * acc
            })
            .collect();
        Ok(partial.iter().sum())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_inner(self).expect("same space").max(0.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }
}

/// Σ_j a_j Σ_k w_k P_k(u_j) over one block of arguments.
#[inline]
fn block_series(rec: &Recurrence, w: &[f64], u: &[f64; CHUNK], a: &[f64; CHUNK]) -> f64 {
    let mut vals = [0.0; CHUNK];
    rec.weighted_sum_batch(w, u, &mut vals);
    vals.iter().zip(a).map(|(v, a)| v * a).sum()
}
