//! Compact two-point homogeneous spaces: structure constants, points, the
//! geodesic metric (closed geodesics of length 2π), the radial measure and
//! uniform sampling.

mod quaternion;

pub use quaternion::Quaternion;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, gauss_legendre};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Sphere,
    RealProjective,
    ComplexProjective,
    QuaternionProjective,
    CayleyPlane,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Sphere => "sphere",
            Kind::RealProjective => "real_projective",
            Kind::ComplexProjective => "complex_projective",
            Kind::QuaternionProjective => "quaternion_projective",
            Kind::CayleyPlane => "cayley_plane",
        }
    }

    /// Real dimension of the base field (1, 2 or 4). Cayley has no point model.
    pub fn field_dim(self) -> usize {
        match self {
            Kind::Sphere | Kind::RealProjective => 1,
            Kind::ComplexProjective => 2,
            Kind::QuaternionProjective => 4,
            Kind::CayleyPlane => 8,
        }
    }

    pub fn is_projective(self) -> bool {
        !matches!(self, Kind::Sphere)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "sphere" | "s" => Ok(Kind::Sphere),
            "real_projective" | "rp" => Ok(Kind::RealProjective),
            "complex_projective" | "cp" => Ok(Kind::ComplexProjective),
            "quaternion_projective" | "hp" => Ok(Kind::QuaternionProjective),
            "cayley_plane" | "cayley" | "op" => Ok(Kind::CayleyPlane),
            other => Err(Error::param(format!("unknown manifold kind '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    kind: Kind,
    d: usize,
    a: usize,
    b: usize,
    epsilon: usize,
    alpha: f64,
    beta: f64,
}

/// Identity of a compact two-point homogeneous space of dimension `d - 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct ManifoldSpec {
    pub kind: Kind,
    pub d: usize,
    pub a: usize,
    pub b: usize,
    pub epsilon: usize,
    pub alpha: f64,
    pub beta: f64,
    radial_const: f64,
}

impl PartialEq for ManifoldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.d == other.d
    }
}

impl From<ManifoldSpec> for SpecRepr {
    fn from(s: ManifoldSpec) -> Self {
        SpecRepr {
            kind: s.kind,
            d: s.d,
            a: s.a,
            b: s.b,
            epsilon: s.epsilon,
            alpha: s.alpha,
            beta: s.beta,
        }
    }
}

impl TryFrom<SpecRepr> for ManifoldSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self> {
        let spec = make_spec(r.kind, r.d)?;
        if spec.a != r.a
            || spec.b != r.b
            || spec.epsilon != r.epsilon
            || spec.alpha != r.alpha
            || spec.beta != r.beta
        {
            return Err(Error::param(format!(
                "structure constants do not match {} with d={}",
                r.kind, r.d
            )));
        }
        Ok(spec)
    }
}

/// Builds the spec for `kind` with dimension parameter `d`.
pub fn make_spec(kind: Kind, d: usize) -> Result<ManifoldSpec> {
    let bad = |why: &str| Err(Error::param(format!("d={d} inadmissible for {kind}: {why}")));
    if d < 3 {
        return bad("need d >= 3");
    }
    let (a, b) = match kind {
        Kind::Sphere => (0, d - 2),
        Kind::RealProjective => (d - 2, 0),
        Kind::ComplexProjective => {
            if d < 5 || d % 2 == 0 {
                return bad("need odd d >= 5");
            }
            (d - 3, 1)
        }
        Kind::QuaternionProjective => {
            if d < 9 || (d - 1) % 4 != 0 {
                return bad("need d in {9, 13, 17, ...}");
            }
            (d - 5, 3)
        }
        Kind::CayleyPlane => {
            if d != 17 {
                return bad("need d = 17");
            }
            (8, 7)
        }
    };
    let epsilon = if kind == Kind::RealProjective { 2 } else { 1 };
    let alpha = (d as f64 - 3.0) / 2.0;
    let beta = ((d as f64 - 2.0) * (epsilon as f64 - 1.0) + b as f64 - 1.0) / 2.0;
    let radial_const = 1.0 / unnormalized_mass(a, b);
    Ok(ManifoldSpec {
        kind,
        d,
        a,
        b,
        epsilon,
        alpha,
        beta,
        radial_const,
    })
}

fn raw_density(a: usize, b: usize, t: f64) -> f64 {
    (0.5 * t).sin().powi(a as i32) * t.sin().powi(b as i32)
}

// Gauss–Legendre with doubling until the relative change is below 1e-13.
fn unnormalized_mass(a: usize, b: usize) -> f64 {
    let mut n = 16;
    let mut prev = f64::NAN;
    loop {
        let (x, w) = gauss_legendre(n);
        let v: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| w * raw_density(a, b, 0.5 * PI * (x + 1.0)))
            .sum::<f64>()
            * 0.5
            * PI;
        if ((v - prev) / v).abs() <= 1e-13 || n >= 4096 {
            return v;
        }
        prev = v;
        n *= 2;
    }
}

fn gl128() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(128))
}

impl ManifoldSpec {
    /// Dimension of the manifold itself, `d - 1`.
    pub fn dim(&self) -> usize {
        self.d - 1
    }

    /// Number of reals in a stored point.
    pub fn real_len(&self) -> Result<usize> {
        match self.kind {
            Kind::Sphere | Kind::RealProjective => Ok(self.d),
            Kind::ComplexProjective => Ok(self.d + 1),
            Kind::QuaternionProjective => Ok(self.d + 3),
            Kind::CayleyPlane => Err(self.no_points()),
        }
    }

    pub(crate) fn no_points(&self) -> Error {
        Error::UnsupportedKind {
            kind: self.kind.to_string(),
            reason: "no coordinate model for points".into(),
        }
    }

    pub fn radial_constant(&self) -> f64 {
        self.radial_const
    }

    /// α(t) = C sin^a(t/2) sin^b(t), normalized to unit mass on [0, π].
    pub fn radial_density(&self, t: f64) -> f64 {
        self.radial_const * raw_density(self.a, self.b, t)
    }

    /// d/dt log α(t).
    pub fn log_density_deriv(&self, t: f64) -> f64 {
        0.5 * self.a as f64 / (0.5 * t).tan() + self.b as f64 / t.tan()
    }

    /// Integral over the manifold of the zonal function `g(d(·, o))`.
    pub fn radial_integrate_tol(&self, g: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        adaptive_integrate(|t| g(t) * self.radial_density(t), 0.0, PI, tol)
    }

    pub fn radial_integrate(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        self.radial_integrate_tol(g, 1e-10)
    }

    /// Normalized measure of a geodesic ball of radius `r`.
    pub fn ball_measure(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= PI {
            return 1.0;
        }
        // the complement is shorter to integrate for large radii
        let (lo, hi, flip) = if r > 0.5 * PI { (r, PI, true) } else { (0.0, r, false) };
        let (x, w) = gl128();
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        let v: f64 = x
            .iter()
            .zip(w)
            .map(|(x, w)| w * self.radial_density(c + h * x))
            .sum::<f64>()
            * h;
        if flip {
            (1.0 - v).clamp(0.0, 1.0)
        } else {
            v.clamp(0.0, 1.0)
        }
    }
}

/// Unit vector over the base field, stored as a flat real array in canonical
/// form (projective points have their first non-negligible coordinate real
/// and positive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Validates a stored representative: length and unit norm within 1e-9.
    pub fn from_coords(spec: &ManifoldSpec, coords: Vec<f64>) -> Result<Self> {
        let len = spec.real_len()?;
        if coords.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: coords.len(),
            });
        }
        let nrm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !nrm.is_finite() || (nrm - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("point norm {nrm} is not 1")));
        }
        Self::normalized(spec, coords)
    }

    /// Normalizes an arbitrary nonzero vector and canonicalizes it.
    pub fn normalized(spec: &ManifoldSpec, mut v: Vec<f64>) -> Result<Self> {
        let len = spec.real_len()?;
        if v.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: v.len(),
            });
        }
        let nrm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::param("cannot normalize a zero vector"));
        }
        v.iter_mut().for_each(|c| *c /= nrm);
        canonicalize(spec.kind, &mut v);
        Ok(Point { coords: v })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    fn check(&self, spec: &ManifoldSpec) -> Result<()> {
        let len = spec.real_len()?;
        if self.coords.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: self.coords.len(),
            });
        }
        Ok(())
    }
}

fn canonicalize(kind: Kind, v: &mut [f64]) {
    let f = kind.field_dim();
    let Some(k) = (0..v.len() / f).find(|&k| {
        v[k * f..(k + 1) * f].iter().map(|c| c * c).sum::<f64>().sqrt() > 1e-9
    }) else {
        return;
    };
    match kind {
        Kind::Sphere | Kind::CayleyPlane => {}
        Kind::RealProjective => {
            if v[k] < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
        }
        Kind::ComplexProjective => {
            let (re, im) = (v[2 * k], v[2 * k + 1]);
            let m = re.hypot(im);
            let (pr, pi) = (re / m, -im / m);
            for z in v.chunks_exact_mut(2) {
                let (a, b) = (z[0], z[1]);
                z[0] = a * pr - b * pi;
                z[1] = a * pi + b * pr;
            }
            v[2 * k + 1] = 0.0;
        }
        Kind::QuaternionProjective => {
            let q = Quaternion::from_slice(&v[4 * k..4 * k + 4]);
            let phase = q.conj().scale(1.0 / q.norm());
            for c in v.chunks_exact_mut(4) {
                (Quaternion::from_slice(c) * phase).write_to(c);
            }
            v[4 * k + 1] = 0.0;
            v[4 * k + 2] = 0.0;
            v[4 * k + 3] = 0.0;
        }
    }
}

/// Field inner product Σ conj(x_i) y_i as a quaternion (real and complex
/// fields occupy the leading components).
fn field_inner(kind: Kind, x: &[f64], y: &[f64]) -> Quaternion {
    match kind {
        Kind::ComplexProjective => {
            let (mut re, mut im) = (0.0, 0.0);
            for (a, b) in x.chunks_exact(2).zip(y.chunks_exact(2)) {
                re += a[0] * b[0] + a[1] * b[1];
                im += a[0] * b[1] - a[1] * b[0];
            }
            Quaternion::new(re, im, 0.0, 0.0)
        }
        Kind::QuaternionProjective => x
            .chunks_exact(4)
            .zip(y.chunks_exact(4))
            .fold(Quaternion::default(), |acc, (a, b)| {
                acc + Quaternion::from_slice(a).conj() * Quaternion::from_slice(b)
            }),
        _ => Quaternion::new(dot(x, y), 0.0, 0.0, 0.0),
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Writes `x · s` (right scalar multiplication over the field) into `out`.
fn right_mul(kind: Kind, x: &[f64], s: Quaternion, out: &mut [f64]) {
    match kind {
        Kind::ComplexProjective => {
            for (o, a) in out.chunks_exact_mut(2).zip(x.chunks_exact(2)) {
                o[0] = a[0] * s.w - a[1] * s.x;
                o[1] = a[0] * s.x + a[1] * s.w;
            }
        }
        Kind::QuaternionProjective => {
            for (o, a) in out.chunks_exact_mut(4).zip(x.chunks_exact(4)) {
                (Quaternion::from_slice(a) * s).write_to(o);
            }
        }
        _ => {
            for (o, a) in out.iter_mut().zip(x) {
                *o = a * s.w;
            }
        }
    }
}

/// Modulus of the field inner product, the only ingredient of the metric.
#[inline]
pub(crate) fn inner_modulus(kind: Kind, x: &[f64], y: &[f64]) -> f64 {
    match kind {
        Kind::Sphere => dot(x, y),
        Kind::RealProjective => dot(x, y).abs(),
        _ => field_inner(kind, x, y).norm(),
    }
}

/// `cos(d(x, y) / ε)`, the argument of the addition formula, from raw coordinates.
#[inline]
pub(crate) fn zonal_arg_raw(kind: Kind, x: &[f64], y: &[f64]) -> f64 {
    match kind {
        Kind::Sphere => dot(x, y).clamp(-1.0, 1.0),
        Kind::RealProjective => dot(x, y).abs().min(1.0),
        _ => {
            let m = field_inner(kind, x, y).norm_sqr();
            (2.0 * m - 1.0).clamp(-1.0, 1.0)
        }
    }
}

/// Geodesic distance in [0, π].
pub fn distance(spec: &ManifoldSpec, x: &Point, y: &Point) -> Result<f64> {
    x.check(spec)?;
    y.check(spec)?;
    Ok(distance_raw(spec.kind, x.coords(), y.coords()))
}

pub(crate) fn distance_raw(kind: Kind, x: &[f64], y: &[f64]) -> f64 {
    let s = field_inner(kind, x, y);
    let mut perp = vec![0.0; x.len()];
    right_mul(kind, x, s, &mut perp);
    let sin2: f64 = perp.iter().zip(y).map(|(p, b)| (b - p) * (b - p)).sum();
    // below coordinate resolution the points coincide
    let sin = if sin2 < 1e-30 { 0.0 } else { sin2.sqrt() };
    if kind.is_projective() {
        2.0 * sin.atan2(s.norm())
    } else {
        sin.atan2(s.w)
    }
}

/// `cos(d(x, y) / ε)` for validated points.
pub fn zonal_argument(spec: &ManifoldSpec, x: &Point, y: &Point) -> Result<f64> {
    x.check(spec)?;
    y.check(spec)?;
    Ok(zonal_arg_raw(spec.kind, x.coords(), y.coords()))
}

/// Integral of `g` against α on [0, π] with the default tolerance.
pub fn radial_integrate(spec: &ManifoldSpec, g: impl Fn(f64) -> f64) -> Result<f64> {
    spec.radial_integrate(g)
}

pub fn radial_density(spec: &ManifoldSpec, t: f64) -> f64 {
    spec.radial_density(t)
}

pub fn ball_measure(spec: &ManifoldSpec, r: f64) -> f64 {
    spec.ball_measure(r)
}

/// Seeded stream of uniformly distributed points.
pub struct Sampler {
    spec: ManifoldSpec,
    rng: ChaCha8Rng,
    len: usize,
}

impl Sampler {
    pub fn new(spec: &ManifoldSpec, seed: u64) -> Result<Self> {
        let len = spec.real_len()?;
        Ok(Self {
            spec: spec.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            len,
        })
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn next_point(&mut self) -> Point {
        loop {
            let v: Vec<f64> = (0..self.len).map(|_| self.rng.sample(StandardNormal)).collect();
            if let Ok(p) = Point::normalized(&self.spec, v) {
                return p;
            }
        }
    }

    pub fn take(&mut self, count: usize) -> Vec<Point> {
        (0..count).map(|_| self.next_point()).collect()
    }
}

/// One uniformly distributed point, fully determined by `seed`.
pub fn sample_uniform(spec: &ManifoldSpec, seed: u64) -> Result<Point> {
    Ok(Sampler::new(spec, seed)?.next_point())
}

/// `count` uniform points from one seeded stream.
pub fn sample_many(spec: &ManifoldSpec, count: usize, seed: u64) -> Result<Vec<Point>> {
    Ok(Sampler::new(spec, seed)?.take(count))
}

/// A point at geodesic distance `dist` (≤ π) from `x` in a random direction.
pub fn random_point_at<R: Rng + ?Sized>(
    spec: &ManifoldSpec,
    x: &Point,
    dist: f64,
    rng: &mut R,
) -> Result<Point> {
    let len = spec.real_len()?;
    let xc = x.coords();
    let mut v = vec![0.0; len];
    let mut proj = vec![0.0; len];
    loop {
        for c in v.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let s = field_inner(spec.kind, xc, &v);
        right_mul(spec.kind, xc, s, &mut proj);
        v.iter_mut().zip(&proj).for_each(|(c, p)| *c -= p);
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|c| *c /= n);
            break;
        }
    }
    let s = if spec.kind.is_projective() { 0.5 * dist } else { dist };
    let (sn, cs) = s.sin_cos();
    let y: Vec<f64> = xc.iter().zip(&v).map(|(a, b)| a * cs + b * sn).collect();
    Point::normalized(spec, y)
}

/// The point at distance `dist` from `x` on the geodesic through `toward`.
pub fn point_toward(spec: &ManifoldSpec, x: &Point, toward: &Point, dist: f64) -> Result<Point> {
    let len = spec.real_len()?;
    let (xc, yc) = (x.coords(), toward.coords());
    if yc.len() != len || xc.len() != len {
        return Err(Error::DimensionMismatch { expected: len, got: yc.len() });
    }
    let mut s = field_inner(spec.kind, xc, yc);
    // projective: rotate the representative of `toward` so that ⟨x, y⟩ ≥ 0
    let mut y = yc.to_vec();
    if spec.kind.is_projective() && s.norm() > 1e-15 {
        let phase = s.conj().scale(1.0 / s.norm());
        right_mul(spec.kind, yc, phase, &mut y);
        s = field_inner(spec.kind, xc, &y);
    }
    let mut proj = vec![0.0; len];
    right_mul(spec.kind, xc, s, &mut proj);
    let mut v: Vec<f64> = y.iter().zip(&proj).map(|(a, b)| a - b).collect();
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if n < 1e-14 {
        return Err(Error::Numeric("direction undefined: points coincide".into()));
    }
    v.iter_mut().for_each(|c| *c /= n);
    let t = if spec.kind.is_projective() { 0.5 * dist } else { dist };
    let (sn, cs) = t.sin_cos();
    Point::normalized(spec, xc.iter().zip(&v).map(|(a, b)| a * cs + b * sn).collect())
}
