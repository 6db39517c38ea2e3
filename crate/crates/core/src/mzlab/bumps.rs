use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::smooth_step;
use crate::manifold::{distance, ManifoldSpec, Point, Sampler};
use crate::quadrature::adaptive_integrate;

/// Radial profile: 0 outside [1/2, 1], 1 on [2/3, 3/4], smooth in between.
pub fn bump_profile(s: f64) -> f64 {
    if s <= 0.5 || s >= 1.0 {
        0.0
    } else if s < 2.0 / 3.0 {
        smooth_step((s - 0.5) * 6.0)
    } else if s <= 0.75 {
        1.0
    } else {
        smooth_step((1.0 - s) * 4.0)
    }
}

/// φ_i(x) = φ(m · d(x, x_i)).
#[derive(Clone, Debug, Serialize)]
pub struct Bump {
    pub center: Point,
    pub m: f64,
}

impl Bump {
    pub fn eval(&self, spec: &ManifoldSpec, x: &Point) -> Result<f64> {
        Ok(bump_profile(self.m * distance(spec, x, &self.center)?))
    }

    /// Value as a function of the distance θ to the centre.
    pub fn radial(&self, theta: f64) -> f64 {
        bump_profile(self.m * theta)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BumpDiagnostics {
    pub m: f64,
    pub min_center_distance: f64,
    pub disjoint: bool,
    pub norm_l1: f64,
    pub norm_l2: f64,
    /// ‖φ_i‖_1 · m^{d−1}
    pub scaled_l1: f64,
    /// ‖φ_i‖_2 · m^{(d−1)/2}
    pub scaled_l2: f64,
    /// max over a radial grid of |Δ_θ φ_i|
    pub laplacian_max: f64,
    /// laplacian_max / m²
    pub scaled_laplacian: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BumpFixture {
    pub bumps: Vec<Bump>,
    pub diagnostics: BumpDiagnostics,
}

/// Places `count` centres pairwise more than 4/m apart and measures the
/// bump norms and radial Laplacian.
pub fn bump_fixture(spec: &ManifoldSpec, m: f64, count: usize, seed: u64) -> Result<BumpFixture> {
    if !(m >= 1.0) || count == 0 {
        return Err(Error::param("bump scale must be ≥ 1 and count positive"));
    }
    let sep = 4.0 / m;
    let budget = 10_000 * count;
    let mut sampler = Sampler::new(spec, seed)?;
    let mut centers: Vec<Point> = Vec::with_capacity(count);
    let mut attempts = 0;
    while centers.len() < count {
        if attempts >= budget {
            return Err(Error::BudgetExceeded {
                message: format!("could not place {count} centres {sep:.4} apart"),
                produced: centers.len(),
                estimated: count,
            });
        }
        attempts += 1;
        let x = sampler.next_point();
        let mut ok = true;
        for c in &centers {
            if distance(spec, &x, c)? <= sep {
                ok = false;
                break;
            }
        }
        if ok {
            centers.push(x);
        }
    }
    let mut min_dist = f64::INFINITY;
    for i in 0..centers.len() {
        for j in 0..i {
            min_dist = min_dist.min(distance(spec, &centers[i], &centers[j])?);
        }
    }

    let profile = |t: f64| bump_profile(m * t);
    let support = (0.5 / m, (1.0 / m).min(std::f64::consts::PI));
    // integrate over the support only; the bump is invisible to a [0, π] rule at large m
    let radial_norm = |p: i32| {
        adaptive_integrate(|t| profile(t).powi(p) * spec.radial_density(t), support.0, support.1, 1e-15)
    };
    let norm_l1 = radial_norm(1)?;
    let norm_l2 = radial_norm(2)?.sqrt();
    let k = (spec.d - 1) as f64;

    let h = 1e-4 / m;
    let steps = 2000;
    let mut lap_max: f64 = 0.0;
    for i in 0..=steps {
        let t = support.0 + (support.1 - support.0) * i as f64 / steps as f64;
        let (a, b, c) = (profile(t - h), profile(t), profile(t + h));
        let lap = (a - 2.0 * b + c) / (h * h) + spec.log_density_deriv(t) * (c - a) / (2.0 * h);
        lap_max = lap_max.max(lap.abs());
    }

    let diagnostics = BumpDiagnostics {
        m,
        min_center_distance: min_dist,
        disjoint: centers.len() < 2 || min_dist > 2.0 / m,
        norm_l1,
        norm_l2,
        scaled_l1: norm_l1 * m.powf(k),
        scaled_l2: norm_l2 * m.powf(k / 2.0),
        laplacian_max: lap_max,
        scaled_laplacian: lap_max / (m * m),
    };
    Ok(BumpFixture {
        bumps: centers.into_iter().map(|center| Bump { center, m }).collect(),
        diagnostics,
    })
}
