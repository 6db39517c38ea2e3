//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with its
//! measurements and elapsed time, then asserts. Criteria run one at a time
//! (a global lock) because the larger cubature solves need most of the
//! available memory; rules shared between criteria are built once and their
//! construction time is reported separately.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::sync::{Arc, Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use ctphs::covering::build_covering;
use ctphs::cubature::{build_rule, compensated_sum, verify_exactness, CubatureRule, SolverOptions};
use ctphs::jacobi::{dirichlet_closed_form, jacobi_at_one, JacobiParams, Recurrence};
use ctphs::kernels::{kernel_decay_profile, KernelSpec};
use ctphs::manifold::{distance, sample_many, Sampler};
use ctphs::mzlab::{
    approx_rate, identity_error, mz_bands, operator_norm_ratios, oscillation_check, random_poly, MzOptions,
};
use ctphs::quadrature::gauss_legendre;
use ctphs::{make_spec, Error, Kind, ManifoldSpec, Point};

const SWEEP_DELTA: f64 = 1.2;
const SWEEP_SEED: u64 = 1;

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, name: &str, pass: bool, elapsed: Duration, details: &str) {
    let line = format!(
        "acceptance {id:>2} {:<4} {name} [{:.1}s] {details}\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    // written straight to the stream so the harness does not capture it
    let _ = std::io::stderr().write_all(line.as_bytes());
}

/// Positive rule of degree 4n on a (1.2/n)-covering of S², built once per n.
fn sweep_rule(n: usize) -> (Arc<CubatureRule>, Duration) {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<CubatureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return (r.clone(), Duration::ZERO);
    }
    let t = Instant::now();
    let spec = s2();
    let cov = build_covering(&spec, SWEEP_DELTA / n as f64, SWEEP_SEED).expect("sweep covering");
    let rule = Arc::new(build_rule(&cov, 4 * n, n, SolverOptions::default(), SWEEP_SEED).expect("sweep rule"));
    cache.lock().unwrap().insert(n, rule.clone());
    (rule, t.elapsed())
}

fn s2() -> ManifoldSpec {
    make_spec(Kind::Sphere, 3).unwrap()
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

// P_k^{(a,b)}(1) = Γ(k+a+1)/(Γ(k+1)Γ(a+1)) as a running product.
fn binomial_at_one(a: f64, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (j as f64 + a) / j as f64)
}

#[test]
fn criterion_01_jacobi_normalization_and_orthogonality() {
    let _g = serial();
    let t = Instant::now();
    let params = [-0.5, 0.0, 0.5, 1.0, 1.5, 2.5, 3.0, 3.5, 5.5, 7.0, 7.5];
    let mut worst_norm: f64 = 0.0;
    for &a in &params {
        for &b in &params {
            let p = JacobiParams::new(a, b).unwrap();
            let rec = Recurrence::new(p, 200);
            for k in 0..=200 {
                let exact = binomial_at_one(a, k);
                worst_norm = worst_norm.max(((rec.eval(k, 1.0) - exact) / exact).abs());
                worst_norm = worst_norm.max(((jacobi_at_one(p, k) - exact) / exact).abs());
            }
        }
    }
    // orthogonality in θ (t = cos θ): the weight becomes
    // 2^{a+b+1} sin^{2a+1}(θ/2) cos^{2b+1}(θ/2), smooth for these parameters
    let (x, w) = gauss_legendre(400);
    let nodes: Vec<(f64, f64)> = x.iter().zip(&w).map(|(&s, &w)| (0.5 * PI * (s + 1.0), 0.5 * PI * w)).collect();
    let k_max = 60;
    let mut worst_orth: f64 = 0.0;
    for &a in &params {
        for &b in &params {
            let p = JacobiParams::new(a, b).unwrap();
            let rec = Recurrence::new(p, k_max);
            let mut gram = vec![vec![0.0; k_max + 1]; k_max + 1];
            let mut vals = vec![0.0; k_max + 1];
            for &(th, wt) in &nodes {
                let weight = wt * (0.5 * th).sin().powf(2.0 * a + 1.0) * (0.5 * th).cos().powf(2.0 * b + 1.0);
                rec.eval_all(th.cos(), &mut vals);
                for i in 0..=k_max {
                    for j in 0..=i {
                        gram[i][j] += weight * vals[i] * vals[j];
                    }
                }
            }
            for i in 0..=k_max {
                for j in 0..i {
                    worst_orth = worst_orth.max(gram[i][j].abs() / (gram[i][i] * gram[j][j]).sqrt());
                }
            }
        }
    }
    let el = t.elapsed();
    let pass = worst_norm <= 1e-12 && worst_orth <= 1e-9 && el < Duration::from_secs(10);
    report(
        1,
        "Jacobi normalization and orthogonality",
        pass,
        el,
        &format!("max rel err at 1 = {worst_norm:.2e} (≤1e-12), max normalized off-diagonal = {worst_orth:.2e} (≤1e-9), {} parameter pairs", params.len().pow(2)),
    );
    assert!(pass);
}

/// Independent oracle: own recurrence for P_k^{(a,b)} and product-form coefficients.
fn direct_dirichlet(spec: &ManifoldSpec, degree: usize, u: f64) -> f64 {
    let (a, b) = (spec.alpha, spec.beta);
    // c_k = (2k+a+b+1) Γ(k+a+b+1) Γ(b+1) / (Γ(a+b+2) Γ(k+b+1)); ratio c_k / (2k+a+b+1) updated by (k+a+b)/(k+b)
    let mut ratio = 1.0 / (a + b + 1.0);
    let (mut p_prev, mut p) = (0.0, 1.0);
    let mut sum = 0.0;
    for k in 0..=degree {
        let kf = k as f64;
        if k > 0 {
            ratio *= (kf + a + b) / (kf + b);
            let next = if k == 1 {
                0.5 * (a - b) + 0.5 * (a + b + 2.0) * u
            } else {
                let n = kf - 1.0;
                let c = 2.0 * n + a + b;
                let a1 = 2.0 * (n + 1.0) * (n + a + b + 1.0) * c;
                let a2 = (c + 1.0) * (a * a - b * b);
                let a3 = c * (c + 1.0) * (c + 2.0);
                let a4 = 2.0 * (n + a) * (n + b) * (c + 2.0);
                ((a2 + a3 * u) * p - a4 * p_prev) / a1
            };
            p_prev = p;
            p = next;
        }
        let coeff = if k == 0 { 1.0 } else { (2.0 * kf + a + b + 1.0) * ratio };
        sum += coeff * p;
    }
    sum
}

#[test]
fn criterion_02_dirichlet_closed_form() {
    let _g = serial();
    let t = Instant::now();
    let specs = [
        (Kind::Sphere, 3),
        (Kind::Sphere, 4),
        (Kind::Sphere, 5),
        (Kind::Sphere, 8),
        (Kind::RealProjective, 3),
        (Kind::RealProjective, 4),
        (Kind::ComplexProjective, 5),
        (Kind::ComplexProjective, 7),
        (Kind::QuaternionProjective, 9),
        (Kind::QuaternionProjective, 13),
        (Kind::CayleyPlane, 17),
    ];
    let mut worst: f64 = 0.0;
    for &(kind, d) in &specs {
        let spec = make_spec(kind, d).unwrap();
        for degree in 0..=100 {
            // error measured against ‖D‖_∞ = D(1)
            let scale = direct_dirichlet(&spec, degree, 1.0);
            for i in 0..=200 {
                let u = (PI * i as f64 / 200.0).cos();
                let err = (dirichlet_closed_form(&spec, degree, u) - direct_dirichlet(&spec, degree, u)).abs() / scale;
                worst = worst.max(err);
            }
        }
    }
    let el = t.elapsed();
    let pass = worst <= 1e-10 && el < Duration::from_secs(5);
    report(
        2,
        "closed-form Dirichlet kernel",
        pass,
        el,
        &format!("max |closed − direct| / D(1) = {worst:.2e} (≤1e-10) over {} spaces, D ≤ 100", specs.len()),
    );
    assert!(pass);
}

#[test]
fn criterion_03_kernel_decay() {
    let _g = serial();
    let t = Instant::now();
    let spec = s2();
    let mut pass = true;
    let mut parts = Vec::new();
    for ell in [2usize, 4, 6, 8] {
        let mut consts = Vec::new();
        let mut slopes = Vec::new();
        for n in [32usize, 64, 128] {
            let prof = kernel_decay_profile(&spec, KernelSpec::canonical(n).unwrap(), ell, 0).unwrap();
            consts.push(prof.implied_constant);
            slopes.push(prof.tail_slope);
        }
        let slope_ok = slopes.iter().all(|&s| s <= -(ell as f64) + 0.5);
        let const_ok = consts.windows(2).all(|w| spread(w) <= 2.0);
        pass &= slope_ok && const_ok;
        parts.push(format!(
            "ℓ={ell}: slopes {:.2}/{:.2}/{:.2} need ≤{:.1} {}; C {:.3e}/{:.3e}/{:.3e} {}",
            slopes[0],
            slopes[1],
            slopes[2],
            -(ell as f64) + 0.5,
            if slope_ok { "ok" } else { "FAILED" },
            consts[0],
            consts[1],
            consts[2],
            if const_ok { "ok" } else { "FAILED" },
        ));
    }
    let el = t.elapsed();
    pass &= el < Duration::from_secs(60);
    report(3, "kernel decay (N = 32, 64, 128)", pass, el, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_04_reproducing_identity() {
    let _g = serial();
    let t = Instant::now();
    let spec = s2();
    let n = 8;
    let kernel = ctphs::kernels::Kernel::new(&spec, KernelSpec::canonical(n).unwrap()).unwrap();
    // product Gauss rule on S², exact beyond the degree 3N of K_N(x·) f
    let (gx, gw) = gauss_legendre(32);
    let phis = 64;
    let mut grid = Vec::new();
    for (&z, &w) in gx.iter().zip(&gw) {
        let r = (1.0 - z * z).sqrt();
        for j in 0..phis {
            let phi = 2.0 * PI * j as f64 / phis as f64;
            let p = Point::from_coords(&spec, vec![r * phi.cos(), r * phi.sin(), z]).unwrap();
            grid.push((p, 0.5 * w / phis as f64));
        }
    }
    let mut worst: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for trial in 0..50u64 {
        let f = random_poly(&spec, n, 6, 100 + trial).unwrap();
        let fvals = f.eval_many(&grid.iter().map(|g| g.0.clone()).collect::<Vec<_>>()).unwrap();
        let sup = fvals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for x in sample_many(&spec, 4, 900 + trial).unwrap() {
            let terms: Vec<f64> = grid
                .iter()
                .zip(&fvals)
                .map(|((y, w), fy)| {
                    let u = x.coords().iter().zip(y.coords()).map(|(a, b)| a * b).sum::<f64>();
                    w * kernel.eval(u.clamp(-1.0, 1.0)) * fy
                })
                .collect();
            let vn = compensated_sum(&terms);
            let err = (vn - f.eval(&x).unwrap()).abs();
            worst = worst.max(err);
            worst_rel = worst_rel.max(err / sup);
        }
    }
    let el = t.elapsed();
    let pass = worst <= 1e-12 && el < Duration::from_secs(5);
    report(
        4,
        "reproducing identity V_N f = f on Π_N",
        pass,
        el,
        &format!("50 random f ∈ Π_8 × 4 points, max |V_N f − f| = {worst:.2e} (≤1e-12), relative to sup {worst_rel:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_positive_cubature() {
    let _g = serial();
    let t = Instant::now();
    let spec = s2();
    let cov = build_covering(&spec, 0.5 / 8.0, 5).unwrap();
    let rule = build_rule(&cov, 32, 8, SolverOptions::default(), 5).unwrap();
    let tol = 1e-10 * rule.solver_meta.trace / rule.len() as f64;
    let sum = compensated_sum(&rule.weights);
    let min_w = rule.weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let ex = verify_exactness(&rule, 100, 17).unwrap();
    let el_s = t.elapsed();
    let sphere_ok = rule.residual <= tol
        && min_w >= 0.0
        && (sum - 1.0).abs() <= 1e-12
        && ex.max_error <= 1e-6
        && el_s < Duration::from_secs(120);
    let sphere = format!(
        "S²: m={} residual {:.2e} ≤ {:.2e}, min λ {:.2e}, |Σλ−1| {:.1e}, exactness {:.2e} (≤1e-6), {} iterations, {:.1}s",
        rule.len(),
        rule.residual,
        tol,
        min_w,
        (sum - 1.0).abs(),
        ex.max_error,
        rule.solver_meta.iterations,
        el_s.as_secs_f64()
    );

    let t2 = Instant::now();
    let cp = make_spec(Kind::ComplexProjective, 5).unwrap();
    let (cp_ok, cp_text) = match build_covering(&cp, 0.5 / 4.0, 5) {
        Ok(cov) => match build_rule(&cov, 16, 4, SolverOptions::default(), 5) {
            Ok(rule) => {
                let tol = 1e-10 * rule.solver_meta.trace / rule.len() as f64;
                let sum = compensated_sum(&rule.weights);
                let ex = verify_exactness(&rule, 100, 17).unwrap();
                let ok = rule.residual <= tol
                    && rule.weights.iter().all(|&w| w >= 0.0)
                    && (sum - 1.0).abs() <= 1e-12
                    && ex.max_error <= 1e-6
                    && t2.elapsed() < Duration::from_secs(300);
                (ok, format!("CP² m={} residual {:.2e}, exactness {:.2e}", rule.len(), rule.residual, ex.max_error))
            }
            Err(e) => (false, format!("CP²: rule construction failed: {e}")),
        },
        Err(Error::BudgetExceeded { message, produced, estimated }) => (
            false,
            format!("CP²: covering infeasible: {message} (produced {produced}, greedy estimate ~{estimated} nodes)"),
        ),
        Err(e) => (false, format!("CP²: covering failed: {e}")),
    };
    let el = t.elapsed();
    let pass = sphere_ok && cp_ok;
    report(5, "positive cubature of degree 4n", pass, el, &format!("{sphere}; {cp_text}"));
    assert!(sphere_ok, "sphere part failed: {sphere}");
    assert!(cp_ok, "complex projective part failed: {cp_text}");
}

#[test]
fn criterion_06_weight_bound() {
    let _g = serial();
    let mut build = Duration::ZERO;
    let mut rules = Vec::new();
    for n in [8usize, 16, 32] {
        let (r, b) = sweep_rule(n);
        build += b;
        rules.push((n, r));
    }
    let t = Instant::now();
    let scaled: Vec<f64> = rules.iter().map(|(n, r)| ctphs::cubature::weight_bound_report(r, *n).max_scaled).collect();
    let converged = rules.iter().all(|(_, r)| r.converged());
    let ratio = spread(&scaled);
    let pass = converged && ratio <= 2.0;
    report(
        6,
        "weight bound max λ·n^{d−1}",
        pass,
        t.elapsed(),
        &format!(
            "n=8/16/32 (δ={SWEEP_DELTA}, m={}/{}/{}): {:.4}/{:.4}/{:.4}, spread {ratio:.3} (≤2); rules converged: {converged}; rule construction {:.1}s",
            rules[0].1.len(),
            rules[1].1.len(),
            rules[2].1.len(),
            scaled[0],
            scaled[1],
            scaled[2],
            build.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_mz_equivalence() {
    let _g = serial();
    let total = Instant::now();
    let mut rules = Vec::new();
    for n in [8usize, 16, 32] {
        rules.push((n, sweep_rule(n).0));
    }
    let t = Instant::now();
    let configs: Vec<(usize, &CubatureRule)> = rules.iter().map(|(n, r)| (*n, r.as_ref())).collect();
    let ps = [0.5, 1.0, 2.0, f64::INFINITY];
    let bands = mz_bands(&configs, &ps, &[0.0, 0.5, 1.0], 20, 7, MzOptions::default()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for &p in &ps {
        for tt in [0.0, p.min(1.0)] {
            let row: Vec<f64> = bands.iter().filter(|b| b.p == p && b.t == tt).map(|b| b.band).collect();
            let finite = row.len() == 3 && row.iter().all(|b| b.is_finite() && *b >= 1.0);
            let var = spread(&row) - 1.0;
            let ok = finite && var <= 0.25;
            pass &= ok;
            parts.push(format!(
                "p={},t={tt}: {:.3}/{:.3}/{:.3} Δ{:.1}%{}",
                ctphs::report::exponent::to_text(p),
                row[0],
                row[1],
                row[2],
                100.0 * var,
                if ok { "" } else { " FAILED" }
            ));
        }
    }
    let el = t.elapsed();
    pass &= total.elapsed() < Duration::from_secs(600);
    report(
        7,
        "MZ ratio bands stable across n = 8, 16, 32",
        pass,
        el,
        &format!("20 trials; {} (≤25%); incl. rule construction {:.1}s", parts.join(", "), total.elapsed().as_secs_f64()),
    );
    assert!(pass);
}

#[test]
fn criterion_08_oscillation() {
    let _g = serial();
    let t = Instant::now();
    let spec = s2();
    let mut implied = BTreeMap::new();
    for (n, delta) in [(8usize, 0.5), (8, 0.25), (16, 0.5)] {
        let cov = build_covering(&spec, delta / n as f64, 3).unwrap();
        let rep = oscillation_check(&spec, &cov, n, 1.0, 3, 21).unwrap();
        implied.insert((n, (delta * 100.0) as u32), (rep.implied_max, cov.len(), rep.multiplicity));
    }
    let c = |n: usize, d: u32| implied[&(n, d)].0;
    let across_delta = spread(&[c(8, 50), c(8, 25)]);
    let across_n = spread(&[c(8, 50), c(16, 50)]);
    let el = t.elapsed();
    let pass = across_delta <= 2.0 && across_n <= 2.0 && el < Duration::from_secs(300);
    report(
        8,
        "oscillation inequality implied constant (p = 1)",
        pass,
        el,
        &format!(
            "C(n=8,δ=.5)={:.3} C(n=8,δ=.25)={:.3} C(n=16,δ=.5)={:.3}; spread across δ {across_delta:.3}, across n {across_n:.3} (≤2)",
            c(8, 50),
            c(8, 25),
            c(16, 50)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_factorization() {
    let _g = serial();
    let mut build = Duration::ZERO;
    let mut rules = BTreeMap::new();
    for n in [8usize, 16, 32] {
        let (r, b) = sweep_rule(n);
        build += b;
        rules.insert(n, r);
    }
    let t = Instant::now();
    // T and U_N use the degree-8N rule; errors and norms are taken on the degree-4N rule
    let err = identity_error(&rules[&16], &rules[&8], 8, 5, 31).unwrap();
    let qs = [1.0, 2.0, f64::INFINITY];
    let r8 = operator_norm_ratios(&rules[&16], &rules[&8], 8, &qs, 2, 41).unwrap();
    let r16 = operator_norm_ratios(&rules[&32], &rules[&16], 16, &qs, 2, 41).unwrap();
    let spreads: Vec<f64> = r8.iter().zip(&r16).map(|(a, b)| spread(&[a.ratio_max, b.ratio_max])).collect();
    let el = t.elapsed();
    let pass = err <= 1e-8 && spreads.iter().all(|&s| s <= 2.0) && el < Duration::from_secs(120);
    report(
        9,
        "T∘U_N identity and T bounds",
        pass,
        el,
        &format!(
            "identity rel L² err {err:.2e} (≤1e-8); ‖T u‖_q/‖u‖ q=1: {:.4}/{:.4}, q=2: {:.4}/{:.4}, q=∞: {:.4}/{:.4} (N=8/16, spread ≤2); rule construction {:.1}s",
            r8[0].ratio_max,
            r16[0].ratio_max,
            r8[1].ratio_max,
            r16[1].ratio_max,
            r8[2].ratio_max,
            r16[2].ratio_max,
            build.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_rate() {
    let _g = serial();
    let t = Instant::now();
    let spec = s2();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [1.0, 2.0] {
        let fit = approx_rate(&spec, r, 2.0, &[8, 16, 32, 64], 5).unwrap();
        let ok = !fit.degenerate && (fit.slope + r).abs() <= 0.15 * r && fit.r2 >= 0.98;
        pass &= ok;
        parts.push(format!("r={r}: slope {:.3} (target {:.1}±{:.2}), r² {:.4}", fit.slope, -r, 0.15 * r, fit.r2));
    }
    let el = t.elapsed();
    pass &= el < Duration::from_secs(120);
    report(10, "approximation rate of V_N", pass, el, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_11_sampler_law() {
    let _g = serial();
    let t = Instant::now();
    type Cdf = fn(f64) -> f64;
    let cases: [(Kind, usize, Cdf); 4] = [
        (Kind::Sphere, 3, |t| 0.5 * (1.0 - t.cos())),
        (Kind::Sphere, 4, |t| (t - t.sin() * t.cos()) / PI),
        (Kind::RealProjective, 3, |t| 1.0 - (0.5 * t).cos()),
        (Kind::ComplexProjective, 5, |t| (0.5 * t).sin().powi(4)),
    ];
    let count = 100_000;
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, d, cdf) in cases {
        let spec = make_spec(kind, d).unwrap();
        let mut sampler = Sampler::new(&spec, 2024).unwrap();
        let pole = sampler.next_point();
        let mut dist: Vec<f64> = (0..count).map(|_| distance(&spec, &pole, &sampler.next_point()).unwrap()).collect();
        dist.sort_by(f64::total_cmp);
        let ks = dist
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / count as f64).max((i + 1) as f64 / count as f64 - f)
            })
            .fold(0.0, f64::max);
        pass &= ks <= 0.01;
        parts.push(format!("{}{d}: {ks:.4}", kind.name()));
    }
    let el = t.elapsed();
    pass &= el < Duration::from_secs(60);
    report(11, "sampler radial law (KS ≤ 0.01, 10^5 samples)", pass, el, &parts.join(", "));
    assert!(pass);
}

fn run_cli(args: &[&str], dir: &std::path::Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_ctphs"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run binary");
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn criterion_12_cli_determinism() {
    let _g = serial();
    let t = Instant::now();
    let base = std::env::temp_dir().join(format!("ctphs-acceptance-{}", std::process::id()));
    let runs: [(&str, &[&str], &[&str]); 9] = [
        ("spec", &["spec", "--manifold", "cp", "--d", "5"], &[]),
        ("cover", &["cover", "--n", "4", "--delta", "1", "--seed", "3", "--out", "cov.json"], &["cov.json"]),
        (
            "cubature",
            &["cubature", "--n", "3", "--delta", "1.0", "--seed", "3", "--trials", "10", "--out", "rule.json"],
            &["rule.json"],
        ),
        (
            "mz",
            &["mz", "--n", "3", "--rule", "rule.json", "--p", "1,2,inf", "--t", "0,1", "--trials", "3", "--seed", "3", "--out", "mz.csv"],
            &["mz.csv", "mz.json"],
        ),
        ("mz-built", &["mz", "--n", "2,3", "--p", "2", "--t", "1", "--trials", "2", "--seed", "3"], &[]),
        ("oscillation", &["oscillation", "--n", "2", "--delta", "0.5", "--trials", "1", "--seed", "3", "--out", "osc.csv"], &["osc.csv", "osc.json"]),
        ("kernel-decay", &["kernel-decay", "--n", "16", "--ell", "2,4"], &[]),
        ("rate", &["rate", "--n", "4,8,16", "--seed", "3", "--out", "rate.csv"], &["rate.csv", "rate.json"]),
        ("bumps", &["bumps", "--n", "8,16", "--count", "4", "--seed", "3"], &[]),
    ];
    let mut outputs: Vec<Vec<(i32, Vec<u8>, Vec<Vec<u8>>)>> = Vec::new();
    for rep in 0..2 {
        let dir = base.join(format!("run{rep}"));
        std::fs::create_dir_all(&dir).unwrap();
        let mut these = Vec::new();
        for (_, args, files) in &runs {
            let (code, stdout) = run_cli(args, &dir);
            let contents = files.iter().map(|f| std::fs::read(dir.join(f)).unwrap_or_default()).collect();
            these.push((code, stdout, contents));
        }
        outputs.push(these);
    }
    let _ = std::fs::remove_dir_all(&base);
    let mut bad = Vec::new();
    for (i, (name, _, _)) in runs.iter().enumerate() {
        let (a, b) = (&outputs[0][i], &outputs[1][i]);
        let nonempty = !a.1.is_empty() || a.2.iter().any(|c| !c.is_empty());
        if a.0 != 0 || a != b || !nonempty {
            bad.push(format!("{name} (exit {}, identical {})", a.0, a == b));
        }
    }
    let el = t.elapsed();
    let pass = bad.is_empty();
    report(
        12,
        "CLI byte-reproducibility",
        pass,
        el,
        &if pass {
            format!("{} invocations covering all 8 commands identical across two runs", runs.len())
        } else {
            format!("differences: {}", bad.join(", "))
        },
    );
    assert!(pass);
}
