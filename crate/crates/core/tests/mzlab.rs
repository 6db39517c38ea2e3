use approx::assert_relative_eq;
use ctphs::covering::build_covering;
use ctphs::cubature::{build_rule, rule_from_nodes, uniform_rule, CubatureRule, SolverOptions};
use ctphs::kernels::ZonalSum;
use ctphs::manifold::{distance, sample_many, Sampler};
use ctphs::mzlab::*;
use ctphs::{make_spec, Error, Kind, ManifoldSpec, Point};

fn s2() -> ManifoldSpec {
    make_spec(Kind::Sphere, 3).unwrap()
}

fn constant_one(spec: &ManifoldSpec) -> ZonalSum {
    let c = sample_many(spec, 1, 0).unwrap();
    ZonalSum::new(spec, 0, c, vec![1.0], None).unwrap()
}

fn small_rule(n: usize) -> CubatureRule {
    let spec = s2();
    let cov = build_covering(&spec, 1.0 / n as f64, 2).unwrap();
    let rule = build_rule(&cov, 4 * n, n, SolverOptions::default(), 2).unwrap();
    assert!(rule.converged());
    rule
}

#[test]
fn random_poly_is_deterministic_per_seed() {
    let spec = s2();
    let a = random_poly(&spec, 6, 5, 11).unwrap();
    let b = random_poly(&spec, 6, 5, 11).unwrap();
    let c = random_poly(&spec, 6, 5, 12).unwrap();
    assert_eq!(a.coeffs(), b.coeffs());
    assert_eq!(a.centers(), b.centers());
    assert_ne!(a.coeffs(), c.coeffs());
    assert_eq!(a.degree(), 6);
    assert!(a.spectral().iter().all(|&m| m == 1.0));
    assert!(matches!(random_poly(&spec, 6, 0, 1), Err(Error::Parameter(_))));
}

#[test]
fn mean_square_norm_grows_linearly_in_center_count() {
    // E‖f‖² = J · (R_n(1)) for J independent standard normal coefficients
    let spec = s2();
    let n = 4;
    let dim = ctphs::jacobi::dim_poly_space(&spec, n);
    for j in [2usize, 8] {
        let mean: f64 = (0..200).map(|s| random_poly(&spec, n, j, s).unwrap().l2_norm_sq()).sum::<f64>() / 200.0;
        let expected = j as f64 * dim;
        assert!((mean / expected - 1.0).abs() < 0.2, "J={j}: {mean} vs {expected}");
    }
}

#[test]
fn constant_function_has_unit_norms() {
    let spec = s2();
    let one = constant_one(&spec);
    for p in [0.5, 1.0, 2.0, 3.0, f64::INFINITY] {
        let e = continuous_norm(&one, p).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-12);
        assert_eq!(e.method == NormMethod::ExactSpectralL2, p == 2.0);
    }
}

#[test]
fn l2_norm_matches_radial_quadrature() {
    // f(x) = 1 + 3 cos d(x, o) is the degree-1 reproducing kernel at o
    let spec = s2();
    let o = sample_many(&spec, 1, 3).unwrap();
    let f = ZonalSum::new(&spec, 1, o, vec![1.0], None).unwrap();
    let exact = spec.radial_integrate(|t| (1.0 + 3.0 * t.cos()).powi(2)).unwrap();
    assert_relative_eq!(f.l2_norm_sq(), exact, max_relative = 1e-6);
    assert_relative_eq!(exact, 4.0, max_relative = 1e-9);
}

#[test]
fn norms_are_monotone_in_p() {
    let spec = s2();
    for s in 0..4 {
        let f = random_poly(&spec, 5, 4, s).unwrap();
        let n1 = continuous_norm(&f, 1.0).unwrap();
        let n2 = continuous_norm(&f, 2.0).unwrap();
        let ninf = continuous_norm(&f, f64::INFINITY).unwrap();
        assert!(n1.value <= n2.value * (1.0 + 3.0 * n1.stderr_or_bound / n1.value));
        assert!(n2.value <= ninf.value);
        assert!(n1.stderr_or_bound > 0.0 && n1.samples > 0);
    }
}

#[test]
fn monte_carlo_agrees_with_exact_l2() {
    let spec = s2();
    for s in 0..5 {
        let f = random_poly(&spec, 6, 6, 40 + s).unwrap();
        let exact = f.l2_norm();
        let mc = mc_norm(&spec, |x: &Point| f.eval(x).unwrap(), 2.0, NormOptions { seed: s, ..Default::default() }).unwrap();
        assert!((mc.value - exact).abs() <= 3.0 * mc.stderr_or_bound, "{} vs {exact} ± {}", mc.value, mc.stderr_or_bound);
    }
}

#[test]
fn discrete_norm_reductions() {
    let rule = small_rule(3);
    let spec = s2();
    let one = constant_one(&spec);
    // Σλ = 1, so the t = 1 form of a constant is 1
    for p in [1.0, 2.0, 3.0] {
        assert_relative_eq!(discrete_norm(&one, &rule, 3, p, 1.0).unwrap(), 1.0, epsilon = 1e-12);
    }
    let direct = (rule.weights.iter().map(|w| (9.0 * w).sqrt()).sum::<f64>() / 9.0).powi(2);
    assert_relative_eq!(discrete_norm(&one, &rule, 3, 0.5, 0.5).unwrap(), direct, max_relative = 1e-13);
    let f = random_poly(&spec, 3, 4, 9).unwrap();
    let vals = f.eval_many(&rule.nodes).unwrap();
    let s = 9.0;
    let rms = (vals.iter().map(|v| v * v).sum::<f64>() / s).sqrt();
    assert_relative_eq!(discrete_norm(&f, &rule, 3, 2.0, 0.0).unwrap(), rms, max_relative = 1e-13);
    // exact rule of degree 12 integrates f² ∈ Π_6
    assert_relative_eq!(discrete_norm(&f, &rule, 3, 2.0, 1.0).unwrap(), f.l2_norm(), max_relative = 1e-10);
    assert!(matches!(discrete_norm(&f, &rule, 3, 0.5, 0.75), Err(Error::Parameter(_))));
    assert!(matches!(discrete_norm(&f, &rule, 3, 2.0, -0.1), Err(Error::Parameter(_))));
}

#[test]
fn sup_form_tracks_dense_sampling() {
    let rule = small_rule(4);
    let spec = s2();
    for s in 0..20 {
        let f = random_poly(&spec, 4, 5, 200 + s).unwrap();
        let d = discrete_norm(&f, &rule, 4, f64::INFINITY, 0.0).unwrap();
        let sup = continuous_norm(&f, f64::INFINITY).unwrap().value;
        let r = d / sup;
        assert!(r > 0.5 && r <= 1.0 + 1e-9, "ratio {r}");
    }
}

#[test]
fn mz_report_bands_are_at_least_one() {
    let rule = small_rule(3);
    let rep = mz_report(&[(3, &rule)], &[1.0, 2.0], &[0.0, 1.0], 4, 5, MzOptions::default()).unwrap();
    let bands: Vec<f64> = rep.rows.iter().filter(|r| r.statistic == "band").map(|r| r.value).collect();
    assert_eq!(bands.len(), 4);
    assert!(bands.iter().all(|&b| b >= 1.0 && b.is_finite()));
    // p = 2, t = 1 on an exact rule: ratio is 1 in every trial
    let b = rep.find(Some(3), Some(2.0), Some(1.0), "band").unwrap();
    assert_relative_eq!(b, 1.0, epsilon = 1e-9);
}

#[test]
fn band_tightens_as_delta_shrinks() {
    let spec = s2();
    let n = 3;
    let mut bands = Vec::new();
    for delta in [1.0, 0.5, 0.25] {
        let cov = build_covering(&spec, delta / n as f64, 4).unwrap();
        let rule = rule_from_nodes(&spec, cov.nodes.clone(), 4 * n, n, SolverOptions::default(), 4).unwrap();
        let b = mz_bands(&[(n, &rule)], &[2.0], &[1.0], 6, 3, MzOptions::default()).unwrap();
        bands.push(b[0].band);
    }
    for w in bands.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{bands:?}");
    }
}

#[test]
fn oscillation_of_constant_is_zero() {
    let spec = s2();
    let cov = build_covering(&spec, 0.5, 1).unwrap();
    let one = constant_one(&spec);
    assert_eq!(oscillation_lhs(&spec, &cov, &one, 1.0, 3).unwrap(), 0.0);
    assert!(matches!(oscillation_check(&spec, &cov, 1, 0.5, 1, 1), Err(Error::Parameter(_))));
}

#[test]
fn oscillation_constant_is_positive_and_finite() {
    let spec = s2();
    let cov = build_covering(&spec, 0.5 / 2.0, 1).unwrap();
    let rep = oscillation_check(&spec, &cov, 2, 1.0, 2, 3).unwrap();
    assert_eq!(rep.trials.len(), 2);
    assert!(rep.implied_max.is_finite() && rep.implied_max > 0.0);
    assert!(rep.implied_mean <= rep.implied_max);
}

#[test]
fn un_operator_is_linear_and_maps_constants_to_ones() {
    let spec = s2();
    let nodes = sample_many(&spec, 30, 8).unwrap();
    let one = constant_one(&spec);
    assert!(un_operator(&one, &nodes).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    let f = random_poly(&spec, 4, 3, 1).unwrap();
    let g = f.with_coeffs(vec![0.5, -2.0, 1.0]).unwrap();
    let sum = f.with_coeffs(f.coeffs().iter().zip(g.coeffs()).map(|(a, b)| a + b).collect()).unwrap();
    let (uf, ug, us) = (
        un_operator(&f, &nodes).unwrap(),
        un_operator(&g, &nodes).unwrap(),
        un_operator(&sum, &nodes).unwrap(),
    );
    for i in 0..nodes.len() {
        assert!((us[i] - uf[i] - ug[i]).abs() <= 1e-12 * (1.0 + us[i].abs()));
    }
}

#[test]
fn t_operator_of_zero_is_zero_and_checks_lengths() {
    let spec = s2();
    let nodes = sample_many(&spec, 10, 2).unwrap();
    let w = vec![0.1; 10];
    let t = t_operator(&spec, &[0.0; 10], &w, &nodes, 4).unwrap();
    assert_eq!(t.degree(), 8);
    for x in sample_many(&spec, 5, 3).unwrap() {
        assert_eq!(t.eval(&x).unwrap(), 0.0);
    }
    assert!(matches!(t_operator(&spec, &[1.0; 9], &w, &nodes, 4), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn t_after_u_reproduces_low_degree_polynomials() {
    let n = 2;
    let t_rule = small_rule(2 * n);
    let e_rule = small_rule(n);
    assert!(identity_error(&t_rule, &e_rule, n, 3, 1).unwrap() < 1e-8);
    assert!(matches!(identity_error(&t_rule, &uniform_rule(&s2(), sample_many(&s2(), 20, 1).unwrap(), 1), n, 1, 1), Err(Error::Parameter(_))));
}

#[test]
fn rate_fit_follows_smoothness() {
    let spec = s2();
    let fit = approx_rate(&spec, 1.5, 2.0, &[4, 8, 16], 3).unwrap();
    assert_eq!(fit.x.len(), 3);
    assert!(!fit.degenerate);
    assert!((fit.slope + 1.5).abs() < 0.3, "{}", fit.slope);
    assert!(matches!(approx_rate(&spec, 1.0, 2.0, &[8, 4, 16], 3), Err(Error::Parameter(_))));
    assert!(matches!(approx_rate(&spec, 0.0, 2.0, &[4, 8, 16], 3), Err(Error::Parameter(_))));
}

#[test]
fn bumps_vanish_at_their_centres_and_are_disjoint() {
    let spec = s2();
    let fx = bump_fixture(&spec, 16.0, 6, 5).unwrap();
    assert!(fx.diagnostics.disjoint);
    for b in &fx.bumps {
        assert_eq!(b.eval(&spec, &b.center).unwrap(), 0.0);
    }
    for (i, a) in fx.bumps.iter().enumerate() {
        for b in &fx.bumps[..i] {
            assert!(distance(&spec, &a.center, &b.center).unwrap() > 4.0 / 16.0);
        }
    }
    assert_eq!(bump_profile(0.7), 1.0);
    assert_eq!(bump_profile(0.5), 0.0);
    assert_eq!(bump_profile(1.0), 0.0);
}

#[test]
fn bump_norms_and_laplacian_scale_with_m() {
    let spec = s2();
    let diags: Vec<BumpDiagnostics> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&m| bump_fixture(&spec, m, 3, 1).unwrap().diagnostics)
        .collect();
    for w in diags.windows(2) {
        assert!(w[0].scaled_l1 / w[1].scaled_l1 < 2.0 && w[1].scaled_l1 / w[0].scaled_l1 < 2.0);
        assert!(w[0].scaled_laplacian / w[1].scaled_laplacian < 2.0);
        assert!(w[1].scaled_laplacian / w[0].scaled_laplacian < 2.0);
    }
    // no room for 10^4 bumps of scale 8
    assert!(matches!(bump_fixture(&spec, 8.0, 10_000, 1), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn sup_estimate_is_a_lower_bound_that_finds_the_peak() {
    let spec = s2();
    let o = Sampler::new(&spec, 5).unwrap().next_point();
    let f = ZonalSum::new(&spec, 6, vec![o.clone()], vec![1.0], None).unwrap();
    let peak = f.eval(&o).unwrap();
    let est = sup_estimate(&spec, |x: &Point| f.eval(x).unwrap(), NormOptions::default()).unwrap();
    assert!(est.value <= peak + 1e-9);
    assert!(est.value > 0.999 * peak);
}
