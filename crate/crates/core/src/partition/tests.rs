use std::f64::consts::PI;

use super::*;
use crate::foam::builtin;
use approx::assert_relative_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn within_sigma(mc: &ZEstimate, exact: f64, k: f64) -> bool {
    (mc.value - exact).abs() <= k * mc.stderr
}

#[test]
fn lambda_scale() {
    assert_relative_eq!(lambda(1.0 / (4.0 * PI)), 1.0);
    assert_relative_eq!(lambda(0.01), 1.0 / (0.04 * PI).sqrt());
}

#[test]
fn sphere_is_heat_kernel_at_identity() {
    let s = builtin("sphere").unwrap();
    for tau in [0.1, 1.0] {
        let mc = z_mc(&s, Group::Su2, tau, 10, 1, 2).unwrap();
        let k = crate::group::heat_kernel(tau, &Group::Su2.identity(), HeatMethod::CharSeries).unwrap();
        assert_eq!(mc.stderr, 0.0);
        assert_relative_eq!(mc.value, k, max_relative = 1e-12);
        let ch = z_char_surface(0, tau).unwrap();
        assert!((ch.value - mc.value).abs() < 1e-10 * ch.value);
    }
}

#[test]
fn surface_series_values() {
    let z = z_char_surface(2, 0.0).unwrap();
    assert!((z.value - PI * PI / 6.0).abs() < 1e-7, "{}", z.value);
    assert!((z_char_surface(3, 0.0).unwrap().value - PI.powi(4) / 90.0).abs() < 1e-10);

    // j up to 30, i.e. n = 2j+1 ≤ 61
    let brute: f64 = (0..=60).map(|k| {
        let j = k as f64 / 2.0;
        (-j * (j + 1.0)).exp()
    }).sum();
    assert!((z_char_surface(1, 1.0).unwrap().value - brute).abs() < 1e-14);

    assert!(matches!(z_char_surface(1, 0.0), Err(Error::Divergent(_))));
    assert!(matches!(z_char_surface(0, 0.0), Err(Error::Divergent(_))));
    assert!(matches!(z_char_surface(2, -1.0), Err(Error::NonPositiveTime(_))));
}

#[test]
fn appendix_series_matches_double_sum() {
    let tau = 0.5;
    let mut brute = 0.0;
    for t1 in 0..80u32 {
        for t2 in 0..80u32 {
            let (j1, j2) = (t1 as f64 / 2.0, t2 as f64 / 2.0);
            brute += (-tau * (j1 * (j1 + 1.0) + j2 * (j2 + 1.0))).exp() * invariant_count(j1, j2) as f64;
        }
    }
    let z = z_char_appendix(tau).unwrap();
    assert_relative_eq!(z.value, brute, max_relative = 1e-13);
    assert!(z_char_appendix(0.0).is_err());
}

#[test]
fn invariant_counts_by_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    assert_eq!(invariant_count(0.5, 0.5), 2);
    for j in [0.0, 0.5, 1.0, 3.5] {
        assert_eq!(invariant_count(j, 0.0), 1);
    }
    for (j1, j2) in [(0.5, 0.5), (0.5, 1.0), (1.0, 1.0), (0.0, 1.5)] {
        let (m, se) = character_moment_mc(j1, j2, 400_000, &mut rng);
        let n = invariant_count(j1, j2) as f64;
        assert!((m - n).abs() < 3.0 * se + 1e-12, "N({j1},{j2}) = {n}, mc {m} ± {se}");
    }
}

#[test]
fn commutator_character_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for j in [0.5, 1.0, 1.5] {
        let h = Group::Su2.haar_sample(&mut rng);
        let r = Irrep::spin(j);
        let expect = h.character(r).powi(2) / r.dim() as f64;
        let (m, se) = commutator_character_mc(j, &h, 200_000, &mut rng);
        assert!((m - expect).abs() < 3.0 * se, "j={j}: {m} ± {se} vs {expect}");
    }
}

#[test]
fn mc_agrees_with_character_sums() {
    let cases: [(&str, fn(f64) -> f64); 3] = [
        ("torus", |t| z_char_surface(1, t).unwrap().value),
        ("genus:2", |t| z_char_surface(2, t).unwrap().value),
        ("appendix", |t| z_char_appendix(t).unwrap().value),
    ];
    for (key, exact) in cases {
        let f = builtin(key).unwrap();
        let mc = z_mc(&f, Group::Su2, 0.5, 200_000, 9, 4).unwrap();
        assert!(within_sigma(&mc, exact(0.5), 3.0), "{key}: {mc:?} vs {}", exact(0.5));
    }
}

#[test]
fn mc_floor_and_errors() {
    let t = builtin("torus").unwrap();
    assert!(matches!(
        z_mc(&t, Group::Su2, 0.01, 10, 0, 1),
        Err(Error::BelowMcFloor { .. })
    ));
    assert!(matches!(z_mc(&t, Group::Su2, 0.0, 10, 0, 1), Err(Error::NonPositiveTime(_))));
}

#[test]
fn mc_is_seed_deterministic() {
    let t = builtin("torus").unwrap();
    let a = z_mc(&t, Group::Su2, 0.5, 20_000, 77, 3).unwrap();
    let b = z_mc(&t, Group::Su2, 0.5, 20_000, 77, 3).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    let c = z_mc(&t, Group::Su2, 0.5, 20_000, 77, 1).unwrap();
    let combined = (a.stderr.powi(2) + c.stderr.powi(2)).sqrt();
    assert!((a.value - c.value).abs() < 4.0 * combined);
}

#[test]
fn u1_torus_is_one() {
    // K_τ([a,b]) = K_τ(1) on U(1); the integral is Σ_n e^{-τn²}
    let t = builtin("torus").unwrap();
    let mc = z_mc(&t, Group::U1, 0.5, 1000, 3, 2).unwrap();
    let exact: f64 = (-60..=60).map(|n: i32| (-0.5 * (n * n) as f64).exp()).sum();
    assert_relative_eq!(mc.value, exact, max_relative = 1e-10);
}

#[test]
fn monotone_in_tau() {
    let grid = log_grid(1e-3, 2.0, 15).unwrap();
    for g in 0..4 {
        let z: Vec<f64> = grid.iter().map(|&t| z_char_surface(g, t).unwrap().value).collect();
        assert!(z.windows(2).all(|w| w[0] > w[1]), "genus {g}");
    }
    let z: Vec<f64> = grid.iter().map(|&t| z_char_appendix(t).unwrap().value).collect();
    assert!(z.windows(2).all(|w| w[0] > w[1]));

    let f = builtin("torus").unwrap();
    let mc: Vec<ZEstimate> = [0.3, 0.5, 1.0]
        .iter()
        .map(|&t| z_mc(&f, Group::Su2, t, 100_000, 5, 2).unwrap())
        .collect();
    for w in mc.windows(2) {
        assert!(w[0].value - w[1].value > 3.0 * (w[0].stderr + w[1].stderr));
    }
}

fn char_grid(g: usize) -> Vec<ZEstimate> {
    log_grid(1e-3, 1e-1, 8).unwrap().into_iter().map(|t| z_char_surface(g, t).unwrap()).collect()
}

#[test]
fn genus_fits() {
    let torus = fit_scaling(&char_grid(1), FitModel::Auto).unwrap();
    assert!((torus.omega - 1.0).abs() < 0.05, "{torus:?}");
    assert!((torus.z_prime - 2.0 * PI).abs() < 0.01 * 2.0 * PI, "{}", torus.z_prime);
    assert_eq!(torus.tau_grid.len(), 8);

    let sphere = fit_scaling(&char_grid(0), FitModel::Auto).unwrap();
    assert!((sphere.omega - 3.0).abs() < 0.05, "{sphere:?}");
    for g in [2, 3] {
        let f = fit_scaling(&char_grid(g), FitModel::Auto).unwrap();
        assert!(f.omega.abs() < 0.1, "genus {g}: {f:?}");
        assert_eq!(f.omega_rounded, 0);
    }
    let g2 = fit_scaling(&char_grid(2), FitModel::Auto).unwrap();
    assert!((g2.z_prime - PI * PI / 6.0).abs() < 0.01);
}

#[test]
fn fit_model_choice_and_errors() {
    let pts = char_grid(1);
    let pure = fit_scaling(&pts, FitModel::Pure).unwrap();
    assert!(!pure.with_log_correction && pure.with_log.is_none());
    let log = fit_scaling(&pts, FitModel::WithLog).unwrap();
    assert!(log.with_log_correction);
    assert!(log.rms <= pure.rms);

    assert!(matches!(fit_scaling(&pts[..3], FitModel::Auto), Err(Error::Fit(_))));
    let narrow: Vec<ZEstimate> = log_grid(1e-2, 5e-2, 5).unwrap().into_iter().map(|t| z_char_surface(1, t).unwrap()).collect();
    assert!(matches!(fit_scaling(&narrow, FitModel::Auto), Err(Error::Fit(_))));
    let mut bad = pts.clone();
    bad[2].value = -1.0;
    assert!(matches!(fit_scaling(&bad, FitModel::Auto), Err(Error::Fit(_))));

    // exact power law: pure model, zero residual
    let exact: Vec<ZEstimate> = pts
        .iter()
        .map(|p| ZEstimate { value: 3.0 * p.lambda().powi(2), ..p.clone() })
        .collect();
    let f = fit_scaling(&exact, FitModel::Auto).unwrap();
    assert!(f.pure.rms < 1e-12 && (f.omega - 2.0).abs() < 1e-10);
    assert_relative_eq!(f.z_prime, 3.0, max_relative = 1e-10);
}

#[test]
fn appendix_scaling_is_flagged() {
    let pts: Vec<ZEstimate> = log_grid(1e-3, 1e-1, 8).unwrap().into_iter().map(|t| z_char_appendix(t).unwrap()).collect();
    let f = fit_scaling(&pts, FitModel::Auto).unwrap();
    let pure_ok = (3.0..=3.5).contains(&f.pure.omega);
    assert!(f.with_log_correction || pure_ok, "{f:?}");
}

#[test]
fn csv_round_trip() {
    let pts = char_grid(1);
    let back = ZEstimate::parse_csv(&estimates_csv(&pts)).unwrap();
    assert_eq!(back.len(), 8);
    for (a, b) in pts.iter().zip(&back) {
        assert_relative_eq!(a.value, b.value, max_relative = 1e-14);
        assert_eq!(b.method, ZMethod::CharSurface);
    }
    assert!(ZEstimate::parse_csv("1,2").is_err());
}

#[test]
fn torus_limit_routes_agree() {
    let rich = torus_character_limit().unwrap();
    assert!((rich - 2.0 * PI).abs() < 1e-6, "{rich}");
    let quad = crate::torsion::torus_dominant_part(40).unwrap().value;
    assert!((quad - rich).abs() < 1e-3);
}

/// `2√(πτ) ∫₀^L erf(Lx/√τ)/x dx`, the y-integral done in closed form.
fn toy_oracle(tau: f64, l: f64) -> f64 {
    let s = tau.sqrt() / l;
    let f = |x: f64| if x == 0.0 { 2.0 * l / (PI * tau).sqrt() } else { libm::erf(l * x / tau.sqrt()) / x };
    let a = quadrature::double_exponential::integrate(f, 0.0, s, 1e-14).integral;
    let b = quadrature::double_exponential::integrate(f, s, l, 1e-14).integral;
    2.0 * (PI * tau).sqrt() * (a + b)
}

#[test]
fn toy_matches_reduced_oracle() {
    let z = toy_laplace(1e-4, 1.0, 24).unwrap();
    let o = toy_oracle(1e-4, 1.0);
    assert!((z - o).abs() < 1e-6 * o, "{z} vs {o}");
    assert!((z - 0.19805134167373).abs() < 1e-11);
    for tau in [1e-6, 1e-2, 0.5] {
        let (z, o) = (toy_laplace(tau, 2.0, 24).unwrap(), toy_oracle(tau, 2.0));
        assert!((z - o).abs() < 1e-8 * o, "tau {tau}: {z} vs {o}");
    }
    assert!(toy_laplace(0.0, 1.0, 24).is_err());
    assert!(toy_laplace(1e-3, 1.0, 0).is_err());
    assert!(matches!(toy_laplace(1e-3, 1.0, 1), Err(Error::Quadrature(_))));
}

#[test]
fn toy_fit_prefers_log_model() {
    let f = fit_toy(&toy_grid(), 1.0, 24).unwrap();
    assert!(f.with_log_correction, "{f:?}");
    assert!(f.improvement.unwrap() >= 5.0);
    assert!((f.omega + 1.0).abs() < 0.1);
    // the pure exponent drifts with the window
    let lo = fit_toy(&log_grid(1e-6, 1e-4, 5).unwrap(), 1.0, 24).unwrap().pure.omega;
    let hi = fit_toy(&log_grid(1e-4, 1e-2, 5).unwrap(), 1.0, 24).unwrap().pure.omega;
    assert!((lo - hi).abs() > 0.02, "{lo} {hi}");
}
