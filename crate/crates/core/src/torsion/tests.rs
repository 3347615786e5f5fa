use std::f64::consts::PI;

use super::*;
use crate::connection::{find_flat, gauge_act, FlatOptions};
use crate::foam::builtin;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn genus2_sample(seed: u64) -> (Foam, FlatSample) {
    let f = builtin("genus:2").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = find_flat(&f, Group::Su2, &mut rng, &FlatOptions::default()).unwrap();
    (f, s)
}

#[test]
fn genus2_basis_independence() {
    let (f, s) = genus2_sample(11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let vals: Vec<f64> = (0..20).map(|_| torsion_at(&f, &s, &mut rng).unwrap().magnitude).collect();
    let (lo, hi) = vals.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    assert!((hi - lo) / lo < 1e-8, "{vals:?}");
    let t = torsion_at(&f, &s, &mut rng).unwrap();
    assert_eq!(t.case, TorsionCase::Irreducible);
    assert_eq!(t.bases_meta.betti, [0, 6, 0]);
    assert!((t.magnitude - t.spectral).abs() / t.spectral < 1e-8);
}

#[test]
fn harmonic_rotation_does_not_matter() {
    let t = builtin("torus").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fam = AnalyticFamily::Torus { psi_a: 0.9, psi_b: 2.0, axis: [1.0, 2.0, 2.0], sign: -1 };
    let s = crate::connection::analytic_flat(&t, &fam, &mut rng).unwrap();
    let base = torsion_at(&t, &s, &mut rng).unwrap().magnitude;
    let opts = TorsionOptions { expected_b0: None, rotate_h: true };
    for _ in 0..10 {
        let r = torsion_with(&t, &s, &mut rng, &opts).unwrap();
        assert!(r.bases_meta.rotated_h);
        assert!((r.magnitude - base).abs() < 1e-10);
    }
    assert!((base - 1.0).abs() < 1e-10);
}

#[test]
fn gauge_invariance() {
    let (f, s) = genus2_sample(21);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let base = torsion_at(&f, &s, &mut rng).unwrap().magnitude;
    for _ in 0..5 {
        let h = Group::Su2.haar_sample(&mut rng);
        let moved = FlatSample::new(&f, gauge_act(&h, &s.connection), None, 0).unwrap();
        let v = torsion_at(&f, &moved, &mut rng).unwrap().magnitude;
        assert!((v - base).abs() / base < 1e-8);
    }
}

#[test]
fn refusals() {
    let t = builtin("torus").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fam = AnalyticFamily::Torus { psi_a: 1.0, psi_b: 1.3, axis: [0.0, 0.0, 1.0], sign: 1 };
    let mut s = crate::connection::analytic_flat(&t, &fam, &mut rng).unwrap();
    let opts = TorsionOptions { expected_b0: Some(3), rotate_h: false };
    assert!(matches!(
        torsion_with(&t, &s, &mut rng, &opts),
        Err(Error::IsotropyMismatch { found: 1, expected: 3 })
    ));
    let bent = FlatSample::new(&t, Connection::haar(Group::Su2, 2, &mut rng), None, 0).unwrap();
    assert!(matches!(torsion_at(&t, &bent, &mut rng), Err(Error::InvalidParameter(_))));
    s.possibly_singular = Some(true);
    assert!(matches!(torsion_at(&t, &s, &mut rng), Err(Error::SingularConnection)));

    // the trivial connection has a zero-size d⁰ but all of c¹ in h¹
    let triv = crate::connection::analytic_flat(&t, &AnalyticFamily::Trivial, &mut rng).unwrap();
    let r = torsion_at(&t, &triv, &mut rng).unwrap();
    assert_eq!(r.case, TorsionCase::Reducible);
    assert_eq!(r.bases_meta.betti, [3, 6, 3]);
    assert!((r.magnitude - 1.0).abs() < 1e-12);
}

#[test]
fn batch_uses_modal_isotropy() {
    let t = builtin("torus").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut samples = Vec::new();
    for k in 0..4 {
        let fam = AnalyticFamily::Torus { psi_a: 0.5 + 0.3 * k as f64, psi_b: 1.1, axis: [0.0, 1.0, 0.0], sign: 1 };
        samples.push(crate::connection::analytic_flat(&t, &fam, &mut rng).unwrap());
    }
    samples.push(crate::connection::analytic_flat(&t, &AnalyticFamily::Trivial, &mut rng).unwrap());
    let out = torsion_batch(&t, &samples, &mut rng);
    assert!(out[..4].iter().all(|r| r.is_ok()));
    assert!(matches!(out[4], Err(Error::IsotropyMismatch { found: 3, expected: 1 })));
}

#[test]
fn torus_volume_grid_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows = torus_volume_grid(20, 0.1, PI - 0.1, &mut rng).unwrap();
    assert_eq!(rows.len(), 400);
    for r in &rows {
        assert!(r.abs_error < 1e-10, "{r:?}");
        assert!((r.torsion - 1.0).abs() < 1e-10, "{r:?}");
    }
    let csv = volume_grid_csv(&rows);
    assert_eq!(csv.lines().next(), Some("psi_a,psi_b,vol,formula,abs_error"));
    assert_eq!(csv.lines().count(), 401);
}

#[test]
fn torus_dominant_part_quadrature() {
    let d = torus_dominant_part(40).unwrap();
    assert!((d.moduli_integral - 2.0 * PI.powi(3)).abs() < 1e-6, "{d:?}");
    assert!((d.value - 2.0 * PI).abs() < 1e-6, "{d:?}");
    assert!(d.chart_density_error < 1e-6, "{d:?}");
    assert!(matches!(torus_dominant_part(0), Err(Error::Quadrature(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torus_torsion_is_one(pa in 0.05f64..PI - 0.05, pb in 0.05f64..PI - 0.05, seed in any::<u64>()) {
        let t = builtin("torus").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axis = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0];
        let fam = AnalyticFamily::Torus { psi_a: pa, psi_b: pb, axis, sign: 1 };
        let s = crate::connection::analytic_flat(&t, &fam, &mut rng).unwrap();
        let r = torsion_at(&t, &s, &mut rng).unwrap();
        prop_assert!((r.magnitude - 1.0).abs() < 1e-9);
        let vol = delta1_volume(&t, &s.connection).unwrap();
        prop_assert!((vol - 4.0 * (pa.sin().powi(2) + pb.sin().powi(2))).abs() < 1e-10);
    }

    #[test]
    fn torsion_continuous_along_torus(pa in 0.2f64..PI - 0.2, pb in 0.2f64..PI - 0.2) {
        let t = builtin("torus").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let eps = 1e-6;
        let at = |x: f64, rng: &mut ChaCha8Rng| {
            let fam = AnalyticFamily::Torus { psi_a: x, psi_b: pb, axis: [0.0, 0.0, 1.0], sign: -1 };
            let s = crate::connection::analytic_flat(&t, &fam, rng).unwrap();
            delta1_volume(&t, &s.connection).unwrap()
        };
        let (v0, v1) = (at(pa, &mut rng), at(pa + eps, &mut rng));
        prop_assert!((v1 - v0).abs() < 1e-4);
    }
}
