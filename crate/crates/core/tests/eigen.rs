use std::sync::Arc;

use fraclap::basis::{default_quad_panels, DEFAULT_QUAD_ORDER};
use fraclap::weighted_eigen::{positive_spectrum, principal_eigen};
use fraclap::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_weight(rng: &mut impl Rng, max_j: usize) -> WeightF64 {
    let n = rng.gen_range(1..=4);
    let harmonics = (0..n).map(|_| (rng.gen_range(1..=max_j), rng.gen_range(-1.0..1.0))).collect();
    Weight::new(rng.gen_range(-0.8..-0.05), harmonics).unwrap()
}

#[test]
fn analytic_assembly_matches_fine_quadrature() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let k = 24;
    let mut weights = vec![Weight::m1(), Weight::m2()];
    weights.extend((0..5).map(|_| random_weight(&mut rng, 12)));
    for l in [2.5, 5.0, 8.0] {
        let fine = Arc::new(Basis::new(l, k, 4 * default_quad_panels(k), DEFAULT_QUAD_ORDER).unwrap());
        for w in &weights {
            let a = assemble_m_analytic(&fine, w);
            let q = assemble_m(&fine, w);
            for i in 0..=k {
                for j in 0..=k {
                    let d = (a.matrix()[(i, j)] - q.matrix()[(i, j)]).abs();
                    assert!(d <= 1e-12, "L={l} ({i},{j}) differs by {d}");
                }
            }
        }
    }
}

#[test]
fn truncation_converges() {
    for (w, s) in [(Weight::m1(), 0.5), (Weight::m2(), 0.75), (Weight::m1(), 1.0)] {
        let p = FracPower::new(s).unwrap();
        let a = principal_eigen(5.0f64, 32, &w, p).unwrap().lambda;
        let b = principal_eigen(5.0, 64, &w, p).unwrap().lambda;
        assert!((a - b).abs() / b <= 1e-8, "s={s}: {a} vs {b}");
    }
}

#[test]
fn converged_driver_reports_its_truncation() {
    let (pair, k) =
        weighted_eigen::principal_eigen_converged(5.0, 8, &Weight::m1(), FracPower::half(), 1e-10, 256).unwrap();
    assert!((16..=256).contains(&k));
    let reference = principal_eigen(5.0f64, 128, &Weight::m1(), FracPower::half()).unwrap().lambda;
    assert!((pair.lambda - reference).abs() / reference < 1e-9);
}

#[test]
fn principal_pair_satisfies_its_constraints() {
    let b = Arc::new(Basis::with_default_quadrature(5.0, 48).unwrap());
    let mat = assemble_m(&b, &Weight::m1());
    let pair = smallest_positive_eigen(&mat, &b, FracPower::half()).unwrap();
    assert!(pair.positive);
    assert!(pair.constraint_residuals.0 <= 1e-10 && pair.constraint_residuals.1 <= 1e-10);
    assert!(rayleigh_residual(&pair, &mat, FracPower::half()) <= 1e-10);
    assert!((pair.rayleigh_quotient(FracPower::half()) - pair.lambda).abs() <= 1e-10 * pair.lambda);
    assert!(pair.field.integral() > 0.0);
}

#[test]
fn higher_eigenfunctions_change_sign() {
    let b = Arc::new(Basis::with_default_quadrature(5.0, 48).unwrap());
    let mat = assemble_m(&b, &Weight::m2());
    let pairs = positive_spectrum(&mat, &b, FracPower::new(0.6).unwrap(), 3).unwrap();
    assert!(pairs[0].positive);
    assert!(pairs.iter().skip(1).all(|p| !p.positive));
    assert!(pairs.windows(2).all(|w| w[0].lambda < w[1].lambda));
}

#[test]
fn single_precision_closed_form() {
    let b = Arc::new(Basis32::with_default_quadrature(5.0, 16).unwrap());
    let mat = assemble_m(&b, &Weight::<f32>::constant(1.0));
    let pair = smallest_positive_eigen(&mat, &b, FracPower::<f32>::half()).unwrap();
    assert!((pair.lambda - std::f32::consts::PI / 5.0).abs() < 1e-5);
    let m1 = principal_eigen(5.0f32, 16, &Weight::m1(), FracPower::half()).unwrap();
    let m1_f64 = principal_eigen(5.0f64, 16, &Weight::m1(), FracPower::half()).unwrap();
    assert!((m1.lambda as f64 - m1_f64.lambda).abs() / m1_f64.lambda < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scaling_the_weight_scales_the_eigenvalue(c in 0.1f64..10.0, s in 0.3f64..1.0) {
        let p = FracPower::new(s).unwrap();
        let base = principal_eigen(5.0, 32, &Weight::m1(), p).unwrap();
        let scaled = principal_eigen(5.0, 32, &Weight::m1().scaled(c), p).unwrap();
        prop_assert!((scaled.lambda - base.lambda / c).abs() <= 1e-10 * base.lambda / c);
    }

    #[test]
    fn constant_weight_closed_form(s in 0.05f64..1.0, l in 0.5f64..10.0, c in 0.2f64..5.0) {
        let pair = principal_eigen(l, 16, &Weight::constant(c), FracPower::new(s).unwrap()).unwrap();
        let expect = (std::f64::consts::PI / l).powf(2.0 * s) / c;
        prop_assert!((pair.lambda - expect).abs() <= 1e-10 * expect);
        prop_assert!(!pair.positive);
    }
}
