use std::f64::consts::PI;
use std::sync::Arc;

use fraclap::fracop::total_extension_energy;
use fraclap::*;
use proptest::prelude::*;

fn basis(l: f64, k: usize) -> Arc<Basis> {
    Arc::new(Basis::with_default_quadrature(l, k).unwrap())
}

/// Composite Simpson on `[a, b]` with `n` (even) intervals.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn coeffs_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
        .prop_map(|v| v.into_iter().enumerate().map(|(k, c)| c / (1.0 + k as f64)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval(coeffs in coeffs_strategy(17), l in 1.0f64..9.0) {
        let b = basis(l, 16);
        let u = Field::new(&b, coeffs.clone()).unwrap();
        let nodes = u.at_nodes();
        let quad: f64 = nodes.iter().zip(&b.quadrature().weights).map(|(v, w)| v * v * w).sum();
        let series: f64 = coeffs.iter().map(|c| c * c).sum();
        prop_assert!((quad - series).abs() <= 1e-12 * series.max(1.0));
        prop_assert!((u.l2_norm_squared() - series).abs() <= 1e-14 * series.max(1.0));
    }

    #[test]
    fn project_after_synthesize_is_identity(coeffs in coeffs_strategy(25), l in 1.0f64..9.0) {
        let b = basis(l, 24);
        let u = Field::new(&b, coeffs.clone()).unwrap();
        let back = b.project_nodal(&u.at_nodes());
        for (a, c) in back.coeffs().iter().zip(&coeffs) {
            prop_assert!((a - c).abs() <= 1e-12);
        }
    }

    #[test]
    fn powers_compose(coeffs in coeffs_strategy(17), s1 in 0.05f64..0.5, s2 in 0.05f64..0.5) {
        let b = basis(3.0, 16);
        let u = Field::new(&b, coeffs).unwrap();
        let p1 = FracPower::new(s1).unwrap();
        let p2 = FracPower::new(s2).unwrap();
        let p12 = FracPower::new(s1 + s2).unwrap();
        let lhs = apply_ls(&apply_ls(&u, p1), p2);
        let rhs = apply_ls(&u, p12);
        for (a, c) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            prop_assert!((a - c).abs() <= 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn inverse_recovers_zero_mean_part(coeffs in coeffs_strategy(33), s in 0.1f64..1.0) {
        let b = basis(5.0, 32);
        let u = Field::new(&b, coeffs.clone()).unwrap();
        let p = FracPower::new(s).unwrap();
        let back = apply_ts(&apply_ls(&u, p), p).unwrap();
        let xs = b.uniform_grid(257);
        let mean = u.mean();
        for ((x, v), w) in xs.iter().zip(back.synthesize(&xs)).zip(u.synthesize(&xs)) {
            prop_assert!((v - (w - mean)).abs() <= 1e-12, "x = {x}");
        }
    }

    #[test]
    fn weighted_energy_decays_at_least_like_first_mode(coeffs in coeffs_strategy(33)) {
        let l = 5.0;
        let b = basis(l, 32);
        let u = Field::new(&b, coeffs).unwrap();
        let rate = 2.0 * b.mu()[1].sqrt();
        let ymax = 8.0 / b.mu()[1].sqrt();
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let y = ymax * i as f64 / 99.0;
            let scaled = energy_profile(&u, y) * (rate * y).exp();
            prop_assert!(scaled <= prev * (1.0 + 1e-12));
            prev = scaled;
        }
    }
}

#[test]
fn extension_energy_against_direct_quadrature() {
    // gradient of the extension written out mode by mode, integrated by Simpson
    let l = 4.0;
    let b = basis(l, 6);
    let coeffs = vec![0.3, 0.8, -0.4, 0.2, 0.0, -0.1, 0.05];
    let u = Field::new(&b, coeffs.clone()).unwrap();
    let grad2 = |x: f64, y: f64| {
        let (mut vx, mut vy) = (0.0, 0.0);
        for (k, &c) in coeffs.iter().enumerate().skip(1) {
            let w = k as f64 * PI / l;
            let amp = c * (2.0 / l).sqrt() * (-w * y).exp();
            vx -= amp * w * (w * x).sin();
            vy -= amp * w * (w * x).cos();
        }
        vx * vx + vy * vy
    };
    for &y in &[0.0, 0.4, 1.5, 3.0] {
        let direct = simpson(0.0, l, 2000, |x| grad2(x, y));
        let profile = energy_profile(&u, y);
        assert!((direct - profile).abs() < 1e-10 * profile.max(1e-3), "y = {y}: {direct} vs {profile}");
    }
    let ymax = 40.0;
    let total = simpson(0.0, ymax, 20000, |y| simpson(0.0, l, 400, |x| grad2(x, y)));
    assert!((total - total_extension_energy(&u)).abs() < 1e-8);
    // Dirichlet principle: the energy equals ∫ u L_{1/2} u
    let lu = apply_ls(&u, FracPower::half());
    let pairing = simpson(0.0, l, 4000, |x| u.eval(x) * lu.eval(x));
    assert!((pairing - total).abs() < 1e-8);
}

#[test]
fn half_laplacian_applied_twice_is_second_derivative() {
    let l = 3.0;
    let b = basis(l, 8);
    let u = Field::new(&b, vec![0.5, 1.0, 0.0, -0.3, 0.2, 0.0, 0.0, 0.1, 0.0]).unwrap();
    let twice = apply_ls(&apply_ls(&u, FracPower::half()), FracPower::half());
    let h = 1e-3;
    for &x in &[0.4, 1.1, 2.2] {
        let second = (u.eval(x + h) - 2.0 * u.eval(x) + u.eval(x - h)) / (h * h);
        assert!((twice.eval(x) + second).abs() < 1e-4);
    }
}

#[test]
fn single_precision_basis_is_orthonormal() {
    let b = Arc::new(Basis32::with_default_quadrature(5.0, 16).unwrap());
    let g = b.gram();
    for i in 0..17 {
        for j in 0..17 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((g[(i, j)] - expect).abs() < 1e-5);
        }
    }
    let u = Field32::unit(&b, 3).unwrap();
    let out = apply_ls(&u, FracPower::<f32>::half());
    assert!((out.coeffs()[3] - 3.0 * std::f32::consts::PI / 5.0).abs() < 1e-5);
}
