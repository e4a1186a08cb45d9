use std::sync::Arc;

use fraclap::logistic::{LogisticProblem, NewtonOptions, StartRegime};
use fraclap::*;
use rand::{Rng, SeedableRng};

fn basis(l: f64, k: usize) -> Arc<Basis> {
    Arc::new(Basis::with_default_quadrature(l, k).unwrap())
}

fn random_state(rng: &mut impl Rng, dim: usize) -> LogisticState<f64> {
    let coeffs = (0..dim).map(|k| rng.gen_range(-0.5..0.5) / (1.0 + k as f64)).collect();
    LogisticState::new(rng.gen_range(0.1..5.0), rng.gen_range(-0.5..1.5), coeffs)
}

fn perturb(state: &LogisticState<f64>, k: usize, eps: f64) -> LogisticState<f64> {
    let mut s = state.clone();
    if k == 0 {
        s.h += eps;
    } else {
        s.coeffs[k] += eps;
    }
    s
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let b = basis(5.0, 16);
    let weights =
        [Weight::m1(), Weight::m2(), Weight::m1().shifted(1.0), Weight::new(0.0, vec![(1, 1.0), (3, 0.4)]).unwrap()];
    for trial in 0..10 {
        let m = &weights[trial % weights.len()];
        let state = random_state(&mut rng, 17);
        let jac = jacobian(&state, &b, m);
        let eps = 1e-6;
        let mut worst = 0.0f64;
        for j in 0..17 {
            let plus = residual(&perturb(&state, j, eps), &b, m);
            let minus = residual(&perturb(&state, j, -eps), &b, m);
            for i in 0..17 {
                let fd = (plus[i] - minus[i]) / (2.0 * eps);
                worst = worst.max((fd - jac[(i, j)]).abs());
            }
        }
        assert!(worst <= 1e-6 * jac.max_abs(), "trial {trial}: {worst}");
    }
}

#[test]
fn constant_weight_is_rigid() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let b = basis(5.0, 24);
    for c in [0.5, 1.0, 2.0] {
        let m = Weight::constant(c);
        for &lambda in &[0.5, 2.0] {
            for _ in 0..5 {
                let coeffs = (0..25).map(|k| rng.gen_range(-0.2..0.2) * c / (1.0 + k as f64)).collect();
                let init = LogisticState::new(lambda, c * rng.gen_range(0.7..1.3), coeffs);
                let init_sup = init.distance(&LogisticState::constant(lambda, c, 25), &b, 512);
                assert!(init_sup <= 0.5 * c);
                let sol = newton_solve(&init, &b, &m, 1e-12, 50).unwrap();
                assert!((sol.state.h - c).abs() <= 1e-8);
                assert!(sol.state.coeffs.iter().all(|v| v.abs() <= 1e-8));
            }
        }
    }
}

#[test]
fn positive_solution_is_unique_along_the_branch() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    let b = basis(5.0, 48);
    let m = Weight::m1();
    let lambda_1 = LogisticProblem::new(&b, &m).principal_eigen().unwrap().lambda;
    let targets = [2.0 * lambda_1, 3.0 * lambda_1, 4.0 * lambda_1];
    let branch = branch_continue(&m, &b, &BranchOptions::new(targets[2]).with_checkpoints(targets.to_vec())).unwrap();
    for &lambda in &targets {
        let reference = &branch.at(lambda).unwrap().state;
        for _ in 0..5 {
            let mut init = reference.clone();
            init.h *= rng.gen_range(0.6..1.4);
            for (k, c) in init.coeffs.iter_mut().enumerate().skip(1) {
                *c = *c * rng.gen_range(0.6..1.4) + rng.gen_range(-0.02..0.02) / k as f64;
            }
            let sol = newton_solve(&init, &b, &m, 1e-12, 50).unwrap();
            assert!(check_solution(&sol.state, &b, &m).accepted(1e-12));
            assert!(sol.state.distance(reference, &b, 1024) <= 1e-8);
        }
    }
}

#[test]
fn every_branch_state_respects_bound_and_mass() {
    let l = 5.0;
    let b = basis(l, 48);
    let cases = [
        (Weight::m1(), 6.0),
        (Weight::m2(), 8.0),
        (Weight::m1().shifted(1.0), 6.0),
        (Weight::constant(1.0), 5.0),
        (Weight::new(0.0, vec![(1, 1.0)]).unwrap(), 2.0),
    ];
    let xs: Vec<f64> = (0..=4000).map(|i| l * i as f64 / 4000.0).collect();
    for (m, lambda_max) in cases {
        let branch = branch_continue(&m, &b, &BranchOptions::new(lambda_max)).unwrap();
        assert!(!branch.points.is_empty());
        let sup_m = xs.iter().map(|&x| m.eval(x, l)).fold(0.0, f64::max);
        let lambdas = branch.lambdas();
        assert!(lambdas.windows(2).all(|w| w[0] < w[1]));
        for p in &branch.points {
            let u = p.state.field(&b);
            let vals = u.synthesize(&xs);
            let sup = vals.iter().copied().fold(f64::MIN, f64::max);
            let min = vals.iter().copied().fold(f64::MAX, f64::min);
            assert!(sup <= sup_m + 1e-8, "sup u = {sup} at λ = {}", p.state.lambda);
            assert!(min > -1e-10 * sup);
            // Simpson on the fine grid
            let h = l / 4000.0;
            let mass: f64 = vals
                .iter()
                .zip(&xs)
                .enumerate()
                .map(|(i, (&v, &x))| {
                    let w = if i == 0 || i == 4000 {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * v * (m.eval(x, l) - v)
                })
                .sum::<f64>()
                * h
                / 3.0;
            assert!(mass.abs() <= 1e-10, "mass {mass} at λ = {}", p.state.lambda);
        }
    }
}

#[test]
fn regimes_start_where_expected() {
    let b = basis(5.0, 48);
    let neg = branch_continue(&Weight::m1(), &b, &BranchOptions::new(2.0)).unwrap();
    let StartRegime::NegativeMean { lambda_1 } = neg.regime else { panic!("wrong regime {:?}", neg.regime) };
    assert!((neg.points[0].state.lambda - lambda_1 * 1.001).abs() < 1e-12);
    assert!(neg.points[0].diagnostics.sup_abs_u <= 1e-2);

    let pos = branch_continue(&Weight::m1().shifted(1.0), &b, &BranchOptions::new(1.0)).unwrap();
    assert!(matches!(pos.regime, StartRegime::PositiveMean { h_star } if h_star == 0.5));
    let first = &pos.points[0];
    assert_eq!(first.state.lambda, 1e-3);
    assert!((first.diagnostics.sup_u - 0.5).abs() <= 1e-2 && (first.diagnostics.min_u - 0.5).abs() <= 1e-2);

    let zero = branch_continue(&Weight::new(0.0, vec![(1, 1.0)]).unwrap(), &b, &BranchOptions::new(1.0)).unwrap();
    assert!(matches!(zero.regime, StartRegime::ZeroMean { .. }));
}

#[test]
fn collapse_below_the_principal_eigenvalue() {
    let b = basis(5.0, 32);
    let m = Weight::m1();
    let problem = LogisticProblem::new(&b, &m);
    let pair = problem.principal_eigen().unwrap();
    let lambda = 0.8 * pair.lambda;
    let mut coeffs = pair.field.scaled(0.05).into_coeffs();
    let h = coeffs[0] / 5f64.sqrt();
    coeffs[0] = 0.0;
    let sol = problem.newton(&LogisticState::new(lambda, h, coeffs), NewtonOptions::default()).unwrap();
    assert!(problem.check(&sol.state).sup_abs_u < 1e-8);
}
