//! Galerkin discretization of the fractional logistic problem
//! `(-Δ_N)^{1/2} u = λ u (m - u)` and continuation of its positive branch.
//!
//! A solution is split as `u = h + ũ` with `h` the mean and `ũ` zero-mean.
//! The unknown vector is `z = (h, ũ_1, …, ũ_K)`; the equations are
//!
//! ```text
//! R_0 = ∫ u (m − u)                              (solvability)
//! R_k = −√μ_k ũ_k + λ ∫ u (m − u) φ_k,  k ≥ 1
//! ```

use std::sync::Arc;

use crate::basis::{SpectralBasis, SpectralField};
use crate::error::{Error, Result};
use crate::fracop::FracPower;
use crate::linalg::{DenseMatrix, Lu};
use crate::scalar::{lit, tol_floor, Scalar};
use crate::weight::Weight;
use crate::weighted_eigen::{assemble_m, assemble_m_nodal, smallest_positive_eigen, EigenPair};

/// Grid used for the positivity and a-priori bound diagnostics.
pub const DIAGNOSTIC_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticState<T> {
    pub lambda: T,
    /// Mean of `u`.
    pub h: T,
    /// Coefficients of `ũ`; slot 0 is always zero.
    pub coeffs: Vec<T>,
}

impl<T: Scalar> LogisticState<T> {
    pub fn new(lambda: T, h: T, mut coeffs: Vec<T>) -> Self {
        if let Some(c0) = coeffs.first_mut() {
            *c0 = T::zero();
        }
        Self { lambda, h, coeffs }
    }

    /// `u ≡ 0` at parameter `λ`.
    pub fn trivial(lambda: T, dim: usize) -> Self {
        Self { lambda, h: T::zero(), coeffs: vec![T::zero(); dim] }
    }

    /// `u ≡ c`.
    pub fn constant(lambda: T, c: T, dim: usize) -> Self {
        Self { lambda, h: c, coeffs: vec![T::zero(); dim] }
    }

    /// The full field `u = h + ũ`.
    pub fn field(&self, basis: &Arc<SpectralBasis<T>>) -> SpectralField<T> {
        let mut c = self.coeffs.clone();
        c[0] = self.h * basis.length().sqrt();
        SpectralField::new(basis, c).expect("state length matches basis")
    }

    fn unknowns(&self) -> Vec<T> {
        let mut z = self.coeffs.clone();
        z[0] = self.h;
        z
    }

    fn from_unknowns(lambda: T, z: &[T]) -> Self {
        Self::new(lambda, z[0], z.to_vec())
    }

    /// Largest pointwise distance between two states over a grid.
    pub fn distance(&self, other: &Self, basis: &Arc<SpectralBasis<T>>, grid: usize) -> T {
        let a = self.field(basis).synthesize(&basis.uniform_grid(grid));
        let b = other.field(basis).synthesize(&basis.uniform_grid(grid));
        a.iter().zip(&b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions<T> {
    /// Sup-norm residual target.
    pub tol: T,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl<T: Scalar> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self { tol: tol_floor(1e-12, 64.0), max_iter: 50, max_halvings: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonSolution<T> {
    pub state: LogisticState<T>,
    pub iterations: usize,
    pub residual_norm: T,
}

/// Pointwise diagnostics of a candidate steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionDiagnostics<T> {
    pub min_u: T,
    pub sup_u: T,
    pub sup_abs_u: T,
    pub sup_m_plus: T,
    /// `∫ u (m − u)`.
    pub mass_residual: T,
    pub residual_norm: T,
    pub positive: bool,
    pub bounded: bool,
    pub mass_ok: bool,
}

impl<T: Scalar> SolutionDiagnostics<T> {
    /// Positive, below `sup m⁺`, mass-balanced and solved to `tol`.
    pub fn accepted(&self, tol: T) -> bool {
        self.positive && self.bounded && self.mass_ok && self.residual_norm <= tol
    }
}

/// Weight and basis tables shared by residual, Jacobian and Newton.
#[derive(Debug, Clone)]
pub struct LogisticProblem<T> {
    basis: Arc<SpectralBasis<T>>,
    weight: Weight<T>,
    m_nodes: Vec<T>,
    sqrt_mu: Vec<T>,
    sup_m_plus: T,
}

impl<T: Scalar> LogisticProblem<T> {
    pub fn new(basis: &Arc<SpectralBasis<T>>, weight: &Weight<T>) -> Self {
        let length = basis.length();
        let m_nodes = basis.quadrature().nodes.iter().map(|&x| weight.eval(x, length)).collect();
        let sqrt_mu = basis.mu().iter().map(|m| m.sqrt()).collect();
        Self {
            basis: Arc::clone(basis),
            weight: weight.clone(),
            m_nodes,
            sqrt_mu,
            sup_m_plus: weight.sup_positive_part(length),
        }
    }

    pub fn basis(&self) -> &Arc<SpectralBasis<T>> {
        &self.basis
    }

    pub fn weight(&self) -> &Weight<T> {
        &self.weight
    }

    fn u_at_nodes(&self, state: &LogisticState<T>) -> Vec<T> {
        let mut u = vec![state.h; self.m_nodes.len()];
        for (k, &c) in state.coeffs.iter().enumerate().skip(1) {
            if c == T::zero() {
                continue;
            }
            for (v, &p) in u.iter_mut().zip(self.basis.mode_at_nodes(k)) {
                *v += c * p;
            }
        }
        u
    }

    pub fn residual(&self, state: &LogisticState<T>) -> Vec<T> {
        let u = self.u_at_nodes(state);
        let w = &self.basis.quadrature().weights;
        let f: Vec<T> = u.iter().zip(&self.m_nodes).zip(w).map(|((&u, &m), &w)| w * u * (m - u)).collect();
        let dim = self.basis.dim();
        let mut r = Vec::with_capacity(dim);
        r.push(f.iter().copied().sum());
        for k in 1..dim {
            let proj: T = f.iter().zip(self.basis.mode_at_nodes(k)).map(|(&a, &b)| a * b).sum();
            r.push(-self.sqrt_mu[k] * state.coeffs[k] + state.lambda * proj);
        }
        r
    }

    pub fn residual_norm(&self, state: &LogisticState<T>) -> T {
        sup_norm(&self.residual(state))
    }

    /// `∂R/∂(h, ũ_1..ũ_K)`.
    pub fn jacobian(&self, state: &LogisticState<T>) -> DenseMatrix<T> {
        let u = self.u_at_nodes(state);
        let w = &self.basis.quadrature().weights;
        let two = lit::<T>(2.0);
        let g: Vec<T> = u.iter().zip(&self.m_nodes).zip(w).map(|((&u, &m), &w)| w * (m - two * u)).collect();
        // G_jk = ∫ (m − 2u) φ_j φ_k
        let gm = assemble_m_nodal(&self.basis, &g);
        let gm = gm.matrix();
        let dim = self.basis.dim();
        let length = self.basis.length();
        let sqrt_l = length.sqrt();
        let lambda = state.lambda;
        let mut jac = DenseMatrix::zeros(dim, dim);
        jac[(0, 0)] = gm[(0, 0)] * length;
        for j in 1..dim {
            jac[(0, j)] = gm[(0, j)] * sqrt_l;
        }
        for k in 1..dim {
            jac[(k, 0)] = lambda * gm[(0, k)] * sqrt_l;
            for j in 1..dim {
                jac[(k, j)] = lambda * gm[(k, j)];
            }
            jac[(k, k)] -= self.sqrt_mu[k];
        }
        jac
    }

    /// Damped Newton: full step first, then halvings until the residual
    /// sup-norm decreases.
    pub fn newton(&self, init: &LogisticState<T>, opts: NewtonOptions<T>) -> Result<NewtonSolution<T>> {
        let lambda = init.lambda;
        let mut z = init.unknowns();
        let mut state = init.clone();
        let mut r = self.residual(&state);
        let mut rnorm = sup_norm(&r);
        let mut iterations = 0;
        while rnorm > opts.tol {
            if iterations >= opts.max_iter {
                return Err(Error::NoConvergence { iterations, residual: rnorm.to_f64().unwrap_or(f64::NAN) });
            }
            iterations += 1;
            let jac = self.jacobian(&state);
            let lu = Lu::factor(&jac).map_err(|_| Error::SingularJacobian)?;
            let dz = lu.solve(&r);
            let mut step = T::one();
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let trial_z: Vec<T> = z.iter().zip(&dz).map(|(&a, &d)| a - step * d).collect();
                let trial = LogisticState::from_unknowns(lambda, &trial_z);
                let tr = self.residual(&trial);
                let tnorm = sup_norm(&tr);
                if tnorm < rnorm {
                    accepted = Some((trial_z, trial, tr, tnorm));
                    break;
                }
                step /= lit(2.0);
            }
            match accepted {
                Some((nz, ns, nr, nn)) => {
                    z = nz;
                    state = ns;
                    r = nr;
                    rnorm = nn;
                }
                None => return Err(Error::NoConvergence { iterations, residual: rnorm.to_f64().unwrap_or(f64::NAN) }),
            }
        }
        Ok(NewtonSolution { state, iterations, residual_norm: rnorm })
    }

    pub fn check(&self, state: &LogisticState<T>) -> SolutionDiagnostics<T> {
        let field = state.field(&self.basis);
        let values = field.synthesize(&self.basis.uniform_grid(DIAGNOSTIC_GRID));
        let min_u = values.iter().copied().fold(T::infinity(), T::min);
        let sup_u = values.iter().copied().fold(T::neg_infinity(), T::max);
        let sup_abs_u = values.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let r = self.residual(state);
        let mass_residual = r[0];
        let residual_norm = sup_norm(&r);
        let pos_floor = -tol_floor::<T>(1e-10, 64.0) * sup_abs_u;
        SolutionDiagnostics {
            min_u,
            sup_u,
            sup_abs_u,
            sup_m_plus: self.sup_m_plus,
            mass_residual,
            residual_norm,
            positive: sup_abs_u > T::zero() && min_u > pos_floor,
            bounded: sup_u <= self.sup_m_plus + tol_floor(1e-8, 1e4),
            mass_ok: mass_residual.abs() <= tol_floor(1e-10, 1e3),
        }
    }

    /// Principal pair of `L_{1/2} u = λ m u` on this basis.
    pub fn principal_eigen(&self) -> Result<EigenPair<T>> {
        let mat = assemble_m(&self.basis, &self.weight);
        smallest_positive_eigen(&mat, &self.basis, FracPower::half())
    }
}

fn sup_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a.max(x.abs()))
}

pub fn residual<T: Scalar>(state: &LogisticState<T>, basis: &Arc<SpectralBasis<T>>, m: &Weight<T>) -> Vec<T> {
    LogisticProblem::new(basis, m).residual(state)
}

pub fn jacobian<T: Scalar>(state: &LogisticState<T>, basis: &Arc<SpectralBasis<T>>, m: &Weight<T>) -> DenseMatrix<T> {
    LogisticProblem::new(basis, m).jacobian(state)
}

pub fn newton_solve<T: Scalar>(
    init: &LogisticState<T>,
    basis: &Arc<SpectralBasis<T>>,
    m: &Weight<T>,
    tol: T,
    max_iter: usize,
) -> Result<NewtonSolution<T>> {
    let opts = NewtonOptions { tol, max_iter, ..NewtonOptions::default() };
    LogisticProblem::new(basis, m).newton(init, opts)
}

pub fn check_solution<T: Scalar>(
    state: &LogisticState<T>,
    basis: &Arc<SpectralBasis<T>>,
    m: &Weight<T>,
) -> SolutionDiagnostics<T> {
    LogisticProblem::new(basis, m).check(state)
}

/// How the branch was started, chosen from the sign of the weight's mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartRegime<T> {
    /// Negative mean: bifurcation from `(λ_1, 0)`.
    NegativeMean { lambda_1: T },
    /// Positive mean: bifurcation from `(0, h*)`.
    PositiveMean { h_star: T },
    /// Zero mean: built through the perturbed weights `m − 1/n`.
    ZeroMean { n: usize, lambda_1_perturbed: T },
}

#[derive(Debug, Clone)]
pub struct BranchPoint<T> {
    pub state: LogisticState<T>,
    pub diagnostics: SolutionDiagnostics<T>,
    pub newton_iters: usize,
}

#[derive(Debug, Clone)]
pub struct Branch<T> {
    pub points: Vec<BranchPoint<T>>,
    pub weight: Weight<T>,
    pub length: T,
    pub k_max: usize,
    pub regime: StartRegime<T>,
}

impl<T: Scalar> Branch<T> {
    pub fn lambdas(&self) -> Vec<T> {
        self.points.iter().map(|p| p.state.lambda).collect()
    }

    /// Point whose `λ` equals `lambda` to relative `1e-12`.
    pub fn at(&self, lambda: T) -> Option<&BranchPoint<T>> {
        let tol = tol_floor::<T>(1e-12, 16.0) * lambda.abs().max(T::one());
        self.points.iter().find(|p| (p.state.lambda - lambda).abs() <= tol)
    }
}

#[derive(Debug, Clone)]
pub struct BranchOptions<T> {
    pub lambda_max: T,
    /// Parameter values the continuation must land on exactly.
    pub checkpoints: Vec<T>,
    pub newton: NewtonOptions<T>,
    /// Relative offset of the first point above `λ_1` (negative mean).
    pub takeoff_offset: T,
    /// First `λ` for positive-mean weights.
    pub small_lambda: T,
    /// `None` uses `0.05 max(λ_1, 1)`.
    pub initial_step: Option<T>,
    pub max_step: T,
    pub max_halvings: usize,
    /// Zero-mean regime stops doubling `n` once `λ_1(m − 1/n)` drops below this.
    pub zero_mean_target: T,
}

impl<T: Scalar> BranchOptions<T> {
    pub fn new(lambda_max: T) -> Self {
        Self {
            lambda_max,
            checkpoints: Vec::new(),
            newton: NewtonOptions::default(),
            takeoff_offset: lit(1e-3),
            small_lambda: lit(1e-3),
            initial_step: None,
            max_step: lit(0.5),
            max_halvings: 10,
            zero_mean_target: lit(1e-3),
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<T>) -> Self {
        self.checkpoints = checkpoints;
        self
    }
}

/// Converged, accepted state at `λ_1 (1 + offset)` starting from a small
/// multiple of the positive principal eigenfunction.
///
/// Newton near a transcritical bifurcation overshoots onto negative values
/// and then `u = 0` when the starting amplitude is below half the true one;
/// such starts fail the positivity check and are retried with amplitudes
/// spread geometrically around `1e-3 sup m⁺`.
pub fn bifurcation_takeoff<T: Scalar>(
    problem: &LogisticProblem<T>,
    principal: &EigenPair<T>,
    offset: T,
    newton: NewtonOptions<T>,
) -> Result<BranchPoint<T>> {
    let basis = problem.basis();
    let lambda = principal.lambda * (T::one() + offset);
    let profile = &principal.field;
    let sup = profile.sup_norm_on_grid(DIAGNOSTIC_GRID);
    let base = lit::<T>(1e-3) * problem.sup_m_plus;
    let mut last_err = Error::BranchStall { last_lambda: lambda.to_f64().unwrap_or(f64::NAN) };
    for attempt in 0..12i32 {
        // 1, 4, 1/4, 16, 1/16, ...
        let power = if attempt % 2 == 1 { (attempt + 1) / 2 } else { -(attempt / 2) };
        let amplitude = base * lit::<T>(4.0).powi(power);
        let scale = amplitude / sup;
        let mut coeffs: Vec<T> = profile.coeffs().iter().map(|&c| c * scale).collect();
        let h = coeffs[0] / basis.length().sqrt();
        coeffs[0] = T::zero();
        let init = LogisticState::new(lambda, h, coeffs);
        match problem.newton(&init, newton) {
            Ok(sol) => {
                let diag = problem.check(&sol.state);
                if diag.accepted(newton.tol) {
                    return Ok(BranchPoint { state: sol.state, diagnostics: diag, newton_iters: sol.iterations });
                }
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Traces the positive branch of `L_{1/2} u = λ u (m − u)` up to
/// `opts.lambda_max`, dispatching on the sign of `mean(m)`.
pub fn branch_continue<T: Scalar>(
    m: &Weight<T>,
    basis: &Arc<SpectralBasis<T>>,
    opts: &BranchOptions<T>,
) -> Result<Branch<T>> {
    let mean = m.mean();
    if mean.abs() <= tol_floor(1e-12, 8.0) {
        return zero_mean_branch(m, basis, opts);
    }
    let problem = LogisticProblem::new(basis, m);
    let (first, anchor, regime, step_scale) = if mean < T::zero() {
        if !m.is_somewhere_positive(basis.length()) {
            return Err(Error::NoPositiveSolution);
        }
        let principal = problem.principal_eigen()?;
        let first = bifurcation_takeoff(&problem, &principal, opts.takeoff_offset, opts.newton)?;
        let anchor = LogisticState::trivial(principal.lambda, basis.dim());
        (first, anchor, StartRegime::NegativeMean { lambda_1: principal.lambda }, principal.lambda)
    } else {
        let lambda = opts.small_lambda;
        let init = LogisticState::constant(lambda, mean, basis.dim());
        let sol = problem.newton(&init, opts.newton)?;
        let diag = problem.check(&sol.state);
        if !diag.accepted(opts.newton.tol) {
            return Err(Error::BranchStall { last_lambda: 0.0 });
        }
        let first = BranchPoint { state: sol.state, diagnostics: diag, newton_iters: sol.iterations };
        let anchor = LogisticState::constant(T::zero(), mean, basis.dim());
        (first, anchor, StartRegime::PositiveMean { h_star: mean }, lambda)
    };
    let points = continue_from(&problem, first, anchor, step_scale, opts)?;
    Ok(Branch { points, weight: m.clone(), length: basis.length(), k_max: basis.k_max(), regime })
}

/// Natural-parameter continuation in `λ`. The predictor is the secant
/// through the last two branch points; before the second point exists the
/// bifurcation point `anchor` plays the role of the earlier one.
fn continue_from<T: Scalar>(
    problem: &LogisticProblem<T>,
    first: BranchPoint<T>,
    anchor: LogisticState<T>,
    step_scale: T,
    opts: &BranchOptions<T>,
) -> Result<Vec<BranchPoint<T>>> {
    let mut checkpoints: Vec<T> =
        opts.checkpoints.iter().copied().filter(|&c| c > first.state.lambda && c < opts.lambda_max).collect();
    checkpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite checkpoints"));
    checkpoints.push(opts.lambda_max);

    let mut step = opts.initial_step.unwrap_or(lit::<T>(0.05) * step_scale.max(T::one())).min(opts.max_step);
    let mut points = vec![first];
    let mut successes = 0usize;
    let mut halvings = 0usize;
    let mut next_stop = 0usize;

    while next_stop < checkpoints.len() {
        let prev = points.last().expect("branch has a start point");
        let lambda_prev = prev.state.lambda;
        let target = checkpoints[next_stop];
        if lambda_prev >= target {
            next_stop += 1;
            continue;
        }
        let lambda = (lambda_prev + step).min(target);
        let before = match points.len() {
            1 => &anchor,
            n => &points[n - 2].state,
        };
        let init = secant_predictor(before, &prev.state, lambda);
        let outcome = problem.newton(&init, opts.newton).ok().and_then(|sol| {
            let diag = problem.check(&sol.state);
            let collapsed = diag.sup_abs_u < lit::<T>(0.1) * prev.diagnostics.sup_abs_u;
            (diag.accepted(opts.newton.tol) && !collapsed).then_some(BranchPoint {
                state: sol.state,
                diagnostics: diag,
                newton_iters: sol.iterations,
            })
        });
        match outcome {
            Some(point) => {
                points.push(point);
                halvings = 0;
                successes += 1;
                if successes >= 3 {
                    step = (step * lit(2.0)).min(opts.max_step);
                    successes = 0;
                }
            }
            None => {
                successes = 0;
                halvings += 1;
                if halvings > opts.max_halvings {
                    return Err(Error::BranchStall { last_lambda: lambda_prev.to_f64().unwrap_or(f64::NAN) });
                }
                step /= lit(2.0);
            }
        }
    }
    Ok(points)
}

fn secant_predictor<T: Scalar>(before: &LogisticState<T>, last: &LogisticState<T>, lambda: T) -> LogisticState<T> {
    let span = last.lambda - before.lambda;
    if !(span > T::zero()) {
        let mut init = last.clone();
        init.lambda = lambda;
        return init;
    }
    let t = (lambda - last.lambda) / span;
    let coeffs = last.coeffs.iter().zip(&before.coeffs).map(|(&a, &b)| a + t * (a - b)).collect();
    LogisticState::new(lambda, last.h + t * (last.h - before.h), coeffs)
}

fn zero_mean_branch<T: Scalar>(
    m: &Weight<T>,
    basis: &Arc<SpectralBasis<T>>,
    opts: &BranchOptions<T>,
) -> Result<Branch<T>> {
    if m.is_constant() {
        // m ≡ 0 has no positive solution
        return Err(Error::NoPositiveSolution);
    }
    let mut n = 8usize;
    let (perturbed, lambda_1n) = loop {
        let candidate = m.shifted(-T::one() / T::from_usize(n).expect("n fits the scalar type"));
        let pair = LogisticProblem::new(basis, &candidate).principal_eigen()?;
        if pair.lambda < opts.zero_mean_target {
            break (candidate, pair.lambda);
        }
        if n >= 1 << 24 {
            return Err(Error::BranchStall { last_lambda: 0.0 });
        }
        n *= 2;
    };
    let approx = branch_continue(&perturbed, basis, opts)?;
    let problem = LogisticProblem::new(basis, m);
    let points = approx
        .points
        .iter()
        .filter_map(|p| {
            let sol = problem.newton(&p.state, opts.newton).ok()?;
            let diag = problem.check(&sol.state);
            let nontrivial = diag.sup_abs_u >= lit::<T>(0.1) * p.diagnostics.sup_abs_u;
            (diag.accepted(opts.newton.tol) && nontrivial).then_some(BranchPoint {
                state: sol.state,
                diagnostics: diag,
                newton_iters: sol.iterations,
            })
        })
        .collect();
    Ok(Branch {
        points,
        weight: m.clone(),
        length: basis.length(),
        k_max: basis.k_max(),
        regime: StartRegime::ZeroMean { n, lambda_1_perturbed: lambda_1n },
    })
}
