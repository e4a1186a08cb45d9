//! Finite-difference reference solvers, disjoint from the spectral path.
//!
//! * 1D cell-centered Neumann Laplacian with weight: reference for `s = 1`.
//! * Discrete Dirichlet-to-Neumann map of a truncated cylinder
//!   `(0,L)×(0,Y)`: reference for `s = 1/2`, plus a nonlinear logistic solve
//!   on the same map.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, BandedCholesky, DenseMatrix, JacobiOptions, Lu};
use crate::scalar::{from_usize, lit, tol_floor, Scalar};
use crate::weight::Weight;
use crate::weighted_eigen::ReducedPencil;

/// Cell-centered grid on `(0, L)`: `x_i = (i + 1/2) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid<T> {
    pub n: usize,
    pub h: T,
    pub nodes: Vec<T>,
}

impl<T: Scalar> FdGrid<T> {
    pub fn new(length: T, n: usize) -> Result<Self> {
        if !(length > T::zero()) {
            return Err(Error::InvalidParameter(format!("interval length must be positive, got {length}")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least two cells, got {n}")));
        }
        let h = length / from_usize(n);
        let nodes = (0..n).map(|i| (from_usize::<T>(i) + lit(0.5)) * h).collect();
        Ok(Self { n, h, nodes })
    }

    pub fn sample(&self, m: &Weight<T>) -> Vec<T> {
        let length = self.h * from_usize(self.n);
        self.nodes.iter().map(|&x| m.eval(x, length)).collect()
    }

    /// Diagonal and (constant) off-diagonal of `-d²/dx²` with zero-flux ends.
    pub fn neumann_laplacian(&self) -> (Vec<T>, T) {
        let inv_h2 = T::one() / (self.h * self.h);
        let mut diag = vec![lit::<T>(2.0) * inv_h2; self.n];
        diag[0] = inv_h2;
        diag[self.n - 1] = inv_h2;
        (diag, -inv_h2)
    }

    pub fn neumann_laplacian_dense(&self) -> DenseMatrix<T> {
        let (diag, off) = self.neumann_laplacian();
        DenseMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                diag[i]
            } else if i.abs_diff(j) == 1 {
                off
            } else {
                T::zero()
            }
        })
    }
}

/// Smallest positive eigenvalue of a discrete pencil with its grid vector.
#[derive(Debug, Clone)]
pub struct FdEigen<T> {
    pub lambda: T,
    /// Eigenvector sampled on the grid, oriented so its sum is positive.
    pub vector: Vec<T>,
    pub positive: bool,
}

/// Richardson-extrapolated oracle value from grids `n` and `2n`.
#[derive(Debug, Clone)]
pub struct FdOracleValue<T> {
    pub lambda: T,
    pub coarse: FdEigen<T>,
    pub fine: FdEigen<T>,
}

fn one_signed<T: Scalar>(v: &mut [T]) -> bool {
    let sum: T = v.iter().copied().sum();
    if sum < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let sup = v.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let floor = -tol_floor::<T>(1e-10, 64.0) * sup;
    v.iter().all(|&x| x > floor)
}

fn check_mean<T: Scalar>(samples: &[T]) -> Result<T> {
    let mean = samples.iter().copied().sum::<T>() / from_usize(samples.len());
    if mean.abs() <= tol_floor(1e-12, 8.0) {
        return Err(Error::ZeroMeanWeight { mean: mean.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(mean)
}

/// Number of negative pivots of `A − Λ diag(m)` for the tridiagonal `A`.
fn negative_pivots<T: Scalar>(diag: &[T], off: T, m: &[T], lambda: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let off2 = off * off;
    let mut count = 0;
    let mut d = T::one();
    for (i, (&a, &w)) in diag.iter().zip(m).enumerate() {
        d = if i == 0 { a - lambda * w } else { a - lambda * w - off2 / d };
        if d == T::zero() {
            d = tiny;
        }
        if d < T::zero() {
            count += 1;
        }
    }
    count
}

/// Smallest positive eigenvalue of the cell-centered pencil `A u = Λ m u` on
/// one grid, by Sturm-sequence bisection.
///
/// Since `A` is positive semidefinite with constant kernel, every positive
/// eigenvalue has `uᵀ D u > 0`, so the inertia of `A − Λ D` gains exactly
/// one negative pivot each time `Λ` crosses one. For `Λ → 0⁺` the only
/// negative direction is the constant mode when `mean(m) > 0`.
pub fn fd_eigen_laplace_single<T: Scalar>(length: T, n: usize, m: &Weight<T>) -> Result<FdEigen<T>> {
    let grid = FdGrid::new(length, n)?;
    let samples = grid.sample(m);
    let mean = check_mean(&samples)?;
    let (diag, off) = grid.neumann_laplacian();
    let base = usize::from(mean > T::zero());
    let at_infinity = samples.iter().filter(|&&w| w > T::zero()).count();
    if at_infinity <= base {
        return Err(Error::NoPositiveEigenvalue);
    }
    let mut hi = T::one();
    while negative_pivots(&diag, off, &samples, hi) <= base {
        hi *= lit(2.0);
        if !hi.is_finite() {
            return Err(Error::NoPositiveEigenvalue);
        }
    }
    let mut lo = T::zero();
    for _ in 0..300 {
        let mid = lo + (hi - lo) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if negative_pivots(&diag, off, &samples, mid) > base {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = lo + (hi - lo) / lit(2.0);

    // rows 0..n-2 of (A − ΛD) u = 0 determine u up to scale
    let h2 = grid.h * grid.h;
    let mut u = vec![T::zero(); n];
    u[0] = T::one();
    for i in 0..n - 1 {
        let prev = if i == 0 { T::zero() } else { u[i - 1] };
        u[i + 1] = h2 * (diag[i] - lambda * samples[i]) * u[i] - prev;
    }
    let positive = one_signed(&mut u);
    Ok(FdEigen { lambda, vector: u, positive })
}

/// `Λ` from grids `n` and `2n` with second-order Richardson extrapolation.
pub fn fd_eigen_laplace<T: Scalar>(length: T, n: usize, m: &Weight<T>) -> Result<FdOracleValue<T>> {
    if n < 64 {
        return Err(Error::InvalidParameter(format!("finite-difference oracle needs n >= 64, got {n}")));
    }
    let coarse = fd_eigen_laplace_single(length, n, m)?;
    let fine = fd_eigen_laplace_single(length, 2 * n, m)?;
    let lambda = (lit::<T>(4.0) * fine.lambda - coarse.lambda) / lit(3.0);
    Ok(FdOracleValue { lambda, coarse, fine })
}

/// Smallest positive `Λ` of `op u = Λ diag(m) u` for a symmetric positive
/// semidefinite `op` with a one-dimensional kernel: diagonalize `op` by
/// Jacobi, rewrite the pencil in its eigenbasis, then apply the Schur
/// reduction used by the spectral solver.
pub fn eigen_in_operator_basis<T: Scalar>(op: &DenseMatrix<T>, m: &[T]) -> Result<FdEigen<T>> {
    let n = op.rows();
    assert_eq!(m.len(), n);
    check_mean(m)?;
    let eig = jacobi_eigen(op, JacobiOptions::default());
    let mut diag = eig.values.clone();
    if diag[1] <= T::zero() || diag[0].abs() > diag[1] * lit(1e-6) {
        return Err(Error::InvalidParameter("operator kernel is not one-dimensional".into()));
    }
    diag[0] = T::zero();
    let q = &eig.vectors;
    let mq = DenseMatrix::from_fn(n, n, |i, j| m[i] * q[(i, j)]);
    let pencil_m = q.transpose().mul(&mq);
    let reduced = ReducedPencil::new(&diag, &pencil_m, JacobiOptions::default())?;
    let pair = reduced.positive(0)?;
    let mut vector = q.mul_vec(&pair.vector);
    let positive = one_signed(&mut vector);
    Ok(FdEigen { lambda: pair.lambda, vector, positive })
}

/// Dense route for the 1D oracle (Jacobi on the Neumann matrix); cubic in
/// `n`, so meant for cross-checking [`fd_eigen_laplace_single`] on small grids.
pub fn fd_eigen_laplace_dense<T: Scalar>(length: T, n: usize, m: &Weight<T>) -> Result<FdEigen<T>> {
    let grid = FdGrid::new(length, n)?;
    eigen_in_operator_basis(&grid.neumann_laplacian_dense(), &grid.sample(m))
}

/// Truncated cylinder `(0,L)×(0,Y)`: cell-centered in `x`, vertex-centered
/// in `y` with the trace on the row `y = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderGrid<T> {
    pub length: T,
    pub n_x: usize,
    pub n_y: usize,
    pub height: T,
}

impl<T: Scalar> CylinderGrid<T> {
    /// Requires `n_x, n_y >= 64` and `Y >= 8/√μ_1 = 8L/π`.
    pub fn new(length: T, n_x: usize, n_y: usize, height: T) -> Result<Self> {
        if !(length > T::zero()) {
            return Err(Error::InvalidParameter(format!("interval length must be positive, got {length}")));
        }
        if n_x < 64 || n_y < 64 {
            return Err(Error::InvalidParameter(format!("cylinder grid needs n_x, n_y >= 64, got {n_x} x {n_y}")));
        }
        let min_height = Self::min_height(length);
        if height < min_height * (T::one() - lit(1e-12)) {
            return Err(Error::InvalidParameter(format!("cylinder height {height} below 8/sqrt(mu_1) = {min_height}")));
        }
        Ok(Self { length, n_x, n_y, height })
    }

    /// `Y = 8/√μ_1`.
    pub fn with_default_height(length: T, n_x: usize, n_y: usize) -> Result<Self> {
        Self::new(length, n_x, n_y, Self::min_height(length))
    }

    pub fn min_height(length: T) -> T {
        lit::<T>(8.0) * length / T::PI()
    }

    pub fn trace_grid(&self) -> FdGrid<T> {
        FdGrid::new(self.length, self.n_x).expect("validated grid")
    }

    /// Discrete Dirichlet-to-Neumann matrix, scaled so that `T u ≈ L_{1/2} u`
    /// at the trace nodes.
    ///
    /// The cylinder energy `Σ (h_x/h_y)(Δ_y v)² + Σ w_j (h_y/h_x)(Δ_x v)²`
    /// (half weights on the bottom and top rows) is minimized over the
    /// interior values for fixed trace; the Schur complement of that
    /// quadratic form, divided by `h_x`, is returned. Interior solves use a
    /// banded Cholesky factorization with bandwidth `n_x`.
    pub fn dtn_matrix(&self) -> Result<DenseMatrix<T>> {
        let (nx, ny) = (self.n_x, self.n_y);
        let hx = self.length / from_usize(nx);
        let hy = self.height / from_usize(ny);
        let a = hx / hy;
        let b = hy / hx;
        let half = lit::<T>(0.5);
        let row_weight = |j: usize| if j == ny { half } else { T::one() };
        let horiz_neighbors = |i: usize| {
            if nx == 1 {
                0
            } else if i == 0 || i == nx - 1 {
                1
            } else {
                2
            }
        };

        // interior unknown p = (j - 1) * nx + i for j = 1..=ny
        let entry = |p: usize, q: usize| -> T {
            let (jp, ip) = (p / nx + 1, p % nx);
            if p == q {
                let vertical = if jp == ny { a } else { a + a };
                vertical + row_weight(jp) * b * from_usize(horiz_neighbors(ip))
            } else if p - q == nx {
                -a
            } else if p - q == 1 && ip != 0 {
                -row_weight(jp) * b
            } else {
                T::zero()
            }
        };
        let chol = BandedCholesky::factor(nx * ny, nx, entry)?;

        let columns: Vec<Vec<T>> = (0..nx)
            .into_par_iter()
            .map(|i| {
                let mut rhs = vec![T::zero(); nx * ny];
                rhs[i] = T::one();
                chol.solve_in_place(&mut rhs);
                rhs.truncate(nx);
                rhs
            })
            .collect();

        let bottom_b = half * b;
        let mut t = DenseMatrix::zeros(nx, nx);
        for i in 0..nx {
            for k in 0..nx {
                let mut v = -a * a * columns[k][i];
                if i == k {
                    v += a + bottom_b * from_usize(horiz_neighbors(i));
                } else if i.abs_diff(k) == 1 {
                    v -= bottom_b;
                }
                t[(i, k)] = v / hx;
            }
        }
        t.symmetrize();
        Ok(t)
    }
}

/// Smallest positive `Λ` of `T u = Λ m u` for the discrete DtN map.
pub fn fd_cylinder_eigen<T: Scalar>(grid: &CylinderGrid<T>, m: &Weight<T>) -> Result<FdEigen<T>> {
    let t = grid.dtn_matrix()?;
    eigen_in_operator_basis(&t, &grid.trace_grid().sample(m))
}

#[derive(Debug, Clone, Copy)]
pub struct CylinderLogisticOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    /// Continuation steps from the start point to the requested `λ`.
    pub steps: usize,
}

impl<T: Scalar> Default for CylinderLogisticOptions<T> {
    fn default() -> Self {
        Self { tol: tol_floor(1e-11, 1e3), max_iter: 50, steps: 24 }
    }
}

fn logistic_residual<T: Scalar>(t: &DenseMatrix<T>, m: &[T], lambda: T, u: &[T]) -> Vec<T> {
    let tu = t.mul_vec(u);
    tu.iter().zip(u).zip(m).map(|((&a, &v), &w)| a - lambda * v * (w - v)).collect()
}

fn sup<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a.max(x.abs()))
}

fn logistic_newton<T: Scalar>(
    t: &DenseMatrix<T>,
    m: &[T],
    lambda: T,
    init: &[T],
    opts: &CylinderLogisticOptions<T>,
) -> Result<Vec<T>> {
    let n = init.len();
    let mut u = init.to_vec();
    let mut r = logistic_residual(t, m, lambda, &u);
    let mut rn = sup(&r);
    let mut it = 0;
    while rn > opts.tol {
        if it >= opts.max_iter {
            return Err(Error::NoConvergence { iterations: it, residual: rn.to_f64().unwrap_or(f64::NAN) });
        }
        it += 1;
        let two = lit::<T>(2.0);
        let jac = DenseMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { lambda * (m[i] - two * u[i]) } else { T::zero() };
            t[(i, j)] - d
        });
        let du = Lu::factor(&jac).map_err(|_| Error::SingularJacobian)?.solve(&r);
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..=20 {
            let trial: Vec<T> = u.iter().zip(&du).map(|(&a, &d)| a - step * d).collect();
            let tr = logistic_residual(t, m, lambda, &trial);
            let tn = sup(&tr);
            if tn < rn {
                u = trial;
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
            step /= two;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations: it, residual: rn.to_f64().unwrap_or(f64::NAN) });
        }
    }
    Ok(u)
}

/// Bottom trace of the positive solution of the discrete cylinder problem
/// `T u = λ u (m − u)`.
///
/// Harmonic interior values are eliminated exactly through the DtN matrix,
/// so Newton runs on the trace alone. Above the discrete principal
/// eigenvalue the solution is reached by continuation from the bifurcation
/// point (negative mean) or from `h*` at small `λ` (positive mean). At or
/// below it, Newton starts from a positive multiple of the principal
/// eigenvector and returns wherever it converges, which is `u ≈ 0`.
pub fn fd_cylinder_logistic<T: Scalar>(
    grid: &CylinderGrid<T>,
    m: &Weight<T>,
    lambda: T,
    opts: &CylinderLogisticOptions<T>,
) -> Result<Vec<T>> {
    let t = grid.dtn_matrix()?;
    let samples = grid.trace_grid().sample(m);
    let mean = check_mean(&samples)?;
    let sup_m = samples.iter().copied().fold(T::zero(), T::max);
    if !(sup_m > T::zero()) {
        return Err(Error::NoPositiveSolution);
    }

    let (start_lambda, mut prev_lambda, mut prev, mut current) = if mean < T::zero() {
        let principal = eigen_in_operator_basis(&t, &samples)?;
        let profile = &principal.vector;
        let scale = sup(profile);
        if lambda <= principal.lambda {
            let init: Vec<T> = profile.iter().map(|&v| v / scale * lit(0.1) * sup_m).collect();
            return logistic_newton(&t, &samples, lambda, &init, opts);
        }
        let lambda0 = principal.lambda * (T::one() + lit(1e-2));
        let mut found = None;
        for k in 0..10i32 {
            let amp = lit::<T>(1e-2) * sup_m * lit::<T>(4.0).powi(k / 2 * if k % 2 == 0 { -1 } else { 1 });
            let init: Vec<T> = profile.iter().map(|&v| v / scale * amp).collect();
            if let Ok(u) = logistic_newton(&t, &samples, lambda0, &init, opts) {
                if one_signed(&mut u.clone()) && u.iter().copied().sum::<T>() > T::zero() {
                    found = Some(u);
                    break;
                }
            }
        }
        let first = found.ok_or(Error::NoConvergence { iterations: opts.max_iter, residual: f64::NAN })?;
        (lambda0, principal.lambda, vec![T::zero(); samples.len()], first)
    } else {
        let lambda0 = lit::<T>(1e-3).min(lambda);
        let init = vec![mean; samples.len()];
        let first = logistic_newton(&t, &samples, lambda0, &init, opts)?;
        (lambda0, T::zero(), vec![mean; samples.len()], first)
    };

    if lambda <= start_lambda {
        return logistic_newton(&t, &samples, lambda, &current, opts);
    }
    let steps = opts.steps.max(1);
    let mut lambda_now = start_lambda;
    let mut step = (lambda - start_lambda) / from_usize(steps);
    while lambda_now < lambda {
        let target = (lambda_now + step).min(lambda);
        let w = (target - lambda_now) / (lambda_now - prev_lambda);
        let predictor: Vec<T> = current.iter().zip(&prev).map(|(&c, &p)| c + w * (c - p)).collect();
        match logistic_newton(&t, &samples, target, &predictor, opts) {
            Ok(u) if u.iter().all(|&v| v > T::zero()) => {
                prev = std::mem::replace(&mut current, u);
                prev_lambda = lambda_now;
                lambda_now = target;
            }
            _ => {
                step /= lit(2.0);
                if step < (lambda - start_lambda) * lit(1e-6) {
                    return Err(Error::NoConvergence { iterations: opts.max_iter, residual: f64::NAN });
                }
            }
        }
    }
    Ok(current)
}
