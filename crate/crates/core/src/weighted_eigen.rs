//! Smallest positive eigenvalue of the singular pencil
//! `diag(μ_k^s) u = Λ M u` with `M_ij = ∫ m φ_i φ_j`.
//!
//! Row 0 of the pencil reads `0 = Λ (M u)_0`, so every nonzero eigenvalue
//! carries the constraint `∫ m u = 0`. Eliminating `u_0` through that row
//! leaves the symmetric pencil `D ũ = Λ M̃ ũ` on modes `k ≥ 1`, where `M̃` is
//! the Schur complement of `M_00`. Scaling by `D^{-1/2}` turns it into the
//! standard problem `S w = θ w` with `Λ = 1/θ`.

use std::sync::Arc;

use crate::basis::{SpectralBasis, SpectralField};
use crate::error::{Error, Result};
use crate::fracop::FracPower;
use crate::linalg::{jacobi_eigen, DenseMatrix, JacobiOptions};
use crate::scalar::{from_usize, lit, tol_floor, Scalar};
use crate::weight::Weight;

/// Grid used by [`positivity_scan`] when classifying eigenfunctions.
pub const POSITIVITY_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T> {
    matrix: DenseMatrix<T>,
}

impl<T: Scalar> WeightMatrix<T> {
    pub fn from_matrix(mut matrix: DenseMatrix<T>) -> Self {
        assert!(matrix.is_square());
        matrix.symmetrize();
        Self { matrix }
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `M_00`, which equals the average of the weight.
    pub fn mean(&self) -> T {
        self.matrix[(0, 0)]
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { matrix: DenseMatrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(i, j)] * factor) }
    }
}

/// `M_ij = ∫ m φ_i φ_j` by the basis quadrature, then symmetrized.
pub fn assemble_m<T: Scalar>(basis: &SpectralBasis<T>, m: &Weight<T>) -> WeightMatrix<T> {
    let quad = basis.quadrature();
    let length = basis.length();
    let mw: Vec<T> = quad.nodes.iter().zip(&quad.weights).map(|(&x, &w)| m.eval(x, length) * w).collect();
    assemble_m_nodal(basis, &mw)
}

/// Same as [`assemble_m`] with `m(x_q) w_q` already tabulated at the nodes.
pub(crate) fn assemble_m_nodal<T: Scalar>(basis: &SpectralBasis<T>, weighted: &[T]) -> WeightMatrix<T> {
    let n = basis.dim();
    let mut mat = DenseMatrix::zeros(n, n);
    let mut scratch = vec![T::zero(); weighted.len()];
    for i in 0..n {
        for (s, (&p, &w)) in scratch.iter_mut().zip(basis.mode_at_nodes(i).iter().zip(weighted)) {
            *s = p * w;
        }
        for j in i..n {
            let v: T = scratch.iter().zip(basis.mode_at_nodes(j)).map(|(&a, &b)| a * b).sum();
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    WeightMatrix { matrix: mat }
}

/// Exact `M` for a cosine-series weight from the product-to-sum rule
/// `∫_0^L cos(aθ) cos(bθ) cos(cθ) dx = (L/4) Σ_± [a ± b ± c = 0]`, `θ = πx/L`.
pub fn assemble_m_analytic<T: Scalar>(basis: &SpectralBasis<T>, m: &Weight<T>) -> WeightMatrix<T> {
    let n = basis.dim();
    let length = basis.length();
    let norm = |k: usize| {
        if k == 0 {
            T::one() / length.sqrt()
        } else {
            (lit::<T>(2.0) / length).sqrt()
        }
    };
    let quarter_l = length / lit(4.0);
    let triple = |a: i64, b: i64, c: i64| -> T {
        let hits = [a + b + c, a + b - c, a - b + c, a - b - c].iter().filter(|&&v| v == 0).count();
        quarter_l * from_usize(hits)
    };
    let mut mat = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let mut v = if i == k { m.offset() } else { T::zero() };
            for &(j, a) in m.harmonics() {
                let (ii, kk, jj) = (i as i64, k as i64, j as i64);
                if (ii - kk).abs() == jj || ii + kk == jj {
                    v += a * norm(i) * norm(k) * triple(ii, kk, jj);
                }
            }
            mat[(i, k)] = v;
            mat[(k, i)] = v;
        }
    }
    WeightMatrix { matrix: mat }
}

/// Symmetric reduction of `diag(d) u = Λ M u` where slot 0 is the kernel
/// of `diag(d)` (`d_0 = 0`) and `d_k > 0` otherwise.
///
/// Shared by the spectral solver and the finite-difference oracles, which
/// bring their discrete operators into this form first.
#[derive(Debug, Clone)]
pub struct ReducedPencil<T> {
    m00: T,
    m0: Vec<T>,
    inv_sqrt_d: Vec<T>,
    theta: Vec<T>,
    w: DenseMatrix<T>,
    pub sweeps: usize,
    pub max_asymmetry: T,
}

/// One eigenpair of the full pencil, normalized so `uᵀ M u = 1`.
#[derive(Debug, Clone)]
pub struct PencilEigen<T> {
    pub lambda: T,
    pub vector: Vec<T>,
}

impl<T: Scalar> ReducedPencil<T> {
    pub fn new(diag: &[T], m: &DenseMatrix<T>, opts: JacobiOptions<T>) -> Result<Self> {
        let n = diag.len();
        assert!(n >= 2 && m.rows() == n && m.cols() == n, "pencil dimensions disagree");
        let m00 = m[(0, 0)];
        if m00.abs() <= tol_floor(1e-12, 8.0) {
            return Err(Error::ZeroMeanWeight { mean: m00.to_f64().unwrap_or(f64::NAN) });
        }
        if diag[1..].iter().any(|&d| !(d > T::zero())) {
            return Err(Error::InvalidParameter("pencil diagonal must be positive off the kernel slot".into()));
        }
        let m0: Vec<T> = (1..n).map(|j| m[(0, j)]).collect();
        let inv_sqrt_d: Vec<T> = diag[1..].iter().map(|&d| T::one() / d.sqrt()).collect();
        let r = n - 1;
        let s = DenseMatrix::from_fn(r, r, |k, j| {
            let schur = m[(k + 1, j + 1)] - m[(k + 1, 0)] * m[(0, j + 1)] / m00;
            schur * inv_sqrt_d[k] * inv_sqrt_d[j]
        });
        let max_asymmetry = s.max_asymmetry();
        let eig = jacobi_eigen(&s, opts);
        Ok(Self { m00, m0, inv_sqrt_d, theta: eig.values, w: eig.vectors, sweeps: eig.sweeps, max_asymmetry })
    }

    fn positive_cutoff(&self) -> T {
        let scale = self.theta.iter().fold(T::zero(), |a, t| a.max(t.abs()));
        scale * T::epsilon() * lit(64.0)
    }

    /// Number of positive eigenvalues `Λ` of the pencil.
    pub fn positive_count(&self) -> usize {
        let cut = self.positive_cutoff();
        self.theta.iter().filter(|&&t| t > cut).count()
    }

    /// The `rank`-th smallest positive eigenvalue (rank 0 = smallest).
    pub fn positive(&self, rank: usize) -> Result<PencilEigen<T>> {
        let cut = self.positive_cutoff();
        let r = self.theta.len();
        // theta is ascending: largest positive theta gives smallest positive Λ
        let idx = r.checked_sub(rank + 1).ok_or(Error::NoPositiveEigenvalue)?;
        let theta = self.theta[idx];
        if !(theta > cut) {
            return Err(Error::NoPositiveEigenvalue);
        }
        let scale = T::one() / theta.sqrt();
        let mut vector = Vec::with_capacity(r + 1);
        vector.push(T::zero());
        for k in 0..r {
            vector.push(self.w[(k, idx)] * self.inv_sqrt_d[k] * scale);
        }
        let dot: T = self.m0.iter().zip(&vector[1..]).map(|(&a, &b)| a * b).sum();
        vector[0] = -dot / self.m00;
        Ok(PencilEigen { lambda: T::one() / theta, vector })
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub lambda: T,
    /// Normalized so `∫ m u² = 1` and `∫ u > 0` (ties: `u(0) > 0`).
    pub field: SpectralField<T>,
    pub positive: bool,
    /// `(|∫ m u² − 1|, |∫ m u|)`.
    pub constraint_residuals: (T, T),
    pub sweeps: usize,
}

impl<T: Scalar> EigenPair<T> {
    /// `Σ_{k≥1} μ_k^s u_k²`, equal to `Λ` at an exact eigenpair.
    pub fn rayleigh_quotient(&self, s: FracPower<T>) -> T {
        let mu = self.field.basis().mu();
        self.field.coeffs().iter().zip(mu).skip(1).map(|(&c, &m)| s.pow(m) * c * c).sum()
    }
}

fn orient<T: Scalar>(coeffs: &mut [T], basis: &SpectralBasis<T>) {
    let norm = coeffs.iter().fold(T::zero(), |a, c| a.max(c.abs()));
    let tie = norm * tol_floor(1e-14, 16.0);
    let flip = if coeffs[0].abs() > tie {
        coeffs[0] < T::zero()
    } else {
        let at_zero: T = coeffs.iter().enumerate().map(|(k, &c)| c * basis.mode_unchecked(k, T::zero())).sum();
        at_zero < T::zero()
    };
    if flip {
        coeffs.iter_mut().for_each(|c| *c = -*c);
    }
}

fn diag_for<T: Scalar>(basis: &SpectralBasis<T>, s: FracPower<T>) -> Vec<T> {
    basis.mu().iter().map(|&m| s.pow(m)).collect()
}

fn make_pair<T: Scalar>(
    raw: PencilEigen<T>,
    m: &WeightMatrix<T>,
    basis: &Arc<SpectralBasis<T>>,
    sweeps: usize,
) -> EigenPair<T> {
    let mut coeffs = raw.vector;
    orient(&mut coeffs, basis);
    let mu_vec = m.matrix().mul_vec(&coeffs);
    let mass: T = coeffs.iter().zip(&mu_vec).map(|(&a, &b)| a * b).sum();
    let first = mu_vec[0].abs() * basis.length().sqrt();
    let field = SpectralField::new(basis, coeffs).expect("pencil size matches basis");
    let positive = positivity_scan(&field, POSITIVITY_GRID);
    EigenPair { lambda: raw.lambda, field, positive, constraint_residuals: ((mass - T::one()).abs(), first), sweeps }
}

/// The smallest positive `Λ` of `diag(μ_k^s) u = Λ M u`.
pub fn smallest_positive_eigen<T: Scalar>(
    m: &WeightMatrix<T>,
    basis: &Arc<SpectralBasis<T>>,
    s: FracPower<T>,
) -> Result<EigenPair<T>> {
    let reduced = ReducedPencil::new(&diag_for(basis, s), m.matrix(), JacobiOptions::default())?;
    let raw = reduced.positive(0)?;
    Ok(make_pair(raw, m, basis, reduced.sweeps))
}

/// Up to `count` smallest positive eigenpairs in increasing order of `Λ`.
pub fn positive_spectrum<T: Scalar>(
    m: &WeightMatrix<T>,
    basis: &Arc<SpectralBasis<T>>,
    s: FracPower<T>,
    count: usize,
) -> Result<Vec<EigenPair<T>>> {
    let reduced = ReducedPencil::new(&diag_for(basis, s), m.matrix(), JacobiOptions::default())?;
    let available = reduced.positive_count().min(count);
    if available == 0 && count > 0 {
        return Err(Error::NoPositiveEigenvalue);
    }
    (0..available).map(|r| Ok(make_pair(reduced.positive(r)?, m, basis, reduced.sweeps))).collect()
}

/// Builds basis and weight matrix, then solves for `Λ(s, m, (0, L))`.
pub fn principal_eigen<T: Scalar>(length: T, k_max: usize, m: &Weight<T>, s: FracPower<T>) -> Result<EigenPair<T>> {
    let basis = Arc::new(SpectralBasis::with_default_quadrature(length, k_max)?);
    let mat = assemble_m(&basis, m);
    smallest_positive_eigen(&mat, &basis, s)
}

/// Doubles `K` from `k_start` until successive eigenvalues agree to `rel_tol`.
/// Returns the pair at the larger `K` of the last comparison.
pub fn principal_eigen_converged<T: Scalar>(
    length: T,
    k_start: usize,
    m: &Weight<T>,
    s: FracPower<T>,
    rel_tol: T,
    k_limit: usize,
) -> Result<(EigenPair<T>, usize)> {
    let mut k = k_start.max(1);
    let mut prev = principal_eigen(length, k, m, s)?;
    while 2 * k <= k_limit {
        k *= 2;
        let next = principal_eigen(length, k, m, s)?;
        let change = (next.lambda - prev.lambda).abs() / prev.lambda.abs();
        prev = next;
        if change <= rel_tol {
            break;
        }
    }
    Ok((prev, k))
}

/// True iff the sign-normalized field stays above `-1e-10 ‖u‖_∞` on a
/// uniform grid (endpoints included).
pub fn positivity_scan<T: Scalar>(field: &SpectralField<T>, grid_points: usize) -> bool {
    let basis = field.basis();
    let mut coeffs = field.coeffs().to_vec();
    orient(&mut coeffs, basis);
    let oriented = field.with_coeffs(coeffs);
    let values = oriented.synthesize(&basis.uniform_grid(grid_points.max(2)));
    let sup = values.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let floor = -tol_floor::<T>(1e-10, 64.0) * sup;
    values.iter().all(|&v| v > floor || (sup == T::zero() && v == T::zero()))
}

/// `‖D u − Λ M u‖_∞` over rows `1..K`, plus `|(M u)_0|`.
pub fn rayleigh_residual<T: Scalar>(pair: &EigenPair<T>, m: &WeightMatrix<T>, s: FracPower<T>) -> T {
    let u = pair.field.coeffs();
    let mu = pair.field.basis().mu();
    let mu_vec = m.matrix().mul_vec(u);
    let rows = (1..u.len()).map(|k| (s.pow(mu[k]) * u[k] - pair.lambda * mu_vec[k]).abs()).fold(T::zero(), T::max);
    rows + mu_vec[0].abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn basis(l: f64, k: usize) -> Arc<SpectralBasis<f64>> {
        Arc::new(SpectralBasis::with_default_quadrature(l, k).unwrap())
    }

    #[test]
    fn unit_weight_gives_identity() {
        let b = basis(5.0, 16);
        let m = assemble_m(&b, &Weight::constant(1.0));
        for i in 0..17 {
            for j in 0..17 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((m.matrix()[(i, j)] - id).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn m00_is_the_weight_mean() {
        let b = basis(5.0, 16);
        let m = assemble_m(&b, &Weight::m1());
        assert!((m.mean() + 0.5).abs() < 1e-13);
    }

    #[test]
    fn analytic_entries_for_builtins() {
        let l = 5.0;
        let b = basis(l, 8);
        let a1 = assemble_m_analytic(&b, &Weight::m1());
        // ∫ φ_0 φ_1 cos(πx/L) = (1/√L)√(2/L) L/2 = 1/√2
        assert!((a1.matrix()[(0, 1)] - 0.5f64.sqrt()).abs() < 1e-15);
        // ∫ φ_1 φ_2 cos(πx/L) = (2/L)(L/4) = 1/2
        assert!((a1.matrix()[(1, 2)] - 0.5).abs() < 1e-15);
        // ∫ φ_1² cos(πx/L) = 0
        assert_eq!(a1.matrix()[(1, 1)], -0.5);
        let a2 = assemble_m_analytic(&b, &Weight::m2());
        assert_eq!(a2.matrix()[(0, 1)], 0.0);
        // ∫ φ_1² cos(2πx/L) = (2/L)(L/4) = 1/2
        assert!((a2.matrix()[(1, 1)] - 0.0).abs() < 1e-15);
        assert!((a2.matrix()[(1, 3)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn analytic_constant_weight_is_scaled_identity() {
        let b = basis(3.0, 6);
        let a = assemble_m_analytic(&b, &Weight::constant(-2.5));
        assert_eq!(a.matrix(), &DenseMatrix::from_fn(7, 7, |i, j| if i == j { -2.5 } else { 0.0 }));
    }

    #[test]
    fn unit_weight_eigenvalue_closed_form() {
        for &l in &[2.5, 5.0, 8.0] {
            let b = basis(l, 32);
            let m = assemble_m(&b, &Weight::constant(1.0));
            for &s in &[0.4, 0.5, 0.7, 1.0] {
                let s = FracPower::new(s).unwrap();
                let pair = smallest_positive_eigen(&m, &b, s).unwrap();
                let expect = (PI / l).powf(2.0 * s.value());
                assert!((pair.lambda - expect).abs() < 1e-10 * expect);
                assert!(!pair.positive);
                assert!(pair.field.coeffs()[1] > 0.9999);
                assert!(rayleigh_residual(&pair, &m, s) < 1e-14);
            }
        }
    }

    #[test]
    fn zero_mean_weight_is_rejected() {
        let b = basis(5.0, 16);
        let m = assemble_m(&b, &Weight::new(0.0, vec![(1, 1.0)]).unwrap());
        let err = smallest_positive_eigen(&m, &b, FracPower::half()).unwrap_err();
        assert!(matches!(err, Error::ZeroMeanWeight { .. }));
    }

    #[test]
    fn negative_weight_has_no_positive_eigenvalue() {
        let b = basis(5.0, 16);
        let m = assemble_m(&b, &Weight::constant(-1.0));
        assert_eq!(smallest_positive_eigen(&m, &b, FracPower::half()).unwrap_err(), Error::NoPositiveEigenvalue);
    }

    #[test]
    fn principal_m1_eigenpair_is_positive_and_consistent() {
        let b = basis(5.0, 64);
        let m = assemble_m(&b, &Weight::m1());
        let s = FracPower::half();
        let pair = smallest_positive_eigen(&m, &b, s).unwrap();
        assert!(pair.lambda > 0.0);
        assert!(pair.positive);
        assert!(pair.constraint_residuals.0 < 1e-12);
        assert!(pair.constraint_residuals.1 < 1e-12);
        assert!(rayleigh_residual(&pair, &m, s) < 1e-10);
        assert!((pair.rayleigh_quotient(s) - pair.lambda).abs() < 1e-12 * pair.lambda);
        assert!(pair.field.integral() > 0.0);
    }

    #[test]
    fn perturbed_eigenvector_has_visible_residual() {
        let b = basis(5.0, 64);
        let m = assemble_m(&b, &Weight::m1());
        let s = FracPower::half();
        let mut pair = smallest_positive_eigen(&m, &b, s).unwrap();
        pair.field.coeffs_mut()[2] += 1e-3;
        assert!(rayleigh_residual(&pair, &m, s) > 1e-5);
    }

    #[test]
    fn positivity_scan_examples() {
        let b = basis(5.0, 8);
        assert!(positivity_scan(&SpectralField::constant(&b, 1.0), 64));
        assert!(positivity_scan(&SpectralField::constant(&b, -1.0), 64));
        assert!(!positivity_scan(&SpectralField::unit(&b, 1).unwrap(), 64));
    }

    #[test]
    fn positive_mean_weight_has_no_positive_principal_eigenfunction() {
        let b = basis(5.0, 64);
        let m = assemble_m(&b, &Weight::m1().shifted(1.0));
        let pairs = positive_spectrum(&m, &b, FracPower::half(), 6).unwrap();
        assert!(!pairs.is_empty());
        assert!(pairs.windows(2).all(|p| p[0].lambda < p[1].lambda));
        assert!(pairs.iter().all(|p| !p.positive));
    }

    #[test]
    fn single_precision_closed_form() {
        let b = Arc::new(SpectralBasis::<f32>::with_default_quadrature(5.0, 16).unwrap());
        let m = assemble_m(&b, &Weight::constant(1.0f32));
        let pair = smallest_positive_eigen(&m, &b, FracPower::half()).unwrap();
        let expect = std::f32::consts::PI / 5.0;
        assert!((pair.lambda - expect).abs() < 1e-4);
    }
}
