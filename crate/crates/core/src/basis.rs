//! Neumann eigenbasis of `-d²/dx²` on `(0, L)` and the maps between
//! function samples and cosine coefficients.
//!
//! Modes are `φ_0 = 1/√L` and `φ_k(x) = √(2/L) cos(kπx/L)` with eigenvalues
//! `μ_k = (kπ/L)²`. Coefficient vectors always carry the `k = 0` slot; a
//! zero-mean field is one with `u_0 = 0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::quadrature::QuadratureRule;
use crate::scalar::{from_usize, lit, Scalar};

pub const DEFAULT_QUAD_ORDER: usize = 8;

/// Default panel count for a basis with highest mode `k_max`.
pub fn default_quad_panels(k_max: usize) -> usize {
    32.max(2 * k_max)
}

#[derive(Debug, Clone)]
pub struct SpectralBasis<T> {
    length: T,
    k_max: usize,
    mu: Vec<T>,
    norms: Vec<T>,
    quad: QuadratureRule<T>,
    // (K+1) x nodes table of φ_k(x_q)
    modes_at_nodes: DenseMatrix<T>,
}

impl<T: Scalar> SpectralBasis<T> {
    pub fn new(length: T, k_max: usize, quad_panels: usize, quad_order: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("interval length must be positive, got {length}")));
        }
        if k_max < 1 {
            return Err(Error::InvalidParameter("basis needs at least modes 0 and 1 (K >= 1)".into()));
        }
        if quad_panels < 1 || quad_order < 2 {
            return Err(Error::InvalidParameter(format!(
                "need quad_panels >= 1 and quad_order >= 2, got {quad_panels} and {quad_order}"
            )));
        }
        let quad = QuadratureRule::composite(length, quad_panels, quad_order)?;
        let pi_over_l = T::PI() / length;
        let mu = (0..=k_max)
            .map(|k| {
                let w = from_usize::<T>(k) * pi_over_l;
                w * w
            })
            .collect();
        let mut norms = vec![(lit::<T>(2.0) / length).sqrt(); k_max + 1];
        norms[0] = T::one() / length.sqrt();
        let modes_at_nodes = DenseMatrix::from_fn(k_max + 1, quad.len(), |k, q| {
            norms[k] * (from_usize::<T>(k) * pi_over_l * quad.nodes[q]).cos()
        });
        Ok(Self { length, k_max, mu, norms, quad, modes_at_nodes })
    }

    /// Basis with the default composite rule (8 nodes, `max(32, 2K)` panels).
    pub fn with_default_quadrature(length: T, k_max: usize) -> Result<Self> {
        Self::new(length, k_max, default_quad_panels(k_max), DEFAULT_QUAD_ORDER)
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Number of modes, `K + 1`.
    pub fn dim(&self) -> usize {
        self.k_max + 1
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn quadrature(&self) -> &QuadratureRule<T> {
        &self.quad
    }

    /// `φ_k` evaluated at every quadrature node.
    pub fn mode_at_nodes(&self, k: usize) -> &[T] {
        self.modes_at_nodes.row(k)
    }

    /// `φ_k(x)` with range checks on both arguments.
    pub fn eval_mode(&self, k: usize, x: T) -> Result<T> {
        if k > self.k_max {
            return Err(Error::InvalidParameter(format!("mode index {k} exceeds K = {}", self.k_max)));
        }
        let slack = self.length * T::epsilon() * lit(16.0);
        if !(x >= -slack && x <= self.length + slack) {
            return Err(Error::InvalidParameter(format!("position {x} outside [0, {}]", self.length)));
        }
        Ok(self.mode_unchecked(k, x))
    }

    #[inline]
    pub(crate) fn mode_unchecked(&self, k: usize, x: T) -> T {
        self.norms[k] * (from_usize::<T>(k) * T::PI() * x / self.length).cos()
    }

    /// `φ_k'(x)`; vanishes at both endpoints.
    pub fn eval_mode_derivative(&self, k: usize, x: T) -> Result<T> {
        self.eval_mode(k, x)?;
        let w = from_usize::<T>(k) * T::PI() / self.length;
        Ok(-self.norms[k] * w * (w * x).sin())
    }

    /// `∫ f φ_k dx` for every k, from values of `f` at the quadrature nodes.
    pub fn project_nodal(self: &Arc<Self>, values: &[T]) -> SpectralField<T> {
        assert_eq!(values.len(), self.quad.len(), "one value per quadrature node");
        let weighted: Vec<T> = values.iter().zip(&self.quad.weights).map(|(&v, &w)| v * w).collect();
        let coeffs = (0..self.dim())
            .map(|k| self.mode_at_nodes(k).iter().zip(&weighted).map(|(&p, &fw)| p * fw).sum())
            .collect();
        SpectralField { basis: Arc::clone(self), coeffs }
    }

    pub fn project<F: Fn(T) -> T>(self: &Arc<Self>, f: F) -> SpectralField<T> {
        let values: Vec<T> = self.quad.nodes.iter().map(|&x| f(x)).collect();
        self.project_nodal(&values)
    }

    /// Uniform grid of `n` points on `[0, L]`, endpoints included.
    pub fn uniform_grid(&self, n: usize) -> Vec<T> {
        assert!(n >= 2, "grid needs both endpoints");
        let h = self.length / from_usize(n - 1);
        (0..n).map(|i| if i == n - 1 { self.length } else { h * from_usize(i) }).collect()
    }

    /// Gram matrix `∫ φ_i φ_j` under the basis quadrature.
    pub fn gram(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let w = &self.quad.weights;
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: T = self
                    .mode_at_nodes(i)
                    .iter()
                    .zip(self.mode_at_nodes(j))
                    .zip(w)
                    .map(|((&a, &b), &w)| a * b * w)
                    .sum();
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

/// `u = Σ_k u_k φ_k` over a shared basis.
#[derive(Debug, Clone)]
pub struct SpectralField<T> {
    basis: Arc<SpectralBasis<T>>,
    coeffs: Vec<T>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn new(basis: &Arc<SpectralBasis<T>>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                basis.dim(),
                coeffs.len()
            )));
        }
        Ok(Self { basis: Arc::clone(basis), coeffs })
    }

    pub fn zeros(basis: &Arc<SpectralBasis<T>>) -> Self {
        Self { basis: Arc::clone(basis), coeffs: vec![T::zero(); basis.dim()] }
    }

    pub fn unit(basis: &Arc<SpectralBasis<T>>, k: usize) -> Result<Self> {
        if k > basis.k_max() {
            return Err(Error::InvalidParameter(format!("mode index {k} exceeds K = {}", basis.k_max())));
        }
        let mut f = Self::zeros(basis);
        f.coeffs[k] = T::one();
        Ok(f)
    }

    /// The constant function `c`.
    pub fn constant(basis: &Arc<SpectralBasis<T>>, c: T) -> Self {
        let mut f = Self::zeros(basis);
        f.coeffs[0] = c * basis.length().sqrt();
        f
    }

    pub fn basis(&self) -> &Arc<SpectralBasis<T>> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub(crate) fn with_coeffs(&self, coeffs: Vec<T>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        Self { basis: Arc::clone(&self.basis), coeffs }
    }

    /// Average over the interval, `u_0/√L`.
    pub fn mean(&self) -> T {
        self.coeffs[0] / self.basis.length().sqrt()
    }

    pub fn is_zero_mean(&self) -> bool {
        self.coeffs[0] == T::zero()
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if c == T::zero() { T::zero() } else { c * self.basis.mode_unchecked(k, x) })
            .sum()
    }

    pub fn synthesize(&self, xs: &[T]) -> Vec<T> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Values at the basis quadrature nodes.
    pub fn at_nodes(&self) -> Vec<T> {
        let nq = self.basis.quad.len();
        let mut out = vec![T::zero(); nq];
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == T::zero() {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(self.basis.mode_at_nodes(k)) {
                *o += c * p;
            }
        }
        out
    }

    /// `∫ u² dx = Σ u_k²` for the truncated series.
    pub fn l2_norm_squared(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum()
    }

    /// `∫ u dx`.
    pub fn integral(&self) -> T {
        self.coeffs[0] * self.basis.length().sqrt()
    }

    /// Max of |u| on a uniform grid with `n` points.
    pub fn sup_norm_on_grid(&self, n: usize) -> T {
        self.synthesize(&self.basis.uniform_grid(n)).into_iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: T) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|&c| c * factor).collect())
    }
}
