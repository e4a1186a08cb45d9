//! Composite Gauss–Legendre quadrature on an interval.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Roots of `P_n` are found by Newton's method from the Chebyshev-like
/// initial guess, with the three-term recurrence for `P_n` and `P_n'`.
pub fn gauss_legendre<T: Scalar>(order: usize) -> (Vec<T>, Vec<T>) {
    let n = order;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let one = T::one();
    let two = lit::<T>(2.0);
    let nf = from_usize::<T>(n);
    for i in 0..n.div_ceil(2) {
        let mut x = (T::PI() * (from_usize::<T>(i) + lit(0.75)) / (nf + lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = two / ((one - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = from_usize::<T>(k);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = from_usize::<T>(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[0, length]` with equal panels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub panels: usize,
    pub order: usize,
}

impl<T: Scalar> QuadratureRule<T> {
    pub fn composite(length: T, panels: usize, order: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("quadrature interval length must be positive, got {length}")));
        }
        if panels == 0 || order == 0 {
            return Err(Error::InvalidParameter("quadrature needs at least one panel and one node".into()));
        }
        let (ref_nodes, ref_weights) = gauss_legendre::<T>(order);
        let width = length / from_usize(panels);
        let half = width / lit(2.0);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let center = width * from_usize(p) + half;
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(center + half * *x);
                weights.push(half * *w);
            }
        }
        Ok(Self { nodes, weights, panels, order })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Integrates values already sampled at the nodes.
    pub fn integrate_samples(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.weights.len());
        values.iter().zip(&self.weights).map(|(&v, &w)| v * w).sum()
    }
}
