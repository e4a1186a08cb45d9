//! Small dense and banded linear algebra used by the solvers.
//!
//! Everything here is written against [`Scalar`] so the same code runs in
//! `f32` and `f64`.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{lit, tol_floor, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mat-vec");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mat-mat");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `Qᵀ A Q`.
    pub fn congruence(&self, q: &Self) -> Self {
        q.transpose().mul(&self.mul(q))
    }

    /// Replaces the matrix by `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        let half = lit::<T>(0.5);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = half * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn off_diagonal_frobenius(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc.sqrt()
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JacobiOptions<T> {
    /// Stop once the off-diagonal Frobenius norm drops below this.
    pub tol: T,
    pub max_sweeps: usize,
}

impl<T: Scalar> Default for JacobiOptions<T> {
    fn default() -> Self {
        Self { tol: tol_floor(1e-13, 16.0), max_sweeps: 100 }
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: DenseMatrix<T>,
    pub sweeps: usize,
    pub off_norm: T,
}

/// Cyclic Jacobi rotation method for a dense symmetric matrix.
///
/// Rotations follow the Rutishauser formulation; entries that are already
/// negligible against both diagonal elements are zeroed instead of rotated.
pub fn jacobi_eigen<T: Scalar>(a: &DenseMatrix<T>, opts: JacobiOptions<T>) -> SymmetricEigen<T> {
    assert!(a.is_square(), "Jacobi needs a square matrix");
    let n = a.rows();
    let mut a = a.clone();
    a.symmetrize();
    let mut v = DenseMatrix::identity(n);
    let mut sweeps = 0;
    let mut off = a.off_diagonal_frobenius();
    let hundred = lit::<T>(100.0);

    while off >= opts.tol && sweeps < opts.max_sweeps {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let g = hundred * apq.abs();
                if sweeps > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = lit::<T>(0.5) * h / apq;
                    let t = T::one() / (theta.abs() + (T::one() + theta * theta).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let tau = s / (T::one() + c);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_rp = arp - s * (arq + tau * arp);
                    let new_rq = arq + s * (arp - tau * arq);
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        off = a.off_diagonal_frobenius();
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymmetricEigen { values, vectors, sweeps, off_norm: off }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        assert!(a.is_square());
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(T::min_positive_value());
        let tiny = scale * T::epsilon() * lit(4.0);
        for k in 0..n {
            let (piv, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > tiny) {
                return Err(Error::SingularSystem);
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f == T::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }
}

pub fn solve_dense<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    Ok(Lu::factor(a)?.solve(b))
}

/// Symmetric positive definite band matrix stored by lower diagonals,
/// factored in place as `L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandedCholesky<T> {
    n: usize,
    bw: usize,
    // band[i * (bw + 1) + d] holds L[i, i - d]
    band: Vec<T>,
}

impl<T: Scalar> BandedCholesky<T> {
    /// `entry(i, j)` is queried for `j <= i`, `i - j <= bandwidth`.
    pub fn factor<F: Fn(usize, usize) -> T>(n: usize, bandwidth: usize, entry: F) -> Result<Self> {
        let w = bandwidth + 1;
        let mut band = vec![T::zero(); n * w];
        for i in 0..n {
            for d in 0..=bandwidth.min(i) {
                band[i * w + d] = entry(i, i - d);
            }
        }
        for i in 0..n {
            let jlo = i.saturating_sub(bandwidth);
            for j in jlo..=i {
                // L[i,j] = (A[i,j] - sum_k L[i,k] L[j,k]) / L[j,j]
                let klo = jlo.max(j.saturating_sub(bandwidth));
                let mut acc = band[i * w + (i - j)];
                for k in klo..j {
                    acc -= band[i * w + (i - k)] * band[j * w + (j - k)];
                }
                if i == j {
                    if !(acc > T::zero()) {
                        return Err(Error::SingularSystem);
                    }
                    band[i * w] = acc.sqrt();
                } else {
                    band[i * w + (i - j)] = acc / band[j * w];
                }
            }
        }
        Ok(Self { n, bw: bandwidth, band })
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut acc = b[i];
            for k in i.saturating_sub(self.bw)..i {
                acc -= self.band[i * w + (i - k)] * b[k];
            }
            b[i] = acc / self.band[i * w];
        }
        for i in (0..self.n).rev() {
            let mut acc = b[i];
            for k in (i + 1)..self.n.min(i + self.bw + 1) {
                acc -= self.band[k * w + (k - i)] * b[k];
            }
            b[i] = acc / self.band[i * w];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut a = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        a.symmetrize();
        a
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let a = random_symmetric(12, 7);
        let eig = jacobi_eigen(&a, JacobiOptions::default());
        assert!(eig.off_norm < 1e-13);
        let q = &eig.vectors;
        let qtq = q.transpose().mul(q);
        let lam = DenseMatrix::from_diagonal(&eig.values);
        let back = q.mul(&lam).mul(&q.transpose());
        for i in 0..12 {
            for j in 0..12 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - id).abs() < 1e-13);
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-13);
            }
        }
        assert!(eig.values.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn jacobi_on_known_spectrum() {
        // tridiag(-1, 2, -1) of size n has eigenvalues 2 - 2 cos(k pi / (n + 1))
        let n = 9;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let eig = jacobi_eigen(&a, JacobiOptions::default());
        for (k, &v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
        }
    }

    #[test]
    fn jacobi_diagonal_input_needs_no_sweeps() {
        let a = DenseMatrix::from_diagonal(&[3.0, -1.0, 2.0]);
        let eig = jacobi_eigen(&a, JacobiOptions::default());
        assert_eq!(eig.sweeps, 0);
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn lu_solves_random_system() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let n = 15;
        let a = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 4.0).collect();
        let b = a.mul_vec(&x);
        let got = solve_dense(&a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-10);
        }
    }

    #[test]
    fn lu_reports_singular() {
        let a = DenseMatrix::from_fn(3, 3, |i, _| i as f64);
        assert_eq!(Lu::factor(&a).unwrap_err(), Error::SingularSystem);
    }

    #[test]
    fn banded_cholesky_matches_dense_solve() {
        // 2D five-point Laplacian plus identity, bandwidth = row length
        let nx = 6;
        let ny = 5;
        let n = nx * ny;
        let entry = |i: usize, j: usize| -> f64 {
            if i == j {
                5.0
            } else if (i - j == 1 && !i.is_multiple_of(nx)) || i - j == nx {
                -1.0
            } else {
                0.0
            }
        };
        let chol = BandedCholesky::factor(n, nx, entry).unwrap();
        let dense = DenseMatrix::from_fn(n, n, |i, j| if j <= i { entry(i, j) } else { entry(j, i) });
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        chol.solve_in_place(&mut x);
        let expect = solve_dense(&dense, &b).unwrap();
        for (g, e) in x.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_cholesky_rejects_indefinite() {
        let err = BandedCholesky::factor(2, 1, |i, j| if i == j { 1.0 } else { 3.0 }).unwrap_err();
        assert_eq!(err, Error::SingularSystem);
    }
}
