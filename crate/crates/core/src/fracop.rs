//! Spectral fractional powers of the Neumann Laplacian in coefficient space
//! and the harmonic extension of a trace to the half-cylinder `(0,L)×(0,∞)`.

use crate::basis::SpectralField;
use crate::error::{Error, Result};
use crate::scalar::{lit, tol_floor, Scalar};

/// Exponent `s ∈ (0, 1]` of the fractional operator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracPower<T>(T);

impl<T: Scalar> FracPower<T> {
    pub fn new(s: T) -> Result<Self> {
        if s > T::zero() && s <= T::one() {
            Ok(Self(s))
        } else {
            Err(Error::InvalidParameter(format!("fractional power must lie in (0, 1], got {s}")))
        }
    }

    pub fn half() -> Self {
        Self(lit(0.5))
    }

    pub fn one() -> Self {
        Self(T::one())
    }

    pub fn value(self) -> T {
        self.0
    }

    /// `μ^s`, with `0^s = 0`.
    #[inline]
    pub fn pow(self, mu: T) -> T {
        if mu == T::zero() {
            T::zero()
        } else if self.0 == lit(0.5) {
            mu.sqrt()
        } else if self.0 == T::one() {
            mu
        } else {
            mu.powf(self.0)
        }
    }
}

/// `L_s u`: multiplies mode `k` by `μ_k^s` and kills the constant mode.
pub fn apply_ls<T: Scalar>(u: &SpectralField<T>, s: FracPower<T>) -> SpectralField<T> {
    let mu = u.basis().mu();
    let coeffs = u
        .coeffs()
        .iter()
        .zip(mu)
        .enumerate()
        .map(|(k, (&c, &m))| if k == 0 { T::zero() } else { s.pow(m) * c })
        .collect();
    u.with_coeffs(coeffs)
}

/// `T_s f`, the inverse of `L_s` on zero-mean fields.
///
/// The input must satisfy `|f_0| <= 1e-12 * max(1, ‖f‖)`; anything larger is
/// a genuine solvability violation and is rejected.
pub fn apply_ts<T: Scalar>(f: &SpectralField<T>, s: FracPower<T>) -> Result<SpectralField<T>> {
    let norm = f.l2_norm_squared().sqrt();
    let tol = tol_floor::<T>(1e-12, 8.0) * norm.max(T::one());
    let f0 = f.coeffs()[0];
    if f0.abs() > tol {
        return Err(Error::ZeroMeanViolation { mean: f.mean().to_f64().unwrap_or(f64::NAN) });
    }
    let mu = f.basis().mu();
    let coeffs = f
        .coeffs()
        .iter()
        .zip(mu)
        .enumerate()
        .map(|(k, (&c, &m))| if k == 0 { T::zero() } else { c / s.pow(m) })
        .collect();
    Ok(f.with_coeffs(coeffs))
}

/// Harmonic extension of a trace `u` for `s = 1/2`:
/// `v(x, y) = u_0 φ_0 + Σ_{k≥1} u_k φ_k(x) e^{-√μ_k y}`.
#[derive(Debug, Clone)]
pub struct ExtensionField<T> {
    trace: SpectralField<T>,
}

impl<T: Scalar> ExtensionField<T> {
    pub fn new(trace: SpectralField<T>) -> Self {
        Self { trace }
    }

    pub fn trace(&self) -> &SpectralField<T> {
        &self.trace
    }

    pub fn eval(&self, x: T, y: T) -> Result<T> {
        extend_eval(&self.trace, x, y)
    }

    /// `-∂_y v(x, 0)`, which equals `L_{1/2} u` evaluated at `x`.
    pub fn normal_flux(&self, x: T) -> T {
        apply_ls(&self.trace, FracPower::half()).eval(x)
    }

    pub fn energy_profile(&self, y: T) -> T {
        energy_profile(&self.trace, y)
    }
}

pub fn extend_eval<T: Scalar>(u: &SpectralField<T>, x: T, y: T) -> Result<T> {
    if !(y >= T::zero()) {
        return Err(Error::InvalidParameter(format!("extension height must be non-negative, got {y}")));
    }
    let basis = u.basis();
    let mut acc = T::zero();
    for (k, (&c, &mu)) in u.coeffs().iter().zip(basis.mu()).enumerate() {
        if c == T::zero() {
            continue;
        }
        let phi = basis.eval_mode(k, x)?;
        acc += c * phi * (-mu.sqrt() * y).exp();
    }
    Ok(acc)
}

/// `∫_Ω |∇v(x, y)|² dx = Σ_{k≥1} 2 μ_k u_k² e^{-2√μ_k y}`.
pub fn energy_profile<T: Scalar>(u: &SpectralField<T>, y: T) -> T {
    let two = lit::<T>(2.0);
    u.coeffs().iter().zip(u.basis().mu()).skip(1).map(|(&c, &mu)| two * mu * c * c * (-two * mu.sqrt() * y).exp()).sum()
}

/// `∫_0^∞ energy_profile(u, y) dy = Σ_{k≥1} √μ_k u_k²`.
pub fn total_extension_energy<T: Scalar>(u: &SpectralField<T>) -> T {
    u.coeffs().iter().zip(u.basis().mu()).skip(1).map(|(&c, &mu)| mu.sqrt() * c * c).sum()
}
