//! Cosine-series habitat weights `m(x) = c + Σ_j a_j cos(jπx/L)`.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Weight<T> {
    offset: T,
    harmonics: Vec<(usize, T)>,
}

impl<T: Scalar> Weight<T> {
    /// Harmonic indices must be positive; repeated indices are summed.
    pub fn new(offset: T, harmonics: Vec<(usize, T)>) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidParameter(format!("weight offset must be finite, got {offset}")));
        }
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(harmonics.len());
        for (j, a) in harmonics {
            if j == 0 {
                return Err(Error::InvalidParameter(
                    "harmonic index must be positive; use the offset for constants".into(),
                ));
            }
            if !a.is_finite() {
                return Err(Error::InvalidParameter(format!("amplitude of harmonic {j} is not finite")));
            }
            match merged.iter_mut().find(|(i, _)| *i == j) {
                Some(entry) => entry.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.sort_by_key(|&(j, _)| j);
        Ok(Self { offset, harmonics: merged })
    }

    pub fn constant(c: T) -> Self {
        Self { offset: c, harmonics: Vec::new() }
    }

    /// `cos(πx/L) - 1/2`.
    pub fn m1() -> Self {
        Self { offset: lit(-0.5), harmonics: vec![(1, T::one())] }
    }

    /// `cos(2πx/L) - 1/2`.
    pub fn m2() -> Self {
        Self { offset: lit(-0.5), harmonics: vec![(2, T::one())] }
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn harmonics(&self) -> &[(usize, T)] {
        &self.harmonics
    }

    pub fn max_harmonic(&self) -> usize {
        self.harmonics.iter().map(|&(j, _)| j).max().unwrap_or(0)
    }

    /// Average over the interval; every harmonic integrates to zero.
    pub fn mean(&self) -> T {
        self.offset
    }

    pub fn is_constant(&self) -> bool {
        self.harmonics.iter().all(|&(_, a)| a == T::zero())
    }

    /// `m + delta`.
    pub fn shifted(&self, delta: T) -> Self {
        Self { offset: self.offset + delta, harmonics: self.harmonics.clone() }
    }

    /// `factor * m`.
    pub fn scaled(&self, factor: T) -> Self {
        Self { offset: self.offset * factor, harmonics: self.harmonics.iter().map(|&(j, a)| (j, a * factor)).collect() }
    }

    pub fn eval(&self, x: T, length: T) -> T {
        let theta = T::PI() * x / length;
        self.offset + self.harmonics.iter().map(|&(j, a)| a * (from_usize::<T>(j) * theta).cos()).sum::<T>()
    }

    fn derivatives(&self, x: T, length: T) -> (T, T) {
        let w = T::PI() / length;
        let mut d1 = T::zero();
        let mut d2 = T::zero();
        for &(j, a) in &self.harmonics {
            let kw = from_usize::<T>(j) * w;
            d1 -= a * kw * (kw * x).sin();
            d2 -= a * kw * kw * (kw * x).cos();
        }
        (d1, d2)
    }

    /// `max_{[0,L]} m`: dense sampling followed by Newton polishing of the
    /// best sample on `m' = 0`.
    pub fn max_value(&self, length: T) -> T {
        if self.is_constant() {
            return self.offset;
        }
        let n = 64 * self.max_harmonic().max(1) + 1;
        let h = length / from_usize(n - 1);
        let (mut best_x, mut best) = (T::zero(), self.eval(T::zero(), length));
        for i in 1..n {
            let x = h * from_usize(i);
            let v = self.eval(x, length);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let mut x = best_x;
        for _ in 0..30 {
            let (d1, d2) = self.derivatives(x, length);
            if d2 >= T::zero() {
                break;
            }
            let next = (x - d1 / d2).max(best_x - h).min(best_x + h).max(T::zero()).min(length);
            if (next - x).abs() <= T::epsilon() * length {
                x = next;
                break;
            }
            x = next;
        }
        best.max(self.eval(x, length))
    }

    /// `sup_Ω m⁺`.
    pub fn sup_positive_part(&self, length: T) -> T {
        self.max_value(length).max(T::zero())
    }

    pub fn is_somewhere_positive(&self, length: T) -> bool {
        self.max_value(length) > T::zero()
    }
}
