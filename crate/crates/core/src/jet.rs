//! Truncated power series in ε.

use crate::fourier_core::Coeff;
use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// a₀ + a₁ε + … + a_{N−1}ε^{N−1}, arithmetic truncated at degree N−1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsJet<const N: usize> {
    pub c: [Complex64; N],
}

impl<const N: usize> EpsJet<N> {
    pub fn constant(z: Complex64) -> Self {
        let mut c = [Complex64::new(0.0, 0.0); N];
        c[0] = z;
        EpsJet { c }
    }

    /// The jet of ε itself.
    pub fn variable() -> Self {
        let mut c = [Complex64::new(0.0, 0.0); N];
        if N > 1 {
            c[1] = Complex64::new(1.0, 0.0);
        }
        EpsJet { c }
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.c[j]
    }

    /// Evaluates the polynomial at a numeric ε.
    pub fn eval(&self, eps: Complex64) -> Complex64 {
        self.c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * eps + a)
    }
}

impl<const N: usize> Add for EpsJet<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            self.c[i] += rhs.c[i];
        }
        self
    }
}

impl<const N: usize> AddAssign for EpsJet<N> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..N {
            self.c[i] += rhs.c[i];
        }
    }
}

impl<const N: usize> Sub for EpsJet<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            self.c[i] -= rhs.c[i];
        }
        self
    }
}

impl<const N: usize> Neg for EpsJet<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl<const N: usize> Mul for EpsJet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [Complex64::new(0.0, 0.0); N];
        for i in 0..N {
            if self.c[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        EpsJet { c }
    }
}

impl<const N: usize> Coeff for EpsJet<N> {
    fn zero() -> Self {
        EpsJet { c: [Complex64::new(0.0, 0.0); N] }
    }

    fn from_c64(z: Complex64) -> Self {
        Self::constant(z)
    }

    fn recip(self) -> Self {
        let a0 = self.c[0];
        let inv0 = a0.inv();
        let mut b = [Complex64::new(0.0, 0.0); N];
        b[0] = inv0;
        for n in 1..N {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 1..=n {
                s += self.c[j] * b[n - j];
            }
            b[n] = -s * inv0;
        }
        EpsJet { c: b }
    }

    fn scale(mut self, z: Complex64) -> Self {
        for v in self.c.iter_mut() {
            *v *= z;
        }
        self
    }

    fn magnitude(&self) -> f64 {
        self.c.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn is_exact_zero(&self) -> bool {
        self.c.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type J = EpsJet<6>;

    #[test]
    fn geometric_reciprocal() {
        // 1/(1 − ε) = Σ εⁿ
        let one_minus = J::constant(Complex64::new(1.0, 0.0)) - J::variable();
        let r = one_minus.recip();
        for n in 0..6 {
            assert!((r.coeff(n) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn product_with_reciprocal_is_one() {
        let mut a = J::zero();
        for (i, v) in [2.0, -1.0, 0.5, 3.0, 0.0, -2.0].iter().enumerate() {
            a.c[i] = Complex64::new(*v, 0.3 * i as f64);
        }
        let p = a * a.recip();
        assert!((p.coeff(0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        for n in 1..6 {
            assert!(p.coeff(n).norm() < 1e-13);
        }
    }
}
