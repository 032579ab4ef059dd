//! Padé approximants with a generic scalar so the linear solve can run in
//! double or double-double precision.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_traits::Zero;
use serde::Serialize;
use std::ops::{Add, Div, Mul, Neg, Sub};
use twofloat::TwoFloat;

pub trait PadeScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn modulus(self) -> f64;
}

impl PadeScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

pub type ComplexDD = Complex<TwoFloat>;

fn tf(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}

impl PadeScalar for ComplexDD {
    fn zero() -> Self {
        Complex::new(TwoFloat::zero(), TwoFloat::zero())
    }
    fn from_c64(z: Complex64) -> Self {
        Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(tf(self.re), tf(self.im))
    }
    fn modulus(self) -> f64 {
        tf(self.norm_sqr()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Double,
    Extended,
}

/// P(s)/Q(s) with Q(0) = 1.
#[derive(Debug, Clone, Serialize)]
pub struct Rational {
    pub p: Vec<Complex64>,
    pub q: Vec<Complex64>,
}

fn horner(c: &[Complex64], s: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * s + a)
}

fn trim(mut c: Vec<Complex64>) -> Vec<Complex64> {
    let scale = c.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    while c.len() > 1 && c.last().is_some_and(|z| z.norm() <= 1e-15 * scale) {
        c.pop();
    }
    c
}

/// Divides by (s − p); the remainder is discarded.
fn deflate_root(c: &[Complex64], p: Complex64) -> Vec<Complex64> {
    let n = c.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut carry = Complex64::new(0.0, 0.0);
    for i in (0..n).rev() {
        carry = c[i + 1] + carry * p;
        out[i] = carry;
    }
    out
}

impl Rational {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        horner(&self.p, s) / horner(&self.q, s)
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.p.len() - 1, self.q.len() - 1)
    }

    /// First n Taylor coefficients at s = 0.
    pub fn taylor(&self, n: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = self.p.get(k).copied().unwrap_or_default();
            for j in 1..=k.min(self.q.len() - 1) {
                v -= self.q[j] * out[k - j];
            }
            out.push(v / self.q[0]);
        }
        out
    }

    /// Roots of the denominator.
    pub fn poles(&self) -> Vec<Complex64> {
        let q = trim(self.q.clone());
        let m = q.len() - 1;
        if m == 0 {
            return vec![];
        }
        if m == 1 {
            return vec![-q[0] / q[1]];
        }
        let lead = q[m];
        let mut comp = DMatrix::<Complex64>::zeros(m, m);
        for i in 1..m {
            comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..m {
            comp[(i, m - 1)] = -q[i] / lead;
        }
        // complex Schur forms are triangular, so the diagonal holds the eigenvalues
        nalgebra::Schur::try_new(comp, f64::EPSILON, 10_000)
            .and_then(|s| s.eigenvalues())
            .map(|ev| ev.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn residue(&self, pole: Complex64) -> Complex64 {
        let dq: Vec<Complex64> = self.q.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
        horner(&self.p, pole) / horner(&dq, pole)
    }

    /// Removes the simple pole at `pole` together with its principal part.
    pub fn deflate(&self, pole: Complex64) -> Rational {
        let r = self.residue(pole);
        let q_red = deflate_root(&trim(self.q.clone()), pole);
        let mut num = self.p.clone();
        if num.len() < q_red.len() {
            num.resize(q_red.len(), Complex64::new(0.0, 0.0));
        }
        for (i, c) in q_red.iter().enumerate() {
            num[i] -= r * c;
        }
        let p_red = if num.len() > 1 { deflate_root(&num, pole) } else { vec![Complex64::new(0.0, 0.0)] };
        let norm = q_red[0];
        Rational { p: p_red.iter().map(|c| c / norm).collect(), q: q_red.iter().map(|c| c / norm).collect() }
    }
}

/// Relative Taylor mismatch above which an approximant is rejected.
pub const REEXPANSION_TOL: f64 = 1e-10;

/// [L/M] Padé approximant of the series with the given Taylor coefficients.
pub fn pade_with<T: PadeScalar>(coeffs: &[Complex64], l: usize, m: usize) -> Result<Rational> {
    if l + m + 1 > coeffs.len() {
        return Err(Error::precondition(format!("[{l}/{m}] needs {} coefficients, got {}", l + m + 1, coeffs.len())));
    }
    let a = |i: isize| -> T { if i < 0 { T::zero() } else { T::from_c64(coeffs[i as usize]) } };
    let mut mat: Vec<Vec<T>> = (0..m)
        .map(|i| (0..m).map(|j| a(l as isize + i as isize - j as isize)).collect())
        .collect();
    let mut rhs: Vec<T> = (0..m).map(|i| -a((l + 1 + i) as isize)).collect();
    let scale = mat.iter().flatten().fold(0.0f64, |acc, z| acc.max(z.modulus()));
    let threshold = 1e-13 * scale;
    for col in 0..m {
        let (piv, mag) = (col..m)
            .map(|r| (r, mat[r][col].modulus()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag < threshold || mag == 0.0 {
            return Err(Error::PadeDegenerate { l, m, pivot: mag, threshold });
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..m {
            let f = mat[r][col] / mat[col][col];
            for c in col..m {
                let v = mat[col][c];
                mat[r][c] = mat[r][c] - f * v;
            }
            let v = rhs[col];
            rhs[r] = rhs[r] - f * v;
        }
    }
    let mut q = vec![T::zero(); m];
    for r in (0..m).rev() {
        let mut acc = rhs[r];
        for c in r + 1..m {
            acc = acc - mat[r][c] * q[c];
        }
        q[r] = acc / mat[r][r];
    }
    let one = T::from_c64(Complex64::new(1.0, 0.0));
    let qf: Vec<T> = std::iter::once(one).chain(q).collect();
    let p: Vec<Complex64> = (0..=l)
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..=i.min(m) {
                acc = acc + qf[j] * a((i - j) as isize);
            }
            acc.to_c64()
        })
        .collect();
    let rat = Rational { p, q: qf.iter().map(|z| z.to_c64()).collect() };
    // the stored coefficients are doubles; near-degenerate systems lose the match on re-expansion
    let size = coeffs[..=l + m].iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    let miss = rat.taylor(l + m + 1).iter().zip(coeffs).fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()));
    if miss > REEXPANSION_TOL * size {
        return Err(Error::PadeDegenerate { l, m, pivot: miss / size, threshold: REEXPANSION_TOL });
    }
    Ok(rat)
}

pub fn pade(coeffs: &[Complex64], l: usize, m: usize, precision: Precision) -> Result<Rational> {
    match precision {
        Precision::Double => pade_with::<Complex64>(coeffs, l, m),
        Precision::Extended => pade_with::<ComplexDD>(coeffs, l, m),
    }
}

/// Tries [L/M] with L + M fixed, lowering M on degeneracy down to a Taylor polynomial.
pub fn pade_fallback(coeffs: &[Complex64], l: usize, m: usize, precision: Precision) -> Result<Rational> {
    let total = l + m;
    let mut mm = m;
    loop {
        match pade(coeffs, total - mm, mm, precision) {
            Err(Error::PadeDegenerate { .. }) if mm > 0 => mm -= 1,
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn geometric_recovered() {
        let coeffs: Vec<Complex64> = (0..2).map(|k| c((-1f64).powi(k))).collect();
        let r = pade(&coeffs, 0, 1, Precision::Double).unwrap();
        assert!((r.q[1] - c(1.0)).norm() < 1e-15);
        assert!((r.eval(c(0.7)) - c(1.0 / 1.7)).norm() < 1e-15);
    }

    #[test]
    fn rational_fixed_point() {
        let r0 = Rational { p: vec![c(1.0), c(2.0)], q: vec![c(1.0), c(1.0), c(1.0)] };
        let t = r0.taylor(4);
        for prec in [Precision::Double, Precision::Extended] {
            let r = pade(&t, 1, 2, prec).unwrap();
            for (a, b) in r.p.iter().zip(&r0.p).chain(r.q.iter().zip(&r0.q)) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_system_reported() {
        let coeffs: Vec<Complex64> = (0..7).map(|k| c((-1f64).powi(k))).collect();
        assert!(matches!(pade(&coeffs, 3, 3, Precision::Double), Err(Error::PadeDegenerate { .. })));
        let r = pade_fallback(&coeffs, 3, 3, Precision::Double).unwrap();
        assert_eq!(r.degrees().1, 1);
    }

    #[test]
    fn deflation_removes_pole() {
        // 1/(1−s) + 1/(2+s) with the first pole deflated leaves 1/(2+s)
        let r = Rational { p: vec![c(3.0), c(0.0)], q: vec![c(2.0), c(-1.0), c(-1.0)] };
        let d = r.deflate(c(1.0));
        assert!((d.eval(c(0.3)) - c(1.0 / 2.3)).norm() < 1e-14);
        assert!((r.residue(c(1.0)) - c(-1.0)).norm() < 1e-14);
    }
}
