use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Coefficient field for series arithmetic.
///
/// Implemented for `Complex64` and for truncated power series in ε, so the
/// same recursion code runs on numbers and on ε-jets.
pub trait Coeff:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + 'static
{
    fn zero() -> Self;
    fn from_c64(z: Complex64) -> Self;
    /// Multiplicative inverse; callers guarantee invertibility.
    fn recip(self) -> Self;
    fn scale(self, z: Complex64) -> Self;
    /// Size used for pruning and norms.
    fn magnitude(&self) -> f64;
    fn is_exact_zero(&self) -> bool;

    fn from_re(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn recip(self) -> Self {
        self.inv()
    }
    fn scale(self, z: Complex64) -> Self {
        self * z
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_exact_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}
