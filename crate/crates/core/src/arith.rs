//! Scalar backends shared by the recurrence machinery.
//!
//! Recurrences here are rational in their inputs, so every routine that only
//! adds, multiplies and divides is written once over [`Scalar`] and runs in
//! double precision, complex double precision (complex exponents) or exact
//! rationals.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Relative threshold below which a floating quantity counts as zero.
pub const FLOAT_NEGLIGIBLE: f64 = 1e-12;

pub trait Scalar: Clone + Debug + PartialEq + Num + std::ops::Neg<Output = Self> + Send + Sync {
    /// Exact for rationals: every finite double is a dyadic rational.
    fn from_f64(x: f64) -> Self;

    fn from_i64(x: i64) -> Self;

    fn magnitude(&self) -> f64;

    fn to_c64(&self) -> Complex64;

    fn is_finite_value(&self) -> bool;

    /// Zero test relative to `scale`; exact for rationals.
    fn is_negligible(&self, scale: f64) -> bool;

    fn describe(&self) -> String;

    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
    fn is_negligible(&self, scale: f64) -> bool {
        self.abs() <= FLOAT_NEGLIGIBLE * scale.max(f64::MIN_POSITIVE)
    }
    fn describe(&self) -> String {
        format!("{self}")
    }
    fn powi(&self, k: u32) -> Self {
        f64::powi(*self, k as i32)
    }
}

impl Scalar for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_i64(x: i64) -> Self {
        Complex64::new(x as f64, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn is_negligible(&self, scale: f64) -> bool {
        self.norm() <= FLOAT_NEGLIGIBLE * scale.max(f64::MIN_POSITIVE)
    }
    fn describe(&self) -> String {
        format!("{}{:+}i", self.re, self.im)
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite input")
    }
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
    fn is_finite_value(&self) -> bool {
        true
    }
    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn describe(&self) -> String {
        format!("{self}")
    }
}

/// Converts a rational to a double without overflowing when numerator and
/// denominator are individually huge.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // keep ~64 significant bits of the quotient, then rescale
    let shift = 64 - (r.numer().bits() as i64 - r.denom().bits() as i64);
    let q = if shift >= 0 {
        (r.numer() << shift as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-shift) as usize)
    };
    let mantissa = q.to_f64().unwrap_or(f64::NAN);
    let exp = (-shift).clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    // split the power so intermediate factors stay representable
    mantissa * 2f64.powi(exp / 2) * 2f64.powi(exp - exp / 2)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `p/q`, an integer, or a finite decimal literal exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = text.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    let x: f64 = text.parse().ok()?;
    if !x.is_finite() {
        return None;
    }
    BigRational::from_float(x)
}

/// Integer conversion for exact-arithmetic callers that know the value is whole.
pub fn rational_to_i64(r: &BigRational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}
