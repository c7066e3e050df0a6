//! Coefficient scalars: exact rationals or double-precision floats.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{Debug, Display};
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::algebra::WeilAlgebra;
use crate::error::{Error, Result};
use crate::expr::Primitive;

pub type Rational = num_rational::BigRational;

/// Default absolute tolerance for float comparisons, scaled by `max(1, |value|)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

pub fn rational(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * rational(k))
}

/// The scalar field of an element. Implemented for [`Rational`] and `f64`.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    const MODE: Mode;

    fn from_rational(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn cmp_rational(&self, q: &Rational) -> Option<Ordering>;

    /// Division; errors on a zero divisor.
    fn checked_div(&self, rhs: &Self) -> Result<Self>;

    /// `[p(x), p'(x), …, p^(count-1)(x)]` for a primitive `p`.
    fn primitive_derivatives(p: Primitive, x: &Self, count: usize) -> Result<Vec<Self>>;

    /// Equality up to `tol · max(1, |self|, |other|)`; exact for rationals.
    fn close_to(&self, other: &Self, tol: f64) -> bool;

    /// Structure constants of `alg` in this scalar type.
    fn structure(alg: &WeilAlgebra) -> &[Vec<(usize, Self)>];

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&rational(n))
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }

    /// `self += a * b`
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self = self.clone() + a.mul_ref(b);
    }

    /// `self += a`
    fn add_ref(&mut self, a: &Self) {
        *self = self.clone() + a.clone();
    }

    /// Product of coordinate vectors under the structure constants `table`.
    fn structure_mul(a: &[Self], b: &[Self], table: &[Vec<(usize, Self)>]) -> Vec<Self> {
        generic_structure_mul(a, b, table)
    }
}

pub(crate) fn generic_structure_mul<S: Scalar>(a: &[S], b: &[S], table: &[Vec<(usize, S)>]) -> Vec<S> {
    let d = a.len();
    let mut out = alloc::vec![S::zero(); d];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let xy = x.mul_ref(y);
            for (k, c) in &table[i * d + j] {
                if c.is_one() {
                    out[*k].add_ref(&xy);
                } else {
                    out[*k].add_mul(&xy, c);
                }
            }
        }
    }
    out
}

fn small_parts(q: &Rational) -> Option<(i128, i128)> {
    Some((q.numer().to_i64()? as i128, q.denom().to_i64()? as i128))
}

fn reduced(n: i128, d: i128) -> Rational {
    if n == 0 {
        return Rational::zero();
    }
    let g = gcd_i128(n, d);
    Rational::new_raw(BigInt::from(n / g), BigInt::from(d / g))
}

// i128 arithmetic for operands whose parts fit in i64; `None` means fall back
fn small_mul(a: &Rational, b: &Rational) -> Option<Rational> {
    let (an, ad) = small_parts(a)?;
    let (bn, bd) = small_parts(b)?;
    Some(reduced(an.checked_mul(bn)?, ad.checked_mul(bd)?))
}

fn small_add(a: &Rational, b: &Rational) -> Option<Rational> {
    let (an, ad) = small_parts(a)?;
    let (bn, bd) = small_parts(b)?;
    if ad == bd {
        return Some(reduced(an.checked_add(bn)?, ad));
    }
    let n = an.checked_mul(bd)?.checked_add(bn.checked_mul(ad)?)?;
    Some(reduced(n, ad.checked_mul(bd)?))
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// integer numerators over a common denominator, if everything fits in i64
fn small_common(v: &[Rational]) -> Option<(Vec<i64>, i128)> {
    let mut den: i128 = 1;
    for q in v {
        if q.is_zero() {
            continue;
        }
        let d = q.denom().to_i64()? as i128;
        den = den.checked_mul(d / gcd_i128(den, d))?;
        if den > i64::MAX as i128 {
            return None;
        }
    }
    let nums = v
        .iter()
        .map(|q| {
            if q.is_zero() {
                return Some(0);
            }
            let n = q.numer().to_i64()? as i128;
            let d = q.denom().to_i64()? as i128;
            i64::try_from(n.checked_mul(den / d)?).ok()
        })
        .collect::<Option<Vec<i64>>>()?;
    Some((nums, den))
}

fn small_structure_mul(a: &[Rational], b: &[Rational], table: &[Vec<(usize, Rational)>]) -> Option<Vec<Rational>> {
    let (an, ad) = small_common(a)?;
    let (bn, bd) = small_common(b)?;
    let d = a.len();
    let mut acc = alloc::vec![0i128; d];
    for (i, &x) in an.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in bn.iter().enumerate() {
            if y == 0 {
                continue;
            }
            let xy = x as i128 * y as i128;
            for (k, c) in &table[i * d + j] {
                let term = if c.is_one() {
                    xy
                } else if c.is_integer() {
                    xy.checked_mul(c.numer().to_i64()? as i128)?
                } else {
                    return None;
                };
                acc[*k] = acc[*k].checked_add(term)?;
            }
        }
    }
    let den = ad.checked_mul(bd)?;
    Some(
        acc.into_iter()
            .map(|n| {
                if n == 0 {
                    return Rational::zero();
                }
                let g = gcd_i128(n, den);
                Rational::new_raw(BigInt::from(n / g), BigInt::from(den / g))
            })
            .collect(),
    )
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn cmp_rational(&self, q: &Rational) -> Option<Ordering> {
        Some(self.cmp(q))
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if Zero::is_zero(rhs) {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self / rhs)
    }
    fn primitive_derivatives(p: Primitive, _x: &Self, _count: usize) -> Result<Vec<Self>> {
        Err(Error::ModeMismatch(p.name().into()))
    }
    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn structure(alg: &WeilAlgebra) -> &[Vec<(usize, Self)>] {
        alg.structure_exact()
    }
    fn mul_ref(&self, other: &Self) -> Self {
        small_mul(self, other).unwrap_or_else(|| self * other)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        if let Some(ab) = small_mul(a, b) {
            self.add_ref(&ab);
        } else {
            *self += a * b;
        }
    }
    fn add_ref(&mut self, a: &Self) {
        if let Some(sum) = small_add(self, a) {
            *self = sum;
        } else {
            *self += a;
        }
    }
    fn structure_mul(a: &[Self], b: &[Self], table: &[Vec<(usize, Self)>]) -> Vec<Self> {
        small_structure_mul(a, b, table).unwrap_or_else(|| generic_structure_mul(a, b, table))
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn cmp_rational(&self, q: &Rational) -> Option<Ordering> {
        self.partial_cmp(&<f64 as Scalar>::from_rational(q))
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self / rhs)
    }
    fn primitive_derivatives(p: Primitive, x: &Self, count: usize) -> Result<Vec<Self>> {
        let x = *x;
        let mut out = Vec::with_capacity(count);
        match p {
            Primitive::Sin | Primitive::Cos => {
                let (s, c) = (Float::sin(x), Float::cos(x));
                // derivatives of sin cycle through sin, cos, -sin, -cos
                let cycle = [s, c, -s, -c];
                let shift = if p == Primitive::Sin { 0 } else { 1 };
                out.extend((0..count).map(|j| cycle[(j + shift) % 4]));
            }
            Primitive::Exp => {
                let e = Float::exp(x);
                out.extend((0..count).map(|_| e));
            }
            Primitive::Log => {
                if x <= 0.0 {
                    return Err(Error::Domain(format!("log of non-positive {x}")));
                }
                if count > 0 {
                    out.push(Float::ln(x));
                }
                // d^j/dx^j log x = (-1)^(j-1) (j-1)! / x^j
                let mut term = 1.0 / x;
                for j in 1..count {
                    out.push(term);
                    term *= -(j as f64) / x;
                }
            }
            Primitive::Sqrt => {
                if x < 0.0 || (x == 0.0 && count > 1) {
                    return Err(Error::Domain(format!("sqrt at {x}")));
                }
                // d^j/dx^j x^(1/2) = (1/2)(1/2 - 1)…(1/2 - j + 1) x^(1/2 - j)
                let root = Float::sqrt(x);
                let mut coeff = 1.0;
                for j in 0..count {
                    out.push(coeff * root / Float::powi(x, j as i32));
                    coeff *= 0.5 - j as f64;
                }
            }
        }
        Ok(out)
    }
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        let scale = 1.0f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= tol * scale
    }
    fn structure(alg: &WeilAlgebra) -> &[Vec<(usize, Self)>] {
        alg.structure_float()
    }
}

/// Exact rational for a decimal literal such as `0.3` or `12`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: alloc::string::String = int.chars().chain(frac.chars()).collect();
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(num, den))
}

pub fn is_integer(q: &Rational) -> bool {
    q.is_integer()
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal("0.3"), Some(ratio(3, 10)));
        assert_eq!(parse_decimal("12"), Some(rational(12)));
        assert_eq!(parse_decimal("1.50"), Some(ratio(3, 2)));
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1e3"), None);
    }

    #[test]
    fn float_primitive_derivatives() {
        let d = f64::primitive_derivatives(Primitive::Sin, &0.0, 4).unwrap();
        assert_eq!(d, [0.0, 1.0, -0.0, -1.0]);
        let d = f64::primitive_derivatives(Primitive::Log, &2.0, 4).unwrap();
        assert!((d[1] - 0.5).abs() < 1e-15);
        assert!((d[2] + 0.25).abs() < 1e-15);
        assert!((d[3] - 0.25).abs() < 1e-15);
        let d = f64::primitive_derivatives(Primitive::Sqrt, &4.0, 3).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-15);
        assert!((d[1] - 0.25).abs() < 1e-15);
        assert!((d[2] + 1.0 / 32.0).abs() < 1e-15);
        assert!(f64::primitive_derivatives(Primitive::Log, &0.0, 1).is_err());
        assert!(f64::primitive_derivatives(Primitive::Sqrt, &0.0, 2).is_err());
    }

    #[test]
    fn rational_mode_rejects_primitives() {
        assert!(matches!(
            Rational::primitive_derivatives(Primitive::Exp, &rational(0), 2),
            Err(Error::ModeMismatch(_))
        ));
    }

    #[test]
    fn float_tolerance_scales() {
        assert!(1e6f64.close_to(&(1e6 + 1e-4), 1e-9));
        assert!(!1.0f64.close_to(&(1.0 + 1e-8), 1e-9));
    }
}
