//! Exact arithmetic in the field ℚ(√2, √3) with basis `{1, √2, √3, √6}`.
//!
//! Every coefficient printed in the large-n and large-s expansions lives in
//! this field, so series identities can be checked by exact equality rather
//! than numerically.

use crate::Real;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `a + b√2 + c√3 + d√6` with rational components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicNumber {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl AlgebraicNumber {
    pub fn zero() -> Self {
        Self {
            a: BigRational::zero(),
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self {
            a: rat(n, d),
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: BigRational::zero(),
        }
    }

    pub fn from_rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: BigRational::zero(),
        }
    }

    /// `(n/d) √2`
    pub fn sqrt2(n: i64, d: i64) -> Self {
        Self {
            a: BigRational::zero(),
            b: rat(n, d),
            c: BigRational::zero(),
            d: BigRational::zero(),
        }
    }

    /// `(n/d) √3`
    pub fn sqrt3(n: i64, d: i64) -> Self {
        Self {
            a: BigRational::zero(),
            b: BigRational::zero(),
            c: rat(n, d),
            d: BigRational::zero(),
        }
    }

    /// `(n/d) √6`
    pub fn sqrt6(n: i64, d: i64) -> Self {
        Self {
            a: BigRational::zero(),
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: rat(n, d),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    /// Conjugation `√2 -> -√2` (and so `√6 -> -√6`).
    fn conj2(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: -self.b.clone(),
            c: self.c.clone(),
            d: -self.d.clone(),
        }
    }

    /// Conjugation `√3 -> -√3` (and so `√6 -> -√6`).
    fn conj3(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
        }
    }

    /// Multiplicative inverse of a nonzero element, by the conjugate product:
    /// `x · conj2(x)` lies in ℚ(√3) and its ℚ(√3)-norm is rational.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let c2 = self.conj2();
        let p = self.clone() * c2.clone(); // in Q(√3): b = d = 0
        debug_assert!(p.b.is_zero() && p.d.is_zero());
        // norm = p · conj3(p) = pa² - 3 pc² ∈ ℚ
        let norm = p.a.clone() * p.a.clone() - rat(3, 1) * p.c.clone() * p.c.clone();
        if norm.is_zero() {
            return None;
        }
        // 1/x = conj2(x) · conj3(p) / norm
        let mut out = c2 * p.conj3();
        out.a /= norm.clone();
        out.b /= norm.clone();
        out.c /= norm.clone();
        out.d /= norm;
        Some(out)
    }

    /// Evaluate numerically at `bits` precision.
    pub fn to_real(&self, bits: u32) -> Real {
        let ratf = |r: &BigRational| -> Real {
            let num = Real::with_val(bits, rug::Integer::from_str_radix(&r.numer().to_string(), 10).unwrap());
            let den = Real::with_val(bits, rug::Integer::from_str_radix(&r.denom().to_string(), 10).unwrap());
            num / den
        };
        let s2 = Real::with_val(bits, 2).sqrt();
        let s3 = Real::with_val(bits, 3).sqrt();
        let s6 = Real::with_val(bits, 6).sqrt();
        let mut v = ratf(&self.a);
        v += ratf(&self.b) * s2;
        v += ratf(&self.c) * s3;
        v += ratf(&self.d) * s6;
        v
    }
}

impl Add for AlgebraicNumber {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            a: self.a + o.a,
            b: self.b + o.b,
            c: self.c + o.c,
            d: self.d + o.d,
        }
    }
}

impl Sub for AlgebraicNumber {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            a: self.a - o.a,
            b: self.b - o.b,
            c: self.c - o.c,
            d: self.d - o.d,
        }
    }
}

impl Neg for AlgebraicNumber {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }
}

impl Mul for AlgebraicNumber {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let two = rat(2, 1);
        let three = rat(3, 1);
        let six = rat(6, 1);
        let a = self.a.clone() * o.a.clone()
            + two.clone() * self.b.clone() * o.b.clone()
            + three.clone() * self.c.clone() * o.c.clone()
            + six * self.d.clone() * o.d.clone();
        let b = self.a.clone() * o.b.clone()
            + self.b.clone() * o.a.clone()
            + three * (self.c.clone() * o.d.clone() + self.d.clone() * o.c.clone());
        let c = self.a.clone() * o.c.clone()
            + self.c.clone() * o.a.clone()
            + two * (self.b.clone() * o.d.clone() + self.d.clone() * o.b.clone());
        let d = self.a * o.d + self.d * o.a + self.b * o.c + self.c * o.b;
        Self { a, b, c, d }
    }
}

impl Div for AlgebraicNumber {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.inverse().expect("division by zero in Q(sqrt2,sqrt3)")
    }
}

impl fmt::Display for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (r, tag) in [
            (&self.a, ""),
            (&self.b, "*sqrt(2)"),
            (&self.c, "*sqrt(3)"),
            (&self.d, "*sqrt(6)"),
        ] {
            if r.is_zero() {
                continue;
            }
            if first {
                write!(f, "{r}{tag}")?;
                first = false;
            } else if r.is_negative() {
                write!(f, " - {}{tag}", -r.clone())?;
            } else {
                write!(f, " + {r}{tag}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn an(a: (i64, i64), b: (i64, i64), c: (i64, i64), d: (i64, i64)) -> AlgebraicNumber {
        AlgebraicNumber {
            a: rat(a.0, a.1),
            b: rat(b.0, b.1),
            c: rat(c.0, c.1),
            d: rat(d.0, d.1),
        }
    }

    #[test]
    fn sqrt_products() {
        let s2 = AlgebraicNumber::sqrt2(1, 1);
        let s3 = AlgebraicNumber::sqrt3(1, 1);
        let s6 = AlgebraicNumber::sqrt6(1, 1);
        assert_eq!(s2.clone() * s2.clone(), AlgebraicNumber::from_int(2));
        assert_eq!(s3.clone() * s3.clone(), AlgebraicNumber::from_int(3));
        assert_eq!(s6.clone() * s6.clone(), AlgebraicNumber::from_int(6));
        assert_eq!(s2 * s3, s6);
    }

    #[test]
    fn inverse_roundtrip() {
        let x = an((3, 4), (-1, 2), (2, 7), (5, 3));
        let inv = x.inverse().unwrap();
        assert_eq!(x * inv, AlgebraicNumber::one());
    }

    #[test]
    fn numeric_evaluation() {
        let x = an((1, 2), (1, 4), (0, 1), (0, 1)); // 1/2 + √2/4
        let v = x.to_real(128);
        let want = 0.5 + 2f64.sqrt() / 4.0;
        assert!((v.to_f64() - want).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn field_axioms(
            xa in -20i64..20, xb in -20i64..20, xc in -20i64..20, xd in -20i64..20,
            ya in -20i64..20, yb in -20i64..20, yc in -20i64..20, yd in -20i64..20,
            za in -20i64..20, zb in -20i64..20,
        ) {
            let x = an((xa, 3), (xb, 2), (xc, 5), (xd, 7));
            let y = an((ya, 2), (yb, 3), (yc, 7), (yd, 5));
            let z = an((za, 1), (zb, 4), (0, 1), (0, 1));
            // associativity and distributivity
            prop_assert_eq!(
                (x.clone() * y.clone()) * z.clone(),
                x.clone() * (y.clone() * z.clone())
            );
            prop_assert_eq!(
                x.clone() * (y.clone() + z.clone()),
                x.clone() * y.clone() + x.clone() * z.clone()
            );
            // inverses of nonzero elements
            if !x.is_zero() {
                prop_assert_eq!(x.clone() * x.inverse().unwrap(), AlgebraicNumber::one());
            }
        }
    }
}
