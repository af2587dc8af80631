//! Exact scalar arithmetic in the field Q(sqrt2, i).
//!
//! Every constant appearing in the polynomial members of the map catalog
//! lives in this field (1/2, sqrt2/4, 1/sqrt(-2), ...), so bihomogeneous
//! expansions and truncated power series can be carried out with no rounding
//! at all. Arbitrary floating constants embed exactly as dyadic rationals.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::C64;

pub type QQ = Ratio<BigInt>;

fn qq(n: i64, d: i64) -> QQ {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

/// Element a + b*sqrt(2) of the real quadratic field Q(sqrt2).
#[derive(Clone, PartialEq, Eq)]
pub struct Quad {
    pub a: QQ,
    pub b: QQ,
}

impl Quad {
    pub fn zero() -> Self {
        Quad { a: QQ::zero(), b: QQ::zero() }
    }
    pub fn one() -> Self {
        Quad { a: QQ::one(), b: QQ::zero() }
    }
    pub fn rational(r: QQ) -> Self {
        Quad { a: r, b: QQ::zero() }
    }
    pub fn sqrt2_times(r: QQ) -> Self {
        Quad { a: QQ::zero(), b: r }
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.a) + ratio_to_f64(&self.b) * std::f64::consts::SQRT_2
    }
    /// Multiplicative inverse; the norm a^2 - 2 b^2 vanishes only at zero.
    pub fn inv(&self) -> Quad {
        let norm = self.a.clone() * self.a.clone() - qq(2, 1) * self.b.clone() * self.b.clone();
        assert!(!norm.is_zero(), "division by zero in Q(sqrt2)");
        Quad { a: self.a.clone() / norm.clone(), b: -self.b.clone() / norm }
    }
}

fn ratio_to_f64(r: &QQ) -> f64 {
    // Split numerator/denominator to stay in f64 range for big operands.
    let (n, d) = (r.numer(), r.denom());
    let nf = bigint_to_f64(n);
    let df = bigint_to_f64(d);
    nf / df
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

impl Add for &Quad {
    type Output = Quad;
    fn add(self, o: &Quad) -> Quad {
        Quad { a: self.a.clone() + o.a.clone(), b: self.b.clone() + o.b.clone() }
    }
}
impl Sub for &Quad {
    type Output = Quad;
    fn sub(self, o: &Quad) -> Quad {
        Quad { a: self.a.clone() - o.a.clone(), b: self.b.clone() - o.b.clone() }
    }
}
impl Mul for &Quad {
    type Output = Quad;
    fn mul(self, o: &Quad) -> Quad {
        // (a + b s)(c + d s) = ac + 2bd + (ad + bc) s   with s^2 = 2
        let ac = self.a.clone() * o.a.clone();
        let bd = self.b.clone() * o.b.clone();
        let ad = self.a.clone() * o.b.clone();
        let bc = self.b.clone() * o.a.clone();
        Quad { a: ac + qq(2, 1) * bd, b: ad + bc }
    }
}
impl Neg for &Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad { a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}√2", self.a, self.b)
        }
    }
}

/// Exact complex scalar over Q(sqrt2).
#[derive(Clone, PartialEq, Eq)]
pub struct ExactC {
    pub re: Quad,
    pub im: Quad,
}

impl ExactC {
    pub fn zero() -> Self {
        ExactC { re: Quad::zero(), im: Quad::zero() }
    }
    pub fn one() -> Self {
        ExactC { re: Quad::one(), im: Quad::zero() }
    }
    pub fn i() -> Self {
        ExactC { re: Quad::zero(), im: Quad::one() }
    }
    pub fn from_int(n: i64) -> Self {
        ExactC { re: Quad::rational(qq(n, 1)), im: Quad::zero() }
    }
    pub fn from_ratio(n: i64, d: i64) -> Self {
        ExactC { re: Quad::rational(qq(n, d)), im: Quad::zero() }
    }
    /// (n/d) * sqrt(2)
    pub fn sqrt2_ratio(n: i64, d: i64) -> Self {
        ExactC { re: Quad::sqrt2_times(qq(n, d)), im: Quad::zero() }
    }
    /// i * (n/d) * sqrt(2); note 1/sqrt(-2) = -i sqrt2 / 2 with the principal branch.
    pub fn i_sqrt2_ratio(n: i64, d: i64) -> Self {
        ExactC { re: Quad::zero(), im: Quad::sqrt2_times(qq(n, d)) }
    }
    /// Exact dyadic embedding of a floating complex number.
    pub fn from_c64(c: C64) -> Self {
        ExactC {
            re: Quad::rational(dyadic(c.re)),
            im: Quad::rational(dyadic(c.im)),
        }
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn conj(&self) -> Self {
        ExactC { re: self.re.clone(), im: -&self.im }
    }
    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }
    pub fn add(&self, o: &Self) -> Self {
        ExactC { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    pub fn sub(&self, o: &Self) -> Self {
        ExactC { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    pub fn neg(&self) -> Self {
        ExactC { re: -&self.re, im: -&self.im }
    }
    pub fn mul(&self, o: &Self) -> Self {
        ExactC {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }
    pub fn inv(&self) -> Self {
        // 1/(x + iy) = (x - iy)/(x^2 + y^2), all inside Q(sqrt2).
        let n = &(&self.re * &self.re) + &(&self.im * &self.im);
        assert!(!n.is_zero(), "division by zero in Q(sqrt2, i)");
        let ninv = n.inv();
        ExactC { re: &self.re * &ninv, im: &(-&self.im) * &ninv }
    }
    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }
    pub fn scale_ratio(&self, n: i64, d: i64) -> Self {
        self.mul(&ExactC::from_ratio(n, d))
    }
}

impl fmt::Debug for ExactC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})+({:?})i", self.re, self.im)
    }
}

fn dyadic(x: f64) -> QQ {
    QQ::from_float(x).unwrap_or_else(QQ::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops() {
        let s = ExactC::sqrt2_ratio(1, 4); // sqrt2/4
        let p = s.mul(&s.conj());
        assert_eq!(p, ExactC::from_ratio(1, 8));
        let inv_sqrt_neg2 = ExactC::i_sqrt2_ratio(-1, 2); // 1/sqrt(-2)
        let sq = inv_sqrt_neg2.mul(&inv_sqrt_neg2);
        assert_eq!(sq, ExactC::from_ratio(-1, 2));
    }

    #[test]
    fn inversion() {
        let x = ExactC {
            re: Quad { a: qq(1, 3), b: qq(2, 5) },
            im: Quad { a: qq(-1, 2), b: qq(1, 7) },
        };
        let y = x.mul(&x.inv());
        assert_eq!(y, ExactC::one());
    }

    #[test]
    fn dyadic_embedding_is_exact() {
        let c = C64::new(0.375, -1.25);
        assert_eq!(ExactC::from_c64(c).to_c64(), c);
    }
}
