//! Generic complex scalar trait plus forward-mode dual numbers.
//!
//! Expression trees in `maps` evaluate over any `CScalar`. The same tree then
//! drives plain numeric evaluation (`C64`), directional derivatives (`CDual`)
//! and exact truncated power series (`series::TruncSeries`) without
//! duplicating the interpreter.

use crate::error::{Error, Result};
use crate::C64;

/// Complex-differentiable scalar: field ops plus a principal square root.
pub trait CScalar: Clone {
    /// Embed a constant, using `self` as a shape template (needed by the
    /// series implementation which must know nvars/order).
    fn lift(&self, c: C64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn powi(&self, k: u32) -> Self {
        let mut acc = self.lift(C64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }
    /// Numeric value (constant term for series).
    fn approx(&self) -> C64;
}

const POLE_TOL: f64 = 1e-14;

impl CScalar for C64 {
    fn lift(&self, c: C64) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.norm() < POLE_TOL {
            return Err(Error::Pole);
        }
        Ok(self / o)
    }
    fn sqrt(&self) -> Result<Self> {
        if self.norm() < POLE_TOL {
            return Err(Error::BranchPoint);
        }
        // num-complex sqrt is the principal branch, arg in (-pi, pi].
        Ok(num_complex::Complex::sqrt(*self))
    }
    fn approx(&self) -> C64 {
        *self
    }
}

/// First-order dual number for one directional derivative.
#[derive(Clone, Copy, Debug)]
pub struct CDual {
    pub v: C64,
    pub d: C64,
}

impl CDual {
    pub fn new(v: C64, d: C64) -> Self {
        CDual { v, d }
    }
    pub fn constant(v: C64) -> Self {
        CDual { v, d: C64::new(0.0, 0.0) }
    }
}

impl CScalar for CDual {
    fn lift(&self, c: C64) -> Self {
        CDual::constant(c)
    }
    fn add(&self, o: &Self) -> Self {
        CDual { v: self.v + o.v, d: self.d + o.d }
    }
    fn sub(&self, o: &Self) -> Self {
        CDual { v: self.v - o.v, d: self.d - o.d }
    }
    fn mul(&self, o: &Self) -> Self {
        CDual { v: self.v * o.v, d: self.v * o.d + self.d * o.v }
    }
    fn neg(&self) -> Self {
        CDual { v: -self.v, d: -self.d }
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.v.norm() < POLE_TOL {
            return Err(Error::Pole);
        }
        let v = self.v / o.v;
        Ok(CDual { v, d: (self.d - v * o.d) / o.v })
    }
    fn sqrt(&self) -> Result<Self> {
        if self.v.norm() < POLE_TOL {
            return Err(Error::BranchPoint);
        }
        // The derivative 1/(2 sqrt) blows up across the cut; reject points
        // on the negative real axis where the principal branch jumps.
        if self.v.re < 0.0 && self.v.im.abs() < POLE_TOL * self.v.norm().max(1.0) {
            return Err(Error::NotDifferentiable);
        }
        let s = num_complex::Complex::sqrt(self.v);
        Ok(CDual { v: s, d: self.d / (s * 2.0) })
    }
    fn approx(&self) -> C64 {
        self.v
    }
}
