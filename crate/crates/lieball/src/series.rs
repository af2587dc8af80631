//! Truncated power series with weighted grading and exact coefficients.
//!
//! Variables carry integer weights (z_i get 1, the distinguished Heisenberg
//! variable w gets 2); every operation truncates at the fixed weighted
//! order, so ring arithmetic, inversion and square roots are all exact at
//! that order. Implements the generic scalar trait, which lets the map
//! interpreter expand whole catalog members without a separate symbolic
//! pass.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::algebra::CScalar;
use crate::error::{Error, Result};
use crate::exact::{ExactC, Quad, QQ};
use crate::maps::CScalarExt;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncSeries {
    pub weights: Vec<u32>,
    pub order: u32,
    pub c: BTreeMap<Vec<u32>, ExactC>,
}

impl TruncSeries {
    pub fn zero(weights: &[u32], order: u32) -> Self {
        TruncSeries { weights: weights.to_vec(), order, c: BTreeMap::new() }
    }

    pub fn constant(weights: &[u32], order: u32, v: ExactC) -> Self {
        let mut s = Self::zero(weights, order);
        if !v.is_zero() {
            s.c.insert(vec![0; weights.len()], v);
        }
        s
    }

    pub fn variable(weights: &[u32], order: u32, j: usize) -> Self {
        let mut m = vec![0; weights.len()];
        m[j] = 1;
        let mut s = Self::zero(weights, order);
        if weights[j] <= order {
            s.c.insert(m, ExactC::one());
        }
        s
    }

    pub fn nvars(&self) -> usize {
        self.weights.len()
    }

    pub fn wdeg(&self, m: &[u32]) -> u32 {
        m.iter().zip(&self.weights).map(|(&e, &w)| e * w).sum()
    }

    pub fn constant_term(&self) -> ExactC {
        self.c.get(&vec![0; self.nvars()]).cloned().unwrap_or_else(ExactC::zero)
    }

    /// Lowest weighted degree of a nonzero term, or None for the zero series.
    pub fn min_order(&self) -> Option<u32> {
        self.c.iter().filter(|(_, v)| !v.is_zero()).map(|(m, _)| self.wdeg(m)).min()
    }

    pub fn is_zero(&self) -> bool {
        self.c.values().all(|v| v.is_zero())
    }

    /// Terms of exact weighted degree s.
    pub fn graded_part(&self, s: u32) -> Self {
        let mut out = Self::zero(&self.weights, self.order);
        for (m, v) in &self.c {
            if self.wdeg(m) == s && !v.is_zero() {
                out.c.insert(m.clone(), v.clone());
            }
        }
        out
    }

    fn insert_add(&mut self, m: Vec<u32>, v: ExactC) {
        if self.wdeg(&m) > self.order || v.is_zero() {
            return;
        }
        let e = self.c.entry(m).or_insert_with(ExactC::zero);
        *e = e.add(&v);
        // drop exact cancellations eagerly
        self.c.retain(|_, v| !v.is_zero());
    }

    fn check_shape(&self, o: &Self) {
        assert_eq!(self.weights, o.weights, "series shape mismatch");
        assert_eq!(self.order, o.order, "series order mismatch");
    }

    pub fn scale(&self, v: &ExactC) -> Self {
        let mut out = Self::zero(&self.weights, self.order);
        for (m, c) in &self.c {
            out.insert_add(m.clone(), c.mul(v));
        }
        out
    }

    /// Inverse of a series with invertible constant term: geometric series
    /// in the order-positive tail.
    pub fn inv(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::Pole);
        }
        let c0inv = c0.inv();
        let mut h = self.scale(&c0inv);
        h.c.remove(&vec![0; self.nvars()]);
        let neg_h = CScalar::neg(&h);
        let mut acc = Self::constant(&self.weights, self.order, ExactC::one());
        let mut pw = Self::constant(&self.weights, self.order, ExactC::one());
        for _ in 0..self.order {
            pw = CScalar::mul(&pw, &neg_h);
            if pw.is_zero() {
                break;
            }
            acc = CScalar::add(&acc, &pw);
        }
        Ok(acc.scale(&c0inv))
    }

    /// Binomial series for sqrt(1 + h); requires constant term exactly 1.
    pub fn sqrt_series(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotAnalyticAtOrigin);
        }
        if c0 != ExactC::one() {
            return Err(Error::Invalid(
                "series sqrt needs constant term 1 (no exact root otherwise)".into(),
            ));
        }
        let mut h = self.clone();
        h.c.remove(&vec![0; self.nvars()]);
        let mut acc = Self::constant(&self.weights, self.order, ExactC::one());
        let mut pw = Self::constant(&self.weights, self.order, ExactC::one());
        let mut coeff = QQ::from_str("1").unwrap();
        for j in 1..=self.order as i64 {
            // C(1/2, j) built up by the falling-factorial recurrence
            coeff = coeff * Ratio::new(BigInt::from(3 - 2 * j), BigInt::from(2 * j));
            pw = CScalar::mul(&pw, &h);
            if pw.is_zero() {
                break;
            }
            let term = pw.scale(&ExactC { re: Quad::rational(coeff.clone()), im: Quad::zero() });
            acc = CScalar::add(&acc, &term);
        }
        Ok(acc)
    }
}

impl CScalar for TruncSeries {
    fn lift(&self, c: C64) -> Self {
        Self::constant(&self.weights, self.order, ExactC::from_c64(c))
    }
    fn add(&self, o: &Self) -> Self {
        self.check_shape(o);
        let mut out = self.clone();
        for (m, v) in &o.c {
            out.insert_add(m.clone(), v.clone());
        }
        out
    }
    fn sub(&self, o: &Self) -> Self {
        CScalar::add(self, &CScalar::neg(o))
    }
    fn mul(&self, o: &Self) -> Self {
        self.check_shape(o);
        let mut out = Self::zero(&self.weights, self.order);
        for (ma, ca) in &self.c {
            for (mb, cb) in &o.c {
                let m: Vec<u32> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                out.insert_add(m, ca.mul(cb));
            }
        }
        out
    }
    fn neg(&self) -> Self {
        let mut out = self.clone();
        for v in out.c.values_mut() {
            *v = v.neg();
        }
        out
    }
    fn div(&self, o: &Self) -> Result<Self> {
        Ok(CScalar::mul(self, &o.inv()?))
    }
    fn sqrt(&self) -> Result<Self> {
        self.sqrt_series()
    }
    fn approx(&self) -> C64 {
        self.constant_term().to_c64()
    }
}

impl CScalarExt for TruncSeries {
    fn lift_exact(&self, c: &ExactC) -> Self {
        Self::constant(&self.weights, self.order, c.clone())
    }
}

// wire format: coefficients as exact field elements (a + b√2) + (c + d√2)i,
// each rational rendered "num/den"

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub coeff: [String; 4],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesJson {
    pub weights: Vec<u32>,
    pub order: u32,
    pub terms: Vec<TermJson>,
}

pub fn exactc_strings(v: &ExactC) -> [String; 4] {
    [
        v.re.a.to_string(),
        v.re.b.to_string(),
        v.im.a.to_string(),
        v.im.b.to_string(),
    ]
}

pub fn exactc_from_strings(s: &[String; 4]) -> Result<ExactC> {
    let parse = |t: &String| -> Result<QQ> {
        QQ::from_str(t).map_err(|e| Error::Invalid(format!("bad rational '{t}': {e}")))
    };
    Ok(ExactC {
        re: Quad { a: parse(&s[0])?, b: parse(&s[1])? },
        im: Quad { a: parse(&s[2])?, b: parse(&s[3])? },
    })
}

impl TruncSeries {
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            weights: self.weights.clone(),
            order: self.order,
            terms: self
                .c
                .iter()
                .map(|(m, v)| TermJson { exponents: m.clone(), coeff: exactc_strings(v) })
                .collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let mut s = Self::zero(&j.weights, j.order);
        for t in &j.terms {
            if t.exponents.len() != j.weights.len() {
                return Err(Error::DimensionMismatch {
                    expected: j.weights.len(),
                    got: t.exponents.len(),
                });
            }
            s.insert_add(t.exponents.clone(), exactc_from_strings(&t.coeff)?);
        }
        Ok(s)
    }
}
