//! Hermitian bihomogeneous forms Σ c_{αβ} z^α z̄^β with exact coefficients:
//! expansion from polynomial map components, eigenvalue signatures, and
//! unitary matching of component lists with equal norm forms.
//!
//! Monomial order is graded lexicographic (degree first, then z_1 before
//! z_2, ...); the coefficient matrix is only meaningful relative to it.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactC;
use crate::linalg::{matched_unitary, CMat, MatrixJson, RMat};
use crate::maps::{HoloExpr, HoloMap};
use crate::C64;

pub type Monomial = Vec<u32>;

pub fn graded_lex(a: &Monomial, b: &Monomial) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormMode {
    SumNormSq,
    #[serde(rename = "typeIV-kernel")]
    TypeIvKernel,
}

#[derive(Clone, Debug)]
pub struct HermitianForm {
    pub n: usize,
    pub monomials: Vec<Monomial>,
    pub coeff: Vec<Vec<ExactC>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureResult {
    pub positives: usize,
    pub negatives: usize,
    pub zeros: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormJson {
    pub n: usize,
    pub monomials: Vec<Monomial>,
    pub coeff: MatrixJson,
}

/// Exact polynomial in z as exponent-vector -> coefficient.
pub type PolyZ = BTreeMap<Monomial, ExactC>;

fn poly_add_term(p: &mut PolyZ, m: Monomial, c: ExactC) {
    let entry = p.entry(m).or_insert_with(ExactC::zero);
    *entry = entry.add(&c);
    // keep the support tight so cancellations shrink the basis
    p.retain(|_, v| !v.is_zero());
}

fn poly_mul(a: &PolyZ, b: &PolyZ) -> PolyZ {
    let mut out = PolyZ::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            poly_add_term(&mut out, m, ca.mul(cb));
        }
    }
    out
}

/// Expand a Div/Sqrt-free expression over `nvars` variables.
pub fn expand_expr(e: &HoloExpr, nvars: usize) -> Result<PolyZ> {
    Ok(match e {
        HoloExpr::Const(c) => {
            let mut p = PolyZ::new();
            if !c.is_zero() {
                p.insert(vec![0; nvars], c.clone());
            }
            p
        }
        HoloExpr::Var(j) => {
            let mut m = vec![0; nvars];
            m[*j] = 1;
            let mut p = PolyZ::new();
            p.insert(m, ExactC::one());
            p
        }
        HoloExpr::Add(es) => {
            let mut p = PolyZ::new();
            for e in es {
                for (m, c) in expand_expr(e, nvars)? {
                    poly_add_term(&mut p, m, c);
                }
            }
            p
        }
        HoloExpr::Mul(es) => {
            let mut p = expand_expr(&HoloExpr::Const(ExactC::one()), nvars)?;
            for e in es {
                p = poly_mul(&p, &expand_expr(e, nvars)?);
            }
            p
        }
        HoloExpr::Neg(e) => {
            let mut p = expand_expr(e, nvars)?;
            for v in p.values_mut() {
                *v = v.neg();
            }
            p
        }
        HoloExpr::Pow(e, k) => {
            let base = expand_expr(e, nvars)?;
            let mut p = expand_expr(&HoloExpr::Const(ExactC::one()), nvars)?;
            for _ in 0..*k {
                p = poly_mul(&p, &base);
            }
            p
        }
        HoloExpr::Div(_, _) | HoloExpr::Sqrt(_) => return Err(Error::NotPolynomial),
    })
}

/// Sparse table of c_{αβ} entries; builder for HermitianForm.
#[derive(Clone, Debug, Default)]
pub struct FormTable(BTreeMap<(Monomial, Monomial), ExactC>);

impl FormTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, a: Monomial, b: Monomial, c: ExactC) {
        let entry = self.0.entry((a, b)).or_insert_with(ExactC::zero);
        *entry = entry.add(&c);
    }

    /// Accumulate Σ_i p_i p̄_i scaled by num/den.
    pub fn add_norm_sq(&mut self, polys: &[PolyZ], num: i64, den: i64) {
        for p in polys {
            for (ma, ca) in p {
                for (mb, cb) in p {
                    self.add(ma.clone(), mb.clone(), ca.mul(&cb.conj()).scale_ratio(num, den));
                }
            }
        }
    }

    /// Product of two real-valued forms.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::new();
        for ((a1, b1), c1) in &self.0 {
            for ((a2, b2), c2) in &o.0 {
                let a: Monomial = a1.iter().zip(a2).map(|(x, y)| x + y).collect();
                let b: Monomial = b1.iter().zip(b2).map(|(x, y)| x + y).collect();
                out.add(a, b, c1.mul(c2));
            }
        }
        out
    }

    pub fn to_form(&self, n: usize) -> HermitianForm {
        let mut basis: Vec<Monomial> = Vec::new();
        for ((a, b), c) in &self.0 {
            if c.is_zero() {
                continue;
            }
            for m in [a, b] {
                if !basis.contains(m) {
                    basis.push(m.clone());
                }
            }
        }
        basis.sort_by(|a, b| graded_lex(a, b));
        let k = basis.len();
        let mut coeff = vec![vec![ExactC::zero(); k]; k];
        for ((a, b), c) in &self.0 {
            if c.is_zero() {
                continue;
            }
            let i = basis.iter().position(|m| m == a).unwrap();
            let j = basis.iter().position(|m| m == b).unwrap();
            coeff[i][j] = coeff[i][j].add(c);
        }
        HermitianForm { n, monomials: basis, coeff }
    }
}

impl HermitianForm {
    pub fn coeff_c64(&self) -> CMat {
        let k = self.monomials.len();
        CMat::from_fn(k, k, |i, j| self.coeff[i][j].to_c64())
    }

    pub fn value_at(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.len() });
        }
        let mono = |m: &Monomial| -> C64 {
            m.iter().zip(z).map(|(&e, &zi)| zi.powu(e)).product()
        };
        let vals: Vec<C64> = self.monomials.iter().map(mono).collect();
        let mut s = C64::new(0.0, 0.0);
        for (i, row) in self.coeff.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                s += c.to_c64() * vals[i] * vals[j].conj();
            }
        }
        Ok(s)
    }

    pub fn hermitian_defect(&self) -> f64 {
        let m = self.coeff_c64();
        crate::linalg::max_abs(&(&m - m.adjoint()))
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            n: self.n,
            monomials: self.monomials.clone(),
            coeff: MatrixJson::from_cmat(&self.coeff_c64()),
        }
    }

    pub fn from_json(j: &FormJson) -> Result<Self> {
        let m = j.coeff.to_cmat()?;
        if m.nrows() != j.monomials.len() {
            return Err(Error::DimensionMismatch { expected: j.monomials.len(), got: m.nrows() });
        }
        let k = j.monomials.len();
        let coeff = (0..k)
            .map(|i| (0..k).map(|jj| ExactC::from_c64(m[(i, jj)])).collect())
            .collect();
        Ok(HermitianForm { n: j.n, monomials: j.monomials.clone(), coeff })
    }
}

pub fn form_from_map(f: &HoloMap, mode: FormMode) -> Result<HermitianForm> {
    let n = f.source.dim();
    let comps = f.components()?;
    let polys: Vec<PolyZ> =
        comps.iter().map(|c| expand_expr(c, n)).collect::<Result<_>>()?;
    let mut table = FormTable::new();
    table.add_norm_sq(&polys, 1, 1);
    if mode == FormMode::TypeIvKernel {
        // subtract |Σ f_i²|² / 4
        let mut a = PolyZ::new();
        for p in &polys {
            for (m, c) in poly_mul(p, p) {
                poly_add_term(&mut a, m, c);
            }
        }
        table.add_norm_sq(&[a], -1, 4);
    }
    Ok(table.to_form(n))
}

/// Eigenvalue sign counts at threshold tol * max|eigenvalue|.
pub fn signature(h: &HermitianForm, tol: f64) -> SignatureResult {
    let k = h.monomials.len();
    if k == 0 {
        return SignatureResult { positives: 0, negatives: 0, zeros: 0 };
    }
    let m = h.coeff_c64();
    // real symmetric embedding [[X, -Y], [Y, X]]; eigenvalues come in pairs
    let emb = RMat::from_fn(2 * k, 2 * k, |i, j| {
        let (bi, ri) = (i / k, i % k);
        let (bj, rj) = (j / k, j % k);
        let c = m[(ri, rj)];
        match (bi, bj) {
            (0, 0) | (1, 1) => c.re,
            (0, 1) => -c.im,
            _ => c.im,
        }
    });
    let eigs = emb.symmetric_eigen().eigenvalues;
    let scale = eigs.iter().fold(0.0f64, |acc, &e| acc.max(e.abs()));
    let thr = tol * scale;
    let mut pos = 0;
    let mut neg = 0;
    let mut zero = 0;
    for &e in eigs.iter() {
        if e > thr {
            pos += 1;
        } else if e < -thr {
            neg += 1;
        } else {
            zero += 1;
        }
    }
    debug_assert!(pos % 2 == 0 && neg % 2 == 0 && zero % 2 == 0);
    SignatureResult { positives: pos / 2, negatives: neg / 2, zeros: zero / 2 }
}

/// (1 - Σ_{j<=n} |z_j|²)^p as an exact form.
pub fn power_form(n: usize, p: u32) -> Result<HermitianForm> {
    if n < 1 || p < 1 {
        return Err(Error::ParameterOutOfRange(format!("power_form n={n} p={p}")));
    }
    let mut base = FormTable::new();
    base.add(vec![0; n], vec![0; n], ExactC::one());
    for j in 0..n {
        let mut m = vec![0; n];
        m[j] = 1;
        base.add(m.clone(), m, ExactC::from_int(-1));
    }
    let mut acc = base.clone();
    for _ in 1..p {
        acc = acc.mul(&base);
    }
    Ok(acc.to_form(n))
}

pub fn power_signature(n: usize, p: u32) -> Result<SignatureResult> {
    Ok(signature(&power_form(n, p)?, 1e-9))
}

/// Unitary U with f = g·U as polynomial identities, given Σ|f|² = Σ|g|².
pub fn dangelo_unitary(f: &[HoloExpr], g: &[HoloExpr], tol: f64) -> Result<CMat> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: f.len(), got: g.len() });
    }
    let k = f.len();
    let nvars = f
        .iter()
        .chain(g)
        .filter_map(|e| e.max_var())
        .max()
        .map_or(1, |m| m + 1);
    let fp: Vec<PolyZ> = f.iter().map(|e| expand_expr(e, nvars)).collect::<Result<_>>()?;
    let gp: Vec<PolyZ> = g.iter().map(|e| expand_expr(e, nvars)).collect::<Result<_>>()?;
    let mut basis: Vec<Monomial> = Vec::new();
    for p in fp.iter().chain(&gp) {
        for m in p.keys() {
            if !basis.contains(m) {
                basis.push(m.clone());
            }
        }
    }
    basis.sort_by(|a, b| graded_lex(a, b));
    let nb = basis.len().max(1);
    let col = |polys: &[PolyZ], i: usize| -> Vec<C64> {
        basis
            .iter()
            .map(|m| polys[i].get(m).map_or(C64::new(0.0, 0.0), |c| c.to_c64()))
            .collect()
    };
    // rows of the coefficient matrices become columns: solve W G^t = F^t,
    // then f = g·U with U = W^t
    let ft = CMat::from_fn(k, nb, |i, j| col(&fp, i)[j]);
    let gt = CMat::from_fn(k, nb, |i, j| col(&gp, i)[j]);
    let w = matched_unitary(&gt, &ft, tol)?;
    Ok(w.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitary_defect};
    use crate::maps::{catalog_build, var, CatalogKey};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sig(h: &HermitianForm) -> SignatureResult {
        signature(h, 1e-9)
    }

    #[test]
    fn identity_form_from_linear_map() {
        let f = HoloMap::from_components(
            crate::domains::DomainSpec::UnitBall { n: 2 },
            crate::domains::DomainSpec::UnitBall { n: 2 },
            vec![var(0), var(1)],
            Some("id".into()),
        )
        .unwrap();
        let h = form_from_map(&f, FormMode::SumNormSq).unwrap();
        assert_eq!(h.monomials, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(h.coeff_c64(), CMat::identity(2, 2));
        assert_eq!(sig(&h), SignatureResult { positives: 2, negatives: 0, zeros: 0 });
    }

    #[test]
    fn flat_kernel_form_collapses_to_norm() {
        let f = catalog_build(&CatalogKey::Flat { n: 2, m: 4 }).unwrap();
        let h = form_from_map(&f, FormMode::TypeIvKernel).unwrap();
        assert_eq!(h.monomials, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(h.coeff_c64(), CMat::identity(2, 2));
    }

    #[test]
    fn degenerate_example_form_has_a_negative() {
        let f = catalog_build(&CatalogKey::Exhp0 { n: 2 }).unwrap();
        let h = form_from_map(&f, FormMode::TypeIvKernel).unwrap();
        let s = sig(&h);
        assert!(s.negatives >= 1, "{s:?}");
        // expected shape: |z1|² + |z2|² - ¼|z2²|² + ¼|z1 z2²|² + ¼|z2³|²
        assert_eq!(h.monomials.len(), 5);
        assert_eq!(s, SignatureResult { positives: 4, negatives: 1, zeros: 0 });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let z: Vec<C64> =
                (0..2).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let v = h.value_at(&z).unwrap();
            assert!(v.im.abs() < 1e-12);
            let nsq: f64 = z.iter().map(|c| c.norm_sqr()).sum();
            let want = nsq - 0.25 * z[1].norm_sqr().powi(2) * (1.0 - nsq);
            assert!((v.re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn square_of_kernel_signatures() {
        let h = power_form(2, 2).unwrap();
        assert_eq!(
            h.monomials,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(sig(&h), SignatureResult { positives: 4, negatives: 2, zeros: 0 });
        assert_eq!(
            power_signature(1, 2).unwrap(),
            SignatureResult { positives: 2, negatives: 1, zeros: 0 }
        );
        assert_eq!(
            power_signature(3, 1).unwrap(),
            SignatureResult { positives: 1, negatives: 3, zeros: 0 }
        );
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn power_signature_matches_counting_oracle() {
        for n in 2..=4usize {
            for p in 2..=4u32 {
                let s = power_signature(n, p).unwrap();
                let count = |parity: u32| -> usize {
                    (0..=p).filter(|k| k % 2 == parity).map(|k| binom(n + k as usize - 1, k as usize)).sum()
                };
                assert_eq!(s.positives, count(0), "n={n} p={p}");
                assert_eq!(s.negatives, count(1), "n={n} p={p}");
                assert_eq!(s.zeros, 0);
                assert!(s.positives >= 3);
            }
        }
    }

    #[test]
    fn signature_invariant_under_unitary_mixing() {
        let f = catalog_build(&CatalogKey::Flat { n: 2, m: 4 }).unwrap();
        let h0 = sig(&form_from_map(&f, FormMode::SumNormSq).unwrap());
        let comps = f.components().unwrap().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = CMat::from_fn(comps.len(), comps.len(), |_, _| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let u = g.qr().q();
            let mixed: Vec<HoloExpr> = (0..comps.len())
                .map(|j| {
                    HoloExpr::Add(
                        (0..comps.len())
                            .map(|i| {
                                HoloExpr::Mul(vec![
                                    HoloExpr::Const(ExactC::from_c64(u[(i, j)])),
                                    comps[i].clone(),
                                ])
                            })
                            .collect(),
                    )
                })
                .collect();
            let fm = HoloMap::from_components(f.source, f.target, mixed, Some("mixed".into())).unwrap();
            let h = form_from_map(&fm, FormMode::SumNormSq).unwrap();
            assert_eq!(signature(&h, 1e-7), h0);
        }
    }

    #[test]
    fn dangelo_examples() {
        let tol = 1e-10;
        let u = dangelo_unitary(&[var(1), var(0)], &[var(0), var(1)], tol).unwrap();
        let perm = CMat::from_fn(2, 2, |i, j| {
            C64::new(if i + j == 1 { 1.0 } else { 0.0 }, 0.0)
        });
        assert!(max_abs(&(&u - perm)) < 1e-12);

        let half = ExactC::sqrt2_ratio(1, 2);
        let g = vec![
            HoloExpr::Mul(vec![HoloExpr::Const(half.clone()), var(0)]),
            HoloExpr::Mul(vec![HoloExpr::Const(half), var(0)]),
        ];
        let f = vec![var(0), HoloExpr::Const(ExactC::zero())];
        let u = dangelo_unitary(&f, &g, tol).unwrap();
        assert!(unitary_defect(&u) < 1e-10);
        // verify g·U = f pointwise
        let z = C64::new(0.3, -0.2);
        let gv = [z / 2f64.sqrt(), z / 2f64.sqrt()];
        for j in 0..2 {
            let got: C64 = (0..2).map(|i| gv[i] * u[(i, j)]).sum();
            let want = if j == 0 { z } else { C64::new(0.0, 0.0) };
            assert!((got - want).norm() < 1e-12);
        }

        // mismatched norms must be rejected
        let bad = dangelo_unitary(&[var(0), var(0)], &[var(0), var(1)], tol);
        assert!(matches!(bad, Err(Error::NormMismatch { .. })));
    }

    #[test]
    fn dangelo_on_catalog_components() {
        let w = catalog_build(&CatalogKey::Flat { n: 2, m: 4 }).unwrap();
        let comps = w.components().unwrap();
        let u = dangelo_unitary(comps, comps, 1e-10).unwrap();
        assert!(unitary_defect(&u) < 1e-10);
        assert!(max_abs(&(&u - CMat::identity(comps.len(), comps.len()))) < 1e-9);
    }

    #[test]
    fn json_roundtrip() {
        let h = power_form(2, 2).unwrap();
        let j = h.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let back = HermitianForm::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back.monomials, h.monomials);
        assert_eq!(back.coeff_c64(), h.coeff_c64());
        assert!(h.hermitian_defect() < 1e-15);
    }
}
