//! Order-by-order verification that maps between Heisenberg models send the
//! model hypersurface into the target one, plus the normalization checks on
//! low-order jets.
//!
//! The restriction to the hypersurface substitutes w = u + i|z|^2 with u, z,
//! z̄ treated as independent commuting symbols; everything stays in exact
//! arithmetic so a vanishing graded part is an identity, not a tolerance
//! call.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::exact::{ExactC, Quad};
use crate::maps::{var, HoloExpr, HoloMap};
use crate::series::{exactc_from_strings, exactc_strings, TruncSeries};

/// Polynomial in (z, z̄, u); key is (z exponents, z̄ exponents, u exponent).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MixedPoly {
    pub nz: usize,
    pub c: BTreeMap<(Vec<u32>, Vec<u32>, u32), ExactC>,
}

impl MixedPoly {
    pub fn new(nz: usize) -> Self {
        MixedPoly { nz, c: BTreeMap::new() }
    }

    pub fn wdeg(key: &(Vec<u32>, Vec<u32>, u32)) -> u32 {
        key.0.iter().sum::<u32>() + key.1.iter().sum::<u32>() + 2 * key.2
    }

    pub fn add_term(&mut self, key: (Vec<u32>, Vec<u32>, u32), v: ExactC) {
        if v.is_zero() {
            return;
        }
        let e = self.c.entry(key).or_insert_with(ExactC::zero);
        *e = e.add(&v);
        self.c.retain(|_, v| !v.is_zero());
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &o.c {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for v in out.c.values_mut() {
            *v = v.neg();
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self, max_order: u32) -> Self {
        let mut out = Self::new(self.nz);
        for (ka, ca) in &self.c {
            for (kb, cb) in &o.c {
                let key = (
                    ka.0.iter().zip(&kb.0).map(|(x, y)| x + y).collect(),
                    ka.1.iter().zip(&kb.1).map(|(x, y)| x + y).collect(),
                    ka.2 + kb.2,
                );
                if Self::wdeg(&key) <= max_order {
                    out.add_term(key, ca.mul(cb));
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.c.values().all(|v| v.is_zero())
    }

    pub fn graded_part(&self, s: u32) -> Self {
        let mut out = Self::new(self.nz);
        for (k, v) in &self.c {
            if Self::wdeg(k) == s {
                out.add_term(k.clone(), v.clone());
            }
        }
        out
    }
}

/// Restrict a series in (z_1..z_{nz}, w) to w = u + i|z|^2 (conjugated:
/// z̄^α and w̄ = u - i|z|^2).
pub fn restrict_to_model(s: &TruncSeries, conjugated: bool, order: u32) -> MixedPoly {
    let nz = s.nvars() - 1;
    // u + (sign) i Σ z_j z̄_j
    let mut wsub = MixedPoly::new(nz);
    wsub.add_term((vec![0; nz], vec![0; nz], 1), ExactC::one());
    let i_coeff = if conjugated { ExactC::i().neg() } else { ExactC::i() };
    for j in 0..nz {
        let mut ez = vec![0; nz];
        ez[j] = 1;
        wsub.add_term((ez.clone(), ez, 0), i_coeff.clone());
    }
    let mut out = MixedPoly::new(nz);
    for (m, v) in &s.c {
        let (alpha, k) = (&m[..nz], m[nz]);
        let coeff = if conjugated { v.conj() } else { v.clone() };
        let mut term = MixedPoly::new(nz);
        let key = if conjugated {
            (vec![0; nz], alpha.to_vec(), 0)
        } else {
            (alpha.to_vec(), vec![0; nz], 0)
        };
        term.add_term(key, coeff);
        for _ in 0..k {
            term = term.mul(&wsub, order);
        }
        out = out.add(&term);
    }
    out
}

#[derive(Clone, Debug)]
pub struct MappingResidual {
    pub order: u32,
    pub parts: Vec<MixedPoly>,
}

impl MappingResidual {
    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.is_zero())
    }

    pub fn first_nonzero_order(&self) -> Option<u32> {
        self.parts.iter().enumerate().find(|(_, p)| !p.is_zero()).map(|(s, _)| s as u32)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixedTermJson {
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
    pub u: u32,
    pub coeff: [String; 4],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualJson {
    pub order: u32,
    pub parts: Vec<Vec<MixedTermJson>>,
}

impl MappingResidual {
    pub fn to_json(&self) -> ResidualJson {
        ResidualJson {
            order: self.order,
            parts: self
                .parts
                .iter()
                .map(|p| {
                    p.c.iter()
                        .map(|(k, v)| MixedTermJson {
                            z: k.0.clone(),
                            zbar: k.1.clone(),
                            u: k.2,
                            coeff: exactc_strings(v),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ResidualJson, nz: usize) -> Result<Self> {
        let mut parts = Vec::new();
        for terms in &j.parts {
            let mut p = MixedPoly::new(nz);
            for t in terms {
                p.add_term((t.z.clone(), t.zbar.clone(), t.u), exactc_from_strings(&t.coeff)?);
            }
            parts.push(p);
        }
        Ok(MappingResidual { order: j.order, parts })
    }
}

fn model_dims(f: &HoloMap) -> Result<(usize, usize)> {
    match (f.source, f.target) {
        (DomainSpec::Heisenberg { n }, DomainSpec::HeisenbergSig1 { n: nn }) => Ok((n, nn)),
        _ => Err(Error::DomainMismatch(format!(
            "expected Heisenberg -> HeisenbergSig1, got {:?} -> {:?}",
            f.source, f.target
        ))),
    }
}

fn expand_components(f: &HoloMap, order: u32) -> Result<Vec<TruncSeries>> {
    let (n, _) = model_dims(f)?;
    let mut weights = vec![1u32; n - 1];
    weights.push(2);
    let template = TruncSeries::zero(&weights, order);
    let vars: Vec<TruncSeries> =
        (0..n).map(|j| TruncSeries::variable(&weights, order, j)).collect();
    f.eval_generic(&vars, &template).map_err(|e| match e {
        Error::Pole | Error::BranchPoint => Error::NotAnalyticAtOrigin,
        other => other,
    })
}

/// Weighted-homogeneous parts of the target defining function of F
/// restricted to the source model hypersurface, through the given order.
pub fn mapping_residual(f: &HoloMap, order: u32) -> Result<MappingResidual> {
    let (_, nn) = model_dims(f)?;
    let comps = expand_components(f, order)?;
    let g = &comps[nn - 1];
    // Im g  =  (g - ḡ) / 2i
    let half_over_i = ExactC { re: Quad::zero(), im: Quad::rational(num_rational::Ratio::new(
        num_bigint::BigInt::from(-1),
        num_bigint::BigInt::from(2),
    )) };
    let gm = restrict_to_model(g, false, order);
    let gc = restrict_to_model(g, true, order);
    let mut residual = gm.sub(&gc);
    for v in residual.c.values_mut() {
        *v = v.mul(&half_over_i);
    }
    // minus the signed pairing of the first nn-1 components; last slot negative
    for (idx, zeta) in comps[..nn - 1].iter().enumerate() {
        let a = restrict_to_model(zeta, false, order);
        let b = restrict_to_model(zeta, true, order);
        let prod = a.mul(&b, order);
        residual = if idx == nn - 2 { residual.add(&prod) } else { residual.sub(&prod) };
    }
    let parts = (0..=order).map(|s| residual.graded_part(s)).collect();
    Ok(MappingResidual { order, parts })
}

/// Model map (z_1..z_{n-1}, phis..., w) from Heisenberg(n) into
/// HeisenbergSig1(n + #phis).
pub fn model_map(n: usize, phis: Vec<HoloExpr>, name: &str) -> Result<HoloMap> {
    let nn = n + phis.len();
    let mut comps: Vec<HoloExpr> = (0..n - 1).map(var).collect();
    comps.extend(phis);
    comps.push(var(n - 1));
    HoloMap::from_components(
        DomainSpec::Heisenberg { n },
        DomainSpec::HeisenbergSig1 { n: nn },
        comps,
        Some(name.into()),
    )
}

#[derive(Clone, Debug)]
pub struct NormalFormReport {
    /// a^(1) as a matrix: row j holds the z-coefficients of a_j.
    pub a1: Vec<Vec<ExactC>>,
    /// quadratic jets of the middle block, as polynomials in z only
    pub phi2: Vec<MixedPoly>,
    pub constraint_holds: bool,
    pub mismatch: MixedPoly,
}

/// Check the low-order normalization f = z + (i/2)a^(1)(z)w + o_wt(3),
/// phi = phi^(2)(z) + o_wt(2), g = w + o_wt(4), then test the jet
/// constraint <a^(1)(z), z̄>|z|^2 = <phi^(2), conj(phi^(2))>_1.
pub fn normal_form_check(f: &HoloMap, order: u32) -> Result<NormalFormReport> {
    let (n, nn) = model_dims(f)?;
    let order = order.max(4);
    let comps = expand_components(f, order)?;
    let nz = n - 1;
    let fblock = &comps[..nz];
    let phiblock = &comps[nz..nn - 1];
    let g = &comps[nn - 1];

    let violation = |what: &str| Err(Error::NotNormalForm(what.to_string()));

    for (j, fj) in fblock.iter().enumerate() {
        let lin = fj.graded_part(1);
        let want = TruncSeries::variable(&fj.weights, fj.order, j);
        if lin != want {
            return violation(&format!("f_{} linear part is not z_{}", j + 1, j + 1));
        }
        if !fj.graded_part(2).is_zero() {
            return violation(&format!("f_{} has a weighted order-2 jet", j + 1));
        }
        for (m, v) in &fj.graded_part(3).c {
            if m[nz] == 0 && !v.is_zero() {
                return violation(&format!("f_{} has a cubic jet in z alone", j + 1));
            }
        }
    }
    for (i, phi) in phiblock.iter().enumerate() {
        if !phi.graded_part(1).is_zero() {
            return violation(&format!("phi_{} has a linear jet", i + 1));
        }
        for (m, v) in &phi.graded_part(2).c {
            if m[nz] > 0 && !v.is_zero() {
                return violation(&format!("phi_{} order-2 jet contains w", i + 1));
            }
        }
    }
    {
        let mut w_only = TruncSeries::zero(&g.weights, g.order);
        let mut m = vec![0u32; nz + 1];
        m[nz] = 1;
        w_only.c.insert(m, ExactC::one());
        if g.graded_part(2) != w_only {
            return violation("g order-2 jet is not w");
        }
        for s in [1u32, 3, 4] {
            if !g.graded_part(s).is_zero() {
                return violation(&format!("g has a weighted order-{s} jet"));
            }
        }
    }

    // a_jk = -2i * coefficient of z_k w in f_j
    let minus_2i = ExactC { re: Quad::zero(), im: Quad::rational(num_rational::Ratio::from(
        num_bigint::BigInt::from(-2),
    )) };
    let mut a1 = vec![vec![ExactC::zero(); nz]; nz];
    for (j, fj) in fblock.iter().enumerate() {
        for k in 0..nz {
            let mut m = vec![0u32; nz + 1];
            m[k] = 1;
            m[nz] = 1;
            if let Some(c) = fj.c.get(&m) {
                a1[j][k] = c.mul(&minus_2i);
            }
        }
    }
    let phi2: Vec<MixedPoly> = phiblock
        .iter()
        .map(|p| restrict_to_model(&p.graded_part(2), false, order))
        .collect();

    // LHS: Σ_j a_j(z) z̄_j * |z|^2
    let mut lhs = MixedPoly::new(nz);
    for j in 0..nz {
        for (k, c) in a1[j].iter().enumerate() {
            let mut ez = vec![0u32; nz];
            ez[k] = 1;
            let mut eb = vec![0u32; nz];
            eb[j] = 1;
            lhs.add_term((ez, eb, 0), c.clone());
        }
    }
    let mut norm = MixedPoly::new(nz);
    for l in 0..nz {
        let mut e = vec![0u32; nz];
        e[l] = 1;
        norm.add_term((e.clone(), e, 0), ExactC::one());
    }
    let lhs = lhs.mul(&norm, order);

    // RHS: signed pairing of the phi jets; the last middle slot is the
    // negative one exactly when the middle block reaches the final zeta slot
    let mut rhs = MixedPoly::new(nz);
    for (i, p2) in phi2.iter().enumerate() {
        let conj = {
            let mut q = MixedPoly::new(nz);
            for (k, v) in &p2.c {
                q.add_term((k.1.clone(), k.0.clone(), k.2), v.conj());
            }
            q
        };
        let prod = p2.mul(&conj, order);
        let slot = nz + i;
        rhs = if slot == nn - 2 { rhs.sub(&prod) } else { rhs.add(&prod) };
    }

    let mismatch = lhs.sub(&rhs);
    Ok(NormalFormReport { a1, phi2, constraint_holds: mismatch.is_zero(), mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{add, cst, mul, neg, HoloExpr};
    use crate::C64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn zero_expr() -> HoloExpr {
        cst(ExactC::zero())
    }

    #[test]
    fn linear_embedding_residual_vanishes() {
        for n in [2usize, 3] {
            let f = model_map(n, vec![zero_expr()], "linear").unwrap();
            let r = mapping_residual(&f, 8).unwrap();
            assert!(r.is_zero());
        }
    }

    #[test]
    fn paired_slots_cancel() {
        // (z, psi, psi, w) with psi in {z1^2, z1 z2, w}
        let psis: Vec<HoloExpr> = vec![
            mul(vec![var(0), var(0)]),
            mul(vec![var(0), var(1)]),
            var(2),
        ];
        for psi in psis {
            let f = model_map(3, vec![psi.clone(), psi], "paired").unwrap();
            let r = mapping_residual(&f, 8).unwrap();
            assert!(r.is_zero());
        }
    }

    #[test]
    fn broken_map_detected_at_order_four() {
        let f = model_map(2, vec![mul(vec![var(0), var(0)])], "broken").unwrap();
        let r = mapping_residual(&f, 8).unwrap();
        assert!(!r.is_zero());
        assert_eq!(r.first_nonzero_order(), Some(4));
        // the order-4 part is exactly |z1^2|^2 = z1^2 zbar1^2
        let p = &r.parts[4];
        assert_eq!(p.c.len(), 1);
        assert_eq!(p.c.get(&(vec![2], vec![2], 0)), Some(&ExactC::one()));
    }

    #[test]
    fn cayley_conjugated_linear_embedding_is_flat() {
        // sigma^-1 . E . sigma built from the raw rational formulas; it
        // simplifies to (z, 0, w) but the series pipeline must see that
        // through the divisions.
        let n = 3usize;
        let i = cst(ExactC::i());
        let one = cst(ExactC::one());
        let half = cst(ExactC::from_ratio(1, 2));
        let w = var(n - 1);
        let den = add(vec![one.clone(), neg(mul(vec![i.clone(), w.clone()]))]); // 1 - iw
        let eta_n = HoloExpr::Div(
            Box::new(add(vec![one.clone(), mul(vec![i.clone(), w.clone()])])),
            Box::new(den.clone()),
        );
        // w' = -i (eta_n - 1) / (eta_n + 1)
        let wp = mul(vec![
            neg(i.clone()),
            HoloExpr::Div(
                Box::new(add(vec![eta_n.clone(), neg(one.clone())])),
                Box::new(add(vec![eta_n, one.clone()])),
            ),
        ]);
        // (1 - iw')/2
        let scale = mul(vec![half, add(vec![one, neg(mul(vec![i, wp.clone()]))])]);
        let mut comps: Vec<HoloExpr> = Vec::new();
        for j in 0..n - 1 {
            let eta_j = HoloExpr::Div(
                Box::new(mul(vec![cst(ExactC::from_int(2)), var(j)])),
                Box::new(den.clone()),
            );
            comps.push(mul(vec![eta_j, scale.clone()]));
        }
        comps.push(zero_expr());
        comps.push(wp);
        let f = HoloMap::from_components(
            DomainSpec::Heisenberg { n },
            DomainSpec::HeisenbergSig1 { n: n + 1 },
            comps,
            Some("cayley conjugated linear".into()),
        )
        .unwrap();
        let r = mapping_residual(&f, 8).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn flat_residual_implies_numeric_properness() {
        let f = model_map(3, vec![mul(vec![var(0), var(1)]), mul(vec![var(0), var(1)])], "paired").unwrap();
        assert!(mapping_residual(&f, 8).unwrap().is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z: Vec<C64> = (0..2)
                .map(|_| C64::new(0.1 * (rng.gen::<f64>() - 0.5), 0.1 * (rng.gen::<f64>() - 0.5)))
                .collect();
            let u = 0.1 * (rng.gen::<f64>() - 0.5);
            let v: f64 = z.iter().map(|c| c.norm_sqr()).sum();
            let mut p = z.clone();
            p.push(C64::new(u, v));
            let q = f.eval(&p).unwrap();
            let d = f.target.defining_values(&q).unwrap()[0];
            assert!(d.abs() <= 1e-8, "{d}");
        }
    }

    #[test]
    fn normal_form_examples() {
        // (z, 0, w): everything vanishes
        let f = model_map(2, vec![zero_expr()], "linear").unwrap();
        let rep = normal_form_check(&f, 8).unwrap();
        assert!(rep.a1.iter().flatten().all(|c| c.is_zero()));
        assert!(rep.phi2.iter().all(|p| p.is_zero()));
        assert!(rep.constraint_holds);

        // (z, z1^2, z1^2, w): constraint 0 = |z1^2|^2 - |z1^2|^2
        let psi = mul(vec![var(0), var(0)]);
        let f = model_map(2, vec![psi.clone(), psi], "paired").unwrap();
        let rep = normal_form_check(&f, 8).unwrap();
        assert!(rep.a1.iter().flatten().all(|c| c.is_zero()));
        assert!(rep.constraint_holds);

        // (z + zw, 0, w): matches the a^(1) slot but the constraint fails
        // with mismatch -2i |z|^4
        let f = HoloMap::from_components(
            DomainSpec::Heisenberg { n: 2 },
            DomainSpec::HeisenbergSig1 { n: 3 },
            vec![add(vec![var(0), mul(vec![var(0), var(1)])]), zero_expr(), var(1)],
            Some("tilted".into()),
        )
        .unwrap();
        let rep = normal_form_check(&f, 8).unwrap();
        let minus_2i = ExactC::i().mul(&ExactC::from_int(-2));
        assert_eq!(rep.a1, vec![vec![minus_2i.clone()]]);
        assert!(!rep.constraint_holds);
        assert_eq!(rep.mismatch.c.get(&(vec![2], vec![2], 0)), Some(&minus_2i));

        // violations are reported with the offending jet
        let f = model_map(2, vec![var(0)], "linear phi").unwrap();
        assert!(matches!(normal_form_check(&f, 8), Err(Error::NotNormalForm(_))));
    }

    #[test]
    fn residual_json_roundtrip() {
        let f = model_map(2, vec![mul(vec![var(0), var(0)])], "broken").unwrap();
        let r = mapping_residual(&f, 6).unwrap();
        let j = r.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let back = MappingResidual::from_json(&serde_json::from_str(&s).unwrap(), 1).unwrap();
        assert_eq!(back.parts, r.parts);
    }
}
