//! Holomorphic maps as expression trees, the named map catalog, evaluation
//! over any scalar backend, and dual-number Jacobians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{CDual, CScalar};
use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::exact::ExactC;
use crate::groups::Automorphism;
use crate::linalg::CMat;
use crate::C64;

#[derive(Clone, Debug)]
pub enum HoloExpr {
    Const(ExactC),
    Var(usize),
    Add(Vec<HoloExpr>),
    Mul(Vec<HoloExpr>),
    Neg(Box<HoloExpr>),
    Div(Box<HoloExpr>, Box<HoloExpr>),
    Sqrt(Box<HoloExpr>),
    Pow(Box<HoloExpr>, u32),
}

impl HoloExpr {
    pub fn eval<S: CScalarExt>(&self, vars: &[S], template: &S) -> Result<S> {
        Ok(match self {
            HoloExpr::Const(c) => template.lift_exact(c),
            HoloExpr::Var(j) => {
                if *j >= vars.len() {
                    return Err(Error::DimensionMismatch { expected: vars.len(), got: *j + 1 });
                }
                vars[*j].clone()
            }
            HoloExpr::Add(es) => {
                let mut acc = template.lift(C64::new(0.0, 0.0));
                for e in es {
                    acc = acc.add(&e.eval(vars, template)?);
                }
                acc
            }
            HoloExpr::Mul(es) => {
                let mut acc = template.lift(C64::new(1.0, 0.0));
                for e in es {
                    acc = acc.mul(&e.eval(vars, template)?);
                }
                acc
            }
            HoloExpr::Neg(e) => e.eval(vars, template)?.neg(),
            HoloExpr::Div(a, b) => a.eval(vars, template)?.div(&b.eval(vars, template)?)?,
            HoloExpr::Sqrt(e) => e.eval(vars, template)?.sqrt()?,
            HoloExpr::Pow(e, k) => e.eval(vars, template)?.powi(*k),
        })
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            HoloExpr::Const(_) => None,
            HoloExpr::Var(j) => Some(*j),
            HoloExpr::Add(es) | HoloExpr::Mul(es) => es.iter().filter_map(|e| e.max_var()).max(),
            HoloExpr::Neg(e) | HoloExpr::Sqrt(e) | HoloExpr::Pow(e, _) => e.max_var(),
            HoloExpr::Div(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        match self {
            HoloExpr::Const(_) | HoloExpr::Var(_) => true,
            HoloExpr::Add(es) | HoloExpr::Mul(es) => es.iter().all(|e| e.is_polynomial()),
            HoloExpr::Neg(e) | HoloExpr::Pow(e, _) => e.is_polynomial(),
            HoloExpr::Div(_, _) | HoloExpr::Sqrt(_) => false,
        }
    }
}

/// Extension of the scalar trait: constants may carry exact √2 content that
/// plain `lift` (through f64) would lose; backends that care override this.
pub trait CScalarExt: CScalar {
    fn lift_exact(&self, c: &ExactC) -> Self {
        self.lift(c.to_c64())
    }
}
impl CScalarExt for C64 {}
impl CScalarExt for CDual {}

#[derive(Clone, Debug)]
pub enum MapBody {
    Components(Vec<HoloExpr>),
    Composed {
        pre: Option<Automorphism>,
        inner: Box<HoloMap>,
        post: Option<Automorphism>,
    },
}

#[derive(Clone, Debug)]
pub struct HoloMap {
    pub source: DomainSpec,
    pub target: DomainSpec,
    pub body: MapBody,
    pub name: Option<String>,
}

impl HoloMap {
    pub fn from_components(
        source: DomainSpec,
        target: DomainSpec,
        components: Vec<HoloExpr>,
        name: Option<String>,
    ) -> Result<Self> {
        if components.len() != target.dim() {
            return Err(Error::DimensionMismatch { expected: target.dim(), got: components.len() });
        }
        for c in &components {
            if let Some(j) = c.max_var() {
                if j >= source.dim() {
                    return Err(Error::DimensionMismatch { expected: source.dim(), got: j + 1 });
                }
            }
        }
        Ok(HoloMap { source, target, body: MapBody::Components(components), name })
    }

    /// The automorphism as a self-map of its domain.
    pub fn from_automorphism(a: &Automorphism) -> Self {
        let d = a.group.domain();
        let ident: Vec<HoloExpr> = (0..d.dim()).map(HoloExpr::Var).collect();
        HoloMap {
            source: d,
            target: d,
            body: MapBody::Composed {
                pre: Some(a.clone()),
                inner: Box::new(HoloMap {
                    source: d,
                    target: d,
                    body: MapBody::Components(ident),
                    name: None,
                }),
                post: None,
            },
            name: None,
        }
    }

    pub fn components(&self) -> Result<&[HoloExpr]> {
        match &self.body {
            MapBody::Components(c) => Ok(c),
            MapBody::Composed { .. } => Err(Error::NotPolynomial),
        }
    }

    pub fn eval_generic<S: CScalarExt>(&self, z: &[S], template: &S) -> Result<Vec<S>> {
        if z.len() != self.source.dim() {
            return Err(Error::DimensionMismatch { expected: self.source.dim(), got: z.len() });
        }
        match &self.body {
            MapBody::Components(cs) => cs.iter().map(|c| c.eval(z, template)).collect(),
            MapBody::Composed { pre, inner, post } => {
                let p = match pre {
                    Some(a) => a.apply_generic(z, template)?,
                    None => z.to_vec(),
                };
                let q = inner.eval_generic(&p, template)?;
                match post {
                    Some(a) => a.apply_generic(&q, template),
                    None => Ok(q),
                }
            }
        }
    }

    pub fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        self.eval_generic(z, &C64::new(0.0, 0.0))
    }

    /// Holomorphic Jacobian with entry (a, j) = ∂f_a/∂z_j, by one
    /// dual-number pass per source variable.
    pub fn jacobian(&self, z: &[C64]) -> Result<CMat> {
        let n = self.source.dim();
        let m = self.target.dim();
        let mut jac = DMatrix::zeros(m, n);
        for j in 0..n {
            let vars: Vec<CDual> = z
                .iter()
                .enumerate()
                .map(|(i, &v)| CDual::new(v, if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
                .collect();
            let out = self.eval_generic(&vars, &CDual::constant(C64::new(0.0, 0.0)))?;
            for a in 0..m {
                jac[(a, j)] = out[a].d;
            }
        }
        Ok(jac)
    }

    /// |(1 − |z|²)^p − (1 − f f̄ᵗ + ¼|f fᵗ|²)| at z, for maps into TypeIV.
    pub fn kernel_identity_residual(&self, z: &[C64], p: u32) -> Result<f64> {
        if !matches!(self.target, DomainSpec::TypeIv { .. }) {
            return Err(Error::DomainMismatch("kernel identity needs a TypeIV target".into()));
        }
        let f = self.eval(z)?;
        let ffbar: f64 = f.iter().map(|c| c.norm_sqr()).sum();
        let fft: C64 = f.iter().map(|c| c * c).sum();
        let lhs = (1.0 - z.iter().map(|c| c.norm_sqr()).sum::<f64>()).powi(p as i32);
        Ok((lhs - (1.0 - ffbar + 0.25 * fft.norm_sqr())).abs())
    }
}

/// Equivalence composition post ∘ f ∘ pre.
pub fn compose_autos(
    pre: Option<&Automorphism>,
    f: &HoloMap,
    post: Option<&Automorphism>,
) -> Result<HoloMap> {
    if let Some(a) = pre {
        if a.group.domain() != f.source {
            return Err(Error::DomainMismatch("pre-automorphism acts on the wrong domain".into()));
        }
    }
    if let Some(a) = post {
        if a.group.domain() != f.target {
            return Err(Error::DomainMismatch("post-automorphism acts on the wrong domain".into()));
        }
    }
    Ok(HoloMap {
        source: f.source,
        target: f.target,
        body: MapBody::Composed {
            pre: pre.cloned(),
            inner: Box::new(f.clone()),
            post: post.cloned(),
        },
        name: f.name.clone(),
    })
}

// --- expression builders -------------------------------------------------

pub fn var(j: usize) -> HoloExpr {
    HoloExpr::Var(j)
}
pub fn cst(e: ExactC) -> HoloExpr {
    HoloExpr::Const(e)
}
pub fn add(es: Vec<HoloExpr>) -> HoloExpr {
    HoloExpr::Add(es)
}
pub fn mul(es: Vec<HoloExpr>) -> HoloExpr {
    HoloExpr::Mul(es)
}
pub fn neg(e: HoloExpr) -> HoloExpr {
    HoloExpr::Neg(Box::new(e))
}
pub fn div(a: HoloExpr, b: HoloExpr) -> HoloExpr {
    HoloExpr::Div(Box::new(a), Box::new(b))
}
pub fn sqrt(e: HoloExpr) -> HoloExpr {
    HoloExpr::Sqrt(Box::new(e))
}
pub fn pow(e: HoloExpr, k: u32) -> HoloExpr {
    HoloExpr::Pow(Box::new(e), k)
}

/// Σ z_j² over the given variable indices.
fn sum_sq(idx: std::ops::Range<usize>) -> HoloExpr {
    add(idx.map(|j| pow(var(j), 2)).collect())
}

// --- catalog --------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum CatalogKey {
    Riv { n: usize },
    Itheta { n: usize, theta: f64 },
    Izero { n: usize },
    Lembed { m: usize },
    Flat { n: usize, m: usize },
    WhitneyIv { n: usize },
    Gk { k: u32 },
    PsiDegenerate { n: usize, m: usize, psi: Box<HoloExpr> },
    Exhp0 { n: usize },
    ClassB { n: usize },
}

impl CatalogKey {
    /// Canonical string form, parseable back by `parse`.
    pub fn key_string(&self) -> String {
        match self {
            CatalogKey::Riv { n } => format!("RIV:n={n}"),
            CatalogKey::Itheta { n, theta } => format!("Itheta:n={n},theta={theta}"),
            CatalogKey::Izero { n } => format!("Izero:n={n}"),
            CatalogKey::Lembed { m } => format!("L:m={m}"),
            CatalogKey::Flat { n, m } => format!("flat:n={n},m={m}"),
            CatalogKey::WhitneyIv { n } => format!("whitneyIV:n={n}"),
            CatalogKey::Gk { k } => format!("Gk:k={k}"),
            CatalogKey::PsiDegenerate { n, m, .. } => format!("psi:n={n},m={m}"),
            CatalogKey::Exhp0 { n } => format!("exhp0:n={n}"),
            CatalogKey::ClassB { n } => format!("classB:n={n}"),
        }
    }

    pub fn parse(s: &str) -> Result<CatalogKey> {
        let bad = || Error::Invalid(format!("unrecognized catalog key '{s}'"));
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get_usize = |k: &str| -> Result<usize> {
            params
                .get(k)
                .ok_or_else(|| Error::Invalid(format!("catalog key '{s}' is missing {k}")))?
                .parse::<usize>()
                .map_err(|_| Error::Invalid(format!("bad {k} in '{s}'")))
        };
        Ok(match family {
            "RIV" => CatalogKey::Riv { n: get_usize("n")? },
            "Itheta" => {
                let theta = parse_angle(
                    params
                        .get("theta")
                        .ok_or_else(|| Error::Invalid(format!("'{s}' is missing theta")))?,
                )?;
                CatalogKey::Itheta { n: get_usize("n")?, theta }
            }
            "Izero" => CatalogKey::Izero { n: get_usize("n")? },
            "L" => CatalogKey::Lembed { m: get_usize("m")? },
            "flat" => CatalogKey::Flat { n: get_usize("n")?, m: get_usize("m")? },
            "whitneyIV" => CatalogKey::WhitneyIv { n: get_usize("n")? },
            "Gk" => CatalogKey::Gk { k: get_usize("k")? as u32 },
            "psi" => {
                // default degenerate witness psi = z_1
                let n = get_usize("n").unwrap_or(1);
                CatalogKey::PsiDegenerate { n, m: get_usize("m")?, psi: Box::new(var(0)) }
            }
            "exhp0" => CatalogKey::Exhp0 { n: get_usize("n")? },
            "classB" => CatalogKey::ClassB { n: get_usize("n")? },
            _ => return Err(bad()),
        })
    }
}

/// Accepts decimal radians or "pi/6"-style fractions (also "2pi/5", "pi").
pub fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Ok(x);
    }
    let lower = s.to_ascii_lowercase();
    if let Some(pos) = lower.find("pi") {
        let coef = &lower[..pos];
        let coef: f64 = if coef.is_empty() || coef == "+" {
            1.0
        } else if coef == "-" {
            -1.0
        } else {
            coef.parse().map_err(|_| Error::Invalid(format!("bad angle '{s}'")))?
        };
        let rest = &lower[pos + 2..];
        let denom: f64 = if rest.is_empty() {
            1.0
        } else if let Some(d) = rest.strip_prefix('/') {
            d.parse().map_err(|_| Error::Invalid(format!("bad angle '{s}'")))?
        } else {
            return Err(Error::Invalid(format!("bad angle '{s}'")));
        };
        return Ok(coef * std::f64::consts::PI / denom);
    }
    Err(Error::Invalid(format!("bad angle '{s}'")))
}

/// Names of the catalog families with their parameter grammar.
pub fn catalog_list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("RIV:n=<n>", "rational isometry B^n -> D^IV_{n+1}, n >= 2"),
        ("Itheta:n=<n>,theta=<t>", "irrational isometry family, theta in [0, pi/4)"),
        ("Izero:n=<n>", "the theta = 0 member, (z', 1 - sqrt(1 - z.z), z_n)"),
        ("L:m=<m>", "embedding D^IV_m -> B^{m+1}_1, ((z.z)/2, z)"),
        ("flat:n=<n>,m=<m>", "polynomial isometry B^n -> D^IV_m, m >= n+2"),
        ("whitneyIV:n=<n>", "Whitney-based proper non-isometry B^n -> D^IV_{2n}"),
        ("Gk:k=<k>", "disc example (z^k, 1 - sqrt(1 - z^{2k})), isometry iff k = 1"),
        ("psi:n=<n>,m=<m>", "degenerate boundary map ((1+psi)/sqrt2, (1-psi)/sqrt(-2), 0...)"),
        ("exhp0:n=<n>", "proper map B^n -> D^IV_{4n-1} with an indefinite kernel form"),
        ("classB:n=<n>", "(z, 1 - sqrt(1 - z.z)), the second canonical family"),
    ]
}

pub fn catalog_build(key: &CatalogKey) -> Result<HoloMap> {
    let name = Some(key.key_string());
    match key {
        CatalogKey::Riv { n } => {
            let n = *n;
            require(n >= 2, "RIV needs n >= 2")?;
            let zn = var(n - 1);
            let half_sum = mul(vec![cst(ExactC::from_ratio(1, 2)), sum_sq(0..n - 1)]);
            let p_n = add(vec![half_sum.clone(), neg(pow(zn.clone(), 2)), zn.clone()]);
            let p_n1 = mul(vec![
                cst(ExactC::i().neg()),
                add(vec![half_sum, pow(zn.clone(), 2), neg(zn.clone())]),
            ]);
            let q = mul(vec![
                cst(ExactC::sqrt2_ratio(1, 1)),
                add(vec![cst(ExactC::one()), neg(zn)]),
            ]);
            let mut comps: Vec<HoloExpr> = (0..n - 1).map(var).collect();
            comps.push(div(p_n, q.clone()));
            comps.push(div(p_n1, q));
            HoloMap::from_components(
                DomainSpec::UnitBall { n },
                DomainSpec::TypeIv { m: n + 1 },
                comps,
                name,
            )
        }
        CatalogKey::Itheta { n, theta } => {
            let (n, th) = (*n, *theta);
            require(n >= 2, "Itheta needs n >= 2")?;
            require(
                (0.0..std::f64::consts::FRAC_PI_4).contains(&th),
                "Itheta needs theta in [0, pi/4)",
            )?;
            let cos_t = ExactC::from_c64(C64::new(th.cos(), 0.0));
            let i_sin_t = ExactC::from_c64(C64::new(0.0, th.sin()));
            let cos_2t = ExactC::from_c64(C64::new((2.0 * th).cos(), 0.0));
            let two_i_sin_2t = ExactC::from_c64(C64::new(0.0, 2.0 * (2.0 * th).sin()));
            let zn = var(n - 1);
            let h = add(vec![
                cst(ExactC::one()),
                mul(vec![cst(two_i_sin_2t), zn.clone()]),
                neg(pow(zn.clone(), 2)),
                neg(mul(vec![cst(cos_2t.clone()), sum_sq(0..n - 1)])),
            ]);
            let root = sqrt(h);
            let f_n = div(
                add(vec![
                    cst(cos_t.clone()),
                    mul(vec![cst(i_sin_t.clone()), zn.clone()]),
                    neg(mul(vec![cst(cos_t.clone()), root.clone()])),
                ]),
                cst(cos_2t.clone()),
            );
            let f_n1 = div(
                add(vec![
                    cst(i_sin_t.clone().neg()),
                    mul(vec![cst(cos_t), zn]),
                    mul(vec![cst(i_sin_t), root]),
                ]),
                cst(cos_2t),
            );
            let mut comps: Vec<HoloExpr> = (0..n - 1).map(var).collect();
            comps.push(f_n);
            comps.push(f_n1);
            HoloMap::from_components(
                DomainSpec::UnitBall { n },
                DomainSpec::TypeIv { m: n + 1 },
                comps,
                name,
            )
        }
        CatalogKey::Izero { n } => {
            let n = *n;
            require(n >= 2, "Izero needs n >= 2")?;
            let mut comps: Vec<HoloExpr> = (0..n - 1).map(var).collect();
            comps.push(add(vec![
                cst(ExactC::one()),
                neg(sqrt(add(vec![cst(ExactC::one()), neg(sum_sq(0..n))]))),
            ]));
            comps.push(var(n - 1));
            HoloMap::from_components(
                DomainSpec::UnitBall { n },
                DomainSpec::TypeIv { m: n + 1 },
                comps,
                name,
            )
        }
        CatalogKey::Lembed { m } => {
            let m = *m;
            require(m >= 1, "L needs m >= 1")?;
            let mut comps = vec![mul(vec![cst(ExactC::from_ratio(1, 2)), sum_sq(0..m)])];
            comps.extend((0..m).map(var));
            HoloMap::from_components(
                DomainSpec::TypeIv { m },
                DomainSpec::GeneralizedBall { n: m, l: 1 },
                comps,
                name,
            )
        }
        CatalogKey::Flat { n, m } => {
            let (n, m) = (*n, *m);
            require(n >= 1 && m >= n + 2, "flat needs m >= n + 2")?;
            let s = sum_sq(0..n);
            let mut comps: Vec<HoloExpr> = (0..n).map(var).collect();
            comps.push(mul(vec![cst(ExactC::sqrt2_ratio(1, 4)), s.clone()]));
            comps.push(mul(vec![cst(ExactC::i_sqrt2_ratio(1, 4)), s]));
            comps.extend(std::iter::repeat_with(|| cst(ExactC::zero())).take(m - n - 2));
            HoloMap::from_components(
                DomainSpec::UnitBall { n },
                DomainSpec::TypeIv { m },
                comps,
                name,
            )
        }
        CatalogKey::WhitneyIv { n } => {
            let n = *n;
            require(n >= 2, "whitneyIV needs n >= 2")?;
            let zn = var(n - 1);
            let mut comps: Vec<HoloExpr> = (0..n - 1).map(var).collect();
            comps.extend((0..n - 1).map(|j| mul(vec![var(j), zn.clone()])));
            comps.push(pow(zn.clone(), 2));
            let s1 = sum_sq(0..n - 1);
            let sum_h_sq = add(vec![
                s1.clone(),
                mul(vec![s1, pow(zn.clone(), 2)]),
                pow(zn, 4),
            ]);
            comps.push(add(vec![
                cst(ExactC::one()),
                neg(sqrt(add(vec![cst(ExactC::one()), neg(sum_h_sq)]))),
            ]));
            HoloMap::from_components(
                DomainSpec::UnitBall { n },
                DomainSpec::TypeIv { m: 2 * n },
                comps,
                name,
            )
        }
        CatalogKey::Gk { k } => {
            let k = *k;
            require(k >= 1, "Gk needs k >= 1")?;
            let comps = vec![
                pow(var(0), k),
                add(vec![
                    cst(ExactC::one()),
                    neg(sqrt(add(vec![cst(ExactC::one()), neg(pow(var(0), 2 * k))]))),
                ]),
            ];
            HoloMap::from_components(
                DomainSpec::UnitBall { n: 1 },
                DomainSpec::TypeIv { m: 2 },
                comps,
                name,
            )
        }
        CatalogKey::PsiDegenerate { n, m, psi } => {
            let (n, m) = (*n, *m);
            require(m >= 2, "psi map needs m >= 2")?;
            if let Some(j) = psi.max_var() {
                require(j < n, "psi uses more variables than the source has")?;
            }
            let mut comps = vec![
                mul(vec![
                    cst(ExactC::sqrt2_ratio(1, 2)),
                    add(vec![cst(ExactC::one()), (**psi).clone()]),
                ]),
                mul(vec![
                    cst(ExactC::i_sqrt2_ratio(-1, 2)),
                    add(vec![cst(ExactC::one()), neg((**psi).clone())]),
                ]),
            ];
            comps.extend(std::iter::repeat_with(|| cst(ExactC::zero())).take(m - 2));
            HoloMap::from_components(
                DomainSpec::UnitBall { n },
                DomainSpec::TypeIv { m },
                comps,
                name,
            )
        }
        CatalogKey::Exhp0 { n } => {
            let n = *n;
            require(n >= 2, "exhp0 needs n >= 2")?;
            let zn = var(n - 1);
            let mut comps = vec![zn.clone()];
            for j in 0..n - 1 {
                comps.push(mul(vec![cst(ExactC::sqrt2_ratio(1, 2)), var(j)]));
                comps.push(mul(vec![cst(ExactC::i_sqrt2_ratio(-1, 2)), var(j)]));
            }
            for j in 0..n - 1 {
                comps.push(mul(vec![
                    cst(ExactC::sqrt2_ratio(1, 4)),
                    var(j),
                    pow(zn.clone(), 2),
                ]));
                comps.push(mul(vec![
                    cst(ExactC::i_sqrt2_ratio(-1, 4)),
                    var(j),
                    pow(zn.clone(), 2),
                ]));
            }
            comps.push(mul(vec![cst(ExactC::sqrt2_ratio(1, 4)), pow(zn.clone(), 3)]));
            comps.push(mul(vec![cst(ExactC::i_sqrt2_ratio(-1, 4)), pow(zn, 3)]));
            HoloMap::from_components(
                DomainSpec::UnitBall { n },
                DomainSpec::TypeIv { m: 4 * n - 1 },
                comps,
                name,
            )
        }
        CatalogKey::ClassB { n } => {
            let n = *n;
            require(n >= 1, "classB needs n >= 1")?;
            let mut comps: Vec<HoloExpr> = (0..n).map(var).collect();
            comps.push(add(vec![
                cst(ExactC::one()),
                neg(sqrt(add(vec![cst(ExactC::one()), neg(sum_sq(0..n))]))),
            ]));
            HoloMap::from_components(
                DomainSpec::UnitBall { n },
                DomainSpec::TypeIv { m: n + 1 },
                comps,
                name,
            )
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(msg.into()))
    }
}

// --- JSON wire format -----------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExprJson {
    Const { re: f64, im: f64 },
    Var(usize),
    Add(Vec<ExprJson>),
    Mul(Vec<ExprJson>),
    Neg(Box<ExprJson>),
    Div(Box<ExprJson>, Box<ExprJson>),
    Sqrt(Box<ExprJson>),
    Pow(Box<ExprJson>, u32),
}

impl ExprJson {
    pub fn to_expr(&self) -> HoloExpr {
        match self {
            ExprJson::Const { re, im } => HoloExpr::Const(ExactC::from_c64(C64::new(*re, *im))),
            ExprJson::Var(j) => HoloExpr::Var(*j),
            ExprJson::Add(es) => HoloExpr::Add(es.iter().map(|e| e.to_expr()).collect()),
            ExprJson::Mul(es) => HoloExpr::Mul(es.iter().map(|e| e.to_expr()).collect()),
            ExprJson::Neg(e) => HoloExpr::Neg(Box::new(e.to_expr())),
            ExprJson::Div(a, b) => HoloExpr::Div(Box::new(a.to_expr()), Box::new(b.to_expr())),
            ExprJson::Sqrt(e) => HoloExpr::Sqrt(Box::new(e.to_expr())),
            ExprJson::Pow(e, k) => HoloExpr::Pow(Box::new(e.to_expr()), *k),
        }
    }

    pub fn from_expr(e: &HoloExpr) -> ExprJson {
        match e {
            HoloExpr::Const(c) => {
                let v = c.to_c64();
                ExprJson::Const { re: v.re, im: v.im }
            }
            HoloExpr::Var(j) => ExprJson::Var(*j),
            HoloExpr::Add(es) => ExprJson::Add(es.iter().map(ExprJson::from_expr).collect()),
            HoloExpr::Mul(es) => ExprJson::Mul(es.iter().map(ExprJson::from_expr).collect()),
            HoloExpr::Neg(e) => ExprJson::Neg(Box::new(ExprJson::from_expr(e))),
            HoloExpr::Div(a, b) => {
                ExprJson::Div(Box::new(ExprJson::from_expr(a)), Box::new(ExprJson::from_expr(b)))
            }
            HoloExpr::Sqrt(e) => ExprJson::Sqrt(Box::new(ExprJson::from_expr(e))),
            HoloExpr::Pow(e, k) => ExprJson::Pow(Box::new(ExprJson::from_expr(e)), *k),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub source: DomainSpec,
    pub target: DomainSpec,
    pub components: Vec<ExprJson>,
}

impl MapJson {
    pub fn to_map(&self) -> Result<HoloMap> {
        HoloMap::from_components(
            self.source,
            self.target,
            self.components.iter().map(|e| e.to_expr()).collect(),
            self.name.clone(),
        )
    }

    pub fn from_map(f: &HoloMap) -> Result<MapJson> {
        let comps = f.components()?;
        Ok(MapJson {
            name: f.name.clone(),
            source: f.source,
            target: f.target,
            components: comps.iter().map(ExprJson::from_expr).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{random_member, GroupTag};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn riv_values() {
        let f = catalog_build(&CatalogKey::Riv { n: 2 }).unwrap();
        let at0 = f.eval(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(at0.iter().all(|x| x.norm() < 1e-15));
        let v = f.eval(&[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((v[1] - c(0.25 * 2f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!(matches!(f.eval(&[c(0.0, 0.0), c(1.0, 0.0)]), Err(Error::Pole)));
    }

    #[test]
    fn izero_values() {
        let f = catalog_build(&CatalogKey::Izero { n: 3 }).unwrap();
        let v = f.eval(&[c(0.3, 0.0), c(0.0, 0.0), c(0.4, 0.0)]).unwrap();
        assert!((v[0] - c(0.3, 0.0)).norm() < 1e-15);
        assert!(v[1].norm() < 1e-15);
        assert!((v[2] - c(1.0 - 0.75f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!((v[3] - c(0.4, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn itheta_zero_is_izero() {
        let f = catalog_build(&CatalogKey::Itheta { n: 2, theta: 0.0 }).unwrap();
        let g = catalog_build(&CatalogKey::Izero { n: 2 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = DomainSpec::UnitBall { n: 2 };
        for _ in 0..50 {
            let z = d.sample_interior(&mut rng, 0.8).unwrap();
            let a = f.eval(&z).unwrap();
            let b = g.eval(&z).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gk_values() {
        let f = catalog_build(&CatalogKey::Gk { k: 1 }).unwrap();
        let v = f.eval(&[c(0.6, 0.0)]).unwrap();
        assert!((v[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(0.2, 0.0)).norm() < 1e-14);
        let j = f.jacobian(&[c(0.0, 0.0)]).unwrap();
        assert!((j[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(j[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn kernel_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (key, n) in [
            (CatalogKey::Izero { n: 3 }, 3usize),
            (CatalogKey::Flat { n: 2, m: 4 }, 2),
            (CatalogKey::Flat { n: 3, m: 6 }, 3),
            (CatalogKey::Riv { n: 3 }, 3),
            (CatalogKey::Itheta { n: 2, theta: 0.5 }, 2),
            (CatalogKey::ClassB { n: 2 }, 2),
        ] {
            let f = catalog_build(&key).unwrap();
            let d = DomainSpec::UnitBall { n };
            for _ in 0..30 {
                let z = d.sample_interior(&mut rng, 0.8).unwrap();
                assert!(
                    f.kernel_identity_residual(&z, 1).unwrap() < 1e-12,
                    "{key:?}"
                );
            }
        }
        // Gk(2): residual equals |(1-|z|^2) - (1-|z|^4)|
        let g2 = catalog_build(&CatalogKey::Gk { k: 2 }).unwrap();
        let r = g2.kernel_identity_residual(&[c(0.5, 0.0)], 1).unwrap();
        assert!((r - 0.1875).abs() < 1e-14);
        // ... and satisfies its own identity 1 - |z|^{2k}
        for _ in 0..20 {
            let z = DomainSpec::UnitBall { n: 1 }.sample_interior(&mut rng, 0.8).unwrap();
            let f = g2.eval(&z).unwrap();
            let lhs = 1.0 - z[0].norm_sqr().powi(2);
            let ffbar: f64 = f.iter().map(|x| x.norm_sqr()).sum();
            let fft: C64 = f.iter().map(|x| x * x).sum();
            assert!((lhs - (1.0 - ffbar + 0.25 * fft.norm_sqr())).abs() < 1e-12);
        }
    }

    #[test]
    fn whitney_and_exhp0_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 3;
        let w = catalog_build(&CatalogKey::WhitneyIv { n }).unwrap();
        let d = DomainSpec::UnitBall { n };
        for _ in 0..30 {
            let z = d.sample_interior(&mut rng, 0.8).unwrap();
            let g = w.eval(&z).unwrap();
            let ggbar: f64 = g.iter().map(|x| x.norm_sqr()).sum();
            let ggt: C64 = g.iter().map(|x| x * x).sum();
            let small: f64 = z[..n - 1].iter().map(|x| x.norm_sqr()).sum();
            let all: f64 = z.iter().map(|x| x.norm_sqr()).sum();
            let expect = small + z[n - 1].norm_sqr() * all;
            assert!((ggbar - 0.25 * ggt.norm_sqr() - expect).abs() < 1e-10);
        }
        // properness: boundary to boundary
        for _ in 0..30 {
            let z = d.sample_boundary(&mut rng).unwrap();
            let g = w.eval(&z).unwrap();
            let ggbar: f64 = g.iter().map(|x| x.norm_sqr()).sum();
            let ggt: C64 = g.iter().map(|x| x * x).sum();
            assert!((1.0 - ggbar + 0.25 * ggt.norm_sqr()).abs() < 1e-10);
        }
        let h = catalog_build(&CatalogKey::Exhp0 { n: 2 }).unwrap();
        let d2 = DomainSpec::UnitBall { n: 2 };
        for _ in 0..30 {
            let z = d2.sample_interior(&mut rng, 0.8).unwrap();
            let hv = h.eval(&z).unwrap();
            let hhbar: f64 = hv.iter().map(|x| x.norm_sqr()).sum();
            let hht: C64 = hv.iter().map(|x| x * x).sum();
            let all: f64 = z.iter().map(|x| x.norm_sqr()).sum();
            let expect = all - 0.25 * z[1].norm_sqr().powi(2) * (1.0 - all);
            assert!((hhbar - 0.25 * hht.norm_sqr() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn psi_map_lands_on_boundary() {
        let key = CatalogKey::PsiDegenerate {
            n: 2,
            m: 4,
            psi: Box::new(mul(vec![var(0), var(1)])),
        };
        let f = catalog_build(&key).unwrap();
        let d = DomainSpec::UnitBall { n: 2 };
        let t = DomainSpec::TypeIv { m: 4 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let z = d.sample_interior(&mut rng, 0.8).unwrap();
            let g = f.eval(&z).unwrap();
            let vals = t.defining_values(&g).unwrap();
            assert!(vals[0].abs() < 1e-10);
        }
    }

    #[test]
    fn lembed_hits_generalized_ball() {
        let f = catalog_build(&CatalogKey::Lembed { m: 3 }).unwrap();
        let src = DomainSpec::TypeIv { m: 3 };
        let tgt = DomainSpec::GeneralizedBall { n: 3, l: 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let z = src.sample_interior(&mut rng, 0.9).unwrap();
            let img = f.eval(&z).unwrap();
            let dv = tgt.defining_values(&img).unwrap()[0];
            let sv = src.defining_values(&z).unwrap()[0];
            assert!((dv - sv).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let keys: Vec<CatalogKey> = vec![
            CatalogKey::Riv { n: 3 },
            CatalogKey::Itheta { n: 2, theta: 0.4 },
            CatalogKey::Izero { n: 2 },
            CatalogKey::WhitneyIv { n: 2 },
            CatalogKey::Gk { k: 2 },
            CatalogKey::Flat { n: 2, m: 4 },
            CatalogKey::Lembed { m: 3 },
            CatalogKey::Exhp0 { n: 2 },
        ];
        for key in keys {
            let f = catalog_build(&key).unwrap();
            for _ in 0..5 {
                let z = f.source.sample_interior(&mut rng, 0.7).unwrap();
                let jac = f.jacobian(&z).unwrap();
                let h = 1e-6;
                for j in 0..f.source.dim() {
                    let mut zp = z.clone();
                    let mut zm = z.clone();
                    zp[j] += c(h, 0.0);
                    zm[j] -= c(h, 0.0);
                    let fp = f.eval(&zp).unwrap();
                    let fm = f.eval(&zm).unwrap();
                    for a in 0..f.target.dim() {
                        let fd = (fp[a] - fm[a]) / (2.0 * h);
                        let scale = jac[(a, j)].norm().max(1.0);
                        assert!(
                            (jac[(a, j)] - fd).norm() / scale < 1e-6,
                            "{key:?} comp {a} var {j}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn compose_with_automorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = catalog_build(&CatalogKey::Izero { n: 2 }).unwrap();
        let pre = random_member(GroupTag::BallAut { n: 2 }, &mut rng);
        let post = random_member(GroupTag::TypeIvAut { m: 3 }, &mut rng);
        let g = compose_autos(Some(&pre), &f, Some(&post)).unwrap();
        let d = DomainSpec::UnitBall { n: 2 };
        for _ in 0..20 {
            let z = d.sample_interior(&mut rng, 0.6).unwrap();
            let lhs = g.eval(&z).unwrap();
            let rhs = post.apply(&f.eval(&pre.apply(&z).unwrap()).unwrap()).unwrap();
            for (x, y) in lhs.iter().zip(&rhs) {
                assert!((x - y).norm() < 1e-11);
            }
            // unitary precomposition leaves the kernel residual unchanged
        }
        let rot = {
            // ball rotation: blockdiag(1, Q), Q unitary
            let q = CMat::from_fn(2, 2, |_, _| {
                c(rand::Rng::gen::<f64>(&mut rng) - 0.5, rand::Rng::gen::<f64>(&mut rng) - 0.5)
            })
            .qr()
            .q();
            let mut m = CMat::identity(3, 3);
            m.view_mut((1, 1), (2, 2)).copy_from(&q);
            Automorphism::new(GroupTag::BallAut { n: 2 }, m, 1e-10).unwrap()
        };
        let fr = compose_autos(Some(&rot), &f, None).unwrap();
        for _ in 0..20 {
            let z = d.sample_interior(&mut rng, 0.6).unwrap();
            assert!(fr.kernel_identity_residual(&z, 1).unwrap() < 1e-12);
        }
        // domain mismatch is rejected
        assert!(matches!(
            compose_autos(Some(&post.clone()), &f, None),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn linear_map_jacobian_is_constant() {
        // f(z) = z A for a fixed 2x2 A, written as expressions
        let a = [[c(1.0, 2.0), c(0.5, 0.0)], [c(0.0, -1.0), c(2.0, 0.0)]];
        let comps: Vec<HoloExpr> = (0..2)
            .map(|j| {
                add((0..2)
                    .map(|i| mul(vec![cst(ExactC::from_c64(a[i][j])), var(i)]))
                    .collect())
            })
            .collect();
        let f = HoloMap::from_components(
            DomainSpec::UnitBall { n: 2 },
            DomainSpec::TypeIv { m: 2 },
            comps,
            None,
        )
        .unwrap();
        for z in [[c(0.0, 0.0), c(0.0, 0.0)], [c(0.1, 0.2), c(-0.3, 0.1)]] {
            let jac = f.jacobian(&z).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((jac[(j, i)] - a[i][j]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn key_string_roundtrip_and_json() {
        for s in [
            "RIV:n=3",
            "Itheta:n=2,theta=0.5235987755982988",
            "L:m=5",
            "flat:n=2,m=4",
            "whitneyIV:n=3",
            "Gk:k=2",
            "Izero:n=4",
            "exhp0:n=2",
            "classB:n=3",
            "psi:n=2,m=4",
        ] {
            let key = CatalogKey::parse(s).unwrap();
            assert_eq!(key.key_string(), s);
            catalog_build(&key).unwrap();
        }
        assert!(CatalogKey::parse("nosuch:n=1").is_err());
        assert!((parse_angle("pi/6").unwrap() - std::f64::consts::PI / 6.0).abs() < 1e-15);
        assert!((parse_angle("0.25").unwrap() - 0.25).abs() < 1e-15);

        let f = catalog_build(&CatalogKey::Riv { n: 2 }).unwrap();
        let j = MapJson::from_map(&f).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        let back: MapJson = serde_json::from_str(&s).unwrap();
        let g = back.to_map().unwrap();
        let z = [c(0.1, 0.05), c(0.2, -0.1)];
        let a = f.eval(&z).unwrap();
        let b = g.eval(&z).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn parameter_ranges_enforced() {
        assert!(matches!(
            catalog_build(&CatalogKey::Riv { n: 1 }),
            Err(Error::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            catalog_build(&CatalogKey::Itheta { n: 2, theta: 1.0 }),
            Err(Error::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            catalog_build(&CatalogKey::Flat { n: 2, m: 3 }),
            Err(Error::ParameterOutOfRange(_))
        ));
    }
}
