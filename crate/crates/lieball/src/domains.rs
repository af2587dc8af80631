//! Domain definitions: unit balls, generalized balls, the Type IV classical
//! domains, the Heisenberg hypersurface models, and the Cayley transform
//! between the models.
//!
//! Coordinate conventions, fixed once here and relied on everywhere:
//! * GeneralizedBall(n, l): the l negative-signature slots come first, so a
//!   point is (w_1..w_l, z_1..z_n) with defining value 1 + Σ|w|² − Σ|z|².
//! * Heisenberg models: coordinates (z_1,…,z_{N−1}, w) with the
//!   negative-signature slot of the ⟨·,·⟩₁ pairing at index N−2 (the last z).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    UnitBall { n: usize },
    GeneralizedBall { n: usize, l: usize },
    TypeIv { m: usize },
    Heisenberg { n: usize },
    HeisenbergSig1 { n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Interior,
    SmoothBoundary,
    SingularBoundary,
    Exterior,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryClass {
    pub tag: BoundaryTag,
    pub defining_values: Vec<f64>,
}

/// Signature-1 pairing ⟨x, y⟩₁ = Σ_{j<m} x_j ȳ_j − x_m ȳ_m on m-tuples.
pub fn pairing_sig1(x: &[C64], y: &[C64]) -> C64 {
    let m = x.len();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..m - 1 {
        s += x[j] * y[j].conj();
    }
    s - x[m - 1] * y[m - 1].conj()
}

fn norm_sq(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::UnitBall { n } => n >= 1,
            DomainSpec::GeneralizedBall { n, l } => n >= 2 && l <= n,
            DomainSpec::TypeIv { m } => m >= 1,
            DomainSpec::Heisenberg { n } => n >= 2,
            DomainSpec::HeisenbergSig1 { n } => n >= 3,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange(format!("{self:?}")))
        }
    }

    /// Complex dimension of the coordinate tuple.
    pub fn dim(&self) -> usize {
        match *self {
            DomainSpec::UnitBall { n } => n,
            DomainSpec::GeneralizedBall { n, l } => n + l,
            DomainSpec::TypeIv { m } => m,
            DomainSpec::Heisenberg { n } => n,
            DomainSpec::HeisenbergSig1 { n } => n,
        }
    }

    fn check_dim(&self, p: &[C64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        Ok(())
    }

    pub fn defining_values(&self, p: &[C64]) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        Ok(match *self {
            DomainSpec::UnitBall { .. } => vec![1.0 - norm_sq(p)],
            DomainSpec::GeneralizedBall { l, .. } => {
                let w2 = norm_sq(&p[..l]);
                let z2 = norm_sq(&p[l..]);
                vec![1.0 + w2 - z2]
            }
            DomainSpec::TypeIv { .. } => {
                let zzbar = norm_sq(p);
                let zzt: C64 = p.iter().map(|c| c * c).sum();
                vec![1.0 - zzbar + 0.25 * zzt.norm_sqr(), 2.0 - zzbar]
            }
            DomainSpec::Heisenberg { n } => {
                let v = p[n - 1].im;
                vec![v - norm_sq(&p[..n - 1])]
            }
            DomainSpec::HeisenbergSig1 { n } => {
                let v = p[n - 1].im;
                let z = &p[..n - 1];
                vec![v - pairing_sig1(z, z).re]
            }
        })
    }

    pub fn classify_point(&self, p: &[C64], tol: f64) -> Result<BoundaryClass> {
        let vals = self.defining_values(p)?;
        let tag = match *self {
            DomainSpec::TypeIv { .. } => {
                let (d1, d2) = (vals[0], vals[1]);
                if d1 > tol && d2 > tol {
                    BoundaryTag::Interior
                } else if d1.abs() <= tol && d2.abs() <= tol {
                    BoundaryTag::SingularBoundary
                } else if d1.abs() <= tol && d2 > tol {
                    BoundaryTag::SmoothBoundary
                } else {
                    BoundaryTag::Exterior
                }
            }
            _ => {
                let d = vals[0];
                if d > tol {
                    BoundaryTag::Interior
                } else if d.abs() <= tol {
                    BoundaryTag::SmoothBoundary
                } else {
                    BoundaryTag::Exterior
                }
            }
        };
        Ok(BoundaryClass { tag, defining_values: vals })
    }

    pub fn is_interior(&self, p: &[C64], tol: f64) -> Result<bool> {
        Ok(self
            .defining_values(p)?
            .iter()
            .all(|&d| d > tol))
    }

    /// Seeded interior sample by rejection from the polydisc of the given
    /// radius (for the Heisenberg models: z in the polydisc, u uniform and
    /// the height offset uniform in (0, radius)).
    pub fn sample_interior<R: Rng>(&self, rng: &mut R, radius: f64) -> Result<Vec<C64>> {
        match *self {
            DomainSpec::Heisenberg { n } | DomainSpec::HeisenbergSig1 { n } => {
                let mut p = polydisc_sample(n - 1, radius, rng);
                let u = radius * (2.0 * rng.gen::<f64>() - 1.0);
                let base = match *self {
                    DomainSpec::Heisenberg { .. } => norm_sq(&p),
                    _ => pairing_sig1(&p, &p).re,
                };
                let v = base + radius * rng.gen::<f64>().max(1e-6);
                p.push(C64::new(u, v));
                Ok(p)
            }
            _ => {
                // Keep a margin of 1 - radius^2 on every defining value so the
                // metric stays bounded on samples; plain interiority would let
                // polydisc points hug the boundary regardless of radius.
                let floor = (1.0 - radius * radius).max(0.0);
                for _ in 0..10_000 {
                    let p = polydisc_sample(self.dim(), radius, rng);
                    if self.defining_values(&p)?.iter().all(|&v| v >= floor) {
                        return Ok(p);
                    }
                }
                Err(Error::NoSolution)
            }
        }
    }

    /// Seeded sample on the smooth boundary stratum.
    pub fn sample_boundary<R: Rng>(&self, rng: &mut R) -> Result<Vec<C64>> {
        match *self {
            DomainSpec::UnitBall { n } => Ok(gaussian_unit(n, rng)),
            DomainSpec::GeneralizedBall { n, l } => {
                // scale the positive block so Σ|z|² = 1 + Σ|w|²
                let w = polydisc_sample(l, 0.7, rng);
                let z = gaussian_unit(n, rng);
                let s = (1.0 + norm_sq(&w)).sqrt();
                let mut p = w;
                p.extend(z.into_iter().map(|c| c * s));
                Ok(p)
            }
            DomainSpec::TypeIv { m } => {
                for _ in 0..10_000 {
                    let dir: Vec<C64> = (0..m)
                        .map(|_| C64::new(gauss(rng), gauss(rng)))
                        .collect();
                    let c1 = norm_sq(&dir);
                    let c2 = dir.iter().map(|c| c * c).sum::<C64>().norm();
                    // 1 − c1 u + ¼ c2² u² = 0, smaller root in u = t²
                    let u = if c2 < 1e-9 {
                        1.0 / c1
                    } else {
                        let disc = c1 * c1 - c2 * c2;
                        if disc < 0.0 {
                            continue;
                        }
                        2.0 * (c1 - disc.sqrt()) / (c2 * c2)
                    };
                    if !(u.is_finite() && u > 0.0) {
                        continue;
                    }
                    let t = u.sqrt();
                    let z: Vec<C64> = dir.iter().map(|c| c * t).collect();
                    // stay off the singular stratum ZZ̄ᵗ = 2
                    if 2.0 - u * c1 > 1e-4 {
                        return Ok(z);
                    }
                }
                Err(Error::NoSolution)
            }
            DomainSpec::Heisenberg { n } | DomainSpec::HeisenbergSig1 { n } => {
                let mut p = polydisc_sample(n - 1, 0.3, rng);
                let u = 0.3 * (2.0 * rng.gen::<f64>() - 1.0);
                let v = match *self {
                    DomainSpec::Heisenberg { .. } => norm_sq(&p),
                    _ => pairing_sig1(&p, &p).re,
                };
                p.push(C64::new(u, v));
                Ok(p)
            }
        }
    }
}

/// Points of the singular stratum P of ∂D^IV_m: √2 e^{iθ} u with u a real
/// unit vector.
pub fn typeiv_singular_point(u: &[f64], theta: f64) -> Vec<C64> {
    let nrm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let phase = C64::new(0.0, theta).exp() * std::f64::consts::SQRT_2;
    u.iter().map(|&x| phase * (x / nrm)).collect()
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller, one draw per call
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn gaussian_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| C64::new(gauss(rng), gauss(rng))).collect();
        let nrm = norm_sq(&v).sqrt();
        if nrm > 1e-6 {
            return v.iter().map(|c| c / nrm).collect();
        }
    }
}

/// Uniform sample from the polydisc of the given radius.
pub fn polydisc_sample<R: Rng>(n: usize, radius: f64, rng: &mut R) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let t = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            C64::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

/// Cayley transform from the Heisenberg models to the (generalized) ball.
///
/// For Heisenberg(n), (z, w) ↦ (2z/(1−iw), (1+iw)/(1−iw)) into the closure
/// of the unit ball. For HeisenbergSig1(N) the same components are emitted
/// in generalized-ball order: the negative-signature image 2z_{N−1}/(1−iw)
/// occupies the leading slot of 𝔹^N_1, the distinguished last coordinate
/// stays last. Satisfies
/// (ball defining value) = 4 (v − |z|²) / |1 − iw|².
pub fn cayley(d: &DomainSpec, p: &[C64]) -> Result<Vec<C64>> {
    d.check_dim(p)?;
    let n = match *d {
        DomainSpec::Heisenberg { n } | DomainSpec::HeisenbergSig1 { n } => n,
        _ => return Err(Error::DomainMismatch("cayley expects a Heisenberg model".into())),
    };
    let w = p[n - 1];
    let i = C64::new(0.0, 1.0);
    let den = C64::new(1.0, 0.0) - i * w;
    if den.norm() < 1e-12 {
        return Err(Error::Pole);
    }
    let zeta: Vec<C64> = p[..n - 1].iter().map(|z| 2.0 * z / den).collect();
    let last = (C64::new(1.0, 0.0) + i * w) / den;
    let mut out = Vec::with_capacity(n);
    match *d {
        DomainSpec::Heisenberg { .. } => {
            out.extend(zeta);
            out.push(last);
        }
        _ => {
            out.push(zeta[n - 2]);
            out.extend(zeta[..n - 2].iter().copied());
            out.push(last);
        }
    }
    Ok(out)
}

/// Inverse of `cayley`, back to the Heisenberg model coordinates.
pub fn cayley_inverse(d: &DomainSpec, q: &[C64]) -> Result<Vec<C64>> {
    d.check_dim(q)?;
    let n = match *d {
        DomainSpec::Heisenberg { n } | DomainSpec::HeisenbergSig1 { n } => n,
        _ => return Err(Error::DomainMismatch("cayley expects a Heisenberg model".into())),
    };
    let last = q[n - 1];
    let den = last + C64::new(1.0, 0.0);
    if den.norm() < 1e-12 {
        return Err(Error::Pole);
    }
    let i = C64::new(0.0, 1.0);
    let w = -i * (last - C64::new(1.0, 0.0)) / den;
    let fac = (C64::new(1.0, 0.0) - i * w) / 2.0;
    let mut z: Vec<C64> = match *d {
        DomainSpec::Heisenberg { .. } => q[..n - 1].iter().map(|c| c * fac).collect(),
        _ => {
            // undo the generalized-ball slot permutation
            let mut z: Vec<C64> = q[1..n - 1].iter().map(|c| c * fac).collect();
            z.push(q[0] * fac);
            z
        }
    };
    z.push(w);
    Ok(z)
}
