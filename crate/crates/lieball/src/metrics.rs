//! Kähler metric matrices g_{jk̄} = −(exponent)·∂²log ρ/∂z_j∂z̄_k in closed
//! form, metric pullbacks along holomorphic maps, and sampled isometry
//! verdicts.
//!
//! Normalization: the kernel exponents are baked in (ball n+1, Type IV m,
//! generalized ball 1), so the isometric constant of a ball-to-TypeIV
//! isometry comes out as m/(n+1) and the embedding of the Type IV domain
//! into the generalized ball pulls back to 1/m times the Type IV metric.
//! Every verdict records ω = i ∂∂̄ log K as the convention in force.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat};
use crate::maps::HoloMap;
use crate::C64;

#[derive(Clone, Debug)]
pub struct MetricMatrix {
    pub base_point: Vec<C64>,
    pub entries: CMat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsometryVerdict {
    pub lambda: f64,
    pub samples: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub pass: bool,
    pub skipped: usize,
}

/// Closed-form metric matrix at an interior point.
pub fn metric_matrix(d: &DomainSpec, z: &[C64]) -> Result<MetricMatrix> {
    if !d.is_interior(z, 0.0)? {
        return Err(Error::NotInterior);
    }
    let n = d.dim();
    let entries = match *d {
        DomainSpec::UnitBall { n: nn } => {
            let rho = 1.0 - z.iter().map(|c| c.norm_sqr()).sum::<f64>();
            let e = (nn + 1) as f64;
            DMatrix::from_fn(n, n, |j, k| {
                let mut g = z[j].conj() * z[k] / (rho * rho);
                if j == k {
                    g += C64::new(1.0 / rho, 0.0);
                }
                g * e
            })
        }
        DomainSpec::GeneralizedBall { l, .. } => {
            let sign = |i: usize| if i < l { 1.0 } else { -1.0 };
            let rho = 1.0 + z.iter().enumerate().map(|(i, c)| sign(i) * c.norm_sqr()).sum::<f64>();
            DMatrix::from_fn(n, n, |j, k| {
                let mut g = sign(j) * sign(k) * z[j].conj() * z[k] / (rho * rho);
                if j == k {
                    g -= C64::new(sign(j) / rho, 0.0);
                }
                g
            })
        }
        DomainSpec::TypeIv { m } => {
            let a: C64 = z.iter().map(|c| c * c).sum();
            let rho = 1.0 - z.iter().map(|c| c.norm_sqr()).sum::<f64>() + 0.25 * a.norm_sqr();
            let e = m as f64;
            let dz: Vec<C64> = z.iter().map(|&zj| -zj.conj() + 0.5 * a.conj() * zj).collect();
            DMatrix::from_fn(n, n, |j, k| {
                let mut g = -z[j] * z[k].conj();
                if j == k {
                    g += C64::new(1.0, 0.0);
                }
                // second term: ρ_j ρ_k̄ / ρ² with ρ_k̄ = conj(ρ_k)
                (g / rho + dz[j] * dz[k].conj() / (rho * rho)) * e
            })
        }
        _ => {
            return Err(Error::DomainMismatch(
                "metric defined for UnitBall, GeneralizedBall and TypeIV only".into(),
            ))
        }
    };
    Ok(MetricMatrix { base_point: z.to_vec(), entries })
}

/// (f*g)_{jk̄} = Σ_{a,b} g_{ab̄}(f(z)) ∂f_a/∂z_j conj(∂f_b/∂z_k).
pub fn pullback_metric(f: &HoloMap, z: &[C64]) -> Result<MetricMatrix> {
    let fz = f.eval(z)?;
    if !f.target.is_interior(&fz, 0.0)? {
        return Err(Error::TargetNotInterior);
    }
    let g = metric_matrix(&f.target, &fz)?;
    let jac = f.jacobian(z)?;
    let entries = jac.transpose() * g.entries * jac.conjugate();
    Ok(MetricMatrix { base_point: z.to_vec(), entries })
}

/// Sampled check of pullback = λ · source metric.
pub fn isometry_check(
    f: &HoloMap,
    lambda: f64,
    samples: usize,
    seed: u64,
    tol: f64,
    radius: f64,
) -> Result<IsometryVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual: f64 = 0.0;
    let mut done = 0usize;
    let mut skipped = 0usize;
    while done < samples {
        if skipped > 10 * samples {
            return Err(Error::NoSolution);
        }
        let z = f.source.sample_interior(&mut rng, radius)?;
        let res = (|| -> Result<f64> {
            let pb = pullback_metric(f, &z)?;
            let g = metric_matrix(&f.source, &z)?;
            Ok(max_abs(&(pb.entries - g.entries * C64::new(lambda, 0.0))))
        })();
        match res {
            Ok(r) => {
                max_residual = max_residual.max(r);
                done += 1;
            }
            Err(Error::Pole) | Err(Error::BranchPoint) | Err(Error::NotDifferentiable)
            | Err(Error::TargetNotInterior) | Err(Error::NotInterior) => {
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(IsometryVerdict {
        lambda,
        samples: done,
        seed,
        max_residual,
        pass: max_residual <= tol,
        skipped,
    })
}

/// Allowed isometric constants for maps B^n -> D^IV_m.
pub fn expected_lambda(n: usize, m: usize) -> Vec<f64> {
    if n >= 2 {
        vec![m as f64 / (n + 1) as f64]
    } else {
        vec![m as f64 / 2.0, m as f64]
    }
}

/// Dimension bound for local isometric embeddings into D^IV_m.
pub fn isometry_dimension_feasible(n: usize, m: usize) -> bool {
    n <= m - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{random_member, GroupTag};
    use crate::maps::{catalog_build, CatalogKey};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn metric_at_origin() {
        let z2 = vec![c(0.0, 0.0); 2];
        let g = metric_matrix(&DomainSpec::UnitBall { n: 2 }, &z2).unwrap();
        assert!(max_abs(&(g.entries - CMat::identity(2, 2) * c(3.0, 0.0))) < 1e-14);
        let z3 = vec![c(0.0, 0.0); 3];
        let g = metric_matrix(&DomainSpec::TypeIv { m: 3 }, &z3).unwrap();
        assert!(max_abs(&(g.entries - CMat::identity(3, 3) * c(3.0, 0.0))) < 1e-14);
        let g = metric_matrix(&DomainSpec::GeneralizedBall { n: 2, l: 1 }, &z3).unwrap();
        let want = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(-1.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
        ]));
        assert!(max_abs(&(g.entries - want)) < 1e-14);
    }

    #[test]
    fn metric_is_hermitian_and_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &d in &[
            DomainSpec::UnitBall { n: 2 },
            DomainSpec::GeneralizedBall { n: 2, l: 1 },
            DomainSpec::TypeIv { m: 3 },
        ] {
            for _ in 0..20 {
                let z = d.sample_interior(&mut rng, 0.6).unwrap();
                let g = metric_matrix(&d, &z).unwrap().entries;
                assert!(max_abs(&(&g - g.adjoint())) < 1e-12);
                let fd = fd_metric(&d, &z);
                let defect = max_abs(&(&g - &fd));
                assert!(defect < 1e-6 * max_abs(&g).max(1.0), "{d:?} defect {defect}");
            }
        }
    }

    fn log_rho(d: &DomainSpec, z: &[C64]) -> f64 {
        let e = match *d {
            DomainSpec::UnitBall { n } => (n + 1) as f64,
            DomainSpec::TypeIv { m } => m as f64,
            _ => 1.0,
        };
        e * d.defining_values(z).unwrap()[0].ln()
    }

    fn fd_metric(d: &DomainSpec, z: &[C64]) -> CMat {
        let n = d.dim();
        let h = 1e-4;
        let shift = |z: &[C64], p: usize, s: f64| -> Vec<C64> {
            let mut w = z.to_vec();
            if p < n {
                w[p] += c(s, 0.0);
            } else {
                w[p - n] += c(0.0, s);
            }
            w
        };
        let second = |p: usize, q: usize| -> f64 {
            let f = |sp: f64, sq: f64| log_rho(d, &shift(&shift(z, p, sp), q, sq));
            (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)
        };
        CMat::from_fn(n, n, |j, k| {
            let xx = second(j, k);
            let yy = second(j + n, k + n);
            let xy = second(j, k + n);
            let yx = second(j + n, k);
            -0.25 * c(xx + yy, xy - yx)
        })
    }

    #[test]
    fn lembed_pullback_is_identity_at_origin() {
        let m = 4;
        let f = catalog_build(&CatalogKey::Lembed { m }).unwrap();
        let z = vec![c(0.0, 0.0); m];
        let pb = pullback_metric(&f, &z).unwrap();
        assert!(max_abs(&(pb.entries - CMat::identity(m, m))) < 1e-14);
    }

    #[test]
    fn izero_pullback_matches_ball_metric() {
        let f = catalog_build(&CatalogKey::Izero { n: 2 }).unwrap();
        let z = vec![c(0.1, 0.0), c(0.2, 0.0)];
        let pb = pullback_metric(&f, &z).unwrap();
        let g = metric_matrix(&DomainSpec::UnitBall { n: 2 }, &z).unwrap();
        assert!(max_abs(&(pb.entries - g.entries)) < 1e-9);
    }

    #[test]
    fn isometry_verdicts() {
        let riv = catalog_build(&CatalogKey::Riv { n: 3 }).unwrap();
        let v = isometry_check(&riv, 1.0, 50, 0, 1e-9, 0.9).unwrap();
        assert!(v.pass, "residual {}", v.max_residual);

        let g2 = catalog_build(&CatalogKey::Gk { k: 2 }).unwrap();
        for lam in [1.0, 2.0] {
            let v = isometry_check(&g2, lam, 50, 0, 1e-9, 0.9).unwrap();
            assert!(!v.pass && v.max_residual > 1e-3);
        }

        let w3 = catalog_build(&CatalogKey::WhitneyIv { n: 3 }).unwrap();
        let v = isometry_check(&w3, 1.5, 50, 0, 1e-9, 0.9).unwrap();
        assert!(!v.pass && v.max_residual > 1e-3);

        let l = catalog_build(&CatalogKey::Lembed { m: 4 }).unwrap();
        let v = isometry_check(&l, 0.25, 50, 0, 1e-9, 0.9).unwrap();
        assert!(v.pass, "residual {}", v.max_residual);
    }

    #[test]
    fn lambda_table() {
        assert_eq!(expected_lambda(4, 5), vec![1.0]);
        assert_eq!(expected_lambda(1, 2), vec![1.0, 2.0]);
        assert_eq!(expected_lambda(2, 3), vec![1.0]);
        assert!(isometry_dimension_feasible(3, 4));
        assert!(!isometry_dimension_feasible(4, 4));
        assert!(isometry_dimension_feasible(1, 2));
    }

    #[test]
    fn automorphisms_are_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &g in &[
            GroupTag::BallAut { n: 2 },
            GroupTag::GeneralizedBallAut { n: 2, l: 1 },
            GroupTag::TypeIvAut { m: 3 },
        ] {
            for _ in 0..5 {
                let a = random_member(g, &mut rng);
                let f = HoloMap::from_automorphism(&a);
                let v = isometry_check(&f, 1.0, 40, 7, 1e-8, 0.8).unwrap();
                assert!(v.pass, "{g:?} residual {}", v.max_residual);
            }
        }
    }

    #[test]
    fn verdict_serializes_with_expected_fields() {
        let v = IsometryVerdict {
            lambda: 1.0,
            samples: 5,
            seed: 0,
            max_residual: 1e-12,
            pass: true,
            skipped: 0,
        };
        let s = serde_json::to_string(&v).unwrap();
        for key in ["lambda", "samples", "seed", "max_residual", "pass", "skipped"] {
            assert!(s.contains(key));
        }
    }
}
