//! The eight checks of the verification suite, runnable in batch through the
//! CLI (`lieball suite`) or one by one from the integration tests. Each
//! criterion reports pass/fail plus a short human-readable detail line.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify_map, equivalence_witness, reconstruct_map, witness_residual, CaseTag, RATIONAL_WINDOW,
};
use crate::domains::DomainSpec;
use crate::exact::ExactC;
use crate::groups::{
    check_group_membership, random_member, typeiv_isotropy, Automorphism, GroupTag,
};
use crate::hforms::{form_from_map, power_signature, signature, FormMode, SignatureResult};
use crate::jets::{mapping_residual, model_map, normal_form_check};
use crate::linalg::{extend_orthonormal_real, max_abs, takagi, CMat, CVec, RVec};
use crate::maps::{catalog_build, cst, mul, var, CatalogKey, HoloMap};
use crate::metrics::{isometry_check, metric_matrix, pullback_metric};
use crate::C64;

use std::f64::consts::{FRAC_PI_4, PI};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

type Check = std::result::Result<String, String>;

fn lib<T>(r: crate::error::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn report(id: usize, name: &str, r: Check) -> CriterionReport {
    match r {
        Ok(detail) => CriterionReport { id, name: name.into(), pass: true, detail },
        Err(detail) => CriterionReport { id, name: name.into(), pass: false, detail },
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    vec![
        report(1, "isometry constants", isometry_constants(seed)),
        report(2, "proper non-isometries", proper_non_isometries(seed)),
        report(3, "classification round trip", classification_round_trip(seed)),
        report(4, "equivalence witnesses", witness_certification(seed)),
        report(5, "signature suite", signature_suite()),
        report(6, "group and metric invariance", group_invariance(seed)),
        report(7, "weighted jet suite", jet_suite()),
        report(8, "oracle cross-checks", oracle_cross_checks(seed)),
    ]
}

// --- 1 ---------------------------------------------------------------------

fn isometry_constants(seed: u64) -> Check {
    let t0 = Instant::now();
    let mut cases: Vec<(HoloMap, f64)> = Vec::new();
    for n in [2usize, 3, 4] {
        cases.push((lib(catalog_build(&CatalogKey::Riv { n }))?, 1.0));
    }
    for theta in [0.0, PI / 12.0, PI / 6.0] {
        cases.push((lib(catalog_build(&CatalogKey::Itheta { n: 3, theta }))?, 1.0));
    }
    for (n, m) in [(2usize, 4usize), (3, 5)] {
        cases.push((
            lib(catalog_build(&CatalogKey::Flat { n, m }))?,
            m as f64 / (n + 1) as f64,
        ));
    }
    let lembed = lib(catalog_build(&CatalogKey::Lembed { m: 4 }))?;
    cases.push((lembed.clone(), 0.25));

    for (f, lambda) in &cases {
        let v = lib(isometry_check(f, *lambda, 200, seed, 1e-9, 0.9))?;
        ensure!(
            v.pass,
            "{}: residual {:.3e} exceeds 1e-9 at lambda {lambda}",
            f.name.as_deref().unwrap_or("?"),
            v.max_residual
        );
    }

    // the embedding of the Lie ball is exactly metric-normalized at 0
    let zero = vec![C64::new(0.0, 0.0); 4];
    let pb = lib(pullback_metric(&lembed, &zero))?;
    let d = max_abs(&(&pb.entries - CMat::identity(4, 4)));
    ensure!(d < 1e-12, "Lie ball embedding pullback at 0 is off identity by {d:.3e}");

    let secs = t0.elapsed().as_secs_f64();
    ensure!(secs <= 10.0, "isometry suite took {secs:.1}s, budget is 10s");
    Ok(format!("9 verdicts <= 1e-9 at 200 samples each, origin pullback exact, {secs:.2}s"))
}

// --- 2 ---------------------------------------------------------------------

fn proper_non_isometries(seed: u64) -> Check {
    let w = lib(catalog_build(&CatalogKey::WhitneyIv { n: 3 }))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let z = lib(w.source.sample_boundary(&mut rng))?;
        let fz = lib(w.eval(&z))?;
        let vals = lib(w.target.defining_values(&fz))?;
        worst = worst.max(vals[0].abs());
    }
    ensure!(worst <= 1e-9, "Whitney map boundary residual {worst:.3e} exceeds 1e-9");

    let v = lib(isometry_check(&w, 1.5, 200, seed, 1e-3, 0.9))?;
    ensure!(
        !v.pass && v.max_residual >= 1e-3,
        "Whitney map unexpectedly close to an isometry at lambda 3/2 ({:.3e})",
        v.max_residual
    );

    let g = lib(catalog_build(&CatalogKey::Gk { k: 2 }))?;
    for lambda in [1.0, 2.0] {
        let v = lib(isometry_check(&g, lambda, 200, seed, 1e-3, 0.9))?;
        ensure!(
            !v.pass && v.max_residual >= 1e-3,
            "squared disc map passes isometry at lambda {lambda}"
        );
    }
    Ok(format!(
        "Whitney boundary residual {worst:.1e}, isometry rejected at 3/2; disc square rejected at 1 and 2"
    ))
}

// --- 3 ---------------------------------------------------------------------

fn expect_case(theta: f64) -> CaseTag {
    if (theta - FRAC_PI_4).abs() <= RATIONAL_WINDOW {
        CaseTag::Rational
    } else {
        CaseTag::Irrational(theta.min(PI / 2.0 - theta))
    }
}

fn case_matches(got: &CaseTag, want: &CaseTag, tol: f64) -> bool {
    match (got, want) {
        (CaseTag::Rational, CaseTag::Rational) => true,
        (CaseTag::Irrational(a), CaseTag::Irrational(b)) => (a - b).abs() <= tol,
        _ => false,
    }
}

fn random_source_rotation(n: usize, rng: &mut ChaCha8Rng) -> crate::error::Result<Automorphism> {
    let raw = CMat::from_fn(n, n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = raw.column(j).into_owned();
        for u in &cols {
            let p = u.dotc(&v);
            v -= u * p;
        }
        cols.push(v.clone() / C64::new(v.norm(), 0.0));
    }
    let rot = CMat::from_columns(&cols);
    let mut m = CMat::identity(n + 1, n + 1);
    m.view_mut((1, 1), (n, n)).copy_from(&rot);
    Automorphism::new(GroupTag::BallAut { n }, m, 1e-9)
}

fn random_target_isotropy(m: usize, rng: &mut ChaCha8Rng) -> crate::error::Result<Automorphism> {
    let mut v = RVec::from_fn(m, |_, _| rng.gen::<f64>() - 0.5);
    v /= v.norm();
    let a = extend_orthonormal_real(&[v], 1e-9)?;
    let ac = CMat::from_fn(m, m, |i, j| C64::new(a[(i, j)], 0.0));
    let psi: f64 = 2.0 * PI * rng.gen::<f64>();
    let (sp, cp) = psi.sin_cos();
    let d = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) | (1, 1) => C64::new(cp, 0.0),
        (0, 1) => C64::new(-sp, 0.0),
        _ => C64::new(sp, 0.0),
    });
    typeiv_isotropy(&ac, &d, 1e-9)
}

fn classification_round_trip(seed: u64) -> Check {
    let thetas = [0.0, PI / 12.0, PI / 6.0, FRAC_PI_4, PI / 3.0];
    for n in [2usize, 3, 4] {
        for &theta in &thetas {
            let g = lib(reconstruct_map(n, theta))?;
            let (form, _) = lib(classify_map(&g, seed, 1e-9))?;
            ensure!(
                case_matches(&form.case, &expect_case(theta), 1e-8),
                "n={n} theta={theta}: got {:?}",
                form.case
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b9);
    for (n, theta) in [(3usize, PI / 6.0), (2, FRAC_PI_4)] {
        let f = lib(reconstruct_map(n, theta))?;
        let want = expect_case(theta);
        for k in 0..10 {
            let pre = lib(random_source_rotation(n, &mut rng))?;
            let post = lib(random_target_isotropy(n + 1, &mut rng))?;
            let g = lib(crate::maps::compose_autos(Some(&pre), &f, Some(&post)))?;
            let (form, _) = lib(classify_map(&g, seed + k, 1e-9))?;
            ensure!(
                case_matches(&form.case, &want, 1e-8),
                "conjugation {k} of n={n} theta={theta} drifted to {:?}",
                form.case
            );
        }
    }
    Ok("15 grid points classified correctly, stable under 20 random conjugations".into())
}

// --- 4 ---------------------------------------------------------------------

fn witness_certification(seed: u64) -> Check {
    let n = 3usize;
    for theta in [PI / 12.0, PI / 6.0, PI / 5.0] {
        let pair = lib(equivalence_witness(n, theta))?;
        let e = CMat::from_diagonal(&CVec::from_fn(n + 1, |i, _| {
            C64::new(if i == n { -1.0 } else { 1.0 }, 0.0)
        }));
        let bd = max_abs(&(&pair.b * &e * pair.b.adjoint() - &e));
        ensure!(bd <= 1e-12, "theta={theta}: ball witness defect {bd:.3e}");
        lib(check_group_membership(&pair.t, GroupTag::TypeIvAut { m: n + 1 }, 1e-12))?;
        let res = lib(witness_residual(&pair, n, theta, 100, seed))?;
        ensure!(res <= 1e-9, "theta={theta}: intertwining residual {res:.3e}");
    }
    Ok("3 witness pairs in their groups to 1e-12, intertwining to 1e-9 at 100 samples".into())
}

// --- 5 ---------------------------------------------------------------------

fn binom(a: usize, b: usize) -> i64 {
    let mut out = 1i64;
    for k in 0..b {
        out = out * (a - k) as i64 / (k + 1) as i64;
    }
    out
}

fn signature_suite() -> Check {
    for n in 2..=4usize {
        for p in 2..=4u32 {
            let s = lib(power_signature(n, p))?;
            // the binomial expansion of (1 - |z|^2)^p splits cleanly by
            // degree: even powers contribute positives, odd ones negatives
            let pos: i64 = (0..=p).step_by(2).map(|k| binom(n + k as usize - 1, k as usize)).sum();
            let neg: i64 = (1..=p).step_by(2).map(|k| binom(n + k as usize - 1, k as usize)).sum();
            let want = SignatureResult {
                positives: pos as usize,
                negatives: neg as usize,
                zeros: 0,
            };
            ensure!(s == want, "power form n={n} p={p}: {s:?}, oracle {want:?}");
            ensure!(s.positives >= 3, "power form n={n} p={p}: fewer than 3 positives");
        }
    }
    let s22 = lib(power_signature(2, 2))?;
    ensure!(
        s22 == SignatureResult { positives: 4, negatives: 2, zeros: 0 },
        "power form n=2 p=2: {s22:?}"
    );
    let f = lib(catalog_build(&CatalogKey::Exhp0 { n: 2 }))?;
    let h = lib(form_from_map(&f, FormMode::TypeIvKernel))?;
    let s = signature(&h, 1e-10);
    ensure!(s.negatives >= 1, "degenerate example kernel form has no negatives: {s:?}");
    Ok(format!(
        "9 power signatures match the binomial oracle, (2,2) = (4,2,0), degenerate kernel form {s:?}"
    ))
}

// --- 6 ---------------------------------------------------------------------

fn group_invariance(seed: u64) -> Check {
    let groups = [
        GroupTag::BallAut { n: 3 },
        GroupTag::GeneralizedBallAut { n: 3, l: 1 },
        GroupTag::TypeIvAut { m: 4 },
    ];
    for group in groups {
        let d = group.domain();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..20u64 {
            let a = random_member(group, &mut rng);
            lib(check_group_membership(&a.matrix, group, 1e-9))?;

            let v = lib(isometry_check(&HoloMap::from_automorphism(&a), 1.0, 10, seed + k, 1e-8, 0.9))?;
            ensure!(
                v.pass,
                "{group:?}: automorphism {k} breaks the metric by {:.3e}",
                v.max_residual
            );

            for _ in 0..5 {
                let z = lib(d.sample_interior(&mut rng, 0.9))?;
                let img = lib(a.apply(&z))?;
                let t0 = lib(d.classify_point(&z, 1e-8))?.tag;
                let t1 = lib(d.classify_point(&img, 1e-8))?.tag;
                ensure!(t0 == t1, "{group:?}: interior class changed to {t1:?}");
            }
            for _ in 0..5 {
                let z = lib(d.sample_boundary(&mut rng))?;
                let img = lib(a.apply(&z))?;
                let t0 = lib(d.classify_point(&z, 1e-8))?.tag;
                let t1 = lib(d.classify_point(&img, 1e-8))?.tag;
                ensure!(t0 == t1, "{group:?}: boundary class changed from {t0:?} to {t1:?}");
            }
        }
    }

    // isotropy with a trivial phase block acts linearly through the lift
    let m = 4usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 77);
    let dom = DomainSpec::TypeIv { m };
    for _ in 0..5 {
        let mut v = RVec::from_fn(m, |_, _| rng.gen::<f64>() - 0.5);
        v /= v.norm();
        let a = lib(extend_orthonormal_real(&[v], 1e-9))?;
        let ac = CMat::from_fn(m, m, |i, j| C64::new(a[(i, j)], 0.0));
        let aut = lib(typeiv_isotropy(&ac, &CMat::identity(2, 2), 1e-12))?;
        for _ in 0..10 {
            let z = lib(dom.sample_interior(&mut rng, 0.9))?;
            let img = lib(aut.apply(&z))?;
            for j in 0..m {
                let want: C64 = (0..m).map(|i| z[i] * ac[(i, j)]).sum();
                ensure!(
                    (img[j] - want).norm() <= 1e-12,
                    "lift action differs from Z A by {:.3e}",
                    (img[j] - want).norm()
                );
            }
        }
    }
    Ok("60 automorphisms preserve classes and metric; lift action matches Z -> ZA to 1e-12".into())
}

// --- 7 ---------------------------------------------------------------------

fn jet_suite() -> Check {
    let flat = lib(model_map(3, vec![cst(ExactC::zero())], "flat"))?;
    let r = lib(mapping_residual(&flat, 8))?;
    ensure!(r.is_zero(), "flat model has residual at order {:?}", r.first_nonzero_order());
    let rep = lib(normal_form_check(&flat, 8))?;
    ensure!(rep.constraint_holds, "flat model fails the normal form constraint");

    let psis = [
        ("z1^2", mul(vec![var(0), var(0)])),
        ("z1 z2", mul(vec![var(0), var(1)])),
        ("w", var(2)),
    ];
    for (label, psi) in &psis {
        let f = lib(model_map(3, vec![psi.clone(), psi.clone()], label))?;
        let r = lib(mapping_residual(&f, 8))?;
        ensure!(
            r.is_zero(),
            "paired model psi={label} has residual at order {:?}",
            r.first_nonzero_order()
        );
    }
    // the pure-z paired models are also in normal form
    for (label, psi) in &psis[..2] {
        let f = lib(model_map(3, vec![psi.clone(), psi.clone()], label))?;
        let rep = lib(normal_form_check(&f, 8))?;
        ensure!(rep.constraint_holds, "paired model psi={label} fails the constraint");
    }

    let broken = lib(model_map(2, vec![mul(vec![var(0), var(0)])], "broken"))?;
    let r = lib(mapping_residual(&broken, 8))?;
    ensure!(
        r.first_nonzero_order() == Some(4),
        "unpaired model: first nonzero order {:?}, expected 4",
        r.first_nonzero_order()
    );
    let p4 = &r.parts[4];
    ensure!(
        p4.c.len() == 1 && p4.c.get(&(vec![2], vec![2], 0)) == Some(&ExactC::one()),
        "unpaired model: order-4 residual is not |z1^2|^2"
    );
    Ok("flat and paired models vanish exactly to order 8; unpaired model caught at order 4".into())
}

// --- 8 ---------------------------------------------------------------------

fn fd_jacobian(f: &HoloMap, z: &[C64]) -> crate::error::Result<CMat> {
    let n = f.source.dim();
    let m = f.target.dim();
    let h = 1e-5;
    let mut out = CMat::zeros(m, n);
    for j in 0..n {
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[j] += C64::new(h, 0.0);
        zm[j] -= C64::new(h, 0.0);
        let fp = f.eval(&zp)?;
        let fm = f.eval(&zm)?;
        for a in 0..m {
            out[(a, j)] = (fp[a] - fm[a]) / (2.0 * h);
        }
    }
    Ok(out)
}

fn fd_metric(d: &DomainSpec, z: &[C64], exponent: f64) -> crate::error::Result<CMat> {
    let n = d.dim();
    let h = 1e-4;
    let log_rho = |p: &[C64]| -> crate::error::Result<f64> {
        Ok(d.defining_values(p)?[0].ln())
    };
    // displaced evaluation: axis re/im of coordinates j and k
    let shifted = |j: usize, re_j: bool, sj: f64, k: usize, re_k: bool, sk: f64| {
        let mut p = z.to_vec();
        p[j] += if re_j { C64::new(sj * h, 0.0) } else { C64::new(0.0, sj * h) };
        p[k] += if re_k { C64::new(sk * h, 0.0) } else { C64::new(0.0, sk * h) };
        log_rho(&p)
    };
    let d2 = |j: usize, re_j: bool, k: usize, re_k: bool| -> crate::error::Result<f64> {
        Ok((shifted(j, re_j, 1.0, k, re_k, 1.0)? - shifted(j, re_j, 1.0, k, re_k, -1.0)?
            - shifted(j, re_j, -1.0, k, re_k, 1.0)?
            + shifted(j, re_j, -1.0, k, re_k, -1.0)?)
            / (4.0 * h * h))
    };
    let mut g = CMat::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let re = d2(j, true, k, true)? + d2(j, false, k, false)?;
            let im = d2(j, true, k, false)? - d2(j, false, k, true)?;
            g[(j, k)] = C64::new(re, im) * (-exponent / 4.0);
        }
    }
    Ok(g)
}

fn oracle_cross_checks(seed: u64) -> Check {
    let keys = [
        CatalogKey::Riv { n: 3 },
        CatalogKey::Itheta { n: 3, theta: PI / 6.0 },
        CatalogKey::Izero { n: 3 },
        CatalogKey::Lembed { m: 4 },
        CatalogKey::Flat { n: 2, m: 4 },
        CatalogKey::WhitneyIv { n: 3 },
        CatalogKey::Gk { k: 2 },
        CatalogKey::Exhp0 { n: 2 },
        CatalogKey::ClassB { n: 3 },
        CatalogKey::PsiDegenerate { n: 2, m: 4, psi: Box::new(var(0)) },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for key in &keys {
        let f = lib(catalog_build(key))?;
        for _ in 0..20 {
            let z = lib(f.source.sample_interior(&mut rng, 0.3))?;
            let jac = lib(f.jacobian(&z))?;
            let fd = lib(fd_jacobian(&f, &z))?;
            let scale = max_abs(&jac).max(1.0);
            let d = max_abs(&(&jac - fd));
            ensure!(
                d <= 1e-6 * scale,
                "{}: Jacobian differs from finite differences by {d:.3e}",
                key.key_string()
            );
        }
    }

    let domains = [
        (DomainSpec::UnitBall { n: 3 }, 4.0),
        (DomainSpec::GeneralizedBall { n: 3, l: 1 }, 1.0),
        (DomainSpec::TypeIv { m: 4 }, 4.0),
    ];
    for (d, exponent) in &domains {
        for _ in 0..20 {
            let z = lib(d.sample_interior(&mut rng, 0.6))?;
            let g = lib(metric_matrix(d, &z))?;
            let fd = lib(fd_metric(d, &z, *exponent))?;
            let scale = max_abs(&g.entries).max(1.0);
            let diff = max_abs(&(&g.entries - fd));
            ensure!(
                diff <= 1e-6 * scale,
                "{d:?}: metric differs from log-potential finite differences by {diff:.3e}"
            );
        }
    }

    let mut worst = 0.0f64;
    for i in 0..100 {
        let size = 1 + (i % 8);
        let a = CMat::from_fn(size, size, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let s = &a + a.transpose();
        let (v, lam) = lib(takagi(&s, 1e-10))?;
        let vc = v.conjugate();
        let recon =
            &vc * CMat::from_diagonal(&CVec::from_fn(size, |j, _| C64::new(lam[j], 0.0))) * vc.transpose();
        worst = worst.max(max_abs(&(recon - s)));
    }
    ensure!(worst <= 1e-9, "Takagi reconstruction residual {worst:.3e} exceeds 1e-9");

    Ok(format!(
        "Jacobian and metric match finite differences at 1e-6; Takagi worst residual {worst:.1e}"
    ))
}
