//! Canonical classification of normalized metric-preserving maps from the
//! unit ball B^n into the Lie ball D^IV_{n+1}.
//!
//! Any such map satisfies the functional equation (z, (f.f)/2) = f(z) U for
//! a constant unitary U of size n+1, so the whole classification runs on U.
//! Source rotations, per-coordinate source phases, target rotations and one
//! target phase reduce U to the one-parameter pencil
//!
//!   U(theta) = blockdiag(I_{n-1}, [[i sin t, cos t], [cos t, i sin t]]),
//!
//! theta in [0, pi/2]. theta = pi/4 is the rational class; every other value
//! folds into [0, pi/4), and all folded maps are mutually equivalent via an
//! explicit witness pair (ball-side B, target-side T).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::groups::{check_group_membership, lift, GroupTag};
use crate::linalg::{
    extend_orthonormal_real, max_abs, takagi, unitary_defect, CMat, CVec, MatrixJson, RVec,
};
use crate::maps::{catalog_build, CatalogKey, HoloMap};
use crate::C64;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

/// Half-width of the theta window around pi/4 labeled as the rational class.
pub const RATIONAL_WINDOW: f64 = 1e-7;

/// Tolerance for the structural assertions of the normalization pipeline;
/// looser than the arithmetic tolerances so conditioning noise from the
/// Takagi step never masquerades as a structure violation.
const STRUCT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "beta")]
pub enum CaseTag {
    Rational,
    /// Folded parameter in [0, pi/4).
    Irrational(f64),
}

/// One normalization move. Applying the steps in order to the original map
/// yields the canonical representative: source steps precompose (innermost
/// last), target steps postcompose.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "step")]
pub enum TransformStep {
    /// Precompose with the ball rotation z -> z w (row convention).
    SourceUnitary { w: MatrixJson },
    /// Multiply source coordinate `coord` by e^{i phase} before the map.
    SourcePhase { coord: usize, phase: f64 },
    /// Postcompose with Z -> Z a, `a` real orthogonal on the target.
    TargetRotation { a: MatrixJson },
    /// Postcompose with Z -> e^{i beta} Z.
    TargetPhase { beta: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub n: usize,
    pub case: CaseTag,
    /// Unfolded pencil parameter in [0, pi/2].
    pub theta_raw: f64,
    pub transforms: Vec<TransformStep>,
    /// Max-entry distance of the normalized unitary from U(theta_raw).
    pub residual: f64,
}

/// Equivalence witness: `b` conjugates the source ball (form diag(I_n, -1),
/// homogenizing slot last), `t` acts on the lifted target hyperquadric.
#[derive(Clone, Debug)]
pub struct WitnessPair {
    pub b: CMat,
    pub t: CMat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessJson {
    pub b: MatrixJson,
    pub t: MatrixJson,
}

impl WitnessPair {
    pub fn to_json(&self) -> WitnessJson {
        WitnessJson { b: MatrixJson::from_cmat(&self.b), t: MatrixJson::from_cmat(&self.t) }
    }

    pub fn from_json(j: &WitnessJson) -> Result<WitnessPair> {
        Ok(WitnessPair { b: j.b.to_cmat()?, t: j.t.to_cmat()? })
    }
}

/// The canonical unitary U(theta).
pub fn u_canonical(n: usize, theta: f64) -> CMat {
    let mut u = CMat::identity(n + 1, n + 1);
    u[(n - 1, n - 1)] = C64::new(0.0, theta.sin());
    u[(n, n)] = C64::new(0.0, theta.sin());
    u[(n - 1, n)] = C64::new(theta.cos(), 0.0);
    u[(n, n - 1)] = C64::new(theta.cos(), 0.0);
    u
}

fn draw_probes(f: &HoloMap, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<C64>>> {
    let mut out = Vec::with_capacity(k);
    let mut budget = 50 * k;
    while out.len() < k {
        if budget == 0 {
            return Err(Error::NoSolution);
        }
        budget -= 1;
        let z = f.source.sample_interior(rng, 0.35)?;
        match f.eval(&z) {
            Ok(_) => out.push(z),
            Err(Error::Pole) | Err(Error::BranchPoint) | Err(Error::NotDifferentiable) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Recover the constant unitary of the functional equation by least squares
/// over seeded interior probes, then certify it on fresh probes. Returns the
/// unitary together with the certification residual.
pub fn extract_unitary(f: &HoloMap, seed: u64, tol: f64) -> Result<(CMat, f64)> {
    let n = match (f.source, f.target) {
        (DomainSpec::UnitBall { n }, DomainSpec::TypeIv { m }) if m == n + 1 => n,
        _ => return Err(Error::NotIsometry { residual: f64::INFINITY }),
    };
    if n < 2 {
        return Err(Error::ParameterOutOfRange("classification needs source dimension >= 2".into()));
    }
    let zero = vec![C64::new(0.0, 0.0); n];
    let f0 = f.eval(&zero)?;
    if f0.iter().map(|c| c.norm()).fold(0.0, f64::max) > tol.max(1e-10) * 100.0 {
        return Err(Error::NotNormalized);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 4 * (n + 1);
    let probes = draw_probes(f, k, &mut rng)?;
    // metric preservation at lambda = 1 is equivalent to the exponent-1
    // kernel identity, so reject non-isometries before solving
    for z in &probes {
        let r = f.kernel_identity_residual(z, 1)?;
        if r > tol.max(1e-12) * 100.0 {
            return Err(Error::NotIsometry { residual: r });
        }
    }

    let mut mmat = CMat::zeros(k, n + 1);
    let mut lmat = CMat::zeros(k, n + 1);
    for (r, z) in probes.iter().enumerate() {
        let fz = f.eval(z)?;
        let a: C64 = fz.iter().map(|c| c * c).sum();
        for j in 0..=n {
            mmat[(r, j)] = fz[j];
        }
        for j in 0..n {
            lmat[(r, j)] = z[j];
        }
        lmat[(r, n)] = 0.5 * a;
    }
    let svd = mmat.svd(true, true);
    let u = svd
        .solve(&lmat, 1e-13)
        .map_err(|e| Error::RecoveryFailed(format!("least-squares solve failed: {e}")))?;
    let ud = unitary_defect(&u);
    if ud > 1e-7 {
        return Err(Error::RecoveryFailed(format!(
            "recovered matrix is not unitary (defect {ud:.3e})"
        )));
    }

    let fresh = draw_probes(f, k, &mut rng)?;
    let mut residual = 0.0f64;
    for z in &fresh {
        let fz = f.eval(z)?;
        let a: C64 = fz.iter().map(|c| c * c).sum();
        for j in 0..=n {
            let lhs: C64 = (0..=n).map(|i| fz[i] * u[(i, j)]).sum();
            let rhs = if j < n { z[j] } else { 0.5 * a };
            residual = residual.max((lhs - rhs).norm());
        }
    }
    if residual > tol.max(1e-12) * 1000.0 {
        return Err(Error::RecoveryFailed(format!(
            "functional equation fails on fresh probes (residual {residual:.3e})"
        )));
    }
    Ok((u, residual))
}

/// Reduce a recovered unitary to the canonical pencil, logging every move.
pub fn normalize_unitary(u: &CMat, tol: f64) -> Result<CanonicalForm> {
    let dim = u.nrows();
    if u.ncols() != dim || dim < 3 {
        return Err(Error::DimensionMismatch { expected: dim.max(3), got: u.ncols() });
    }
    let n = dim - 1;
    let ud = unitary_defect(u);
    if ud > 1e-7 {
        return Err(Error::NotUnitary { defect: ud });
    }
    let mut cur = u.clone();
    let mut steps: Vec<TransformStep> = Vec::new();

    // stage 1: symmetrize the source block. The bilinear Gram matrix of the
    // first n columns is complex symmetric; its Takagi factor is the source
    // rotation that diagonalizes it with nonincreasing weights.
    let u0 = cur.columns(0, n).into_owned();
    let s = u0.transpose() * &u0;
    let (v, lam) = takagi(&s, tol.max(1e-10))?;
    let mut block = CMat::identity(dim, dim);
    block.view_mut((0, 0), (n, n)).copy_from(&v);
    cur *= &block;
    steps.push(TransformStep::SourceUnitary { w: MatrixJson::from_cmat(&v.adjoint()) });

    // stage 2: the first n-1 weights must be 1, which forces those columns
    // real (unit Hermitian norm plus unit bilinear norm kills the imaginary
    // part)
    for (j, &l) in lam.iter().take(n - 1).enumerate() {
        if (l - 1.0).abs() > STRUCT_TOL {
            return Err(Error::StructureViolation(format!(
                "bilinear weight {j} is {l:.6}, expected 1"
            )));
        }
    }
    let mut im_defect = 0.0f64;
    for j in 0..n - 1 {
        for i in 0..dim {
            im_defect = im_defect.max(cur[(i, j)].im.abs());
        }
    }
    if im_defect > STRUCT_TOL {
        return Err(Error::StructureViolation(format!(
            "unit-weight columns are not real (defect {im_defect:.3e})"
        )));
    }

    // stage 3: rotate the real columns onto the coordinate axes
    let given: Vec<RVec> = (0..n - 1)
        .map(|j| RVec::from_fn(dim, |i, _| cur[(i, j)].re))
        .collect();
    let c = extend_orthonormal_real(&given, 1e-7)?;
    let cc = CMat::from_fn(dim, dim, |i, j| C64::new(c[(i, j)], 0.0));
    cur = cc.transpose() * cur;
    steps.push(TransformStep::TargetRotation { a: MatrixJson::from_cmat(&cc) });

    let mut block_defect = 0.0f64;
    for j in 0..n - 1 {
        for i in 0..dim {
            let want = if i == j { 1.0 } else { 0.0 };
            block_defect = block_defect.max((cur[(i, j)] - C64::new(want, 0.0)).norm());
        }
    }
    for j in [n - 1, n] {
        for i in 0..n - 1 {
            block_defect = block_defect.max(cur[(i, j)].norm());
        }
    }
    if block_defect > STRUCT_TOL {
        return Err(Error::StructureViolation(format!(
            "axis block is off by {block_defect:.3e} after the target rotation"
        )));
    }

    // everything now lives in the trailing 2x2 corner
    let eta = |m: &CMat| (m[(n - 1, n)], m[(n, n)]);
    let xi = |m: &CMat| (m[(n - 1, n - 1)], m[(n, n - 1)]);

    // stage 4: a target phase (compensated by a global source phase so the
    // axis block survives) makes the bilinear square of the last column a
    // nonnegative real, splitting it into orthogonal real and imaginary
    // parts with the real one at least as long
    let (e1, e2) = eta(&cur);
    let dot = e1 * e1 + e2 * e2;
    let alpha = if dot.norm() > 1e-9 { dot.arg() / 2.0 } else { 0.0 };
    if alpha != 0.0 {
        let ph = C64::from_polar(1.0, -alpha);
        for i in 0..dim {
            cur[(i, n)] *= ph;
        }
        steps.push(TransformStep::TargetPhase { beta: -alpha });
        let w = CMat::from_diagonal(&CVec::from_fn(n, |_, _| C64::from_polar(1.0, alpha)));
        steps.push(TransformStep::SourceUnitary { w: MatrixJson::from_cmat(&w) });
    }

    // stage 5: a plane rotation on the two remaining target slots aligns the
    // real part with the first slot (or, if the real part degenerates at the
    // pencil midpoint, the imaginary part with the second)
    let (e1, e2) = eta(&cur);
    let a = (e1.re, e2.re);
    let b = (e1.im, e2.im);
    let gamma = if a.0.hypot(a.1) >= b.0.hypot(b.1) {
        a.1.atan2(a.0)
    } else {
        (-b.0).atan2(b.1)
    };
    let (sg, cg) = gamma.sin_cos();
    let mut rot = CMat::identity(dim, dim);
    rot[(n - 1, n - 1)] = C64::new(cg, 0.0);
    rot[(n - 1, n)] = C64::new(-sg, 0.0);
    rot[(n, n - 1)] = C64::new(sg, 0.0);
    rot[(n, n)] = C64::new(cg, 0.0);
    cur = rot.transpose() * cur;
    steps.push(TransformStep::TargetRotation { a: MatrixJson::from_cmat(&rot) });

    let (e1, e2) = eta(&cur);
    if e1.im.abs() > STRUCT_TOL || e2.re.abs() > STRUCT_TOL {
        return Err(Error::StructureViolation(format!(
            "last column did not split into real/imaginary slots ({:.3e}, {:.3e})",
            e1.im.abs(),
            e2.re.abs()
        )));
    }

    // stage 6: sign flips put both surviving components in the closed first
    // quadrant, pinning theta in [0, pi/2]
    let s1 = if e1.re < 0.0 { -1.0 } else { 1.0 };
    let s2 = if e2.im < 0.0 { -1.0 } else { 1.0 };
    if s1 < 0.0 || s2 < 0.0 {
        let mut flip = CMat::identity(dim, dim);
        flip[(n - 1, n - 1)] = C64::new(s1, 0.0);
        flip[(n, n)] = C64::new(s2, 0.0);
        cur = &flip * cur;
        steps.push(TransformStep::TargetRotation { a: MatrixJson::from_cmat(&flip) });
    }
    let (e1, e2) = eta(&cur);
    let theta_raw = e2.im.atan2(e1.re);

    // stage 7: the remaining column is forced up to phase by unitarity; a
    // source phase on the last coordinate removes it
    let (x1, x2) = xi(&cur);
    let alpha_p = if theta_raw.cos() >= theta_raw.sin() {
        x2.arg()
    } else {
        (x1 * C64::new(0.0, -1.0)).arg()
    };
    if alpha_p != 0.0 {
        let ph = C64::from_polar(1.0, -alpha_p);
        for i in 0..dim {
            cur[(i, n - 1)] *= ph;
        }
        steps.push(TransformStep::SourcePhase { coord: n - 1, phase: alpha_p });
    }

    let residual = max_abs(&(&cur - u_canonical(n, theta_raw)));
    if residual > STRUCT_TOL {
        return Err(Error::StructureViolation(format!(
            "normalized unitary is {residual:.3e} away from the canonical pencil"
        )));
    }

    let case = if (theta_raw - FRAC_PI_4).abs() <= RATIONAL_WINDOW {
        CaseTag::Rational
    } else if theta_raw < FRAC_PI_4 {
        CaseTag::Irrational(theta_raw)
    } else {
        CaseTag::Irrational(FRAC_PI_2 - theta_raw)
    };
    Ok(CanonicalForm { n, case, theta_raw, transforms: steps, residual })
}

/// Rebuild a catalog representative from the pencil parameter.
pub fn reconstruct_map(n: usize, theta: f64) -> Result<HoloMap> {
    if !(-1e-12..=FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::ParameterOutOfRange(format!(
            "pencil parameter {theta} outside [0, pi/2]"
        )));
    }
    if (theta - FRAC_PI_4).abs() <= RATIONAL_WINDOW {
        return catalog_build(&CatalogKey::Riv { n });
    }
    let beta = theta.min(FRAC_PI_2 - theta).max(0.0);
    catalog_build(&CatalogKey::Itheta { n, theta: beta })
}

/// Witness pair proving the beta-member of the pencil equivalent to the
/// beta = 0 member. `b` lies in the ball conjugation group for diag(I_n, -1)
/// and `t` in the target hyperquadric group; both are checked to 1e-12.
pub fn equivalence_witness(n: usize, beta: f64) -> Result<WitnessPair> {
    if n < 2 {
        return Err(Error::ParameterOutOfRange("witness needs n >= 2".into()));
    }
    if !(0.0..FRAC_PI_4).contains(&beta) {
        return Err(Error::ParameterOutOfRange(format!(
            "witness parameter {beta} outside [0, pi/4)"
        )));
    }
    let rc = (2.0 * beta).cos().sqrt();
    let (sb, cb) = beta.sin_cos();

    let mut b = CMat::identity(n + 1, n + 1);
    b[(n - 1, n - 1)] = C64::new(cb / rc, 0.0);
    b[(n - 1, n)] = C64::new(0.0, -sb / rc);
    b[(n, n - 1)] = C64::new(0.0, sb / rc);
    b[(n, n)] = C64::new(cb / rc, 0.0);
    let e = CMat::from_diagonal(&CVec::from_fn(n + 1, |i, _| {
        C64::new(if i == n { -1.0 } else { 1.0 }, 0.0)
    }));
    let defect = max_abs(&(&b * &e * b.adjoint() - &e));
    if defect > 1e-12 {
        return Err(Error::InvalidElement { defect });
    }

    let s2 = (beta / 2.0).sin().powi(2);
    let q = 2.0 * SQRT_2 * s2;
    let w = SQRT_2 * sb;
    let at = |v: f64| C64::new(v / rc, 0.0);
    let mut t = CMat::identity(n + 3, n + 3);
    t[(n - 1, n - 1)] = at(1.0 - 4.0 * s2);
    t[(n - 1, n + 1)] = at(q);
    t[(n, n)] = at(1.0);
    t[(n, n + 2)] = at(-w);
    t[(n + 1, n - 1)] = at(q);
    t[(n + 1, n + 1)] = at(1.0 - 4.0 * s2);
    t[(n + 2, n)] = at(-w);
    t[(n + 2, n + 2)] = at(1.0);
    check_group_membership(&t, GroupTag::TypeIvAut { m: n + 1 }, 1e-12)?;

    Ok(WitnessPair { b, t })
}

/// Max projective defect of the intertwining relation over seeded interior
/// samples: the lifted beta = 0 map pushed by `t` must be proportional to
/// the lifted beta-map at the `b`-moved point.
pub fn witness_residual(
    pair: &WitnessPair,
    n: usize,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let f0 = catalog_build(&CatalogKey::Itheta { n, theta: 0.0 })?;
    let fb = catalog_build(&CatalogKey::Itheta { n, theta: beta })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let z = f0.source.sample_interior(&mut rng, 0.3)?;
        let (x, _) = lift(&f0.eval(&z)?);
        let xt: Vec<C64> = (0..n + 3)
            .map(|j| (0..n + 3).map(|i| x[i] * pair.t[(i, j)]).sum())
            .collect();
        let mut row: Vec<C64> = z.clone();
        row.push(C64::new(1.0, 0.0));
        let out: Vec<C64> = (0..=n)
            .map(|j| (0..=n).map(|i| row[i] * pair.b[(i, j)]).sum())
            .collect();
        let zeta: Vec<C64> = (0..n).map(|j| out[j] / out[n]).collect();
        let (y, _) = lift(&fb.eval(&zeta)?);
        worst = worst.max(proportionality_defect(&xt, &y));
    }
    Ok(worst)
}

fn proportionality_defect(x: &[C64], y: &[C64]) -> f64 {
    let sx = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let sy = y.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let scale = (sx * sy).max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            worst = worst.max((x[i] * y[j] - x[j] * y[i]).norm() / scale);
        }
    }
    worst
}

/// Full pipeline: recover the unitary, normalize it, and attach a witness
/// when the map falls in the folded irrational class.
pub fn classify_map(
    f: &HoloMap,
    seed: u64,
    tol: f64,
) -> Result<(CanonicalForm, Option<WitnessPair>)> {
    let (u, _) = extract_unitary(f, seed, tol)?;
    let form = normalize_unitary(&u, tol)?;
    let witness = match form.case {
        CaseTag::Irrational(beta) => Some(equivalence_witness(form.n, beta)?),
        CaseTag::Rational => None,
    };
    Ok((form, witness))
}
