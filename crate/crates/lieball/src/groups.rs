//! Automorphism groups: U(n,1) on the ball, the indefinite unitary group on
//! generalized balls, and O(m,2) acting on the Type IV domain through the
//! Borel-embedding homogeneous lift.
//!
//! Homogeneous conventions, fixed once:
//! * Ball and generalized ball act on row vectors [s, w, z] with the scale s
//!   in slot 0 and the negative-signature block leading, preserving
//!   E = diag(-I_{l+1}, I_n) under A E conj(A)^T = E.
//! * Type IV elements are real (m+2)x(m+2) with T E T^T = E,
//!   E = diag(I_m, -I_2), and det of the trailing 2x2 block positive.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::CScalar;
use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, CVec, MatrixJson};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum GroupTag {
    BallAut { n: usize },
    GeneralizedBallAut { n: usize, l: usize },
    TypeIvAut { m: usize },
}

impl GroupTag {
    /// Size of the matrices in this group.
    pub fn matrix_dim(&self) -> usize {
        match *self {
            GroupTag::BallAut { n } => n + 1,
            GroupTag::GeneralizedBallAut { n, l } => n + l + 1,
            GroupTag::TypeIvAut { m } => m + 2,
        }
    }

    /// The domain this group acts on.
    pub fn domain(&self) -> DomainSpec {
        match *self {
            GroupTag::BallAut { n } => DomainSpec::UnitBall { n },
            GroupTag::GeneralizedBallAut { n, l } => DomainSpec::GeneralizedBall { n, l },
            GroupTag::TypeIvAut { m } => DomainSpec::TypeIv { m },
        }
    }

    /// Diagonal of the preserved indefinite form.
    fn form_signs(&self) -> Vec<f64> {
        match *self {
            GroupTag::BallAut { n } => {
                let mut e = vec![-1.0];
                e.extend(std::iter::repeat(1.0).take(n));
                e
            }
            GroupTag::GeneralizedBallAut { n, l } => {
                let mut e = vec![-1.0; l + 1];
                e.extend(std::iter::repeat(1.0).take(n));
                e
            }
            GroupTag::TypeIvAut { m } => {
                let mut e = vec![1.0; m];
                e.extend([-1.0, -1.0]);
                e
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Automorphism {
    pub group: GroupTag,
    pub matrix: CMat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutomorphismJson {
    pub group: GroupTag,
    pub matrix: MatrixJson,
}

/// Group membership test: returns the maximum defect of the defining
/// identity, or an error for hard violations (shape, realness, det(D) <= 0).
pub fn check_group_membership(m: &CMat, group: GroupTag, tol: f64) -> Result<f64> {
    let dim = group.matrix_dim();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
    }
    let signs = group.form_signs();
    let e = CMat::from_diagonal(&CVec::from_fn(dim, |i, _| C64::new(signs[i], 0.0)));
    let defect = match group {
        GroupTag::TypeIvAut { m: mm } => {
            let realness = m.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
            if realness > tol {
                return Err(Error::InvalidElement { defect: realness });
            }
            let d = max_abs(&(m * &e * m.transpose() - &e));
            let det_d = (m[(mm, mm)] * m[(mm + 1, mm + 1)]
                - m[(mm, mm + 1)] * m[(mm + 1, mm)])
                .re;
            if det_d <= 1e-12 {
                return Err(Error::InvalidElement { defect: -det_d });
            }
            d
        }
        _ => max_abs(&(m * &e * m.adjoint() - &e)),
    };
    if defect > tol {
        return Err(Error::InvalidElement { defect });
    }
    Ok(defect)
}

impl Automorphism {
    pub fn new(group: GroupTag, matrix: CMat, tol: f64) -> Result<Self> {
        check_group_membership(&matrix, group, tol)?;
        Ok(Automorphism { group, matrix })
    }

    pub fn identity(group: GroupTag) -> Self {
        let d = group.matrix_dim();
        Automorphism { group, matrix: CMat::identity(d, d) }
    }

    /// Inverse through the indefinite form: A^{-1} = E conj(A)^T E.
    pub fn inverse(&self) -> Self {
        let dim = self.group.matrix_dim();
        let signs = self.group.form_signs();
        let e = CMat::from_diagonal(&CVec::from_fn(dim, |i, _| C64::new(signs[i], 0.0)));
        let inv = match self.group {
            GroupTag::TypeIvAut { .. } => &e * self.matrix.transpose() * &e,
            _ => &e * self.matrix.adjoint() * &e,
        };
        Automorphism { group: self.group, matrix: inv }
    }

    pub fn compose(&self, then: &Automorphism) -> Result<Self> {
        if self.group != then.group {
            return Err(Error::DomainMismatch("automorphism group mismatch".into()));
        }
        Ok(Automorphism { group: self.group, matrix: &self.matrix * &then.matrix })
    }

    pub fn to_json(&self) -> AutomorphismJson {
        AutomorphismJson { group: self.group, matrix: MatrixJson::from_cmat(&self.matrix) }
    }

    pub fn from_json(j: &AutomorphismJson, tol: f64) -> Result<Self> {
        Automorphism::new(j.group, j.matrix.to_cmat()?, tol)
    }

    pub fn apply(&self, p: &[C64]) -> Result<Vec<C64>> {
        self.apply_generic(p, &C64::new(0.0, 0.0))
    }

    /// Projective action, generic over the scalar so the same code path
    /// serves numeric evaluation, dual-number Jacobians and series.
    pub fn apply_generic<S: CScalar>(&self, p: &[S], template: &S) -> Result<Vec<S>> {
        let dom = self.group.domain();
        if p.len() != dom.dim() {
            return Err(Error::DimensionMismatch { expected: dom.dim(), got: p.len() });
        }
        let lift1 = |c: C64| template.lift(c);
        match self.group {
            GroupTag::BallAut { .. } | GroupTag::GeneralizedBallAut { .. } => {
                // row [1, p] times the matrix, then divide by slot 0
                let dim = self.group.matrix_dim();
                let mut row: Vec<S> = Vec::with_capacity(dim);
                row.push(lift1(C64::new(1.0, 0.0)));
                row.extend(p.iter().cloned());
                let out = row_times(&row, &self.matrix, template);
                let s = out[0].clone();
                out[1..]
                    .iter()
                    .map(|c| c.div(&s))
                    .collect()
            }
            GroupTag::TypeIvAut { m } => {
                // Borel lift [Z, (1 + A/2)/sqrt2, (1 - A/2)/sqrt(-2)], A = ZZ^T
                let half = lift1(C64::new(0.5, 0.0));
                let one = lift1(C64::new(1.0, 0.0));
                let inv_s2 = lift1(C64::new(1.0 / std::f64::consts::SQRT_2, 0.0));
                let inv_si2 = lift1(C64::new(0.0, -1.0 / std::f64::consts::SQRT_2));
                let mut a = lift1(C64::new(0.0, 0.0));
                for z in p {
                    a = a.add(&z.mul(z));
                }
                let ha = a.mul(&half);
                let mut row: Vec<S> = p.to_vec();
                row.push(one.add(&ha).mul(&inv_s2));
                row.push(one.sub(&ha).mul(&inv_si2));
                let out = row_times(&row, &self.matrix, template);
                // denominator lambda = out_m / sqrt2 + out_{m+1} * i/sqrt2
                let i_s2 = lift1(C64::new(0.0, 1.0 / std::f64::consts::SQRT_2));
                let den = out[m].mul(&inv_s2).add(&out[m + 1].mul(&i_s2));
                out[..m].iter().map(|c| c.div(&den)).collect()
            }
        }
    }
}

fn row_times<S: CScalar>(row: &[S], m: &CMat, template: &S) -> Vec<S> {
    let mut out = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut acc = template.lift(C64::new(0.0, 0.0));
        for (i, r) in row.iter().enumerate() {
            acc = acc.add(&r.mul(&template.lift(m[(i, j)])));
        }
        out.push(acc);
    }
    out
}

/// Borel-embedding homogeneous lift of a Type IV point, with the
/// hyperquadric residual |Σ x_i² − x_{m+1}² − x_{m+2}²| for audit.
pub fn lift(z: &[C64]) -> (Vec<C64>, f64) {
    let a: C64 = z.iter().map(|c| c * c).sum();
    let s2 = std::f64::consts::SQRT_2;
    let mut x = z.to_vec();
    x.push((1.0 + 0.5 * a) / s2);
    x.push((1.0 - 0.5 * a) * C64::new(0.0, -1.0 / s2));
    let m = z.len();
    let q: C64 = x[..m].iter().map(|c| c * c).sum::<C64>() - x[m] * x[m] - x[m + 1] * x[m + 1];
    (x, q.norm())
}

/// Ball automorphism sending an interior point to the origin: a rotation
/// aligning p0 with the first axis followed by the standard transvection.
pub fn ball_aut_to_origin(p0: &[C64], tol: f64) -> Result<Automorphism> {
    let n = p0.len();
    let a = p0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if a >= 1.0 {
        return Err(Error::NotInterior);
    }
    let group = GroupTag::BallAut { n };
    if a < 1e-14 {
        return Ok(Automorphism::identity(group));
    }
    // unitary R with (row) p0 * R = (a, 0, ..., 0): first column conj(p0)/a
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    cols.push(CVec::from_fn(n, |i, _| p0[i].conj() / a));
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = CVec::zeros(n);
        v[e] = C64::new(1.0, 0.0);
        for c in &cols {
            let proj = c.dotc(&v);
            v -= c * proj;
        }
        let nv = v.norm();
        if nv > 1e-7 {
            v /= C64::new(nv, 0.0);
            cols.push(v);
        }
    }
    let r = CMat::from_columns(&cols);
    let dim = n + 1;
    let mut m1 = CMat::identity(dim, dim);
    m1.view_mut((1, 1), (n, n)).copy_from(&r);
    // transvection on (s, z1) with real parameter a
    let t = 1.0 / (1.0 - a * a).sqrt();
    let mut m2 = CMat::identity(dim, dim);
    m2[(0, 0)] = C64::new(t, 0.0);
    m2[(0, 1)] = C64::new(-t * a, 0.0);
    m2[(1, 0)] = C64::new(-t * a, 0.0);
    m2[(1, 1)] = C64::new(t, 0.0);
    Automorphism::new(group, m1 * m2, tol)
}

/// Isotropy element of the Type IV domain from a real orthogonal A and a
/// 2x2 rotation D, acting as Z -> e^{i phi} Z A.
pub fn typeiv_isotropy(a: &CMat, d: &CMat, tol: f64) -> Result<Automorphism> {
    let m = a.nrows();
    if a.ncols() != m || d.nrows() != 2 || d.ncols() != 2 {
        return Err(Error::DimensionMismatch { expected: m, got: a.ncols() });
    }
    let dim = m + 2;
    let mut t = CMat::zeros(dim, dim);
    t.view_mut((0, 0), (m, m)).copy_from(a);
    t.view_mut((m, m), (2, 2)).copy_from(d);
    Automorphism::new(GroupTag::TypeIvAut { m }, t, tol)
}

/// Seeded random member of the group: compact part from QR-style
/// orthonormalization, mixed with hyperbolic boosts across (+,-) pairs.
pub fn random_member<R: Rng>(group: GroupTag, rng: &mut R) -> Automorphism {
    let dim = group.matrix_dim();
    let signs = group.form_signs();
    let real_only = matches!(group, GroupTag::TypeIvAut { .. });
    let mut m = CMat::identity(dim, dim);

    // block-diagonal compact part: unitary/orthogonal within each sign block
    let neg: Vec<usize> = (0..dim).filter(|&i| signs[i] < 0.0).collect();
    let pos: Vec<usize> = (0..dim).filter(|&i| signs[i] > 0.0).collect();
    for block in [&neg, &pos] {
        if block.is_empty() {
            continue;
        }
        let k = block.len();
        let g = CMat::from_fn(k, k, |_, _| {
            if real_only {
                C64::new(rng.gen::<f64>() - 0.5, 0.0)
            } else {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            }
        });
        let q = g.qr().q();
        for (bi, &i) in block.iter().enumerate() {
            for (bj, &j) in block.iter().enumerate() {
                m[(i, j)] = q[(bi, bj)];
            }
        }
    }

    // boosts pairing each negative slot with a positive one
    for (&i, &j) in neg.iter().zip(pos.iter()) {
        // modest boost: keeps images of interior samples away from the
        // boundary, where metric roundoff would swamp invariance checks
        let t: f64 = 0.3 * (rng.gen::<f64>() - 0.5);
        let mut b = CMat::identity(dim, dim);
        b[(i, i)] = C64::new(t.cosh(), 0.0);
        b[(j, j)] = C64::new(t.cosh(), 0.0);
        b[(i, j)] = C64::new(t.sinh(), 0.0);
        b[(j, i)] = C64::new(t.sinh(), 0.0);
        m = m * b;
    }

    let mut aut = Automorphism { group, matrix: m };
    if let GroupTag::TypeIvAut { m: mm } = group {
        // enforce det(D) > 0 by flipping a row of the trailing block if needed
        let det_d = (aut.matrix[(mm, mm)] * aut.matrix[(mm + 1, mm + 1)]
            - aut.matrix[(mm, mm + 1)] * aut.matrix[(mm + 1, mm)])
            .re;
        if det_d <= 0.0 {
            for j in 0..aut.group.matrix_dim() {
                aut.matrix[(mm + 1, j)] = -aut.matrix[(mm + 1, j)];
            }
            // keep the form: flipping one negative row preserves T E T^T
        }
    }
    debug_assert!(check_group_membership(&aut.matrix, group, 1e-8).is_ok());
    aut
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::BoundaryTag;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lift_examples() {
        let (x, res) = lift(&[C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!((x[2] - C64::new(1.0 / 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((x[3] - C64::new(0.0, -1.0 / 2f64.sqrt())).norm() < 1e-15);
        assert!(res < 1e-12);
        let (x, res) = lift(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!((x[2] - C64::new(1.5 / 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(res < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = DomainSpec::TypeIv { m: 5 };
        for _ in 0..20 {
            let z = d.sample_interior(&mut rng, 0.9).unwrap();
            assert!(lift(&z).1 < 1e-12);
        }
    }

    #[test]
    fn membership_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &g in &[
            GroupTag::BallAut { n: 3 },
            GroupTag::GeneralizedBallAut { n: 3, l: 1 },
            GroupTag::TypeIvAut { m: 4 },
        ] {
            let id = Automorphism::identity(g);
            assert_eq!(check_group_membership(&id.matrix, g, 1e-12).unwrap(), 0.0);
            for _ in 0..10 {
                let a = random_member(g, &mut rng);
                let d = check_group_membership(&a.matrix, g, 1e-9).unwrap();
                let inv = a.inverse();
                let di = check_group_membership(&inv.matrix, g, 1e-8).unwrap();
                assert!(d < 1e-10 && di < 1e-8);
                let prod = a.compose(&inv).unwrap();
                assert!(max_abs(&(prod.matrix - CMat::identity(g.matrix_dim(), g.matrix_dim()))) < 1e-9);
            }
        }
    }

    #[test]
    fn hyperbolic_block_is_member() {
        // boost on one (+,-) pair of O(4,2)
        let g = GroupTag::TypeIvAut { m: 4 };
        let t: f64 = 0.7;
        let mut m = CMat::identity(6, 6);
        m[(3, 3)] = C64::new(t.cosh(), 0.0);
        m[(4, 4)] = C64::new(t.cosh(), 0.0);
        m[(3, 4)] = C64::new(t.sinh(), 0.0);
        m[(4, 3)] = C64::new(t.sinh(), 0.0);
        assert!(check_group_membership(&m, g, 1e-12).unwrap() < 1e-12);
    }

    #[test]
    fn isotropy_acts_as_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 3;
        let g = random_real(m, &mut rng);
        let q = g.qr().q();
        let d2 = CMat::identity(2, 2);
        let aut = typeiv_isotropy(&q, &d2, 1e-10).unwrap();
        let dom = DomainSpec::TypeIv { m };
        for _ in 0..20 {
            let z = dom.sample_interior(&mut rng, 0.9).unwrap();
            let img = aut.apply(&z).unwrap();
            let zrow = CMat::from_fn(1, m, |_, j| z[j]);
            let expect = zrow * &q;
            for j in 0..m {
                assert!((img[j] - expect[(0, j)]).norm() < 1e-12);
            }
        }
        // SO(2) part acts by a global phase
        let phi: f64 = 0.6;
        let rot = CMat::from_fn(2, 2, |r, c| {
            C64::new(
                match (r, c) {
                    (0, 0) | (1, 1) => phi.cos(),
                    (0, 1) => -phi.sin(),
                    _ => phi.sin(),
                },
                0.0,
            )
        });
        let aut2 = typeiv_isotropy(&CMat::identity(m, m), &rot, 1e-10).unwrap();
        let z = dom.sample_interior(&mut rng, 0.9).unwrap();
        let img = aut2.apply(&z).unwrap();
        let phase = img[0] / z[0];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        for j in 0..m {
            assert!((img[j] - phase * z[j]).norm() < 1e-10);
        }
    }

    fn random_real(m: usize, rng: &mut impl Rng) -> CMat {
        CMat::from_fn(m, m, |_, _| C64::new(rng.gen::<f64>() - 0.5, 0.0))
    }

    #[test]
    fn to_origin_and_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dom = DomainSpec::UnitBall { n: 3 };
        for _ in 0..20 {
            let p0 = dom.sample_interior(&mut rng, 0.9).unwrap();
            let a = ball_aut_to_origin(&p0, 1e-10).unwrap();
            let img = a.apply(&p0).unwrap();
            assert!(img.iter().all(|c| c.norm() < 1e-12));
            let back = a.inverse().apply(&img).unwrap();
            for (x, y) in back.iter().zip(&p0) {
                assert!((x - y).norm() < 1e-12);
            }
        }
        let zero = vec![C64::new(0.0, 0.0); 2];
        let a = ball_aut_to_origin(&zero, 1e-10).unwrap();
        assert!(max_abs(&(a.matrix - CMat::identity(3, 3))) < 1e-15);
        let out = vec![C64::new(1.2, 0.0), C64::new(0.0, 0.0)];
        assert!(matches!(ball_aut_to_origin(&out, 1e-10), Err(Error::NotInterior)));
    }

    #[test]
    fn action_preserves_boundary_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &g in &[
            GroupTag::BallAut { n: 2 },
            GroupTag::GeneralizedBallAut { n: 2, l: 1 },
            GroupTag::TypeIvAut { m: 3 },
        ] {
            let dom = g.domain();
            for _ in 0..20 {
                let a = random_member(g, &mut rng);
                let p = dom.sample_interior(&mut rng, 0.8).unwrap();
                let img = a.apply(&p).unwrap();
                assert_eq!(dom.classify_point(&img, 1e-8).unwrap().tag, BoundaryTag::Interior);
                let b = dom.sample_boundary(&mut rng).unwrap();
                let imgb = a.apply(&b).unwrap();
                assert_eq!(
                    dom.classify_point(&imgb, 1e-8).unwrap().tag,
                    BoundaryTag::SmoothBoundary,
                    "{g:?}"
                );
            }
        }
    }
}
