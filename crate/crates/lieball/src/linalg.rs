//! Dense complex linear algebra: Takagi factorization of complex symmetric
//! matrices, orthonormal completions and matched unitaries.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Row-major JSON wire format for complex matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_cmat(m: &CMat) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                re.push(m[(r, c)].re);
                im.push(m[(r, c)].im);
            }
        }
        MatrixJson { rows, cols, re, im }
    }

    pub fn to_cmat(&self) -> Result<CMat> {
        let n = self.rows * self.cols;
        if self.re.len() != n || self.im.len() != n {
            return Err(Error::Invalid(format!(
                "matrix payload has {} re / {} im entries, expected {}",
                self.re.len(),
                self.im.len(),
                n
            )));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |r, c| {
            C64::new(self.re[r * self.cols + c], self.im[r * self.cols + c])
        }))
    }
}

/// JSON wire format for a complex point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl PointJson {
    pub fn from_point(p: &[C64]) -> Self {
        PointJson {
            re: p.iter().map(|c| c.re).collect(),
            im: p.iter().map(|c| c.im).collect(),
        }
    }
    pub fn to_point(&self) -> Result<Vec<C64>> {
        if self.re.len() != self.im.len() {
            return Err(Error::Invalid("point re/im length mismatch".into()));
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect())
    }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn unitary_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMat::identity(n, n)))
}

fn phase_normalize_sign(col: &mut CVec) {
    // Sign convention: the largest-modulus entry (first such index) gets
    // nonnegative real part, breaking ties toward positive imaginary part.
    let mut best = 0usize;
    let mut bestn = -1.0f64;
    for (i, c) in col.iter().enumerate() {
        if c.norm() > bestn + 1e-12 {
            bestn = c.norm();
            best = i;
        }
    }
    let c = col[best];
    if c.re < -1e-12 || (c.re.abs() <= 1e-12 && c.im < 0.0) {
        for x in col.iter_mut() {
            *x = -*x;
        }
    }
}

fn phase_normalize_full(col: &mut CVec) {
    let mut best = 0usize;
    let mut bestn = -1.0f64;
    for (i, c) in col.iter().enumerate() {
        if c.norm() > bestn + 1e-12 {
            bestn = c.norm();
            best = i;
        }
    }
    if bestn > 0.0 {
        let phase = col[best] / col[best].norm();
        for x in col.iter_mut() {
            *x /= phase;
        }
    }
}

/// Takagi factorization of a complex symmetric matrix.
///
/// Returns `(v, lambda)` with `v` unitary, `lambda` nonnegative and
/// nonincreasing, such that `v^T s v = diag(lambda)`, equivalently
/// `s = conj(v) diag(lambda) conj(v)^T`.
///
/// Computed through the real symmetric embedding `[[X, Y], [Y, -X]]` of
/// `s = X + iY`, whose spectrum is `{+sigma_j, -sigma_j}`; a real eigenvector
/// `(a; b)` at `sigma >= 0` yields `v = a + ib` with `s conj(v) = sigma v`.
/// Eigenvectors at distinct nonnegative values are automatically
/// complex-orthonormal; the kernel needs an explicit Gram-Schmidt pass since
/// `v` and `iv` both show up there.
pub fn takagi(s: &CMat, tol: f64) -> Result<(CMat, Vec<f64>)> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s.ncols() });
    }
    let scale = max_abs(s).max(1.0);
    let sym_defect = max_abs(&(s - s.transpose()));
    if sym_defect > tol.max(1e-10) * scale {
        return Err(Error::NotSymmetric { defect: sym_defect });
    }

    let x = RMat::from_fn(n, n, |r, c| (s[(r, c)].re + s[(c, r)].re) / 2.0);
    let y = RMat::from_fn(n, n, |r, c| (s[(r, c)].im + s[(c, r)].im) / 2.0);
    let mut t = RMat::zeros(2 * n, 2 * n);
    t.view_mut((0, 0), (n, n)).copy_from(&x);
    t.view_mut((0, n), (n, n)).copy_from(&y);
    t.view_mut((n, 0), (n, n)).copy_from(&y);
    t.view_mut((n, n), (n, n)).copy_from(&(-&x));

    let eig = nalgebra::SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let zero_tol = (tol.max(1e-10) * scale).max(1e-13);
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    let mut lambdas: Vec<f64> = Vec::with_capacity(n);

    for &idx in &order {
        let lam = eig.eigenvalues[idx];
        if lam <= zero_tol {
            break;
        }
        let ev = eig.eigenvectors.column(idx);
        // eigenvector (a; b) gives s conj(a + ib) = lam (a + ib); the column
        // we keep is the conjugate so that v^T s v comes out diagonal
        let v = CVec::from_fn(n, |i, _| C64::new(ev[i], -ev[i + n]));
        cols.push(v);
        lambdas.push(lam);
    }
    if cols.len() > n {
        return Err(Error::NoConvergence);
    }

    // Kernel vectors: eigenvectors with |lambda| within tolerance of zero,
    // projected against what we already have and orthonormalized.
    if cols.len() < n {
        for &idx in &order {
            let lam = eig.eigenvalues[idx];
            if lam.abs() > zero_tol {
                continue;
            }
            let ev = eig.eigenvectors.column(idx);
            let mut v = CVec::from_fn(n, |i, _| C64::new(ev[i], -ev[i + n]));
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
            let nv = v.norm();
            if nv > 1e-7 {
                v /= C64::new(nv, 0.0);
                cols.push(v);
                lambdas.push(0.0);
                if cols.len() == n {
                    break;
                }
            }
        }
    }
    if cols.len() != n {
        return Err(Error::NoConvergence);
    }

    for (j, c) in cols.iter_mut().enumerate() {
        if lambdas[j] > zero_tol {
            phase_normalize_sign(c);
        } else {
            phase_normalize_full(c);
        }
    }
    let lambdas: Vec<f64> = lambdas
        .iter()
        .map(|&l| if l <= zero_tol { 0.0 } else { l })
        .collect();

    let v = CMat::from_columns(&cols);
    let vc = v.conjugate();
    let recon = &vc * CMat::from_diagonal(&CVec::from_fn(n, |i, _| C64::new(lambdas[i], 0.0))) * vc.transpose();
    let defect = max_abs(&(recon - s));
    if defect > (tol.max(1e-9)) * scale * 10.0 {
        return Err(Error::NoConvergence);
    }
    Ok((v, lambdas))
}

/// Extend `k` orthonormal real vectors in `R^m` to an orthogonal `m x m`
/// matrix whose first `k` columns are the given ones.
pub fn extend_orthonormal_real(given: &[RVec], tol: f64) -> Result<RMat> {
    if given.is_empty() {
        return Err(Error::Invalid("no vectors to extend".into()));
    }
    let m = given[0].len();
    let k = given.len();
    if k > m {
        return Err(Error::DimensionMismatch { expected: m, got: k });
    }
    let mut defect: f64 = 0.0;
    for i in 0..k {
        if given[i].len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: given[i].len() });
        }
        for j in 0..=i {
            let d = given[i].dot(&given[j]) - if i == j { 1.0 } else { 0.0 };
            defect = defect.max(d.abs());
        }
    }
    if defect > tol.max(1e-9) {
        return Err(Error::NotOrthonormal { defect });
    }
    let mut cols: Vec<RVec> = given.to_vec();
    for e in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = RVec::zeros(m);
        v[e] = 1.0;
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        let nv = v.norm();
        if nv > 1e-7 {
            cols.push(v / nv);
        }
    }
    if cols.len() != m {
        return Err(Error::NoSolution);
    }
    Ok(RMat::from_columns(&cols))
}

/// Find a unitary `w` with `w * f.column(j) ~= l.column(j)` for every `j`.
///
/// Exists iff the two column families share a Gram matrix; both are
/// orthonormalized in lockstep and the bases completed deterministically.
pub fn matched_unitary(f: &CMat, l: &CMat, tol: f64) -> Result<CMat> {
    let m = f.nrows();
    if l.nrows() != m {
        return Err(Error::DimensionMismatch { expected: m, got: l.nrows() });
    }
    if l.ncols() != f.ncols() {
        return Err(Error::DimensionMismatch { expected: f.ncols(), got: l.ncols() });
    }
    let gram_defect = max_abs(&(f.adjoint() * f - l.adjoint() * l));
    let scale = max_abs(f).max(1.0);
    if gram_defect > tol * scale * scale {
        return Err(Error::NormMismatch { defect: gram_defect });
    }

    let mut qf: Vec<CVec> = Vec::new();
    let mut ql: Vec<CVec> = Vec::new();
    let drop_tol = (tol * scale).max(1e-9);
    for j in 0..f.ncols() {
        let mut vf: CVec = f.column(j).into();
        let mut vl: CVec = l.column(j).into();
        for (bf, bl) in qf.iter().zip(&ql) {
            let proj = bf.dotc(&vf);
            vf -= bf * proj;
            vl -= bl * proj;
        }
        let nf = vf.norm();
        if nf > drop_tol {
            qf.push(vf / C64::new(nf, 0.0));
            ql.push(vl / C64::new(nf, 0.0));
        }
    }
    // Complete both bases with standard vectors, in lockstep.
    for e in 0..m {
        if qf.len() == m {
            break;
        }
        let mut vf = CVec::zeros(m);
        vf[e] = C64::new(1.0, 0.0);
        let mut vl = vf.clone();
        for (bf, bl) in qf.iter().zip(&ql) {
            let pf = bf.dotc(&vf);
            vf -= bf * pf;
            let pl = bl.dotc(&vl);
            vl -= bl * pl;
        }
        let nf = vf.norm();
        let nl = vl.norm();
        if nf > 1e-7 && nl > 1e-7 {
            qf.push(vf / C64::new(nf, 0.0));
            ql.push(vl / C64::new(nl, 0.0));
        }
    }
    if qf.len() != m {
        return Err(Error::NoSolution);
    }
    let qfm = CMat::from_columns(&qf);
    let qlm = CMat::from_columns(&ql);
    let w = qlm * qfm.adjoint();
    let residual = max_abs(&(&w * f - l));
    if residual > (tol * scale).max(1e-8) * 10.0 {
        return Err(Error::NoSolution);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut impl Rng) -> CMat {
        let a = CMat::from_fn(n, n, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        &a + a.transpose()
    }

    #[test]
    fn takagi_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            let s = random_symmetric(n, &mut rng);
            let (v, lam) = takagi(&s, 1e-10).unwrap();
            assert!(unitary_defect(&v) < 1e-9);
            let d = CMat::from_diagonal(&CVec::from_fn(n, |i, _| C64::new(lam[i], 0.0)));
            let vc = v.conjugate();
            let recon = &vc * d * vc.transpose();
            assert!(max_abs(&(recon - &s)) < 1e-9, "n={n}");
            for w in lam.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn takagi_handles_kernel() {
        // rank-1 symmetric: u u^T with complex u
        let u = CVec::from_vec(vec![
            C64::new(1.0, 0.5),
            C64::new(-0.3, 0.2),
            C64::new(0.0, 1.1),
        ]);
        let s = &u * u.transpose();
        let (v, lam) = takagi(&s, 1e-10).unwrap();
        assert!(unitary_defect(&v) < 1e-9);
        assert!(lam[1].abs() < 1e-9 && lam[2].abs() < 1e-9);
        let d = CMat::from_diagonal(&CVec::from_fn(3, |i, _| C64::new(lam[i], 0.0)));
        let vc = v.conjugate();
        assert!(max_abs(&(&vc * d * vc.transpose() - &s)) < 1e-9);
    }

    #[test]
    fn takagi_diag_example() {
        // diag(2, -2): the -2 entry picks up a factor i in the vectors
        let s = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(-2.0, 0.0),
        ]));
        let (v, lam) = takagi(&s, 1e-12).unwrap();
        assert!((lam[0] - 2.0).abs() < 1e-12 && (lam[1] - 2.0).abs() < 1e-12);
        let d = CMat::from_diagonal(&CVec::from_fn(2, |i, _| C64::new(lam[i], 0.0)));
        let vc = v.conjugate();
        assert!(max_abs(&(&vc * d * vc.transpose() - &s)) < 1e-10);
    }

    #[test]
    fn takagi_rejects_nonsymmetric() {
        let s = CMat::from_fn(2, 2, |r, c| C64::new((r * 2 + c) as f64, 0.0));
        assert!(matches!(takagi(&s, 1e-12), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn extend_orthonormal_works() {
        let a = RVec::from_vec(vec![0.6, 0.8, 0.0]);
        let q = extend_orthonormal_real(&[a], 1e-12).unwrap();
        let defect = (q.transpose() * &q - RMat::identity(3, 3)).abs().max();
        assert!(defect < 1e-12);
        assert!((q[(0, 0)] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn matched_unitary_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 4;
        // random unitary from QR of a random complex matrix
        let a = CMat::from_fn(m, m, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let w0 = a.qr().q();
        let f = CMat::from_fn(m, 6, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let l = &w0 * &f;
        let w = matched_unitary(&f, &l, 1e-10).unwrap();
        assert!(unitary_defect(&w) < 1e-9);
        assert!(max_abs(&(&w * &f - &l)) < 1e-9);
    }

    #[test]
    fn matrix_json_roundtrip() {
        let m = CMat::from_fn(2, 3, |r, c| C64::new(r as f64, c as f64));
        let j = MatrixJson::from_cmat(&m);
        assert_eq!(j.to_cmat().unwrap(), m);
    }
}
