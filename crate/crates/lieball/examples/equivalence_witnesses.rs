//! Every irrational-family member is equivalent to the beta = 0 member:
//! build the explicit witness pair and certify it numerically.

use lieball::classify::{equivalence_witness, witness_residual};
use lieball::groups::{check_group_membership, GroupTag};
use lieball::linalg::{max_abs, CMat, CVec};
use lieball::C64;
use std::f64::consts::PI;

fn main() {
    let n = 3usize;
    for beta in [PI / 12.0, PI / 6.0, PI / 5.0] {
        let pair = equivalence_witness(n, beta).unwrap();

        // ball-side witness preserves diag(I_n, -1)
        let e = CMat::from_diagonal(&CVec::from_fn(n + 1, |i, _| {
            C64::new(if i == n { -1.0 } else { 1.0 }, 0.0)
        }));
        let bd = max_abs(&(&pair.b * &e * pair.b.adjoint() - &e));

        // target-side witness lives in the hyperquadric group
        let td = check_group_membership(&pair.t, GroupTag::TypeIvAut { m: n + 1 }, 1e-12).unwrap();

        let res = witness_residual(&pair, n, beta, 100, 0).unwrap();
        println!(
            "beta {beta:.4}: ball defect {bd:.2e}, target defect {td:.2e}, intertwining residual {res:.2e}"
        );
    }
}
