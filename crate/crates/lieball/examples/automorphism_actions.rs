//! Automorphism groups acting projectively through the homogeneous lift:
//! membership defects, metric invariance and the linear isotropy action.

use lieball::groups::{
    ball_aut_to_origin, check_group_membership, random_member, typeiv_isotropy, GroupTag,
};
use lieball::linalg::{extend_orthonormal_real, CMat, RVec};
use lieball::maps::HoloMap;
use lieball::metrics::isometry_check;
use lieball::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let groups = [
        GroupTag::BallAut { n: 3 },
        GroupTag::GeneralizedBallAut { n: 3, l: 1 },
        GroupTag::TypeIvAut { m: 4 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for group in groups {
        let a = random_member(group, &mut rng);
        let defect = check_group_membership(&a.matrix, group, 1e-9).unwrap();
        let v = isometry_check(&HoloMap::from_automorphism(&a), 1.0, 50, 0, 1e-8, 0.9).unwrap();
        println!(
            "{group:?}: membership defect {defect:.2e}, metric invariance residual {:.2e}",
            v.max_residual
        );
    }

    // the ball is homogeneous: send any interior point to the origin
    let p0 = vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.4), C64::new(0.0, 0.1)];
    let a = ball_aut_to_origin(&p0, 1e-12).unwrap();
    let img = a.apply(&p0).unwrap();
    println!(
        "\nball transvection sends p0 to {:.2e}",
        img.iter().map(|c| c.norm()).fold(0.0, f64::max)
    );

    // isotropy with trivial phase block acts as plain Z -> Z A
    let m = 4usize;
    let mut v = RVec::from_fn(m, |_, _| rng.gen::<f64>() - 0.5);
    v /= v.norm();
    let o = extend_orthonormal_real(&[v], 1e-9).unwrap();
    let oc = CMat::from_fn(m, m, |i, j| C64::new(o[(i, j)], 0.0));
    let aut = typeiv_isotropy(&oc, &CMat::identity(2, 2), 1e-12).unwrap();
    let z = aut.group.domain().sample_interior(&mut rng, 0.8).unwrap();
    let img = aut.apply(&z).unwrap();
    let lin: Vec<C64> = (0..m).map(|j| (0..m).map(|i| z[i] * oc[(i, j)]).sum()).collect();
    let d = img.iter().zip(&lin).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("Lie ball isotropy vs linear action Z -> ZA: max difference {d:.2e}");
}
