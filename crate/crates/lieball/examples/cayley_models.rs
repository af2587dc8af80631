//! Unbounded models and boundary geometry: the Cayley transform between
//! Heisenberg hypersurfaces and balls, plus the stratified Lie ball boundary.

use lieball::domains::{cayley, cayley_inverse, typeiv_singular_point, BoundaryTag, DomainSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let h = DomainSpec::Heisenberg { n: 3 };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = h.sample_interior(&mut rng, 0.5).unwrap();
        let q = cayley(&h, &p).unwrap();
        let back = cayley_inverse(&h, &q).unwrap();
        let d = p.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    println!("Cayley round trip on the Heisenberg model: worst error {worst:.2e}");

    let d4 = DomainSpec::TypeIv { m: 4 };
    let z = d4.sample_interior(&mut rng, 0.6).unwrap();
    println!("\ninterior sample classifies as {:?}", d4.classify_point(&z, 1e-9).unwrap().tag);

    let b = d4.sample_boundary(&mut rng).unwrap();
    let cls = d4.classify_point(&b, 1e-9).unwrap();
    println!("boundary sample: {:?}, defining values {:?}", cls.tag, cls.defining_values);

    // the singular stratum: real direction times a phase, at radius sqrt(2)
    let s = typeiv_singular_point(&[1.0, 2.0, -1.0, 0.5], 0.7);
    let cls = d4.classify_point(&s, 1e-9).unwrap();
    assert_eq!(cls.tag, BoundaryTag::SingularBoundary);
    println!("constructed singular point: {:?}, defining values {:?}", cls.tag, cls.defining_values);
}
