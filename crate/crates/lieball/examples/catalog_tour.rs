//! Walk the named map catalog: build one representative per family,
//! evaluate it at a seeded interior point and show where the image lands.

use lieball::maps::{catalog_build, catalog_list, var, CatalogKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    println!("catalog families:");
    for (key, what) in catalog_list() {
        println!("  {key:<28} {what}");
    }

    let reps = [
        CatalogKey::Riv { n: 3 },
        CatalogKey::Itheta { n: 3, theta: std::f64::consts::PI / 6.0 },
        CatalogKey::Izero { n: 3 },
        CatalogKey::Lembed { m: 4 },
        CatalogKey::Flat { n: 2, m: 4 },
        CatalogKey::WhitneyIv { n: 3 },
        CatalogKey::Gk { k: 2 },
        CatalogKey::PsiDegenerate { n: 2, m: 4, psi: Box::new(var(0)) },
        CatalogKey::Exhp0 { n: 2 },
        CatalogKey::ClassB { n: 3 },
    ];
    println!("\nrepresentatives at a seeded interior point:");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for key in reps {
        let f = catalog_build(&key).unwrap();
        let z = f.source.sample_interior(&mut rng, 0.4).unwrap();
        let fz = f.eval(&z).unwrap();
        let vals = f.target.defining_values(&fz).unwrap();
        println!(
            "  {:<22} {:?} -> {:?}, image defining values {:?}",
            key.key_string(),
            f.source,
            f.target,
            vals.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }
}
