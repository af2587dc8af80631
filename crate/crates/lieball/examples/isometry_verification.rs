//! Pullback-metric verdicts: the catalog isometries hit their forced
//! constants to 1e-9, while the proper-but-not-isometric maps fail loudly.

use lieball::maps::{catalog_build, CatalogKey};
use lieball::metrics::{expected_lambda, isometry_check};

fn main() {
    let cases = [
        (CatalogKey::Riv { n: 3 }, 1.0),
        (CatalogKey::Itheta { n: 3, theta: std::f64::consts::PI / 12.0 }, 1.0),
        (CatalogKey::Flat { n: 2, m: 4 }, 4.0 / 3.0),
        (CatalogKey::Lembed { m: 4 }, 0.25),
        (CatalogKey::WhitneyIv { n: 3 }, 1.5),
        (CatalogKey::Gk { k: 2 }, 1.0),
        (CatalogKey::Gk { k: 2 }, 2.0),
    ];
    for (key, lambda) in cases {
        let f = catalog_build(&key).unwrap();
        let v = isometry_check(&f, lambda, 200, 0, 1e-9, 0.9).unwrap();
        println!(
            "{:<28} lambda {:.4}: {}  (max residual {:.2e} over {} samples)",
            key.key_string(),
            lambda,
            if v.pass { "isometry" } else { "NOT an isometry" },
            v.max_residual,
            v.samples
        );
    }
    println!("\nforced constants for a ball source: lambda = {:?} for n=3, m=4", expected_lambda(3, 4));
}
