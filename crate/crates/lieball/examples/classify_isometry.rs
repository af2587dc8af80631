//! Classify normalized ball-to-Lie-ball isometries: recover the hidden
//! unitary, reduce it to the canonical pencil and read off the class.

use lieball::classify::{classify_map, extract_unitary, CaseTag, TransformStep};
use lieball::maps::{catalog_build, CatalogKey};

fn main() {
    for key in [
        CatalogKey::Itheta { n: 3, theta: 0.3 },
        CatalogKey::Izero { n: 3 },
        CatalogKey::Riv { n: 3 },
    ] {
        let f = catalog_build(&key).unwrap();
        let (u, cert) = extract_unitary(&f, 0, 1e-9).unwrap();
        let (form, witness) = classify_map(&f, 0, 1e-9).unwrap();
        println!("{}:", key.key_string());
        println!("  recovered {}x{} unitary, certification residual {cert:.2e}", u.nrows(), u.ncols());
        match form.case {
            CaseTag::Rational => println!("  class: rational (theta_raw {:.6})", form.theta_raw),
            CaseTag::Irrational(beta) => {
                println!("  class: irrational, beta {beta:.6} (theta_raw {:.6})", form.theta_raw)
            }
        }
        println!("  distance to canonical pencil: {:.2e}", form.residual);
        let moves: Vec<&str> = form
            .transforms
            .iter()
            .map(|t| match t {
                TransformStep::SourceUnitary { .. } => "source rotation",
                TransformStep::SourcePhase { .. } => "source phase",
                TransformStep::TargetRotation { .. } => "target rotation",
                TransformStep::TargetPhase { .. } => "target phase",
            })
            .collect();
        println!("  normalization moves: {}", moves.join(", "));
        println!("  witness attached: {}\n", witness.is_some());
    }
}
