//! Hermitian form algebra with exact coefficients: signatures of the powers
//! (1 - |z|^2)^p and of a kernel form with a genuinely indefinite part.

use lieball::hforms::{form_from_map, power_form, power_signature, signature, FormMode};
use lieball::maps::{catalog_build, CatalogKey};

fn main() {
    println!("signatures of (1 - |z|^2)^p as Hermitian forms:");
    for n in 2..=4usize {
        for p in 2..=4u32 {
            let s = power_signature(n, p).unwrap();
            println!("  n={n} p={p}: +{} -{} 0:{}", s.positives, s.negatives, s.zeros);
        }
    }

    let h = power_form(2, 3).unwrap();
    println!(
        "\n(1 - |z|^2)^3 on C^2 uses {} monomials, hermitian defect {:.1e}",
        h.monomials.len(),
        h.hermitian_defect()
    );

    let f = catalog_build(&CatalogKey::Exhp0 { n: 2 }).unwrap();
    let k = form_from_map(&f, FormMode::TypeIvKernel).unwrap();
    let s = signature(&k, 1e-10);
    println!(
        "\nkernel form of the degenerate example: {} monomials, signature +{} -{} 0:{}",
        k.monomials.len(),
        s.positives,
        s.negatives,
        s.zeros
    );
    println!("a proper map can carry an indefinite kernel form; isometries cannot");
}
