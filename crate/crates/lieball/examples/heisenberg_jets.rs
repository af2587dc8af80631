//! Exact weighted-jet verification of the Heisenberg mapping equation:
//! flat and paired models vanish identically, an unpaired slot is caught
//! at weighted order 4, and the normal form constraint is checked.

use lieball::exact::ExactC;
use lieball::jets::{mapping_residual, model_map, normal_form_check};
use lieball::maps::{cst, mul, var};

fn main() {
    let flat = model_map(3, vec![cst(ExactC::zero())], "flat").unwrap();
    let r = mapping_residual(&flat, 8).unwrap();
    println!("(z, 0, w): residual vanishes through order 8: {}", r.is_zero());

    for (label, psi) in [
        ("z1^2", mul(vec![var(0), var(0)])),
        ("z1 z2", mul(vec![var(0), var(1)])),
        ("w", var(2)),
    ] {
        let f = model_map(3, vec![psi.clone(), psi], label).unwrap();
        let r = mapping_residual(&f, 8).unwrap();
        println!("(z, {label}, {label}, w): residual vanishes through order 8: {}", r.is_zero());
    }

    let broken = model_map(2, vec![mul(vec![var(0), var(0)])], "broken").unwrap();
    let r = mapping_residual(&broken, 8).unwrap();
    println!(
        "(z, z1^2, w) with an unpaired slot: first nonzero weighted order {:?}",
        r.first_nonzero_order()
    );
    println!("  order-4 residual terms: {:?}", r.parts[4].c.keys().collect::<Vec<_>>());

    let rep = normal_form_check(&flat, 8).unwrap();
    println!(
        "\nnormal form check on the flat model: constraint holds = {}, a1 = {:?}",
        rep.constraint_holds,
        rep.a1.iter().map(|row| row.iter().map(|c| c.to_c64()).collect::<Vec<_>>()).collect::<Vec<_>>()
    );
}
