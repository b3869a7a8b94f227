//! Both matrix-tree identities and the alternating product formula.

use critical_groups::critical;
use critical_groups::generators;
use critical_groups::trees::{self, EnumerationOptions};

fn main() {
    let fixtures = [
        ("bipyramid", generators::bipyramid()),
        ("boundary of the tetrahedron", generators::sphere(2).unwrap()),
        ("2-skeleton on 5 vertices", generators::simplex_skeleton(5, 2).unwrap()),
    ];
    for (name, cx) in &fixtures {
        for i in 1..=cx.dim() {
            let r = trees::verify_smtt(cx, i, &EnumerationOptions::default()).unwrap();
            println!(
                "{name}, i = {i}: pi = {}, tau = {}, tau below = {}, det = {}: {}",
                r.pi,
                r.tau,
                r.tau_below,
                r.reduced_determinant,
                if r.passed() { "ok" } else { "MISMATCH" }
            );
        }
        for i in 0..cx.dim() {
            let q = critical::alternating_order(cx, i).unwrap();
            let k = critical::critical_group_direct(cx, i).unwrap();
            println!("{name}: alternating product {q} vs |K_{i}| = {}", k.order());
        }
    }
}
