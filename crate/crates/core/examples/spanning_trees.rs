//! Enumerate simplicial spanning trees, streaming and as a census.

use std::ops::ControlFlow;

use critical_groups::generators;
use critical_groups::trees::{self, EnumerationOptions};

fn main() {
    let b = generators::bipyramid();
    trees::enumerate_trees_with(&b, 2, trees::DEFAULT_BUDGET, |t| {
        let faces: Vec<String> = t.faces(&b).iter().map(|s| format!("{:?}", s.vertices())).collect();
        println!("tree {} torsion {}", faces.join(" "), t.torsion_order());
        ControlFlow::Continue(())
    })
    .unwrap();

    let rp2 = generators::rp2();
    let census = trees::enumerate_trees(&rp2, 2, &EnumerationOptions::default()).unwrap();
    println!("projective plane: {} tree(s), tau = {}, histogram {:?}", census.count, census.tau, census.torsion_histogram);

    let k6 = generators::simplex_skeleton(6, 2).unwrap();
    let census = trees::enumerate_trees(&k6, 2, &EnumerationOptions { workers: 4, ..Default::default() }).unwrap();
    println!(
        "2-skeleton on 6 vertices: {} trees, tau = {}, histogram {:?}, {} extensions",
        census.count, census.tau, census.torsion_histogram, census.extensions
    );
}
