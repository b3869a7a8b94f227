#![allow(dead_code)]

use critical_groups::{generators, SimplicialComplex};
use rand::Rng;

/// A random connected graph on `2..=max_vertices` vertices: a random
/// spanning tree plus each remaining edge with probability `extra`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, max_vertices: u32, extra: f64) -> SimplicialComplex {
    let n = rng.gen_range(2..=max_vertices);
    let mut edges = Vec::new();
    for v in 2..=n {
        edges.push(vec![rng.gen_range(1..v), v]);
    }
    for a in 1..=n {
        for b in a + 1..=n {
            if !edges.contains(&vec![a, b]) && rng.gen_bool(extra) {
                edges.push(vec![a, b]);
            }
        }
    }
    SimplicialComplex::from_facets(edges).unwrap()
}

/// Named fixtures used across the suites.
pub fn fixtures() -> Vec<(String, SimplicialComplex)> {
    let mut out = vec![
        ("bipyramid".to_string(), generators::bipyramid()),
        ("boundary of the 3-simplex".to_string(), generators::sphere(2).unwrap()),
        ("boundary of the 4-simplex".to_string(), generators::sphere(3).unwrap()),
    ];
    for n in 3..=6 {
        for k in 1..=2u32 {
            if k < n {
                out.push((format!("{k}-skeleton of the simplex on {n} vertices"), generators::simplex_skeleton(n, k).unwrap()));
            }
        }
    }
    out
}
