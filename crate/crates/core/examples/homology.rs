//! Boundary matrices and reduced homology of a few small complexes.
//!
//! ```bash
//! cargo run --example homology
//! ```

use critical_groups::{generators, SimplicialComplex};

fn describe(name: &str, cx: &SimplicialComplex) {
    println!("{name}: f-vector {:?}, acyclic in codimension one: {}", cx.f_vector(), cx.is_apc());
    for i in -1..=cx.dim() {
        let h = cx.reduced_homology(i).unwrap();
        if !h.is_trivial() {
            println!("  H~_{i}: rank {}, torsion {:?}", h.betti, h.torsion);
        }
    }
}

fn main() {
    let tetra = SimplicialComplex::from_facet_str("1 2 3\n1 2 4\n1 3 4\n2 3 4\n").unwrap();
    println!("boundary of the 2-face [1,2,3]: {:?}", tetra.boundary_matrix(2).unwrap().column(0));
    describe("boundary of the tetrahedron", &tetra);
    describe("bipyramid", &generators::bipyramid());
    describe("projective plane", &generators::rp2());
    describe("4-cycle", &generators::cycle(4).unwrap());
}
