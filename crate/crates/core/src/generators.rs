//! Standard test complexes.

use itertools::Itertools;

use crate::complex::{ComplexError, SimplicialComplex};

/// The equatorial bipyramid: a triangle `123` coned off to both apexes
/// 4 and 5, keeping the equatorial triangle itself.
pub fn bipyramid() -> SimplicialComplex {
    SimplicialComplex::from_facets([[1, 2, 3], [1, 2, 4], [1, 2, 5], [1, 3, 4], [1, 3, 5], [2, 3, 4], [2, 3, 5]])
        .expect("valid facets")
}

/// The cycle graph on vertices `1..=n`.
pub fn cycle(n: u32) -> Result<SimplicialComplex, ComplexError> {
    if n < 3 {
        return Err(bad("cycle needs n >= 3"));
    }
    SimplicialComplex::from_facets((1..=n).map(|v| [v, v % n + 1]))
}

/// The complete graph on `1..=n`.
pub fn complete_graph(n: u32) -> Result<SimplicialComplex, ComplexError> {
    if n < 2 {
        return Err(bad("complete graph needs n >= 2"));
    }
    simplex_skeleton(n, 1)
}

/// The `k`-skeleton of the simplex on `1..=n`.
pub fn simplex_skeleton(n: u32, k: u32) -> Result<SimplicialComplex, ComplexError> {
    if n == 0 || k + 1 > n {
        return Err(bad("simplex skeleton needs 0 <= k <= n - 1"));
    }
    SimplicialComplex::from_facets((1..=n).combinations(k as usize + 1))
}

/// The boundary of the `(d+1)`-simplex: a `d`-sphere with `d + 2` facets.
pub fn sphere(d: u32) -> Result<SimplicialComplex, ComplexError> {
    if d == 0 {
        return Err(bad("sphere needs d >= 1"));
    }
    simplex_skeleton(d + 2, d)
}

/// The 6-vertex triangulation of the real projective plane.
pub fn rp2() -> SimplicialComplex {
    SimplicialComplex::from_facets([
        [1, 2, 3],
        [1, 3, 4],
        [1, 4, 5],
        [1, 5, 6],
        [1, 2, 6],
        [2, 3, 5],
        [3, 4, 6],
        [2, 4, 5],
        [3, 5, 6],
        [2, 4, 6],
    ])
    .expect("valid facets")
}

fn bad(message: &str) -> ComplexError {
    ComplexError::BadParameters(message.to_string())
}
