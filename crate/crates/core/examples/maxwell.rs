//! Critical groups of simplex skeleta and the Maxwell-type matrix.

use critical_groups::critical;
use critical_groups::generators;

fn main() {
    for n in 4..=6 {
        let k = critical::critical_group_direct(&generators::complete_graph(n).unwrap(), 0).unwrap();
        println!("K_0 of the complete graph on {n} vertices: {k}");
    }
    for (n, k) in [(4, 1), (5, 1), (5, 2)] {
        let r = critical::verify_simplex_structure(n, k).unwrap();
        println!("(n, k) = ({n}, {k})");
        println!("  coker A = {} ({:?} copies of Z/{n}, expected {})", r.coker_a, r.maxwell_copies(), r.expected_copies);
        println!("  coker A Aᵀ = {}", r.coker_aat);
        println!("  K_{} = {}, K_{} = {}", k - 1, r.k_lower, k, r.k_upper);
        println!("  coker A Aᵀ = K_{} ⊕ K_{}: {}", k - 1, k, r.claimed_identity);
        println!("  coker A Aᵀ = K_{} ⊕ K_{}: {}", k - 1, k - 1, r.doubled_identity);
        println!("  aligned matrix symmetric: {}, skew: {}", r.aligned_symmetric, r.aligned_skew);
    }
}
