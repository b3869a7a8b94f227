//! Critical groups of the bipyramid by both routes.

use critical_groups::critical::{self, LaplacianKind};
use critical_groups::generators;

fn main() {
    let b = generators::bipyramid();
    println!("L_1 (up-down) of the bipyramid:");
    for row in critical::laplacian(&b, 1, LaplacianKind::UpDown).unwrap().to_rows() {
        println!("  {row:?}");
    }
    for i in 0..b.dim() {
        let direct = critical::critical_group_direct(&b, i).unwrap();
        let (reduced, tree) = critical::critical_group_auto(&b, i).unwrap();
        println!("K_{i} = {direct} (order {}), reduced route via {:?}: {reduced}", direct.order(), tree.faces(&b));
        let l = critical::reduced_laplacian(&b, i, &tree).unwrap();
        println!("  reduced Laplacian is {}x{}", l.nrows(), l.ncols());
    }
}
