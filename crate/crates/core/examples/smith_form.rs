//! Smith normal form with transforms, cokernels and exact determinants.

use critical_groups::linalg::{self, IntegerMatrix};

fn main() {
    let a = IntegerMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
    let s = linalg::smith_normal_form(&a);
    println!("A = {:?}", a.to_rows());
    println!("invariant factors: {:?}", s.invariant_factors());
    // U A V = D
    assert_eq!(&(s.left() * &a) * s.right(), s.diagonal());
    println!("U = {:?}\nV = {:?}", s.left().to_rows(), s.right().to_rows());

    let coker = linalg::cokernel(&a);
    println!("coker A: free rank {}, torsion {:?}", coker.free_rank, coker.torsion);

    println!("det A = {}", linalg::determinant(&a).unwrap());
    println!("char poly (ascending) = {:?}", linalg::char_poly(&a).unwrap());

    let m = IntegerMatrix::from_rows(&[vec![1, 2, 0], vec![0, 1, 1]]);
    let mmt = &m * &m.transpose();
    let mtm = &m.transpose() * &m;
    println!(
        "pseudo-determinants of M Mᵀ and Mᵀ M: {} and {}",
        linalg::pseudo_determinant(&mmt).unwrap(),
        linalg::pseudo_determinant(&mtm).unwrap()
    );
}
