//! Laplacians and critical groups `K_i(Δ) = ker ∂_i / im L_i`.
//!
//! Two routes compute the same group. The direct route works from the
//! definition: take an integer basis of `ker ∂_i`, write the columns of the
//! up-down Laplacian in it and take the cokernel. The reduced route restricts
//! the Laplacian to the faces outside a torsion-free spanning tree, which is
//! smaller and needs no kernel basis.

use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::complex::{ComplexError, Simplex, SimplicialComplex};
use crate::generators;
use crate::linalg::{self, CokernelStructure, IntegerMatrix};
use crate::trees::{self, SpanningTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriticalError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("the given faces are not a {0}-dimensional spanning tree")]
    NotATree(isize),
    #[error("spanning tree has torsion of order {0}; a torsion-free tree is required")]
    TreeHasTorsion(BigInt),
    #[error("invalid parameters: {0}")]
    BadParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LaplacianKind {
    /// `∂_{i+1} ∂*_{i+1}`
    UpDown,
    /// `∂*_i ∂_i`
    DownUp,
    Total,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CriticalGroup {
    pub dimension: isize,
    /// Invariant factors greater than one, each dividing the next.
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl CriticalGroup {
    fn from_cokernel(dimension: isize, c: CokernelStructure) -> Self {
        CriticalGroup { dimension, invariant_factors: c.torsion, free_rank: c.free_rank }
    }

    /// Order of the torsion part.
    pub fn order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_cyclic(&self) -> bool {
        self.free_rank + self.invariant_factors.len() <= 1
    }
}

impl fmt::Display for CriticalGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        linalg::write_group(f, self.free_rank, &self.invariant_factors)
    }
}

/// The `f_i x f_i` Laplacian of the given kind, for `-1 <= i <= d`.
/// In dimension -1 the up-down Laplacian is `[f_0]`.
pub fn laplacian(cx: &SimplicialComplex, i: isize, kind: LaplacianKind) -> Result<IntegerMatrix, CriticalError> {
    cx.check_dim(i, -1, cx.dim())?;
    let up = || {
        let b = cx.boundary(i + 1);
        &b * &b.transpose()
    };
    let down = || {
        let b = cx.boundary(i);
        &b.transpose() * &b
    };
    Ok(match kind {
        LaplacianKind::UpDown => up(),
        LaplacianKind::DownUp => down(),
        LaplacianKind::Total => &up() + &down(),
    })
}

/// The up-down Laplacian restricted to the `i`-faces outside `tree`.
pub fn reduced_laplacian(
    cx: &SimplicialComplex,
    i: isize,
    tree: &SpanningTree,
) -> Result<IntegerMatrix, CriticalError> {
    cx.check_dim(i, -1, cx.dim())?;
    if tree.dimension() != i || trees::is_spanning_tree(cx, i, tree.top_faces()).is_none() {
        return Err(CriticalError::NotATree(i));
    }
    let theta = tree.complement(cx);
    let b = cx.boundary(i + 1).select_rows(&theta);
    Ok(&b * &b.transpose())
}

/// `K_i` as `Z^Θ / im L̃` for a torsion-free `i`-tree.
pub fn critical_group_reduced(
    cx: &SimplicialComplex,
    i: isize,
    tree: &SpanningTree,
) -> Result<CriticalGroup, CriticalError> {
    cx.check_dim(i, 0, cx.dim() - 1)?;
    let reduced = reduced_laplacian(cx, i, tree)?;
    if !tree.is_torsion_free() {
        return Err(CriticalError::TreeHasTorsion(tree.torsion_order().clone()));
    }
    Ok(CriticalGroup::from_cokernel(i, linalg::cokernel(&reduced)))
}

/// [`critical_group_reduced`] with a tree chosen by
/// [`trees::find_torsion_free_tree`]; also returns the tree.
pub fn critical_group_auto(cx: &SimplicialComplex, i: isize) -> Result<(CriticalGroup, SpanningTree), CriticalError> {
    cx.check_dim(i, 0, cx.dim() - 1)?;
    let tree = trees::find_torsion_free_tree(cx, i).ok_or(CriticalError::NotATree(i))?;
    Ok((critical_group_reduced(cx, i, &tree)?, tree))
}

/// `K_i = ker ∂_i / im L_i` straight from the definition.
pub fn critical_group_direct(cx: &SimplicialComplex, i: isize) -> Result<CriticalGroup, CriticalError> {
    cx.check_dim(i, 0, cx.dim() - 1)?;
    let kernel = linalg::smith_normal_form(&cx.boundary(i)).kernel_basis();
    let lap = laplacian(cx, i, LaplacianKind::UpDown)?;
    let basis = linalg::smith_normal_form(&kernel);
    let mut coeffs = IntegerMatrix::zeros(kernel.ncols(), lap.ncols());
    for c in 0..lap.ncols() {
        let x = basis
            .solve(&lap.column(c))
            .expect("column length matches")
            .expect("im L lies in ker ∂");
        for (r, v) in x.into_iter().enumerate() {
            coeffs[(r, c)] = v;
        }
    }
    Ok(CriticalGroup::from_cokernel(i, linalg::cokernel(&coeffs)))
}

fn check_maxwell(n: u32, k: u32) -> Result<(), CriticalError> {
    if k < 1 || k + 2 > n {
        return Err(CriticalError::BadParameters(format!("need 1 <= k <= n - 2, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// Row and column labels of the Maxwell matrix over the simplex on `1..=n`.
struct MaxwellParts {
    cx: SimplicialComplex,
    /// `(k-1)`-faces avoiding vertex 1.
    low_rows: Vec<usize>,
    /// `(k+1)`-faces containing vertex 1.
    high_rows: Vec<usize>,
}

impl MaxwellParts {
    fn new(n: u32, k: u32) -> Result<Self, CriticalError> {
        check_maxwell(n, k)?;
        let cx = generators::simplex_skeleton(n, k + 1)?;
        let k = k as isize;
        let low_rows = cx.faces(k - 1).iter().positions(|f| !f.contains(1)).collect();
        let high_rows = cx.faces(k + 1).iter().positions(|f| f.contains(1)).collect();
        Ok(MaxwellParts { cx, low_rows, high_rows })
    }

    fn matrix(&self, k: isize) -> IntegerMatrix {
        let top = self.cx.boundary(k).select_rows(&self.low_rows);
        let bottom = -&self.cx.boundary(k + 1).transpose().select_rows(&self.high_rows);
        top.vstack(&bottom)
    }
}

/// Square `f_k x f_k` matrix stacking `∂_k` on the `(k-1)`-faces without
/// vertex 1 over `-∂*_{k+1}` on the `(k+1)`-faces with vertex 1, for the
/// full simplex on `1..=n`.
pub fn maxwell_matrix(n: u32, k: u32) -> Result<IntegerMatrix, CriticalError> {
    Ok(MaxwellParts::new(n, k)?.matrix(k as isize))
}

/// The Maxwell matrix with rows permuted so that the row of `σ` sits at the
/// column of `σ ∪ {1}` and the row of `τ` at the column of `τ \ {1}`.
pub fn aligned_maxwell_matrix(n: u32, k: u32) -> Result<IntegerMatrix, CriticalError> {
    let parts = MaxwellParts::new(n, k)?;
    let k = k as isize;
    let a = parts.matrix(k);
    let low = parts.cx.faces(k - 1);
    let high = parts.cx.faces(k + 1);
    let column_of = |s: Simplex| parts.cx.face_index(&s).expect("face of the simplex");
    let targets: Vec<usize> = parts
        .low_rows
        .iter()
        .map(|&r| column_of(Simplex::new(low[r].vertices().iter().copied().chain([1])).unwrap()))
        .chain(parts.high_rows.iter().map(|&r| {
            column_of(Simplex::new(high[r].vertices().iter().copied().filter(|&v| v != 1)).unwrap())
        }))
        .collect();
    let mut order = vec![0; targets.len()];
    for (row, &t) in targets.iter().enumerate() {
        order[t] = row;
    }
    Ok(a.select_rows(&order))
}

/// Everything computed about the full simplex on `1..=n` around dimension `k`.
#[derive(Debug, Clone)]
pub struct SimplexStructureReport {
    pub n: u32,
    pub k: u32,
    /// `A Aᵀ` is block diagonal with blocks `L̃^ud_{k-1}` and `L̃^du_{k+1}`.
    pub block_diagonal: bool,
    pub coker_a: CokernelStructure,
    pub coker_aat: CokernelStructure,
    pub k_lower: CriticalGroup,
    pub k_upper: CriticalGroup,
    /// `coker(A Aᵀ) ≅ K_{k-1} ⊕ K_k`.
    pub claimed_identity: bool,
    /// `coker(A Aᵀ) ≅ K_{k-1} ⊕ K_{k-1}`.
    pub doubled_identity: bool,
    /// `binom(n-2, k)`.
    pub expected_copies: u64,
    /// Both `K_{k-1}` and `K_k` are direct sums of copies of `Z/n`.
    pub cyclic_n: bool,
    pub aligned_symmetric: bool,
    pub aligned_skew: bool,
}

impl SimplexStructureReport {
    pub fn passed(&self) -> bool {
        self.block_diagonal && self.claimed_identity && self.cyclic_n
    }

    /// Number of `Z/n` summands in `coker A`, or `None` if it is not of that form.
    pub fn maxwell_copies(&self) -> Option<usize> {
        copies_of(self.n, self.coker_a.free_rank, &self.coker_a.torsion)
    }
}

fn copies_of(n: u32, free_rank: usize, factors: &[BigInt]) -> Option<usize> {
    let n = BigInt::from(n);
    (free_rank == 0 && factors.iter().all(|d| *d == n)).then_some(factors.len())
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

pub fn verify_simplex_structure(n: u32, k: u32) -> Result<SimplexStructureReport, CriticalError> {
    let parts = MaxwellParts::new(n, k)?;
    let ki = k as isize;
    let a = parts.matrix(ki);
    let aat = &a * &a.transpose();
    let low = parts.low_rows.len();
    let lower_block = {
        let b = parts.cx.boundary(ki).select_rows(&parts.low_rows);
        &b * &b.transpose()
    };
    let upper_block = {
        let b = parts.cx.boundary(ki + 1).transpose().select_rows(&parts.high_rows);
        &b * &b.transpose()
    };
    let block_diagonal = aat == lower_block.block_diagonal(&upper_block) && aat.nrows() == low + parts.high_rows.len();
    let coker_a = linalg::cokernel(&a);
    let coker_aat = linalg::cokernel(&aat);
    let k_lower = critical_group_direct(&parts.cx, ki - 1)?;
    let k_upper = critical_group_direct(&parts.cx, ki)?;
    let sum_of = |x: &CriticalGroup, y: &CriticalGroup| CokernelStructure {
        free_rank: x.free_rank + y.free_rank,
        torsion: linalg::direct_sum_invariants(&[x.invariant_factors.clone(), y.invariant_factors.clone()].concat()),
    };
    let claimed_identity = coker_aat == sum_of(&k_lower, &k_upper);
    let doubled_identity = coker_aat == sum_of(&k_lower, &k_lower);
    let cyclic_n = copies_of(n, k_lower.free_rank, &k_lower.invariant_factors).is_some()
        && copies_of(n, k_upper.free_rank, &k_upper.invariant_factors).is_some();
    let aligned = aligned_maxwell_matrix(n, k)?;
    let aligned_symmetric = aligned.is_symmetric();
    let aligned_skew = aligned == -&aligned.transpose();
    Ok(SimplexStructureReport {
        n,
        k,
        block_diagonal,
        coker_a,
        coker_aat,
        k_lower,
        k_upper,
        claimed_identity,
        doubled_identity,
        expected_copies: binomial(u64::from(n) - 2, u64::from(k)),
        cyclic_n,
        aligned_symmetric,
        aligned_skew,
    })
}

/// `π_j`, the product of the nonzero eigenvalues of `L^ud_{j-1}`, for `0 <= j <= d`.
pub fn pi_product(cx: &SimplicialComplex, j: isize) -> Result<BigInt, CriticalError> {
    cx.check_dim(j, 0, cx.dim())?;
    let lap = laplacian(cx, j - 1, LaplacianKind::UpDown)?;
    Ok(linalg::pseudo_determinant(&lap).expect("Laplacians are square and symmetric"))
}

/// `Π_{j=0}^{i+1} π_j^{(-1)^{i+1-j}}` for `0 <= i <= d - 1`. When
/// `H̃_{j-2}(Δ; Z) = 0` and torsion-free trees exist in every dimension up
/// to `i + 1`, this is `|K_i(Δ)|`.
pub fn alternating_order(cx: &SimplicialComplex, i: isize) -> Result<BigRational, CriticalError> {
    cx.check_dim(i, 0, cx.dim() - 1)?;
    let mut acc = BigRational::one();
    for j in 0..=i + 1 {
        let p = BigRational::from_integer(pi_product(cx, j)?);
        if (i + 1 - j) % 2 == 0 {
            acc *= p;
        } else {
            acc /= p;
        }
    }
    Ok(acc)
}

/// `|K_i|` if the alternating product is an integer.
pub fn alternating_order_integer(cx: &SimplicialComplex, i: isize) -> Result<Option<BigInt>, CriticalError> {
    let q = alternating_order(cx, i)?;
    Ok(q.is_integer().then(|| q.to_integer()).filter(|v| !v.is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::EnumerationOptions;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn factors(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| big(x)).collect()
    }

    fn bipyramid_star_tree(b: &SimplicialComplex) -> SpanningTree {
        let faces: Vec<Simplex> =
            [[1, 2], [1, 3], [1, 4], [1, 5]].iter().map(|e| Simplex::new(e.iter().copied()).unwrap()).collect();
        trees::spanning_tree_from_faces(b, 1, &faces).unwrap().unwrap()
    }

    #[test]
    fn graph_laplacian_is_degree_minus_adjacency() {
        let c = generators::cycle(4).unwrap();
        let l = laplacian(&c, 0, LaplacianKind::UpDown).unwrap();
        let expected = IntegerMatrix::from_rows(&[
            vec![2, -1, 0, -1],
            vec![-1, 2, -1, 0],
            vec![0, -1, 2, -1],
            vec![-1, 0, -1, 2],
        ]);
        assert_eq!(l, expected);
    }

    #[test]
    fn laplacian_kinds() {
        let b = generators::bipyramid();
        let up = laplacian(&b, 1, LaplacianKind::UpDown).unwrap();
        let down = laplacian(&b, 1, LaplacianKind::DownUp).unwrap();
        let total = laplacian(&b, 1, LaplacianKind::Total).unwrap();
        assert_eq!(total, &up + &down);
        assert!(up.is_symmetric() && down.is_symmetric());
        let e23 = b.face_index(&Simplex::new([2, 3]).unwrap()).unwrap();
        assert_eq!(up[(e23, e23)], big(3));
        assert!((&b.boundary(1) * &up).is_zero());
        assert!(laplacian(&b, 2, LaplacianKind::UpDown).unwrap().is_zero());
        assert_eq!(laplacian(&b, -1, LaplacianKind::UpDown).unwrap(), IntegerMatrix::from_rows(&[vec![5]]));
        assert!(laplacian(&b, 3, LaplacianKind::UpDown).is_err());
    }

    #[test]
    fn bipyramid_reduced_laplacian() {
        let b = generators::bipyramid();
        let t = bipyramid_star_tree(&b);
        let l = reduced_laplacian(&b, 1, &t).unwrap();
        let expected = IntegerMatrix::from_rows(&[
            vec![3, -1, -1, 1, 1],
            vec![-1, 2, 0, -1, 0],
            vec![-1, 0, 2, 0, -1],
            vec![1, -1, 0, 2, 0],
            vec![1, 0, -1, 0, 2],
        ]);
        assert_eq!(l, expected);
        assert_eq!(linalg::determinant(&l).unwrap(), big(15));
        let k = critical_group_reduced(&b, 1, &t).unwrap();
        assert_eq!(k.invariant_factors, factors(&[15]));
        assert_eq!(k.to_string(), "Z/15");
        assert_eq!(critical_group_direct(&b, 1).unwrap(), k);
    }

    #[test]
    fn whole_top_dimension_tree_gives_empty_matrix() {
        let s = generators::sphere(1).unwrap();
        let t = trees::find_tree(&s, 0).unwrap();
        assert_eq!(reduced_laplacian(&s, 0, &t).unwrap().shape(), (2, 2));
        let p = generators::rp2();
        let all = trees::is_spanning_tree(&p, 2, &(0..10).collect::<Vec<_>>()).unwrap();
        assert_eq!(reduced_laplacian(&p, 2, &all).unwrap().shape(), (0, 0));
    }

    #[test]
    fn cycle_reduced_laplacian_has_determinant_n() {
        for n in 3..8 {
            let c = generators::cycle(n).unwrap();
            let t = trees::find_tree(&c, 0).unwrap();
            let l = reduced_laplacian(&c, 0, &t).unwrap();
            assert_eq!(linalg::determinant(&l).unwrap(), big(n.into()));
            let k = critical_group_reduced(&c, 0, &t).unwrap();
            assert_eq!(k.invariant_factors, factors(&[n.into()]));
        }
    }

    #[test]
    fn tree_errors() {
        let p = generators::rp2();
        let all = trees::is_spanning_tree(&p, 2, &(0..10).collect::<Vec<_>>()).unwrap();
        assert!(matches!(critical_group_reduced(&p, 2, &all), Err(CriticalError::Complex(_))));
        // RP² with a solid tetrahedron glued on; its ten triangles still form a 2-tree
        let mut facets: Vec<Vec<u32>> = p.facets().iter().map(|f| f.vertices().to_vec()).collect();
        facets.push(vec![1, 2, 3, 4]);
        let glued = SimplicialComplex::from_facets(facets).unwrap();
        let t = trees::spanning_tree_from_faces(&glued, 2, p.faces(2)).unwrap().unwrap();
        assert_eq!(critical_group_reduced(&glued, 2, &t), Err(CriticalError::TreeHasTorsion(big(2))));
        let b = generators::bipyramid();
        let star = bipyramid_star_tree(&b);
        assert_eq!(critical_group_reduced(&b, 0, &star), Err(CriticalError::NotATree(0)));
    }

    #[test]
    fn complete_graph_k4() {
        let k4 = generators::complete_graph(4).unwrap();
        let k = critical_group_direct(&k4, 0).unwrap();
        assert_eq!(k.invariant_factors, factors(&[4, 4]));
        assert_eq!(critical_group_auto(&k4, 0).unwrap().0, k);
    }

    #[test]
    fn routes_agree_across_trees() {
        let fixtures = [generators::bipyramid(), generators::sphere(2).unwrap(), generators::simplex_skeleton(5, 2).unwrap()];
        for cx in &fixtures {
            for i in 0..cx.dim() {
                let direct = critical_group_direct(cx, i).unwrap();
                for t in trees::torsion_free_trees(cx, i, 4).unwrap() {
                    assert_eq!(critical_group_reduced(cx, i, &t).unwrap(), direct);
                }
            }
        }
    }

    #[test]
    fn maxwell_cokernels() {
        let a = maxwell_matrix(4, 1).unwrap();
        assert_eq!(a.shape(), (6, 6));
        assert_eq!(linalg::cokernel(&a).torsion, factors(&[4, 4]));
        let a = maxwell_matrix(5, 2).unwrap();
        assert_eq!(linalg::cokernel(&a).torsion_order(), big(125));
        assert!(maxwell_matrix(4, 3).is_err());
        assert!(maxwell_matrix(4, 0).is_err());
    }

    #[test]
    fn simplex_structure() {
        let r = verify_simplex_structure(5, 1).unwrap();
        assert!(r.block_diagonal && r.cyclic_n && r.claimed_identity && r.passed());
        assert_eq!(r.k_lower.invariant_factors, factors(&[5, 5, 5]));
        assert_eq!(r.maxwell_copies(), Some(3));
        assert!(r.aligned_symmetric && !r.aligned_skew);
        let r = verify_simplex_structure(4, 1).unwrap();
        assert!(r.block_diagonal && r.cyclic_n && r.doubled_identity);
        assert!(!r.claimed_identity);
        assert_eq!(r.k_upper.invariant_factors, factors(&[4]));
    }

    #[test]
    fn pi_products() {
        let c3 = generators::cycle(3).unwrap();
        assert_eq!(pi_product(&c3, 0).unwrap(), big(3));
        assert_eq!(pi_product(&c3, 1).unwrap(), big(9));
        let b = generators::bipyramid();
        let pis: Vec<BigInt> = (0..=2).map(|j| pi_product(&b, j).unwrap()).collect();
        assert_eq!(pis, factors(&[5, 375, 1125]));
    }

    #[test]
    fn alternating_product_matches_orders() {
        let b = generators::bipyramid();
        assert_eq!(alternating_order_integer(&b, 1).unwrap(), Some(big(15)));
        assert_eq!(alternating_order_integer(&b, 0).unwrap(), Some(big(75)));
        for n in 3..7 {
            let c = generators::cycle(n).unwrap();
            assert_eq!(alternating_order_integer(&c, 0).unwrap(), Some(big(n.into())));
        }
        let s = generators::sphere(2).unwrap();
        assert_eq!(alternating_order_integer(&s, 1).unwrap(), Some(big(4)));
        let census = trees::enumerate_trees(&b, 2, &EnumerationOptions::default()).unwrap();
        assert_eq!(BigRational::from_integer(census.tau), alternating_order(&b, 1).unwrap());
    }
}
