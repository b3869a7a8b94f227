//! Dense arbitrary-precision integer matrices.
//!
//! Everything downstream (homology, critical groups, tree torsion, flow
//! coordinates) reduces to a handful of exact operations on integer
//! matrices: Smith normal form with unimodular transforms, fraction-free
//! determinants, characteristic polynomials and lattice membership.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
}

/// A dense row-major matrix of [`BigInt`] entries. `0 x n` and `n x 0`
/// shapes are valid.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> BigInt>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntegerMatrix { rows, cols, data }
    }

    /// Builds a matrix from nested rows. Panics if the rows are ragged.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| rows[i][j].clone().into())
    }

    pub fn from_diagonal(diag: &[BigInt]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    /// A single column.
    pub fn column_vector(v: &[BigInt]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i].clone())
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols)).map(|i| &self[(i, i)]).sum()
    }

    /// Submatrix on the given row and column indices, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(rows, &cols)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack: column counts differ");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntegerMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack: row counts differ");
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    /// Block diagonal matrix `diag(self, other)`.
    pub fn block_diagonal(&self, other: &Self) -> Self {
        Self::from_fn(self.rows + other.rows, self.cols + other.cols, |i, j| {
            match (i < self.rows, j < self.cols) {
                (true, true) => self[(i, j)].clone(),
                (false, false) => other[(i - self.rows, j - self.cols)].clone(),
                _ => BigInt::zero(),
            }
        })
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "mul_vec: length mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Rank over the rationals, by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.to_rows();
        let (rows, cols) = self.shape();
        let mut rank = 0;
        let mut prev = BigInt::one();
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            for r in rank + 1..rows {
                for k in c + 1..cols {
                    let v = &m[r][k] * &m[rank][c] - &m[r][c] * &m[rank][k];
                    m[r][k] = v / &prev;
                }
                m[r][c] = BigInt::zero();
            }
            prev = m[rank][c].clone();
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.cols {
                self.data.swap(a * self.cols + k, b * self.cols + k);
            }
        }
    }
}

impl Index<(usize, usize)> for IntegerMatrix {
    type Output = BigInt;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntegerMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntegerMatrix {
    type Output = IntegerMatrix;

    fn mul(self, rhs: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product: inner dimensions differ");
        let mut out = IntegerMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Add for &IntegerMatrix {
    type Output = IntegerMatrix;

    fn add(self, rhs: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum: shapes differ");
        IntegerMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &IntegerMatrix {
    type Output = IntegerMatrix;

    fn sub(self, rhs: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference: shapes differ");
        IntegerMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &IntegerMatrix {
    type Output = IntegerMatrix;

    fn neg(self) -> IntegerMatrix {
        IntegerMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerMatrix {}x{} {:?}", self.rows, self.cols, self.to_rows())
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.data.iter().map(|x| x.to_string().len()).max().unwrap_or(1);
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| format!("{x:>width$}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Smith normal form `U * A * V = diag(d_1, ..., d_r, 0, ...)` with
/// unimodular `U` (left) and `V` (right).
#[derive(Debug, Clone)]
pub struct SmithForm {
    factors: Vec<BigInt>,
    left: IntegerMatrix,
    right: IntegerMatrix,
    rows: usize,
    cols: usize,
}

impl SmithForm {
    /// The nonzero diagonal entries `d_1 | d_2 | ... | d_r`, all positive.
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// `U`, acting on the codomain.
    pub fn left(&self) -> &IntegerMatrix {
        &self.left
    }

    /// `V`, acting on the domain.
    pub fn right(&self) -> &IntegerMatrix {
        &self.right
    }

    /// The full `rows x cols` diagonal form.
    pub fn diagonal(&self) -> IntegerMatrix {
        let mut d = IntegerMatrix::zeros(self.rows, self.cols);
        for (i, f) in self.factors.iter().enumerate() {
            d[(i, i)] = f.clone();
        }
        d
    }

    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn cokernel(&self) -> CokernelStructure {
        CokernelStructure { free_rank: self.rows - self.rank(), torsion: self.torsion() }
    }

    /// Columns `r..n` of `V`: a basis of the integer kernel lattice.
    pub fn kernel_basis(&self) -> IntegerMatrix {
        let cols: Vec<usize> = (self.rank()..self.cols).collect();
        self.right.select_columns(&cols)
    }

    /// Solves `A x = v` over the integers using the stored transforms.
    pub fn solve(&self, v: &[BigInt]) -> Result<Option<Vec<BigInt>>, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch { expected: self.rows, found: v.len() });
        }
        let w = self.left.mul_vec(v);
        let r = self.rank();
        if w[r..].iter().any(|x| !x.is_zero()) {
            return Ok(None);
        }
        let mut y = vec![BigInt::zero(); self.cols];
        for j in 0..r {
            let (q, rem) = w[j].div_rem(&self.factors[j]);
            if !rem.is_zero() {
                return Ok(None);
            }
            y[j] = q;
        }
        Ok(Some(self.right.mul_vec(&y)))
    }
}

/// Structure of `Z^rows / im A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CokernelStructure {
    pub free_rank: usize,
    /// Invariant factors `> 1`, each dividing the next.
    pub torsion: Vec<BigInt>,
}

impl CokernelStructure {
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for CokernelStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_group(f, self.free_rank, &self.torsion)
    }
}

/// Writes `Z^r ⊕ Z/d1 ⊕ ...`, or `0` for the trivial group.
pub(crate) fn write_group(f: &mut fmt::Formatter<'_>, free_rank: usize, torsion: &[BigInt]) -> fmt::Result {
    let mut parts = Vec::new();
    match free_rank {
        0 => {}
        1 => parts.push("Z".to_string()),
        r => parts.push(format!("Z^{r}")),
    }
    parts.extend(torsion.iter().map(|d| format!("Z/{d}")));
    if parts.is_empty() {
        write!(f, "0")
    } else {
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// In-place Smith reduction. The left transform is tracked as a matrix; the
/// right transform is tracked transposed so column operations become row
/// operations on contiguous storage.
struct Reducer {
    a: Vec<Vec<BigInt>>,
    u: Option<Vec<Vec<BigInt>>>,
    vt: Option<Vec<Vec<BigInt>>>,
    rows: usize,
    cols: usize,
}

fn identity_rows(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// `target -= q * source`, skipping zero entries.
fn axpy(target: &mut [BigInt], source: &[BigInt], q: &BigInt) {
    for (t, s) in target.iter_mut().zip(source) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

fn split_pair<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &T) {
    debug_assert_ne!(i, j);
    if i < j {
        let (lo, hi) = v.split_at_mut(j);
        (&mut lo[i], &hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(i);
        (&mut hi[0], &lo[j])
    }
}

impl Reducer {
    fn new(a: &IntegerMatrix, transforms: bool) -> Self {
        Reducer {
            a: a.to_rows(),
            u: transforms.then(|| identity_rows(a.nrows())),
            vt: transforms.then(|| identity_rows(a.ncols())),
            rows: a.nrows(),
            cols: a.ncols(),
        }
    }

    /// row_i -= q * row_j
    fn row_op(&mut self, i: usize, j: usize, q: &BigInt) {
        let (ti, sj) = split_pair(&mut self.a, i, j);
        axpy(ti, sj, q);
        if let Some(u) = self.u.as_mut() {
            let (ti, sj) = split_pair(u, i, j);
            axpy(ti, sj, q);
        }
    }

    /// col_i -= q * col_j
    fn col_op(&mut self, i: usize, j: usize, q: &BigInt) {
        for row in self.a.iter_mut() {
            if !row[j].is_zero() {
                let d = q * &row[j];
                row[i] -= d;
            }
        }
        if let Some(vt) = self.vt.as_mut() {
            let (ti, sj) = split_pair(vt, i, j);
            axpy(ti, sj, q);
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            if let Some(u) = self.u.as_mut() {
                u.swap(i, j);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for row in self.a.iter_mut() {
                row.swap(i, j);
            }
            if let Some(vt) = self.vt.as_mut() {
                vt.swap(i, j);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -&*x;
        }
        if let Some(u) = self.u.as_mut() {
            for x in u[i].iter_mut() {
                *x = -&*x;
            }
        }
    }

    /// Nonzero entry of minimal absolute value in the trailing block,
    /// ties broken by lowest (row, col).
    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = &self.a[i][j];
                if x.is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => x.magnitude() < self.a[bi][bj].magnitude(),
                };
                if better {
                    best = Some((i, j));
                    if x.magnitude().is_one() {
                        return best;
                    }
                }
            }
        }
        best
    }

    fn reduce(&mut self) -> Vec<BigInt> {
        let mut factors = Vec::new();
        for t in 0..self.rows.min(self.cols) {
            loop {
                let Some((pi, pj)) = self.find_pivot(t) else {
                    return factors;
                };
                self.swap_rows(t, pi);
                self.swap_cols(t, pj);
                let mut clean = true;
                for i in t + 1..self.rows {
                    if self.a[i][t].is_zero() {
                        continue;
                    }
                    let q = &self.a[i][t] / &self.a[t][t];
                    if !q.is_zero() {
                        self.row_op(i, t, &q);
                    }
                    clean &= self.a[i][t].is_zero();
                }
                for j in t + 1..self.cols {
                    if self.a[t][j].is_zero() {
                        continue;
                    }
                    let q = &self.a[t][j] / &self.a[t][t];
                    if !q.is_zero() {
                        self.col_op(j, t, &q);
                    }
                    clean &= self.a[t][j].is_zero();
                }
                if !clean {
                    continue;
                }
                let pivot = self.a[t][t].clone();
                let bad = (t + 1..self.rows).find(|&i| {
                    self.a[i][t + 1..].iter().any(|x| !x.is_multiple_of(&pivot))
                });
                match bad {
                    Some(i) => self.row_op(t, i, &BigInt::from(-1)),
                    None => break,
                }
            }
            if self.a[t][t].is_negative() {
                self.negate_row(t);
            }
            factors.push(self.a[t][t].clone());
        }
        factors
    }
}

pub fn smith_normal_form(a: &IntegerMatrix) -> SmithForm {
    let mut r = Reducer::new(a, true);
    let factors = r.reduce();
    let to_matrix = |rows: Vec<Vec<BigInt>>| IntegerMatrix::from_rows(&rows);
    let left = to_matrix(r.u.take().unwrap());
    let right = if a.ncols() == 0 {
        IntegerMatrix::zeros(0, 0)
    } else {
        to_matrix(r.vt.take().unwrap()).transpose()
    };
    let left = if a.nrows() == 0 { IntegerMatrix::zeros(0, 0) } else { left };
    SmithForm { factors, left, right, rows: a.nrows(), cols: a.ncols() }
}

/// Invariant factors only; skips the transform bookkeeping.
pub fn invariant_factors(a: &IntegerMatrix) -> Vec<BigInt> {
    Reducer::new(a, false).reduce()
}

/// Exact determinant by Bareiss fraction-free elimination.
pub fn determinant(a: &IntegerMatrix) -> Result<BigInt, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.clone();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                return Ok(BigInt::zero());
            };
            m.swap_rows(k, p);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                m[(i, j)] = v / &prev;
            }
        }
        prev = m[(k, k)].clone();
    }
    let d = m[(n - 1, n - 1)].clone();
    Ok(if negate { -d } else { d })
}

/// Coefficients of `det(xI - A)`, indexed by power of `x` (so the last
/// entry is the leading 1). Faddeev–LeVerrier; every division by `k` is
/// exact for integer input.
pub fn char_poly(a: &IntegerMatrix) -> Result<Vec<BigInt>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    // am holds A * M_{k-1}
    let mut am = IntegerMatrix::zeros(n, n);
    for k in 1..=n {
        let mut m = am;
        for i in 0..n {
            m[(i, i)] += &coeffs[n - k + 1];
        }
        am = a * &m;
        let (q, r) = am.trace().div_rem(&BigInt::from(k));
        assert!(r.is_zero(), "Faddeev-LeVerrier division must be exact");
        coeffs[n - k] = -q;
    }
    Ok(coeffs)
}

/// Product of the nonzero eigenvalues of a symmetric positive semidefinite
/// matrix: the absolute value of the lowest nonzero coefficient of its
/// characteristic polynomial. The empty product (zero matrix) is 1.
///
/// Positive semidefiniteness is assumed, not checked.
pub fn pseudo_determinant(a: &IntegerMatrix) -> Result<BigInt, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if !a.is_symmetric() {
        return Err(LinalgError::NotSymmetric);
    }
    let cp = char_poly(a)?;
    Ok(cp.into_iter().find(|c| !c.is_zero()).map(|c| c.abs()).unwrap_or_else(BigInt::one))
}

pub fn cokernel(a: &IntegerMatrix) -> CokernelStructure {
    let factors = invariant_factors(a);
    CokernelStructure {
        free_rank: a.nrows() - factors.len(),
        torsion: factors.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// Some integer `x` with `A x = v`, or `None` if `v` is not in the integer
/// column span of `A`.
pub fn lattice_membership(a: &IntegerMatrix, v: &[BigInt]) -> Result<Option<Vec<BigInt>>, LinalgError> {
    if v.len() != a.nrows() {
        return Err(LinalgError::DimensionMismatch { expected: a.nrows(), found: v.len() });
    }
    smith_normal_form(a).solve(v)
}

/// Canonical invariant factors (> 1) of a direct sum of cyclic groups
/// `Z/c_1 ⊕ Z/c_2 ⊕ ...`. Zero entries are free summands and are dropped.
pub fn direct_sum_invariants(cyclic_orders: &[BigInt]) -> Vec<BigInt> {
    let nonzero: Vec<BigInt> = cyclic_orders.iter().filter(|c| !c.is_zero()).map(|c| c.abs()).collect();
    invariant_factors(&IntegerMatrix::from_diagonal(&nonzero))
        .into_iter()
        .filter(|d| !d.is_one())
        .collect()
}
