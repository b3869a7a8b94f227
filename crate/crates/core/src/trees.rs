//! Simplicial spanning trees.
//!
//! An `i`-tree is a set of `i`-faces whose boundary columns are linearly
//! independent over Q and which has exactly `f_i - β_i + β_{i-1}` members
//! (Betti numbers of the `i`-skeleton). Any two of the three defining
//! conditions imply the third, so these two are what gets checked. The
//! torsion order `|H̃_{i-1}(Υ; Z)|` is the product of the invariant factors
//! of the restricted boundary matrix.
//!
//! Enumeration walks subsets in lexicographic order and keeps an
//! incremental echelon basis of the chosen columns modulo the Mersenne
//! prime `2^61 - 1`. Boundary columns have `i + 1` entries of absolute value
//! one, so every minor of `k` chosen columns is bounded by `(i+1)^(k/2)`
//! (Hadamard). While that bound is below the prime, independence mod p is
//! the same as independence over Q; past it the walk falls back to exact
//! rank computations.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::complex::{ComplexError, Simplex, SimplicialComplex};
use crate::critical::{self, CriticalError};
use crate::linalg::{self, IntegerMatrix};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

const PRIME: u64 = (1 << 61) - 1;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Critical(#[from] CriticalError),
    #[error("no spanning trees in dimension {0}")]
    NoTrees(isize),
}

/// A spanning tree `Υ = Δ_(i-1) ∪ top_faces` of the `i`-skeleton.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanningTree {
    dimension: isize,
    top_faces: Vec<usize>,
    torsion_order: BigInt,
}

impl SpanningTree {
    pub fn dimension(&self) -> isize {
        self.dimension
    }

    /// Indices into `Δ_i`, increasing.
    pub fn top_faces(&self) -> &[usize] {
        &self.top_faces
    }

    /// `|H̃_{i-1}(Υ; Z)|`.
    pub fn torsion_order(&self) -> &BigInt {
        &self.torsion_order
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion_order.is_one()
    }

    pub fn faces(&self, cx: &SimplicialComplex) -> Vec<Simplex> {
        let all = cx.faces(self.dimension);
        self.top_faces.iter().map(|&k| all[k].clone()).collect()
    }

    /// Indices of the `i`-faces not in the tree (`Θ`), increasing.
    pub fn complement(&self, cx: &SimplicialComplex) -> Vec<usize> {
        let mut inside = self.top_faces.iter().peekable();
        (0..cx.num_faces(self.dimension))
            .filter(|k| {
                if inside.peek() == Some(&k) {
                    inside.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    }
}

/// Summary of an enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCensus {
    pub dimension: isize,
    pub count: u64,
    /// `τ_i = Σ |H̃_{i-1}(Υ; Z)|²`.
    pub tau: BigInt,
    pub torsion_histogram: BTreeMap<BigInt, u64>,
    /// Set when the budget ran out; counts are then lower bounds.
    pub partial: bool,
    /// Subset extensions tried.
    pub extensions: u64,
    pub warnings: Vec<String>,
}

impl TreeCensus {
    fn empty(dimension: isize) -> Self {
        TreeCensus {
            dimension,
            count: 0,
            tau: BigInt::zero(),
            torsion_histogram: BTreeMap::new(),
            partial: false,
            extensions: 0,
            warnings: Vec::new(),
        }
    }

    fn record(&mut self, tree: &SpanningTree) {
        self.count += 1;
        self.tau += tree.torsion_order() * tree.torsion_order();
        *self.torsion_histogram.entry(tree.torsion_order().clone()).or_default() += 1;
    }

    fn merge(&mut self, other: TreeCensus) {
        self.count += other.count;
        self.tau += other.tau;
        for (t, c) in other.torsion_histogram {
            *self.torsion_histogram.entry(t).or_default() += c;
        }
        self.partial |= other.partial;
        self.extensions += other.extensions;
    }

    pub fn all_torsion_free(&self) -> bool {
        self.torsion_histogram.keys().all(One::is_one)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    /// Maximum number of subset extensions before giving up.
    pub budget: u64,
    pub workers: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { budget: DEFAULT_BUDGET, workers: 1 }
    }
}

/// Precomputed boundary data for trees of one dimension.
struct TreeContext {
    dim: isize,
    rows: usize,
    /// Sparse boundary columns: (row, ±1).
    columns: Vec<Vec<(usize, i8)>>,
    /// Required number of top faces; `None` when no tree can exist.
    target: Option<usize>,
    modular_is_exact: bool,
}

impl TreeContext {
    fn new(cx: &SimplicialComplex, dim: isize) -> Self {
        let rows = cx.num_faces(dim - 1);
        let d = cx.boundary(dim);
        let columns = (0..d.ncols())
            .map(|c| {
                (0..rows)
                    .filter(|&r| !d[(r, c)].is_zero())
                    .map(|r| (r, if d[(r, c)] > BigInt::zero() { 1 } else { -1 }))
                    .collect()
            })
            .collect();
        let rank = d.rank();
        // β_j of the i-skeleton agrees with Δ for j < i
        let target = (-1..dim).all(|j| cx.betti(j) == 0).then_some(rank);
        let k = target.unwrap_or(0) as u32;
        let face_size = (dim + 1).max(1) as u128;
        // (i+1)^k < p^2  <=>  Hadamard bound (i+1)^(k/2) < p
        let modular_is_exact = face_size.checked_pow(k).is_some_and(|b| b < (PRIME as u128) * (PRIME as u128));
        TreeContext { dim, rows, columns, target, modular_is_exact }
    }

    fn restricted(&self, chosen: &[usize]) -> IntegerMatrix {
        let mut m = IntegerMatrix::zeros(self.rows, chosen.len());
        for (c, &k) in chosen.iter().enumerate() {
            for &(r, s) in &self.columns[k] {
                m[(r, c)] = BigInt::from(s);
            }
        }
        m
    }

    fn make_tree(&self, chosen: &[usize]) -> SpanningTree {
        let torsion_order = linalg::invariant_factors(&self.restricted(chosen)).iter().product();
        SpanningTree { dimension: self.dim, top_faces: chosen.to_vec(), torsion_order }
    }

    fn check(&self, chosen: &[usize]) -> Option<SpanningTree> {
        let target = self.target?;
        let n = self.columns.len();
        if chosen.len() != target || chosen.windows(2).any(|w| w[0] >= w[1]) || chosen.iter().any(|&k| k >= n) {
            return None;
        }
        (self.restricted(chosen).rank() == target).then(|| self.make_tree(chosen))
    }
}

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

/// Incremental echelon basis modulo `PRIME`; each row is normalized to 1
/// at its pivot.
struct ModBasis {
    rows: usize,
    basis: Vec<(usize, Vec<u64>)>,
}

impl ModBasis {
    fn new(rows: usize) -> Self {
        ModBasis { rows, basis: Vec::new() }
    }

    /// Reduces the column against the basis; pushes it and returns true if
    /// it is independent.
    fn try_push(&mut self, column: &[(usize, i8)]) -> bool {
        let mut v = vec![0u64; self.rows];
        for &(r, s) in column {
            v[r] = if s > 0 { 1 } else { PRIME - 1 };
        }
        for (piv, b) in &self.basis {
            let f = v[*piv];
            if f != 0 {
                for (x, y) in v.iter_mut().zip(b) {
                    if *y != 0 {
                        *x = (*x + PRIME - mulmod(f, *y)) % PRIME;
                    }
                }
            }
        }
        let Some(piv) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = powmod(v[piv], PRIME - 2);
        for x in v.iter_mut() {
            *x = mulmod(*x, inv);
        }
        self.basis.push((piv, v));
        true
    }

    fn pop(&mut self) {
        self.basis.pop();
    }
}

struct Walk<'c, F> {
    ctx: &'c TreeContext,
    target: usize,
    basis: ModBasis,
    chosen: Vec<usize>,
    census: TreeCensus,
    budget: u64,
    spent: &'c AtomicU64,
    stop: &'c AtomicBool,
    visit: F,
}

impl<F: FnMut(&SpanningTree) -> ControlFlow<()>> Walk<'_, F> {
    fn independent(&mut self, c: usize) -> bool {
        if self.ctx.modular_is_exact {
            self.basis.try_push(&self.ctx.columns[c])
        } else {
            self.chosen.push(c);
            let ok = self.ctx.restricted(&self.chosen).rank() == self.chosen.len();
            self.chosen.pop();
            ok
        }
    }

    fn undo(&mut self) {
        if self.ctx.modular_is_exact {
            self.basis.pop();
        }
    }

    fn extend(&mut self, c: usize) -> ControlFlow<()> {
        self.extend_then(c, |w| w.descend(c + 1))
    }

    /// Adds face `c` if it keeps the columns independent, runs `then`, and
    /// removes it again.
    fn extend_then(&mut self, c: usize, then: impl FnOnce(&mut Self) -> ControlFlow<()>) -> ControlFlow<()> {
        if self.stop.load(Ordering::Relaxed) {
            return ControlFlow::Break(());
        }
        self.census.extensions += 1;
        if self.spent.fetch_add(1, Ordering::Relaxed) >= self.budget {
            self.census.partial = true;
            self.stop.store(true, Ordering::Relaxed);
            return ControlFlow::Break(());
        }
        if !self.independent(c) {
            return ControlFlow::Continue(());
        }
        self.chosen.push(c);
        let flow = then(self);
        self.chosen.pop();
        self.undo();
        flow
    }

    fn descend(&mut self, start: usize) -> ControlFlow<()> {
        if self.chosen.len() == self.target {
            let tree = self.ctx.make_tree(&self.chosen);
            self.census.record(&tree);
            if (self.visit)(&tree).is_break() {
                self.stop.store(true, Ordering::Relaxed);
                return ControlFlow::Break(());
            }
            return ControlFlow::Continue(());
        }
        let need = self.target - self.chosen.len();
        let n = self.ctx.columns.len();
        if n < need + start {
            return ControlFlow::Continue(());
        }
        for c in start..=n - need {
            self.extend(c)?;
        }
        ControlFlow::Continue(())
    }
}

/// Returns the tree if `top_faces` (indices into `Δ_i`) form an `i`-tree.
pub fn is_spanning_tree(cx: &SimplicialComplex, i: isize, top_faces: &[usize]) -> Option<SpanningTree> {
    if i < -1 || i > cx.dim() {
        return None;
    }
    let mut sorted = top_faces.to_vec();
    sorted.sort_unstable();
    TreeContext::new(cx, i).check(&sorted)
}

/// [`is_spanning_tree`] for faces given as simplices.
pub fn spanning_tree_from_faces(
    cx: &SimplicialComplex,
    i: isize,
    faces: &[Simplex],
) -> Result<Option<SpanningTree>, ComplexError> {
    let indices = faces
        .iter()
        .map(|f| match cx.face_index(f) {
            Some(k) if f.dim() == i => Ok(k),
            _ => Err(ComplexError::UnknownFace(f.clone())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(is_spanning_tree(cx, i, &indices))
}

/// Exhaustive census of `i`-trees.
pub fn enumerate_trees(
    cx: &SimplicialComplex,
    i: isize,
    options: &EnumerationOptions,
) -> Result<TreeCensus, ComplexError> {
    if options.workers > 1 {
        enumerate_parallel(cx, i, options)
    } else {
        enumerate_trees_with(cx, i, options.budget, |_| ControlFlow::Continue(()))
    }
}

/// Single-worker enumeration that hands each tree to `visit` in
/// lexicographic order; `visit` may stop the walk early.
pub fn enumerate_trees_with<F>(
    cx: &SimplicialComplex,
    i: isize,
    budget: u64,
    visit: F,
) -> Result<TreeCensus, ComplexError>
where
    F: FnMut(&SpanningTree) -> ControlFlow<()>,
{
    cx.check_dim(i, -1, cx.dim())?;
    let ctx = TreeContext::new(cx, i);
    let Some(target) = ctx.target else {
        return Ok(TreeCensus::empty(i));
    };
    let spent = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let mut walk = Walk {
        ctx: &ctx,
        target,
        basis: ModBasis::new(ctx.rows),
        chosen: Vec::new(),
        census: TreeCensus::empty(i),
        budget,
        spent: &spent,
        stop: &stop,
        visit,
    };
    let _ = walk.descend(0);
    let mut census = walk.census;
    finish(&mut census, budget);
    Ok(census)
}

fn finish(census: &mut TreeCensus, budget: u64) {
    if census.partial {
        census.warnings.push(format!(
            "enumeration budget of {budget} subset extensions exhausted; census is partial"
        ));
    }
}

/// Workers pull prefixes of the walk from a shared queue; the census sum
/// is independent of scheduling.
fn enumerate_parallel(
    cx: &SimplicialComplex,
    i: isize,
    options: &EnumerationOptions,
) -> Result<TreeCensus, ComplexError> {
    cx.check_dim(i, -1, cx.dim())?;
    let ctx = TreeContext::new(cx, i);
    let Some(target) = ctx.target else {
        return Ok(TreeCensus::empty(i));
    };
    if target == 0 {
        return enumerate_trees_with(cx, i, options.budget, |_| ControlFlow::Continue(()));
    }
    let spent = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let merged = Mutex::new(TreeCensus::empty(i));
    let n = ctx.columns.len();
    // most trees start with the first few faces, so split on two-face prefixes
    let last = n - target;
    let tasks: Vec<(usize, Option<usize>)> = if target == 1 {
        (0..=last).map(|a| (a, None)).collect()
    } else {
        (0..=last).flat_map(|a| (a + 1..=last + 1).map(move |b| (a, Some(b)))).collect()
    };
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..options.workers.max(1) {
            let (ctx, spent, stop, merged, tasks, next) = (&ctx, &spent, &stop, &merged, &tasks, &next);
            scope.spawn(move || {
                let mut walk = Walk {
                    ctx,
                    target,
                    basis: ModBasis::new(ctx.rows),
                    chosen: Vec::new(),
                    census: TreeCensus::empty(i),
                    budget: options.budget,
                    spent,
                    stop,
                    visit: |_: &SpanningTree| ControlFlow::Continue(()),
                };
                while let Some(&(a, b)) = tasks.get(next.fetch_add(1, Ordering::Relaxed)) {
                    let flow = match b {
                        None => walk.extend(a),
                        Some(b) => walk.extend_then(a, |w| w.extend(b)),
                    };
                    if flow.is_break() {
                        break;
                    }
                }
                merged.lock().unwrap().merge(walk.census);
            });
        }
    });
    let mut census = merged.into_inner().unwrap();
    finish(&mut census, options.budget);
    Ok(census)
}

/// A torsion-free `i`-tree: the greedy lexicographic basis if it is
/// torsion-free, otherwise the first torsion-free tree in enumeration order.
pub fn find_torsion_free_tree(cx: &SimplicialComplex, i: isize) -> Option<SpanningTree> {
    if i < -1 || i > cx.dim() {
        return None;
    }
    let ctx = TreeContext::new(cx, i);
    let target = ctx.target?;
    let greedy = greedy_tree(&ctx, target);
    if let Some(t) = greedy.filter(SpanningTree::is_torsion_free) {
        return Some(t);
    }
    let mut found = None;
    enumerate_trees_with(cx, i, u64::MAX, |t| {
        if t.is_torsion_free() {
            found = Some(t.clone());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .ok()?;
    found
}

/// Any `i`-tree, by the greedy lexicographic basis.
pub fn find_tree(cx: &SimplicialComplex, i: isize) -> Option<SpanningTree> {
    if i < -1 || i > cx.dim() {
        return None;
    }
    let ctx = TreeContext::new(cx, i);
    let target = ctx.target?;
    greedy_tree(&ctx, target)
}

fn greedy_tree(ctx: &TreeContext, target: usize) -> Option<SpanningTree> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis = ModBasis::new(ctx.rows);
    for c in 0..ctx.columns.len() {
        if chosen.len() == target {
            break;
        }
        let independent = if ctx.modular_is_exact {
            basis.try_push(&ctx.columns[c])
        } else {
            chosen.push(c);
            let ok = ctx.restricted(&chosen).rank() == chosen.len();
            chosen.pop();
            ok
        };
        if independent {
            chosen.push(c);
        }
    }
    ctx.check(&chosen)
}

/// Up to `limit` torsion-free `i`-trees in enumeration order.
pub fn torsion_free_trees(cx: &SimplicialComplex, i: isize, limit: usize) -> Result<Vec<SpanningTree>, ComplexError> {
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    enumerate_trees_with(cx, i, DEFAULT_BUDGET, |t| {
        if t.is_torsion_free() {
            out.push(t.clone());
        }
        if out.len() >= limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(out)
}

/// Both sides of the two simplicial matrix-tree identities in dimension `i`.
#[derive(Debug, Clone)]
pub struct SmttReport {
    pub dimension: isize,
    /// `π_i`, product of the nonzero eigenvalues of `L_{i-1}`.
    pub pi: BigInt,
    pub tau: BigInt,
    pub tau_below: BigInt,
    /// `|H̃_{i-2}(Δ; Z)|`.
    pub homology_order: BigInt,
    /// The `(i-1)`-tree used for the determinant identity.
    pub tree: Vec<Simplex>,
    /// `|H̃_{i-2}(Υ; Z)|`.
    pub tree_torsion: BigInt,
    pub reduced_determinant: BigInt,
    /// `π_i · |H̃_{i-2}(Δ)|² = τ_i · τ_{i-1}`.
    pub product_identity: bool,
    /// `τ_i · |H̃_{i-2}(Υ)|² = |H̃_{i-2}(Δ)|² · det L̃`.
    pub determinant_identity: bool,
    pub partial: bool,
    pub warnings: Vec<String>,
}

impl SmttReport {
    pub fn passed(&self) -> bool {
        !self.partial && self.product_identity && self.determinant_identity
    }
}

pub fn verify_smtt(cx: &SimplicialComplex, i: isize, options: &EnumerationOptions) -> Result<SmttReport, TreeError> {
    cx.check_dim(i, 0, cx.dim())?;
    let upper = enumerate_trees(cx, i, options)?;
    let lower = enumerate_trees(cx, i - 1, options)?;
    if lower.tau.is_zero() && !lower.partial {
        return Err(TreeError::NoTrees(i - 1));
    }
    let pi = critical::pi_product(cx, i)?;
    let homology_order = if i - 2 >= -1 { cx.reduced_homology(i - 2)?.torsion_order() } else { BigInt::one() };
    let tree = find_tree(cx, i - 1).ok_or(TreeError::NoTrees(i - 1))?;
    let reduced = critical::reduced_laplacian(cx, i - 1, &tree)?;
    let reduced_determinant = linalg::determinant(&reduced).expect("reduced Laplacian is square");
    let h2 = &homology_order * &homology_order;
    let t2 = tree.torsion_order() * tree.torsion_order();
    let mut warnings = upper.warnings.clone();
    warnings.extend(lower.warnings.iter().cloned());
    Ok(SmttReport {
        dimension: i,
        product_identity: &pi * &h2 == &upper.tau * &lower.tau,
        determinant_identity: &upper.tau * &t2 == &h2 * &reduced_determinant,
        pi,
        tau: upper.tau,
        tau_below: lower.tau,
        homology_order,
        tree: tree.faces(cx),
        tree_torsion: tree.torsion_order().clone(),
        reduced_determinant,
        partial: upper.partial || lower.partial,
        warnings,
    })
}
