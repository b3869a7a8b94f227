//! Flows on simplicial complexes and the chip-firing game on graphs.
//!
//! A configuration is an integer vector on the `i`-faces. Firing a face
//! subtracts its column of the up-down Laplacian; two configurations are
//! equivalent when they differ by an integer combination of such columns.
//! Conservative configurations (those in `ker ∂_i`) modulo equivalence form
//! the critical group `K_i`, and with a torsion-free tree `Υ` a class is
//! determined by its values on the faces outside the tree.
//!
//! [`ChipGraph`] and [`ChipState`] are the graph case: chips on vertices, a
//! bank vertex that only fires once everything else is stable, and the
//! critical (stable and recurrent) representatives of each class.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Sub};

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::complex::{ComplexError, Simplex, SimplicialComplex, Vertex};
use crate::critical::{self, CriticalError, LaplacianKind};
use crate::linalg::{self, IntegerMatrix, SmithForm};
use crate::trees::{self, SpanningTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Critical(#[from] CriticalError),
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("configuration lives in dimension {found}, expected {expected}")]
    DimensionMismatch { expected: isize, found: isize },
    #[error("configuration is not conservative")]
    NotConservative,
    #[error("graph is not connected")]
    Disconnected,
    #[error("bank vertex {0} is not a vertex of the graph")]
    UnknownBank(Vertex),
}

/// Integer values on the `i`-faces, in lexicographic face order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub dimension: isize,
    pub values: Vec<BigInt>,
}

impl Configuration {
    pub fn zeros(cx: &SimplicialComplex, i: isize) -> Self {
        Configuration { dimension: i, values: vec![BigInt::zero(); cx.num_faces(i)] }
    }

    pub fn new(cx: &SimplicialComplex, i: isize, values: Vec<BigInt>) -> Result<Self, FlowError> {
        cx.check_dim(i, 0, cx.dim())?;
        if values.len() != cx.num_faces(i) {
            return Err(FlowError::LengthMismatch { expected: cx.num_faces(i), found: values.len() });
        }
        Ok(Configuration { dimension: i, values })
    }

    pub fn from_ints<T: Into<BigInt>>(
        cx: &SimplicialComplex,
        i: isize,
        values: impl IntoIterator<Item = T>,
    ) -> Result<Self, FlowError> {
        Self::new(cx, i, values.into_iter().map(Into::into).collect())
    }

    /// The indicator chain `e_F` of the face with index `k`.
    pub fn unit(cx: &SimplicialComplex, i: isize, k: usize) -> Self {
        let mut c = Self::zeros(cx, i);
        c.values[k] = BigInt::one();
        c
    }

    pub fn restrict(&self, indices: &[usize]) -> Vec<BigInt> {
        indices.iter().map(|&k| self.values[k].clone()).collect()
    }

    fn check(&self, cx: &SimplicialComplex) -> Result<(), FlowError> {
        cx.check_dim(self.dimension, 0, cx.dim())?;
        let expected = cx.num_faces(self.dimension);
        if self.values.len() != expected {
            return Err(FlowError::LengthMismatch { expected, found: self.values.len() });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        assert_eq!(self.dimension, other.dimension, "configurations of different dimensions");
        assert_eq!(self.values.len(), other.values.len(), "configurations of different lengths");
        Configuration { dimension: self.dimension, values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect() }
    }
}

impl Add for &Configuration {
    type Output = Configuration;
    fn add(self, rhs: Self) -> Configuration {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Configuration {
    type Output = Configuration;
    fn sub(self, rhs: Self) -> Configuration {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Fires `face`: `c - L e_F`.
pub fn fire(cx: &SimplicialComplex, c: &Configuration, face: &Simplex) -> Result<Configuration, FlowError> {
    c.check(cx)?;
    match cx.face_index(face) {
        Some(k) if face.dim() == c.dimension => fire_index(cx, c, k),
        _ => Err(ComplexError::UnknownFace(face.clone()).into()),
    }
}

/// [`fire`] by face index.
pub fn fire_index(cx: &SimplicialComplex, c: &Configuration, k: usize) -> Result<Configuration, FlowError> {
    c.check(cx)?;
    let i = c.dimension;
    if k >= cx.num_faces(i) {
        return Err(FlowError::LengthMismatch { expected: cx.num_faces(i), found: k + 1 });
    }
    let b = cx.boundary(i + 1);
    let mut out = c.clone();
    for g in 0..b.ncols() {
        let s = &b[(k, g)];
        if s.is_zero() {
            continue;
        }
        for r in 0..b.nrows() {
            if !b[(r, g)].is_zero() {
                out.values[r] -= s * &b[(r, g)];
            }
        }
    }
    Ok(out)
}

/// Whether `∂_i c = 0`.
pub fn is_conservative(cx: &SimplicialComplex, c: &Configuration) -> Result<bool, FlowError> {
    c.check(cx)?;
    Ok(cx.boundary(c.dimension).mul_vec(&c.values).iter().all(Zero::is_zero))
}

/// Whether `c1 - c2` lies in the integer span of the Laplacian columns.
pub fn equivalent(cx: &SimplicialComplex, c1: &Configuration, c2: &Configuration) -> Result<bool, FlowError> {
    c1.check(cx)?;
    c2.check(cx)?;
    if c1.dimension != c2.dimension {
        return Err(FlowError::DimensionMismatch { expected: c1.dimension, found: c2.dimension });
    }
    let lap = critical::laplacian(cx, c1.dimension, LaplacianKind::UpDown)?;
    let diff = c1 - c2;
    Ok(linalg::lattice_membership(&lap, &diff.values).expect("lengths match").is_some())
}

fn checked_tree(cx: &SimplicialComplex, tree: &SpanningTree) -> Result<(), FlowError> {
    let i = tree.dimension();
    cx.check_dim(i, 0, cx.dim())?;
    if trees::is_spanning_tree(cx, i, tree.top_faces()).is_none() {
        return Err(CriticalError::NotATree(i).into());
    }
    if !tree.is_torsion_free() {
        return Err(CriticalError::TreeHasTorsion(tree.torsion_order().clone()).into());
    }
    Ok(())
}

/// The conservative configuration equal to `theta` on the faces outside
/// `tree`. It exists and is unique because the tree is torsion-free.
pub fn extend_to_conservative(
    cx: &SimplicialComplex,
    tree: &SpanningTree,
    theta: &[BigInt],
) -> Result<Configuration, FlowError> {
    checked_tree(cx, tree)?;
    let i = tree.dimension();
    let outside = tree.complement(cx);
    if theta.len() != outside.len() {
        return Err(FlowError::LengthMismatch { expected: outside.len(), found: theta.len() });
    }
    let b = cx.boundary(i);
    let rhs: Vec<BigInt> = b.select_columns(&outside).mul_vec(theta).into_iter().map(|x| -x).collect();
    let on_tree = linalg::smith_normal_form(&b.select_columns(tree.top_faces()))
        .solve(&rhs)
        .expect("lengths match")
        .expect("a torsion-free tree spans the cycles below it");
    let mut c = Configuration::zeros(cx, i);
    for (&k, v) in tree.top_faces().iter().zip(on_tree) {
        c.values[k] = v;
    }
    for (&k, v) in outside.iter().zip(theta) {
        c.values[k] = v.clone();
    }
    Ok(c)
}

/// An element of `⊕ Z/d_j`, where `d_j = 0` stands for a free summand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    moduli: Vec<BigInt>,
    residues: Vec<BigInt>,
}

impl GroupElement {
    fn reduce(moduli: Vec<BigInt>, raw: Vec<BigInt>) -> Self {
        let residues = raw.into_iter().zip(&moduli).map(|(x, d)| if d.is_zero() { x } else { x.mod_floor(d) }).collect();
        GroupElement { moduli, residues }
    }

    pub fn moduli(&self) -> &[BigInt] {
        &self.moduli
    }

    pub fn residues(&self) -> &[BigInt] {
        &self.residues
    }

    pub fn is_identity(&self) -> bool {
        self.residues.iter().all(Zero::is_zero)
    }
}

impl Add for &GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: Self) -> GroupElement {
        assert_eq!(self.moduli, rhs.moduli, "elements of different groups");
        let raw = self.residues.iter().zip(&rhs.residues).map(|(a, b)| a + b).collect();
        GroupElement::reduce(self.moduli.clone(), raw)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.residues.iter().join(", "))
    }
}

/// Coordinates on `K_i ≅ Z^Θ / im L̃` from the Smith form `U L̃ V = D`:
/// a class maps to `U c_Θ` reduced modulo the diagonal of `D`.
///
/// The coordinates depend on the tree and on the pivoting rule of the Smith
/// form; equality of coordinates does not.
#[derive(Debug, Clone)]
pub struct GroupCoordinates {
    dimension: isize,
    outside: Vec<usize>,
    smith: SmithForm,
    moduli: Vec<BigInt>,
}

impl GroupCoordinates {
    pub fn new(cx: &SimplicialComplex, tree: &SpanningTree) -> Result<Self, FlowError> {
        checked_tree(cx, tree)?;
        let reduced = critical::reduced_laplacian(cx, tree.dimension(), tree)?;
        let smith = linalg::smith_normal_form(&reduced);
        let mut moduli = smith.invariant_factors().to_vec();
        moduli.resize(reduced.nrows(), BigInt::zero());
        Ok(GroupCoordinates { dimension: tree.dimension(), outside: tree.complement(cx), smith, moduli })
    }

    /// One modulus per face outside the tree; 0 marks a free coordinate.
    pub fn moduli(&self) -> &[BigInt] {
        &self.moduli
    }

    /// Indices of the faces outside the tree.
    pub fn outside(&self) -> &[usize] {
        &self.outside
    }

    /// Group order, or `None` if the group is infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.moduli.iter().all(|d| !d.is_zero()).then(|| self.moduli.iter().product())
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { moduli: self.moduli.clone(), residues: vec![BigInt::zero(); self.moduli.len()] }
    }

    /// The class of any configuration with these values outside the tree.
    pub fn element_from_theta(&self, theta: &[BigInt]) -> Result<GroupElement, FlowError> {
        if theta.len() != self.outside.len() {
            return Err(FlowError::LengthMismatch { expected: self.outside.len(), found: theta.len() });
        }
        let raw = if theta.is_empty() { Vec::new() } else { self.smith.left().mul_vec(theta) };
        Ok(GroupElement::reduce(self.moduli.clone(), raw))
    }

    /// The class of a conservative configuration.
    pub fn to_group_element(&self, cx: &SimplicialComplex, c: &Configuration) -> Result<GroupElement, FlowError> {
        if c.dimension != self.dimension {
            return Err(FlowError::DimensionMismatch { expected: self.dimension, found: c.dimension });
        }
        if !is_conservative(cx, c)? {
            return Err(FlowError::NotConservative);
        }
        self.element_from_theta(&c.restrict(&self.outside))
    }
}

/// A connected graph (the 1-skeleton of a complex) with a bank vertex.
#[derive(Debug, Clone)]
pub struct ChipGraph {
    bank: Vertex,
    /// Non-bank vertices in increasing order; chip vectors follow this order.
    labels: Vec<Vertex>,
    neighbors: Vec<Vec<usize>>,
    degree: Vec<u64>,
    to_bank: Vec<u64>,
    coordinates: GroupCoordinates,
}

impl ChipGraph {
    pub fn new(cx: &SimplicialComplex, bank: Vertex) -> Result<Self, FlowError> {
        let graph = cx.skeleton(1);
        let bank_face = Simplex::new([bank]).map_err(|_| FlowError::UnknownBank(bank))?;
        let bank_index = graph.face_index(&bank_face).ok_or(FlowError::UnknownBank(bank))?;
        if graph.betti(0) != 0 {
            return Err(FlowError::Disconnected);
        }
        let labels: Vec<Vertex> = graph.vertices().into_iter().filter(|&v| v != bank).collect();
        let position = |v: Vertex| labels.binary_search(&v).ok();
        let mut neighbors = vec![Vec::new(); labels.len()];
        let mut to_bank = vec![0; labels.len()];
        for e in graph.faces(1) {
            let [a, b] = [e.vertices()[0], e.vertices()[1]];
            match (position(a), position(b)) {
                (Some(x), Some(y)) => {
                    neighbors[x].push(y);
                    neighbors[y].push(x);
                }
                (Some(x), None) | (None, Some(x)) => to_bank[x] += 1,
                (None, None) => unreachable!("an edge has at most one bank endpoint"),
            }
        }
        let degree = neighbors.iter().zip(&to_bank).map(|(n, b)| n.len() as u64 + b).collect();
        let tree = trees::is_spanning_tree(&graph, 0, &[bank_index]).expect("a vertex is a 0-tree");
        let coordinates = GroupCoordinates::new(&graph, &tree)?;
        Ok(ChipGraph { bank, labels, neighbors, degree, to_bank, coordinates })
    }

    pub fn bank(&self) -> Vertex {
        self.bank
    }

    pub fn labels(&self) -> &[Vertex] {
        &self.labels
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degree
    }

    pub fn coordinates(&self) -> &GroupCoordinates {
        &self.coordinates
    }

    pub fn state(&self, chips: Vec<u64>) -> Result<ChipState<'_>, FlowError> {
        if chips.len() != self.labels.len() {
            return Err(FlowError::LengthMismatch { expected: self.labels.len(), found: chips.len() });
        }
        Ok(ChipState { graph: self, chips })
    }

    pub fn zero_state(&self) -> ChipState<'_> {
        ChipState { graph: self, chips: vec![0; self.labels.len()] }
    }

    /// Every critical state, by brute force over the stable states in
    /// lexicographic order. Only sensible for small graphs.
    pub fn critical_states(&self) -> Vec<ChipState<'_>> {
        self.degree
            .iter()
            .map(|&d| 0..d)
            .multi_cartesian_product()
            .map(|chips| ChipState { graph: self, chips })
            .filter(ChipState::is_recurrent)
            .collect()
    }
}

/// Chips on the non-bank vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChipState<'g> {
    graph: &'g ChipGraph,
    chips: Vec<u64>,
}

impl PartialEq for ChipGraph {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
    }
}

impl Eq for ChipGraph {}

impl std::hash::Hash for ChipGraph {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::ptr::hash(self, state);
    }
}

impl<'g> ChipState<'g> {
    pub fn chips(&self) -> &[u64] {
        &self.chips
    }

    pub fn graph(&self) -> &'g ChipGraph {
        self.graph
    }

    pub fn is_ready(&self, v: usize) -> bool {
        self.chips[v] >= self.graph.degree[v]
    }

    pub fn ready_vertices(&self) -> Vec<usize> {
        (0..self.chips.len()).filter(|&v| self.is_ready(v)).collect()
    }

    pub fn is_stable(&self) -> bool {
        (0..self.chips.len()).all(|v| !self.is_ready(v))
    }

    fn fire_times(&mut self, v: usize, times: u64) {
        self.chips[v] -= times * self.graph.degree[v];
        for &u in &self.graph.neighbors[v] {
            self.chips[u] += times;
        }
    }

    /// Fires `v` once if it is ready.
    pub fn fire(&self, v: usize) -> Option<ChipState<'g>> {
        self.is_ready(v).then(|| {
            let mut next = self.clone();
            next.fire_times(v, 1);
            next
        })
    }

    /// The bank gives one chip along each of its edges.
    pub fn fire_bank(&self) -> ChipState<'g> {
        let chips = self.chips.iter().zip(&self.graph.to_bank).map(|(c, b)| c + b).collect();
        ChipState { graph: self.graph, chips }
    }

    /// Fires ready vertices until none is left. Returns the stable state and
    /// the number of times each vertex fired; both are independent of the
    /// firing order.
    pub fn stabilize(&self) -> (ChipState<'g>, Vec<u64>) {
        let mut state = self.clone();
        let mut fired = vec![0; self.chips.len()];
        loop {
            let mut changed = false;
            for (v, count) in fired.iter_mut().enumerate() {
                let times = state.chips[v] / state.graph.degree[v];
                if times > 0 {
                    state.fire_times(v, times);
                    *count += times;
                    changed = true;
                }
            }
            if !changed {
                return (state, fired);
            }
        }
    }

    /// [`Self::stabilize`] one firing at a time; `choose` picks the next
    /// vertex from the nonempty list of ready vertices.
    pub fn stabilize_by(&self, mut choose: impl FnMut(&[usize]) -> usize) -> (ChipState<'g>, Vec<u64>) {
        let mut state = self.clone();
        let mut fired = vec![0; self.chips.len()];
        loop {
            let ready = state.ready_vertices();
            if ready.is_empty() {
                return (state, fired);
            }
            let v = choose(&ready);
            assert!(ready.contains(&v), "scheduler picked a vertex that is not ready");
            state.fire_times(v, 1);
            fired[v] += 1;
        }
    }

    /// Whether some nontrivial legal firing sequence returns to this state.
    /// The bank may fire only when the state is stable.
    ///
    /// For a stable state this is the burning test: after the bank fires,
    /// stabilization fires every vertex exactly once. An unstable state is
    /// recurrent when its stabilization is critical, every vertex fired at
    /// most once on the way, and the vertices that did not fire can be fired
    /// legally after the bank fires from the stabilization.
    pub fn is_recurrent(&self) -> bool {
        if self.is_stable() {
            let (_, fired) = self.fire_bank().stabilize();
            return fired.iter().all(|&f| f == 1);
        }
        let (stable, fired) = self.stabilize();
        if fired.iter().any(|&f| f > 1) || !stable.is_recurrent() {
            return false;
        }
        let mut state = stable.fire_bank();
        let mut pending: Vec<usize> = (0..fired.len()).filter(|&v| fired[v] == 0).collect();
        while let Some(pos) = pending.iter().position(|&v| state.is_ready(v)) {
            state.fire_times(pending.remove(pos), 1);
        }
        pending.is_empty()
    }

    pub fn is_critical(&self) -> bool {
        self.is_stable() && self.is_recurrent()
    }

    /// The unique critical state equivalent to this one: stabilize and fire
    /// the bank until a stable state repeats.
    pub fn critical_representative(&self) -> ChipState<'g> {
        let mut seen = HashSet::new();
        let mut state = self.stabilize().0;
        while seen.insert(state.chips.clone()) {
            state = state.fire_bank().stabilize().0;
        }
        state
    }

    /// Chip-wise sum.
    pub fn combine(&self, other: &ChipState<'g>) -> ChipState<'g> {
        assert!(std::ptr::eq(self.graph, other.graph), "states on different graphs");
        let chips = self.chips.iter().zip(&other.chips).map(|(a, b)| a + b).collect();
        ChipState { graph: self.graph, chips }
    }

    /// `[c] + [c']`: the critical representative of the sum.
    pub fn critical_sum(&self, other: &ChipState<'g>) -> ChipState<'g> {
        self.combine(other).critical_representative()
    }

    /// The class in `K_0` of the graph, in the coordinates of
    /// [`ChipGraph::coordinates`].
    pub fn to_group_element(&self) -> GroupElement {
        let theta: Vec<BigInt> = self.chips.iter().map(|&c| BigInt::from(c)).collect();
        self.graph.coordinates.element_from_theta(&theta).expect("one value per non-bank vertex")
    }
}

impl fmt::Display for ChipState<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.chips.iter().join(", "))
    }
}

/// `L̃` of the graph with the bank removed; exposed for oracles.
pub fn reduced_vertex_laplacian(graph: &ChipGraph) -> IntegerMatrix {
    let n = graph.labels.len();
    IntegerMatrix::from_fn(n, n, |r, c| {
        if r == c {
            BigInt::from(graph.degree[r])
        } else {
            -BigInt::from(graph.neighbors[r].iter().filter(|&&u| u == c).count())
        }
    })
}
