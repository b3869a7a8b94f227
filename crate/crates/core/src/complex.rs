//! Finite abstract simplicial complexes and their reduced chain complexes.
//!
//! Faces of each dimension are kept sorted lexicographically, which fixes
//! the row and column order of every matrix built here. The empty simplex
//! lives in dimension -1, so `∂_0` is the augmentation map (the all-ones
//! row) and homology is reduced homology.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::linalg::{self, IntegerMatrix};

/// Vertex labels: arbitrary positive integers, not necessarily contiguous.
pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("facet list is empty")]
    EmptyFacetList,
    #[error("facet is empty")]
    EmptyFacet,
    #[error("vertex {0} appears twice in a facet")]
    DuplicateVertex(Vertex),
    #[error("vertex labels must be positive integers")]
    ZeroLabel,
    #[error("dimension {dim} out of range {min}..={max}")]
    DimensionOutOfRange { dim: isize, min: isize, max: isize },
    #[error("face {0} is not in the complex")]
    UnknownFace(Simplex),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid parameters: {0}")]
    BadParameters(String),
}

/// A simplex with vertices in strictly increasing order. The increasing
/// order is the orientation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<Vertex>);

impl Simplex {
    pub fn new<I: IntoIterator<Item = Vertex>>(vertices: I) -> Result<Self, ComplexError> {
        let mut v: Vec<Vertex> = vertices.into_iter().collect();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::DuplicateVertex(w[0]));
        }
        if v.first() == Some(&0) {
            return Err(ComplexError::ZeroLabel);
        }
        Ok(Simplex(v))
    }

    /// The empty simplex, of dimension -1.
    pub fn empty() -> Self {
        Simplex(Vec::new())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn dim(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Codimension-one faces with their boundary signs: removing the vertex
    /// in position `j` carries sign `(-1)^j`.
    pub fn boundary(&self) -> impl Iterator<Item = (Simplex, i32)> + '_ {
        (0..self.0.len()).map(move |j| {
            let mut f = self.0.clone();
            f.remove(j);
            (Simplex(f), if j % 2 == 0 { 1 } else { -1 })
        })
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// Reduced integral homology `Z^betti ⊕ Z/t_1 ⊕ ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomologyGroup {
    pub betti: usize,
    /// Invariant factors `> 1`, each dividing the next.
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        linalg::write_group(f, self.betti, &self.torsion)
    }
}

#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    /// `faces[i + 1]` holds the `i`-faces in lexicographic order.
    faces: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    facets: Vec<Simplex>,
}

impl SimplicialComplex {
    /// Downward closure of a facet list.
    pub fn from_facets<I, F>(facets: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = F>,
        F: IntoIterator<Item = Vertex>,
    {
        let mut given = Vec::new();
        for f in facets {
            let s = Simplex::new(f)?;
            if s.0.is_empty() {
                return Err(ComplexError::EmptyFacet);
            }
            given.push(s);
        }
        if given.is_empty() {
            return Err(ComplexError::EmptyFacetList);
        }
        let top = given.iter().map(Simplex::dim).max().unwrap();
        let mut by_dim: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); (top + 2) as usize];
        for s in &given {
            let n = s.0.len();
            for mask in 0u64..(1u64 << n) {
                let sub: Vec<Vertex> = (0..n).filter(|&j| mask >> j & 1 == 1).map(|j| s.0[j]).collect();
                by_dim[sub.len()].insert(Simplex(sub));
            }
        }
        let faces: Vec<Vec<Simplex>> = by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = faces
            .iter()
            .map(|fs| fs.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())
            .collect();
        let mut cx = SimplicialComplex { faces, index, facets: Vec::new() };
        cx.facets = cx.compute_facets();
        Ok(cx)
    }

    pub fn from_facet_str(text: &str) -> Result<Self, ComplexError> {
        Self::from_facets(parse_facets(text)?)
    }

    fn compute_facets(&self) -> Vec<Simplex> {
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..=d {
            for s in self.faces(i) {
                let covered = i < d && self.faces(i + 1).iter().any(|t| s.is_face_of(t));
                if !covered {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// Top dimension `d`.
    pub fn dim(&self) -> isize {
        self.faces.len() as isize - 2
    }

    /// The `i`-faces in lexicographic order; empty outside `-1..=d`.
    pub fn faces(&self, i: isize) -> &[Simplex] {
        if i < -1 || i > self.dim() {
            return &[];
        }
        &self.faces[(i + 1) as usize]
    }

    pub fn num_faces(&self, i: isize) -> usize {
        self.faces(i).len()
    }

    /// `(f_{-1}, f_0, ..., f_d)`.
    pub fn f_vector(&self) -> Vec<usize> {
        self.faces.iter().map(Vec::len).collect()
    }

    /// Position of a face within its dimension's face list.
    pub fn face_index(&self, s: &Simplex) -> Option<usize> {
        let d = s.dim();
        if d > self.dim() {
            return None;
        }
        self.index[(d + 1) as usize].get(s).copied()
    }

    /// Maximal faces, by dimension then lexicographically.
    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        self.faces(0).iter().map(|s| s.0[0]).collect()
    }

    pub fn is_pure(&self) -> bool {
        let d = self.dim();
        self.facets.iter().all(|f| f.dim() == d)
    }

    pub(crate) fn check_dim(&self, i: isize, min: isize, max: isize) -> Result<(), ComplexError> {
        if i < min || i > max {
            Err(ComplexError::DimensionOutOfRange { dim: i, min, max })
        } else {
            Ok(())
        }
    }

    /// Matrix of `∂_i : C_i → C_{i-1}` for `-1 <= i <= d`.
    pub fn boundary_matrix(&self, i: isize) -> Result<IntegerMatrix, ComplexError> {
        self.check_dim(i, -1, self.dim())?;
        Ok(self.boundary(i))
    }

    /// `∂_i` without the range check; `i = d + 1` gives the `f_d x 0` map.
    pub(crate) fn boundary(&self, i: isize) -> IntegerMatrix {
        let rows = self.num_faces(i - 1);
        let cols = self.faces(i);
        let mut m = IntegerMatrix::zeros(rows, cols.len());
        for (c, s) in cols.iter().enumerate() {
            for (f, sign) in s.boundary() {
                let r = self.index[i as usize][&f];
                m[(r, c)] = BigInt::from(sign);
            }
        }
        m
    }

    /// `∂*_i : C_{i-1} → C_i`, the transpose of [`Self::boundary_matrix`].
    pub fn coboundary_matrix(&self, i: isize) -> Result<IntegerMatrix, ComplexError> {
        Ok(self.boundary_matrix(i)?.transpose())
    }

    /// `H̃_i(Δ; Z)` from the Smith forms of `∂_i` and `∂_{i+1}`.
    pub fn reduced_homology(&self, i: isize) -> Result<HomologyGroup, ComplexError> {
        self.check_dim(i, -1, self.dim())?;
        let rank_i = linalg::invariant_factors(&self.boundary(i)).len();
        let next = linalg::invariant_factors(&self.boundary(i + 1));
        Ok(HomologyGroup {
            betti: self.num_faces(i) - rank_i - next.len(),
            torsion: next.into_iter().filter(|d| !d.is_one()).collect(),
        })
    }

    /// `dim_Q H̃_i(Δ; Q)`; zero outside `-1..=d`.
    pub fn betti(&self, i: isize) -> usize {
        if i < -1 || i > self.dim() {
            return 0;
        }
        self.num_faces(i) - self.boundary(i).rank() - self.boundary(i + 1).rank()
    }

    /// Acyclic in positive codimension: `H̃_i(Δ; Q) = 0` for all `i < d`.
    pub fn is_apc(&self) -> bool {
        (-1..self.dim()).all(|i| self.betti(i) == 0)
    }

    /// `Σ (-1)^i f_i` over `i = -1..=d`.
    pub fn reduced_euler_characteristic(&self) -> i64 {
        (-1..=self.dim()).map(|i| if i.rem_euclid(2) == 0 { 1 } else { -1 } * self.num_faces(i) as i64).sum()
    }

    /// The subcomplex of faces of dimension at most `i`.
    pub fn skeleton(&self, i: isize) -> SimplicialComplex {
        let keep = (i.clamp(-1, self.dim()) + 2) as usize;
        let faces: Vec<Vec<Simplex>> = self.faces[..keep].to_vec();
        let index = self.index[..keep].to_vec();
        let mut cx = SimplicialComplex { faces, index, facets: Vec::new() };
        cx.facets = cx.compute_facets();
        cx
    }

    /// One facet per line, labels separated by spaces.
    pub fn to_facet_string(&self) -> String {
        let mut out = String::new();
        for f in &self.facets {
            let labels: Vec<String> = f.0.iter().map(|v| v.to_string()).collect();
            out.push_str(&labels.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses the facet file format: one facet per line, base-10 labels
/// separated by whitespace; blank lines and `#` comments are skipped.
pub fn parse_facets(text: &str) -> Result<Vec<Vec<Vertex>>, ComplexError> {
    let mut facets = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let facet = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<Vertex>().map_err(|e| ComplexError::Parse {
                    line: n + 1,
                    message: format!("bad vertex label {tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        facets.push(facet);
    }
    Ok(facets)
}
