//! The commutation graph and everything computed directly from it.
//!
//! Vertices are 0-based internally and in file formats; anything printed for
//! a human uses 1-based labels (see [`VertexSet`]'s `Display` and
//! [`crate::trace::Trace`]).

mod clique;
mod family;
mod io;
pub(crate) mod spectrum;

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use clique::{brute_force_clique_number, CliqueData, EXACT_CLIQUE_CAP};
pub use family::Family;
pub use io::GraphJson;
pub use spectrum::{SpectralData, DENSE_TOLERANCE};

/// Largest supported vertex count. Letters are stored as `u8`.
pub const MAX_VERTICES: usize = 256;

const WORDS: usize = MAX_VERTICES / 64;

/// Fixed-width bitset over vertices (equivalently, letters).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VertexSet([u64; WORDS]);

impl VertexSet {
    pub const fn empty() -> Self {
        VertexSet([0; WORDS])
    }

    pub fn full(d: usize) -> Self {
        let mut s = Self::empty();
        for v in 0..d {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        self.0[v >> 6] |= 1u64 << (v & 63);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        self.0[v >> 6] &= !(1u64 << (v & 63));
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.0[v >> 6] >> (v & 63) & 1 == 1
    }

    #[inline]
    pub fn union_with(&mut self, other: &VertexSet) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= *b;
        }
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + bit)
            })
        })
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, v) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "}}")
    }
}

/// Simple undirected graph without self-loops, identified with its
/// symmetric 0/1 adjacency matrix. Adjacent vertices commute.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    d: usize,
    neighbors: Vec<VertexSet>,
}

/// Connectivity and regularity of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Structure {
    pub is_connected: bool,
    pub is_regular: bool,
    /// Common degree when the graph is regular.
    pub degree: Option<usize>,
}

impl Graph {
    /// Validates a raw square matrix. Errors name the first offending entry
    /// in row-major order; symmetry is checked on the lower triangle.
    pub fn validate<R: AsRef<[i64]>>(raw: &[R]) -> Result<Graph> {
        let d = raw.len();
        if d == 0 {
            return Err(Error::EmptyGraph);
        }
        if d > MAX_VERTICES {
            return Err(Error::TooManyVertices { d, max: MAX_VERTICES });
        }
        for (row, r) in raw.iter().enumerate() {
            let len = r.as_ref().len();
            if len != d {
                return Err(Error::NotSquare { row, len, expected: d });
            }
        }
        let mut neighbors = vec![VertexSet::empty(); d];
        for (i, r) in raw.iter().enumerate() {
            for (j, &value) in r.as_ref().iter().enumerate() {
                if value != 0 && value != 1 {
                    return Err(Error::NonBinaryEntry { row: i, col: j, value });
                }
                if i == j && value != 0 {
                    return Err(Error::NonZeroDiagonal { index: i });
                }
                if j < i && value != raw[j].as_ref()[i] {
                    return Err(Error::NonSymmetric { row: i, col: j });
                }
                if value == 1 {
                    neighbors[i].insert(j);
                }
            }
        }
        Ok(Graph { d, neighbors })
    }

    /// Builds a graph from 0-based edges. Self-loops, out-of-range endpoints
    /// and duplicates (in either orientation) are rejected.
    pub fn from_edges(d: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if d == 0 {
            return Err(Error::EmptyGraph);
        }
        if d > MAX_VERTICES {
            return Err(Error::TooManyVertices { d, max: MAX_VERTICES });
        }
        let mut neighbors = vec![VertexSet::empty(); d];
        for &(i, j) in edges {
            let bad = |reason| Error::BadEdge { i, j, d, reason };
            if i >= d || j >= d {
                return Err(bad("endpoint out of range"));
            }
            if i == j {
                return Err(bad("self-loop"));
            }
            if neighbors[i].contains(j) {
                return Err(bad("duplicate edge"));
            }
            neighbors[i].insert(j);
            neighbors[j].insert(i);
        }
        Ok(Graph { d, neighbors })
    }

    /// Graph on `d` vertices with no edges (the free case).
    pub fn empty(d: usize) -> Result<Graph> {
        Graph::from_edges(d, &[])
    }

    /// Complete graph on `d` vertices (the classical case).
    pub fn complete(d: usize) -> Result<Graph> {
        let edges: Vec<_> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        Graph::from_edges(d, &edges)
    }

    /// Vertex count.
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].contains(j)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.d).flat_map(|i| self.neighbors[i].iter().filter(move |&j| j > i).map(move |j| (i, j))).collect()
    }

    pub fn adjacency_matrix(&self) -> Vec<Vec<i64>> {
        (0..self.d).map(|i| (0..self.d).map(|j| self.adjacent(i, j) as i64).collect()).collect()
    }

    pub fn complement(&self) -> Graph {
        let full = VertexSet::full(self.d);
        let neighbors = (0..self.d)
            .map(|i| {
                let mut s = full;
                for j in self.neighbors[i].iter() {
                    s.remove(j);
                }
                s.remove(i);
                s
            })
            .collect();
        Graph { d: self.d, neighbors }
    }

    /// True when every pair of listed vertices is adjacent.
    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        self.first_non_adjacent_pair(vertices).is_none()
    }

    pub(crate) fn first_non_adjacent_pair(&self, vertices: &[usize]) -> Option<(usize, usize)> {
        for (n, &a) in vertices.iter().enumerate() {
            for &b in &vertices[n + 1..] {
                if a == b || !self.adjacent(a, b) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Connectivity via breadth-first search, regularity via row sums.
    pub fn structure(&self) -> Structure {
        let mut seen = VertexSet::empty();
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen.insert(0);
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors[v].iter() {
                if !seen.contains(w) {
                    seen.insert(w);
                    queue.push_back(w);
                }
            }
        }
        let first = self.degree(0);
        let is_regular = (1..self.d).all(|v| self.degree(v) == first);
        Structure { is_connected: seen.len() == self.d, is_regular, degree: is_regular.then_some(first) }
    }

    /// Short stable digest of the vertex count and edge list.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.d as u64).to_le_bytes());
        for (i, j) in self.edges() {
            h.update((i as u32).to_le_bytes());
            h.update((j as u32).to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("d", &self.d).field("edges", &self.edges()).finish()
    }
}
