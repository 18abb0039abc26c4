use std::fmt;

use serde::Serialize;

use super::Graph;
use crate::error::{Error, Result};

/// Vertex cap of the exact maximum-clique solver (one machine word per set).
pub const EXACT_CLIQUE_CAP: usize = 64;

/// Clique number with a witness clique (0-based vertices, ascending).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliqueData {
    pub omega: usize,
    pub witness: Vec<usize>,
}

impl fmt::Display for CliqueData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.witness.iter().map(|v| (v + 1).to_string()).collect();
        write!(f, "omega={} witness={{{}}}", self.omega, labels.join(","))
    }
}

struct Search<'a> {
    adj: &'a [u64],
    best: u64,
    best_len: u32,
    current: u64,
}

impl Search<'_> {
    // Bron–Kerbosch with Tomita pivoting, pruned by the best size found so far.
    fn expand(&mut self, mut candidates: u64, mut excluded: u64) {
        let depth = self.current.count_ones();
        if candidates == 0 {
            if excluded == 0 && depth > self.best_len {
                self.best = self.current;
                self.best_len = depth;
            }
            return;
        }
        if depth + candidates.count_ones() <= self.best_len {
            return;
        }
        let pool = candidates | excluded;
        let pivot = bits(pool)
            .max_by_key(|&u| ((candidates & self.adj[u]).count_ones(), std::cmp::Reverse(u)))
            .expect("pool is nonempty");
        for v in bits(candidates & !self.adj[pivot]) {
            if depth + candidates.count_ones() <= self.best_len {
                return;
            }
            let bit = 1u64 << v;
            self.current |= bit;
            self.expand(candidates & self.adj[v], excluded & self.adj[v]);
            self.current &= !bit;
            candidates &= !bit;
            excluded |= bit;
        }
    }
}

fn bits(mut w: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if w == 0 {
            return None;
        }
        let b = w.trailing_zeros() as usize;
        w &= w - 1;
        Some(b)
    })
}

impl Graph {
    fn adjacency_words(&self) -> Vec<u64> {
        (0..self.d()).map(|v| self.neighbors(v).iter().fold(0u64, |w, u| w | 1 << u)).collect()
    }

    /// Exact clique number by branch-and-bound.
    pub fn clique_number(&self) -> Result<CliqueData> {
        if self.d() > EXACT_CLIQUE_CAP {
            return Err(Error::SizeLimitExceeded { d: self.d(), cap: EXACT_CLIQUE_CAP });
        }
        let adj = self.adjacency_words();
        let all = if self.d() == 64 { u64::MAX } else { (1u64 << self.d()) - 1 };
        let mut search = Search { adj: &adj, best: 0, best_len: 0, current: 0 };
        search.expand(all, 0);
        let witness: Vec<usize> = bits(search.best).collect();
        Ok(CliqueData { omega: witness.len(), witness })
    }
}

/// Maximum clique size over all vertex subsets. Exponential; intended as an
/// independent cross-check for small graphs.
pub fn brute_force_clique_number(g: &Graph) -> usize {
    assert!(g.d() <= 20, "brute force is limited to 20 vertices");
    let adj = g.adjacency_words();
    let mut best = 0;
    for subset in 1u32..(1u32 << g.d()) {
        let size = subset.count_ones() as usize;
        if size <= best {
            continue;
        }
        let s = subset as u64;
        if bits(s).all(|v| s & !(1 << v) & !adj[v] == 0) {
            best = size;
        }
    }
    best
}
