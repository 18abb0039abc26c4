//! Words over the alphabet `{1..d}` modulo the partial commutation generated
//! by the graph: `u i j v ~ u j i v` whenever `i` and `j` are adjacent.
//!
//! Each class is represented by its lexicographically least word.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet, MAX_VERTICES};

/// Default cap on the number of enumerated traces.
pub const DEFAULT_BASIS_CAP: usize = 5_000_000;

/// Canonical (lexicographically least) representative of a class of words.
/// Letters are 0-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Trace(Box<[u8]>);

impl Trace {
    /// The empty word, indexing the vacuum.
    pub fn vacuum() -> Trace {
        Trace(Box::default())
    }

    pub(crate) fn from_canonical(letters: Vec<u8>) -> Trace {
        Trace(letters.into_boxed_slice())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 0-based letters as `usize`.
    pub fn to_word(&self) -> Vec<usize> {
        self.0.iter().map(|&c| c as usize).collect()
    }
}

/// Comma-separated 1-based letters; the empty trace prints as `0`.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (n, c) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", *c as usize + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Trace({self})")
    }
}

/// Precomputed commutation data for one graph.
#[derive(Debug, Clone)]
pub struct TraceMonoid<'g> {
    graph: &'g Graph,
    // letters that cannot move left past a given letter: itself and its non-neighbours
    blockers: Vec<VertexSet>,
}

impl<'g> TraceMonoid<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        let d = graph.d();
        let blockers = (0..d)
            .map(|a| {
                let mut s = VertexSet::full(d);
                for b in graph.neighbors(a).iter() {
                    s.remove(b);
                }
                s
            })
            .collect();
        TraceMonoid { graph, blockers }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    fn check_word(&self, word: &[usize]) -> Result<Vec<u8>> {
        let d = self.graph.d();
        word.iter().map(|&c| if c < d { Ok(c as u8) } else { Err(Error::LetterOutOfRange { letter: c, d }) }).collect()
    }

    /// Writes the canonical form of `word` into `out`.
    ///
    /// Repeatedly takes the smallest letter whose first occurrence is preceded
    /// only by letters it commutes with.
    pub(crate) fn canonicalize_into(&self, word: &[u8], out: &mut Vec<u8>) {
        out.clear();
        let n = word.len();
        let mut taken = vec![false; n];
        for _ in 0..n {
            let mut blocked = VertexSet::empty();
            let mut best: Option<(u8, usize)> = None;
            for (p, &c) in word.iter().enumerate() {
                if taken[p] {
                    continue;
                }
                if !blocked.contains(c as usize) && best.is_none_or(|(b, _)| c < b) {
                    best = Some((c, p));
                }
                blocked.union_with(&self.blockers[c as usize]);
            }
            let (c, p) = best.expect("a nonempty word has an initial letter");
            taken[p] = true;
            out.push(c);
        }
    }

    pub(crate) fn canonicalize(&self, word: &[u8]) -> Trace {
        let mut out = Vec::with_capacity(word.len());
        self.canonicalize_into(word, &mut out);
        Trace::from_canonical(out)
    }

    pub fn normal_form(&self, word: &[usize]) -> Result<Trace> {
        Ok(self.canonicalize(&self.check_word(word)?))
    }

    pub fn equivalent(&self, u: &[usize], v: &[usize]) -> Result<bool> {
        Ok(self.normal_form(u)? == self.normal_form(v)?)
    }

    /// Letters `i` such that the class of `letters` has a representative
    /// starting with `i`, each with the position of its first occurrence.
    pub(crate) fn initial_positions(&self, letters: &[u8]) -> Vec<(u8, usize)> {
        let mut blocked = VertexSet::empty();
        let mut found = Vec::new();
        for (p, &c) in letters.iter().enumerate() {
            if !blocked.contains(c as usize) {
                found.push((c, p));
            }
            blocked.union_with(&self.blockers[c as usize]);
        }
        found
    }

    pub fn initial_letters(&self, t: &Trace) -> VertexSet {
        let mut s = VertexSet::empty();
        for (c, _) in self.initial_positions(t.letters()) {
            s.insert(c as usize);
        }
        s
    }

    /// Removes the first occurrence of initial letter `letter` and
    /// re-normalises. `None` when `letter` is not initial.
    pub fn strip_initial(&self, t: &Trace, letter: usize) -> Option<Trace> {
        let (_, p) = self.initial_positions(t.letters()).into_iter().find(|&(c, _)| c as usize == letter)?;
        let mut rest = t.letters().to_vec();
        rest.remove(p);
        Some(self.canonicalize(&rest))
    }

    /// Canonical form of `letter · t`.
    pub fn prepend(&self, letter: usize, t: &Trace) -> Trace {
        let mut word = Vec::with_capacity(t.len() + 1);
        word.push(letter as u8);
        word.extend_from_slice(t.letters());
        self.canonicalize(&word)
    }

    /// All traces of length `0..=max_len`, one canonical representative per
    /// class, sorted lexicographically within each length.
    ///
    /// Level `n + 1` is the deduplicated set of canonical forms of `i·w` for
    /// every letter `i` and every `w` in level `n`.
    pub fn enumerate(&self, max_len: usize, cap: usize) -> Result<TraceLevels> {
        let mut levels = vec![vec![Trace::vacuum()]];
        let mut total = 1usize;
        if total > cap {
            return Err(Error::BasisTooLarge { cap, reached: total, length: 0 });
        }
        let d = self.graph.d();
        let mut word = Vec::new();
        let mut canon = Vec::new();
        for length in 1..=max_len {
            let mut next: HashSet<Trace> = HashSet::new();
            for w in levels.last().expect("level 0 exists") {
                for i in 0..d {
                    word.clear();
                    word.push(i as u8);
                    word.extend_from_slice(w.letters());
                    self.canonicalize_into(&word, &mut canon);
                    if !next.contains(canon.as_slice()) {
                        next.insert(Trace::from_canonical(canon.clone()));
                        if total + next.len() > cap {
                            return Err(Error::BasisTooLarge { cap, reached: total + next.len(), length });
                        }
                    }
                }
            }
            total += next.len();
            let mut level: Vec<Trace> = next.into_iter().collect();
            level.sort_unstable();
            levels.push(level);
        }
        Ok(TraceLevels { levels })
    }

    /// Membership in the index set on which mixed moments of centred
    /// variables vanish: between any two equal indices there is a letter
    /// that differs from them and does not commute with them.
    pub fn in_reduced_index_set(&self, tuple: &[usize]) -> Result<bool> {
        let word = self.check_word(tuple)?;
        // consecutive occurrences suffice: a separator between neighbours
        // also separates any wider pair
        let mut last_seen: Vec<Option<usize>> = vec![None; self.graph.d()];
        for (l, &c) in word.iter().enumerate() {
            if let Some(k) = last_seen[c as usize] {
                let separated = word[k + 1..l].iter().any(|&m| m != c && !self.graph.adjacent(c as usize, m as usize));
                if !separated {
                    return Ok(false);
                }
            }
            last_seen[c as usize] = Some(l);
        }
        Ok(true)
    }
}

/// Traces grouped by length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLevels {
    pub levels: Vec<Vec<Trace>>,
}

impl TraceLevels {
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

impl std::borrow::Borrow<[u8]> for Trace {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

pub fn normal_form(word: &[usize], g: &Graph) -> Result<Trace> {
    TraceMonoid::new(g).normal_form(word)
}

pub fn equivalent(u: &[usize], v: &[usize], g: &Graph) -> Result<bool> {
    TraceMonoid::new(g).equivalent(u, v)
}

pub fn initial_letters(t: &Trace, g: &Graph) -> VertexSet {
    TraceMonoid::new(g).initial_letters(t)
}

pub fn enumerate_traces(g: &Graph, max_len: usize) -> Result<TraceLevels> {
    TraceMonoid::new(g).enumerate(max_len, DEFAULT_BASIS_CAP)
}

pub fn in_reduced_index_set(tuple: &[usize], g: &Graph) -> Result<bool> {
    TraceMonoid::new(g).in_reduced_index_set(tuple)
}

const _: () = assert!(MAX_VERTICES <= u8::MAX as usize + 1);
