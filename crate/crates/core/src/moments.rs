//! Exact vacuum moments `<s_{i_1} ... s_{i_n} e_0, e_0>` and the moments of
//! `A = sum_i s_i`, in integer arithmetic.
//!
//! Vectors are propagated in `i128` with overflow checks and promoted to
//! `BigInt` on the first overflow.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, SparseOperator};
use crate::graph::Graph;
use crate::trace::DEFAULT_BASIS_CAP;

/// Depth that makes a length-`n` word exact: a ±1 walk of length `n`
/// returning to level 0 never climbs above `ceil(n/2)`; one spare level.
pub fn depth_for_length(n: usize) -> usize {
    n.div_ceil(2) + 1
}

/// `m_k = <A^k e_0, e_0>` for `k = 0..=K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentSequence {
    pub graph_id: String,
    #[serde(serialize_with = "serialize_decimal")]
    pub values: Vec<BigInt>,
}

fn serialize_decimal<S: serde::Serializer>(values: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(|v| v.to_string()))
}

impl MomentSequence {
    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// `m_k^{1/k}` for even `k >= 2`.
    pub fn root(&self, k: usize) -> f64 {
        integer_root(&self.values[k], k as u32)
    }

    /// Rows `(order, moment, running root)` for the even orders `>= 2`.
    pub fn even_rows(&self) -> Vec<(usize, &BigInt, f64)> {
        (2..=self.max_order()).step_by(2).map(|k| (k, &self.values[k], self.root(k))).collect()
    }

    /// Checks `m_0 = 1`, vanishing odd moments, positive even moments and
    /// nondecreasing even roots. Returns the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        if !self.values[0].is_one() {
            return Err(format!("m_0 = {}", self.values[0]));
        }
        let mut prev = 0.0;
        for (k, m) in self.values.iter().enumerate().skip(1) {
            if k % 2 == 1 && !m.is_zero() {
                return Err(format!("odd moment m_{k} = {m}"));
            }
            if k % 2 == 0 {
                if m <= &BigInt::zero() {
                    return Err(format!("m_{k} = {m} is not positive"));
                }
                let r = self.root(k);
                if r < prev * (1.0 - 1e-12) {
                    return Err(format!("root of m_{k} = {r} drops below {prev}"));
                }
                prev = r;
            }
        }
        Ok(())
    }
}

/// `v^{1/k}` for a positive integer of any size.
pub fn integer_root(v: &BigInt, k: u32) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    match v.to_f64() {
        Some(x) if x.is_finite() => x.powf(1.0 / k as f64),
        _ => {
            // v = top · 2^shift with `top` holding the leading 64 bits
            let shift = v.bits().saturating_sub(64);
            let top = (v >> shift).to_f64().expect("64-bit value fits");
            ((top.ln() + shift as f64 * std::f64::consts::LN_2) / k as f64).exp()
        }
    }
}

static CATALAN: Mutex<Vec<BigInt>> = Mutex::new(Vec::new());

/// `C_n` by the recurrence `C_{n+1} = C_n · 2(2n+1)/(n+2)`, cached.
pub fn catalan(n: usize) -> BigInt {
    let mut cache = CATALAN.lock().expect("catalan cache poisoned");
    if cache.is_empty() {
        cache.push(BigInt::one());
    }
    while cache.len() <= n {
        let m = cache.len() - 1;
        let next = &cache[m] * (2 * (2 * m + 1)) / (m + 2);
        cache.push(next);
    }
    cache[n].clone()
}

enum ExactVector {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl ExactVector {
    fn unit(dim: usize, at: usize) -> Self {
        let mut v = vec![0i128; dim];
        v[at] = 1;
        ExactVector::Small(v)
    }

    fn apply(self, op: &SparseOperator) -> Self {
        match self {
            ExactVector::Small(v) => match op.apply_checked_i128(&v) {
                Some(y) => ExactVector::Small(y),
                None => ExactVector::Big(op.apply(&v.into_iter().map(BigInt::from).collect::<Vec<_>>())),
            },
            ExactVector::Big(v) => ExactVector::Big(op.apply(&v)),
        }
    }

    fn get(&self, k: usize) -> BigInt {
        match self {
            ExactVector::Small(v) => BigInt::from(v[k]),
            ExactVector::Big(v) => v[k].clone(),
        }
    }

    fn norm_squared(&self) -> BigInt {
        match self {
            ExactVector::Small(v) => v.iter().map(|&x| BigInt::from(x) * x).sum(),
            ExactVector::Big(v) => v.iter().map(|x| x * x).sum(),
        }
    }
}

/// Semicircular operators on a Fock space of fixed depth, reusable across
/// many words.
#[derive(Debug, Clone)]
pub struct MomentEngine {
    d: usize,
    depth: usize,
    semicircles: Vec<SparseOperator>,
    sum: SparseOperator,
    graph_id: String,
}

impl MomentEngine {
    pub fn new(g: &Graph, depth: usize) -> Result<MomentEngine> {
        Self::with_cap(g, depth, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(g: &Graph, depth: usize, cap: usize) -> Result<MomentEngine> {
        let space = FockSpace::with_cap(g, depth, cap)?;
        let semicircles = (0..g.d()).map(|i| space.semicircle(i)).collect();
        Ok(MomentEngine { d: g.d(), depth, semicircles, sum: space.sum_of_semicircles(), graph_id: g.digest() })
    }

    /// Longest word this engine evaluates exactly.
    pub fn max_word_length(&self) -> usize {
        2 * self.depth.saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.sum.dim()
    }

    /// `tau[s_{i_1} ... s_{i_n}]`, operators applied right to left to `e_0`.
    pub fn vacuum_moment(&self, word: &[usize]) -> Result<BigInt> {
        if word.len() > self.max_word_length() {
            return Err(Error::BadParams(format!(
                "word of length {} needs depth {}, engine has {}",
                word.len(),
                depth_for_length(word.len()),
                self.depth
            )));
        }
        if let Some(&letter) = word.iter().find(|&&c| c >= self.d) {
            return Err(Error::LetterOutOfRange { letter, d: self.d });
        }
        let v = word.iter().rev().fold(ExactVector::unit(self.dim(), 0), |v, &i| v.apply(&self.semicircles[i]));
        Ok(v.get(0))
    }

    /// `m_0..=m_K` of `A = sum_i s_i` by repeated application to `e_0`.
    pub fn sum_moments(&self, max_order: usize) -> Result<MomentSequence> {
        if max_order > self.max_word_length() {
            return Err(Error::BadParams(format!(
                "order {max_order} needs depth {}, engine has {}",
                depth_for_length(max_order),
                self.depth
            )));
        }
        let mut values = Vec::with_capacity(max_order + 1);
        let mut v = ExactVector::unit(self.dim(), 0);
        values.push(v.get(0));
        for _ in 0..max_order {
            v = v.apply(&self.sum);
            values.push(v.get(0));
        }
        Ok(MomentSequence { graph_id: self.graph_id.clone(), values })
    }

    /// `||A^n e_0||^2 = m_{2n}`, an independent route to the even moments.
    pub fn even_moment_by_norm(&self, n: usize) -> Result<BigInt> {
        if n > self.depth {
            return Err(Error::BadParams(format!("half-order {n} exceeds depth {}", self.depth)));
        }
        let v = (0..n).fold(ExactVector::unit(self.dim(), 0), |v, _| v.apply(&self.sum));
        Ok(v.norm_squared())
    }
}

pub fn vacuum_moment(g: &Graph, word: &[usize]) -> Result<BigInt> {
    MomentEngine::new(g, depth_for_length(word.len()))?.vacuum_moment(word)
}

pub fn sum_moments(g: &Graph, max_order: usize) -> Result<MomentSequence> {
    MomentEngine::new(g, depth_for_length(max_order))?.sum_moments(max_order)
}

/// `m_{2n}^{1/2n}`, a lower bound on `||sum_i s_i||`.
pub fn moment_norm_lower(g: &Graph, order: usize) -> Result<f64> {
    moment_norm_lower_with_cap(g, order, DEFAULT_BASIS_CAP)
}

pub fn moment_norm_lower_with_cap(g: &Graph, order: usize, cap: usize) -> Result<f64> {
    if order < 2 || order % 2 == 1 {
        return Err(Error::BadParams(format!("moment order must be even and >= 2, got {order}")));
    }
    Ok(MomentEngine::with_cap(g, depth_for_length(order), cap)?.sum_moments(order)?.root(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    /// Non-crossing pair partitions of `0..n` whose blocks pair equal
    /// letters, counted by brute force.
    fn noncrossing_pairings(word: &[usize]) -> u64 {
        fn go(word: &[usize], open: &mut Vec<usize>, pos: usize) -> u64 {
            if pos == word.len() {
                return open.is_empty() as u64;
            }
            let mut total = 0;
            // close the innermost open block
            if let Some(&top) = open.last() {
                if word[top] == word[pos] {
                    open.pop();
                    total += go(word, open, pos + 1);
                    open.push(top);
                }
            }
            open.push(pos);
            total += go(word, open, pos + 1);
            open.pop();
            total
        }
        go(word, &mut Vec::new(), 0)
    }

    /// Pairings of equal letters in which only blocks of different letters
    /// may cross: the classical (all letters commute) count.
    fn classical_pairings(word: &[usize]) -> u64 {
        fn crosses(a: (usize, usize), b: (usize, usize)) -> bool {
            (a.0 < b.0 && b.0 < a.1 && a.1 < b.1) || (b.0 < a.0 && a.0 < b.1 && b.1 < a.1)
        }
        fn go(word: &[usize], used: &mut Vec<bool>, blocks: &mut Vec<(usize, usize)>) -> u64 {
            let Some(first) = used.iter().position(|u| !u) else { return 1 };
            used[first] = true;
            let mut total = 0;
            for j in first + 1..word.len() {
                if !used[j] && word[j] == word[first] {
                    let ok = blocks.iter().all(|&b| word[b.0] != word[first] || !crosses(b, (first, j)));
                    if ok {
                        used[j] = true;
                        blocks.push((first, j));
                        total += go(word, used, blocks);
                        blocks.pop();
                        used[j] = false;
                    }
                }
            }
            used[first] = false;
            total
        }
        go(word, &mut vec![false; word.len()], &mut Vec::new())
    }

    /// All pair partitions pairing equal letters (crossings allowed).
    #[allow(dead_code)]
    fn all_pairings(word: &[usize]) -> u64 {
        fn go(word: &[usize], used: &mut Vec<bool>) -> u64 {
            let Some(first) = used.iter().position(|u| !u) else { return 1 };
            used[first] = true;
            let mut total = 0;
            for j in first + 1..word.len() {
                if !used[j] && word[j] == word[first] {
                    used[j] = true;
                    total += go(word, used);
                    used[j] = false;
                }
            }
            used[first] = false;
            total
        }
        go(word, &mut vec![false; word.len()])
    }

    fn words(d: usize, n: usize) -> Vec<Vec<usize>> {
        (0..n).fold(vec![vec![]], |acc, _| {
            acc.into_iter().flat_map(|w| (0..d).map(move |c| [w.clone(), vec![c]].concat())).collect()
        })
    }

    #[test]
    fn catalan_numbers() {
        let expected = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (n, &c) in expected.iter().enumerate() {
            assert_eq!(catalan(n), big(c));
        }
        // C_n = number of non-crossing pairings of 2n equal letters
        for n in 0..7 {
            assert_eq!(catalan(n), BigInt::from(noncrossing_pairings(&vec![0; 2 * n])));
        }
    }

    #[test]
    fn word_moment_examples() {
        let comm = Graph::complete(2).unwrap();
        let free = Graph::empty(2).unwrap();
        for g in [&comm, &free] {
            assert_eq!(vacuum_moment(g, &[0, 0, 0, 0]).unwrap(), big(2));
        }
        assert_eq!(vacuum_moment(&comm, &[0, 1, 0, 1]).unwrap(), big(1));
        assert_eq!(vacuum_moment(&comm, &[0, 0, 1, 1]).unwrap(), big(1));
        assert_eq!(vacuum_moment(&free, &[0, 1, 0, 1]).unwrap(), big(0));
        assert_eq!(vacuum_moment(&free, &[]).unwrap(), big(1));
        assert_eq!(vacuum_moment(&free, &[0, 2]), Err(Error::LetterOutOfRange { letter: 2, d: 2 }));
    }

    #[test]
    fn word_moments_match_pair_partition_counts() {
        // free: non-crossing pairings of equal letters; classical: only
        // different letters may cross
        let free = MomentEngine::new(&Graph::empty(3).unwrap(), 4).unwrap();
        let comm = MomentEngine::new(&Graph::complete(3).unwrap(), 4).unwrap();
        for n in [2, 4, 6] {
            for w in words(3, n) {
                assert_eq!(free.vacuum_moment(&w).unwrap(), BigInt::from(noncrossing_pairings(&w)), "{w:?}");
                assert_eq!(comm.vacuum_moment(&w).unwrap(), BigInt::from(classical_pairings(&w)), "{w:?}");
            }
        }
    }

    #[test]
    fn sum_moment_examples() {
        let free = sum_moments(&Graph::empty(2).unwrap(), 8).unwrap();
        assert_eq!(free.values[2], big(2));
        assert_eq!(free.values[4], big(8));
        assert_eq!(free.values[8], big(224));
        let comm = sum_moments(&Graph::complete(2).unwrap(), 6).unwrap();
        assert_eq!(comm.values[2..=6], [big(2), big(0), big(10), big(0), big(70)]);
        let k22 = Family::CompleteMultipartite { parts: vec![2, 2] }.generate(None).unwrap();
        let m = sum_moments(&k22, 4).unwrap();
        assert_eq!((m.values[2].clone(), m.values[4].clone()), (big(4), big(40)));
        for s in [free, comm, m] {
            s.check().unwrap();
        }
    }

    #[test]
    fn free_and_classical_sum_moments_in_closed_form() {
        // free: d^n C_n; classical: sum over compositions of the semicircle moments
        for d in 1..=3usize {
            let free = sum_moments(&Graph::empty(d).unwrap(), 10).unwrap();
            for n in 0..=5 {
                assert_eq!(free.values[2 * n], BigInt::from(d).pow(n as u32) * catalan(n));
            }
        }
        let classical = sum_moments(&Graph::complete(2).unwrap(), 10).unwrap();
        for n in 0..=5u32 {
            let k = 2 * n;
            let mut expected = BigInt::zero();
            for a in (0..=k).step_by(2) {
                let binom: BigInt = (0..a).fold(BigInt::one(), |acc, i| acc * (k - i) / (i + 1));
                expected += binom * catalan(a as usize / 2) * catalan((k - a) as usize / 2);
            }
            assert_eq!(classical.values[k as usize], expected);
        }
    }

    #[test]
    fn norm_route_agrees_with_iteration() {
        let g = Family::XyModel { d: 5 }.generate(None).unwrap();
        let engine = MomentEngine::new(&g, 5).unwrap();
        let seq = engine.sum_moments(8).unwrap();
        for n in 0..=4 {
            assert_eq!(engine.even_moment_by_norm(n).unwrap(), seq.values[2 * n]);
        }
    }

    #[test]
    fn norm_lower_examples() {
        let one = Graph::empty(1).unwrap();
        let r = moment_norm_lower(&one, 4).unwrap();
        assert!((r - 2f64.powf(0.25)).abs() < 1e-12 && r <= 2.0);
        let free = Graph::empty(2).unwrap();
        let r = moment_norm_lower(&free, 8).unwrap();
        assert!((r - 224f64.powf(0.125)).abs() < 1e-12);
        assert!((r - 1.966894).abs() < 1e-6 && r <= 2.0 * 2f64.sqrt());
        for d in 1..=4 {
            let g = Graph::complete(d).unwrap();
            assert!((moment_norm_lower(&g, 2).unwrap() - (d as f64).sqrt()).abs() < 1e-12);
        }
        assert!(moment_norm_lower(&free, 3).is_err());
    }

    #[test]
    fn bigint_promotion_is_seamless() {
        // (2d)^k outgrows i128 quickly for the classical sum
        let g = Graph::complete(3).unwrap();
        let engine = MomentEngine::new(&g, 41).unwrap();
        let seq = engine.sum_moments(80).unwrap();
        assert!(seq.values[80].bits() > 127);
        assert_eq!(engine.even_moment_by_norm(40).unwrap(), seq.values[80]);
        seq.check().unwrap();
    }

    #[test]
    fn integer_root_handles_huge_values() {
        let v = BigInt::from(3).pow(2000);
        assert!((integer_root(&v, 1000) - 9.0).abs() < 1e-9);
        assert!((integer_root(&big(16), 4) - 2.0).abs() < 1e-15);
    }
}
