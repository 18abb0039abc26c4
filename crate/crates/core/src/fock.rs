//! Truncated Fock space over traces and the sparse creation, annihilation and
//! semicircular operators acting on it.
//!
//! Truncation at depth `N` keeps the traces of length `<= N`; creation out of
//! level `N` maps to zero. The resulting semicircular matrices are exactly the
//! compressions `P_N s_i P_N`.

use std::fmt::Write as _;
use std::ops::{AddAssign, Mul, Range};

use indexmap::IndexSet;
use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::trace::{Trace, TraceMonoid, DEFAULT_BASIS_CAP};

/// Traces of length `<= depth`, ordered by length then lexicographically.
#[derive(Debug, Clone)]
pub struct FockBasis {
    depth: usize,
    states: IndexSet<Trace>,
    level_offsets: Vec<usize>,
}

impl FockBasis {
    pub fn build(g: &Graph, depth: usize) -> Result<FockBasis> {
        Self::build_with_cap(g, depth, DEFAULT_BASIS_CAP)
    }

    pub fn build_with_cap(g: &Graph, depth: usize, cap: usize) -> Result<FockBasis> {
        let levels = TraceMonoid::new(g).enumerate(depth, cap)?;
        let mut states = IndexSet::with_capacity(levels.total());
        let mut level_offsets = Vec::with_capacity(depth + 2);
        for level in levels.levels {
            level_offsets.push(states.len());
            states.extend(level);
        }
        level_offsets.push(states.len());
        Ok(FockBasis { depth, states, level_offsets })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, index: usize) -> &Trace {
        &self.states[index]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &Trace> {
        self.states.iter()
    }

    pub fn index_of(&self, t: &Trace) -> Option<usize> {
        self.states.get_index_of(t)
    }

    /// Index range of the traces of length `n`.
    pub fn level(&self, n: usize) -> Range<usize> {
        self.level_offsets[n]..self.level_offsets[n + 1]
    }

    pub fn level_offsets(&self) -> &[usize] {
        &self.level_offsets
    }

    /// Number of states of length `<= n`.
    pub fn dim_up_to(&self, n: usize) -> usize {
        self.level_offsets[n.min(self.depth) + 1]
    }
}

/// Scalars a [`SparseOperator`] can be applied to.
pub trait Scalar: Clone + Zero + AddAssign + Mul<Output = Self> {
    fn from_i64(v: i64) -> Self;
}

impl Scalar for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

/// Square integer matrix in compressed-column form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseOperator {
    dim: usize,
    col_ptr: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<i64>,
    symmetric: bool,
}

// gather-style matvec only pays off on large operators
const PARALLEL_MIN_DIM: usize = 1 << 15;

impl SparseOperator {
    /// Duplicate `(row, col)` pairs are summed; resulting zeros are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, i64)>) -> SparseOperator {
        triplets.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; dim + 1];
        let mut rows: Vec<u32> = Vec::with_capacity(triplets.len());
        let mut values: Vec<i64> = Vec::with_capacity(triplets.len());
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside a {dim}x{dim} operator");
            if cols.last() == Some(&c) && rows.last() == Some(&(r as u32)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                rows.push(r as u32);
                values.push(v);
                cols.push(c);
            }
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_values = Vec::with_capacity(rows.len());
        for ((r, v), c) in rows.into_iter().zip(values).zip(cols) {
            if v != 0 {
                keep_rows.push(r);
                keep_values.push(v);
                col_ptr[c + 1] += 1;
            }
        }
        for c in 0..dim {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut op = SparseOperator { dim, col_ptr, rows: keep_rows, values: keep_values, symmetric: false };
        op.symmetric = op.is_transpose_of(&op);
        op
    }

    pub fn zero(dim: usize) -> SparseOperator {
        SparseOperator::from_triplets(dim, Vec::new())
    }

    pub fn identity(dim: usize) -> SparseOperator {
        SparseOperator::from_triplets(dim, (0..dim).map(|k| (k, k, 1)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Nonzeros of one column as `(row, value)`, rows ascending.
    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let span = self.col_ptr[col]..self.col_ptr[col + 1];
        self.rows[span.clone()].iter().zip(&self.values[span]).map(|(&r, &v)| (r as usize, v))
    }

    /// All nonzeros as `(row, col, value)` in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (0..self.dim).flat_map(move |c| self.column(c).map(move |(r, v)| (r, c, v)))
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        let span = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.rows[span.clone()].binary_search(&(row as u32)) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0,
        }
    }

    pub fn transpose(&self) -> SparseOperator {
        SparseOperator::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v)).collect())
    }

    fn is_transpose_of(&self, other: &SparseOperator) -> bool {
        self.dim == other.dim && self.entries().all(|(r, c, v)| other.get(c, r) == v) && self.nnz() == other.nnz()
    }

    pub fn linear_combination(&self, a: i64, other: &SparseOperator, b: i64) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let triplets = self
            .entries()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.entries().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        SparseOperator::from_triplets(self.dim, triplets)
    }

    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        self.linear_combination(1, other, 1)
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::new();
        for c in 0..other.dim {
            for (k, v) in other.column(c) {
                for (r, w) in self.column(k) {
                    triplets.push((r, c, w * v));
                }
            }
        }
        SparseOperator::from_triplets(self.dim, triplets)
    }

    /// `y = A x`, scattering column by column in a fixed order.
    pub fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![T::zero(); self.dim];
        for (c, xc) in x.iter().enumerate() {
            if xc.is_zero() {
                continue;
            }
            for (r, v) in self.column(c) {
                y[r] += T::from_i64(v) * xc.clone();
            }
        }
        y
    }

    /// `y = A x` with overflow detection; `None` on overflow.
    pub fn apply_checked_i128(&self, x: &[i128]) -> Option<Vec<i128>> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0i128; self.dim];
        for (c, &xc) in x.iter().enumerate() {
            if xc == 0 {
                continue;
            }
            for (r, v) in self.column(c) {
                y[r] = y[r].checked_add((v as i128).checked_mul(xc)?)?;
            }
        }
        Some(y)
    }

    /// `y = A x` for a symmetric operator, row by row. Each output entry sums
    /// its column's nonzeros in ascending row order, so the result does not
    /// depend on the thread count.
    pub fn apply_symmetric_f64(&self, x: &[f64], y: &mut [f64]) {
        assert!(self.symmetric, "gather matvec needs a symmetric operator");
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let row = |(r, out): (usize, &mut f64)| {
            let mut acc = 0.0;
            let span = self.col_ptr[r]..self.col_ptr[r + 1];
            for (&k, &v) in self.rows[span.clone()].iter().zip(&self.values[span]) {
                acc += v as f64 * x[k as usize];
            }
            *out = acc;
        };
        if self.dim >= PARALLEL_MIN_DIM {
            y.par_iter_mut().enumerate().for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    /// Coordinate-format dump: one `row col value` line per nonzero, 0-based.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        for (r, c, v) in self.entries() {
            writeln!(s, "{r} {c} {v}").expect("writing to a String");
        }
        s
    }

    /// Largest absolute entry over the given columns.
    pub fn max_abs_in_columns(&self, cols: Range<usize>) -> i64 {
        cols.flat_map(|c| self.column(c).map(|(_, v)| v.abs())).max().unwrap_or(0)
    }
}

/// Sparsity pattern of `sum_i s_i` in row-major order, each nonzero tagged
/// with the letter it comes from. Every entry has value 1.
#[derive(Debug, Clone)]
pub struct LabeledPattern {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub letters: Vec<u8>,
}

/// Truncated Fock space together with all creation and annihilation
/// operators.
#[derive(Debug, Clone)]
pub struct FockSpace {
    basis: FockBasis,
    creation: Vec<SparseOperator>,
    annihilation: Vec<SparseOperator>,
}

impl FockSpace {
    pub fn new(g: &Graph, depth: usize) -> Result<FockSpace> {
        Self::with_basis(g, FockBasis::build(g, depth)?)
    }

    pub fn with_cap(g: &Graph, depth: usize, cap: usize) -> Result<FockSpace> {
        Self::with_basis(g, FockBasis::build_with_cap(g, depth, cap)?)
    }

    pub fn with_basis(g: &Graph, basis: FockBasis) -> Result<FockSpace> {
        let creation = (0..g.d()).map(|i| creation_operator(i, &basis, g)).collect::<Result<_>>()?;
        let annihilation = all_annihilation_operators(&basis, g);
        Ok(FockSpace { basis, creation, annihilation })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn letters(&self) -> usize {
        self.creation.len()
    }

    pub fn creation(&self, i: usize) -> &SparseOperator {
        &self.creation[i]
    }

    pub fn annihilation(&self, i: usize) -> &SparseOperator {
        &self.annihilation[i]
    }

    pub fn semicircle(&self, i: usize) -> SparseOperator {
        self.creation[i].add(&self.annihilation[i])
    }

    /// `sum_i s_i` as one operator.
    pub fn sum_of_semicircles(&self) -> SparseOperator {
        let triplets = self.creation.iter().chain(&self.annihilation).flat_map(|op| op.entries()).collect();
        SparseOperator::from_triplets(self.dim(), triplets)
    }

    /// Row-major pattern of `sum_i s_i` with per-entry letters, columns
    /// ascending within each row.
    pub fn labeled_sum(&self) -> LabeledPattern {
        let dim = self.dim();
        let mut per_row: Vec<Vec<(u32, u8)>> = vec![Vec::new(); dim];
        for (letter, op) in self.creation.iter().chain(&self.annihilation).enumerate() {
            let letter = (letter % self.letters()) as u8;
            for (r, c, v) in op.entries() {
                debug_assert_eq!(v, 1);
                per_row[r].push((c as u32, letter));
            }
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut letters = Vec::new();
        for mut row in per_row {
            row.sort_unstable();
            for (c, l) in row {
                cols.push(c);
                letters.push(l);
            }
            row_ptr.push(cols.len());
        }
        LabeledPattern { dim, row_ptr, cols, letters }
    }

    /// Residual of `l_i* l_j - eps_ij l_j l_i* - delta_ij I` on the states of
    /// length `<= depth - 1`, where truncation cannot interfere.
    pub fn commutation_residual(&self, g: &Graph, i: usize, j: usize) -> Result<i64> {
        let d = g.d();
        for letter in [i, j] {
            if letter >= d {
                return Err(Error::LetterOutOfRange { letter, d });
            }
        }
        if self.basis.depth() < 2 {
            return Err(Error::BadParams("commutation check needs depth >= 2".into()));
        }
        let eps = g.adjacent(i, j) as i64;
        let delta = (i == j) as i64;
        let lhs = self.annihilation[i].matmul(&self.creation[j]);
        let rhs = self.creation[j].matmul(&self.annihilation[i]);
        let residual =
            lhs.linear_combination(1, &rhs, -eps).linear_combination(1, &SparseOperator::identity(self.dim()), -delta);
        Ok(residual.max_abs_in_columns(0..self.basis.dim_up_to(self.basis.depth() - 1)))
    }
}

fn check_letter(i: usize, g: &Graph) -> Result<()> {
    if i < g.d() {
        Ok(())
    } else {
        Err(Error::LetterOutOfRange { letter: i, d: g.d() })
    }
}

/// `l_i e_w = e_{iw}` for `|w| < depth`; top-level states map to zero.
pub fn creation_operator(i: usize, basis: &FockBasis, g: &Graph) -> Result<SparseOperator> {
    check_letter(i, g)?;
    let monoid = TraceMonoid::new(g);
    let below_top = match basis.depth() {
        0 => 0,
        depth => basis.dim_up_to(depth - 1),
    };
    let triplets = (0..below_top)
        .map(|col| {
            let target = monoid.prepend(i, basis.state(col));
            let row = basis.index_of(&target).expect("prepending stays within the basis below the top level");
            (row, col, 1)
        })
        .collect();
    Ok(SparseOperator::from_triplets(basis.dim(), triplets))
}

/// `l_i* e_w = e_{w'}` when `w ~ i w'`, zero otherwise.
pub fn annihilation_operator(i: usize, basis: &FockBasis, g: &Graph) -> Result<SparseOperator> {
    check_letter(i, g)?;
    Ok(all_annihilation_operators(basis, g).swap_remove(i))
}

fn all_annihilation_operators(basis: &FockBasis, g: &Graph) -> Vec<SparseOperator> {
    let monoid = TraceMonoid::new(g);
    let mut triplets: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); g.d()];
    let mut rest = Vec::new();
    let mut canon = Vec::new();
    for (col, w) in basis.states().enumerate() {
        for (letter, p) in monoid.initial_positions(w.letters()) {
            rest.clear();
            rest.extend_from_slice(&w.letters()[..p]);
            rest.extend_from_slice(&w.letters()[p + 1..]);
            monoid.canonicalize_into(&rest, &mut canon);
            let row = basis
                .index_of(&Trace::from_canonical(canon.clone()))
                .expect("removing a letter stays within the basis");
            triplets[letter as usize].push((row, col, 1));
        }
    }
    triplets.into_iter().map(|t| SparseOperator::from_triplets(basis.dim(), t)).collect()
}

/// `s_i = l_i + l_i*`.
pub fn semicircle_operator(i: usize, basis: &FockBasis, g: &Graph) -> Result<SparseOperator> {
    Ok(creation_operator(i, basis, g)?.add(&annihilation_operator(i, basis, g)?))
}

pub fn check_commutation(i: usize, j: usize, basis: &FockBasis, g: &Graph) -> Result<i64> {
    FockSpace::with_basis(g, basis.clone())?.commutation_residual(g, i, j)
}
