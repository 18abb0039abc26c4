//! `sum_i a_i (x) s_i` on coefficient space tensored with a truncated Fock
//! space, applied matrix-free.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{khintchine_rhs_with, GraphData, Variant, CHECK_TOLERANCE};
use crate::coefficients::MatrixCoefficients;
use crate::error::{Error, Result};
use crate::fock::{FockSpace, LabeledPattern};
use crate::graph::Graph;
use crate::lanczos::{self, LanczosOptions, LinearOperator};
use crate::trace::DEFAULT_BASIS_CAP;

const PARALLEL_MIN_DIM: usize = 1 << 15;

/// Seed of the start vector used whenever the coefficient blocks are larger
/// than `1 x 1`.
pub const START_SEED: u64 = 0;

/// Matrix-free real symmetric operator `sum_i b_i (x) s_i`.
///
/// The blocks `b_i` are the coefficients themselves when they are
/// self-adjoint, and `[[0, a_i], [a_i*, 0]]` otherwise (the self-adjoint
/// dilation, whose top eigenvalue is `||sum a_i (x) s_i||`). Complex blocks
/// `A + iB` are stored in real form `[[A, -B], [B, A]]`. Vectors are blocked
/// by Fock index: entry `f * block + j`.
#[derive(Debug, Clone)]
pub struct TensorOperator {
    coeff_dim: usize,
    block: usize,
    dilated: bool,
    pattern: LabeledPattern,
    level_offsets: Vec<usize>,
    // one row-major block per letter
    blocks: Vec<Vec<f64>>,
}

fn realify(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let k = m.nrows();
    DMatrix::from_fn(2 * k, 2 * k, |r, c| {
        let z = m[(r % k, c % k)];
        match (r < k, c < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

impl TensorOperator {
    pub fn new(c: &MatrixCoefficients, g: &Graph, depth: usize) -> Result<TensorOperator> {
        Self::with_cap(c, g, depth, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(c: &MatrixCoefficients, g: &Graph, depth: usize, cap: usize) -> Result<TensorOperator> {
        if c.d() != g.d() {
            return Err(Error::BadParams(format!("{} coefficient matrices for a graph on {} vertices", c.d(), g.d())));
        }
        if depth == 0 {
            return Err(Error::BadParams("depth must be at least 1".into()));
        }
        let dilated = !c.is_self_adjoint();
        let effective: Vec<DMatrix<Complex64>> = if dilated {
            let k = c.k();
            c.matrices()
                .iter()
                .map(|a| {
                    let adj = a.adjoint();
                    DMatrix::from_fn(2 * k, 2 * k, |r, s| match (r < k, s < k) {
                        (true, false) => a[(r, s - k)],
                        (false, true) => adj[(r - k, s)],
                        _ => Complex64::new(0.0, 0.0),
                    })
                })
                .collect()
        } else {
            c.matrices().to_vec()
        };
        let real: Vec<DMatrix<f64>> = if c.is_real() {
            effective.iter().map(|m| m.map(|z| z.re)).collect()
        } else {
            effective.iter().map(realify).collect()
        };
        let block = real[0].nrows();
        let blocks = real.iter().map(|m| m.transpose().as_slice().to_vec()).collect();
        let space = FockSpace::with_cap(g, depth, cap)?;
        let level_offsets = space.basis().level_offsets().to_vec();
        let pattern = space.labeled_sum();
        Ok(TensorOperator { coeff_dim: c.k(), block, dilated, pattern, level_offsets, blocks })
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn fock_dim(&self) -> usize {
        self.pattern.dim
    }

    /// Size of the real block acting on each Fock coordinate.
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn is_dilated(&self) -> bool {
        self.dilated
    }

    /// Deterministic start vector: `e_0` for scalar real coefficients, a
    /// seeded random vector otherwise.
    ///
    /// The operator maps the support of the random vector onto a disjoint
    /// sector, so the Krylov space never has to resolve the mirrored negative
    /// half of the spectrum: for a dilation the support is the first half of
    /// coefficient space, otherwise the even Fock levels.
    pub fn start_vector(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        if self.block == 1 {
            v[0] = 1.0;
            return v;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
        let k = self.coeff_dim;
        let levels = self.level_offsets.len() - 1;
        for level in 0..levels {
            if !self.dilated && level % 2 == 1 {
                continue;
            }
            for f in self.level_offsets[level]..self.level_offsets[level + 1] {
                for j in 0..self.block {
                    // in real form, entry j holds complex coordinate j mod 2k
                    // of the dilated space, whose first half is the top
                    if !self.dilated || j % (2 * k) < k {
                        v[f * self.block + j] = rng.gen_range(-1.0..=1.0);
                    }
                }
            }
        }
        v
    }

    /// Top eigenvalue of the (dilated) operator, i.e. the truncated norm.
    pub fn norm(&self, opts: &LanczosOptions) -> Result<lanczos::Ritz> {
        lanczos::largest_eigenvalue(self, &self.start_vector(), opts)
    }
}

impl LinearOperator for TensorOperator {
    fn dim(&self) -> usize {
        self.pattern.dim * self.block
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let kb = self.block;
        let p = &self.pattern;
        let row = |(r, out): (usize, &mut [f64])| {
            let span = p.row_ptr[r]..p.row_ptr[r + 1];
            if kb == 1 {
                let mut acc = 0.0;
                for (&c, &l) in p.cols[span.clone()].iter().zip(&p.letters[span]) {
                    acc += self.blocks[l as usize][0] * x[c as usize];
                }
                out[0] = acc;
                return;
            }
            out.iter_mut().for_each(|v| *v = 0.0);
            for (&c, &l) in p.cols[span.clone()].iter().zip(&p.letters[span]) {
                let b = &self.blocks[l as usize];
                let xc = &x[c as usize * kb..(c as usize + 1) * kb];
                for (i, o) in out.iter_mut().enumerate() {
                    *o += b[i * kb..(i + 1) * kb].iter().zip(xc).map(|(a, v)| a * v).sum::<f64>();
                }
            }
        };
        if self.dim() >= PARALLEL_MIN_DIM {
            y.par_chunks_mut(kb).enumerate().for_each(row);
        } else {
            y.chunks_mut(kb).enumerate().for_each(row);
        }
    }
}

/// Outcome of comparing the truncated norm with the Khintchine-type bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KhintchineCheck {
    pub lhs_lower: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
    pub variant: Variant,
    pub depth: usize,
    pub residual: f64,
    pub dilated: bool,
}

pub fn khintchine_check(c: &MatrixCoefficients, g: &Graph, depth: usize, variant: Variant) -> Result<KhintchineCheck> {
    khintchine_check_with(c, g, depth, variant, &LanczosOptions::default(), DEFAULT_BASIS_CAP)
}

pub fn khintchine_check_with(
    c: &MatrixCoefficients,
    g: &Graph,
    depth: usize,
    variant: Variant,
    opts: &LanczosOptions,
    cap: usize,
) -> Result<KhintchineCheck> {
    let data = GraphData::of(g)?;
    let rhs = khintchine_rhs_with(&data, c, variant)?;
    let op = TensorOperator::with_cap(c, g, depth, cap)?;
    let (value, residual) = match op.norm(opts) {
        Ok(r) => (r.value, r.residual),
        Err(Error::NoConvergence { best, residual }) => (best, residual),
        Err(e) => return Err(e),
    };
    let lhs_lower = value.max(0.0);
    Ok(KhintchineCheck {
        lhs_lower,
        rhs,
        satisfied: lhs_lower <= rhs + CHECK_TOLERANCE,
        margin: rhs - lhs_lower,
        variant,
        depth,
        residual,
        dilated: op.is_dilated(),
    })
}
