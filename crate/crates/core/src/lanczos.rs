//! Largest eigenvalue of a real symmetric operator by Lanczos iteration with
//! partial reorthogonalisation and explicit restarts.
//!
//! All reductions use a fixed chunking, so results do not depend on the
//! number of worker threads.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::SparseOperator;

const CHUNK: usize = 1 << 14;
const PARALLEL_MIN_DIM: usize = 1 << 15;

/// Operators up to this dimension are reorthogonalised at every step; above
/// it only when the estimated loss of orthogonality exceeds
/// [`SEMI_ORTHOGONAL`].
const FULL_REORTH_MAX_DIM: usize = 1 << 12;
const SEMI_ORTHOGONAL: f64 = 1.4901161193847656e-8;

/// Upper bound on the memory spent on Krylov vectors, in bytes.
pub const KRYLOV_MEMORY_BUDGET: usize = 1 << 31;

/// A real symmetric operator available through matrix-vector products.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. Implementations must be deterministic.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        SparseOperator::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_symmetric_f64(x, y)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = (0..self.ncols()).map(|c| self[(r, c)] * x[c]).sum();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Stop once the residual `|beta_m y_m|` of the top Ritz pair is below
    /// `tol` times the Ritz value.
    pub tol: f64,
    /// Krylov dimension before a restart.
    pub krylov_cap: usize,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-10, krylov_cap: 400, max_restarts: 30 }
    }
}

impl LanczosOptions {
    pub fn with_tol(tol: f64) -> Self {
        LanczosOptions { tol, ..Default::default() }
    }
}

/// Top Ritz value together with its convergence data.
#[derive(Debug, Clone, PartialEq)]
pub struct Ritz {
    pub value: f64,
    pub residual: f64,
    /// Total number of operator applications.
    pub matvecs: usize,
    pub restarts: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial = |(x, y): (&[f64], &[f64])| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let sums: Vec<f64> = if a.len() >= PARALLEL_MIN_DIM {
        a.par_chunks(CHUNK).zip(b.par_chunks(CHUNK)).map(partial).collect()
    } else {
        a.chunks(CHUNK).zip(b.chunks(CHUNK)).map(partial).collect()
    };
    sums.into_iter().sum()
}

/// `y -= h x`
fn axpy(h: f64, x: &[f64], y: &mut [f64]) {
    if y.len() >= PARALLEL_MIN_DIM {
        y.par_iter_mut().zip(x.par_iter()).for_each(|(p, q)| *p -= h * q);
    } else {
        y.iter_mut().zip(x).for_each(|(p, q)| *p -= h * q);
    }
}

fn scale(s: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= s);
}

/// `basis^T w`, one sweep over fixed chunks so `w` stays in cache.
fn project(basis: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let m = basis.len();
    let chunk_dots = |(c, wc): (usize, &[f64])| {
        let lo = c * CHUNK;
        basis.iter().map(|v| v[lo..lo + wc.len()].iter().zip(wc).map(|(p, q)| p * q).sum::<f64>()).collect::<Vec<f64>>()
    };
    let partial: Vec<Vec<f64>> = if w.len() >= PARALLEL_MIN_DIM {
        w.par_chunks(CHUNK).enumerate().map(chunk_dots).collect()
    } else {
        w.chunks(CHUNK).enumerate().map(chunk_dots).collect()
    };
    let mut h = vec![0.0; m];
    for p in &partial {
        h.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    h
}

/// `w -= basis h`
fn subtract_combination(basis: &[Vec<f64>], h: &[f64], w: &mut [f64]) {
    let update = |(c, wc): (usize, &mut [f64])| {
        let (lo, len) = (c * CHUNK, wc.len());
        for (v, &hv) in basis.iter().zip(h) {
            wc.iter_mut().zip(&v[lo..lo + len]).for_each(|(p, q)| *p -= hv * q);
        }
    };
    if w.len() >= PARALLEL_MIN_DIM {
        w.par_chunks_mut(CHUNK).enumerate().for_each(update);
    } else {
        w.chunks_mut(CHUNK).enumerate().for_each(update);
    }
}

/// Orthogonalise `w` against an orthonormal `basis` by classical
/// Gram-Schmidt, repeated once if the first pass cancelled most of `w`.
/// Returns the norm of the result.
fn reorthogonalise(basis: &[Vec<f64>], w: &mut [f64]) -> f64 {
    let before = dot(w, w).sqrt();
    let h = project(basis, w);
    subtract_combination(basis, &h, w);
    let after = dot(w, w).sqrt();
    if after > 0.7 * before {
        return after;
    }
    let h = project(basis, w);
    subtract_combination(basis, &h, w);
    dot(w, w).sqrt()
}

/// Top eigenpair of the tridiagonal matrix with diagonal `alpha` and
/// off-diagonal `beta`.
fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::try_new(t, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::SolverFailure("tridiagonal eigensolver did not converge".into()))?;
    let (top, value) = eig.eigenvalues.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, v)| {
        if v > best.1 {
            (i, v)
        } else {
            best
        }
    });
    Ok((value, eig.eigenvectors.column(top).iter().copied().collect()))
}

/// Solve the tridiagonal problem every step while that is cheap next to
/// the reorthogonalisation, otherwise every eighth step.
fn should_check(step: usize, n: usize) -> bool {
    step <= 40 || step * step * 5 <= n * 2 || step.is_multiple_of(8)
}

/// Largest eigenvalue of `op`, starting from `start`.
///
/// The returned value is a Rayleigh quotient, hence never above the true
/// largest eigenvalue (up to rounding). When the iteration budget runs out the
/// best value found is returned inside [`Error::NoConvergence`].
pub fn largest_eigenvalue<A: LinearOperator + ?Sized>(op: &A, start: &[f64], opts: &LanczosOptions) -> Result<Ritz> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::BadParams(format!("start vector has length {}, operator has dimension {n}", start.len())));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 || opts.krylov_cap == 0 {
        return Err(Error::BadParams("Lanczos needs tol > 0 and a positive Krylov cap".into()));
    }
    let norm = dot(start, start).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::BadParams("start vector must be nonzero and finite".into()));
    }
    let memory_cap = (KRYLOV_MEMORY_BUDGET / (8 * n.max(1))).max(8);
    let cap = opts.krylov_cap.min(memory_cap).min(n);

    let local_level = f64::EPSILON * (n as f64).sqrt();
    let mut v0: Vec<f64> = start.to_vec();
    scale(1.0 / norm, &mut v0);
    let mut matvecs = 0;
    let mut best = Ritz { value: f64::NEG_INFINITY, residual: f64::INFINITY, matvecs: 0, restarts: 0 };

    for restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![v0];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        // running estimate of the operator scale, for the breakdown test
        let mut scale_est: f64 = 0.0;
        // estimated inner products of the newest two basis vectors with the
        // earlier ones
        let mut omega_prev: Vec<f64> = Vec::new();
        let mut omega: Vec<f64> = vec![1.0];
        let mut force_reorth = false;
        let (theta, y, residual) = loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            axpy(a, &basis[j], &mut w);
            if j > 0 {
                axpy(beta[j - 1], &basis[j - 1], &mut w);
            }
            let mut b = dot(&w, &w).sqrt();
            scale_est = scale_est.max(a.abs()).max(b);
            let mut next_omega = vec![0.0; j + 2];
            if b > 0.0 {
                let noise = f64::EPSILON * scale_est;
                for k in 0..j {
                    let mut t = beta[k] * omega[k + 1] + (alpha[k] - a) * omega[k] - beta[j - 1] * omega_prev[k];
                    if k > 0 {
                        t += beta[k - 1] * omega[k - 1];
                    }
                    next_omega[k] = (t + noise.copysign(t)) / b;
                }
            }
            next_omega[j] = local_level;
            next_omega[j + 1] = 1.0;
            let lost = next_omega[..j].iter().any(|o| o.abs() > SEMI_ORTHOGONAL);
            if n <= FULL_REORTH_MAX_DIM || force_reorth || lost {
                b = reorthogonalise(&basis, &mut w);
                next_omega[..=j].iter_mut().for_each(|o| *o = local_level);
                // the following vector inherits the error, so clean it too
                force_reorth = lost;
            }
            omega_prev = std::mem::replace(&mut omega, next_omega);
            let step = alpha.len();
            let breakdown = b <= 16.0 * f64::EPSILON * scale_est;
            let exhausted = breakdown || step == cap;
            if exhausted || should_check(step, n) {
                let (theta, y) = tridiagonal_top(&alpha, &beta)?;
                // an invariant subspace makes the Ritz value exact
                let residual = if breakdown { 0.0 } else { (b * y[step - 1]).abs() };
                if residual <= opts.tol * theta.abs() || exhausted {
                    break (theta, y, residual);
                }
            }
            let mut next = std::mem::replace(&mut w, vec![0.0; n]);
            scale(1.0 / b, &mut next);
            beta.push(b);
            basis.push(next);
        };
        if theta > best.value {
            best = Ritz { value: theta, residual, matvecs, restarts: restart };
        }
        if residual <= opts.tol * theta.abs() {
            return Ok(Ritz { value: theta, residual, matvecs, restarts: restart });
        }
        // restart from the top Ritz vector
        let mut x = vec![0.0; n];
        for (v, &c) in basis.iter().zip(&y) {
            axpy(-c, v, &mut x);
        }
        let nx = dot(&x, &x).sqrt();
        scale(1.0 / nx, &mut x);
        v0 = x;
    }
    Err(Error::NoConvergence { best: best.value, residual: best.residual })
}

/// Largest eigenvalue by a dense solve; for cross-checks on small operators.
pub fn dense_extremes<A: LinearOperator + ?Sized>(op: &A) -> Result<(f64, f64)> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for c in 0..n {
        e[c] = 1.0;
        op.apply(&e, &mut col);
        e[c] = 0.0;
        for r in 0..n {
            m[(r, c)] = col[r];
        }
    }
    let ev = crate::graph::spectrum::symmetric_eigenvalues(m)?;
    Ok((ev[0], ev[n - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 })
    }

    #[test]
    fn path_graph_closed_form() {
        for n in [1, 2, 5, 40] {
            let mut start = vec![0.0; n];
            start[0] = 1.0;
            let r = largest_eigenvalue(&path(n), &start, &LanczosOptions::default()).unwrap();
            let exact = 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((r.value - exact).abs() < 1e-12, "{n}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn restarts_reach_the_answer() {
        let n = 300;
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                (i as f64 * 0.37).sin()
            } else if i.abs_diff(j) <= 2 {
                0.5
            } else {
                0.0
            }
        });
        let start = vec![1.0; n];
        let opts = LanczosOptions { tol: 1e-10, krylov_cap: 25, max_restarts: 200 };
        let r = largest_eigenvalue(&m, &start, &opts).unwrap();
        let (top, _) = dense_extremes(&m).unwrap();
        assert!(r.restarts > 0);
        assert!((r.value - top).abs() < 1e-8, "{} vs {top}", r.value);
    }

    #[test]
    fn exhausted_budget_reports_best_value() {
        let n = 200;
        let m = path(n);
        let mut start = vec![0.0; n];
        start[0] = 1.0;
        let opts = LanczosOptions { tol: 1e-14, krylov_cap: 5, max_restarts: 1 };
        match largest_eigenvalue(&m, &start, &opts) {
            Err(Error::NoConvergence { best, .. }) => assert!(best > 1.0 && best <= 2.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_operator() {
        let m = DMatrix::<f64>::zeros(3, 3);
        let r = largest_eigenvalue(&m, &[1.0, 0.0, 0.0], &LanczosOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn rejects_bad_start() {
        assert!(largest_eigenvalue(&path(3), &[0.0; 3], &LanczosOptions::default()).is_err());
        assert!(largest_eigenvalue(&path(3), &[1.0; 2], &LanczosOptions::default()).is_err());
    }
}
