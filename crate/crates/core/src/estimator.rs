//! Numerical lower bounds on the norm of `sum_i s_i`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockSpace};
use crate::graph::Graph;
use crate::lanczos::{self, LanczosOptions};
use crate::moments::{depth_for_length, moment_norm_lower_with_cap};
use crate::trace::DEFAULT_BASIS_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lanczos,
    MomentRoot,
    CliqueVector,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lanczos => "lanczos",
            Method::MomentRoot => "moment_root",
            Method::CliqueVector => "clique_vector",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "lanczos" => Ok(Method::Lanczos),
            "moment_root" | "moments" => Ok(Method::MomentRoot),
            "clique_vector" | "clique" => Ok(Method::CliqueVector),
            other => Err(Error::BadParams(format!("unknown method '{other}'"))),
        }
    }
}

/// A certified lower bound on `||sum_i s_i||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: Method,
    /// Truncation depth, moment order or clique exponent, depending on `method`.
    pub depth_or_order: usize,
    pub certified_lower: bool,
    /// Lanczos residual; zero for the exact methods.
    pub residual: f64,
}

impl NormEstimate {
    fn exact(value: f64, method: Method, depth_or_order: usize) -> Self {
        NormEstimate { value, method, depth_or_order, certified_lower: true, residual: 0.0 }
    }
}

/// Dimension below which `truncated_norm` double-checks the parity argument
/// with a dense solve in debug builds.
const PARITY_CHECK_MAX_DIM: usize = 400;

/// Largest eigenvalue of `sum_i s_i` compressed to traces of length
/// `<= depth`.
///
/// The operator maps even levels to odd ones and back, so its spectrum is
/// symmetric about zero and the largest eigenvalue is the norm.
pub fn truncated_norm(g: &Graph, depth: usize, tol: f64) -> Result<NormEstimate> {
    truncated_norm_with(g, depth, &LanczosOptions::with_tol(tol), DEFAULT_BASIS_CAP)
}

pub fn truncated_norm_with(g: &Graph, depth: usize, opts: &LanczosOptions, cap: usize) -> Result<NormEstimate> {
    if depth == 0 {
        return Err(Error::BadParams("depth must be at least 1".into()));
    }
    let space = FockSpace::with_cap(g, depth, cap)?;
    let op = space.sum_of_semicircles();
    drop(space);
    let mut start = vec![0.0; op.dim()];
    start[0] = 1.0;
    let ritz = lanczos::largest_eigenvalue(&op, &start, opts)?;
    if cfg!(debug_assertions) && op.dim() <= PARITY_CHECK_MAX_DIM {
        let (top, bottom) = lanczos::dense_extremes(&op)?;
        debug_assert!((top + bottom).abs() < 1e-8, "spectrum not symmetric: {top} vs {bottom}");
        debug_assert!((top - ritz.value).abs() < 1e-8, "Lanczos {} vs dense {top}", ritz.value);
    }
    Ok(NormEstimate {
        value: ritz.value.max(0.0),
        method: Method::Lanczos,
        depth_or_order: depth,
        certified_lower: true,
        residual: ritz.residual,
    })
}

/// `(m_{order})^{1/order}` as an estimate.
pub fn moment_estimate(g: &Graph, order: usize, cap: usize) -> Result<NormEstimate> {
    Ok(NormEstimate::exact(moment_norm_lower_with_cap(g, order, cap)?, Method::MomentRoot, order))
}

/// Exact `||A xi_N||^2 / ||xi_N||^2` as a reduced fraction, where
/// `A = sum_i s_i` and `xi_N` is the sum of `e_w` over the words
/// `w = c_1^{j_1} ... c_k^{j_k}` with `1 <= j_r <= N` on the clique
/// `{c_1, ..., c_k}`.
///
/// The clique letters commute, so every such word is its own class and the
/// computation splits into one chain per clique letter: for a letter of the
/// clique `||s xi||^2` picks up `(4N - 4) N^{k-1}` and two different clique
/// letters contribute the cross term `(2N - 2)^2 N^{k-2}`. Letters off the
/// clique only create, adding `N^k` each.
pub fn clique_vector_ratio(g: &Graph, clique: &[usize], n: u64) -> Result<(u128, u128)> {
    check_clique(g, clique)?;
    if n < 2 {
        return Err(Error::BadParams(format!("clique vector needs N >= 2, got {n}")));
    }
    let k = clique.len() as u128;
    let d = g.d() as u128;
    let n = n as u128;
    let overflow = || Error::BadParams("N too large for exact evaluation".into());
    // everything is divided through by N^{k-2}
    let diag = k.checked_mul(4 * n - 4).and_then(|v| v.checked_mul(n)).ok_or_else(overflow)?;
    let cross = (2 * n - 2).checked_pow(2).and_then(|v| v.checked_mul(k * (k - 1))).ok_or_else(overflow)?;
    let n2 = n.checked_mul(n).ok_or_else(overflow)?;
    let free = (d - k).checked_mul(n2).ok_or_else(overflow)?;
    let num = diag.checked_add(cross).and_then(|v| v.checked_add(free)).ok_or_else(overflow)?;
    let g = gcd(num, n2);
    Ok((num / g, n2 / g))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_clique(g: &Graph, clique: &[usize]) -> Result<()> {
    if clique.is_empty() {
        return Err(Error::BadParams("clique must be nonempty".into()));
    }
    for (p, &a) in clique.iter().enumerate() {
        if a >= g.d() {
            return Err(Error::LetterOutOfRange { letter: a, d: g.d() });
        }
        for &b in &clique[..p] {
            if !g.adjacent(a, b) {
                return Err(Error::NotAClique { a: b, b: a });
            }
        }
    }
    Ok(())
}

/// Lower bound `||A xi_N|| / ||xi_N||` from the clique test vector.
pub fn clique_vector_bound(g: &Graph, clique: &[usize], n: u64) -> Result<NormEstimate> {
    let (num, den) = clique_vector_ratio(g, clique, n)?;
    let value = (num as f64 / den as f64).sqrt();
    Ok(NormEstimate::exact(value, Method::CliqueVector, n as usize))
}

/// Limit of [`clique_vector_bound`] as `N` grows: `sqrt(4k^2 + d - k)`.
pub fn clique_vector_limit(d: usize, k: usize) -> f64 {
    ((4 * k * k + d - k) as f64).sqrt()
}

/// Resource limits for [`best_lower`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_depth: usize,
    pub max_order: usize,
    pub max_n: u64,
    /// Cap on the number of Fock states any one method may build.
    pub basis_cap: usize,
    pub tol: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_depth: 10, max_order: 16, max_n: 10_000, basis_cap: DEFAULT_BASIS_CAP, tol: 1e-10 }
    }
}

/// Deepest truncation `<= max_depth` whose basis fits under `cap`.
pub fn feasible_depth(g: &Graph, max_depth: usize, cap: usize) -> Result<usize> {
    match FockBasis::build_with_cap(g, max_depth, cap) {
        Ok(_) => Ok(max_depth),
        Err(Error::BasisTooLarge { length, .. }) if length >= 2 => Ok(length - 1),
        Err(e) => Err(e),
    }
}

/// The best of the three lower bounds that fits in `budget`, shrinking depth
/// and order to fit the basis cap when necessary.
pub fn best_lower(g: &Graph, budget: &Budget) -> Result<NormEstimate> {
    if budget.max_depth == 0 || budget.max_order < 2 || budget.max_n < 2 {
        return Err(Error::BadParams("budget needs max_depth >= 1, max_order >= 2 and max_N >= 2".into()));
    }
    let depth = feasible_depth(g, budget.max_depth, budget.basis_cap)?;
    let opts = LanczosOptions::with_tol(budget.tol);
    let lanczos = match truncated_norm_with(g, depth, &opts, budget.basis_cap) {
        Ok(e) => e,
        // the best Ritz value is still a Rayleigh quotient
        Err(Error::NoConvergence { best, residual }) => NormEstimate {
            value: best.max(0.0),
            method: Method::Lanczos,
            depth_or_order: depth,
            certified_lower: true,
            residual,
        },
        Err(e) => return Err(e),
    };
    let order_depth = feasible_depth(g, depth_for_length(budget.max_order), budget.basis_cap)?;
    let order = (budget.max_order / 2).min(order_depth - 1).max(1) * 2;
    let moments = moment_estimate(g, order, budget.basis_cap)?;
    let witness = g.clique_number()?.witness;
    let clique = clique_vector_bound(g, &witness, budget.max_n)?;
    let mut best = lanczos;
    for e in [moments, clique] {
        if e.value > best.value {
            best = e;
        }
    }
    Ok(best)
}
