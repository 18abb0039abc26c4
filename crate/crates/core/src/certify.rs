//! Invariant suite for one graph: every identity the library relies on,
//! checked exactly where possible, on a truncation small enough to run in
//! seconds.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::bounds::{khintchine_rhs_with, report, Flag, GraphData, ReportOptions, Variant, CHECK_TOLERANCE};
use crate::coefficients::MatrixCoefficients;
use crate::error::{Error, Result};
use crate::estimator::{best_lower, feasible_depth, truncated_norm_with, Budget};
use crate::fock::FockSpace;
use crate::graph::{brute_force_clique_number, Graph, VertexSet};
use crate::lanczos::{dense_extremes, LanczosOptions};
use crate::moments::{catalan, depth_for_length, MomentEngine};
use crate::tensor::khintchine_check_with;
use crate::trace::TraceMonoid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Largest Fock dimension the suite may build.
    pub max_dim: usize,
    pub max_depth: usize,
    pub max_order: usize,
    /// Largest operator solved densely for the Lanczos cross-check.
    pub dense_dim: usize,
    /// Budget of index tuples for the vanishing-moment check.
    pub max_tuples: usize,
    pub tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_dim: 20_000,
            max_depth: 8,
            max_order: 12,
            dense_dim: 1_200,
            max_tuples: 20_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub graph_id: String,
    pub d: usize,
    pub depth: usize,
    pub dim: usize,
    pub order: usize,
    pub checks: Vec<Flag>,
}

impl CertifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Flag> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Number of cliques of each size `0..=max`, counting the empty one.
fn clique_counts(g: &Graph, max: usize) -> Vec<u128> {
    fn grow(g: &Graph, size: usize, candidates: VertexSet, max: usize, counts: &mut [u128]) {
        counts[size] += 1;
        if size == max {
            return;
        }
        for v in candidates.iter() {
            let mut next = VertexSet::empty();
            for w in g.neighbors(v).iter().filter(|&w| w > v && candidates.contains(w)) {
                next.insert(w);
            }
            grow(g, size + 1, next, max, counts);
        }
    }
    let mut counts = vec![0; max + 1];
    grow(g, 0, VertexSet::full(g.d()), max, &mut counts);
    counts
}

/// All tuples over `0..d` of length `1..=len`.
fn tuples(d: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..=len).flat_map(move |n| {
        (0..d.pow(n as u32)).map(move |mut code| {
            let mut t = vec![0; n];
            for slot in t.iter_mut().rev() {
                *slot = code % d;
                code /= d;
            }
            t
        })
    })
}

pub fn certify(g: &Graph, opts: &CertifyOptions) -> Result<CertifyReport> {
    if opts.max_depth < 2 || opts.max_order < 4 {
        return Err(Error::BadParams("certify needs max_depth >= 2 and max_order >= 4".into()));
    }
    let d = g.d();
    let depth = match feasible_depth(g, opts.max_depth, opts.max_dim) {
        Ok(depth) => depth.max(2),
        Err(Error::BasisTooLarge { .. }) => 2,
        Err(e) => return Err(e),
    };
    let space = FockSpace::new(g, depth)?;
    let basis = space.basis();
    let monoid = TraceMonoid::new(g);
    let order = (opts.max_order / 2).min(depth - 1).max(2) * 2;
    let mut checks = Vec::new();

    // graph data
    let data = GraphData::of(g)?;
    let spec = &data.spectrum.eigenvalues;
    let trace_sq: f64 = spec.iter().map(|v| v * v).sum();
    let edges = g.edge_count();
    checks.push(Flag::new(
        "spectrum moments",
        spec.iter().sum::<f64>().abs() <= 1e-9 * d as f64 && (trace_sq - 2.0 * edges as f64).abs() <= 1e-9 * d as f64,
        format!("sum {:e}, sum of squares {trace_sq} vs 2|E| = {}", spec.iter().sum::<f64>(), 2 * edges),
    ));
    let clique = &data.clique;
    let mut witness_ok = clique.witness.len() == clique.omega && g.is_clique(&clique.witness);
    if d <= 16 {
        witness_ok &= brute_force_clique_number(g) == clique.omega;
    }
    checks.push(Flag::new("clique witness", witness_ok, clique.to_string()));

    // trace monoid
    let mut nf_ok = true;
    for (index, t) in basis.states().enumerate() {
        let again = monoid.normal_form(&t.to_word())?;
        nf_ok &= again == *t && basis.index_of(t) == Some(index);
    }
    checks.push(Flag::new("normal form is idempotent", nf_ok, format!("{} states up to length {depth}", basis.dim())));
    // the trace generating function is the inverse of sum_C (-t)^{|C|}
    let cliques = clique_counts(g, depth);
    let counts: Vec<i128> = (0..=depth).map(|n| basis.level(n).len() as i128).collect();
    let mut mobius_ok = counts[0] == 1;
    for n in 1..=depth {
        let s: i128 = (0..=n).map(|k| if k % 2 == 0 { 1 } else { -1 } * cliques[k] as i128 * counts[n - k]).sum();
        mobius_ok &= s == 0;
    }
    checks.push(Flag::new("trace counts match clique polynomial", mobius_ok, format!("{counts:?}")));

    // Fock operators
    let adjoint_ok = (0..d).all(|i| space.annihilation(i) == &space.creation(i).transpose());
    checks.push(Flag::new("annihilation is the adjoint of creation", adjoint_ok, String::new()));
    let mut worst = 0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max(space.commutation_residual(g, i, j)?.abs());
        }
    }
    checks.push(Flag::new("commutation relation", worst == 0, format!("max residual {worst} over {} pairs", d * d)));

    // exact moments
    let engine = MomentEngine::with_cap(g, depth_for_length(order), opts.max_dim.max(basis.dim()))?;
    let mut marginal_ok = true;
    for i in 0..d {
        for n in 1..=order / 2 {
            marginal_ok &= engine.vacuum_moment(&vec![i; 2 * n])? == catalan(n);
        }
    }
    checks.push(Flag::new("marginals are semicircular", marginal_ok, format!("up to order {order}")));
    let mut len = 0;
    while len < order && (1..=len + 1).map(|n| d.saturating_pow(n as u32)).sum::<usize>() <= opts.max_tuples {
        len += 1;
    }
    let (mut tested, mut vanish_ok) = (0usize, true);
    for t in tuples(d, len) {
        if monoid.in_reduced_index_set(&t)? {
            tested += 1;
            vanish_ok &= engine.vacuum_moment(&t)? == BigInt::from(0);
        }
    }
    checks.push(Flag::new(
        "mixed moments vanish on the reduced index set",
        vanish_ok,
        format!("{tested} tuples up to length {len}"),
    ));
    let seq = engine.sum_moments(order)?;
    let shape = seq.check();
    checks.push(Flag::new("moment sequence shape", shape.is_ok(), shape.err().unwrap_or_default()));
    let m4_expected = BigInt::from(2 * d * d + 2 * edges);
    let mut free_ok = seq.values[2] == BigInt::from(d) && seq.values[4] == m4_expected;
    for n in 1..=order / 2 {
        let free = BigInt::from(d).pow(n as u32) * catalan(n);
        free_ok &= seq.values[2 * n] >= free && (edges > 0 || seq.values[2 * n] == free);
        free_ok &= engine.even_moment_by_norm(n)? == seq.values[2 * n];
    }
    checks.push(Flag::new(
        "moments dominate the free case",
        free_ok,
        format!("m_2 = {}, m_4 = {} (expected {m4_expected})", seq.values[2], seq.values[4]),
    ));

    // spectral estimates
    let lanczos = LanczosOptions::with_tol(opts.tol);
    let mut values = Vec::new();
    for n in 1..=depth {
        values.push(truncated_norm_with(g, n, &lanczos, opts.max_dim.max(basis.dim()))?.value);
    }
    let monotone = values.windows(2).all(|w| w[1] >= w[0] - 1e-10);
    checks.push(Flag::new("truncated norms increase with depth", monotone, format!("{values:?}")));
    let dense_depth = (1..=depth).rev().find(|&n| basis.dim_up_to(n) <= opts.dense_dim);
    if let Some(n) = dense_depth {
        let sub = FockSpace::new(g, n)?;
        let (top, bottom) = dense_extremes(&sub.sum_of_semicircles())?;
        let got = values[n - 1];
        checks.push(Flag::new(
            "Lanczos matches the dense solver",
            (got - top).abs() <= 1e-8 && (top + bottom).abs() <= 1e-8,
            format!("depth {n}: {got} vs {top}, bottom {bottom}"),
        ));
    }
    let budget = Budget {
        max_depth: depth,
        max_order: order,
        max_n: 10_000,
        basis_cap: opts.max_dim.max(basis.dim()),
        tol: opts.tol,
    };
    let lower = best_lower(g, &budget)?;
    let r = report(g, &ReportOptions { numerics: Some(budget) })?;
    checks.push(Flag::new(
        "lower bounds stay below upper bounds",
        lower.value <= r.min_upper() + CHECK_TOLERANCE && values[depth - 1] <= r.min_upper() + CHECK_TOLERANCE,
        format!("{} via {} <= {}", lower.value, lower.method, r.min_upper()),
    ));
    for f in r.flags {
        checks.push(Flag::new(&format!("report: {}", f.name), f.passed, f.detail));
    }

    // scalar reduction of the operator-coefficient bound
    let ones = MatrixCoefficients::scalar_ones(d);
    let rhs = khintchine_rhs_with(&data, &ones, Variant::Eigen)?;
    let k = khintchine_check_with(&ones, g, depth, Variant::Eigen, &lanczos, opts.max_dim.max(basis.dim()))?;
    checks.push(Flag::new(
        "scalar coefficients reduce exactly",
        rhs == data.upper_eigen() && k.lhs_lower == values[depth - 1] && k.satisfied,
        format!("rhs {rhs} vs {}, lhs {} vs {}", data.upper_eigen(), k.lhs_lower, values[depth - 1]),
    ));

    Ok(CertifyReport { graph_id: g.digest(), d, depth, dim: basis.dim(), order, checks })
}
