use std::f64::consts::PI;

use epsfree_core::estimator::{
    best_lower, clique_vector_bound, clique_vector_limit, clique_vector_ratio, truncated_norm, Budget, Method,
};
use epsfree_core::fock::FockSpace;
use epsfree_core::lanczos::dense_extremes;
use epsfree_core::{Family, Graph, TraceMonoid};

fn k22() -> Graph {
    Family::CompleteMultipartite { parts: vec![2, 2] }.generate(None).unwrap()
}

/// `||A xi_N||^2` and `||xi_N||^2` computed on an explicit Fock space deep
/// enough that nothing is truncated.
fn clique_vector_by_fock(g: &Graph, clique: &[usize], n: usize) -> (i64, i64) {
    let k = clique.len();
    let space = FockSpace::new(g, k * n + 1).unwrap();
    let monoid = TraceMonoid::new(g);
    let mut xi = vec![0i64; space.dim()];
    let mut exps = vec![1usize; k];
    loop {
        let word: Vec<usize> = clique.iter().zip(&exps).flat_map(|(&c, &e)| std::iter::repeat_n(c, e)).collect();
        let t = monoid.normal_form(&word).unwrap();
        xi[space.basis().index_of(&t).unwrap()] += 1;
        let Some(p) = exps.iter().position(|&e| e < n) else { break };
        exps[p] += 1;
        exps[..p].iter_mut().for_each(|e| *e = 1);
    }
    let y = space.sum_of_semicircles().apply(&xi);
    (y.iter().map(|v| v * v).sum(), xi.iter().map(|v| v * v).sum())
}

#[test]
fn clique_ratio_matches_explicit_fock_vector() {
    let cases: Vec<(Graph, Vec<usize>)> = vec![
        (Graph::empty(1).unwrap(), vec![0]),
        (Graph::empty(3).unwrap(), vec![1]),
        (Graph::complete(2).unwrap(), vec![0, 1]),
        (Graph::complete(3).unwrap(), vec![0, 2]),
        (k22(), vec![0, 2]),
        (Family::XyModel { d: 6 }.generate(None).unwrap(), vec![0, 2]),
    ];
    for (g, clique) in &cases {
        for n in 2..=4 {
            let (num, den) = clique_vector_by_fock(g, clique, n);
            let (p, q) = clique_vector_ratio(g, clique, n as u64).unwrap();
            assert_eq!(num as u128 * q, den as u128 * p, "{g:?} {clique:?} N={n}");
        }
    }
    // a triangle in the complete graph on three letters
    let g = Graph::complete(3).unwrap();
    let (num, den) = clique_vector_by_fock(&g, &[0, 1, 2], 2);
    let (p, q) = clique_vector_ratio(&g, &[0, 1, 2], 2).unwrap();
    assert_eq!(num as u128 * q, den as u128 * p);
}

#[test]
fn clique_vector_converges_to_limit() {
    let g = Graph::complete(2).unwrap();
    let v = clique_vector_bound(&g, &[0, 1], 10_000).unwrap().value;
    assert!((3.99..=4.0).contains(&v), "{v}");
    let g = k22();
    let limit = clique_vector_limit(4, 2);
    assert!((limit - 18f64.sqrt()).abs() < 1e-15);
    let v100 = clique_vector_bound(&g, &[0, 2], 100).unwrap().value;
    assert!((v100 - limit).abs() / limit < 0.05);
    let v = clique_vector_bound(&g, &[0, 2], 10_000).unwrap().value;
    assert!((v - limit).abs() / limit < 0.01, "{v}");
    // approaches the limit from below as N doubles
    for (g, clique) in [(Graph::empty(5).unwrap(), vec![3]), (g, vec![0, 2])] {
        let limit = clique_vector_limit(g.d(), clique.len());
        let mut prev = 0.0;
        for n in [10u64, 20, 40, 80, 160] {
            let v = clique_vector_bound(&g, &clique, n).unwrap().value;
            assert!(v > prev && v < limit);
            prev = v;
        }
    }
}

#[test]
fn k22_truncations() {
    // reference values from an independent construction of the same operator
    let expected = [(6, 4.824552979233509), (8, 5.093280263622892), (10, 5.250686013685704)];
    let g = k22();
    let mut prev = 0.0;
    for (depth, reference) in expected {
        let e = truncated_norm(&g, depth, 1e-10).unwrap();
        assert_eq!(e.method, Method::Lanczos);
        assert!((e.value - reference).abs() < 1e-8, "depth {depth}: {}", e.value);
        assert!(e.value > prev);
        prev = e.value;
    }
    assert!((4.9..=4.0 * 2f64.sqrt()).contains(&prev));
}

#[test]
fn chain_calibration() {
    let g = Graph::empty(1).unwrap();
    for depth in [1, 3, 10, 50, 120] {
        let e = truncated_norm(&g, depth, 1e-12).unwrap();
        let exact = 2.0 * (PI / (depth as f64 + 2.0)).cos();
        assert!((e.value - exact).abs() < 1e-8, "depth {depth}");
    }
}

#[test]
fn lanczos_matches_dense_and_is_monotone() {
    let graphs = vec![
        Graph::empty(2).unwrap(),
        Graph::complete(3).unwrap(),
        k22(),
        Family::Cycle { d: 5 }.generate(None).unwrap(),
        Family::XyModel { d: 5 }.generate(None).unwrap(),
        Family::ErdosRenyi { d: 4, p: 0.5 }.generate(Some(3)).unwrap(),
    ];
    for g in &graphs {
        let mut prev = 0.0;
        for depth in 1..=8 {
            let space = match FockSpace::with_cap(g, depth, 2000) {
                Ok(s) => s,
                Err(_) => break,
            };
            let e = truncated_norm(g, depth, 1e-11).unwrap();
            let (top, bottom) = dense_extremes(&space.sum_of_semicircles()).unwrap();
            assert!((e.value - top).abs() < 1e-8, "{g:?} depth {depth}: {} vs {top}", e.value);
            assert!((top + bottom).abs() < 1e-8);
            assert!(e.value >= prev - 1e-10);
            prev = e.value;
        }
    }
}

#[test]
fn best_lower_examples() {
    let g = Graph::complete(3).unwrap();
    let e = best_lower(&g, &Budget::default()).unwrap();
    assert!(e.value >= 5.8 && e.value <= 6.0, "{e:?}");

    let g = Graph::empty(1).unwrap();
    let e = best_lower(&g, &Budget { max_depth: 300, ..Budget::default() }).unwrap();
    let chain = truncated_norm(&g, 300, 1e-12).unwrap().value;
    assert!((chain - 2.0 * (PI / 302.0).cos()).abs() < 1e-8);
    // at N = 10^4 the clique vector edges out the depth-300 chain
    assert!(e.value >= chain && e.value >= 1.99 && e.value < 2.0, "{e:?}");
}

#[test]
fn best_lower_free_four_letters_hits_the_basis_cap() {
    // The cap admits depth 10 (1 398 101 states) but not depth 11. There the
    // radial Krylov chain gives 2 sqrt(d) cos(pi / 12) = 3.8637, short of 3.9.
    let g = Graph::empty(4).unwrap();
    let e = best_lower(&g, &Budget { max_depth: 14, ..Budget::default() }).unwrap();
    assert_eq!((e.method, e.depth_or_order), (Method::Lanczos, 10));
    assert!((e.value - 4.0 * (PI / 12.0).cos()).abs() < 1e-9, "{e:?}");
    assert!(e.value < 4.0);
}
