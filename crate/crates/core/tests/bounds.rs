use std::f64::consts::PI;

use epsfree_core::bounds::{
    khintchine_rhs, lower_clique, report, upper_clique_eigen, upper_eigen, upper_regular, GraphData, ReportOptions,
    Variant,
};
use epsfree_core::coefficients::MatrixCoefficients;
use epsfree_core::estimator::Budget;
use epsfree_core::graph::brute_force_clique_number;
use epsfree_core::{Family, Graph};
use nalgebra::DMatrix;

fn all_graphs(d: usize) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    (0u32..1 << pairs.len()).map(move |mask| {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e).collect();
        Graph::from_edges(d, &edges).unwrap()
    })
}

fn xy(d: usize) -> Graph {
    Family::XyModel { d }.generate(None).unwrap()
}

#[test]
fn xy_spectrum_matches_cyclic_shift_formula() {
    for d in 4..=12 {
        // eigenvalues of J - I - (P + P^T) with P the cyclic shift
        let mut expected: Vec<f64> = (0..d)
            .map(|j| if j == 0 { d as f64 - 3.0 } else { -1.0 - 2.0 * (2.0 * PI * j as f64 / d as f64).cos() })
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        let got = xy(d).spectrum().unwrap().eigenvalues;
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10, "d={d}: {got:?} vs {expected:?}");
        }
    }
    let s = xy(5).spectrum().unwrap();
    assert!((s.lambda1() - 2.0).abs() < 1e-12);
    assert!((s.lambda2().unwrap() - 0.6180339887498949).abs() < 1e-10);
}

#[test]
fn xy_even_bounds() {
    for d in [6, 8, 10] {
        let g = xy(d);
        let reg = upper_regular(&g).unwrap().unwrap();
        assert!((reg - 2f64.sqrt() * d as f64).abs() < 1e-9, "d={d}: {reg}");
        let h = d.div_ceil(2) as f64;
        let lc = lower_clique(&g).unwrap();
        assert!((lc - (4.0 * h * h + d as f64 - h).sqrt()).abs() < 1e-12);
        assert!(lc > 2.0 * h);
    }
    let r = report(&xy(8), &ReportOptions::default()).unwrap();
    assert!((r.upper_regular.unwrap() - 8.0 * 2f64.sqrt()).abs() < 1e-9);
    assert!((r.lower_clique - 68f64.sqrt()).abs() < 1e-12);
    assert!(r.all_passed(), "{:?}", r.flags);
}

#[test]
fn xy_odd_regular_bound_matches_closed_form() {
    for d in [5, 7, 9, 11] {
        let c = (PI * (d as f64 - 1.0) / d as f64).cos();
        let expected = 2.0 * d as f64 * (-c / (1.0 - c)).sqrt();
        let got = upper_regular(&xy(d)).unwrap().unwrap();
        assert!((got - expected).abs() < 1e-9, "d={d}: {got} vs {expected}");
    }
}

#[test]
fn gap_identity_and_ordering_on_regular_families() {
    let mut graphs: Vec<Graph> = (4..=12).map(|d| Family::Cycle { d }.generate(None).unwrap()).collect();
    for parts in 1..=4 {
        for size in 1..=4 {
            graphs.push(Family::CompleteMultipartite { parts: vec![size; parts] }.generate(None).unwrap());
        }
    }
    graphs.extend((5..=12).map(xy));
    for g in &graphs {
        let data = GraphData::of(g).unwrap();
        if let Some(gap) = data.gap_identity() {
            assert!((gap.lhs - gap.rhs).abs() < 1e-9 && gap.lhs >= -1e-9, "{g:?}: {gap:?}");
        }
        if let Some(reg) = data.upper_regular() {
            assert!(reg <= data.upper_eigen() + 1e-9);
        }
        let r = report(g, &ReportOptions::default()).unwrap();
        assert!(r.all_passed(), "{g:?}: {:?}", r.flags);
    }
}

fn wilf_and_benchmark(g: &Graph) {
    let data = GraphData::of(g).unwrap();
    let omega = brute_force_clique_number(g);
    assert_eq!(data.clique.omega, omega);
    let d = g.d() as f64;
    let l1 = data.lambda1();
    assert!(l1 < d - 1.0 + 1e-9);
    assert!(d / (d - l1) <= omega as f64 + 1e-9, "{g:?}");
    let lhs = upper_clique_eigen(g).unwrap();
    assert!(lhs <= 2.0 * (d * omega as f64).sqrt() + 1e-9);
}

#[test]
fn wilf_and_clique_benchmark_exhaustive() {
    for d in 1..=5 {
        all_graphs(d).for_each(|g| wilf_and_benchmark(&g));
    }
    for seed in 0..200u64 {
        let d = 2 + (seed as usize % 11);
        let p = [0.2, 0.5, 0.8][seed as usize % 3];
        wilf_and_benchmark(&Family::ErdosRenyi { d, p }.generate(Some(seed)).unwrap());
    }
}

#[test]
fn global_sandwich_small_graphs() {
    let budget = Budget { max_depth: 6, max_order: 8, max_n: 1000, ..Budget::default() };
    for d in 1..=4 {
        for g in all_graphs(d) {
            let r = report(&g, &ReportOptions { numerics: Some(budget) }).unwrap();
            let lower = r.numerical_lower.as_ref().unwrap().value;
            assert!(lower <= r.min_upper() + 1e-9, "{g:?}");
            assert!(r.lower_clique <= r.min_upper() + 1e-9);
            assert!(r.all_passed(), "{g:?}: {:?}", r.flags);
        }
    }
}

#[test]
fn scalar_reduction_is_exact() {
    for g in [Graph::empty(3).unwrap(), Graph::complete(4).unwrap(), xy(7)] {
        let ones = MatrixCoefficients::scalar_ones(g.d());
        assert_eq!(khintchine_rhs(&g, &ones, Variant::Eigen).unwrap(), upper_eigen(&g).unwrap());
    }
}

#[test]
fn khintchine_rhs_closed_forms() {
    // row matrix units: sum a_i* a_i = I, sum a_i a_i* = d E_11
    let g = xy(5);
    let d = 5;
    let units = (0..d).map(|i| DMatrix::from_fn(d, d, |r, s| if r == 0 && s == i { 1.0 } else { 0.0 })).collect();
    let c = MatrixCoefficients::from_real(d, units).unwrap();
    let l1 = g.spectrum().unwrap().lambda1();
    let want = 2.0 * (l1 + 1.0).sqrt() * (d as f64).sqrt();
    assert!((khintchine_rhs(&g, &c, Variant::Eigen).unwrap() - want).abs() < 1e-12);
    // two free letters with identity coefficients
    let g = Graph::empty(2).unwrap();
    let id = DMatrix::<f64>::identity(2, 2);
    let c = MatrixCoefficients::from_real(2, vec![id.clone(), id]).unwrap();
    assert!((khintchine_rhs(&g, &c, Variant::Eigen).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
}
