use epsfree_core::bounds::{upper_eigen, Variant};
use epsfree_core::coefficients::MatrixCoefficients;
use epsfree_core::estimator::truncated_norm;
use epsfree_core::lanczos::LanczosOptions;
use epsfree_core::tensor::{khintchine_check, khintchine_check_with};
use epsfree_core::{Family, Graph};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_family(seed: u64) -> (MatrixCoefficients, Graph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=5);
    let k = rng.gen_range(1..=3);
    let g = Family::ErdosRenyi { d, p: 0.5 }.generate(Some(seed)).unwrap();
    let real = rng.gen_bool(0.5);
    let self_adjoint = rng.gen_bool(0.5);
    (MatrixCoefficients::random(&mut rng, d, k, real, self_adjoint), g)
}

/// Haar-ish unitary from the QR factor of a random complex matrix.
fn unitary(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(k, k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    m.qr().q()
}

#[test]
fn scalar_ones_reproduce_the_plain_norm_bit_for_bit() {
    for g in [Graph::empty(2).unwrap(), Family::CompleteMultipartite { parts: vec![2, 2] }.generate(None).unwrap()] {
        let depth = 6;
        let check = khintchine_check(&MatrixCoefficients::scalar_ones(g.d()), &g, depth, Variant::Eigen).unwrap();
        let plain = truncated_norm(&g, depth, LanczosOptions::default().tol).unwrap();
        assert_eq!(check.lhs_lower.to_bits(), plain.value.to_bits());
        assert_eq!(check.rhs.to_bits(), upper_eigen(&g).unwrap().to_bits());
        assert!(check.satisfied);
    }
}

#[test]
fn free_pair_is_nearly_tight() {
    let g = Graph::empty(2).unwrap();
    let r = khintchine_check(&MatrixCoefficients::scalar_ones(2), &g, 12, Variant::Eigen).unwrap();
    assert!((r.rhs - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    // the radial chain: 2 sqrt(2) cos(pi / 14)
    let want = 2.0 * 2f64.sqrt() * (std::f64::consts::PI / 14.0).cos();
    assert!((r.lhs_lower - want).abs() < 1e-9, "{}", r.lhs_lower);
    assert!(r.satisfied && r.margin > 0.0);
}

#[test]
fn seeded_random_families_satisfy_the_bound() {
    for seed in 0..40 {
        let (c, g) = random_family(seed);
        let r = khintchine_check(&c, &g, 6, Variant::Eigen).unwrap();
        assert!(r.satisfied, "seed {seed}: {r:?}");
        assert_eq!(r.dilated, !c.is_self_adjoint());
    }
}

#[test]
fn unitary_covariance_and_scaling() {
    let opts = LanczosOptions::with_tol(1e-12);
    let cap = 5_000_000;
    for seed in 100..106 {
        let (c, g) = random_family(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v) = (unitary(&mut rng, c.k()), unitary(&mut rng, c.k()));
        let base = khintchine_check_with(&c, &g, 5, Variant::Eigen, &opts, cap).unwrap();
        let conj = khintchine_check_with(&c.conjugated(&u, &v).unwrap(), &g, 5, Variant::Eigen, &opts, cap).unwrap();
        assert!((base.lhs_lower - conj.lhs_lower).abs() < 1e-8, "seed {seed}: {base:?} {conj:?}");
        assert!((base.rhs - conj.rhs).abs() < 1e-8);
        let t = 3.7;
        let scaled = khintchine_check_with(&c.scaled(t), &g, 5, Variant::Eigen, &opts, cap).unwrap();
        assert!((scaled.lhs_lower - t * base.lhs_lower).abs() <= 1e-10 * t * base.lhs_lower);
        assert!((scaled.rhs - t * base.rhs).abs() <= 1e-10 * t * base.rhs);
    }
}

#[test]
fn regular_variant_on_k22() {
    let g = Family::CompleteMultipartite { parts: vec![2, 2] }.generate(None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let c = MatrixCoefficients::random(&mut rng, 4, 2, false, true);
        let r = khintchine_check(&c, &g, 5, Variant::Regular).unwrap();
        assert!(r.satisfied, "{r:?}");
    }
    assert!(khintchine_check(&MatrixCoefficients::scalar_ones(3), &Graph::complete(3).unwrap(), 4, Variant::Regular)
        .is_err());
}
