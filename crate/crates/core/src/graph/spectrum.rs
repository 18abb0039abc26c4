use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::Graph;
use crate::error::{Error, Result};

/// Relative accuracy target of the dense symmetric eigensolver.
pub const DENSE_TOLERANCE: f64 = 1e-10;

const MAX_SWEEPS: usize = 10_000;

/// Adjacency eigenvalues, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub tolerance: f64,
}

impl SpectralData {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Second largest eigenvalue; absent for a single vertex.
    pub fn lambda2(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }

    pub fn smallest(&self) -> f64 {
        *self.eigenvalues.last().expect("at least one eigenvalue")
    }
}

/// Eigenvalues of a dense real symmetric matrix, descending.
///
/// Householder tridiagonalisation followed by implicitly shifted QR sweeps.
/// Eigenvectors are not accumulated, and the sweep count is unbounded.
pub(crate) fn symmetric_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverFailure("matrix has non-finite entries".into()));
    }
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

impl Graph {
    fn adjacency_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.d, |i, j| if self.adjacent(i, j) { 1.0 } else { 0.0 })
    }

    /// Adjacency spectrum via the dense symmetric solver.
    pub fn spectrum(&self) -> Result<SpectralData> {
        let eigenvalues = symmetric_eigenvalues(self.adjacency_dense())?;
        let scale = (self.d.saturating_sub(1)).max(1) as f64;
        Ok(SpectralData { eigenvalues, tolerance: DENSE_TOLERANCE * scale })
    }

    /// Unit eigenvector of the largest adjacency eigenvalue, signed so its
    /// entries sum to a nonnegative number.
    pub fn perron_vector(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::try_new(self.adjacency_dense(), f64::EPSILON, MAX_SWEEPS)
            .ok_or_else(|| Error::SolverFailure("symmetric QR iteration did not converge".into()))?;
        let top =
            eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).expect("nonempty");
        let mut v: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn assert_spectrum(g: &Graph, expected: &[f64]) {
        let s = g.spectrum().unwrap();
        assert_eq!(s.eigenvalues.len(), expected.len());
        for (a, b) in s.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{:?} vs {:?}", s.eigenvalues, expected);
        }
    }

    #[test]
    fn complete_graph_k4() {
        assert_spectrum(&Graph::complete(4).unwrap(), &[3.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn four_cycle() {
        // characteristic polynomial of C_4 is x^4 - 4x^2 = x^2 (x-2)(x+2)
        let c4 = Family::Cycle { d: 4 }.generate(None).unwrap();
        assert_spectrum(&c4, &[2.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn xy_model_five() {
        let g = Family::XyModel { d: 5 }.generate(None).unwrap();
        let s = g.spectrum().unwrap();
        let expected = -1.0 - 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
        assert!((s.lambda1() - 2.0).abs() < 1e-10);
        assert!((s.eigenvalues[1] - expected).abs() < 1e-10);
        assert!((s.eigenvalues[2] - expected).abs() < 1e-10);
        assert!((expected - 0.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn single_vertex() {
        let s = Graph::empty(1).unwrap().spectrum().unwrap();
        assert_eq!(s.eigenvalues, vec![0.0]);
        assert_eq!(s.lambda2(), None);
    }

    #[test]
    fn perron_vector_is_positive_for_connected_graph() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(g.perron_vector().unwrap().iter().all(|&x| x > 0.0));
    }
}
