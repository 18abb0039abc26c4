//! Families `a_1, ..., a_d` of complex `k x k` matrices.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCoefficients {
    k: usize,
    matrices: Vec<DMatrix<Complex64>>,
}

/// On-disk form: `{"k": 2, "matrices": [[[[re, im], ...], ...], ...]}`, one
/// `k x k` row-major matrix of `[re, im]` pairs per letter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsJson {
    pub k: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl MatrixCoefficients {
    pub fn new(k: usize, matrices: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadParams("coefficient dimension k must be at least 1".into()));
        }
        if matrices.is_empty() {
            return Err(Error::BadParams("need at least one coefficient matrix".into()));
        }
        for (i, m) in matrices.iter().enumerate() {
            if m.shape() != (k, k) {
                return Err(Error::BadParams(format!(
                    "matrix {} is {}x{}, expected {k}x{k}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::BadParams(format!("matrix {} has non-finite entries", i + 1)));
            }
        }
        Ok(MatrixCoefficients { k, matrices })
    }

    pub fn from_real(k: usize, matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(k, matrices.into_iter().map(|m| m.map(|x| Complex64::new(x, 0.0))).collect())
    }

    /// `a_i = 1` for every letter, `k = 1`.
    pub fn scalar_ones(d: usize) -> Self {
        MatrixCoefficients { k: 1, matrices: vec![DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)); d] }
    }

    pub fn scalars(values: &[f64]) -> Result<Self> {
        Self::from_real(1, values.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect())
    }

    /// Seeded random family; entries uniform in `[-1, 1]` (real and imaginary
    /// parts), optionally symmetrised to `(a + a*) / 2`.
    pub fn random<R: Rng>(rng: &mut R, d: usize, k: usize, real: bool, self_adjoint: bool) -> Self {
        let mut draw = || {
            let re = rng.gen_range(-1.0..=1.0);
            let im = if real { 0.0 } else { rng.gen_range(-1.0..=1.0) };
            Complex64::new(re, im)
        };
        let matrices = (0..d)
            .map(|_| {
                let m = DMatrix::from_fn(k, k, |_, _| draw());
                if self_adjoint {
                    (&m + m.adjoint()).map(|z| z * 0.5)
                } else {
                    m
                }
            })
            .collect();
        MatrixCoefficients { k, matrices }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of letters.
    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.matrices
    }

    pub fn is_real(&self) -> bool {
        self.matrices.iter().all(|m| m.iter().all(|z| z.im == 0.0))
    }

    /// Exact check, `a_i = a_i*` entrywise.
    pub fn is_self_adjoint(&self) -> bool {
        self.matrices.iter().all(|m| *m == m.adjoint())
    }

    pub fn scaled(&self, t: f64) -> Self {
        let matrices = self.matrices.iter().map(|m| m.map(|z| z * t)).collect();
        MatrixCoefficients { k: self.k, matrices }
    }

    /// `u a_i v` for every letter.
    pub fn conjugated(&self, u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> Result<Self> {
        if u.shape() != (self.k, self.k) || v.shape() != (self.k, self.k) {
            return Err(Error::BadParams("conjugating matrices must be k x k".into()));
        }
        Self::new(self.k, self.matrices.iter().map(|a| u * a * v).collect())
    }

    /// `||sum_i a_i* a_i||`
    pub fn column_norm(&self) -> Result<f64> {
        let mut sum = DMatrix::zeros(self.k, self.k);
        for a in &self.matrices {
            sum += a.adjoint() * a;
        }
        hermitian_norm(sum)
    }

    /// `||sum_i a_i a_i*||`
    pub fn row_norm(&self) -> Result<f64> {
        let mut sum = DMatrix::zeros(self.k, self.k);
        for a in &self.matrices {
            sum += a * a.adjoint();
        }
        hermitian_norm(sum)
    }

    /// `max(||sum a_i* a_i||^{1/2}, ||sum a_i a_i*||^{1/2})`
    pub fn gram_factor(&self) -> Result<f64> {
        Ok(self.column_norm()?.max(self.row_norm()?).sqrt())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CoefficientsJson::from(self)).expect("coefficients serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CoefficientsJson = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("coefficient JSON at line {}, column {}: {e}", e.line(), e.column())))?;
        Self::try_from(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) | Error::BadParams(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Spectral norm of a Hermitian matrix.
fn hermitian_norm(m: DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() == 1 {
        return Ok(m[(0, 0)].re.abs());
    }
    let eig = nalgebra::SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::SolverFailure("Hermitian eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

impl From<&MatrixCoefficients> for CoefficientsJson {
    fn from(c: &MatrixCoefficients) -> Self {
        let matrices = c
            .matrices
            .iter()
            .map(|m| (0..c.k).map(|r| (0..c.k).map(|s| [m[(r, s)].re, m[(r, s)].im]).collect()).collect())
            .collect();
        CoefficientsJson { k: c.k, matrices }
    }
}

impl TryFrom<CoefficientsJson> for MatrixCoefficients {
    type Error = Error;

    fn try_from(raw: CoefficientsJson) -> Result<Self> {
        let k = raw.k;
        if k == 0 {
            return Err(Error::Parse("field k: must be at least 1".into()));
        }
        let mut matrices = Vec::with_capacity(raw.matrices.len());
        for (i, rows) in raw.matrices.iter().enumerate() {
            if rows.len() != k {
                return Err(Error::Parse(format!("field matrices[{i}]: has {} rows, expected {k}", rows.len())));
            }
            for (r, row) in rows.iter().enumerate() {
                if row.len() != k {
                    return Err(Error::Parse(format!(
                        "field matrices[{i}][{r}]: has {} entries, expected {k}",
                        row.len()
                    )));
                }
            }
            matrices.push(DMatrix::from_fn(k, k, |r, s| Complex64::new(rows[r][s][0], rows[r][s][1])));
        }
        if matrices.is_empty() {
            return Err(Error::Parse("field matrices: need at least one matrix".into()));
        }
        MatrixCoefficients::new(k, matrices).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gram_norms_of_simple_families() {
        let c = MatrixCoefficients::scalar_ones(5);
        assert_eq!(c.column_norm().unwrap(), 5.0);
        assert_eq!(c.gram_factor().unwrap(), 5f64.sqrt());
        // row matrix units e_{1i}: sum a_i* a_i = I, sum a_i a_i* = d E_11
        let d = 3;
        let units = (0..d).map(|i| DMatrix::from_fn(d, d, |r, s| if r == 0 && s == i { 1.0 } else { 0.0 })).collect();
        let c = MatrixCoefficients::from_real(d, units).unwrap();
        assert!((c.column_norm().unwrap() - 1.0).abs() < 1e-12);
        assert!((c.row_norm().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_self_adjoint_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = MatrixCoefficients::random(&mut rng, 3, 3, false, true);
        assert!(c.is_self_adjoint());
        assert!(!c.is_real());
        let c = MatrixCoefficients::random(&mut rng, 3, 2, true, false);
        assert!(c.is_real());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = MatrixCoefficients::random(&mut rng, 2, 2, false, false);
        assert_eq!(MatrixCoefficients::from_json(&c.to_json()).unwrap(), c);
        let e = MatrixCoefficients::from_json(r#"{"k": 2, "matrices": [[[[1,0],[0,0]]]]}"#).unwrap_err();
        assert!(e.to_string().contains("matrices[0]"), "{e}");
        let e = MatrixCoefficients::from_json(r#"{"k": 1, "matrices": [[[[1,0],[0,0]]]]}"#).unwrap_err();
        assert!(e.to_string().contains("matrices[0][0]"), "{e}");
        assert!(MatrixCoefficients::from_json(r#"{"k": 1, "matrices": []}"#).is_err());
    }
}
