//! Numerical realisation of epsilon-free semicircular families on a truncated
//! trace-monoid Fock space, together with closed-form and numerical bounds on
//! the operator norm of their sum.

pub mod bounds;
pub mod certify;
pub mod coefficients;
pub mod error;
pub mod estimator;
pub mod fock;
pub mod graph;
pub mod lanczos;
pub mod moments;
pub mod tensor;
pub mod trace;

pub use error::{Error, Result};
pub use graph::{CliqueData, Family, Graph, SpectralData, Structure, VertexSet};
pub use trace::{Trace, TraceMonoid};
