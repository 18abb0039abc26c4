//! Closed-form upper and lower bounds on `||sum_i s_i||` and on the operator
//! coefficient sums, and the consolidated per-graph report.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coefficients::MatrixCoefficients;
use crate::error::{Error, Result};
use crate::estimator::{best_lower, Budget, NormEstimate};
use crate::graph::{CliqueData, Graph, SpectralData, Structure};

/// Slack allowed in every inequality check.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Eigen,
    Regular,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Eigen => "eigen",
            Variant::Regular => "regular",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "eigen" => Ok(Variant::Eigen),
            "regular" => Ok(Variant::Regular),
            other => Err(Error::BadParams(format!("unknown variant '{other}' (expected eigen or regular)"))),
        }
    }
}

/// Spectrum, clique number and structure of one graph, computed once.
#[derive(Debug, Clone)]
pub struct GraphData {
    pub d: usize,
    pub spectrum: SpectralData,
    pub clique: CliqueData,
    pub structure: Structure,
}

impl GraphData {
    pub fn of(g: &Graph) -> Result<GraphData> {
        Ok(GraphData { d: g.d(), spectrum: g.spectrum()?, clique: g.clique_number()?, structure: g.structure() })
    }

    pub fn lambda1(&self) -> f64 {
        self.spectrum.lambda1()
    }

    /// `lambda_2`, or `lambda_1` again when `d = 1`.
    fn lambda2_or_top(&self) -> f64 {
        self.spectrum.lambda2().unwrap_or_else(|| self.lambda1())
    }

    fn omega(&self) -> f64 {
        self.clique.omega as f64
    }

    /// Connected, regular, and of degree below `d - 1`.
    pub fn regular_applies(&self) -> bool {
        self.structure.is_connected && matches!(self.structure.degree, Some(r) if r + 1 < self.d)
    }

    /// Constant multiplying the Gram factor in the Khintchine-type bound.
    pub fn khintchine_constant(&self, variant: Variant) -> Option<f64> {
        match variant {
            Variant::Eigen => Some(2.0 * (self.lambda1() + 1.0).sqrt()),
            Variant::Regular if self.regular_applies() => {
                let (l1, l2, d) = (self.lambda1(), self.lambda2_or_top(), self.d as f64);
                Some(2.0 * (d * (l2 + 1.0) / (d - (l1 - l2))).sqrt())
            }
            Variant::Regular => None,
        }
    }

    /// `2 sqrt(lambda_1 + 1) sqrt(d)`
    pub fn upper_eigen(&self) -> f64 {
        khintchine_value(self.khintchine_constant(Variant::Eigen).expect("always applies"), self.d as f64)
    }

    /// `2d sqrt((lambda_2 + 1) / (d - (lambda_1 - lambda_2)))`, when it applies.
    pub fn upper_regular(&self) -> Option<f64> {
        self.khintchine_constant(Variant::Regular).map(|c| khintchine_value(c, self.d as f64))
    }

    /// `2 sqrt(d + lambda_1 omega)`
    pub fn upper_clique_eigen(&self) -> f64 {
        2.0 * (self.d as f64 + self.lambda1() * self.omega()).sqrt()
    }

    /// `max(sqrt(4 omega^2 + d - omega), 2 sqrt(d))`
    pub fn lower_clique(&self) -> f64 {
        let w = self.omega();
        (4.0 * w * w + self.d as f64 - w).sqrt().max(self.lower_free())
    }

    /// `2 sqrt(d)`, the free value.
    pub fn lower_free(&self) -> f64 {
        2.0 * (self.d as f64).sqrt()
    }

    /// `2 sqrt(2d + 2 lambda_1 omega)`
    pub fn haar_upper(&self) -> f64 {
        2.0 * (2.0 * self.d as f64 + 2.0 * self.lambda1() * self.omega()).sqrt()
    }

    /// `2 sqrt(d omega)`, the clique-number benchmark.
    pub fn benchmark(&self) -> f64 {
        2.0 * (self.d as f64 * self.omega()).sqrt()
    }

    /// Both sides of
    /// `(l1 - l2)(d - l1 - 1) = d(l1 + 1)(1 - (l1 - l2)/d) - d(l2 + 1)`.
    pub fn gap_identity(&self) -> Option<GapIdentity> {
        let l2 = self.spectrum.lambda2()?;
        let (l1, d) = (self.lambda1(), self.d as f64);
        Some(GapIdentity {
            lhs: (l1 - l2) * (d - l1 - 1.0),
            rhs: d * (l1 + 1.0) * (1.0 - (l1 - l2) / d) - d * (l2 + 1.0),
        })
    }

    /// `d / (d - lambda_1)`, bounded above by the clique number.
    pub fn wilf_ratio(&self) -> f64 {
        self.d as f64 / (self.d as f64 - self.lambda1())
    }
}

/// `c * sqrt(gram)`. Shared by the scalar bounds and the coefficient
/// version so that the two agree bit for bit on scalar coefficients.
fn khintchine_value(constant: f64, gram_squared: f64) -> f64 {
    constant * gram_squared.sqrt()
}

pub fn upper_eigen(g: &Graph) -> Result<f64> {
    Ok(GraphData::of(g)?.upper_eigen())
}

/// `None` when the graph is not connected, not regular, or complete.
pub fn upper_regular(g: &Graph) -> Result<Option<f64>> {
    Ok(GraphData::of(g)?.upper_regular())
}

pub fn upper_clique_eigen(g: &Graph) -> Result<f64> {
    Ok(GraphData::of(g)?.upper_clique_eigen())
}

pub fn lower_clique(g: &Graph) -> Result<f64> {
    Ok(GraphData::of(g)?.lower_clique())
}

pub fn haar_unitary_upper(g: &Graph) -> Result<f64> {
    Ok(GraphData::of(g)?.haar_upper())
}

/// Right-hand side of the operator-coefficient inequality:
/// the variant constant times `max(||sum a_i* a_i||, ||sum a_i a_i*||)^{1/2}`.
pub fn khintchine_rhs(g: &Graph, c: &MatrixCoefficients, variant: Variant) -> Result<f64> {
    khintchine_rhs_with(&GraphData::of(g)?, c, variant)
}

pub fn khintchine_rhs_with(data: &GraphData, c: &MatrixCoefficients, variant: Variant) -> Result<f64> {
    if c.d() != data.d {
        return Err(Error::BadParams(format!("{} coefficient matrices for a graph on {} vertices", c.d(), data.d)));
    }
    let constant = data
        .khintchine_constant(variant)
        .ok_or(Error::NotApplicable("the regular variant needs a connected regular graph of degree below d - 1"))?;
    let gram = c.column_norm()?.max(c.row_norm()?);
    Ok(khintchine_value(constant, gram))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Flag {
    pub fn new(name: &str, passed: bool, detail: String) -> Flag {
        Flag { name: name.to_string(), passed, detail }
    }
}

/// Every closed-form bound for one graph, with optional numerics and the
/// outcome of each consistency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub graph_id: String,
    pub d: usize,
    pub edges: usize,
    pub lambda1: f64,
    pub lambda2: Option<f64>,
    pub omega: usize,
    /// 1-based clique witness.
    pub clique: Vec<usize>,
    pub is_connected: bool,
    pub is_regular: bool,
    pub degree: Option<usize>,
    pub upper_eigen: f64,
    pub upper_regular: Option<f64>,
    pub upper_clique_eigen: f64,
    pub lower_clique: f64,
    pub lower_free: f64,
    pub haar_upper: f64,
    pub benchmark: f64,
    pub gap_identity: Option<GapIdentity>,
    pub numerical_lower: Option<NormEstimate>,
    pub flags: Vec<Flag>,
}

impl BoundsReport {
    pub fn all_passed(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }

    /// Smallest applicable upper bound.
    pub fn min_upper(&self) -> f64 {
        self.upper_regular.unwrap_or(f64::INFINITY).min(self.upper_eigen).min(self.upper_clique_eigen)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReportOptions {
    /// Attach `best_lower` under this budget.
    pub numerics: Option<Budget>,
}

pub fn report(g: &Graph, opts: &ReportOptions) -> Result<BoundsReport> {
    let data = GraphData::of(g)?;
    let numerical_lower = opts.numerics.as_ref().map(|b| best_lower(g, b)).transpose()?;
    let mut r = BoundsReport {
        graph_id: g.digest(),
        d: data.d,
        edges: g.edge_count(),
        lambda1: data.lambda1(),
        lambda2: data.spectrum.lambda2(),
        omega: data.clique.omega,
        clique: data.clique.witness.iter().map(|v| v + 1).collect(),
        is_connected: data.structure.is_connected,
        is_regular: data.structure.is_regular,
        degree: data.structure.degree,
        upper_eigen: data.upper_eigen(),
        upper_regular: data.upper_regular(),
        upper_clique_eigen: data.upper_clique_eigen(),
        lower_clique: data.lower_clique(),
        lower_free: data.lower_free(),
        haar_upper: data.haar_upper(),
        benchmark: data.benchmark(),
        gap_identity: data.gap_identity(),
        numerical_lower,
        flags: Vec::new(),
    };
    r.flags = checks(&data, &r);
    Ok(r)
}

fn checks(data: &GraphData, r: &BoundsReport) -> Vec<Flag> {
    let tol = CHECK_TOLERANCE;
    let mut flags = Vec::new();
    let sum: f64 = data.spectrum.eigenvalues.iter().sum();
    let spread = data.d.saturating_sub(1) as f64 + data.spectrum.tolerance;
    flags.push(Flag::new(
        "spectrum",
        sum.abs() <= data.spectrum.tolerance * data.d as f64
            && data.spectrum.smallest() >= -spread
            && r.lambda1 <= spread,
        format!("sum {sum:e}, range [{}, {}]", data.spectrum.smallest(), r.lambda1),
    ));
    flags.push(Flag::new(
        "lower_free <= lower_clique",
        r.lower_free <= r.lower_clique,
        format!("{} <= {}", r.lower_free, r.lower_clique),
    ));
    if let Some(reg) = r.upper_regular {
        flags.push(Flag::new(
            "upper_regular <= upper_eigen",
            reg <= r.upper_eigen + tol,
            format!("{reg} <= {}", r.upper_eigen),
        ));
    }
    let lower = r.numerical_lower.as_ref().map_or(r.lower_clique, |e| e.value.max(r.lower_clique));
    flags.push(Flag::new("lower <= upper", lower <= r.min_upper() + tol, format!("{lower} <= {}", r.min_upper())));
    flags.push(Flag::new(
        "upper_clique_eigen <= benchmark",
        r.upper_clique_eigen <= r.benchmark + tol,
        format!("{} <= {}", r.upper_clique_eigen, r.benchmark),
    ));
    let wilf = data.wilf_ratio();
    flags.push(Flag::new(
        "wilf",
        wilf <= data.omega() + tol && r.lambda1 < data.d as f64 - 1.0 + data.spectrum.tolerance,
        format!("d/(d - lambda1) = {wilf} <= omega = {}", r.omega),
    ));
    if let (Some(gap), true) = (r.gap_identity, data.structure.is_connected && data.structure.is_regular) {
        flags.push(Flag::new(
            "gap identity",
            (gap.lhs - gap.rhs).abs() <= tol && gap.lhs >= -tol,
            format!("{} = {}", gap.lhs, gap.rhs),
        ));
    }
    if let Some(e) = &r.numerical_lower {
        flags.push(Flag::new(
            "numerical lower is certified",
            e.certified_lower && e.value >= 0.0,
            format!("{} via {}", e.value, e.method),
        ));
    }
    flags
}
