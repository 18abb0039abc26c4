use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

/// Seed used by `erdos_renyi` when none is supplied.
pub const DEFAULT_SEED: u64 = 0;

/// Named graph families.
///
/// `erdos_renyi` draws one `f64` per vertex pair `(i, j)`, `i < j`, in
/// row-major order from `ChaCha8Rng::seed_from_u64(seed)` and keeps the edge
/// when the draw is below `p`.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Empty {
        d: usize,
    },
    Complete {
        d: usize,
    },
    Cycle {
        d: usize,
    },
    CompleteMultipartite {
        parts: Vec<usize>,
    },
    /// Complement of the `d`-cycle: only cyclic neighbours are free.
    XyModel {
        d: usize,
    },
    ErdosRenyi {
        d: usize,
        p: f64,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Empty { .. } => "empty",
            Family::Complete { .. } => "complete",
            Family::Cycle { .. } => "cycle",
            Family::CompleteMultipartite { .. } => "complete_multipartite",
            Family::XyModel { .. } => "xy_model",
            Family::ErdosRenyi { .. } => "erdos_renyi",
        }
    }

    /// Parses a family name and its positional parameters, e.g.
    /// `("complete_multipartite", ["2", "2"])` or `("erdos_renyi", ["8", "0.5"])`.
    pub fn from_parts<S: AsRef<str>>(name: &str, params: &[S]) -> Result<Family> {
        let bad = |msg: String| Error::BadParams(msg);
        let ints = || -> Result<Vec<usize>> {
            params
                .iter()
                .map(|p| {
                    p.as_ref()
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| bad(format!("{name}: '{}' is not a nonnegative integer", p.as_ref())))
                })
                .collect()
        };
        let single = || -> Result<usize> {
            match ints()?.as_slice() {
                [d] => Ok(*d),
                _ => Err(bad(format!("{name} takes exactly one parameter (the vertex count)"))),
            }
        };
        match name {
            "empty" => Ok(Family::Empty { d: single()? }),
            "complete" => Ok(Family::Complete { d: single()? }),
            "cycle" => Ok(Family::Cycle { d: single()? }),
            "xy_model" => Ok(Family::XyModel { d: single()? }),
            "complete_multipartite" => Ok(Family::CompleteMultipartite { parts: ints()? }),
            "erdos_renyi" => match params {
                [d, p] => {
                    let d = d.as_ref().trim().parse().map_err(|_| bad("erdos_renyi: bad vertex count".into()))?;
                    let p = p.as_ref().trim().parse().map_err(|_| bad("erdos_renyi: bad edge probability".into()))?;
                    Ok(Family::ErdosRenyi { d, p })
                }
                _ => Err(bad("erdos_renyi takes two parameters: d p".into())),
            },
            other => Err(bad(format!("unknown family '{other}'"))),
        }
    }

    /// Deterministic in `(self, seed)`. The seed only matters for `erdos_renyi`.
    pub fn generate(&self, seed: Option<u64>) -> Result<Graph> {
        let bad = |msg: &str| Err(Error::BadParams(format!("{}: {msg}", self.name())));
        match *self {
            Family::Empty { d } => {
                if d == 0 {
                    return bad("need d >= 1");
                }
                Graph::empty(d)
            }
            Family::Complete { d } => {
                if d == 0 {
                    return bad("need d >= 1");
                }
                Graph::complete(d)
            }
            Family::Cycle { d } => {
                if d < 3 {
                    return bad("need d >= 3");
                }
                Graph::from_edges(d, &cycle_edges(d))
            }
            Family::XyModel { d } => {
                if d < 4 {
                    return bad("need d >= 4");
                }
                Ok(Graph::from_edges(d, &cycle_edges(d))?.complement())
            }
            Family::CompleteMultipartite { ref parts } => {
                if parts.is_empty() || parts.contains(&0) {
                    return bad("need at least one part, all of positive size");
                }
                let mut part_of = Vec::new();
                for (k, &size) in parts.iter().enumerate() {
                    part_of.extend(std::iter::repeat_n(k, size));
                }
                let d = part_of.len();
                let edges: Vec<_> = (0..d)
                    .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                    .filter(|&(i, j)| part_of[i] != part_of[j])
                    .collect();
                Graph::from_edges(d, &edges)
            }
            Family::ErdosRenyi { d, p } => {
                if d == 0 || !(0.0..=1.0).contains(&p) {
                    return bad("need d >= 1 and 0 <= p <= 1");
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(DEFAULT_SEED));
                let mut edges = Vec::new();
                for i in 0..d {
                    for j in i + 1..d {
                        if rng.gen::<f64>() < p {
                            edges.push((i, j));
                        }
                    }
                }
                Graph::from_edges(d, &edges)
            }
        }
    }
}

fn cycle_edges(d: usize) -> Vec<(usize, usize)> {
    (0..d).map(|i| (i.min((i + 1) % d), i.max((i + 1) % d))).collect()
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name())?;
        match self {
            Family::Empty { d } | Family::Complete { d } | Family::Cycle { d } | Family::XyModel { d } => {
                write!(f, "{d}")
            }
            Family::CompleteMultipartite { parts } => {
                let s: Vec<String> = parts.iter().map(usize::to_string).collect();
                write!(f, "{}", s.join(","))
            }
            Family::ErdosRenyi { d, p } => write!(f, "{d},{p}"),
        }
    }
}

/// `name:p1,p2,...`, e.g. `xy_model:6` or `complete_multipartite:2,2`.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let params: Vec<&str> = params.split(',').filter(|p| !p.trim().is_empty()).collect();
        Family::from_parts(name.trim(), &params)
    }
}
