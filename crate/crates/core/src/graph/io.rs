use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// On-disk graph: `{"d": <int>, "edges": [[i, j], ...]}`, 0-based, `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub d: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson { d: g.d(), edges: g.edges().into_iter().map(|(i, j)| [i, j]).collect() }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;

    fn try_from(raw: GraphJson) -> Result<Graph> {
        if raw.d == 0 {
            return Err(Error::Parse("field d: graph must have at least one vertex".into()));
        }
        // validate edge by edge so the error can point at the offending entry
        let mut seen = std::collections::HashSet::new();
        let mut accepted = Vec::with_capacity(raw.edges.len());
        for (k, &[i, j]) in raw.edges.iter().enumerate() {
            let reason = if i >= raw.d || j >= raw.d {
                Some("endpoint out of range")
            } else if i == j {
                Some("self-loop")
            } else if !seen.insert((i.min(j), i.max(j))) {
                Some("duplicate edge")
            } else {
                None
            };
            if let Some(reason) = reason {
                let e = Error::BadEdge { i, j, d: raw.d, reason };
                return Err(Error::Parse(format!("field edges[{k}]: {e}")));
            }
            accepted.push((i.min(j), i.max(j)));
        }
        Graph::from_edges(raw.d, &accepted)
    }
}

impl Graph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson::from(self)).expect("graph serialises")
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let raw: GraphJson = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("graph JSON at line {}, column {}: {e}", e.line(), e.column())))?;
        Graph::try_from(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Graph::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}
