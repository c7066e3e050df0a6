//! JSON documents read and written by the CLI.
//!
//! ```json
//! { "format_version": 1, "generators": 2, "relations": ["x0^2", "x1^2"] }
//! ```
//!
//! Diagram documents list nodes as preset names or inline presentations and
//! edges as generator images:
//!
//! ```json
//! { "format_version": 1,
//!   "nodes": ["dual", "dual", "R"],
//!   "edges": [ { "source": 0, "target": 2, "images": ["0"] },
//!              { "source": 1, "target": 2, "images": ["0"] } ] }
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use weil_core::laws::LawReport;
use weil_core::limits::{Edge, WeilDiagram};
use weil_core::{WeilAlgebra, WeilMorphism};

use crate::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

fn check_version(v: u32, path: &str) -> CliResult<()> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{path}: unsupported format_version {v} (expected {FORMAT_VERSION})"
        )))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: name.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: name, source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = to_pretty(value);
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}

/// A presentation `Q[x0..x{n-1}]/(relations)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub format_version: u32,
    pub generators: usize,
    pub relations: Vec<String>,
}

impl AlgebraDoc {
    pub fn of(w: &WeilAlgebra) -> Self {
        AlgebraDoc {
            format_version: FORMAT_VERSION,
            generators: w.n_gens(),
            relations: w.relation_strings().to_vec(),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let doc: AlgebraDoc = read_json(path)?;
        check_version(doc.format_version, &path.display().to_string())?;
        Ok(doc)
    }

    pub fn build(&self) -> CliResult<Arc<WeilAlgebra>> {
        let rels: Vec<&str> = self.relations.iter().map(String::as_str).collect();
        Ok(WeilAlgebra::from_strs(self.generators, &rels)?)
    }
}

/// A morphism between two named algebras, given by generator images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismDoc {
    pub format_version: u32,
    pub source: String,
    pub target: String,
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeDoc {
    Name(String),
    Presentation { generators: usize, relations: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub source: usize,
    pub target: usize,
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramDoc {
    pub format_version: u32,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

impl DiagramDoc {
    pub fn load(path: &Path) -> CliResult<Self> {
        let doc: DiagramDoc = read_json(path)?;
        check_version(doc.format_version, &path.display().to_string())?;
        Ok(doc)
    }

    /// Resolve node names with `resolve` and build the diagram.
    pub fn build(&self, resolve: impl Fn(&str) -> CliResult<Arc<WeilAlgebra>>) -> CliResult<WeilDiagram> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                NodeDoc::Name(name) => resolve(name),
                NodeDoc::Presentation { generators, relations } => AlgebraDoc {
                    format_version: FORMAT_VERSION,
                    generators: *generators,
                    relations: relations.clone(),
                }
                .build(),
            })
            .collect::<CliResult<Vec<_>>>()?;
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            let (Some(s), Some(t)) = (nodes.get(e.source), nodes.get(e.target)) else {
                return Err(weil_core::Error::EdgeMismatch { edge: k }.into());
            };
            let images: Vec<&str> = e.images.iter().map(String::as_str).collect();
            edges.push(Edge {
                source: e.source,
                target: e.target,
                morphism: WeilMorphism::from_strs(s, t, &images)?,
            });
        }
        Ok(WeilDiagram::new(nodes, edges)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeEdgeDoc {
    pub source: usize,
    pub target: usize,
    pub map: Vec<String>,
}

/// An affine chart cone: charts are written as in `--chart` (`R2`, `(0,1)^2`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeDoc {
    pub format_version: u32,
    pub apex: String,
    pub nodes: Vec<String>,
    pub legs: Vec<Vec<String>>,
    #[serde(default)]
    pub edges: Vec<ConeEdgeDoc>,
}

impl ConeDoc {
    pub fn load(path: &Path) -> CliResult<Self> {
        let doc: ConeDoc = read_json(path)?;
        check_version(doc.format_version, &path.display().to_string())?;
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleDoc {
    pub inputs: Vec<(String, String)>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub law: String,
    pub statement: String,
    pub status: String,
    pub seed: u64,
    pub cases: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleDoc>,
}

impl From<&LawReport> for ReportEntry {
    fn from(r: &LawReport) -> Self {
        ReportEntry {
            law: r.law.clone(),
            statement: r.statement.clone(),
            status: r.status.as_str().into(),
            seed: r.seed,
            cases: r.cases,
            probes: r.probes.clone(),
            counterexample: r.counterexample.as_ref().map(|c| CounterexampleDoc {
                inputs: c.inputs.clone(),
                lhs: c.lhs.clone(),
                rhs: c.rhs.clone(),
            }),
        }
    }
}

/// A list of law verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub format_version: u32,
    pub passed: bool,
    pub reports: Vec<ReportEntry>,
}

impl ReportDoc {
    pub fn new<'a>(reports: impl IntoIterator<Item = &'a LawReport>) -> Self {
        let reports: Vec<ReportEntry> = reports.into_iter().map(ReportEntry::from).collect();
        ReportDoc {
            format_version: FORMAT_VERSION,
            passed: reports.iter().all(|r| r.status == "pass"),
            reports,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_doc_round_trips_relations_verbatim() {
        let text = r#"{"format_version":1,"generators":2,"relations":["x1^2","x0^2 - x1"]}"#;
        let doc: AlgebraDoc = serde_json::from_str(text).unwrap();
        let w = doc.build().unwrap();
        assert_eq!(AlgebraDoc::of(&w), doc);
        assert_eq!(serde_json::to_string(&AlgebraDoc::of(&w)).unwrap(), text);
    }

    #[test]
    fn diagram_doc_builds_the_pullback() {
        let text = r#"{"format_version":1,"nodes":["dual",{"generators":1,"relations":["x0^2"]},"R"],
            "edges":[{"source":0,"target":2,"images":["0"]},{"source":1,"target":2,"images":["0"]}]}"#;
        let doc: DiagramDoc = serde_json::from_str(text).unwrap();
        let d = doc
            .build(|n| Ok(weil_core::presets::preset(n).unwrap()?))
            .unwrap();
        assert_eq!(d, weil_core::limits::builtin_diagram("pullback-D2").unwrap());
    }

    #[test]
    fn bad_edges_are_reported() {
        let doc = DiagramDoc {
            format_version: 1,
            nodes: vec![NodeDoc::Name("dual".into())],
            edges: vec![EdgeDoc {
                source: 0,
                target: 3,
                images: vec!["0".into()],
            }],
        };
        let err = doc.build(|n| Ok(weil_core::presets::preset(n).unwrap()?)).unwrap_err();
        assert!(matches!(err, CliError::Core(weil_core::Error::EdgeMismatch { edge: 0 })));
    }
}
