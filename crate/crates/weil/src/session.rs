//! Named algebras and morphisms, persisted between invocations.
//!
//! Presets resolve without any session file. User definitions live in a JSON
//! file, `./.weil_session.json` unless `--session` says otherwise.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use weil_core::{presets, WeilAlgebra, WeilMorphism};

use crate::doc::{read_json, write_json, AlgebraDoc, MorphismDoc, FORMAT_VERSION};
use crate::{CliError, CliResult};

pub const DEFAULT_PATH: &str = ".weil_session.json";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct SessionDoc {
    format_version: u32,
    #[serde(default)]
    algebras: BTreeMap<String, AlgebraDoc>,
    #[serde(default)]
    morphisms: BTreeMap<String, MorphismDoc>,
}

#[derive(Debug, Clone)]
pub struct Session {
    path: PathBuf,
    doc: SessionDoc,
}

impl Session {
    /// Open the registry at `path`; a missing file is an empty registry.
    pub fn open(path: impl Into<PathBuf>) -> CliResult<Self> {
        let path = path.into();
        let doc = if path.exists() {
            let doc: SessionDoc = read_json(&path)?;
            if doc.format_version != FORMAT_VERSION {
                return Err(CliError::Usage(format!(
                    "{}: unsupported format_version {}",
                    path.display(),
                    doc.format_version
                )));
            }
            doc
        } else {
            SessionDoc {
                format_version: FORMAT_VERSION,
                ..SessionDoc::default()
            }
        };
        Ok(Session { path, doc })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn save(&self) -> CliResult<()> {
        write_json(&self.path, &self.doc)
    }

    fn is_taken(&self, name: &str) -> bool {
        presets::preset(name).is_some() || self.doc.algebras.contains_key(name)
    }

    /// A preset or a registered algebra.
    pub fn algebra(&self, name: &str) -> CliResult<Arc<WeilAlgebra>> {
        if let Some(w) = self.doc.algebras.get(name) {
            return w.build();
        }
        match presets::preset(name) {
            Some(w) => Ok(w?),
            None => Err(CliError::UnknownAlgebra(name.into())),
        }
    }

    pub fn algebra_names(&self) -> impl Iterator<Item = &str> {
        self.doc.algebras.keys().map(String::as_str)
    }

    /// Validate and register a presentation under `name`.
    pub fn define_algebra(&mut self, name: &str, doc: AlgebraDoc) -> CliResult<Arc<WeilAlgebra>> {
        if self.is_taken(name) {
            return Err(CliError::DuplicateName(name.into()));
        }
        let w = doc.build()?;
        self.doc.algebras.insert(name.into(), doc);
        Ok(w)
    }

    /// `id[A]`, `aug[A]`, `unit[A]` for any algebra `A`, or a registered morphism.
    pub fn morphism(&self, name: &str) -> CliResult<WeilMorphism> {
        if let Some(m) = self.doc.morphisms.get(name) {
            let (s, t) = (self.algebra(&m.source)?, self.algebra(&m.target)?);
            let images: Vec<&str> = m.images.iter().map(String::as_str).collect();
            return Ok(WeilMorphism::from_strs(&s, &t, &images)?);
        }
        let structural = name.strip_suffix(']').and_then(|s| s.split_once('['));
        match structural {
            Some(("id", a)) => Ok(WeilMorphism::identity(&self.algebra(a)?)),
            Some(("aug", a)) => Ok(WeilMorphism::augmentation(&self.algebra(a)?)),
            Some(("unit", a)) => Ok(WeilMorphism::unit(&self.algebra(a)?)),
            _ => Err(CliError::UnknownMorphism(name.into())),
        }
    }

    pub fn define_morphism(&mut self, name: &str, doc: MorphismDoc) -> CliResult<WeilMorphism> {
        if self.doc.morphisms.contains_key(name) || name.contains('[') {
            return Err(CliError::DuplicateName(name.into()));
        }
        self.doc.morphisms.insert(name.into(), doc);
        match self.morphism(name) {
            Ok(m) => Ok(m),
            Err(e) => {
                self.doc.morphisms.remove(name);
                Err(e)
            }
        }
    }

    pub fn morphism_names(&self) -> impl Iterator<Item = &str> {
        self.doc.morphisms.keys().map(String::as_str)
    }
}
