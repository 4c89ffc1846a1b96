//! Model and dataset arguments.
//!
//! Models: `[id=]ir:<index>`, `[id=]neural:<model>:<vectors>`, `[id=]lookup:<jsonl>`.
//! Datasets: `[id=]<jsonl>`. Without an explicit id the file stem is used.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use advqa_core::buzzer::{IrModel, ModelFamily, NeuralModel, PrefixLookup, QAModel};
use advqa_core::corpus::{load_dataset, Dataset, DatasetFormat};
use advqa_core::ir::InvertedIndex;
use advqa_core::neural::{Classifier, EmbeddingTable};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Ir { index: PathBuf },
    Neural { model: PathBuf, vectors: PathBuf },
    Lookup { data: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub id: String,
    pub source: ModelSource,
}

fn split_id(spec: &str) -> (Option<&str>, &str) {
    match spec.split_once('=') {
        Some((id, rest)) if !id.is_empty() && !id.contains(['/', ':']) => (Some(id), rest),
        _ => (None, spec),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

impl std::str::FromStr for ModelSpec {
    type Err = CliError;

    fn from_str(spec: &str) -> Result<Self, CliError> {
        let bad = |message: &str| CliError::ModelSpec {
            spec: spec.to_string(),
            message: message.to_string(),
        };
        let (id, rest) = split_id(spec);
        let (kind, args) = rest.split_once(':').ok_or_else(|| bad("expected <kind>:<path>"))?;
        let nonempty = |s: &str| if s.is_empty() { Err(bad("empty path")) } else { Ok(PathBuf::from(s)) };
        let source = match kind {
            "ir" => ModelSource::Ir { index: nonempty(args)? },
            "neural" => {
                let (m, v) = args.split_once(':').ok_or_else(|| bad("expected neural:<model>:<vectors>"))?;
                ModelSource::Neural {
                    model: nonempty(m)?,
                    vectors: nonempty(v)?,
                }
            }
            "lookup" => ModelSource::Lookup { data: nonempty(args)? },
            other => return Err(bad(&format!("unknown model kind `{other}` (ir, neural, lookup)"))),
        };
        let default_id = match &source {
            ModelSource::Ir { index } => stem(index),
            ModelSource::Neural { model, .. } => stem(model),
            ModelSource::Lookup { data } => format!("lookup-{}", stem(data)),
        };
        Ok(ModelSpec {
            id: id.map(str::to_string).unwrap_or(default_id),
            source,
        })
    }
}

impl ModelSpec {
    pub fn load(&self) -> Result<Arc<dyn QAModel>, CliError> {
        log::info!("loading model {} from {:?}", self.id, self.source);
        Ok(match &self.source {
            ModelSource::Ir { index } => Arc::new(IrModel::new(self.id.clone(), InvertedIndex::load(index)?)),
            ModelSource::Neural { model, vectors } => {
                let clf = Classifier::load(model)?;
                let emb = EmbeddingTable::load(vectors)?;
                Arc::new(NeuralModel::new(self.id.clone(), clf, Arc::new(emb)))
            }
            ModelSource::Lookup { data } => {
                let ds = load_jsonl(data)?;
                Arc::new(PrefixLookup::from_dataset(self.id.clone(), &ds).with_family(ModelFamily::Ir))
            }
        })
    }
}

pub fn load_models(specs: &[String]) -> Result<Vec<Arc<dyn QAModel>>, CliError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for s in specs {
        let spec: ModelSpec = s.parse()?;
        if !seen.insert(spec.id.clone()) {
            return Err(CliError::ModelSpec {
                spec: s.clone(),
                message: format!("duplicate model id `{}`", spec.id),
            });
        }
        out.push(spec.load()?);
    }
    Ok(out)
}

pub fn load_jsonl(path: &Path) -> Result<Dataset, CliError> {
    Ok(load_dataset(path, DatasetFormat::JsonLines)?)
}

/// A named dataset argument.
pub fn parse_set(spec: &str) -> (String, PathBuf) {
    let (id, rest) = split_id(spec);
    let path = PathBuf::from(rest);
    (id.map(str::to_string).unwrap_or_else(|| stem(&path)), path)
}
