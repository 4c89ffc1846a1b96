// Classifier file:
//   MAGIC "ADVQACLF"  version:u32  header_len:u32  header:JSON  params:f64 LE * num_params
// The header carries arch, dim, hidden, num_classes, seed, num_params and the
// answer labels in class-index order.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use super::classifier::{Arch, Classifier};
use super::NeuralError;
use crate::corpus::AnswerLabel;

const MAGIC: &[u8; 8] = b"ADVQACLF";
pub const CLASSIFIER_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    arch: Arch,
    d: usize,
    hidden: usize,
    num_classes: usize,
    seed: u64,
    num_params: usize,
    labels: Vec<String>,
}

impl Classifier {
    pub fn to_bytes(&self) -> Result<Vec<u8>, NeuralError> {
        let header = Header {
            arch: self.arch(),
            d: self.dim(),
            hidden: self.hidden(),
            num_classes: self.num_classes(),
            seed: self.seed(),
            num_params: self.params().len(),
            labels: self.labels().iter().map(|l| l.canonical_name.clone()).collect(),
        };
        let header = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(16 + header.len() + 8 * self.params().len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CLASSIFIER_FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for p in self.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NeuralError> {
        let bad = |m: &str| NeuralError::Format(m.to_string());
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("not a classifier file"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != CLASSIFIER_FORMAT_VERSION {
            return Err(NeuralError::Format(format!("unsupported classifier version {version}")));
        }
        let header_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let body = bytes.get(16..16 + header_len).ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(body)?;
        let rest = &bytes[16 + header_len..];
        if header.labels.len() != header.num_classes || rest.len() != 8 * header.num_params {
            return Err(bad("header does not match payload"));
        }
        let params = rest
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let labels = header
            .labels
            .into_iter()
            .enumerate()
            .map(|(i, name)| AnswerLabel::new(name, i))
            .collect();
        Classifier::from_parts(header.arch, header.d, header.hidden, labels, header.seed, params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NeuralError> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|e| NeuralError::io_at(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NeuralError> {
        let path = path.as_ref();
        Self::from_bytes(&fs::read(path).map_err(|e| NeuralError::io_at(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_arch() {
        let labels: Vec<AnswerLabel> = ["Aida", "Tosca", "Turandot"]
            .iter()
            .enumerate()
            .map(|(i, n)| AnswerLabel::new(*n, i))
            .collect();
        for arch in [Arch::Dan, Arch::Gru { bidirectional: false }, Arch::Gru { bidirectional: true }] {
            let clf = Classifier::init(arch, 6, 3, labels.clone(), 99).unwrap();
            let bytes = clf.to_bytes().unwrap();
            let back = Classifier::from_bytes(&bytes).unwrap();
            assert_eq!(back, clf);
            assert_eq!(back.labels(), clf.labels());
            assert!(Classifier::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(Classifier::from_bytes(b"hello world, not a model").is_err());
    }
}
