// Index file formats.
//
// JSON:
//   {"header": {format, version, num_docs, k1, b, stem, remove_stopwords},
//    "vocabulary": [term...], "doc_lens": [{answer, len}...],
//    "postings": [[[class_index, term_freq]...] ...]}    (parallel to vocabulary)
//
// Binary (little-endian):
//   MAGIC version:u32 num_docs:u64 k1:f64 b:f64 flags:u8
//   DOCS  := (class_index:u64 name:STR len:u64) * num_docs
//   VOCAB := count:u64 (term:STR n:u64 (class_index:u64 tf:u64) * n) * count
//   STR   := byte_len:u64 utf8
//
// Derived tables (idf, average length) are recomputed on load.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::analyzer::AnalyzerOptions;
use super::index::{DocEntry, IndexOptions, InvertedIndex, Posting};
use super::IrError;
use crate::corpus::AnswerLabel;

pub const INDEX_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"ADVQAIDX";
const FORMAT_NAME: &str = "advqa-index";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexFileFormat {
    #[default]
    Json,
    Binary,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    num_docs: usize,
    k1: f64,
    b: f64,
    stem: bool,
    remove_stopwords: bool,
}

#[derive(Serialize, Deserialize)]
struct DocLen {
    class_index: usize,
    answer: String,
    len: u64,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    header: Header,
    vocabulary: Vec<String>,
    doc_lens: Vec<DocLen>,
    postings: Vec<Vec<(usize, u64)>>,
}

fn corrupt(msg: impl Into<String>) -> IrError {
    IrError::Format(msg.into())
}

impl InvertedIndex {
    pub fn to_json(&self) -> Result<String, IrError> {
        let file = IndexFile {
            header: Header {
                format: FORMAT_NAME.into(),
                version: INDEX_FORMAT_VERSION,
                num_docs: self.docs.len(),
                k1: self.options.k1,
                b: self.options.b,
                stem: self.options.analyzer.stem,
                remove_stopwords: self.options.analyzer.remove_stopwords,
            },
            vocabulary: self.postings.keys().cloned().collect(),
            doc_lens: self
                .docs
                .iter()
                .map(|d| DocLen {
                    class_index: d.answer.class_index,
                    answer: d.answer.canonical_name.clone(),
                    len: d.len,
                })
                .collect(),
            postings: self
                .postings
                .values()
                .map(|list| list.iter().map(|p| (p.class_index, p.term_freq)).collect())
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, IrError> {
        let file: IndexFile = serde_json::from_str(text)?;
        let h = file.header;
        if h.format != FORMAT_NAME || h.version != INDEX_FORMAT_VERSION {
            return Err(corrupt(format!("unsupported index {} v{}", h.format, h.version)));
        }
        if file.vocabulary.len() != file.postings.len() {
            return Err(corrupt("vocabulary and postings differ in length"));
        }
        let docs = file
            .doc_lens
            .into_iter()
            .map(|d| DocEntry {
                answer: AnswerLabel::new(d.answer, d.class_index),
                len: d.len,
            })
            .collect();
        let postings = file
            .vocabulary
            .into_iter()
            .zip(file.postings)
            .map(|(t, list)| {
                let list = list
                    .into_iter()
                    .map(|(class_index, term_freq)| Posting { class_index, term_freq })
                    .collect();
                (t, list)
            })
            .collect();
        let options = IndexOptions {
            k1: h.k1,
            b: h.b,
            analyzer: AnalyzerOptions {
                stem: h.stem,
                remove_stopwords: h.remove_stopwords,
            },
        };
        checked(options, h.num_docs, docs, postings)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&INDEX_FORMAT_VERSION.to_le_bytes());
        put_u64(&mut out, self.docs.len() as u64);
        out.extend_from_slice(&self.options.k1.to_le_bytes());
        out.extend_from_slice(&self.options.b.to_le_bytes());
        let flags = u8::from(self.options.analyzer.stem) | (u8::from(self.options.analyzer.remove_stopwords) << 1);
        out.push(flags);
        for d in &self.docs {
            put_u64(&mut out, d.answer.class_index as u64);
            put_str(&mut out, &d.answer.canonical_name);
            put_u64(&mut out, d.len);
        }
        put_u64(&mut out, self.postings.len() as u64);
        for (term, list) in &self.postings {
            put_str(&mut out, term);
            put_u64(&mut out, list.len() as u64);
            for p in list {
                put_u64(&mut out, p.class_index as u64);
                put_u64(&mut out, p.term_freq);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IrError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != INDEX_FORMAT_VERSION {
            return Err(corrupt(format!("unsupported index version {version}")));
        }
        let num_docs = r.u64()? as usize;
        let k1 = r.f64()?;
        let b = r.f64()?;
        let flags = r.take(1)?[0];
        let mut docs = Vec::new();
        for _ in 0..num_docs {
            let class_index = r.u64()? as usize;
            let name = r.string()?;
            let len = r.u64()?;
            docs.push(DocEntry {
                answer: AnswerLabel::new(name, class_index),
                len,
            });
        }
        let mut postings = BTreeMap::new();
        for _ in 0..r.u64()? {
            let term = r.string()?;
            let n = r.u64()?;
            let mut list = Vec::new();
            for _ in 0..n {
                let class_index = r.u64()? as usize;
                let term_freq = r.u64()?;
                list.push(Posting { class_index, term_freq });
            }
            postings.insert(term, list);
        }
        if r.pos != bytes.len() {
            return Err(corrupt("trailing bytes"));
        }
        let options = IndexOptions {
            k1,
            b,
            analyzer: AnalyzerOptions {
                stem: flags & 1 != 0,
                remove_stopwords: flags & 2 != 0,
            },
        };
        checked(options, num_docs, docs, postings)
    }

    pub fn save(&self, path: impl AsRef<Path>, format: IndexFileFormat) -> Result<(), IrError> {
        let path = path.as_ref();
        let bytes = match format {
            IndexFileFormat::Json => self.to_json()?.into_bytes(),
            IndexFileFormat::Binary => self.to_bytes(),
        };
        fs::write(path, bytes).map_err(|e| IrError::io_at(path, e))
    }

    /// Loads either format, detected from the leading bytes.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, IrError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| IrError::io_at(path, e))?;
        if bytes.starts_with(MAGIC) {
            Self::from_bytes(&bytes)
        } else {
            let text = std::str::from_utf8(&bytes).map_err(|_| corrupt("index is neither JSON nor binary"))?;
            Self::from_json(text)
        }
    }
}

fn checked(
    options: IndexOptions,
    num_docs: usize,
    docs: Vec<DocEntry>,
    postings: BTreeMap<String, Vec<Posting>>,
) -> Result<InvertedIndex, IrError> {
    if docs.is_empty() || docs.len() != num_docs {
        return Err(corrupt("document table does not match header"));
    }
    if !docs.windows(2).all(|w| w[0].answer.class_index < w[1].answer.class_index) {
        return Err(corrupt("documents not sorted by class index"));
    }
    let known: std::collections::HashSet<usize> = docs.iter().map(|d| d.answer.class_index).collect();
    for (term, list) in &postings {
        let sorted = list.windows(2).all(|w| w[0].class_index < w[1].class_index);
        let valid = list.iter().all(|p| p.term_freq > 0 && known.contains(&p.class_index));
        if list.is_empty() || !sorted || !valid {
            return Err(corrupt(format!("bad postings for `{term}`")));
        }
    }
    Ok(InvertedIndex::assemble(options, docs, postings))
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u64(out, s.len() as u64);
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IrError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| corrupt("truncated index"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, IrError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, IrError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, IrError> {
        let n = self.u64()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("invalid utf-8"))
    }
}
