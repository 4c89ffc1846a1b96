use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::NeuralError;

/// Frozen pretrained word vectors. Unknown tokens map to the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    zero: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
            zero: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<(), NeuralError> {
        if vector.len() != self.dim {
            return Err(NeuralError::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        self.vectors.insert(token.into(), vector);
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    /// Vector for `token`, or zeros when it is out of vocabulary.
    pub fn lookup(&self, token: &str) -> &[f64] {
        self.get(token).unwrap_or(&self.zero)
    }

    pub fn lookup_all<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<&[f64]> {
        tokens.iter().map(|t| self.lookup(t.as_ref())).collect()
    }

    /// Seeded table with coordinates uniform in [-1, 1]. Tokens are visited in
    /// sorted order, so the result does not depend on iteration order of the input.
    pub fn random<I, S>(tokens: I, dim: usize, seed: u64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sorted: std::collections::BTreeSet<String> = tokens.into_iter().map(Into::into).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = EmbeddingTable::new(dim);
        for token in sorted {
            let v = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            table.vectors.insert(token, v);
        }
        table
    }

    /// Parses the plain-text vector format: `token v1 … vd` per line. A leading
    /// `count dim` header line, as written by word2vec tools, is skipped.
    pub fn from_reader(reader: impl BufRead) -> Result<Self, NeuralError> {
        let mut table: Option<EmbeddingTable> = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if i == 0 && values.len() == 1 && token.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
                continue;
            }
            let vector = values
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| NeuralError::Format(format!("line {}: {e}", i + 1)))?;
            let t = table.get_or_insert_with(|| EmbeddingTable::new(vector.len()));
            if vector.is_empty() || vector.len() != t.dim {
                return Err(NeuralError::Format(format!(
                    "line {}: expected {} values, found {}",
                    i + 1,
                    t.dim,
                    vector.len()
                )));
            }
            t.vectors.insert(token.to_string(), vector);
        }
        table.ok_or_else(|| NeuralError::Format("embedding file has no vectors".into()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NeuralError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| NeuralError::io_at(path, e))?;
        Self::from_reader(BufReader::new(file))
    }

    /// Writes tokens in sorted order; values use shortest round-trip formatting.
    pub fn write(&self, writer: impl Write) -> Result<(), NeuralError> {
        let mut w = BufWriter::new(writer);
        let sorted: BTreeMap<&String, &Vec<f64>> = self.vectors.iter().collect();
        for (token, vector) in sorted {
            w.write_all(token.as_bytes())?;
            for v in vector {
                write!(w, " {v}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NeuralError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| NeuralError::io_at(path, e))?;
        self.write(file)
    }
}
