use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{tokenize, AnswerLabel, Category, CorpusError, PhenomenonTag, Question, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// On-disk dataset encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DatasetFormat {
    /// One JSON object per line, see [`QuestionRecord`].
    #[default]
    JsonLines,
}

/// One line of a question dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub text: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phenomena: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl QuestionRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>, answer: impl Into<String>) -> Self {
        QuestionRecord {
            id: id.into(),
            text: text.into(),
            answer: answer.into(),
            category: None,
            source: None,
            phenomena: None,
            split: None,
        }
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = Some(split);
        self
    }

    /// Record carrying every field of `q`.
    pub fn from_question(q: &Question, split: Split) -> Self {
        QuestionRecord {
            id: q.id.clone(),
            text: q.raw_text.clone(),
            answer: q.answer.canonical_name.clone(),
            category: Some(q.category.to_string()),
            source: Some(q.source.to_string()),
            phenomena: Some(q.phenomena.iter().map(|p| p.to_string()).collect()),
            split: Some(split),
        }
    }
}

/// An immutable question collection with its answer vocabulary and train/test split.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    questions: Vec<Question>,
    answer_vocab: Vec<AnswerLabel>,
    split: BTreeMap<String, Split>,
}

impl Dataset {
    /// Builds a dataset from records; `records[i]` is reported as line `i + 1` in errors.
    pub fn from_records(records: Vec<QuestionRecord>) -> Result<Self, CorpusError> {
        Self::build(records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect())
    }

    fn build(records: Vec<(usize, QuestionRecord)>) -> Result<Self, CorpusError> {
        let names: BTreeSet<&str> = records.iter().map(|(_, r)| r.answer.as_str()).collect();
        let answer_vocab: Vec<AnswerLabel> = names
            .iter()
            .enumerate()
            .map(|(i, name)| AnswerLabel::new(*name, i))
            .collect();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();

        let mut seen = HashSet::new();
        let mut questions = Vec::with_capacity(records.len());
        let mut split = BTreeMap::new();
        for (line, record) in &records {
            let line = *line;
            if !seen.insert(record.id.as_str()) {
                return Err(CorpusError::DuplicateId { line, id: record.id.clone() });
            }
            let tokens = tokenize(&record.text);
            if tokens.is_empty() {
                return Err(CorpusError::Malformed {
                    line,
                    message: format!("question `{}` has no tokens", record.id),
                });
            }
            let bad = |e: super::question::ParseEnumError| CorpusError::Malformed {
                line,
                message: e.to_string(),
            };
            let category = match &record.category {
                Some(c) => c.parse::<Category>().map_err(bad)?,
                None => Category::default(),
            };
            let source = match &record.source {
                Some(s) => s.parse::<Source>().map_err(bad)?,
                None => Source::default(),
            };
            let phenomena = record
                .phenomena
                .iter()
                .flatten()
                .map(|p| p.parse::<PhenomenonTag>())
                .collect::<Result<BTreeSet<_>, _>>()
                .map_err(bad)?;
            let class_index = index[record.answer.as_str()];
            questions.push(Question {
                id: record.id.clone(),
                raw_text: record.text.clone(),
                tokens,
                answer: answer_vocab[class_index].clone(),
                category,
                source,
                phenomena,
            });
            split.insert(record.id.clone(), record.split.unwrap_or(Split::Train));
        }
        Ok(Dataset {
            questions,
            answer_vocab,
            split,
        })
    }

    pub fn from_jsonl_reader(reader: impl BufRead) -> Result<Self, CorpusError> {
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: QuestionRecord =
                serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                    line: line_no,
                    message: e.to_string(),
                })?;
            records.push((line_no, record));
        }
        Self::build(records)
    }

    pub fn to_records(&self) -> Vec<QuestionRecord> {
        self.questions
            .iter()
            .map(|q| QuestionRecord::from_question(q, self.split_of(&q.id).unwrap_or(Split::Train)))
            .collect()
    }

    pub fn write_jsonl(&self, mut writer: impl Write) -> Result<(), CorpusError> {
        for record in self.to_records() {
            serde_json::to_writer(&mut writer, &record)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| CorpusError::io_at(path, e))?;
        self.write_jsonl(BufWriter::new(file))
    }

    pub fn questions(&self) -> &[Question] {
        &self.questions
    }

    pub fn answer_vocab(&self) -> &[AnswerLabel] {
        &self.answer_vocab
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn label(&self, canonical_name: &str) -> Option<&AnswerLabel> {
        self.answer_vocab
            .binary_search_by(|l| l.canonical_name.as_str().cmp(canonical_name))
            .ok()
            .map(|i| &self.answer_vocab[i])
    }

    pub fn split_of(&self, id: &str) -> Option<Split> {
        self.split.get(id).copied()
    }

    pub fn questions_in(&self, split: Split) -> impl Iterator<Item = &Question> {
        self.questions
            .iter()
            .filter(move |q| self.split.get(&q.id) == Some(&split))
    }

    pub fn train_questions(&self) -> impl Iterator<Item = &Question> {
        self.questions_in(Split::Train)
    }

    pub fn test_questions(&self) -> impl Iterator<Item = &Question> {
        self.questions_in(Split::Test)
    }

    /// Dataset restricted to one split. The answer vocabulary is kept whole so
    /// class indices stay comparable across the two halves.
    pub fn subset(&self, split: Split) -> Dataset {
        let questions: Vec<Question> = self.questions_in(split).cloned().collect();
        let split_map = questions.iter().map(|q| (q.id.clone(), split)).collect();
        Dataset {
            questions,
            answer_vocab: self.answer_vocab.clone(),
            split: split_map,
        }
    }

    /// Training-split questions grouped by answer name.
    pub fn train_by_answer(&self) -> BTreeMap<&str, Vec<&Question>> {
        let mut groups: BTreeMap<&str, Vec<&Question>> = BTreeMap::new();
        for q in self.train_questions() {
            groups.entry(q.answer.canonical_name.as_str()).or_default().push(q);
        }
        groups
    }
}

/// Reads a dataset from `path`.
pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    match format {
        DatasetFormat::JsonLines => {
            let file = File::open(path).map_err(|e| CorpusError::io_at(path, e))?;
            Dataset::from_jsonl_reader(BufReader::new(file))
        }
    }
}
