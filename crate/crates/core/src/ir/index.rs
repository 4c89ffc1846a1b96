use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

use super::analyzer::{Analyzer, AnalyzerOptions};
use super::IrError;
use crate::corpus::{AnswerLabel, Dataset, TokenSequence};
use crate::prediction::{EvidenceMap, GuessList};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexOptions {
    pub k1: f64,
    pub b: f64,
    #[serde(flatten)]
    pub analyzer: AnalyzerOptions,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            k1: 1.2,
            b: 0.75,
            analyzer: AnalyzerOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub class_index: usize,
    pub term_freq: u64,
}

/// One indexed answer document: all training questions for that answer, concatenated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocEntry {
    pub answer: AnswerLabel,
    pub len: u64,
}

/// Okapi BM25 inverted index with one document per answer.
pub struct InvertedIndex {
    pub(super) options: IndexOptions,
    pub(super) docs: Vec<DocEntry>,
    pub(super) postings: BTreeMap<String, Vec<Posting>>,
    analyzer: Analyzer,
    avg_doc_len: f64,
    idf: HashMap<String, f64>,
    slot: HashMap<usize, usize>,
    labels: Vec<AnswerLabel>,
}

impl std::fmt::Debug for InvertedIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InvertedIndex")
            .field("num_docs", &self.docs.len())
            .field("terms", &self.postings.len())
            .field("avg_doc_len", &self.avg_doc_len)
            .field("options", &self.options)
            .finish()
    }
}

/// `ln(1 + (N - df + 0.5) / (df + 0.5))`, positive for every `df <= N`.
pub fn bm25_idf(num_docs: usize, doc_freq: usize) -> f64 {
    let n = num_docs as f64;
    let df = doc_freq as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

impl InvertedIndex {
    pub fn build(train: &Dataset) -> Result<Self, IrError> {
        Self::build_with(train, IndexOptions::default())
    }

    /// Indexes the training split of `train`.
    pub fn build_with(train: &Dataset, options: IndexOptions) -> Result<Self, IrError> {
        let analyzer = Analyzer::new(options.analyzer);
        let mut per_doc: BTreeMap<usize, (AnswerLabel, BTreeMap<String, u64>)> = BTreeMap::new();
        for q in train.train_questions() {
            let (_, freqs) = per_doc
                .entry(q.answer.class_index)
                .or_insert_with(|| (q.answer.clone(), BTreeMap::new()));
            for term in q.tokens.iter().filter_map(|t| analyzer.term(t)) {
                *freqs.entry(term).or_insert(0) += 1;
            }
        }
        if per_doc.is_empty() {
            return Err(IrError::NoTrainingData);
        }
        let mut docs = Vec::with_capacity(per_doc.len());
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (class_index, (answer, freqs)) in per_doc {
            docs.push(DocEntry {
                answer,
                len: freqs.values().sum(),
            });
            for (term, term_freq) in freqs {
                postings.entry(term).or_default().push(Posting { class_index, term_freq });
            }
        }
        Ok(Self::assemble(options, docs, postings))
    }

    /// Derives the query-time tables. `docs` and every postings list must be
    /// sorted by class index.
    pub(super) fn assemble(
        options: IndexOptions,
        docs: Vec<DocEntry>,
        postings: BTreeMap<String, Vec<Posting>>,
    ) -> Self {
        let total: u64 = docs.iter().map(|d| d.len).sum();
        let avg_doc_len = total as f64 / docs.len() as f64;
        let idf = postings
            .iter()
            .map(|(t, p)| (t.clone(), bm25_idf(docs.len(), p.len())))
            .collect();
        let slot = docs.iter().enumerate().map(|(i, d)| (d.answer.class_index, i)).collect();
        let labels = docs.iter().map(|d| d.answer.clone()).collect();
        InvertedIndex {
            analyzer: Analyzer::new(options.analyzer),
            options,
            docs,
            postings,
            avg_doc_len,
            idf,
            slot,
            labels,
        }
    }

    pub fn options(&self) -> &IndexOptions {
        &self.options
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn num_terms(&self) -> usize {
        self.postings.len()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn docs(&self) -> &[DocEntry] {
        &self.docs
    }

    /// Indexed answers in class-index order.
    pub fn answers(&self) -> &[AnswerLabel] {
        &self.labels
    }

    pub fn doc_len(&self, class_index: usize) -> Option<u64> {
        self.slot.get(&class_index).map(|&i| self.docs[i].len)
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.idf.get(term).copied()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    fn term_weight(&self, idf: f64, tf: u64, doc_len: u64) -> f64 {
        let IndexOptions { k1, b, .. } = self.options;
        let tf = tf as f64;
        let norm = 1.0 - b + b * (doc_len as f64 / self.avg_doc_len);
        idf * (tf * (k1 + 1.0)) / (tf + k1 * norm)
    }

    fn term_freq(&self, term: &str, class_index: usize) -> u64 {
        let list = self.postings(term);
        list.binary_search_by_key(&class_index, |p| p.class_index)
            .map(|i| list[i].term_freq)
            .unwrap_or(0)
    }

    /// Additive BM25 contribution of each query position to the answer's score.
    fn contributions(&self, query: &TokenSequence, class_index: usize) -> Result<Vec<f64>, IrError> {
        let doc_len = self.doc_len(class_index).ok_or(IrError::UnknownAnswer(class_index))?;
        Ok(query
            .iter()
            .map(|token| {
                let Some(term) = self.analyzer.term(token) else {
                    return 0.0;
                };
                match self.term_freq(&term, class_index) {
                    0 => 0.0,
                    tf => self.term_weight(self.idf[&term], tf, doc_len),
                }
            })
            .collect())
    }

    /// BM25 score of one answer document for `query`; repeated query tokens count once each.
    pub fn score(&self, query: &TokenSequence, class_index: usize) -> Result<f64, IrError> {
        Ok(self.contributions(query, class_index)?.iter().sum())
    }

    /// Scores for every indexed answer, aligned with [`answers`](Self::answers).
    pub fn score_all(&self, query: &TokenSequence) -> Vec<f64> {
        let mut scores = vec![0.0; self.docs.len()];
        for token in query.iter() {
            let Some(term) = self.analyzer.term(token) else { continue };
            let Some(&idf) = self.idf.get(&term) else { continue };
            for p in self.postings(&term) {
                let slot = self.slot[&p.class_index];
                scores[slot] += self.term_weight(idf, p.term_freq, self.docs[slot].len);
            }
        }
        scores
    }

    pub fn guess(&self, query: &TokenSequence, k: usize) -> GuessList {
        GuessList::top_k(&self.labels, &self.score_all(query), k)
    }

    /// Per-token match evidence; the weights sum to [`score`](Self::score).
    pub fn highlight(&self, query: &TokenSequence, class_index: usize) -> Result<EvidenceMap, IrError> {
        Ok(EvidenceMap::raw(self.contributions(query, class_index)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, QuestionRecord};

    fn dataset(rows: &[(&str, &str)]) -> Dataset {
        Dataset::from_records(
            rows.iter()
                .enumerate()
                .map(|(i, (text, ans))| QuestionRecord::new(format!("q{i}"), *text, *ans))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn counts_and_lengths() {
        let idx = InvertedIndex::build(&dataset(&[("a b c d e", "A"), ("f g h i j", "B")])).unwrap();
        assert_eq!(idx.num_docs(), 2);
        assert_eq!(idx.avg_doc_len(), 5.0);

        let idx = InvertedIndex::build(&dataset(&[("a b c d", "A"), ("e f g h i j", "A"), ("x", "B")]))
            .unwrap();
        assert_eq!(idx.doc_len(0), Some(10));
        assert_eq!(idx.doc_len(1), Some(1));
    }

    #[test]
    fn shared_term_idf() {
        let idx = InvertedIndex::build(&dataset(&[("t a", "A"), ("t b", "B")])).unwrap();
        let idf = idx.idf("t").unwrap();
        assert!((idf - (1.0f64 + 0.5 / 2.5).ln()).abs() < 1e-15);
        assert!((idf - 0.1823).abs() < 1e-4);
    }

    #[test]
    fn empty_training_is_error() {
        let ds = Dataset::from_records(vec![
            QuestionRecord::new("q", "a b", "A").with_split(crate::corpus::Split::Test),
        ])
        .unwrap();
        assert!(matches!(InvertedIndex::build(&ds), Err(IrError::NoTrainingData)));
        assert!(matches!(InvertedIndex::build(&Dataset::default()), Err(IrError::NoTrainingData)));
    }

    #[test]
    fn no_match_scores_zero_and_unknown_answer_errors() {
        let idx = InvertedIndex::build(&dataset(&[("a b", "A"), ("c d", "B")])).unwrap();
        assert_eq!(idx.score(&tokenize("zzz yyy"), 0).unwrap(), 0.0);
        assert!(matches!(idx.score(&tokenize("a"), 7), Err(IrError::UnknownAnswer(7))));
        assert!(idx.highlight(&tokenize("a"), 7).is_err());
    }

    #[test]
    fn guess_tie_breaks_and_empty_query() {
        let idx = InvertedIndex::build(&dataset(&[("a b", "A"), ("a c", "B"), ("d e", "C")])).unwrap();
        let g = idx.guess(&TokenSequence::default(), 5);
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|x| x.score == 0.0));
        assert_eq!(g.iter().map(|x| x.answer.class_index).collect::<Vec<_>>(), [0, 1, 2]);
        let g = idx.guess(&tokenize("a"), 1);
        assert_eq!(g.top().unwrap().answer.canonical_name, "A");
        let g = idx.guess(&tokenize("c"), 1);
        assert_eq!(g.top().unwrap().answer.canonical_name, "B");
    }

    #[test]
    fn highlight_zero_for_absent_and_full_for_single_match() {
        let idx = InvertedIndex::build(&dataset(&[("a b", "A"), ("c d", "B")])).unwrap();
        let q = tokenize("x a y");
        let h = idx.highlight(&q, 0).unwrap();
        assert_eq!(h.weights[0], 0.0);
        assert_eq!(h.weights[2], 0.0);
        assert_eq!(h.weights[1], idx.score(&q, 0).unwrap());
    }

    #[test]
    fn stopword_flag_drops_terms() {
        let ds = dataset(&[("the opera", "A"), ("the poem", "B")]);
        let opts = IndexOptions {
            analyzer: AnalyzerOptions { stem: true, remove_stopwords: true },
            ..Default::default()
        };
        let idx = InvertedIndex::build_with(&ds, opts).unwrap();
        assert_eq!(idx.doc_len(0), Some(1));
        assert!(idx.idf("the").is_none());
        assert_eq!(idx.score(&tokenize("the"), 0).unwrap(), 0.0);
        assert!(idx.score(&tokenize("operas"), 0).unwrap() > 0.0);
    }
}
