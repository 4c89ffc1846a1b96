use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
    "but", "by", "can", "could", "did", "do", "for", "from", "had", "has", "have", "he", "her",
    "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "may", "more", "most", "no",
    "not", "of", "on", "one", "or", "other", "our", "out", "she", "so", "some", "such", "than",
    "that", "the", "their", "them", "then", "there", "these", "they", "this", "those", "to", "up",
    "was", "we", "were", "what", "when", "which", "while", "who", "will", "with", "would", "you",
];

/// Index-time and query-time term normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnalyzerOptions {
    pub stem: bool,
    pub remove_stopwords: bool,
}

pub struct Analyzer {
    options: AnalyzerOptions,
    stemmer: Option<Stemmer>,
}

impl Analyzer {
    pub fn new(options: AnalyzerOptions) -> Self {
        Analyzer {
            options,
            stemmer: options.stem.then(|| Stemmer::create(Algorithm::English)),
        }
    }

    /// Index term for a token, or `None` when the token is dropped.
    pub fn term(&self, token: &str) -> Option<String> {
        if self.options.remove_stopwords && STOPWORDS.binary_search(&token).is_ok() {
            return None;
        }
        Some(match &self.stemmer {
            Some(s) => s.stem(token).into_owned(),
            None => token.to_string(),
        })
    }
}
