use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Deref;

/// Lowercased word tokens of a question, in reading order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenSequence(tokens)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    /// First `len` tokens (clamped to the sequence length).
    pub fn prefix(&self, len: usize) -> TokenSequence {
        TokenSequence(self.0[..len.min(self.0.len())].to_vec())
    }

    /// Copy with the token at `index` removed.
    pub fn without(&self, index: usize) -> TokenSequence {
        let mut tokens = self.0.clone();
        tokens.remove(index);
        TokenSequence(tokens)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl From<Vec<String>> for TokenSequence {
    fn from(tokens: Vec<String>) -> Self {
        TokenSequence(tokens)
    }
}

impl From<&[&str]> for TokenSequence {
    fn from(tokens: &[&str]) -> Self {
        TokenSequence(tokens.iter().map(|t| t.to_string()).collect())
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

/// Canonical tokenizer shared by retrieval, embedding lookup and validation.
///
/// Text is lowercased and split on whitespace and on every punctuation
/// character except hyphens and apostrophes. Hyphens and apostrophes survive
/// only inside a word; leading and trailing ones are trimmed. The output is a
/// fixed point: tokenizing `tokens.join(" ")` returns the same tokens.
pub fn tokenize(text: &str) -> TokenSequence {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    for piece in lowered.split(|c: char| !(c.is_alphanumeric() || is_joiner(c))) {
        let word = piece.trim_matches(is_joiner);
        if !word.is_empty() {
            tokens.push(word.to_string());
        }
    }
    TokenSequence(tokens)
}
