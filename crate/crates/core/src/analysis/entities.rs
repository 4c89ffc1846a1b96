use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::corpus::{tokenize, Question};

/// Capitalization-based named-entity approximation.
///
/// A span is a maximal run of whitespace-separated words that start with an
/// uppercase letter, skipping the first word of each sentence. A word ending
/// in punctuation closes the run it belongs to. Spans index into the
/// question's tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NamedEntityApprox {
    pub spans: Vec<Range<usize>>,
}

impl NamedEntityApprox {
    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Each span's tokens joined by single spaces.
    pub fn texts(&self, q: &Question) -> Vec<String> {
        self.spans.iter().map(|s| q.tokens[s.clone()].join(" ")).collect()
    }
}

fn is_capitalized(word: &str) -> bool {
    word.chars()
        .find(|c| c.is_alphanumeric())
        .is_some_and(|c| c.is_uppercase())
}

fn ends_sentence(word: &str) -> bool {
    word.trim_end_matches(['"', '\'', ')', ']', '’', '”'])
        .ends_with(['.', '?', '!'])
}

fn ends_with_punct(word: &str) -> bool {
    word.chars().last().is_some_and(|c| !c.is_alphanumeric())
}

pub fn extract_entities_approx(q: &Question) -> NamedEntityApprox {
    let mut spans = Vec::new();
    let mut run: Option<Range<usize>> = None;
    let mut next_token = 0;
    let mut sentence_start = true;
    for word in q.raw_text.split_whitespace() {
        let n = tokenize(word).len();
        let range = next_token..next_token + n;
        next_token += n;
        if n > 0 && !sentence_start && is_capitalized(word) {
            run = Some(match run {
                Some(r) => r.start..range.end,
                None => range,
            });
        } else if let Some(r) = run.take() {
            spans.push(r);
        }
        if n > 0 && ends_with_punct(word) {
            if let Some(r) = run.take() {
                spans.push(r);
            }
        }
        if n > 0 {
            sentence_start = ends_sentence(word);
        } else if ends_sentence(word) {
            sentence_start = true;
        }
    }
    spans.extend(run);
    // defensive: token counts disagree only if tokens were supplied separately
    spans.retain(|s| s.end <= q.tokens.len());
    NamedEntityApprox { spans }
}
