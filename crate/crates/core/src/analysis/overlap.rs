use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use super::entities::extract_entities_approx;
use super::AnalysisError;
use crate::corpus::{Dataset, Question};

fn same_answer<'a>(q: &Question, train: &'a Dataset) -> impl Iterator<Item = &'a Question> {
    let name = q.answer.canonical_name.clone();
    train.train_questions().filter(move |t| t.answer.canonical_name == name)
}

fn ngrams(tokens: &[String], n: usize) -> BTreeSet<&[String]> {
    tokens.windows(n).collect()
}

/// Share of the distinct `n`-grams of `q` that occur in some training
/// question with the same answer.
pub fn ngram_overlap(q: &Question, train: &Dataset, n: usize) -> Result<f64, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::ZeroOrder);
    }
    if q.tokens.len() < n {
        return Err(AnalysisError::TooFewTokens {
            id: q.id.clone(),
            len: q.tokens.len(),
            n,
        });
    }
    let mine = ngrams(&q.tokens, n);
    let mut seen = BTreeSet::new();
    for t in same_answer(q, train) {
        seen.extend(ngrams(&t.tokens, n).intersection(&mine).copied());
    }
    Ok(seen.len() as f64 / mine.len() as f64)
}

/// Longest common contiguous token span of `a` and `b`.
fn longest_common_run(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            if x == y {
                cur[j + 1] = prev[j] + 1;
                best = best.max(cur[j + 1]);
            }
        }
        prev = cur;
    }
    best
}

/// Length of the longest token span of `q` found verbatim in a same-answer
/// training question.
pub fn longest_ngram_overlap(q: &Question, train: &Dataset) -> usize {
    same_answer(q, train)
        .map(|t| longest_common_run(&q.tokens, &t.tokens))
        .max()
        .unwrap_or(0)
}

/// Share of the distinct approximate entities of `q` that are also entities
/// of a same-answer training question, or `None` when `q` has no entities.
pub fn ne_overlap(q: &Question, train: &Dataset) -> Option<f64> {
    let mine: BTreeSet<String> = extract_entities_approx(q).texts(q).into_iter().collect();
    if mine.is_empty() {
        return None;
    }
    let theirs: BTreeSet<String> = same_answer(q, train)
        .flat_map(|t| extract_entities_approx(t).texts(t))
        .collect();
    Some(mine.intersection(&theirs).count() as f64 / mine.len() as f64)
}

/// Averages over a question set against a training set.
///
/// Entity figures use the capitalization approximation and count spans, so
/// `ne_overlap` is the mean span-level overlap over questions that contain
/// at least one entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub n_questions: usize,
    pub unigram_overlap: f64,
    pub bigram_overlap: f64,
    pub longest_ngram_overlap: f64,
    pub ne_overlap: f64,
    pub total_words: f64,
    pub total_ne: f64,
    pub ne_method: String,
    pub ne_unit: String,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Builds the report. Questions shorter than two tokens are left out of the
/// bigram mean only.
pub fn overlap_report(qs: &[Question], train: &Dataset) -> Result<OverlapReport, AnalysisError> {
    if qs.is_empty() {
        return Err(AnalysisError::NoQuestions);
    }
    let mut order: Vec<&Question> = qs.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let (mut uni, mut bi, mut longest, mut ne, mut words, mut ents) = (vec![], vec![], vec![], vec![], vec![], vec![]);
    for q in order {
        if !q.tokens.is_empty() {
            uni.push(ngram_overlap(q, train, 1)?);
        }
        if q.tokens.len() >= 2 {
            bi.push(ngram_overlap(q, train, 2)?);
        }
        longest.push(longest_ngram_overlap(q, train) as f64);
        ne.extend(ne_overlap(q, train));
        words.push(q.tokens.len() as f64);
        ents.push(extract_entities_approx(q).len() as f64);
    }
    Ok(OverlapReport {
        n_questions: qs.len(),
        unigram_overlap: mean(&uni),
        bigram_overlap: mean(&bi),
        longest_ngram_overlap: mean(&longest),
        ne_overlap: mean(&ne),
        total_words: mean(&words),
        total_ne: mean(&ents),
        ne_method: "capitalization_approx".into(),
        ne_unit: "span".into(),
    })
}

/// `metric,<column names>` followed by one row per metric in a fixed order.
pub fn write_overlap_csv(columns: &[(String, OverlapReport)], writer: impl Write) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["metric".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));
    w.write_record(&header)?;
    type Row = (&'static str, fn(&OverlapReport) -> f64);
    let rows: [Row; 6] = [
        ("unigram_overlap", |r| r.unigram_overlap),
        ("bigram_overlap", |r| r.bigram_overlap),
        ("longest_ngram_overlap", |r| r.longest_ngram_overlap),
        ("ne_overlap_approx", |r| r.ne_overlap),
        ("total_words", |r| r.total_words),
        ("total_ne_approx", |r| r.total_ne),
    ];
    for (name, get) in rows {
        let mut record = vec![name.to_string()];
        record.extend(columns.iter().map(|(_, r)| get(r).to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerFrequency {
    pub mean_examples_per_answer: f64,
    pub n_questions: usize,
}

/// Mean, over `qs`, of the number of training questions sharing each
/// question's answer.
pub fn answer_frequency(train: &Dataset, qs: &[Question]) -> Result<AnswerFrequency, AnalysisError> {
    if qs.is_empty() {
        return Err(AnalysisError::NoQuestions);
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in train.train_questions() {
        *counts.entry(t.answer.canonical_name.as_str()).or_default() += 1;
    }
    let total: usize = qs
        .iter()
        .map(|q| counts.get(q.answer.canonical_name.as_str()).copied().unwrap_or(0))
        .sum();
    Ok(AnswerFrequency {
        mean_examples_per_answer: total as f64 / qs.len() as f64,
        n_questions: qs.len(),
    })
}
