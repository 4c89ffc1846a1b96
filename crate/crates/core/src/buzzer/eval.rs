use serde::{Deserialize, Serialize};

use super::{BuzzError, QAModel};
use crate::corpus::{tokenize, Question, TokenSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    #[default]
    Word,
    Sentence,
}

impl Granularity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Granularity::Word => "word",
            Granularity::Sentence => "sentence",
        }
    }
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "word" => Ok(Granularity::Word),
            "sentence" => Ok(Granularity::Sentence),
            other => Err(format!("unknown granularity `{other}` (expected word or sentence)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuzzResult {
    /// Fraction of tokens revealed when the top guess is first correct.
    pub first_correct_fraction: Option<f64>,
    /// Smallest revealed fraction from which every longer prefix is answered correctly.
    pub stable_correct_fraction: Option<f64>,
    /// Top-1 class (in the model's label space) on each evaluated prefix.
    pub per_prefix_top1: Vec<Option<usize>>,
    /// Token count of each evaluated prefix.
    pub prefix_lengths: Vec<usize>,
    pub granularity: Granularity,
}

/// Token counts at the end of each sentence of `raw_text`, where a sentence
/// ends at `.`, `?` or `!`. The full token count is always the last entry.
pub fn sentence_prefix_lengths(raw_text: &str, n_tokens: usize) -> Vec<usize> {
    let mut lengths = Vec::new();
    for (i, c) in raw_text.char_indices() {
        if matches!(c, '.' | '?' | '!') {
            let len = tokenize(&raw_text[..i + c.len_utf8()]).len().min(n_tokens);
            if len > 0 && lengths.last() != Some(&len) {
                lengths.push(len);
            }
        }
    }
    if n_tokens > 0 && lengths.last() != Some(&n_tokens) {
        lengths.push(n_tokens);
    }
    lengths
}

fn prefix_lengths(q: &Question, granularity: Granularity) -> Vec<usize> {
    match granularity {
        Granularity::Word => (1..=q.tokens.len()).collect(),
        Granularity::Sentence => sentence_prefix_lengths(&q.raw_text, q.tokens.len()),
    }
}

fn top1(model: &dyn QAModel, prefix: &[String]) -> Result<Option<usize>, BuzzError> {
    if prefix.is_empty() {
        return Ok(None);
    }
    let guesses = model.guess(&TokenSequence::from(prefix.to_vec()), 1)?;
    Ok(guesses.top().map(|g| g.answer.class_index))
}

fn is_correct(model: &dyn QAModel, prefix: &[String], gold: &str) -> Result<bool, BuzzError> {
    if prefix.is_empty() {
        return Ok(false);
    }
    let guesses = model.guess(&TokenSequence::from(prefix.to_vec()), 1)?;
    Ok(guesses.top().is_some_and(|g| g.answer.canonical_name == gold))
}

/// Asks `model` for its top guess on each successive prefix of `q`.
pub fn buzz(model: &dyn QAModel, q: &Question, granularity: Granularity) -> Result<BuzzResult, BuzzError> {
    let n = q.tokens.len();
    let lengths = prefix_lengths(q, granularity);
    let mut per_prefix_top1 = Vec::with_capacity(lengths.len());
    let mut correct = Vec::with_capacity(lengths.len());
    for &len in &lengths {
        let top = top1(model, &q.tokens[..len])?;
        let hit = top.is_some_and(|c| {
            model
                .answers()
                .get(c)
                .is_some_and(|l| l.canonical_name == q.answer.canonical_name)
        });
        per_prefix_top1.push(top);
        correct.push(hit);
    }
    let fraction = |i: usize| lengths[i] as f64 / n as f64;
    let first_correct_fraction = correct.iter().position(|c| *c).map(fraction);
    let stable_correct_fraction = match correct.iter().rposition(|c| !*c) {
        None if !correct.is_empty() => Some(fraction(0)),
        Some(last_wrong) if last_wrong + 1 < correct.len() => Some(fraction(last_wrong + 1)),
        _ => None,
    };
    Ok(BuzzResult {
        first_correct_fraction,
        stable_correct_fraction,
        per_prefix_top1,
        prefix_lengths: lengths,
        granularity,
    })
}

/// Twenty evenly spaced positions 0.05, 0.10, ..., 1.00.
pub fn default_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 20.0).collect()
}

/// Tokens revealed at position `p` of an `n`-token question: `ceil(p·n)`,
/// except that a product within rounding error of an integer is taken as
/// that integer (so 0.15 × 20 reveals 3 tokens, not 4).
pub fn prefix_len_at(p: f64, n: usize) -> usize {
    let x = p * n as f64;
    let nearest = x.round();
    let len = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (len as usize).min(n)
}

fn check_grid(grid: &[f64]) -> Result<(), BuzzError> {
    if grid.is_empty() {
        return Err(BuzzError::InvalidGrid("grid is empty".into()));
    }
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(BuzzError::InvalidGrid(format!("position {p} outside (0, 1]")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BuzzError::InvalidGrid("positions must be strictly ascending".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    pub model_id: String,
    pub dataset_id: String,
    pub granularity: Granularity,
    pub positions: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub n_questions: usize,
}

impl AccuracyCurve {
    pub fn with_dataset(mut self, dataset_id: impl Into<String>) -> Self {
        self.dataset_id = dataset_id.into();
        self
    }
}

/// Word-level accuracy curve: at position `p` each question is cut to its
/// first [`prefix_len_at`]`(p, n)` tokens.
pub fn accuracy_curve(model: &dyn QAModel, qs: &[Question], grid: &[f64]) -> Result<AccuracyCurve, BuzzError> {
    accuracy_curve_at(model, qs, grid, Granularity::Word)
}

/// Like [`accuracy_curve`]; under [`Granularity::Sentence`] the model only
/// sees the complete sentences inside the word-level cut.
pub fn accuracy_curve_at(
    model: &dyn QAModel,
    qs: &[Question],
    grid: &[f64],
    granularity: Granularity,
) -> Result<AccuracyCurve, BuzzError> {
    if qs.is_empty() {
        return Err(BuzzError::NoQuestions);
    }
    check_grid(grid)?;
    let mut hits = vec![0usize; grid.len()];
    for q in qs {
        let n = q.tokens.len();
        let sentence_ends = match granularity {
            Granularity::Word => Vec::new(),
            Granularity::Sentence => sentence_prefix_lengths(&q.raw_text, n),
        };
        let mut memo: Vec<Option<bool>> = vec![None; n + 1];
        for (slot, &p) in grid.iter().enumerate() {
            let cut = prefix_len_at(p, n);
            let len = match granularity {
                Granularity::Word => cut,
                Granularity::Sentence => sentence_ends.iter().rev().find(|&&e| e <= cut).copied().unwrap_or(0),
            };
            let hit = match memo[len] {
                Some(h) => h,
                None => {
                    let h = is_correct(model, &q.tokens[..len], &q.answer.canonical_name)?;
                    memo[len] = Some(h);
                    h
                }
            };
            hits[slot] += usize::from(hit);
        }
    }
    let n_questions = qs.len();
    Ok(AccuracyCurve {
        model_id: model.id().to_string(),
        dataset_id: String::new(),
        granularity,
        positions: grid.to_vec(),
        accuracy: hits.iter().map(|h| *h as f64 / n_questions as f64).collect(),
        n_questions,
    })
}

/// Full-question accuracy of every model (rows) on every set (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferTable {
    pub models: Vec<String>,
    pub sets: Vec<String>,
    pub accuracy: Vec<Vec<f64>>,
}

pub fn transfer_table(
    models: &[&dyn QAModel],
    sets: &[(String, Vec<Question>)],
) -> Result<TransferTable, BuzzError> {
    if models.is_empty() {
        return Err(BuzzError::NoModels);
    }
    if sets.is_empty() {
        return Err(BuzzError::NoQuestions);
    }
    let mut accuracy = Vec::with_capacity(models.len());
    for model in models {
        let row = sets
            .iter()
            .map(|(_, qs)| Ok(accuracy_curve(*model, qs, &[1.0])?.accuracy[0]))
            .collect::<Result<Vec<f64>, BuzzError>>()?;
        accuracy.push(row);
    }
    Ok(TransferTable {
        models: models.iter().map(|m| m.id().to_string()).collect(),
        sets: sets.iter().map(|(name, _)| name.clone()).collect(),
        accuracy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuzzStats {
    /// Mean first-correct fraction over questions the model ever gets right.
    pub mean_first_fraction: Option<f64>,
    /// Full-question top-1 accuracy.
    pub accuracy: f64,
    pub n_buzzed: usize,
    pub n_questions: usize,
}

pub fn mean_buzz_stats(model: &dyn QAModel, qs: &[Question], granularity: Granularity) -> Result<BuzzStats, BuzzError> {
    if qs.is_empty() {
        return Err(BuzzError::NoQuestions);
    }
    let mut order: Vec<&Question> = qs.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut sum = 0.0;
    let mut n_buzzed = 0;
    let mut n_correct = 0;
    for q in order {
        let result = buzz(model, q, granularity)?;
        if let Some(f) = result.first_correct_fraction {
            sum += f;
            n_buzzed += 1;
        }
        n_correct += usize::from(is_correct(model, &q.tokens, &q.answer.canonical_name)?);
    }
    Ok(BuzzStats {
        mean_first_fraction: (n_buzzed > 0).then(|| sum / n_buzzed as f64),
        accuracy: n_correct as f64 / qs.len() as f64,
        n_buzzed,
        n_questions: qs.len(),
    })
}
