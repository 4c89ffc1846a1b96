//! Seeded synthetic trigger-token corpus.
//!
//! Every answer owns a handful of invented "trigger" words that appear in no
//! other answer's questions. The rest of each question is filler drawn
//! uniformly from a shared English vocabulary, so the triggers are the only
//! signal a model can learn from.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use super::{tokenize, Category, CorpusError, Dataset, Question, QuestionRecord, Split};

const FILLER: &[&str] = &[
    "this", "work", "author", "figure", "one", "its", "that", "was", "known", "for", "name", "these",
    "which", "after", "his", "her", "their", "first", "later", "during", "some", "other", "character",
    "described", "written", "city", "war", "king", "poem", "novel", "country", "river", "battle",
    "painting", "composer", "opera", "element", "theory", "reaction", "compound", "structure", "law",
    "empire", "treaty", "leader", "title", "scene", "many", "those", "often", "called", "found",
    "used", "made", "named", "along", "with", "from", "into", "over", "under", "between", "each",
    "several", "another", "second", "final", "early", "late", "century", "year", "period", "style",
    "movement", "form", "process", "system", "method", "model", "example", "event", "place", "group",
    "member", "people", "object", "image", "story", "book", "song", "act", "part", "line", "point",
    "side", "order", "state", "power", "force", "energy", "light", "water", "stone", "gold", "iron",
    "glass", "fire", "earth", "air", "sea", "island", "mountain", "temple", "church", "palace",
    "garden", "house", "road", "bridge", "tower", "ship", "army", "court", "council", "school",
    "student", "teacher", "friend", "enemy", "father", "mother", "son", "daughter", "brother",
    "sister", "wife", "husband", "child", "god", "goddess", "hero", "villain", "spirit", "dream",
    "night", "day", "morning", "winter", "summer", "north", "south", "east", "west", "ancient",
    "modern", "famous", "great", "small", "large", "old", "new", "red", "blue", "green", "white",
];

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub num_answers: usize,
    pub per_answer: usize,
    pub seed: u64,
    /// Fraction of each answer's questions placed in the test split.
    pub test_fraction: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub triggers_per_answer: usize,
    pub triggers_per_question: usize,
    /// Number of shared filler words drawn on (capped at the built-in list).
    pub filler_vocab: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_answers: 10,
            per_answer: 20,
            seed: 7,
            test_fraction: 0.25,
            min_len: 10,
            max_len: 20,
            triggers_per_answer: 3,
            triggers_per_question: 4,
            filler_vocab: 60,
        }
    }
}

/// A generated corpus plus the trigger words behind it.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub dataset: Dataset,
    pub records: Vec<QuestionRecord>,
    /// Answer name → its trigger words.
    pub triggers: BTreeMap<String, Vec<String>>,
    /// Trigger word → an invented synonym that occurs nowhere in the corpus.
    pub synonyms: BTreeMap<String, String>,
}

fn pseudo_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
        w.push(*VOWELS.choose(rng).unwrap() as char);
    }
    w.push(*CONSONANTS.choose(rng).unwrap() as char);
    w
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn fresh_word(rng: &mut ChaCha8Rng, taken: &mut BTreeSet<String>, syllables: usize) -> String {
    loop {
        let w = pseudo_word(rng, syllables);
        if taken.insert(w.clone()) {
            return w;
        }
    }
}

/// Generates the corpus described by `cfg`. Identical configs give identical output.
pub fn generate(cfg: &SynthConfig) -> Result<SyntheticCorpus, CorpusError> {
    if cfg.num_answers == 0 || cfg.per_answer == 0 {
        return Err(CorpusError::InvalidConfig(
            "num_answers and per_answer must both be at least 1".into(),
        ));
    }
    if cfg.min_len == 0 || cfg.min_len > cfg.max_len || cfg.triggers_per_question > cfg.min_len {
        return Err(CorpusError::InvalidConfig(format!(
            "need 0 < min_len <= max_len and triggers_per_question <= min_len, got {}..{} with {}",
            cfg.min_len, cfg.max_len, cfg.triggers_per_question
        )));
    }
    if cfg.triggers_per_answer == 0 || !(0.0..1.0).contains(&cfg.test_fraction) {
        return Err(CorpusError::InvalidConfig(
            "triggers_per_answer must be positive and test_fraction in [0, 1)".into(),
        ));
    }

    let filler = &FILLER[..cfg.filler_vocab.clamp(1, FILLER.len())];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut taken: BTreeSet<String> = FILLER.iter().map(|w| w.to_string()).collect();

    let mut answers = Vec::with_capacity(cfg.num_answers);
    let mut triggers = BTreeMap::new();
    for _ in 0..cfg.num_answers {
        let name = format!(
            "{}_{}",
            capitalize(&fresh_word(&mut rng, &mut taken, 2)),
            capitalize(&fresh_word(&mut rng, &mut taken, 2))
        );
        let words: Vec<String> = (0..cfg.triggers_per_answer)
            .map(|_| fresh_word(&mut rng, &mut taken, 3))
            .collect();
        triggers.insert(name.clone(), words);
        answers.push(name);
    }
    let mut synonyms = BTreeMap::new();
    for words in triggers.values() {
        for w in words {
            synonyms.insert(w.clone(), fresh_word(&mut rng, &mut taken, 4));
        }
    }

    let n_test = (cfg.per_answer as f64 * cfg.test_fraction).round() as usize;
    let mut records = Vec::with_capacity(cfg.num_answers * cfg.per_answer);
    for (a, answer) in answers.iter().enumerate() {
        let own = &triggers[answer];
        let category = Category::ALL[a % Category::ALL.len()];
        for j in 0..cfg.per_answer {
            let len = rng.random_range(cfg.min_len..=cfg.max_len);
            let mut words: Vec<String> = (0..len)
                .map(|_| filler.choose(&mut rng).unwrap().to_string())
                .collect();
            let slots = rand::seq::index::sample(&mut rng, len, cfg.triggers_per_question);
            for slot in slots {
                words[slot] = capitalize(own.choose(&mut rng).unwrap());
            }
            let text = sentences(&mut rng, words);
            let split = if j >= cfg.per_answer - n_test { Split::Test } else { Split::Train };
            let mut record = QuestionRecord::new(format!("synth-{a:03}-{j:03}"), text, answer.clone())
                .with_split(split);
            record.category = Some(category.to_string());
            records.push(record);
        }
    }
    let dataset = Dataset::from_records(records.clone())?;
    Ok(SyntheticCorpus {
        dataset,
        records,
        triggers,
        synonyms,
    })
}

/// Joins words into sentences of 5 to 9 words, capitalizing each opener.
fn sentences(rng: &mut ChaCha8Rng, words: Vec<String>) -> String {
    let mut out = String::new();
    let mut remaining = words.len();
    let mut iter = words.into_iter();
    while remaining > 0 {
        let take = rng.random_range(5..=9).min(remaining);
        remaining -= take;
        let chunk: Vec<String> = iter.by_ref().take(take).collect();
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&capitalize(&chunk[0]));
        for w in &chunk[1..] {
            out.push(' ');
            out.push_str(w);
        }
        out.push('.');
    }
    out
}

impl SyntheticCorpus {
    pub fn is_trigger(&self, token: &str) -> bool {
        self.synonyms.contains_key(token)
    }

    /// Rewrites `q` with every trigger word swapped for its unseen synonym.
    pub fn paraphrase(&self, q: &Question) -> Question {
        let text = q
            .raw_text
            .split(' ')
            .map(|chunk| {
                let lowered = tokenize(chunk);
                match lowered.first().and_then(|t| self.synonyms.get(t)) {
                    Some(syn) if lowered.len() == 1 => {
                        let replaced = chunk.to_lowercase().replace(lowered[0].as_str(), syn);
                        if chunk.starts_with(char::is_uppercase) {
                            capitalize(&replaced)
                        } else {
                            replaced
                        }
                    }
                    _ => chunk.to_string(),
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        let mut out = q.clone();
        out.id = format!("{}-para", q.id);
        out.tokens = tokenize(&text);
        out.raw_text = text;
        out.phenomena.insert(super::PhenomenonTag::Paraphrase);
        out
    }

    /// Every distinct token in the corpus, sorted.
    pub fn vocabulary(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.dataset.questions().iter().flat_map(|q| q.tokens.iter()).collect();
        set.into_iter().cloned().collect()
    }
}
