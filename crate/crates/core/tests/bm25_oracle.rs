//! Index-based scoring against a direct evaluation of BM25 over raw documents.

use advqa_core::corpus::{Dataset, QuestionRecord, TokenSequence};
use advqa_core::ir::InvertedIndex;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

const K1: f64 = 1.2;
const B: f64 = 0.75;

/// Raw documents: answer name -> concatenated training tokens.
fn brute_docs(ds: &Dataset) -> Vec<(String, Vec<String>)> {
    let mut docs: Vec<(String, Vec<String>)> = Vec::new();
    for label in ds.answer_vocab() {
        let tokens: Vec<String> = ds
            .train_questions()
            .filter(|q| q.answer.canonical_name == label.canonical_name)
            .flat_map(|q| q.tokens.iter().cloned())
            .collect();
        if !tokens.is_empty() {
            docs.push((label.canonical_name.clone(), tokens));
        }
    }
    docs
}

fn brute_score(docs: &[(String, Vec<String>)], query: &[String], doc: usize) -> f64 {
    let n = docs.len() as f64;
    let total: u64 = docs.iter().map(|(_, d)| d.len() as u64).sum();
    let avg = total as f64 / n;
    let dl = docs[doc].1.len() as f64;
    let mut score = 0.0;
    for t in query {
        let tf = docs[doc].1.iter().filter(|x| *x == t).count() as f64;
        if tf == 0.0 {
            continue;
        }
        let df = docs.iter().filter(|(_, d)| d.contains(t)).count() as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        score += idf * (tf * (K1 + 1.0)) / (tf + K1 * (1.0 - B + B * (dl / avg)));
    }
    score
}

fn corpus_strategy() -> impl Strategy<Value = Vec<(Vec<u8>, u8)>> {
    prop::collection::vec((prop::collection::vec(0u8..15, 1..8), 0u8..5), 1..20)
}

fn to_dataset(rows: &[(Vec<u8>, u8)]) -> Dataset {
    Dataset::from_records(
        rows.iter()
            .enumerate()
            .map(|(i, (words, ans))| {
                let text: Vec<String> = words.iter().map(|w| format!("w{w}")).collect();
                QuestionRecord::new(format!("q{i}"), text.join(" "), format!("A{ans}"))
            })
            .collect(),
    )
    .unwrap()
}

fn query_of(words: &[u8]) -> TokenSequence {
    TokenSequence::new(words.iter().map(|w| format!("w{w}")).collect())
}

proptest! {
    #[test]
    fn index_matches_brute_force(rows in corpus_strategy(), q in prop::collection::vec(0u8..20, 0..10)) {
        let ds = to_dataset(&rows);
        let idx = InvertedIndex::build(&ds).unwrap();
        let docs = brute_docs(&ds);
        let query = query_of(&q);
        prop_assert_eq!(idx.num_docs(), docs.len());
        for (slot, label) in idx.answers().iter().enumerate() {
            let expected = brute_score(&docs, &query, slot);
            let got = idx.score(&query, label.class_index).unwrap();
            prop_assert!((got - expected).abs() <= 1e-12 * expected.max(1.0), "{got} vs {expected}");
            prop_assert!(got >= 0.0);
            let h = idx.highlight(&query, label.class_index).unwrap();
            prop_assert_eq!(h.len(), query.len());
            prop_assert!(h.weights.iter().all(|w| *w >= 0.0));
            prop_assert!((h.total() - got).abs() <= 1e-9 * got.max(1e-300));
        }
    }

    #[test]
    fn appending_a_document_token_never_lowers_score(rows in corpus_strategy(), q in prop::collection::vec(0u8..15, 0..8), pick in any::<prop::sample::Index>()) {
        let ds = to_dataset(&rows);
        let idx = InvertedIndex::build(&ds).unwrap();
        let docs = brute_docs(&ds);
        let slot = pick.index(docs.len());
        let class = idx.answers()[slot].class_index;
        let extra = pick.get(&docs[slot].1).clone();
        let query = query_of(&q);
        let mut longer = query.clone().into_inner();
        longer.push(extra);
        let before = idx.score(&query, class).unwrap();
        let after = idx.score(&TokenSequence::new(longer), class).unwrap();
        prop_assert!(after >= before);
    }

    #[test]
    fn unseen_tokens_score_zero_everywhere(rows in corpus_strategy(), n in 0usize..10) {
        let idx = InvertedIndex::build(&to_dataset(&rows)).unwrap();
        let query = TokenSequence::new((0..n).map(|i| format!("unseen{i}")).collect());
        prop_assert!(idx.score_all(&query).iter().all(|s| *s == 0.0));
    }

    #[test]
    fn build_ignores_question_order(rows in corpus_strategy(), seed in any::<u64>(), q in prop::collection::vec(0u8..15, 0..8)) {
        let mut shuffled: Vec<_> = rows.iter().cloned().enumerate().collect();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = to_dataset(&rows);
        let b = Dataset::from_records(
            shuffled.iter().map(|(i, (words, ans))| {
                let text: Vec<String> = words.iter().map(|w| format!("w{w}")).collect();
                QuestionRecord::new(format!("q{i}"), text.join(" "), format!("A{ans}"))
            }).collect(),
        ).unwrap();
        let ia = InvertedIndex::build(&a).unwrap();
        let ib = InvertedIndex::build(&b).unwrap();
        let query = query_of(&q);
        prop_assert_eq!(ia.score_all(&query), ib.score_all(&query));
    }
}

#[test]
fn single_document_full_query() {
    let ds = Dataset::from_records(vec![QuestionRecord::new("q", "madama butterfly opera by puccini opera", "Puccini")]).unwrap();
    let idx = InvertedIndex::build(&ds).unwrap();
    let docs = brute_docs(&ds);
    let query = ds.questions()[0].tokens.clone();
    assert!((idx.score(&query, 0).unwrap() - brute_score(&docs, &query, 0)).abs() < 1e-12);
}

#[test]
fn repeated_query_term_counts_per_occurrence() {
    let ds = Dataset::from_records(vec![
        QuestionRecord::new("a", "t t u", "A"),
        QuestionRecord::new("b", "v w", "B"),
    ])
    .unwrap();
    let idx = InvertedIndex::build(&ds).unwrap();
    let docs = brute_docs(&ds);
    let twice = TokenSequence::from(&["t", "t"][..]);
    let once = TokenSequence::from(&["t"][..]);
    let expected = brute_score(&docs, &twice, 0);
    assert_eq!(idx.score(&twice, 0).unwrap(), expected);
    assert_eq!(expected, 2.0 * brute_score(&docs, &once, 0));
}
