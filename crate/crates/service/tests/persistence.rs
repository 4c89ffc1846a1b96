mod common;

use proptest::prelude::*;
use std::io::Write;
use std::sync::Arc;

use advqa_core::buzzer::Granularity;
use advqa_core::corpus::{RejectReason, ValidationVerdict};
use advqa_service::{EvalOptions, EvidenceTarget, Service, ServiceError, SessionState};

fn options(i: usize) -> EvalOptions {
    EvalOptions {
        granularity: if i.is_multiple_of(2) { Granularity::Word } else { Granularity::Sentence },
        target: if i.is_multiple_of(3) { EvidenceTarget::Gold } else { EvidenceTarget::Top },
    }
}

/// Runs 20 sessions mixing models, draft counts, options and outcomes; returns their ids.
fn scripted_sessions(fx: &common::Fixture, svc: &Service) -> Vec<String> {
    let tests = fx.test_questions();
    let trains = fx.train_questions();
    let mut ids = Vec::new();
    for i in 0..20 {
        let q = &tests[(i * 7) % tests.len()];
        let model = if i % 2 == 0 { "ir" } else { "dan" };
        let info = svc.create_session(&format!("author{}", i % 3), model, &q.answer.canonical_name).unwrap();
        let id = info.session_id;
        let words: Vec<&str> = q.raw_text.split(' ').collect();
        for d in 0..=(i % 4) {
            let cut = (words.len() * (d + 1) / 5).max(1);
            svc.evaluate_draft(&id, &words[..cut].join(" "), options(i + d)).unwrap();
        }
        svc.evaluate_draft(&id, &fx.corpus.paraphrase(q).raw_text, options(i)).unwrap();
        match i % 5 {
            0 => {
                svc.abandon(&id).unwrap();
            }
            1 => assert_eq!(svc.submit(&id).unwrap(), ValidationVerdict::Accept),
            2 => {
                let dup = trains.iter().find(|t| t.answer == q.answer).unwrap();
                svc.evaluate_draft(&id, &dup.raw_text, options(i)).unwrap();
                assert_eq!(
                    svc.submit(&id).unwrap(),
                    ValidationVerdict::Reject(RejectReason::DuplicateOfTraining)
                );
            }
            _ => {}
        }
        ids.push(id);
    }
    ids
}

fn snapshot(svc: &Service, ids: &[String]) -> Vec<String> {
    ids.iter()
        .map(|id| serde_json::to_string(&svc.get_session(id).unwrap()).unwrap())
        .collect()
}

#[test]
fn restart_restores_sessions_and_replays_bit_for_bit() {
    let fx = common::fixture();
    let dir = tempfile::tempdir().unwrap();
    let svc = fx.open(dir.path());
    let ids = scripted_sessions(&fx, &svc);
    let before = snapshot(&svc, &ids);
    let index_before = svc.store().read_index().unwrap();
    drop(svc);

    let svc = fx.open(dir.path());
    assert_eq!(snapshot(&svc, &ids), before);
    assert_eq!(svc.store().read_index().unwrap(), index_before);
    assert_eq!(svc.sessions().len(), 20);
    assert_eq!(svc.submissions().len(), 4);

    let mut n_drafts = 0;
    for id in &ids {
        let stored = svc.get_session(id).unwrap();
        let replayed = svc.replay(id).unwrap();
        assert_eq!(replayed.len(), stored.events.len());
        for (e, fb) in stored.events.iter().zip(&replayed) {
            assert_eq!(serde_json::to_string(&e.feedback).unwrap(), serde_json::to_string(fb).unwrap());
            n_drafts += 1;
        }
        let points = svc.trajectory(id).unwrap();
        let recomputed: Vec<Option<f64>> = replayed.iter().map(|f| f.buzz.first_correct_fraction).collect();
        let stored_firsts: Vec<Option<f64>> = points.iter().map(|p| p.first).collect();
        assert_eq!(recomputed, stored_firsts);
    }
    assert!(n_drafts > 60);
}

#[test]
fn restart_preserves_state_rules() {
    let fx = common::fixture();
    let dir = tempfile::tempdir().unwrap();
    let svc = fx.open(dir.path());
    let ids = scripted_sessions(&fx, &svc);
    drop(svc);
    let svc = fx.open(dir.path());

    // Open sessions continue with the next seq.
    let open = &ids[3];
    let n = svc.get_session(open).unwrap().events.len() as u64;
    let ev = svc.evaluate_draft(open, "one more attempt at this question", EvalOptions::default()).unwrap();
    assert_eq!(ev.seq, n + 1);

    assert!(matches!(svc.submit(&ids[1]), Err(ServiceError::SessionClosed { .. })));
    assert!(matches!(svc.abandon(&ids[0]), Err(ServiceError::SessionClosed { .. })));

    // Accepted submissions are still known after the restart.
    let accepted = svc.get_session(&ids[1]).unwrap();
    let again = svc.create_session("x", "ir", &accepted.info.answer.canonical_name).unwrap();
    let text = accepted.events.last().unwrap().draft_text.clone();
    svc.evaluate_draft(&again.session_id, &text, EvalOptions::default()).unwrap();
    assert_eq!(
        svc.submit(&again.session_id).unwrap(),
        ValidationVerdict::Reject(RejectReason::DuplicateOfSubmission)
    );
}

#[test]
fn truncated_tail_is_dropped_but_corruption_is_not() {
    let fx = common::fixture();
    let dir = tempfile::tempdir().unwrap();
    let svc = fx.open(dir.path());
    let q = &fx.test_questions()[0];
    let id = svc.create_session("a", "ir", &q.answer.canonical_name).unwrap().session_id;
    svc.evaluate_draft(&id, &q.raw_text, EvalOptions::default()).unwrap();
    let path = svc.store().log_path(&id);
    let before = serde_json::to_string(&svc.get_session(&id).unwrap()).unwrap();
    drop(svc);

    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    f.write_all(br#"{"type":"draft","seq":2,"timest"#).unwrap();
    drop(f);
    let svc = fx.open(dir.path());
    assert_eq!(serde_json::to_string(&svc.get_session(&id).unwrap()).unwrap(), before);
    drop(svc);

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.insert(1, "not json");
    std::fs::write(&path, lines.join("\n")).unwrap();
    let err = Service::open(
        fx.models.clone(),
        fx.train.clone(),
        Default::default(),
        dir.path(),
    )
    .err()
    .unwrap();
    assert_eq!(err.code(), "storage_error");
}

#[test]
fn concurrent_sessions_do_not_interleave() {
    let fx = common::fixture();
    let dir = tempfile::tempdir().unwrap();
    let svc = Arc::new(fx.open(dir.path()));
    let answers = fx.train.answer_vocab().to_vec();
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let svc = svc.clone();
            let answer = answers[t % answers.len()].canonical_name.clone();
            std::thread::spawn(move || {
                let model = if t % 2 == 0 { "ir" } else { "dan" };
                let id = svc.create_session(&format!("w{t}"), model, &answer).unwrap().session_id;
                for k in 0..12 {
                    svc.evaluate_draft(&id, &format!("writer{t} draft{k} about things"), EvalOptions::default())
                        .unwrap();
                }
                (t, id)
            })
        })
        .collect();
    let done: Vec<(usize, String)> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    drop(svc);

    let svc = fx.open(dir.path());
    for (t, id) in done {
        let s = svc.get_session(&id).unwrap();
        assert_eq!(s.events.len(), 12);
        for (k, e) in s.events.iter().enumerate() {
            assert_eq!(e.seq, k as u64 + 1);
            assert_eq!(e.draft_text, format!("writer{t} draft{k} about things"));
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Draft(usize),
    Submit,
    Abandon,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0usize..40).prop_map(Op::Draft),
        1 => Just(Op::Submit),
        1 => Just(Op::Abandon),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // State only ever moves Open→Submitted or Open→Abandoned, seqs are gapless,
    // and a restart reproduces the live session exactly.
    #[test]
    fn random_operation_sequences(ops in prop::collection::vec(op(), 1..14)) {
        let fx = common::fixture();
        let dir = tempfile::tempdir().unwrap();
        let svc = fx.open(dir.path());
        let tests = fx.test_questions();
        let trains = fx.train_questions();
        let gold = tests[0].answer.canonical_name.clone();
        let id = svc.create_session("p", "ir", &gold).unwrap().session_id;
        let mut state = SessionState::Open;
        let mut n_events = 0u64;
        for op in ops {
            let result = match op {
                Op::Draft(i) => {
                    let text = if i % 2 == 0 { &tests[i % tests.len()].raw_text } else { &trains[i % trains.len()].raw_text };
                    svc.evaluate_draft(&id, text, EvalOptions::default()).map(|e| {
                        n_events += 1;
                        prop_assert_eq!(e.seq, n_events);
                        Ok(())
                    })
                }
                Op::Submit => svc.submit(&id).map(|v| {
                    if v.is_accept() {
                        state = SessionState::Submitted;
                    }
                    Ok(())
                }),
                Op::Abandon => svc.abandon(&id).map(|_| {
                    state = SessionState::Abandoned;
                    Ok(())
                }),
            };
            match result {
                Ok(inner) => inner?,
                Err(ServiceError::SessionClosed { .. }) => prop_assert_ne!(state, SessionState::Open),
                Err(ServiceError::NoDrafts(_)) => prop_assert_eq!(n_events, 0),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
            prop_assert_eq!(svc.get_session(&id).unwrap().info.state, state);
        }
        let live = serde_json::to_string(&svc.get_session(&id).unwrap()).unwrap();
        drop(svc);
        let svc = fx.open(dir.path());
        prop_assert_eq!(serde_json::to_string(&svc.get_session(&id).unwrap()).unwrap(), live);
    }
}
