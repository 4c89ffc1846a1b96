use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use advqa_core::buzzer::{buzz, ModelFamily, QAModel};
use advqa_core::corpus::{
    tokenize, validate_against, AnswerLabel, Dataset, Question, QuestionRecord, Source, Split, ValidationPolicy,
    ValidationVerdict,
};
use advqa_core::prediction::EvidenceMap;

use crate::error::ServiceError;
use crate::session::{
    DraftFeedback, EditEvent, EditSession, EvalOptions, EvidenceTarget, LogRecord, SessionInfo, SessionState,
    TrajectoryPoint,
};
use crate::store::{IndexEntry, SessionStore};

/// Number of guesses shown to the author.
pub const FEEDBACK_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub id: String,
    pub family: ModelFamily,
    pub num_answers: usize,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

/// Computes the feedback an author sees for `text`. Pure in its arguments.
pub fn draft_feedback(
    model: &dyn QAModel,
    answer: &AnswerLabel,
    text: &str,
    options: EvalOptions,
) -> Result<DraftFeedback, ServiceError> {
    if tokenize(text).is_empty() {
        return Err(ServiceError::EmptyDraft);
    }
    let q = Question::new("draft", text, answer.clone());
    let guesses = model.guess(&q.tokens, FEEDBACK_K)?;
    let buzz = buzz(model, &q, options.granularity)?;
    let top1_correct = guesses.top().is_some_and(|g| g.answer.canonical_name == answer.canonical_name);
    let evidence_class = match options.target {
        EvidenceTarget::Top => guesses.top().map(|g| g.answer.class_index),
        EvidenceTarget::Gold => Some(answer.class_index),
    };
    let evidence = match evidence_class {
        Some(c) => model.evidence(&q.tokens, c)?,
        None => EvidenceMap::raw(vec![0.0; q.tokens.len()]),
    };
    Ok(DraftFeedback {
        tokens: q.tokens,
        guesses,
        buzz,
        evidence,
        evidence_class,
        top1_correct,
    })
}

/// Sessions, feedback and submissions over a fixed set of models.
pub struct Service {
    models: BTreeMap<String, Arc<dyn QAModel>>,
    train: Arc<Dataset>,
    policy: ValidationPolicy,
    store: SessionStore,
    sessions: RwLock<HashMap<String, Arc<Mutex<EditSession>>>>,
    index: Mutex<BTreeMap<String, IndexEntry>>,
    submissions: Mutex<Vec<Question>>,
}

impl Service {
    /// Opens (or creates) the data directory and restores every stored session.
    pub fn open(
        models: Vec<Arc<dyn QAModel>>,
        train: Arc<Dataset>,
        policy: ValidationPolicy,
        data_dir: impl Into<PathBuf>,
    ) -> Result<Self, ServiceError> {
        let (store, loaded) = SessionStore::open(data_dir)?;
        let mut by_id = BTreeMap::new();
        for m in models {
            let id = m.id().to_string();
            if by_id.insert(id.clone(), m).is_some() {
                return Err(ServiceError::InvalidRequest(format!("duplicate model id `{id}`")));
            }
        }
        let submissions = if loaded.submissions.is_empty() {
            Vec::new()
        } else {
            let path = store.submissions_path();
            Dataset::from_records(loaded.submissions)
                .map_err(|e| ServiceError::store(&path, e))?
                .questions()
                .to_vec()
        };
        let mut index = BTreeMap::new();
        let mut sessions = HashMap::new();
        for s in loaded.sessions {
            if !by_id.contains_key(&s.info.model_id) {
                log::warn!("session {} refers to unknown model {}", s.info.session_id, s.info.model_id);
            }
            index.insert(
                s.info.session_id.clone(),
                IndexEntry {
                    info: s.info.clone(),
                    n_events: s.events.len(),
                },
            );
            sessions.insert(s.info.session_id.clone(), Arc::new(Mutex::new(s)));
        }
        log::info!(
            "restored {} sessions and {} submissions from {}",
            sessions.len(),
            submissions.len(),
            store.root().display()
        );
        Ok(Service {
            models: by_id,
            train,
            policy,
            store,
            sessions: RwLock::new(sessions),
            index: Mutex::new(index),
            submissions: Mutex::new(submissions),
        })
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    pub fn model(&self, id: &str) -> Result<&Arc<dyn QAModel>, ServiceError> {
        self.models.get(id).ok_or_else(|| ServiceError::UnknownModel(id.to_string()))
    }

    pub fn models(&self) -> Vec<ModelSummary> {
        self.models
            .values()
            .map(|m| ModelSummary {
                id: m.id().to_string(),
                family: m.family(),
                num_answers: m.answers().len(),
            })
            .collect()
    }

    /// Answers whose name starts with `prefix` (case-insensitive), from one
    /// model's vocabulary or, without a model, from the training data.
    pub fn answers(&self, prefix: &str, model: Option<&str>, limit: usize) -> Result<Vec<AnswerLabel>, ServiceError> {
        let vocab = match model {
            Some(id) => self.model(id)?.answers(),
            None => self.train.answer_vocab(),
        };
        let needle = prefix.to_lowercase();
        Ok(vocab
            .iter()
            .filter(|l| l.canonical_name.to_lowercase().starts_with(&needle))
            .take(limit)
            .cloned()
            .collect())
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<EditSession>>, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    fn reindex(&self, s: &EditSession) -> Result<(), ServiceError> {
        let mut index = lock(&self.index);
        index.insert(
            s.info.session_id.clone(),
            IndexEntry {
                info: s.info.clone(),
                n_events: s.events.len(),
            },
        );
        self.store.write_index(index.values().cloned())
    }

    pub fn sessions(&self) -> Vec<IndexEntry> {
        lock(&self.index).values().cloned().collect()
    }

    pub fn get_session(&self, id: &str) -> Result<EditSession, ServiceError> {
        let handle = self.session(id)?;
        let s = lock(&handle).clone();
        Ok(s)
    }

    pub fn create_session(&self, author_id: &str, model_id: &str, answer: &str) -> Result<SessionInfo, ServiceError> {
        let model = self.model(model_id)?;
        let label = model.label(answer).cloned().ok_or_else(|| ServiceError::UnknownAnswer {
            model: model_id.to_string(),
            answer: answer.to_string(),
        })?;
        let info = SessionInfo {
            session_id: uuid::Uuid::new_v4().simple().to_string(),
            author_id: author_id.to_string(),
            model_id: model_id.to_string(),
            answer: label,
            created_ms: now_ms(),
            state: SessionState::Open,
        };
        self.store.append(&info.session_id, &LogRecord::Created(info.clone()))?;
        let session = EditSession {
            info: info.clone(),
            events: Vec::new(),
            submission_id: None,
        };
        self.reindex(&session)?;
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(info.session_id.clone(), Arc::new(Mutex::new(session)));
        log::debug!("session {} opened by {} on {}", info.session_id, author_id, model_id);
        Ok(info)
    }

    fn ensure_open(s: &EditSession) -> Result<(), ServiceError> {
        if s.info.state == SessionState::Open {
            Ok(())
        } else {
            Err(ServiceError::SessionClosed {
                id: s.info.session_id.clone(),
                state: s.info.state,
            })
        }
    }

    pub fn evaluate_draft(&self, session_id: &str, text: &str, options: EvalOptions) -> Result<EditEvent, ServiceError> {
        let handle = self.session(session_id)?;
        let mut s = lock(&handle);
        Self::ensure_open(&s)?;
        let model = self.model(&s.info.model_id)?;
        let feedback = draft_feedback(model.as_ref(), &s.info.answer, text, options)?;
        let event = EditEvent {
            seq: s.events.len() as u64 + 1,
            timestamp_ms: now_ms(),
            draft_text: text.to_string(),
            options,
            feedback,
        };
        self.store.append(session_id, &LogRecord::Draft(event.clone()))?;
        s.events.push(event.clone());
        self.reindex(&s)?;
        Ok(event)
    }

    /// Recomputes the feedback of every stored draft of a session.
    pub fn replay(&self, session_id: &str) -> Result<Vec<DraftFeedback>, ServiceError> {
        let s = self.get_session(session_id)?;
        let model = self.model(&s.info.model_id)?;
        s.events
            .iter()
            .map(|e| draft_feedback(model.as_ref(), &s.info.answer, &e.draft_text, e.options))
            .collect()
    }

    pub fn submit(&self, session_id: &str) -> Result<ValidationVerdict, ServiceError> {
        let handle = self.session(session_id)?;
        let mut s = lock(&handle);
        Self::ensure_open(&s)?;
        let last = s
            .events
            .last()
            .ok_or_else(|| ServiceError::NoDrafts(session_id.to_string()))?;
        let source = match self.model(&s.info.model_id)?.family() {
            ModelFamily::Ir => Source::AdversarialIR,
            ModelFamily::Neural => Source::AdversarialRNN,
        };
        let submission_id = format!("adv-{session_id}");
        let q = Question::new(submission_id.clone(), last.draft_text.clone(), s.info.answer.clone()).with_source(source);

        let mut accepted = lock(&self.submissions);
        let verdict = validate_against(&q, &self.train, &accepted, &self.policy);
        let timestamp_ms = now_ms();
        if verdict.is_accept() {
            self.store.append_submission(&QuestionRecord::from_question(&q, Split::Test))?;
            self.store.append(
                session_id,
                &LogRecord::Submitted {
                    timestamp_ms,
                    submission_id: submission_id.clone(),
                },
            )?;
            accepted.push(q);
            s.info.state = SessionState::Submitted;
            s.submission_id = Some(submission_id);
            self.reindex(&s)?;
        } else {
            self.store.append(
                session_id,
                &LogRecord::SubmissionRejected {
                    timestamp_ms,
                    verdict,
                },
            )?;
        }
        log::debug!("session {session_id} submit: {verdict:?}");
        Ok(verdict)
    }

    pub fn abandon(&self, session_id: &str) -> Result<SessionInfo, ServiceError> {
        let handle = self.session(session_id)?;
        let mut s = lock(&handle);
        Self::ensure_open(&s)?;
        self.store.append(session_id, &LogRecord::Abandoned { timestamp_ms: now_ms() })?;
        s.info.state = SessionState::Abandoned;
        self.reindex(&s)?;
        Ok(s.info.clone())
    }

    pub fn trajectory(&self, session_id: &str) -> Result<Vec<TrajectoryPoint>, ServiceError> {
        let handle = self.session(session_id)?;
        let points = lock(&handle).trajectory();
        Ok(points)
    }

    /// Every accepted adversarial question so far.
    pub fn submissions(&self) -> Vec<Question> {
        lock(&self.submissions).clone()
    }
}
