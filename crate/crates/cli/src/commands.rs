use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use advqa_core::analysis::{answer_frequency, overlap_report, write_overlap_csv};
use advqa_core::buzzer::{
    accuracy_curve_at, default_grid, mean_buzz_stats, transfer_table, write_curves_csv, write_transfer_csv,
    Granularity, QAModel,
};
use advqa_core::corpus::synth::{generate, SynthConfig};
use advqa_core::corpus::{
    validate_against, Dataset, Question, QuestionRecord, Split, ValidationPolicy, ValidationVerdict,
};
use advqa_core::ir::{IndexFileFormat, IndexOptions, InvertedIndex};
use advqa_core::neural::{self, Arch, EmbeddingTable, TrainConfig};
use advqa_service::Service;

use crate::error::CliError;
use crate::specs::{load_jsonl, load_models, parse_set};

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    create_parent(path)?;
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = create_file(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn require<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a PathBuf, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("`{key}` is required")))
}

/// Which questions of a dataset file a command looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitChoice {
    #[default]
    All,
    Train,
    Test,
}

impl SplitChoice {
    pub fn select(self, ds: &Dataset) -> Vec<Question> {
        match self {
            SplitChoice::All => ds.questions().to_vec(),
            SplitChoice::Train => ds.questions_in(Split::Train).cloned().collect(),
            SplitChoice::Test => ds.questions_in(Split::Test).cloned().collect(),
        }
    }
}

// synth

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSettings {
    #[serde(flatten)]
    pub corpus: SynthConfig,
    pub out: PathBuf,
    /// Also write the test split with every trigger word paraphrased.
    pub attack_out: Option<PathBuf>,
}

impl Default for SynthSettings {
    fn default() -> Self {
        SynthSettings {
            corpus: SynthConfig::default(),
            out: "synthetic.jsonl".into(),
            attack_out: None,
        }
    }
}

pub fn synth(s: &SynthSettings) -> Result<Value, CliError> {
    let corpus = generate(&s.corpus)?;
    let mut w = create_file(&s.out)?;
    corpus.dataset.write_jsonl(&mut w)?;
    w.flush().map_err(|e| CliError::io(&s.out, e))?;
    let mut summary = json!({
        "out": s.out,
        "questions": corpus.dataset.questions().len(),
        "answers": corpus.dataset.answer_vocab().len(),
        "test_questions": corpus.dataset.test_questions().count(),
    });
    if let Some(path) = &s.attack_out {
        let records: Vec<QuestionRecord> = corpus
            .dataset
            .test_questions()
            .map(|q| QuestionRecord::from_question(&corpus.paraphrase(q), Split::Test))
            .collect();
        let attack = Dataset::from_records(records)?;
        let mut w = create_file(path)?;
        attack.write_jsonl(&mut w)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
        summary["attack_out"] = json!(path);
    }
    Ok(summary)
}

// train

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub data: Option<PathBuf>,
    /// dan, gru or bigru.
    pub arch: String,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub dropout_keep: f64,
    pub seed: u64,
    /// Pretrained word vectors; random vectors of size `dim` when absent.
    pub vectors: Option<PathBuf>,
    pub dim: usize,
    pub out: PathBuf,
    /// Where random vectors are saved; defaults to `<out>.vectors.txt`.
    pub vectors_out: Option<PathBuf>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSettings {
            data: None,
            arch: t.arch.name().to_string(),
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            hidden: t.hidden,
            dropout_keep: t.dropout_keep,
            seed: t.seed,
            vectors: None,
            dim: 100,
            out: "model.bin".into(),
            vectors_out: None,
        }
    }
}

pub fn train(s: &TrainSettings) -> Result<Value, CliError> {
    let data = load_jsonl(require(&s.data, "data")?)?;
    let arch: Arch = s.arch.parse()?;
    let (emb, saved_vectors) = match &s.vectors {
        Some(path) => (EmbeddingTable::load(path)?, path.clone()),
        None => {
            let vocab = data.questions().iter().flat_map(|q| q.tokens.iter().cloned());
            let emb = EmbeddingTable::random(vocab, s.dim, s.seed);
            let path = s.vectors_out.clone().unwrap_or_else(|| {
                let mut p = s.out.clone().into_os_string();
                p.push(".vectors.txt");
                p.into()
            });
            create_parent(&path)?;
            emb.save(&path)?;
            (emb, path)
        }
    };
    let cfg = TrainConfig {
        arch,
        epochs: s.epochs,
        batch_size: s.batch_size,
        learning_rate: s.learning_rate,
        seed: s.seed,
        hidden: s.hidden,
        dropout_keep: s.dropout_keep,
    };
    let (clf, report) = neural::train(&data, &emb, &cfg)?;
    create_parent(&s.out)?;
    clf.save(&s.out)?;
    let final_loss = report.epoch_losses.last().copied();
    log::info!("trained {} for {} steps, final loss {final_loss:?}", arch.name(), report.steps);
    Ok(json!({
        "out": s.out,
        "vectors": saved_vectors,
        "arch": arch.name(),
        "classes": clf.num_classes(),
        "params": clf.params().len(),
        "steps": report.steps,
        "final_loss": final_loss,
    }))
}

// index

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSettings {
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub format: IndexFileFormat,
    #[serde(flatten)]
    pub options: IndexOptions,
}

impl Default for IndexSettings {
    fn default() -> Self {
        IndexSettings {
            data: None,
            out: "index.json".into(),
            format: IndexFileFormat::Json,
            options: IndexOptions::default(),
        }
    }
}

pub fn index(s: &IndexSettings) -> Result<Value, CliError> {
    let data = load_jsonl(require(&s.data, "data")?)?;
    let idx = InvertedIndex::build_with(&data, s.options)?;
    create_parent(&s.out)?;
    idx.save(&s.out, s.format)?;
    Ok(json!({
        "out": s.out,
        "num_docs": idx.num_docs(),
        "num_terms": idx.num_terms(),
        "avg_doc_len": idx.avg_doc_len(),
    }))
}

// eval

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub models: Vec<String>,
    pub sets: Vec<String>,
    /// Fractions of each question revealed; twenty even steps when absent.
    pub grid: Option<Vec<f64>>,
    pub granularity: Granularity,
    pub split: SplitChoice,
    pub out: PathBuf,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            models: Vec::new(),
            sets: Vec::new(),
            grid: None,
            granularity: Granularity::Word,
            split: SplitChoice::All,
            out: "eval".into(),
        }
    }
}

#[derive(Debug, Serialize)]
struct StatsRow<'a> {
    model_id: &'a str,
    dataset_id: &'a str,
    #[serde(flatten)]
    stats: advqa_core::buzzer::BuzzStats,
}

fn load_sets(specs: &[String], split: SplitChoice) -> Result<Vec<(String, Vec<Question>)>, CliError> {
    specs
        .iter()
        .map(|spec| {
            let (id, path) = parse_set(spec);
            let qs = split.select(&load_jsonl(&path)?);
            if qs.is_empty() {
                return Err(CliError::Config(format!("set `{id}` ({}) has no questions", path.display())));
            }
            Ok((id, qs))
        })
        .collect()
}

pub fn eval(s: &EvalSettings) -> Result<Value, CliError> {
    if s.models.is_empty() || s.sets.is_empty() {
        return Err(CliError::Config("eval needs at least one model and one set".into()));
    }
    let models = load_models(&s.models)?;
    let sets = load_sets(&s.sets, s.split)?;
    let grid = s.grid.clone().unwrap_or_else(default_grid);

    let mut curves = Vec::new();
    let mut stats = Vec::new();
    for m in &models {
        for (id, qs) in &sets {
            curves.push(accuracy_curve_at(m.as_ref(), qs, &grid, s.granularity)?.with_dataset(id.clone()));
            stats.push((m.id().to_string(), id.clone(), mean_buzz_stats(m.as_ref(), qs, s.granularity)?));
        }
    }
    let refs: Vec<&dyn QAModel> = models.iter().map(|m| m.as_ref()).collect();
    let table = transfer_table(&refs, &sets)?;

    fs::create_dir_all(&s.out).map_err(|e| CliError::io(&s.out, e))?;
    let curves_csv = s.out.join("curves.csv");
    let mut w = create_file(&curves_csv)?;
    write_curves_csv(&curves, &mut w)?;
    w.flush().map_err(|e| CliError::io(&curves_csv, e))?;
    write_json(
        &s.out.join("curves.json"),
        &json!({"granularity": s.granularity, "grid": grid, "curves": curves}),
    )?;
    let transfer_csv = s.out.join("transfer.csv");
    let mut w = create_file(&transfer_csv)?;
    write_transfer_csv(&table, &mut w)?;
    w.flush().map_err(|e| CliError::io(&transfer_csv, e))?;
    write_json(&s.out.join("transfer.json"), &table)?;
    let rows: Vec<StatsRow> = stats
        .iter()
        .map(|(m, d, st)| StatsRow {
            model_id: m,
            dataset_id: d,
            stats: st.clone(),
        })
        .collect();
    write_json(&s.out.join("buzz_stats.json"), &rows)?;

    Ok(json!({"out": s.out, "transfer": table, "buzz_stats": rows}))
}

// analyze

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeSettings {
    /// Question sets to describe, one report column each.
    pub test: Vec<String>,
    /// Reference corpus; only its training split is used.
    pub train: Option<PathBuf>,
    pub split: SplitChoice,
    pub out: PathBuf,
}

impl Default for AnalyzeSettings {
    fn default() -> Self {
        AnalyzeSettings {
            test: Vec::new(),
            train: None,
            split: SplitChoice::All,
            out: "analysis".into(),
        }
    }
}

pub fn analyze(s: &AnalyzeSettings) -> Result<Value, CliError> {
    if s.test.is_empty() {
        return Err(CliError::Config("analyze needs at least one test set".into()));
    }
    let train = load_jsonl(require(&s.train, "train")?)?;
    let mut columns = Vec::new();
    let mut freqs = serde_json::Map::new();
    for spec in &s.test {
        let (id, path) = parse_set(spec);
        let qs = s.split.select(&load_jsonl(&path)?);
        let report = overlap_report(&qs, &train)?;
        freqs.insert(id.clone(), serde_json::to_value(answer_frequency(&train, &qs)?)?);
        columns.push((id, report));
    }
    fs::create_dir_all(&s.out).map_err(|e| CliError::io(&s.out, e))?;
    let csv = s.out.join("overlap.csv");
    let mut w = create_file(&csv)?;
    write_overlap_csv(&columns, &mut w)?;
    w.flush().map_err(|e| CliError::io(&csv, e))?;
    let reports: serde_json::Map<String, Value> = columns
        .iter()
        .map(|(id, r)| Ok((id.clone(), serde_json::to_value(r)?)))
        .collect::<Result<_, CliError>>()?;
    let body = json!({"train": s.train, "reports": reports, "answer_frequency": freqs});
    write_json(&s.out.join("overlap.json"), &body)?;
    Ok(body)
}

// validate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateSettings {
    /// Training corpus the questions are checked against.
    pub data: Option<PathBuf>,
    /// Candidate questions (JSONL).
    pub questions: Option<PathBuf>,
    /// Verdicts as JSONL, one line per candidate.
    pub out: PathBuf,
    pub blocklist_file: Option<PathBuf>,
    #[serde(flatten)]
    pub policy: ValidationPolicy,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        ValidateSettings {
            data: None,
            questions: None,
            out: "verdicts.jsonl".into(),
            blocklist_file: None,
            policy: ValidationPolicy::default(),
        }
    }
}

fn policy_with_blocklist(policy: &ValidationPolicy, file: &Option<PathBuf>) -> Result<ValidationPolicy, CliError> {
    let mut p = policy.clone();
    if let Some(path) = file {
        p.load_blocklist(path)?;
    }
    Ok(p)
}

#[derive(Debug, Serialize)]
struct VerdictLine<'a> {
    id: &'a str,
    #[serde(flatten)]
    verdict: ValidationVerdict,
}

/// Checks each candidate in file order; accepted ones count as prior submissions for the rest.
pub fn validate(s: &ValidateSettings) -> Result<Value, CliError> {
    let train = load_jsonl(require(&s.data, "data")?)?;
    let candidates = load_jsonl(require(&s.questions, "questions")?)?;
    let policy = policy_with_blocklist(&s.policy, &s.blocklist_file)?;
    let mut accepted: Vec<Question> = Vec::new();
    let mut lines = Vec::new();
    for q in candidates.questions() {
        let verdict = validate_against(q, &train, &accepted, &policy);
        if verdict.is_accept() {
            accepted.push(q.clone());
        }
        lines.push(serde_json::to_string(&VerdictLine { id: &q.id, verdict })?);
    }
    let mut w = create_file(&s.out)?;
    for l in &lines {
        writeln!(w, "{l}").map_err(|e| CliError::io(&s.out, e))?;
    }
    w.flush().map_err(|e| CliError::io(&s.out, e))?;
    Ok(json!({
        "questions": lines.len(),
        "accepted": accepted.len(),
        "rejected": lines.len() - accepted.len(),
        "out": s.out,
    }))
}

// serve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServeSettings {
    pub models: Vec<String>,
    /// Training corpus for the answer picker and duplicate checks.
    pub data: Option<PathBuf>,
    /// Directory of session logs and accepted submissions.
    pub out: PathBuf,
    pub host: String,
    pub port: u16,
    pub blocklist_file: Option<PathBuf>,
    #[serde(flatten)]
    pub policy: ValidationPolicy,
}

impl Default for ServeSettings {
    fn default() -> Self {
        ServeSettings {
            models: Vec::new(),
            data: None,
            out: "sessions".into(),
            host: "127.0.0.1".into(),
            port: 8080,
            blocklist_file: None,
            policy: ValidationPolicy::default(),
        }
    }
}

/// Runs the authoring service until Ctrl-C.
pub fn serve(s: &ServeSettings) -> Result<Value, CliError> {
    if s.models.is_empty() {
        return Err(CliError::Config("serve needs at least one model".into()));
    }
    let models = load_models(&s.models)?;
    let train = Arc::new(load_jsonl(require(&s.data, "data")?)?);
    let policy = policy_with_blocklist(&s.policy, &s.blocklist_file)?;
    let service = Arc::new(Service::open(models, train, policy, &s.out)?);
    let addr = format!("{}:{}", s.host, s.port);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io("<runtime>", e))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| CliError::io(&addr, e))?;
        let local = listener.local_addr().map_err(|e| CliError::io(&addr, e))?;
        println!("listening on http://{local}");
        let shutdown = async {
            if let Err(e) = tokio::signal::ctrl_c().await {
                log::error!("cannot listen for shutdown signal: {e}");
                std::future::pending::<()>().await;
            }
            log::info!("shutting down");
        };
        advqa_service::serve(listener, service.clone(), shutdown)
            .await
            .map_err(|e| CliError::io(&addr, e))
    })?;
    Ok(json!({"sessions": service.sessions().len(), "submissions": service.submissions().len()}))
}
