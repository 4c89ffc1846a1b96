use advqa_core::analysis::AnalysisError;
use advqa_core::buzzer::BuzzError;
use advqa_core::corpus::CorpusError;
use advqa_core::ir::IrError;
use advqa_core::neural::NeuralError;
use advqa_service::ServiceError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("bad model spec `{spec}`: {message}")]
    ModelSpec { spec: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Buzz(#[from] BuzzError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short category used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::ModelSpec { .. } => "model_spec",
            CliError::Io { .. } => "io",
            CliError::Corpus(_) => "corpus",
            CliError::Ir(_) => "ir",
            CliError::Neural(_) => "neural",
            CliError::Buzz(_) => "eval",
            CliError::Analysis(_) => "analysis",
            CliError::Service(_) => "service",
            CliError::Json(_) => "json",
        }
    }
}
