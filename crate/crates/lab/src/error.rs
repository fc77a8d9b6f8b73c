use thiserror::Error;

/// Failures of a lab run, split by how the CLI reports them.
#[derive(Debug, Error)]
pub enum LabError {
    /// Bad configuration; nothing is written.
    #[error("config error{}: {message}", if field.is_empty() { String::new() } else { format!(" at `{field}`") })]
    Config { field: String, message: String },
    /// The numerical pipeline failed during a stage.
    #[error("stage `{stage}` failed: {source}")]
    Numeric {
        stage: String,
        #[source]
        source: weyl_core::Error,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Output(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } => 2,
            _ => 3,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.display().to_string(), source }
    }
}
