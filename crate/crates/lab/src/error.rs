use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("stage `{stage}` failed for {path}: {message}")]
    Stage {
        stage: &'static str,
        path: PathBuf,
        message: String,
    },
}

impl LabError {
    pub fn config(path: &Path, message: impl Into<String>) -> Self {
        LabError::Config {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn stage(stage: &'static str, path: &Path, message: impl ToString) -> Self {
        LabError::Stage {
            stage,
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } => 2,
            LabError::Stage { .. } => 3,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
