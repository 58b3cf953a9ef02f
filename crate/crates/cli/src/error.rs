use std::path::PathBuf;

/// Errors the user can fix without touching the models: bad configuration,
/// unreadable files, stages run out of order. These exit with code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Input { path: PathBuf, msg: String },
    #[error("missing prerequisite {artifact} (run `fuelmodel {stage}` first)")]
    MissingPrerequisite { artifact: PathBuf, stage: &'static str },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        Self::Input {
            path: path.into(),
            msg: msg.to_string(),
        }
    }
}

/// Process exit code for an error returned by a command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<CliError>().is_some() {
        2
    } else {
        1
    }
}
