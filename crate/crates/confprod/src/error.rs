use std::fmt;

use confprod_core::Error as CoreError;

/// One problem found while validating an input document.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    /// JSON path such as `$.g1[0][1]`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input:\n{}", join(.0))]
    Validation(Vec<Issue>),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

fn join(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation(vec![Issue {
            path: path.into(),
            message: message.into(),
        }])
    }

    /// `1` validation, `2` precondition, `3` numerical abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Precondition(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Attaches a JSON path to a core error.
    pub fn at(path: &str, e: CoreError) -> Self {
        match e {
            CoreError::Parse(_) | CoreError::Dimension(_) | CoreError::Invalid(_) => {
                CliError::invalid(path, e.to_string())
            }
            other => other.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parse(_)
            | CoreError::Dimension(_)
            | CoreError::Invalid(_)
            | CoreError::OrderUnavailable { .. } => CliError::invalid("$", e.to_string()),
            CoreError::Precondition { .. } | CoreError::NotDecomposable { .. } => {
                CliError::Precondition(e.to_string())
            }
            CoreError::Domain(_) | CoreError::SingularMetric { .. } | CoreError::NonFinite(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}
