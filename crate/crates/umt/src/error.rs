//! Error and diagnostic types shared by every stage of the pipeline.

use thiserror::Error;

/// Position of a token or construct in a source file (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A single validation finding. `validate` returns these instead of failing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    /// Name of the violated rule, e.g. `non-leaf-abstract`.
    pub rule: &'static str,
    /// Entity (or `entity.feature`) the finding is attached to.
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum UmtError {
    /// Malformed input text; carries the position of the offending token.
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },

    /// Name or type resolution failure while loading a spec against metamodels.
    #[error("resolve error at {pos}: {message}")]
    Resolve { pos: Pos, message: String },

    /// Metamodel (set) failed validation.
    #[error("invalid metamodel:{}", .0.iter().map(|d| format!("\n  {d}")).collect::<String>())]
    Invalid(Vec<Diagnostic>),

    /// The target-entity dependency relation has a cycle.
    #[error("entity dependency cycle: {0}")]
    Cycle(String),

    /// Failure while executing or evaluating against a model.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl UmtError {
    pub fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        UmtError::Syntax {
            pos,
            message: message.into(),
        }
    }

    pub fn resolve(pos: Pos, message: impl Into<String>) -> Self {
        UmtError::Resolve {
            pos,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        UmtError::Runtime(message.into())
    }
}

pub type Result<T> = std::result::Result<T, UmtError>;
