//! Machine-readable diagnostics with source locations.
//!
//! Diagnostics are the frontend's only error channel and are fed verbatim
//! back to the LLM during discovery, so every one carries a location and a
//! one-line message.

use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiagnosticCode {
    LexError,
    SyntaxError,
    DuplicateName,
    UnknownBlock,
    ArityMismatch,
    TypeMismatch,
    SSAViolation,
    MissingReturn,
    NoStrategyForPlayer,
    BranchWarning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub severity: Severity,
    /// 1-based source line; 0 when the diagnostic is not tied to a line.
    pub line: usize,
    /// 1-based source column; 0 when unknown.
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagnosticCode, line: usize, col: usize, message: impl Into<String>) -> Self {
        Diagnostic { code, severity: Severity::Error, line, col, message: message.into() }
    }

    pub fn warning(code: DiagnosticCode, line: usize, col: usize, message: impl Into<String>) -> Self {
        Diagnostic { code, severity: Severity::Warning, line, col, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}[{:?}]: {}", self.line, self.col, sev, self.code, self.message)
    }
}

/// True when any diagnostic in the list is an error.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Render a diagnostic list one per line, the form embedded in feedback.
pub fn render(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}
