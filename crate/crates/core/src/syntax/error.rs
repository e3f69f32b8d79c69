use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ir::SourceSpan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParseErrorKind {
    Syntax,
    UnknownPredicate,
    ArityMismatch,
    UnboundVariable,
    UndeclaredVariable,
    EmptySection,
    MissingSection,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownPredicate => "unknown predicate",
            ParseErrorKind::ArityMismatch => "arity mismatch",
            ParseErrorKind::UnboundVariable => "unbound variable",
            ParseErrorKind::UndeclaredVariable => "undeclared variable",
            ParseErrorKind::EmptySection => "empty section",
            ParseErrorKind::MissingSection => "missing section",
        })
    }
}

/// One diagnostic. The message is written to be pasted verbatim into a
/// refinement prompt, so it always quotes the offending token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            span,
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}: {}",
            self.span.line, self.span.column, self.kind, self.message
        )
    }
}

impl std::error::Error for ParseError {}

/// Every recoverable error found in one parse, in source order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseErrors(pub Vec<ParseError>);

impl ParseErrors {
    pub fn iter(&self) -> std::slice::Iter<'_, ParseError> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn kinds(&self) -> Vec<ParseErrorKind> {
        self.0.iter().map(|e| e.kind).collect()
    }

    /// One diagnostic per line.
    pub fn messages(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}

impl IntoIterator for ParseErrors {
    type Item = ParseError;
    type IntoIter = std::vec::IntoIter<ParseError>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}
