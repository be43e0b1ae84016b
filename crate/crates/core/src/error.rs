//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input JSON. Positions are 1-based line/column plus the
    /// absolute byte offset into the input text.
    #[error("JSON parse error at line {line}, column {column} (byte {byte}): {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
        byte: usize,
    },

    /// Structural invariant violated by otherwise well-formed input.
    #[error("validation error: {0}")]
    Validation(String),

    /// A character span that overlaps no token.
    #[error("span ({begin}, {end}) overlaps no token")]
    Alignment { begin: usize, end: usize },

    /// A character span outside the document or with begin >= end.
    #[error("invalid span ({begin}, {end}) for text of length {len}")]
    InvalidSpan { begin: usize, end: usize, len: usize },

    /// Per-token vectors of differing lengths.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Argument outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap a serde_json error, resolving its line/column to a byte offset
    /// in `source`.
    pub(crate) fn from_json(err: &serde_json::Error, source: &str) -> Self {
        let line = err.line();
        let column = err.column();
        let byte = byte_offset(source, line, column);
        Error::Parse {
            message: err.to_string(),
            line,
            column,
            byte,
        }
    }
}

fn byte_offset(source: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut remaining = line - 1;
    let mut offset = 0;
    for (i, b) in source.bytes().enumerate() {
        if remaining == 0 {
            break;
        }
        if b == b'\n' {
            remaining -= 1;
            offset = i + 1;
        }
    }
    (offset + column.saturating_sub(1)).min(source.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_carries_byte_offset() {
        let text = "{\n  \"a\": oops\n}";
        let err = serde_json::from_str::<serde_json::Value>(text).unwrap_err();
        let wrapped = Error::from_json(&err, text);
        match wrapped {
            Error::Parse { line, byte, .. } => {
                assert_eq!(line, 2);
                // byte offset points into the second line
                assert!(byte > text.find('\n').unwrap());
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
