//! Source positions shared by the lexer, parser, and diagnostics.

use std::fmt;

/// A contiguous byte range in the source text, plus the 1-based line and
/// column of its first character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub offset: usize,
    pub len: usize,
}

impl Span {
    /// Zero-length anchor at the very start of the document. Used for
    /// findings that point at something absent rather than present.
    pub const DOCUMENT_START: Span = Span {
        line: 1,
        column: 1,
        offset: 0,
        len: 0,
    };

    pub fn new(line: u32, column: u32, offset: usize, len: usize) -> Self {
        Span {
            line,
            column,
            offset,
            len,
        }
    }

    /// First byte past the end of the span.
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    /// Extends this span so it also covers `other`.
    pub fn to(self, other: Span) -> Span {
        debug_assert!(other.end() >= self.offset);
        Span {
            line: self.line,
            column: self.column,
            offset: self.offset,
            len: other.end() - self.offset,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
