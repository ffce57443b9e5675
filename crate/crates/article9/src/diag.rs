//! Diagnostics for lexing, parsing, and schema lowering.
//!
//! Codes are stable and unique per failure class: `E0xx` for lexical and
//! parse failures, `E1xx` for schema violations found while lowering the
//! syntax tree into the typed register. Messages never embed file paths;
//! callers prefix the path when printing.

use std::fmt;

use crate::span::Span;

/// Stable diagnostic code catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// E001: string literal not closed before end of line or input.
    UnterminatedString,
    /// E002: character that cannot start any token.
    InvalidCharacter,
    /// E003: digits that form neither a number nor a calendar date.
    MalformedNumberOrDate,
    /// E004: escape sequence other than `\"`, `\\`, `\n`.
    InvalidEscape,
    /// E010: block header not followed by `{`.
    ExpectedLBrace,
    /// E011: end of input inside an open block.
    UnclosedBlock,
    /// E012: `:` not followed by a value.
    ExpectedValue,
    /// E013: trailing comma in a list (disallowed).
    TrailingComma,
    /// E014: token where an identifier must begin an item.
    ExpectedIdentifier,
    /// E015: identifier followed by neither `:` nor a block opener.
    ExpectedFieldOrBlock,
    /// E016: list element not followed by `,` or `]`.
    ExpectedCommaOrBracket,
    /// E101: required top-level block absent.
    MissingRequiredBlock,
    /// E102: key (or singleton block) given twice.
    DuplicateKey,
    /// E103: value outside its permitted range.
    ValueOutOfRange,
    /// E104: identifier not in the field's enum.
    UnknownEnumValue,
    /// E105: measure target that names no hazard.
    DanglingMeasureTarget,
    /// E106: hazard or measure id used twice.
    DuplicateId,
    /// E107: required field or block label absent.
    MissingRequiredField,
    /// E108: value of the wrong type for its key.
    WrongValueType,
    /// E109: key or block keyword not in the schema.
    UnknownKey,
    /// E110: fields that are individually valid but jointly not.
    InvalidFieldCombination,
}

impl Code {
    pub fn as_str(&self) -> &'static str {
        match self {
            Code::UnterminatedString => "E001",
            Code::InvalidCharacter => "E002",
            Code::MalformedNumberOrDate => "E003",
            Code::InvalidEscape => "E004",
            Code::ExpectedLBrace => "E010",
            Code::UnclosedBlock => "E011",
            Code::ExpectedValue => "E012",
            Code::TrailingComma => "E013",
            Code::ExpectedIdentifier => "E014",
            Code::ExpectedFieldOrBlock => "E015",
            Code::ExpectedCommaOrBracket => "E016",
            Code::MissingRequiredBlock => "E101",
            Code::DuplicateKey => "E102",
            Code::ValueOutOfRange => "E103",
            Code::UnknownEnumValue => "E104",
            Code::DanglingMeasureTarget => "E105",
            Code::DuplicateId => "E106",
            Code::MissingRequiredField => "E107",
            Code::WrongValueType => "E108",
            Code::UnknownKey => "E109",
            Code::InvalidFieldCombination => "E110",
        }
    }

    /// True for lexical/parse codes (`E0xx`), false for schema codes (`E1xx`).
    pub fn is_syntax(&self) -> bool {
        self.as_str().starts_with("E0")
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One reported failure with its source location. All diagnostics are
/// errors; recoverable conditions are modelled as conformity findings, not
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "error[{}] {}: {}",
            self.code.as_str(),
            self.span,
            self.message
        )
    }
}
