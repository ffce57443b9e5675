//! Lexing, parsing, and canonical serialization of `.a9r` register
//! documents into a generic block/field syntax tree with source spans.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod serializer;

pub use ast::{Block, Field, Item, SyntaxTree, Value};
pub use lexer::{end_of_input_span, tokenize, Token, TokenKind};
pub use parser::parse;
pub use serializer::serialize;

use crate::diag::Diagnostic;

/// Tokenizes and parses in one step.
pub fn parse_source(source: &str) -> Result<SyntaxTree, Vec<Diagnostic>> {
    let tokens = tokenize(source)?;
    parse(&tokens, end_of_input_span(source))
}
