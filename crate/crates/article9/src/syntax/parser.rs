//! Recursive-descent parser over the token stream.
//!
//! Grammar:
//!
//! ```text
//! document := { block } ;
//! block    := IDENT [ STRING ] "{" { field | block } "}" ;
//! field    := IDENT ":" value ;
//! value    := STRING | NUMBER | DATE | BOOL | IDENT | list ;
//! list     := "[" [ value { "," value } ] "]" ;
//! ```
//!
//! On error the parser records a diagnostic and resumes at the next
//! top-level block, so one pass reports every problem in the document.

use crate::diag::{Code, Diagnostic};
use crate::span::Span;
use crate::syntax::ast::{Block, Field, Item, SyntaxTree, Value};
use crate::syntax::lexer::{Token, TokenKind};

/// Parses a token stream into a syntax tree, or reports all diagnostics
/// found. `end_span` anchors end-of-input errors (see
/// [`crate::syntax::lexer::end_of_input_span`]).
pub fn parse(tokens: &[Token], end_span: Span) -> Result<SyntaxTree, Vec<Diagnostic>> {
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        diags: Vec::new(),
        end_span,
    };
    let tree = p.document();
    if p.diags.is_empty() {
        Ok(tree)
    } else {
        Err(p.diags)
    }
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
    end_span: Span,
}

// Internal parse failure; the diagnostic is already recorded.
struct Bail;

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek2(&self) -> Option<&'t Token> {
        self.toks.get(self.pos + 1)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> Span {
        self.peek().map(|t| t.span).unwrap_or(self.end_span)
    }

    fn error(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, span, msg));
    }

    fn document(&mut self) -> SyntaxTree {
        let mut blocks = Vec::new();
        while let Some(tok) = self.peek() {
            if matches!(tok.kind, TokenKind::Identifier) {
                match self.block() {
                    Ok(b) => blocks.push(b),
                    Err(Bail) => self.recover_to_top_level(),
                }
            } else {
                let span = tok.span;
                let desc = tok.kind.describe();
                self.error(
                    Code::ExpectedIdentifier,
                    span,
                    format!("expected block keyword, found {desc}"),
                );
                self.bump();
                self.recover_to_top_level();
            }
        }
        SyntaxTree { blocks }
    }

    /// Skips forward to something that plausibly starts a new top-level
    /// block: past the unbalanced close brace of the broken block, or to an
    /// identifier followed by a label or `{` once brace depth is spent.
    fn recover_to_top_level(&mut self) {
        let mut depth: i32 = 0;
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::LBrace => {
                    depth += 1;
                    self.bump();
                }
                TokenKind::RBrace => {
                    self.bump();
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                }
                TokenKind::Identifier if depth <= 0 => {
                    if matches!(
                        self.peek2().map(|t| &t.kind),
                        Some(TokenKind::Str(_)) | Some(TokenKind::LBrace)
                    ) {
                        return;
                    }
                    self.bump();
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn block(&mut self) -> Result<Block, Bail> {
        let kw_tok = self.bump().expect("caller checked identifier");
        let keyword = kw_tok.lexeme.clone();
        let start = kw_tok.span;

        let label = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Str(s)) => {
                let s = s.clone();
                self.bump();
                Some(s)
            }
            _ => None,
        };

        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::LBrace) => {
                self.bump();
            }
            _ => {
                let span = self.here();
                self.error(
                    Code::ExpectedLBrace,
                    span,
                    format!("expected `{{` to open block `{keyword}`"),
                );
                return Err(Bail);
            }
        }

        let mut items = Vec::new();
        loop {
            match self.peek() {
                None => {
                    self.error(
                        Code::UnclosedBlock,
                        self.end_span,
                        format!("unclosed block `{keyword}`"),
                    );
                    return Err(Bail);
                }
                Some(tok) if matches!(tok.kind, TokenKind::RBrace) => {
                    let close = self.bump().unwrap();
                    return Ok(Block {
                        keyword,
                        label,
                        items,
                        span: start.to(close.span),
                    });
                }
                Some(tok) if matches!(tok.kind, TokenKind::Identifier) => {
                    match self.peek2().map(|t| &t.kind) {
                        Some(TokenKind::Colon) => match self.field() {
                            Ok(f) => items.push(Item::Field(f)),
                            Err(Bail) => self.recover_in_block(),
                        },
                        Some(TokenKind::Str(_)) | Some(TokenKind::LBrace) => {
                            items.push(Item::Block(self.block()?));
                        }
                        _ => {
                            let span = tok.span;
                            let name = tok.lexeme.clone();
                            self.error(
                                Code::ExpectedFieldOrBlock,
                                span,
                                format!("expected `:`, a label, or `{{` after `{name}`"),
                            );
                            self.bump();
                            self.recover_in_block();
                        }
                    }
                }
                Some(tok) => {
                    let span = tok.span;
                    let desc = tok.kind.describe();
                    self.error(
                        Code::ExpectedIdentifier,
                        span,
                        format!("expected a field, nested block, or `}}`, found {desc}"),
                    );
                    self.bump();
                    self.recover_in_block();
                }
            }
        }
    }

    /// After a broken field, skips to the next plausible item boundary at
    /// this block's depth without consuming the block's own close brace.
    fn recover_in_block(&mut self) {
        let mut depth: i32 = 0;
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::Identifier if depth == 0 => return,
                TokenKind::RBrace if depth == 0 => return,
                TokenKind::LBrace => {
                    depth += 1;
                    self.bump();
                }
                TokenKind::RBrace => {
                    depth -= 1;
                    self.bump();
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn field(&mut self) -> Result<Field, Bail> {
        let key_tok = self.bump().expect("caller checked identifier");
        let key = key_tok.lexeme.clone();
        let start = key_tok.span;
        self.bump().expect("caller checked colon");
        let (value, end) = self.value()?;
        Ok(Field {
            key,
            value,
            span: start.to(end),
        })
    }

    fn value(&mut self) -> Result<(Value, Span), Bail> {
        match self.peek().map(|t| (&t.kind, t.span)) {
            Some((TokenKind::Str(s), span)) => {
                let v = Value::Str(s.clone());
                self.bump();
                Ok((v, span))
            }
            Some((TokenKind::Number(n), span)) => {
                let v = Value::Number(*n);
                self.bump();
                Ok((v, span))
            }
            Some((TokenKind::Date(d), span)) => {
                let v = Value::Date(*d);
                self.bump();
                Ok((v, span))
            }
            Some((TokenKind::Bool(b), span)) => {
                let v = Value::Bool(*b);
                self.bump();
                Ok((v, span))
            }
            Some((TokenKind::Identifier, span)) => {
                let v = Value::Ident(self.peek().unwrap().lexeme.clone());
                self.bump();
                Ok((v, span))
            }
            Some((TokenKind::LBracket, _)) => self.list(),
            Some((kind, span)) => {
                let desc = kind.describe();
                self.error(
                    Code::ExpectedValue,
                    span,
                    format!("expected a value, found {desc}"),
                );
                Err(Bail)
            }
            None => {
                self.error(Code::ExpectedValue, self.end_span, "expected a value");
                Err(Bail)
            }
        }
    }

    fn list(&mut self) -> Result<(Value, Span), Bail> {
        let open = self.bump().expect("caller checked bracket");
        let start = open.span;
        let mut elems = Vec::new();

        if let Some(tok) = self.peek() {
            if matches!(tok.kind, TokenKind::RBracket) {
                let close = self.bump().unwrap();
                return Ok((Value::List(elems), start.to(close.span)));
            }
        }

        loop {
            let (v, _) = self.value()?;
            elems.push(v);
            match self.peek() {
                Some(tok) if matches!(tok.kind, TokenKind::Comma) => {
                    let comma_span = tok.span;
                    self.bump();
                    if let Some(next) = self.peek() {
                        if matches!(next.kind, TokenKind::RBracket) {
                            self.error(
                                Code::TrailingComma,
                                comma_span,
                                "trailing comma in list is not allowed",
                            );
                            let close = self.bump().unwrap();
                            return Ok((Value::List(elems), start.to(close.span)));
                        }
                    }
                }
                Some(tok) if matches!(tok.kind, TokenKind::RBracket) => {
                    let close = self.bump().unwrap();
                    return Ok((Value::List(elems), start.to(close.span)));
                }
                Some(tok) => {
                    let span = tok.span;
                    let desc = tok.kind.describe();
                    self.error(
                        Code::ExpectedCommaOrBracket,
                        span,
                        format!("expected `,` or `]` in list, found {desc}"),
                    );
                    return Err(Bail);
                }
                None => {
                    self.error(
                        Code::ExpectedCommaOrBracket,
                        self.end_span,
                        "expected `,` or `]` before end of input",
                    );
                    return Err(Bail);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::lexer::{end_of_input_span, tokenize};

    fn parse_src(src: &str) -> Result<SyntaxTree, Vec<Diagnostic>> {
        let toks = tokenize(src).unwrap();
        parse(&toks, end_of_input_span(src))
    }

    #[test]
    fn single_block_single_field() {
        let tree = parse_src("policy { overall_threshold: 0.5 }").unwrap();
        assert_eq!(tree.blocks.len(), 1);
        let b = &tree.blocks[0];
        assert_eq!(b.keyword, "policy");
        assert_eq!(b.label, None);
        assert_eq!(b.items.len(), 1);
        match &b.items[0] {
            Item::Field(f) => {
                assert_eq!(f.key, "overall_threshold");
                assert_eq!(f.value, Value::Number(0.5));
            }
            _ => panic!("expected field"),
        }
    }

    #[test]
    fn nested_block_depth_two() {
        let tree = parse_src(r#"system "x" { hazard "h1" { severity: serious } }"#).unwrap();
        let sys = &tree.blocks[0];
        assert_eq!(sys.label.as_deref(), Some("x"));
        match &sys.items[0] {
            Item::Block(hz) => {
                assert_eq!(hz.keyword, "hazard");
                assert_eq!(hz.label.as_deref(), Some("h1"));
                match &hz.items[0] {
                    Item::Field(f) => assert_eq!(f.value, Value::Ident("serious".into())),
                    _ => panic!("expected field"),
                }
            }
            _ => panic!("expected nested block"),
        }
    }

    #[test]
    fn unclosed_block_is_e011_at_end_of_input() {
        let src = r#"system "x" {"#;
        let diags = parse_src(src).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, Code::UnclosedBlock);
        assert_eq!(diags[0].span.offset, src.len());
        assert_eq!(diags[0].span.len, 0);
    }

    #[test]
    fn missing_brace_is_e010() {
        let diags = parse_src(r#"system "x" severity: 1"#).unwrap_err();
        assert_eq!(diags[0].code, Code::ExpectedLBrace);
    }

    #[test]
    fn missing_value_is_e012() {
        let diags = parse_src("policy { a: }").unwrap_err();
        assert_eq!(diags[0].code, Code::ExpectedValue);
    }

    #[test]
    fn trailing_comma_is_e013() {
        let diags = parse_src("policy { xs: [1, 2,] }").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, Code::TrailingComma);
    }

    #[test]
    fn empty_and_nested_lists_parse() {
        let tree = parse_src("a { xs: [] ys: [[1], [2, 3]] }").unwrap();
        match &tree.blocks[0].items[1] {
            Item::Field(f) => match &f.value {
                Value::List(outer) => assert_eq!(outer.len(), 2),
                _ => panic!("expected list"),
            },
            _ => panic!("expected field"),
        }
    }

    #[test]
    fn recovery_reports_errors_in_every_block() {
        let src = "alpha { a: }\nbeta { b: [1,] }\ngamma { ok: 1 }";
        let diags = parse_src(src).unwrap_err();
        let codes: Vec<Code> = diags.iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![Code::ExpectedValue, Code::TrailingComma]);
    }

    #[test]
    fn spans_nest_within_parents() {
        let src = r#"system "x" { hazard "h" { p: 0.5 } q: true }"#;
        let tree = parse_src(src).unwrap();
        let sys = &tree.blocks[0];
        for item in &sys.items {
            let child = match item {
                Item::Field(f) => f.span,
                Item::Block(b) => b.span,
            };
            assert!(child.offset >= sys.span.offset);
            assert!(child.end() <= sys.span.end());
        }
    }

    #[test]
    fn empty_document_parses_to_empty_tree() {
        let tree = parse_src("").unwrap();
        assert!(tree.blocks.is_empty());
        let tree = parse_src("# only a comment\n").unwrap();
        assert!(tree.blocks.is_empty());
    }
}
