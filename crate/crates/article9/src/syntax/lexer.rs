//! Lexer for the register DSL.
//!
//! Comments run from `#` to end of line and produce no tokens. Every
//! token's lexeme is the exact source slice it was read from, so
//! concatenating lexemes plus skipped whitespace/comments reproduces the
//! input.

use chrono::NaiveDate;

use crate::diag::{Code, Diagnostic};
use crate::span::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Identifier,
    Str(String),
    Number(f64),
    Date(NaiveDate),
    Bool(bool),
    Colon,
    Comma,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
}

impl TokenKind {
    pub fn describe(&self) -> &'static str {
        match self {
            TokenKind::Identifier => "identifier",
            TokenKind::Str(_) => "string",
            TokenKind::Number(_) => "number",
            TokenKind::Date(_) => "date",
            TokenKind::Bool(_) => "bool",
            TokenKind::Colon => "`:`",
            TokenKind::Comma => "`,`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

/// Lexes `source` into tokens, or reports every lexical failure found.
pub fn tokenize(source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut lx = Lexer::new(source);
    lx.run();
    if lx.diags.is_empty() {
        Ok(lx.tokens)
    } else {
        Err(lx.diags)
    }
}

/// Position just past the final character; anchor for end-of-input errors.
pub fn end_of_input_span(source: &str) -> Span {
    let mut line = 1u32;
    let mut col = 1u32;
    for ch in source.chars() {
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    Span::new(line, col, source.len(), 0)
}

struct Lexer<'s> {
    src: &'s str,
    chars: Vec<(usize, char)>,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    diags: Vec<Diagnostic>,
}

impl<'s> Lexer<'s> {
    fn new(src: &'s str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().collect(),
            pos: 0,
            line: 1,
            col: 1,
            tokens: Vec::new(),
            diags: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn byte_offset(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(o, _)| o)
            .unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let &(_, c) = self.chars.get(self.pos)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.byte_offset(), self.line, self.col)
    }

    fn span_from(&self, mark: (usize, u32, u32)) -> Span {
        Span::new(mark.1, mark.2, mark.0, self.byte_offset() - mark.0)
    }

    fn lexeme_from(&self, mark: (usize, u32, u32)) -> String {
        self.src[mark.0..self.byte_offset()].to_string()
    }

    fn push(&mut self, kind: TokenKind, mark: (usize, u32, u32)) {
        self.tokens.push(Token {
            kind,
            lexeme: self.lexeme_from(mark),
            span: self.span_from(mark),
        });
    }

    fn error(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, span, msg));
    }

    fn run(&mut self) {
        while let Some(c) = self.peek() {
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                }
                '#' => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '"' => self.string(),
                '0'..='9' => self.number_or_date(),
                c if c.is_ascii_alphabetic() || c == '_' => self.identifier(),
                ':' => self.punct(TokenKind::Colon),
                ',' => self.punct(TokenKind::Comma),
                '{' => self.punct(TokenKind::LBrace),
                '}' => self.punct(TokenKind::RBrace),
                '[' => self.punct(TokenKind::LBracket),
                ']' => self.punct(TokenKind::RBracket),
                other => {
                    let mark = self.mark();
                    self.bump();
                    let span = self.span_from(mark);
                    self.error(
                        Code::InvalidCharacter,
                        span,
                        format!("invalid character `{other}`"),
                    );
                }
            }
        }
    }

    fn punct(&mut self, kind: TokenKind) {
        let mark = self.mark();
        self.bump();
        self.push(kind, mark);
    }

    fn identifier(&mut self) {
        let mark = self.mark();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.bump();
            } else {
                break;
            }
        }
        let text = self.lexeme_from(mark);
        let kind = match text.as_str() {
            "true" => TokenKind::Bool(true),
            "false" => TokenKind::Bool(false),
            _ => TokenKind::Identifier,
        };
        self.push(kind, mark);
    }

    fn string(&mut self) {
        let mark = self.mark();
        self.bump(); // opening quote
        let mut value = String::new();
        loop {
            match self.peek() {
                None | Some('\n') => {
                    let span = self.span_from(mark);
                    self.error(Code::UnterminatedString, span, "unterminated string");
                    return;
                }
                Some('"') => {
                    self.bump();
                    self.push(TokenKind::Str(value), mark);
                    return;
                }
                Some('\\') => {
                    let esc_mark = self.mark();
                    self.bump();
                    match self.peek() {
                        Some('"') => {
                            value.push('"');
                            self.bump();
                        }
                        Some('\\') => {
                            value.push('\\');
                            self.bump();
                        }
                        Some('n') => {
                            value.push('\n');
                            self.bump();
                        }
                        Some(other) if other != '\n' => {
                            self.bump();
                            let span = self.span_from(esc_mark);
                            self.error(
                                Code::InvalidEscape,
                                span,
                                format!("invalid escape sequence `\\{other}`"),
                            );
                            value.push(other);
                        }
                        _ => {
                            let span = self.span_from(mark);
                            self.error(Code::UnterminatedString, span, "unterminated string");
                            return;
                        }
                    }
                }
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
    }

    fn digits(&mut self) -> usize {
        let mut n = 0;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                self.bump();
                n += 1;
            } else {
                break;
            }
        }
        n
    }

    /// Numbers are decimal with an optional fraction; dates are bare
    /// `YYYY-MM-DD`. Both start with a digit, so the shape after the first
    /// digit run decides which one we are reading.
    fn number_or_date(&mut self) {
        let mark = self.mark();
        let leading = self.digits();
        match self.peek() {
            Some('-') => {
                // date: exactly 4-2-2 digits
                self.bump();
                let month = self.digits();
                let dash2 = self.peek() == Some('-');
                if dash2 {
                    self.bump();
                }
                let day = self.digits();
                self.consume_word_tail();
                let span = self.span_from(mark);
                let text = self.lexeme_from(mark);
                if leading != 4 || month != 2 || !dash2 || day != 2 || span.len != 10 {
                    self.error(
                        Code::MalformedNumberOrDate,
                        span,
                        format!("malformed date `{text}`; expected YYYY-MM-DD"),
                    );
                    return;
                }
                let y: i32 = text[0..4].parse().unwrap();
                let m: u32 = text[5..7].parse().unwrap();
                let d: u32 = text[8..10].parse().unwrap();
                match NaiveDate::from_ymd_opt(y, m, d) {
                    Some(date) => self.push(TokenKind::Date(date), mark),
                    None => self.error(
                        Code::MalformedNumberOrDate,
                        span,
                        format!("`{text}` is not a calendar date"),
                    ),
                }
            }
            Some('.') => {
                self.bump();
                let frac = self.digits();
                self.consume_word_tail();
                let span = self.span_from(mark);
                let text = self.lexeme_from(mark);
                if frac == 0 || text.parse::<f64>().is_err() {
                    self.error(
                        Code::MalformedNumberOrDate,
                        span,
                        format!("malformed number `{text}`"),
                    );
                    return;
                }
                let value: f64 = text.parse().unwrap();
                self.push(TokenKind::Number(value), mark);
            }
            _ => {
                self.consume_word_tail();
                let span = self.span_from(mark);
                let text = self.lexeme_from(mark);
                match text.parse::<f64>() {
                    Ok(value) => self.push(TokenKind::Number(value), mark),
                    Err(_) => self.error(
                        Code::MalformedNumberOrDate,
                        span,
                        format!("malformed number `{text}`"),
                    ),
                }
            }
        }
    }

    /// Consumes any alphanumeric/`_`/`.`/`-` run glued to a number or date
    /// so that inputs like `12abc` or `1.2.3` fail as one token instead of
    /// silently splitting.
    fn consume_word_tail(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' {
                self.bump();
            } else {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn codes(src: &str) -> Vec<Code> {
        tokenize(src).unwrap_err().into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn lexes_block_header() {
        let toks = tokenize(r#"system "cv" {}"#).unwrap();
        let got: Vec<&str> = toks.iter().map(|t| t.kind.describe()).collect();
        assert_eq!(got, ["identifier", "string", "`{`", "`}`"]);
        assert_eq!(toks[0].lexeme, "system");
        assert_eq!(toks[1].kind, TokenKind::Str("cv".to_string()));
    }

    #[test]
    fn empty_input_yields_no_tokens() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn comment_produces_no_tokens() {
        assert_eq!(
            kinds("p: 0.05 # note"),
            vec![
                TokenKind::Identifier,
                TokenKind::Colon,
                TokenKind::Number(0.05)
            ]
        );
    }

    #[test]
    fn lexes_dates_and_bools() {
        assert_eq!(
            kinds("2023-03-01 true false"),
            vec![
                TokenKind::Date(NaiveDate::from_ymd_opt(2023, 3, 1).unwrap()),
                TokenKind::Bool(true),
                TokenKind::Bool(false)
            ]
        );
    }

    #[test]
    fn unterminated_string_is_e001() {
        assert_eq!(codes("\"abc"), vec![Code::UnterminatedString]);
        assert_eq!(codes("\"abc\nx: 1"), vec![Code::UnterminatedString]);
    }

    #[test]
    fn invalid_character_is_e002() {
        assert_eq!(codes("a: @"), vec![Code::InvalidCharacter]);
    }

    #[test]
    fn malformed_numbers_and_dates_are_e003() {
        assert_eq!(codes("12abc"), vec![Code::MalformedNumberOrDate]);
        assert_eq!(codes("0."), vec![Code::MalformedNumberOrDate]);
        assert_eq!(codes("1.2.3"), vec![Code::MalformedNumberOrDate]);
        assert_eq!(codes("23-01-05"), vec![Code::MalformedNumberOrDate]);
        assert_eq!(codes("2023-13-01"), vec![Code::MalformedNumberOrDate]);
        assert_eq!(codes("2023-02-30"), vec![Code::MalformedNumberOrDate]);
    }

    #[test]
    fn invalid_escape_is_e004() {
        assert_eq!(codes(r#""a\tb""#), vec![Code::InvalidEscape]);
    }

    #[test]
    fn string_escapes_decode() {
        let toks = tokenize(r#""a\"b\\c\nd""#).unwrap();
        assert_eq!(toks[0].kind, TokenKind::Str("a\"b\\c\nd".to_string()));
    }

    #[test]
    fn lexemes_are_source_slices() {
        let src = "hazard \"h1\" {\n  exposure: 0.5 # x\n}\n";
        for tok in tokenize(src).unwrap() {
            assert_eq!(
                &src[tok.span.offset..tok.span.end()],
                tok.lexeme,
                "lexeme must be the exact source slice"
            );
        }
    }

    #[test]
    fn spans_are_monotone() {
        let src = "a: 1\nb: [2, 3]\nc \"l\" { d: 2024-01-02 }";
        let toks = tokenize(src).unwrap();
        for pair in toks.windows(2) {
            assert!(pair[0].span.offset <= pair[1].span.offset);
        }
    }

    #[test]
    fn reports_multiple_lexical_errors() {
        let ds = codes("@ $");
        assert_eq!(ds, vec![Code::InvalidCharacter, Code::InvalidCharacter]);
    }
}
