//! Line-oriented lexer for `.lne` sources.
//!
//! The grammar is indentation-insensitive: statements end at newlines, and
//! `#` starts a comment running to the end of the line.

use super::diagnostics::{Diagnostic, DiagnosticCode};
use crate::logic::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(Rational),
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Arrow,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Le,
    Ge,
    EqEq,
    Newline,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

pub fn lex(source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    for (line_idx, raw_line) in source.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let line_had_tokens = tokens.last().map(|t: &Token| t.line == line_no).unwrap_or(false);
        let _ = line_had_tokens;
        let start_len = tokens.len();
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            match c {
                ' ' | '\t' | '\r' => i += 1,
                '(' => { tokens.push(tok(TokenKind::LParen, line_no, col)); i += 1 }
                ')' => { tokens.push(tok(TokenKind::RParen, line_no, col)); i += 1 }
                '[' => { tokens.push(tok(TokenKind::LBracket, line_no, col)); i += 1 }
                ']' => { tokens.push(tok(TokenKind::RBracket, line_no, col)); i += 1 }
                '{' => { tokens.push(tok(TokenKind::LBrace, line_no, col)); i += 1 }
                '}' => { tokens.push(tok(TokenKind::RBrace, line_no, col)); i += 1 }
                ',' => { tokens.push(tok(TokenKind::Comma, line_no, col)); i += 1 }
                ':' => { tokens.push(tok(TokenKind::Colon, line_no, col)); i += 1 }
                '.' if i + 1 >= chars.len() || !chars[i + 1].is_ascii_digit() => {
                    tokens.push(tok(TokenKind::Dot, line_no, col));
                    i += 1
                }
                '+' => { tokens.push(tok(TokenKind::Plus, line_no, col)); i += 1 }
                '*' => { tokens.push(tok(TokenKind::Star, line_no, col)); i += 1 }
                '/' => { tokens.push(tok(TokenKind::Slash, line_no, col)); i += 1 }
                '-' => {
                    if i + 1 < chars.len() && chars[i + 1] == '>' {
                        tokens.push(tok(TokenKind::Arrow, line_no, col));
                        i += 2;
                    } else {
                        tokens.push(tok(TokenKind::Minus, line_no, col));
                        i += 1;
                    }
                }
                '<' => {
                    if i + 1 < chars.len() && chars[i + 1] == '=' {
                        tokens.push(tok(TokenKind::Le, line_no, col));
                        i += 2;
                    } else {
                        diags.push(Diagnostic::error(
                            DiagnosticCode::LexError,
                            line_no,
                            col,
                            "strict '<' is not part of the comparison grammar; use '<='",
                        ));
                        i += 1;
                    }
                }
                '>' => {
                    if i + 1 < chars.len() && chars[i + 1] == '=' {
                        tokens.push(tok(TokenKind::Ge, line_no, col));
                        i += 2;
                    } else {
                        diags.push(Diagnostic::error(
                            DiagnosticCode::LexError,
                            line_no,
                            col,
                            "strict '>' is not part of the comparison grammar; use '>='",
                        ));
                        i += 1;
                    }
                }
                '=' => {
                    if i + 1 < chars.len() && chars[i + 1] == '=' {
                        tokens.push(tok(TokenKind::EqEq, line_no, col));
                        i += 2;
                    } else {
                        tokens.push(tok(TokenKind::Assign, line_no, col));
                        i += 1;
                    }
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let start = i;
                    let mut saw_dot = false;
                    while i < chars.len() && (chars[i].is_ascii_digit() || (chars[i] == '.' && !saw_dot)) {
                        if chars[i] == '.' {
                            saw_dot = true;
                        }
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    match parse_number(&text) {
                        Some(r) => tokens.push(tok(TokenKind::Number(r), line_no, start + 1)),
                        None => diags.push(Diagnostic::error(
                            DiagnosticCode::LexError,
                            line_no,
                            start + 1,
                            format!("malformed number literal '{}'", text),
                        )),
                    }
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    tokens.push(tok(TokenKind::Ident(text), line_no, start + 1));
                }
                other => {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::LexError,
                        line_no,
                        col,
                        format!("unexpected character '{}'", other),
                    ));
                    i += 1;
                }
            }
        }
        if tokens.len() > start_len {
            tokens.push(tok(TokenKind::Newline, line_no, chars.len() + 1));
        }
    }
    let last_line = source.lines().count();
    tokens.push(tok(TokenKind::Eof, last_line + 1, 1));

    if diags.is_empty() {
        Ok(tokens)
    } else {
        Err(diags)
    }
}

fn tok(kind: TokenKind, line: usize, col: usize) -> Token {
    Token { kind, line, col }
}

/// Decimal literals become exact rationals: `0.5` is 1/2.
fn parse_number(text: &str) -> Option<Rational> {
    if let Some(dot) = text.find('.') {
        let int_part = &text[..dot];
        let frac_part = &text[dot + 1..];
        if frac_part.is_empty() || frac_part.len() > 12 {
            return None;
        }
        let int_v: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
        let frac_v: i64 = frac_part.parse().ok()?;
        let den = 10i64.checked_pow(frac_part.len() as u32)?;
        Some(Rational::new(int_v * den + frac_v, den))
    } else {
        text.parse::<i64>().ok().map(Rational::from_integer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_assignment_line() {
        let toks = lex("x: Strategy1 = Random1()").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| &t.kind).collect();
        assert!(matches!(kinds[0], TokenKind::Ident(s) if s == "x"));
        assert!(kinds.iter().any(|k| matches!(k, TokenKind::Assign)));
    }

    #[test]
    fn decimal_literals_are_exact() {
        let toks = lex("0.25").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Number(Rational::new(1, 4)));
    }

    #[test]
    fn strict_inequality_is_a_lex_error() {
        let err = lex("a < b").unwrap_err();
        assert_eq!(err[0].code, DiagnosticCode::LexError);
        assert_eq!(err[0].line, 1);
    }
}
