use num_bigint::BigUint;

use super::{Result, SetExprError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Nat(BigUint),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Pipe,
    Amp,
    Backslash,
    Slash,
    Arrow,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("'{s}'"),
            TokenKind::Nat(n) => format!("number {n}"),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Pipe => "'|'".into(),
            TokenKind::Amp => "'&'".into(),
            TokenKind::Backslash => "'\\'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Arrow => "'->'".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: usize,
}

/// Splits ASCII input into tokens; whitespace is dropped.
pub struct Lexer;

impl Lexer {
    pub fn tokenize(text: &str) -> Result<Vec<Token>> {
        let bytes = text.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if !c.is_ascii() {
                return Err(SetExprError::Syntax {
                    pos: i,
                    expected: vec!["ASCII input".into()],
                    found: "non-ASCII character".into(),
                });
            }
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            let kind = match c {
                b'(' => TokenKind::LParen,
                b')' => TokenKind::RParen,
                b'{' => TokenKind::LBrace,
                b'}' => TokenKind::RBrace,
                b',' => TokenKind::Comma,
                b'|' => TokenKind::Pipe,
                b'&' => TokenKind::Amp,
                b'\\' => TokenKind::Backslash,
                b'/' => TokenKind::Slash,
                b'-' if bytes.get(i + 1) == Some(&b'>') => {
                    i += 1;
                    TokenKind::Arrow
                }
                b'0'..=b'9' => {
                    while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                        i += 1;
                    }
                    let digits = &text[start..=i];
                    TokenKind::Nat(digits.parse().expect("ascii digits"))
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i + 1 < bytes.len()
                        && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                    {
                        i += 1;
                    }
                    TokenKind::Ident(text[start..=i].to_string())
                }
                other => {
                    return Err(SetExprError::Syntax {
                        pos: i,
                        expected: vec!["a token".into()],
                        found: format!("'{}'", other as char),
                    })
                }
            };
            out.push(Token { kind, pos: start });
            i += 1;
        }
        out.push(Token {
            kind: TokenKind::Eof,
            pos: text.len(),
        });
        Ok(out)
    }
}
