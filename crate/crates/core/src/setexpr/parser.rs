//! Recursive descent parser for the set and function grammar.
//!
//! ```text
//! set  := "{" [point ("," point)*] "}" | "ap(" nat "," nat ")" | "range(" nat "," nat ")"
//!       | "evens" | "odds" | "squares" | "powers(" nat ")" | "blocks(" nat ")"
//!       | "block(" nat "," nat ")" | "tri" | "grid(" set "," set ")" | "row(" nat "," set ")"
//!       | "(" set "|" set ")" | "(" set "&" set ")" | "(" set "\" set ")"
//!       | "img(" func "," set ")" | "pre(" func "," set ")"
//!       | "tag0(" set ")" | "tag1(" set ")" | "qall" | "qball(" frac "," frac ")"
//! func := "id" | "proj1" | "proj2" | "pairc0" | "tagjoin(" func "," func ")"
//!       | "blockindex(" nat ")" | "cellindex(" partition ")"
//!       | "table{" (nat "->" point ",")* "default" "->" point "}"
//!       | "comp(" func "," func ")" | "qindex" | "mod(" nat ")" | "cantor"
//! partition := "dyadic" | "blocks(" nat ")"
//! frac := nat "/" nat ;  point := nat | "(" nat "," nat ")" | frac
//! ```

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::lexer::{Lexer, Token, TokenKind};
use super::{FuncExpr, Partition, Result, SetExpr, SetExprError};
use crate::point::{Frac, Nat, Point, Universe};

pub fn parse_set(text: &str) -> Result<SetExpr> {
    let mut p = Parser::new(text)?;
    let e = p.set()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_func(text: &str) -> Result<FuncExpr> {
    let mut p = Parser::new(text)?;
    let f = p.func()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_point(text: &str) -> Result<Point> {
    let mut p = Parser::new(text)?;
    let pt = p.point()?;
    p.finish()?;
    Ok(pt)
}

/// Token cursor shared with the ideal and witness descriptor parsers.
pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Parser> {
        Ok(Parser {
            tokens: Lexer::tokenize(text)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    pub fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn here(&self) -> usize {
        self.tokens[self.pos].pos
    }

    fn bump(&mut self) -> TokenKind {
        let t = self.tokens[self.pos].kind.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, expected: &[&str]) -> Result<T> {
        Err(SetExprError::Syntax {
            pos: self.here(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    pub fn expect(&mut self, kind: TokenKind) -> Result<()> {
        if *self.peek() == kind {
            self.bump();
            Ok(())
        } else {
            self.error(&[&kind.describe()])
        }
    }

    pub fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn finish(&self) -> Result<()> {
        if *self.peek() == TokenKind::Eof {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    pub fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    pub fn nat(&mut self) -> Result<Nat> {
        match self.peek().clone() {
            TokenKind::Nat(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error(&["natural number"]),
        }
    }

    pub fn nat_u64(&mut self) -> Result<u64> {
        let n = self.nat()?;
        n.to_u64()
            .ok_or_else(|| SetExprError::Parameter(format!("{n} does not fit in 64 bits")))
    }

    /// Separator between constructor arguments: `,` when more are due,
    /// reporting an arity error if the list closes early.
    pub fn arg_sep(&mut self, name: &str, expected: usize, seen: usize) -> Result<()> {
        match self.peek() {
            TokenKind::Comma => {
                self.bump();
                Ok(())
            }
            TokenKind::RParen => Err(SetExprError::Arity {
                name: name.into(),
                expected,
                found: seen,
            }),
            _ => self.error(&["','"]),
        }
    }

    /// Closes an argument list of `expected` arguments, counting extras.
    pub fn args_end(&mut self, name: &str, expected: usize) -> Result<()> {
        match self.peek() {
            TokenKind::RParen => {
                self.bump();
                Ok(())
            }
            TokenKind::Comma => {
                let mut found = expected;
                let mut depth = 0usize;
                loop {
                    match self.bump() {
                        TokenKind::LParen | TokenKind::LBrace => depth += 1,
                        TokenKind::RBrace => depth = depth.saturating_sub(1),
                        TokenKind::RParen if depth == 0 => break,
                        TokenKind::RParen => depth -= 1,
                        TokenKind::Comma if depth == 0 => found += 1,
                        TokenKind::Eof => return self.error(&["')'"]),
                        _ => {}
                    }
                }
                Err(SetExprError::Arity {
                    name: name.into(),
                    expected,
                    found,
                })
            }
            _ => self.error(&["')'"]),
        }
    }

    fn nat_args(&mut self, name: &str, count: usize) -> Result<Vec<Nat>> {
        self.expect(TokenKind::LParen)?;
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            if i > 0 {
                self.arg_sep(name, count, i)?;
            } else if *self.peek() == TokenKind::RParen {
                return Err(SetExprError::Arity {
                    name: name.into(),
                    expected: count,
                    found: 0,
                });
            }
            out.push(self.nat()?);
        }
        self.args_end(name, count)?;
        Ok(out)
    }

    pub fn frac(&mut self) -> Result<Frac> {
        let num = self.nat()?;
        self.expect(TokenKind::Slash)?;
        let den = self.nat()?;
        Frac::new(num, den)
    }

    pub fn point(&mut self) -> Result<Point> {
        match self.peek() {
            TokenKind::LParen => {
                self.bump();
                let a = self.nat()?;
                self.expect(TokenKind::Comma)?;
                let b = self.nat()?;
                self.expect(TokenKind::RParen)?;
                Ok(Point::Pair(a, b))
            }
            TokenKind::Nat(_) => {
                if *self.peek_at(1) == TokenKind::Slash {
                    Ok(Point::Frac(self.frac()?))
                } else {
                    Ok(Point::Nat(self.nat()?))
                }
            }
            _ => self.error(&["point"]),
        }
    }

    pub fn partition(&mut self) -> Result<Partition> {
        let name = self.ident()?;
        match name.as_str() {
            "dyadic" => Ok(Partition::Dyadic),
            "blocks" => {
                let args = self.nat_args("blocks", 1)?;
                let b = args[0]
                    .to_u64()
                    .filter(|b| *b >= 2)
                    .ok_or_else(|| SetExprError::Parameter("blocks base must be in [2, 2^64)".into()))?;
                Ok(Partition::Blocks(b))
            }
            _ => Err(SetExprError::Syntax {
                pos: self.tokens[self.pos.saturating_sub(1)].pos,
                expected: vec!["'dyadic'".into(), "'blocks'".into()],
                found: format!("'{name}'"),
            }),
        }
    }

    pub fn set(&mut self) -> Result<SetExpr> {
        match self.peek().clone() {
            TokenKind::LBrace => {
                self.bump();
                let mut points = Vec::new();
                if !self.eat(&TokenKind::RBrace) {
                    loop {
                        points.push(self.point()?);
                        if self.eat(&TokenKind::RBrace) {
                            break;
                        }
                        self.expect(TokenKind::Comma)?;
                    }
                }
                let universe = points
                    .first()
                    .map(Point::natural_universe)
                    .unwrap_or(Universe::Omega);
                SetExpr::finite(universe, points)
            }
            TokenKind::LParen => {
                self.bump();
                let a = self.set()?;
                let op = self.bump();
                let b = self.set()?;
                self.expect(TokenKind::RParen)?;
                match op {
                    TokenKind::Pipe => SetExpr::union(a, b),
                    TokenKind::Amp => SetExpr::inter(a, b),
                    TokenKind::Backslash => SetExpr::diff(a, b),
                    _ => {
                        self.pos -= 1;
                        self.error(&["'|'", "'&'", "'\\'"])
                    }
                }
            }
            TokenKind::Ident(name) => {
                self.bump();
                self.named_set(&name)
            }
            _ => self.error(&["set expression"]),
        }
    }

    fn named_set(&mut self, name: &str) -> Result<SetExpr> {
        match name {
            "evens" => Ok(SetExpr::Evens),
            "odds" => Ok(SetExpr::Odds),
            "squares" => Ok(SetExpr::Squares),
            "tri" => Ok(SetExpr::Tri),
            "qall" => Ok(SetExpr::QAll),
            "ap" => {
                let a = self.nat_args(name, 2)?;
                SetExpr::ap(a[0].clone(), a[1].clone())
            }
            "range" => {
                let a = self.nat_args(name, 2)?;
                Ok(SetExpr::Range(a[0].clone(), a[1].clone()))
            }
            "powers" => {
                let a = self.nat_args(name, 1)?;
                SetExpr::powers(a[0].clone())
            }
            "blocks" => {
                let a = self.nat_args(name, 1)?;
                SetExpr::blocks(a[0].clone())
            }
            "block" => {
                let a = self.nat_args(name, 2)?;
                SetExpr::block(a[0].clone(), a[1].clone())
            }
            "grid" => {
                self.expect(TokenKind::LParen)?;
                let a = self.set()?;
                self.arg_sep(name, 2, 1)?;
                let b = self.set()?;
                self.args_end(name, 2)?;
                SetExpr::grid(a, b)
            }
            "row" => {
                self.expect(TokenKind::LParen)?;
                let m = self.nat()?;
                self.arg_sep(name, 2, 1)?;
                let e = self.set()?;
                self.args_end(name, 2)?;
                SetExpr::row(m, e)
            }
            "img" | "pre" => {
                self.expect(TokenKind::LParen)?;
                let f = self.func()?;
                self.arg_sep(name, 2, 1)?;
                let e = self.set()?;
                self.args_end(name, 2)?;
                if name == "img" {
                    SetExpr::image(f, e)
                } else {
                    SetExpr::preimage(f, e)
                }
            }
            "tag0" | "tag1" => {
                self.expect(TokenKind::LParen)?;
                let e = self.set()?;
                self.args_end(name, 1)?;
                if name == "tag0" {
                    SetExpr::tag0(e)
                } else {
                    SetExpr::tag1(e)
                }
            }
            "qball" => {
                self.expect(TokenKind::LParen)?;
                let c = self.frac()?;
                self.arg_sep(name, 2, 1)?;
                let r = self.frac()?;
                self.args_end(name, 2)?;
                Ok(SetExpr::QBall(c, r))
            }
            other => Err(SetExprError::Syntax {
                pos: self.tokens[self.pos.saturating_sub(1)].pos,
                expected: vec!["set constructor".into()],
                found: format!("'{other}'"),
            }),
        }
    }

    pub fn func(&mut self) -> Result<FuncExpr> {
        let name = self.ident()?;
        match name.as_str() {
            "id" => Ok(FuncExpr::Id(Universe::Omega)),
            "proj1" => Ok(FuncExpr::Proj1),
            "proj2" => Ok(FuncExpr::Proj2),
            "pairc0" => Ok(FuncExpr::PairC0),
            "qindex" => Ok(FuncExpr::QIndex),
            "cantor" => Ok(FuncExpr::Cantor),
            "blockindex" => {
                let a = self.nat_args(&name, 1)?;
                FuncExpr::block_index(a[0].clone())
            }
            "mod" => {
                let a = self.nat_args(&name, 1)?;
                FuncExpr::modulo(a[0].clone())
            }
            "cellindex" => {
                self.expect(TokenKind::LParen)?;
                let p = self.partition()?;
                self.args_end(&name, 1)?;
                Ok(FuncExpr::CellIndex(p))
            }
            "tagjoin" | "comp" => {
                self.expect(TokenKind::LParen)?;
                let f = self.func()?;
                self.arg_sep(&name, 2, 1)?;
                let g = self.func()?;
                self.args_end(&name, 2)?;
                if name == "comp" {
                    FuncExpr::compose(f, g)
                } else {
                    FuncExpr::tag_join(f, g)
                }
            }
            "table" => {
                self.expect(TokenKind::LBrace)?;
                let mut entries = BTreeMap::new();
                loop {
                    if let TokenKind::Ident(s) = self.peek() {
                        if s == "default" {
                            self.bump();
                            self.expect(TokenKind::Arrow)?;
                            let default = self.point()?;
                            self.expect(TokenKind::RBrace)?;
                            return FuncExpr::table(entries, default);
                        }
                    }
                    let k = self.nat()?;
                    self.expect(TokenKind::Arrow)?;
                    let v = self.point()?;
                    self.expect(TokenKind::Comma)?;
                    entries.insert(k, v);
                }
            }
            other => Err(SetExprError::Syntax {
                pos: self.tokens[self.pos.saturating_sub(1)].pos,
                expected: vec!["function constructor".into()],
                found: format!("'{other}'"),
            }),
        }
    }
}
