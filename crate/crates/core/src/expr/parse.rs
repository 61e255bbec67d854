//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' integer)?
//! base   := number | ident '(' expr ')' | coord | '(' expr ')' | '-' base
//! coord  := 'x' digits | 'y' digits        (1-based)
//! ident  := sin | cos | exp | log | sinh | cosh
//! ```
//!
//! Whitespace is insignificant. `-` applied directly to a number literal is
//! folded into the constant.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

use super::{CoordSplit, Expr, Func, ScalarExpr};
use crate::error::{ParseError, ParseErrorKind, Result};

pub fn parse(text: &str, split: CoordSplit) -> Result<ScalarExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        split,
    };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p
            .syntax(format!("unexpected `{}`", p.src[p.pos] as char))
            .into());
    }
    Ok(ScalarExpr::from_root(split, root))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    split: CoordSplit,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: String) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Syntax(msg),
            offset: self.pos,
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self
                .syntax(format!("expected `{}`, found `{}`", c as char, got as char))
                .into()),
            None => Err(self
                .syntax(format!("expected `{}`, found end of input", c as char))
                .into()),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.integer()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.syntax("expected integer exponent".to_owned()).into());
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<i32>().map_err(|_| {
            ParseError {
                kind: ParseErrorKind::Syntax(format!("exponent `{text}` out of range")),
                offset: start,
            }
            .into()
        })
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input".to_owned()).into()),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                match self.base()? {
                    Expr::Const(c) => Ok(Expr::Const(-c)),
                    e => Ok(Expr::Neg(Box::new(e))),
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char)).into()),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let mut digits = 0;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
            digits += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number".to_owned()).into());
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let value = text.parse::<f64>().map_err(|_| ParseError {
            kind: ParseErrorKind::Syntax(format!("malformed number `{text}`")),
            offset: start,
        })?;
        Ok(Expr::Const(value))
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let word = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let bytes = word.as_bytes();
        if (bytes[0] == b'x' || bytes[0] == b'y')
            && bytes.len() > 1
            && bytes[1..].iter().all(u8::is_ascii_digit)
        {
            return self.coord(word, start);
        }
        match Func::from_name(word) {
            Some(func) => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            None => Err(ParseError {
                kind: ParseErrorKind::UnknownIdentifier(word.to_owned()),
                offset: start,
            }
            .into()),
        }
    }

    fn coord(&mut self, word: &str, start: usize) -> Result<Expr> {
        let first = word.as_bytes()[0] == b'x';
        let declared = if first {
            self.split.n1()
        } else {
            self.split.n2()
        };
        let out_of_range = || ParseError {
            kind: ParseErrorKind::CoordinateOutOfRange {
                name: word.to_owned(),
                declared,
            },
            offset: start,
        };
        let index: usize = word[1..].parse().map_err(|_| out_of_range())?;
        if index == 0 || index > declared {
            return Err(out_of_range().into());
        }
        let coord = if first {
            index - 1
        } else {
            self.split.n1() + index - 1
        };
        Ok(Expr::Coord(coord))
    }
}
