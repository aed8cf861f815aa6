//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := base ('^' ['+' | '-'] integer)?
//! base   := number | 'pi' | 'x' | fn '(' expr ')' | '(' expr ')'
//! fn     := exp | log | sin | cos | sqrt | erf
//! ```
//!
//! Unary minus sits below `^`, so `-x^2` is `-(x^2)`. Numbers are decimals
//! (`0.049`, `1e-3`) or hex floats (`0x1.8p-3`); `2^-8` is ordinary
//! exponentiation of a constant and folds to `1/256`.

use rug::Rational;

use super::expr::Expr;
use crate::error::{Error, Result};
use crate::mparith::{parse_exact, ElemFn};

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.s.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = Expr::add(acc, self.term()?);
            } else if self.eat(b'-') {
                acc = Expr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Expr::mul(acc, self.unary()?);
            } else if self.eat(b'/') {
                acc = Expr::div(acc, self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::neg(self.unary()?));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let digits_start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.error("exponent must be an integer"));
        }
        if matches!(self.s.get(self.pos), Some(b'.' | b'e' | b'E' | b'x')) {
            self.pos = start;
            return Err(self.error("exponent must be an integer"));
        }
        let text = std::str::from_utf8(&self.s[digits_start..self.pos]).expect("ascii");
        let k: i32 = text.parse().map_err(|_| Error::Parse { pos: start, msg: "exponent out of range".into() })?;
        Ok(Expr::pow(base, if neg { -k } else { k }))
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                match name {
                    "x" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Pi),
                    _ => {
                        let Some(f) = ElemFn::from_name(name) else {
                            self.pos = start;
                            return Err(self.error(&format!("unknown identifier {name:?}")));
                        };
                        if !self.eat(b'(') {
                            return Err(self.error("expected '(' after function name"));
                        }
                        let arg = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.error("expected ')'"));
                        }
                        Ok(Expr::call(f, arg))
                    }
                }
            }
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.s;
        let hex = s[start..].starts_with(b"0x") || s[start..].starts_with(b"0X");
        if hex {
            self.pos += 2;
            while self.pos < s.len() && (s[self.pos].is_ascii_hexdigit() || s[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < s.len() && matches!(s[self.pos], b'p' | b'P') {
                self.pos += 1;
                self.signed_digits();
            }
        } else {
            while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < s.len() && matches!(s[self.pos], b'e' | b'E') {
                self.pos += 1;
                self.signed_digits();
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii");
        let r: Rational = parse_exact(text).map_err(|_| Error::Parse { pos: start, msg: format!("malformed number {text:?}") })?;
        Ok(Expr::rational(r))
    }

    fn signed_digits(&mut self) {
        if self.pos < self.s.len() && matches!(self.s[self.pos], b'+' | b'-') {
            self.pos += 1;
        }
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_worked_examples() {
        let e = parse("exp(sin(x)-cos(x^2))").unwrap();
        let want = Expr::call(
            ElemFn::Exp,
            Expr::sub(Expr::call(ElemFn::Sin, Expr::x()), Expr::call(ElemFn::Cos, Expr::pow(Expr::x(), 2))),
        );
        assert_eq!(e, want);
        assert_eq!(parse("x").unwrap(), Expr::Var);
        assert!(matches!(parse("sin(x)+cos(x^2)").unwrap(), Expr::Add(..)));
    }

    #[test]
    fn minus_binds_looser_than_power() {
        assert_eq!(parse("-x^2").unwrap(), Expr::neg(Expr::pow(Expr::x(), 2)));
        assert_eq!(parse("2^-8").unwrap(), Expr::rational(Rational::from((1, 256))));
        assert_eq!(parse("-2^-8").unwrap(), Expr::rational(Rational::from((-1, 256))));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("0x1.8p-3").unwrap(), Expr::rational(Rational::from((3, 16))));
        assert_eq!(parse("0.049").unwrap(), Expr::rational(Rational::from((49, 1000))));
        assert_eq!(parse("1e-3").unwrap(), Expr::rational(Rational::from((1, 1000))));
    }

    #[test]
    fn reports_positions() {
        assert_eq!(parse("x^1.5").unwrap_err(), Error::Parse { pos: 2, msg: "exponent must be an integer".into() });
        assert!(matches!(parse("sin(x"), Err(Error::Parse { pos: 5, .. })));
        assert!(matches!(parse("tan(x)"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse("x x"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse("x^y"), Err(Error::Parse { pos: 2, .. })));
    }

    #[test]
    fn display_round_trips() {
        for s in ["exp(sin(x)-cos(x^2))", "-x^3/7 + 2^-8*erf(x)", "sqrt(1+x)*log(2-x)", "x^-2", "cos(pi*x)"] {
            let e = parse(s).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{s}");
        }
    }
}
