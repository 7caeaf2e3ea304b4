//! Coefficient expressions.
//!
//! The accepted language is deliberately closed: real literals, `i`, `+`,
//! `-`, `*`, `/` by a constant, parentheses and `sin(n t)` / `cos(n t)` for a
//! non-negative integer `n` (`sin(t)`, `sin(2t)` and `sin(2*t)` are all
//! accepted). Anything else is rejected.

use hypoell::{TorusFunction, C64};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("bad coefficient expression at byte {pos}: {msg}")]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: u8) -> Result<(), ExprError> {
        if self.eat(ch) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", ch as char))
        }
    }

    fn ident(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src;
        let mut p = self.pos;
        while p < bytes.len() && (bytes[p].is_ascii_digit() || bytes[p] == b'.') {
            p += 1;
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if q < bytes.len() && bytes[q].is_ascii_digit() {
                p = q;
                while p < bytes.len() && bytes[p].is_ascii_digit() {
                    p += 1;
                }
            }
        }
        self.pos = p;
        let text = std::str::from_utf8(&bytes[start..p]).unwrap_or("");
        text.parse::<f64>().or_else(|_| {
            self.pos = start;
            self.err(format!("invalid number '{text}'"))
        })
    }

    fn expr(&mut self) -> Result<TorusFunction, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<TorusFunction, ExprError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.factor()?;
                if d.k_max() != 0 {
                    self.pos = at;
                    return self.err("division is only allowed by constants");
                }
                let v = d.coeff(0);
                if v == C64::new(0.0, 0.0) {
                    self.pos = at;
                    return self.err("division by zero");
                }
                acc = acc.scale(v.inv());
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<TorusFunction, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.factor()?.scale(C64::new(-1.0, 0.0)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => {
                Ok(TorusFunction::constant(C64::new(self.number()?, 0.0)))
            }
            Some(ch) if ch.is_ascii_alphabetic() => {
                let at = self.pos;
                match self.ident() {
                    "i" => Ok(TorusFunction::constant(C64::new(0.0, 1.0))),
                    "sin" => Ok(TorusFunction::sin(self.harmonic()?)),
                    "cos" => Ok(TorusFunction::cos(self.harmonic()?)),
                    other => {
                        self.pos = at;
                        self.err(format!("unknown name '{other}'"))
                    }
                }
            }
            Some(ch) => self.err(format!("unexpected '{}'", ch as char)),
            None => self.err("unexpected end of input"),
        }
    }

    /// `( [n [*]] t )`
    fn harmonic(&mut self) -> Result<usize, ExprError> {
        self.expect(b'(')?;
        let mut n = 1usize;
        if matches!(self.peek(), Some(ch) if ch.is_ascii_digit()) {
            let at = self.pos;
            let v = self.number()?;
            if v.fract() != 0.0 || v < 0.0 || v > 4096.0 {
                self.pos = at;
                return self.err("harmonic must be a non-negative integer");
            }
            n = v as usize;
            self.eat(b'*');
        }
        let at = self.pos;
        if self.ident() != "t" {
            self.pos = at;
            return self.err("expected 't'");
        }
        self.expect(b')')?;
        Ok(n)
    }
}

/// Parses a coefficient expression into a trigonometric polynomial.
pub fn parse(src: &str) -> Result<TorusFunction, ExprError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &TorusFunction, b: &TorusFunction) -> bool {
        (0..32).all(|j| {
            let t = j as f64 * 0.2;
            (a.eval(t) - b.eval(t)).norm() < 1e-14
        })
    }

    #[test]
    fn parses_examples() {
        let i = C64::new(0.0, 1.0);
        let v = parse("i*sin(t)+i").unwrap();
        let expect = TorusFunction::sin(1).scale(i).add(&TorusFunction::constant(i));
        assert!(close(&v, &expect));
        assert!(close(&parse("i/2").unwrap(), &TorusFunction::constant(i * 0.5)));
        assert!(close(&parse("0").unwrap(), &TorusFunction::zero()));
        let v = parse("1 - 2.5e-1*cos(2 t) + sin(3*t)*i").unwrap();
        let expect = TorusFunction::constant(C64::new(1.0, 0.0))
            .sub(&TorusFunction::cos(2).scale(C64::new(0.25, 0.0)))
            .add(&TorusFunction::sin(3).scale(i));
        assert!(close(&v, &expect));
        assert!(close(&parse("-(i)*sin(2t)").unwrap(), &TorusFunction::sin(2).scale(-i)));
    }

    #[test]
    fn rejects_outside_language() {
        for bad in ["exp(t)", "sin(x)", "1/sin(t)", "t", "sin(1.5t)", "2 +", "1/0", "i i"] {
            assert!(parse(bad).is_err(), "{bad} should be rejected");
        }
    }
}
