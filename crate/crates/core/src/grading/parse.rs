//! Expression grammar:
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor ('*' factor)*
//! factor  := number | atom ['^' int] | '(' expr ')' ['^' int]
//! number  := int ['/' int]
//! atom    := ident ['_' int] ['.' 't'+]
//! ident   := [A-Za-z][A-Za-z0-9']*
//! ```
//!
//! An odd atom with exponent above one, or the same odd atom repeated inside
//! one term, is rejected as [`Error::MalformedParity`] rather than silently
//! evaluated to zero.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Algebra, GradedPoly};
use crate::error::{Error, Result};

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '\'')
}

/// Parses an expression over the variables of `alg`.
pub fn parse_poly(alg: &Arc<Algebra>, src: &str) -> Result<GradedPoly> {
    let mut p = Parser {
        alg,
        src: src.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("unexpected trailing input");
    }
    Ok(out)
}

struct Parser<'a> {
    alg: &'a Arc<Algebra>,
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

const MAX_DEPTH: usize = 64;
const MAX_EXP: u64 = 64;

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<GradedPoly> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("nesting too deep");
        }
        let mut negative = false;
        if self.eat(b'-') {
            negative = true;
        } else {
            self.eat(b'+');
        }
        let mut acc = self.alg.zero();
        loop {
            let t = self.term()?;
            acc = if negative { acc - t } else { acc + t };
            if self.eat(b'+') {
                negative = false;
            } else if self.eat(b'-') {
                negative = true;
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<GradedPoly> {
        let mut odd_seen: Vec<u32> = Vec::new();
        let mut acc = self.factor(&mut odd_seen)?;
        while self.eat(b'*') {
            let f = self.factor(&mut odd_seen)?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn uint(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn small_uint(&mut self, max: u64) -> Result<u64> {
        let v = self.uint()?;
        match u64::try_from(&v) {
            Ok(x) if x <= max => Ok(x),
            _ => self.err("integer out of range"),
        }
    }

    fn exponent(&mut self) -> Result<u32> {
        if self.eat(b'^') {
            Ok(self.small_uint(MAX_EXP)? as u32)
        } else {
            Ok(1)
        }
    }

    fn factor(&mut self, odd_seen: &mut Vec<u32>) -> Result<GradedPoly> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let mut den = BigInt::from(1);
                if self.eat(b'/') {
                    den = self.uint()?;
                    if den.is_zero() {
                        return self.err("division by zero");
                    }
                }
                Ok(GradedPoly::constant(self.alg, BigRational::new(num, den)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                let e = self.exponent()?;
                Ok(inner.pow(e))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let slot = self.atom()?;
                let e = self.exponent()?;
                if self.alg.slot_parity(slot).is_odd() {
                    let name = self.alg.slot_name(slot);
                    if e >= 2 {
                        return Err(Error::MalformedParity(format!(
                            "odd variable `{name}` raised to power {e}"
                        )));
                    }
                    if e == 1 {
                        if odd_seen.contains(&slot) {
                            return Err(Error::MalformedParity(format!(
                                "odd variable `{name}` repeated in one product"
                            )));
                        }
                        odd_seen.push(slot);
                    }
                }
                Ok(GradedPoly::slot(self.alg, slot).pow(e))
            }
            Some(_) => self.err("unexpected character"),
        }
    }

    fn atom(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'\'')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let var = self.alg.var_id(name)?;
        let mut index = 0;
        if self.pos < self.src.len() && self.src[self.pos] == b'_' {
            self.pos += 1;
            index = self.small_uint(1 << 20)? as usize;
        }
        let mut deriv = 0u32;
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos] == b't' {
                self.pos += 1;
                deriv += 1;
            }
            if deriv == 0 {
                return self.err("expected 't' after '.'");
            }
        }
        self.alg.slot(var, index, deriv)
    }
}
