use std::sync::Arc;

use num_traits::Zero;

use super::poly::{MultiPoly, VarSet};
use super::Rat;
use crate::{Error, Result};

/// Parse a polynomial expression over the given variables.
///
/// Grammar: integer and rational literals, named variables, `+ - * / ^`,
/// parentheses, unary minus. `^` takes a nonnegative integer literal; `/`
/// requires the divisor to reduce to a nonzero constant.
pub fn parse_poly(vars: &Arc<VarSet>, input: &str) -> Result<MultiPoly> {
    let mut p = Parser {
        vars,
        bytes: input.as_bytes(),
        pos: 0,
    };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(Error::Parse(format!(
            "unexpected trailing input at byte {}: `{}`",
            p.pos,
            &input[p.pos..]
        )));
    }
    Ok(poly)
}

struct Parser<'a> {
    vars: &'a Arc<VarSet>,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let divisor = self.unary()?;
                    let c = divisor.constant_term();
                    if divisor.num_terms() > 1 || (divisor.num_terms() == 1 && c.is_zero()) {
                        return Err(Error::Parse(
                            "division is only supported by nonzero constants".into(),
                        ));
                    }
                    if c.is_zero() {
                        return Err(Error::Parse("division by zero".into()));
                    }
                    acc = acc.scale(&c.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<MultiPoly> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<MultiPoly> {
        let base = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Parse("expected `)`".into()));
                }
                self.pos += 1;
                inner
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                MultiPoly::constant(self.vars, Rat::from_integer(n.into()))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric()
                        || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                MultiPoly::var_named(self.vars, name)?
            }
            other => {
                return Err(Error::Parse(format!(
                    "unexpected token {:?} at byte {}",
                    other.map(char::from),
                    self.pos
                )))
            }
        };
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            if e < 0 {
                return Err(Error::Parse("negative exponent".into()));
            }
            if e > 64 {
                return Err(Error::Parse("exponent too large".into()));
            }
            return Ok(base.pow(e as u32));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse(format!("expected integer at byte {start}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{rat, rat_int};

    #[test]
    fn parses_engel_style_coefficients() {
        let vs = VarSet::new(["x1", "x2", "x3", "x4"]);
        let p = parse_poly(&vs, "-x3/2 - x1*x2/12").unwrap();
        let expected = MultiPoly::var(&vs, 2)
            .unwrap()
            .scale(&rat(-1, 2))
            .add(
                &MultiPoly::var(&vs, 0)
                    .unwrap()
                    .mul(&MultiPoly::var(&vs, 1).unwrap())
                    .unwrap()
                    .scale(&rat(-1, 12)),
            )
            .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn parses_powers_parens_and_rationals() {
        let vs = VarSet::new(["x1", "x2"]);
        let p = parse_poly(&vs, "(x1 + x2)^2 - 3/4*x1^2").unwrap();
        let x1 = MultiPoly::var(&vs, 0).unwrap();
        let x2 = MultiPoly::var(&vs, 1).unwrap();
        let expected = x1
            .add(&x2)
            .unwrap()
            .pow(2)
            .sub(&x1.pow(2).scale(&rat(3, 4)))
            .unwrap();
        assert_eq!(p, expected);
        assert_eq!(
            parse_poly(&vs, "2^3").unwrap(),
            MultiPoly::constant(&vs, rat_int(8))
        );
    }

    #[test]
    fn rejects_malformed_input() {
        let vs = VarSet::new(["x1"]);
        assert!(parse_poly(&vs, "x9 + 1").is_err());
        assert!(parse_poly(&vs, "x1 +").is_err());
        assert!(parse_poly(&vs, "x1 / x1").is_err());
        assert!(parse_poly(&vs, "x1 ^ -2").is_err());
        assert!(parse_poly(&vs, "(x1").is_err());
        assert!(parse_poly(&vs, "x1) junk").is_err());
    }
}
