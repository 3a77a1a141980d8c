//! Parser for rational functions of t such as "(t^2+1)/(2t-3)".
//!
//! Grammar: integers, the variable t, + - * / ^, parentheses, and implicit
//! multiplication between a factor and a following t or "(".

use num_bigint::BigInt;

use crate::arith::BigRational;
use crate::error::{Error, Result};
use crate::poly::Poly;

/// A rational function num/den, not yet reduced.
#[derive(Debug, Clone)]
struct Frac {
    num: Poly,
    den: Poly,
}

impl Frac {
    fn poly(p: Poly) -> Self {
        Frac { num: p, den: Poly::one() }
    }

    fn add(self, o: Frac) -> Frac {
        Frac {
            num: &(&self.num * &o.den) + &(&o.num * &self.den),
            den: &self.den * &o.den,
        }
    }

    fn neg(self) -> Frac {
        Frac {
            num: -&self.num,
            den: self.den,
        }
    }

    fn mul(self, o: Frac) -> Frac {
        Frac {
            num: &self.num * &o.num,
            den: &self.den * &o.den,
        }
    }

    fn div(self, o: Frac) -> Result<Frac> {
        if o.num.is_zero() {
            return Err(Error::Parse("division by zero in map expression".to_string()));
        }
        Ok(Frac {
            num: &self.num * &o.den,
            den: &self.den * &o.num,
        })
    }

    fn pow(self, e: u32) -> Frac {
        Frac {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    T,
    Op(char),
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push(Tok::Num(digits.parse().expect("ascii digits")));
            }
            't' => {
                out.push(Tok::T);
                i += 1;
            }
            '+' | '*' | '/' | '^' => {
                out.push(Tok::Op(c));
                i += 1;
            }
            '-' | '−' => {
                out.push(Tok::Op('-'));
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            _ => return Err(Error::Parse(format!("unexpected character {c:?} in map expression"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Frac> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc.add(rhs) } else { acc.add(rhs.neg()) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Frac> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(self.unary()?);
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    acc = acc.div(self.unary()?)?;
                }
                Some(Tok::T) | Some(Tok::LParen) => acc = acc.mul(self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Frac> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Frac> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let e = match self.next() {
                Some(Tok::Num(n)) => n,
                _ => return Err(Error::Parse("exponent must be a nonnegative integer".to_string())),
            };
            let e: u32 = e
                .try_into()
                .ok()
                .filter(|&e: &u32| e <= 4096)
                .ok_or_else(|| Error::Parse("exponent too large".to_string()))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Frac> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(Frac::poly(Poly::constant(BigRational::from_integer(n)))),
            Some(Tok::T) => Ok(Frac::poly(Poly::t())),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Parse("missing ')' in map expression".to_string())),
                }
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?} in map expression"))),
            None => Err(Error::Parse("unexpected end of map expression".to_string())),
        }
    }
}

/// Parses an expression in t into an (unreduced) numerator/denominator pair.
pub fn parse_map(s: &str) -> Result<(Poly, Poly)> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty map expression".to_string()));
    }
    let mut p = Parser { toks, pos: 0 };
    let f = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input in map expression {s:?}")));
    }
    if f.den.is_zero() {
        return Err(Error::Parse("division by zero in map expression".to_string()));
    }
    Ok((f.num, f.den))
}
