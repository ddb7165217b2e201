//! Expression language for jet functions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := primary ('^' uint)? | '-' factor
//! primary := rational | 'i' | variable | '(' expr ')' | 'O' '(' uint ')'
//! rational:= uint ('/' uint)?
//! ```
//!
//! `O(k)` marks a truncated series: everything of total degree `≥ k` is unknown.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::GaussScalar;
use crate::vars::VarTable;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(GaussScalar),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    /// Unknown terms of total degree `≥ k`.
    BigO(u32),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut k = 0;
        while k < bytes.len() {
            let c = bytes[k];
            if c.is_ascii_whitespace() {
                k += 1;
            } else if c.is_ascii_digit() {
                let start = k;
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                let v: BigInt = lx.src[start..k].parse().expect("digits");
                lx.toks.push((start, Tok::Int(v)));
            } else if c.is_ascii_alphabetic() {
                let start = k;
                while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                    k += 1;
                }
                lx.toks.push((start, Tok::Ident(lx.src[start..k].to_string())));
            } else if b"+-*/^()".contains(&c) {
                lx.toks.push((k, Tok::Sym(c as char)));
                k += 1;
            } else {
                let ch = src[k..].chars().next().unwrap_or('?');
                return Err(Error::Parse { offset: k, message: format!("unexpected character '{ch}'") });
            }
        }
        lx.toks.push((src.len(), Tok::End));
        Ok(lx.toks)
    }
}

struct Parser<'t> {
    toks: &'t [(usize, Tok)],
    pos: usize,
    table: &'t VarTable,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { offset, message: message.into() })
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.offset(), format!("expected '{c}'"))
        }
    }

    fn uint(&mut self) -> Result<BigInt> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(v) => Ok(v),
            _ => err(at, "expected an unsigned integer"),
        }
    }

    fn small_uint(&mut self) -> Result<u32> {
        let at = self.offset();
        let v = self.uint()?;
        u32::try_from(v).or_else(|_| err(at, "integer too large"))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if self.eat('^') {
            let e = self.small_uint()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(num) => {
                if self.eat('/') {
                    let den_at = self.offset();
                    let den = self.uint()?;
                    if den.is_zero() {
                        return err(den_at, "zero denominator");
                    }
                    Ok(Expr::Const(GaussScalar::from(BigRational::new(num, den))))
                } else {
                    Ok(Expr::Const(GaussScalar::from(BigRational::from_integer(num))))
                }
            }
            Tok::Ident(name) if name == "i" => Ok(Expr::Const(GaussScalar::i())),
            Tok::Ident(name) if name == "O" && *self.peek() == Tok::Sym('(') => {
                self.bump();
                let k = self.small_uint()?;
                self.expect(')')?;
                Ok(Expr::BigO(k))
            }
            Tok::Ident(name) => match self.table.lookup_name(&name) {
                Some(id) => Ok(Expr::Var(id)),
                None => err(at, format!("unknown variable {name}")),
            },
            Tok::Sym('(') => {
                let inner = self.expr()?;
                if !self.eat(')') {
                    return err(self.offset(), format!("unbalanced parenthesis opened at {at}"));
                }
                Ok(inner)
            }
            Tok::Sym(')') => err(at, "unbalanced ')'"),
            Tok::Sym(c) => err(at, format!("unexpected '{c}'")),
            Tok::End => err(at, "unexpected end of input"),
        }
    }
}

/// Parses `text`, resolving variables against `table`.
pub fn parse_expression(text: &str, table: &VarTable) -> Result<Expr> {
    let toks = Lexer::run(text)?;
    let mut p = Parser { toks: &toks, pos: 0, table };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return err(p.offset(), "unexpected trailing input");
    }
    Ok(e)
}

/// Exact polynomial value of `e`. `O(k)` is allowed only as a summand.
pub fn lower(e: &Expr, table: &Arc<VarTable>) -> Result<Poly> {
    let mut bound: Option<u32> = None;
    let p = lower_sum(e, table, &mut bound)?;
    Ok(match bound {
        Some(0) => return Err(Error::Parse { offset: 0, message: "O(0) leaves nothing known".into() }),
        Some(k) => p.truncated(k - 1),
        None => p,
    })
}

fn lower_sum(e: &Expr, table: &Arc<VarTable>, bound: &mut Option<u32>) -> Result<Poly> {
    match e {
        Expr::BigO(k) => {
            *bound = Some(bound.map_or(*k, |b| b.min(*k)));
            Ok(Poly::zero(table))
        }
        Expr::Add(a, b) => Ok(&lower_sum(a, table, bound)? + &lower_sum(b, table, bound)?),
        Expr::Sub(a, b) => Ok(&lower_sum(a, table, bound)? - &lower_sum(b, table, bound)?),
        other => lower_inner(other, table),
    }
}

fn lower_inner(e: &Expr, table: &Arc<VarTable>) -> Result<Poly> {
    Ok(match e {
        Expr::Const(c) => Poly::constant(table, c.clone()),
        Expr::Var(id) => Poly::var(table, *id),
        Expr::Neg(a) => -lower_inner(a, table)?,
        Expr::Add(a, b) => &lower_inner(a, table)? + &lower_inner(b, table)?,
        Expr::Sub(a, b) => &lower_inner(a, table)? - &lower_inner(b, table)?,
        Expr::Mul(a, b) => &lower_inner(a, table)? * &lower_inner(b, table)?,
        Expr::Pow(a, k) => lower_inner(a, table)?.pow(*k),
        Expr::BigO(_) => return Err(Error::Parse { offset: 0, message: "O(k) must be a top-level summand".into() }),
    })
}

/// `parse_expression` followed by `lower`.
pub fn parse_poly(text: &str, table: &Arc<VarTable>) -> Result<Poly> {
    lower(&parse_expression(text, table)?, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Arc<VarTable> {
        VarTable::jet_space(2, 2, 2).unwrap()
    }

    #[test]
    fn parses_examples() {
        let t = t();
        let x1 = Poly::var(&t, t.x(0));
        let u1 = Poly::var(&t, t.u(0));
        let u2 = Poly::var(&t, t.u(1));
        let p12 = Poly::var(&t, t.jet(0, &[1]).unwrap());
        assert_eq!(parse_poly("x1 + 3/2*u1", &t).unwrap(), &x1 + &u1.scale(&GaussScalar::from_ratio(3, 2)));
        let want = &p12.pow(2) - &(&x1 * &u2).scale(&GaussScalar::i());
        assert_eq!(parse_poly("p1_2^2 - i*x1*u2", &t).unwrap(), want);
        assert!(parse_poly("0", &t).unwrap().is_zero());
        let sq = &(&x1.pow(2) + &(&x1 * &u1).scale(&GaussScalar::from(2))) + &u1.pow(2);
        assert_eq!(parse_poly("(x1+u1)^2", &t).unwrap(), sq);
        assert_eq!(parse_poly("i^2", &t).unwrap(), Poly::constant(&t, GaussScalar::from(-1)));
        assert_eq!(parse_poly("-x1^2", &t).unwrap(), -x1.pow(2));
    }

    #[test]
    fn error_offsets() {
        let t = t();
        assert_eq!(parse_expression("x1 + ", &t).unwrap_err(), Error::Parse { offset: 5, message: "unexpected end of input".into() });
        assert!(matches!(parse_expression("x1 + x9", &t), Err(Error::Parse { offset: 5, .. })));
        assert!(matches!(parse_expression("(x1 + u1", &t), Err(Error::Parse { offset: 8, .. })));
        assert!(matches!(parse_expression("x1)", &t), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(parse_expression("3/0", &t), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(parse_expression("x1 # 2", &t), Err(Error::Parse { offset: 3, .. })));
        assert!(matches!(parse_expression("x1^-1", &t), Err(Error::Parse { offset: 3, .. })));
    }

    #[test]
    fn display_round_trip() {
        let t = t();
        for text in ["(1-i)*x1*u2 - 3/2*x1", "-i*p2_1 + 7", "x1^3*u1 - (1/2+1/3*i)*p1_1_2 + 1", "u1^2 + x1 + O(3)"] {
            let p = parse_poly(text, &t).unwrap();
            assert_eq!(parse_poly(&p.to_string(), &t).unwrap(), p, "{text} -> {p}");
        }
        let series = parse_poly("x1 + x1^4 + O(3)", &t).unwrap();
        assert_eq!(series.truncation(), Some(2));
        assert_eq!(series.len(), 1);
    }
}
