//! Parser and evaluator for the element grammar used in witnesses.
//!
//! integers, generators x1 y1 v1 u1 …, h, any other identifier as a
//! nilpotent coefficient (cap p), `+ - *`, `^k` (negative k only on h),
//! `[a, b]` commutator, `[a]` grouping, `{a, b}` Poisson bracket of the
//! reductions mod h, `exp(a)` truncated exponential.

use anyhow::{anyhow, bail, Context, Result};
use frobq::autgrp::{greek_ring, nilpotent_exp};
use frobq::poisson::poisson_bracket;
use frobq::weyl::{w_commutator, WeylAlg, WeylElem};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[st..i].iter().collect();
            out.push(Tok::Int(t.parse().context("integer literal")?));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*^()[]{},".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            bail!("unexpected character `{c}`");
        }
    }
    Ok(out)
}

fn is_generator(name: &str) -> bool {
    let mut it = name.chars();
    matches!(it.next(), Some('x' | 'y' | 'v' | 'u')) && {
        let rest: String = it.collect();
        !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
    }
}

fn generator_index(name: &str) -> usize {
    name[1..].parse().unwrap_or(0)
}

pub struct EvalContext {
    pub p: u32,
    pub n: usize,
    pub floor: Option<i32>,
    pub opposite: bool,
}

/// Builds the algebra the expression lives in and evaluates it.
pub fn evaluate(ctx: &EvalContext, src: &str) -> Result<WeylElem> {
    let toks = lex(src)?;
    let mut coeffs: Vec<String> = Vec::new();
    let mut flat = false;
    let mut n = ctx.n;
    for t in &toks {
        if let Tok::Ident(name) = t {
            if is_generator(name) {
                flat |= name.starts_with('v') || name.starts_with('u');
                n = n.max(generator_index(name));
            } else if name != "h" && name != "exp" && !coeffs.contains(name) {
                coeffs.push(name.clone());
            }
        }
    }
    let ring = greek_ring(ctx.p, &coeffs)?;
    let base = if flat { WeylAlg::flat(ctx.p, n, &ring)? } else { WeylAlg::standard(ctx.p, n, &ring)? };
    let base = if ctx.opposite { base.opposite_convention() } else { base };
    let alg = base.with_floor(ctx.floor.unwrap_or(-(8 * n as i32 * ctx.p as i32)));
    let mut ps = Parser { toks, pos: 0, alg };
    let v = ps.expr()?;
    if ps.pos != ps.toks.len() {
        bail!("trailing input at token {}", ps.pos);
    }
    Ok(v)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    alg: WeylAlg,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            bail!("expected `{c}` at token {}", self.pos)
        }
    }

    fn expr(&mut self) -> Result<WeylElem> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?)?;
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<WeylElem> {
        let mut acc = self.unary()?;
        while self.eat('*') {
            acc = acc.mul(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<WeylElem> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<WeylElem> {
        let is_h = self.peek() == Some(&Tok::Ident("h".into()));
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let k = match self.toks.get(self.pos) {
            Some(Tok::Int(k)) => *k,
            _ => bail!("expected an exponent at token {}", self.pos),
        };
        self.pos += 1;
        if neg {
            if !is_h {
                bail!("negative exponents are only allowed on h");
            }
            return Ok(self.alg.h_pow(-(k as i32)));
        }
        Ok(base.pow(k as u32)?)
    }

    fn atom(&mut self) -> Result<WeylElem> {
        let tok = self.peek().cloned().ok_or_else(|| anyhow!("unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Tok::Int(v) => Ok(self.alg.constant(&self.alg.ring().constant(v))),
            Tok::Ident(name) if name == "h" => Ok(self.alg.h_pow(1)),
            Tok::Ident(name) if name == "exp" => {
                self.expect('(')?;
                let a = self.expr()?;
                self.expect(')')?;
                Ok(nilpotent_exp(&a)?)
            }
            Tok::Ident(name) if is_generator(&name) => Ok(self.alg.gen(&name)?),
            Tok::Ident(name) => Ok(self.alg.constant(&self.alg.ring().named(&name)?)),
            Tok::Sym('(') => {
                let a = self.expr()?;
                self.expect(')')?;
                Ok(a)
            }
            Tok::Sym('[') => {
                let a = self.expr()?;
                if self.eat(',') {
                    let b = self.expr()?;
                    self.expect(']')?;
                    Ok(w_commutator(&a, &b)?)
                } else {
                    self.expect(']')?;
                    Ok(a)
                }
            }
            Tok::Sym('{') => {
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect('}')?;
                let pb = poisson_bracket(&a.mod_h()?, &b.mod_h()?)?;
                Ok(self.alg.lift(&pb)?)
            }
            Tok::Sym(c) => bail!("unexpected `{c}`"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> EvalContext {
        EvalContext { p: 3, n: 1, floor: None, opposite: false }
    }

    #[test]
    fn weyl_relation() {
        let v = evaluate(&ctx(), "y1*x1 - x1*y1").unwrap();
        assert_eq!(v.to_string(), "[1*h]");
        assert_eq!(evaluate(&ctx(), "[y1, x1]").unwrap().to_string(), "[1*h]");
    }

    #[test]
    fn round_trip_of_display() {
        let v = evaluate(&ctx(), "exp(e1*x1*h^-1) * exp(d1*y1*h^-1)").unwrap();
        let again = evaluate(&ctx(), &format!("{v} + 0*e1*d1")).unwrap();
        assert_eq!(v.to_string(), again.to_string());
        assert_eq!(v.num_terms(), 9);
    }

    #[test]
    fn errors() {
        assert!(evaluate(&ctx(), "x1^-1").is_err());
        assert!(evaluate(&ctx(), "x1 +").is_err());
        assert!(evaluate(&ctx(), "x1 $ y1").is_err());
    }

    #[test]
    fn poisson_of_reductions() {
        let v = evaluate(&ctx(), "{x1^2, y1}").unwrap();
        assert_eq!(v.to_string(), "[2]*x1");
    }
}
