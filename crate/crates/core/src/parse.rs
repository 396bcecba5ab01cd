//! Textual syntax for exact Laurent polynomials and scalars.
//!
//! Series use `x` with integer exponents and rational coefficients written
//! `num/den`, e.g. `1 - 3/2*x^-1 + x^2`. Scalars in Q(zeta_M) use `w` for the
//! primitive root, e.g. `1/2 + w^2`. Parenthesized scalar factors may appear
//! inside series: `(1+w)*x^2`.

use std::sync::Arc;

use num::{BigInt, BigRational};

use crate::error::{Error, Result};
use crate::field::{CycloScalar, FieldCtx};
use crate::series::LaurentSeries;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Colon,
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        msg: msg.into(),
    }
}

impl Lexer {
    fn new(input: &str) -> Result<Lexer> {
        let bytes = input.as_bytes();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let b = bytes[i];
            match b {
                b' ' | b'\t' | b'\n' | b'\r' => i += 1,
                b'+' => {
                    toks.push((i, Tok::Plus));
                    i += 1;
                }
                b'-' => {
                    toks.push((i, Tok::Minus));
                    i += 1;
                }
                b'*' => {
                    toks.push((i, Tok::Star));
                    i += 1;
                }
                b'/' => {
                    toks.push((i, Tok::Slash));
                    i += 1;
                }
                b'^' => {
                    toks.push((i, Tok::Caret));
                    i += 1;
                }
                b'(' => {
                    toks.push((i, Tok::LParen));
                    i += 1;
                }
                b')' => {
                    toks.push((i, Tok::RParen));
                    i += 1;
                }
                b':' => {
                    toks.push((i, Tok::Colon));
                    i += 1;
                }
                b'0'..=b'9' => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let n: BigInt = input[start..i].parse().expect("digits");
                    toks.push((start, Tok::Int(n)));
                }
                b if b.is_ascii_alphabetic() || b == b'_' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    toks.push((start, Tok::Ident(input[start..i].to_string())));
                }
                _ => return Err(err(i, format!("unexpected character `{}`", b as char))),
            }
        }
        Ok(Lexer {
            toks,
            pos: 0,
            len: input.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let pos = self.here();
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(err(pos, format!("expected {}", what)))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn parse_expr(lx: &mut Lexer, ctx: &Arc<FieldCtx>) -> Result<LaurentSeries> {
    let mut negate = lx.eat(&Tok::Minus);
    let mut acc = LaurentSeries::zero(ctx);
    loop {
        let term = parse_term(lx, ctx)?;
        acc = if negate {
            acc.sub(&term)
        } else {
            acc.add(&term)
        };
        if lx.eat(&Tok::Plus) {
            negate = false;
        } else if lx.eat(&Tok::Minus) {
            negate = true;
        } else {
            break;
        }
    }
    Ok(acc)
}

fn parse_term(lx: &mut Lexer, ctx: &Arc<FieldCtx>) -> Result<LaurentSeries> {
    let mut acc = parse_factor(lx, ctx)?;
    while lx.eat(&Tok::Star) {
        let f = parse_factor(lx, ctx)?;
        acc = acc.mul(&f);
    }
    Ok(acc)
}

fn parse_factor(lx: &mut Lexer, ctx: &Arc<FieldCtx>) -> Result<LaurentSeries> {
    let base = parse_atom(lx, ctx)?;
    if lx.eat(&Tok::Caret) {
        let pos = lx.here();
        let e = parse_signed_int(lx)?;
        series_pow(&base, e).map_err(|_| {
            err(
                pos,
                "negative exponent is only supported on single-term bases",
            )
        })
    } else {
        Ok(base)
    }
}

fn parse_atom(lx: &mut Lexer, ctx: &Arc<FieldCtx>) -> Result<LaurentSeries> {
    let pos = lx.here();
    match lx.next() {
        Some(Tok::Int(n)) => {
            let mut val = BigRational::from_integer(n);
            if lx.eat(&Tok::Slash) {
                let dpos = lx.here();
                match lx.next() {
                    Some(Tok::Int(d)) => {
                        if d == BigInt::from(0) {
                            return Err(err(dpos, "zero denominator"));
                        }
                        val /= BigRational::from_integer(d);
                    }
                    _ => return Err(err(dpos, "expected denominator")),
                }
            }
            Ok(LaurentSeries::monomial(
                CycloScalar::from_rational(ctx, val),
                0,
            ))
        }
        Some(Tok::Ident(name)) => match name.as_str() {
            "x" => Ok(LaurentSeries::x(ctx)),
            "w" => Ok(LaurentSeries::monomial(CycloScalar::zeta(ctx), 0)),
            other => Err(err(pos, format!("unknown symbol `{}`", other))),
        },
        Some(Tok::LParen) => {
            let inner = parse_expr(lx, ctx)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(inner)
        }
        Some(Tok::Minus) => Ok(parse_factor(lx, ctx)?.neg()),
        _ => Err(err(pos, "expected a number, `x`, `w`, or `(`")),
    }
}

fn parse_signed_int(lx: &mut Lexer) -> Result<i64> {
    let neg = lx.eat(&Tok::Minus);
    let pos = lx.here();
    match lx.next() {
        Some(Tok::Int(n)) => {
            let v = i64::try_from(n).map_err(|_| err(pos, "exponent out of range"))?;
            Ok(if neg { -v } else { v })
        }
        _ => Err(err(pos, "expected an integer exponent")),
    }
}

fn series_pow(base: &LaurentSeries, e: i64) -> Result<LaurentSeries> {
    if e >= 0 {
        let mut acc = LaurentSeries::one(base.ctx());
        for _ in 0..e {
            acc = acc.mul(base);
        }
        return Ok(acc);
    }
    // Negative powers only for single-term bases, where the inverse is exact.
    let mut terms = base.terms();
    match (terms.next(), terms.next(), base.is_exact()) {
        (Some((k, c)), None, true) => {
            let inv = LaurentSeries::monomial(c.inv()?, -k);
            series_pow(&inv, -e)
        }
        _ => Err(Error::ZeroSeries),
    }
}

/// Parse an exact Laurent polynomial, e.g. `1 - 3/2*x^-1 + x^2`.
pub fn parse_series(ctx: &Arc<FieldCtx>, input: &str) -> Result<LaurentSeries> {
    let mut lx = Lexer::new(input)?;
    if lx.at_end() {
        return Err(err(0, "empty input"));
    }
    let s = parse_expr(&mut lx, ctx)?;
    if !lx.at_end() {
        return Err(err(lx.here(), "trailing input"));
    }
    Ok(s)
}

/// Parse a scalar in Q(zeta_M), e.g. `1/2 + w^2`. The expression must not
/// involve `x`.
pub fn parse_scalar(ctx: &Arc<FieldCtx>, input: &str) -> Result<CycloScalar> {
    let s = parse_series(ctx, input)?;
    let mut out = CycloScalar::zero(ctx);
    for (k, c) in s.terms() {
        if k != 0 {
            return Err(err(0, "expected a scalar, found a power of x"));
        }
        out = &out + c;
    }
    Ok(out)
}

/// Parse one `name:(series)` element list joined by `+`, for CLI element
/// input. Returns `(name, series)` pairs in input order.
pub fn parse_tagged_series(
    ctx: &Arc<FieldCtx>,
    input: &str,
) -> Result<Vec<(String, LaurentSeries)>> {
    let mut lx = Lexer::new(input)?;
    let mut out = Vec::new();
    loop {
        let pos = lx.here();
        let name = match lx.next() {
            Some(Tok::Ident(n)) => n,
            _ => return Err(err(pos, "expected a generator name")),
        };
        lx.expect(Tok::Colon, "`:`")?;
        lx.expect(Tok::LParen, "`(`")?;
        let series = parse_expr(&mut lx, ctx)?;
        lx.expect(Tok::RParen, "`)`")?;
        out.push((name, series));
        if lx.at_end() {
            break;
        }
        lx.expect(Tok::Plus, "`+` between components")?;
    }
    Ok(out)
}
