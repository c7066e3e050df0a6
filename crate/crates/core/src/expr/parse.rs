use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, ToPrimitive};

use super::{Expr, Primitive};
use crate::error::{Error, Result};
use crate::scalar::{parse_decimal, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let text = &src[start..i];
                let q = parse_decimal(text).ok_or_else(|| Error::Syntax {
                    position: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push((start, Tok::Num(q)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    position: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    arity: usize,
}

/// Parse `src` as an expression over `x0..x{arity-1}`.
pub fn parse(src: &str, arity: usize) -> Result<Expr> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        end: src.len(),
        arity,
    };
    let (e, _) = p.expr()?;
    if let Some((at, t)) = p.toks.get(p.pos) {
        return Err(Error::Syntax {
            position: *at,
            message: format!("unexpected token {t:?}"),
        });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(at, _)| *at)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, message: &str) -> Result<T> {
        Err(Error::Syntax {
            position: self.here(),
            message: message.to_string(),
        })
    }

    // The bool on each level reports whether the result is a bare numeric
    // literal; negating one folds into the constant.
    fn expr(&mut self) -> Result<(Expr, bool)> {
        let (first, lit) = self.term()?;
        let mut terms = vec![first];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term()?.0);
            } else if self.eat(&Tok::Minus) {
                let (t, lit) = self.term()?;
                terms.push(negate(t, lit));
            } else {
                break;
            }
        }
        if terms.len() == 1 {
            Ok((terms.pop().unwrap(), lit))
        } else {
            Ok((Expr::Sum(terms), false))
        }
    }

    fn term(&mut self) -> Result<(Expr, bool)> {
        let (first, lit) = self.unary()?;
        let mut factors = vec![first];
        let mut single = true;
        let mut folded = false;
        loop {
            if self.eat(&Tok::Star) {
                factors.push(self.unary()?.0);
            } else if self.eat(&Tok::Slash) {
                let (den, den_lit) = self.unary()?;
                let num = product(core::mem::take(&mut factors));
                // `p/q` between integer literals in lowest terms is the constant
                // the printer writes that way
                if single && lit && den_lit {
                    if let Some(q) = literal_fraction(&num, &den) {
                        factors.push(Expr::Const(q));
                        single = false;
                        folded = true;
                        continue;
                    }
                }
                factors.push(Expr::quot(num, den));
            } else {
                break;
            }
            single = false;
            folded = false;
        }
        Ok((product(factors), lit && (single || folded)))
    }

    fn unary(&mut self) -> Result<(Expr, bool)> {
        if self.eat(&Tok::Minus) {
            let (e, lit) = self.unary()?;
            return Ok((negate(e, lit), false));
        }
        self.power()
    }

    fn power(&mut self) -> Result<(Expr, bool)> {
        let (base, lit) = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok((base, lit));
        }
        let at = self.here();
        let (exponent, _) = self.unary()?;
        let n = exponent
            .canonical()
            .as_const()
            .filter(|q| q.is_integer() && !q.is_negative())
            .and_then(|q| q.to_integer().to_u32())
            .ok_or(Error::Syntax {
                position: at,
                message: "exponent must be a non-negative integer".into(),
            })?;
        Ok((Expr::Pow(Box::new(base), n), false))
    }

    fn atom(&mut self) -> Result<(Expr, bool)> {
        let at = self.here();
        match self.toks.get(self.pos).map(|(_, t)| t.clone()) {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok((Expr::Const(q), true))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let (e, _) = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return self.fail("expected `)`");
                }
                Ok((e, false))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(p) = Primitive::from_name(&name) {
                    if !self.eat(&Tok::LParen) {
                        return self.fail("expected `(` after function name");
                    }
                    let (arg, _) = self.expr()?;
                    if !self.eat(&Tok::RParen) {
                        return self.fail("expected `)`");
                    }
                    return Ok((Expr::call(p, arg), false));
                }
                let index = name
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok());
                match index {
                    Some(i) if i < self.arity => Ok((Expr::Var(i), false)),
                    Some(i) => Err(Error::ArityViolation {
                        index: i,
                        arity: self.arity,
                    }),
                    None => Err(Error::UnknownIdentifier { name, position: at }),
                }
            }
            Some(_) => self.fail("expected a number, variable, function or `(`"),
            None => self.fail("unexpected end of input"),
        }
    }
}

fn product(mut factors: Vec<Expr>) -> Expr {
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Prod(factors)
    }
}

fn literal_fraction(num: &Expr, den: &Expr) -> Option<Rational> {
    match (num, den) {
        (Expr::Const(n), Expr::Const(d)) if n.is_integer() && d.is_integer() && d.numer() > &1.into() => {
            let q = n / d;
            (q.denom() == d.numer()).then_some(q)
        }
        _ => None,
    }
}

fn negate(e: Expr, literal: bool) -> Expr {
    match e {
        Expr::Const(q) if literal => Expr::Const(-q),
        e => e.neg(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn grammar_examples() {
        assert_eq!(
            parse("x0^2 + 3*x1", 2).unwrap(),
            Expr::Sum(vec![
                Expr::Var(0).pow(2),
                Expr::Prod(vec![Expr::int(3), Expr::Var(1)])
            ])
        );
        assert_eq!(
            parse("sin(x0)*exp(x1)", 2).unwrap(),
            Expr::Prod(vec![
                Expr::call(Primitive::Sin, Expr::Var(0)),
                Expr::call(Primitive::Exp, Expr::Var(1))
            ])
        );
        assert_eq!(
            parse("x2", 2),
            Err(Error::ArityViolation { index: 2, arity: 2 })
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // unary minus binds looser than ^
        assert_eq!(parse("-x0^2", 1).unwrap(), Expr::Var(0).pow(2).neg());
        // ^ is right associative
        assert_eq!(parse("x0^2^3", 1).unwrap(), Expr::Var(0).pow(8));
        // / and * are left associative
        assert_eq!(
            parse("x0/x1*x2", 3).unwrap(),
            Expr::Prod(vec![Expr::quot(Expr::Var(0), Expr::Var(1)), Expr::Var(2)])
        );
        assert_eq!(
            parse("x0*x1/x2", 3).unwrap(),
            Expr::quot(Expr::Prod(vec![Expr::Var(0), Expr::Var(1)]), Expr::Var(2))
        );
        assert_eq!(parse("-3", 0).unwrap(), Expr::int(-3));
        assert_eq!(
            parse("x0 - 3", 1).unwrap(),
            Expr::Sum(vec![Expr::Var(0), Expr::int(-3)])
        );
        assert_eq!(parse("(2)", 0).unwrap(), Expr::Const(rational(2)));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse("x0 + y", 1),
            Err(Error::UnknownIdentifier {
                name: "y".into(),
                position: 5
            })
        );
        assert!(matches!(parse("x0 +", 1), Err(Error::Syntax { position: 4, .. })));
        assert!(matches!(parse("(x0", 1), Err(Error::Syntax { position: 3, .. })));
        assert!(matches!(parse("x0 ^ -1", 1), Err(Error::Syntax { position: 5, .. })));
        assert!(matches!(parse("x0 $ 1", 1), Err(Error::Syntax { position: 3, .. })));
        assert!(matches!(parse("sin x0", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1..2", 0), Err(Error::Syntax { position: 0, .. })));
    }
}
