//! Printing in the input grammar; `parse` of the output reprints identically.

use core::fmt::{self, Display, Write};

use num_traits::{One, Signed};

use super::Expr;
use crate::scalar::Rational;

const SUM: u8 = 1;
const PROD: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 5;

/// Single-operand sums and products print as their operand.
fn unwrap(mut e: &Expr) -> &Expr {
    while let Expr::Sum(xs) | Expr::Prod(xs) = e {
        if xs.len() != 1 {
            break;
        }
        e = &xs[0];
    }
    e
}

fn constant_like(e: &Expr) -> bool {
    match unwrap(e) {
        Expr::Const(_) => true,
        Expr::Sum(xs) | Expr::Prod(xs) => xs.is_empty(),
        Expr::Quot(a, b) => constant_like(a) && constant_like(b),
        _ => false,
    }
}

fn level(e: &Expr) -> u8 {
    let e = unwrap(e);
    match e {
        Expr::Sum(xs) | Expr::Prod(xs) if xs.is_empty() => ATOM,
        Expr::Const(c) if !c.is_integer() => PROD,
        Expr::Const(c) if c.is_negative() => UNARY,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => ATOM,
        Expr::Pow(..) => 4,
        Expr::Prod(_) if negated(e).is_some() => UNARY,
        Expr::Prod(_) | Expr::Quot(..) => PROD,
        Expr::Sum(_) => SUM,
    }
}

/// `Some(y)` for `-1 * y` with a non-constant `y`, printed as `-y`.
fn negated(e: &Expr) -> Option<&Expr> {
    match unwrap(e) {
        Expr::Prod(fs) if fs.len() == 2 && !constant_like(&fs[1]) => match unwrap(&fs[0]) {
            Expr::Const(c) if (-c).is_one() => Some(&fs[1]),
            _ => None,
        },
        _ => None,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        f.write_char('(')?;
        write_expr(f, e)?;
        f.write_char(')')
    } else {
        write_expr(f, e)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    let e = unwrap(e);
    match e {
        Expr::Sum(xs) if xs.is_empty() => f.write_char('0'),
        Expr::Prod(xs) if xs.is_empty() => f.write_char('1'),
        Expr::Const(c) => write_const(f, c),
        Expr::Var(i) => write!(f, "x{i}"),
        Expr::Call(p, a) => {
            write!(f, "{}(", p.name())?;
            write_expr(f, a)?;
            f.write_char(')')
        }
        Expr::Pow(b, n) => {
            write_at(f, b, ATOM)?;
            write!(f, "^{n}")
        }
        Expr::Quot(a, b) => {
            write_at(f, a, PROD)?;
            f.write_char('/')?;
            write_at(f, b, UNARY)
        }
        Expr::Prod(fs) => {
            if let Some(y) = negated(e) {
                f.write_char('-')?;
                return write_at(f, y, UNARY);
            }
            for (i, x) in fs.iter().enumerate() {
                if i == 0 {
                    // a leading product would be flattened on reparse
                    if matches!(unwrap(x), Expr::Prod(v) if v.len() > 1) && negated(x).is_none() {
                        f.write_char('(')?;
                        write_expr(f, x)?;
                        f.write_char(')')?;
                    } else {
                        write_at(f, x, PROD)?;
                    }
                } else {
                    f.write_char('*')?;
                    write_at(f, x, UNARY)?;
                }
            }
            Ok(())
        }
        Expr::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_at(f, t, PROD)?;
                    continue;
                }
                match (unwrap(t), negated(t)) {
                    (Expr::Const(c), _) if c.is_negative() => {
                        f.write_str(" - ")?;
                        write_const(f, &-c)?;
                    }
                    (_, Some(y)) => {
                        f.write_str(" - ")?;
                        write_at(f, y, PROD)?;
                    }
                    _ => {
                        f.write_str(" + ")?;
                        write_at(f, t, PROD)?;
                    }
                }
            }
            Ok(())
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use alloc::string::ToString;

    fn roundtrip(src: &str, n: usize) -> alloc::string::String {
        let once = parse(src, n).unwrap().to_string();
        let twice = parse(&once, n).unwrap().to_string();
        assert_eq!(once, twice, "source {src}");
        once
    }

    #[test]
    fn prints_in_input_grammar() {
        assert_eq!(roundtrip("x0^2 + 3*x1", 2), "x0^2 + 3*x1");
        assert_eq!(roundtrip("x0 - 3", 1), "x0 - 3");
        assert_eq!(roundtrip("-x0^2", 1), "-x0^2");
        assert_eq!(roundtrip("x0 - x1*x0", 2), "x0 - x1*x0");
        assert_eq!(roundtrip("(x0 + 1)*(x0 - 1)", 1), "(x0 + 1)*(x0 - 1)");
        assert_eq!(roundtrip("x0/(x1*x0)", 2), "x0/(x1*x0)");
        assert_eq!(roundtrip("(x0^2)^3", 1), "(x0^2)^3");
        assert_eq!(roundtrip("(-3)^2", 0), "(-3)^2");
        assert_eq!(roundtrip("0.3*x0", 1), "3/10*x0");
        assert_eq!(roundtrip("x0*(x1/x0)", 2), "x0*(x1/x0)");
        assert_eq!(roundtrip("-(x0*x1)", 2), "-(x0*x1)");
        assert_eq!(roundtrip("-(3)", 0), "-1*3");
        assert_eq!(roundtrip("sin(-x0)", 1), "sin(-x0)");
        assert_eq!(roundtrip("x0 - (x1 - 2)", 2), "x0 - (x1 - 2)");
        assert_eq!(roundtrip("(x0*x1)*x0", 2), "(x0*x1)*x0");
        assert_eq!(roundtrip("(-1*(4/3))*0", 0), "(-1*(4/3))*0");
        assert_eq!(roundtrip("x0 - 4/3", 1), "x0 - 4/3");
        assert_eq!(roundtrip("2/3/4 + 0/3", 0), "2/3/4 + 0/3");
    }
}
