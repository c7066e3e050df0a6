//! Multivariate polynomials over Q and Buchberger completion.
//!
//! Term order is degree-lexicographic with `x0 > x1 > …`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::scalar::Rational;

/// Exponent vector, ordered degree-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self / other`; caller guarantees `other | self`.
    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// `Some(i)` when this is a pure power `x_i^e`, `e ≥ 1`.
    pub fn pure_power_of(&self) -> Option<usize> {
        let mut nz = self.0.iter().enumerate().filter(|(_, &e)| e > 0);
        match (nz.next(), nz.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    /// Enumerate all monomials of exactly `degree` in `nvars` variables.
    pub fn all_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
        fn go(nvars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if prefix.len() + 1 == nvars {
                prefix.push(left);
                out.push(Monomial(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=left).rev() {
                prefix.push(e);
                go(nvars, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if nvars == 0 {
            if degree == 0 {
                out.push(Monomial(Vec::new()));
            }
            return out;
        }
        go(nvars, degree, &mut Vec::with_capacity(nvars), &mut out);
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{i}")?;
            } else {
                write!(f, "x{i}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Polynomial::term(Monomial::one(nvars), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Polynomial::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Polynomial::term(Monomial::var(nvars, i), Rational::one())
    }

    /// Parse a polynomial string over `x0..x{nvars-1}`.
    pub fn parse(src: &str, nvars: usize) -> Result<Self> {
        Polynomial::from_expr(&expr::parse(src, nvars)?, nvars)
    }

    /// Expand an expression that uses only `+ − *`, integer powers and
    /// division by constants.
    pub fn from_expr(e: &Expr, nvars: usize) -> Result<Self> {
        Ok(match e {
            Expr::Const(c) => Polynomial::constant(nvars, c.clone()),
            Expr::Var(i) => {
                if *i >= nvars {
                    return Err(Error::ArityViolation {
                        index: *i,
                        arity: nvars,
                    });
                }
                Polynomial::var(nvars, *i)
            }
            Expr::Sum(xs) => {
                let mut acc = Polynomial::zero(nvars);
                for x in xs {
                    acc = acc.add(&Polynomial::from_expr(x, nvars)?);
                }
                acc
            }
            Expr::Prod(xs) => {
                let mut acc = Polynomial::constant(nvars, Rational::one());
                for x in xs {
                    acc = acc.mul(&Polynomial::from_expr(x, nvars)?);
                }
                acc
            }
            Expr::Pow(b, n) => {
                let b = Polynomial::from_expr(b, nvars)?;
                (0..*n).fold(Polynomial::constant(nvars, Rational::one()), |acc, _| {
                    acc.mul(&b)
                })
            }
            Expr::Quot(a, b) => match b.canonical() {
                Expr::Const(c) if !c.is_zero() => {
                    Polynomial::from_expr(a, nvars)?.scale(&c.recip())
                }
                _ => return Err(Error::NotPolynomial(alloc::format!("{e}"))),
            },
            Expr::Call(..) => return Err(Error::NotPolynomial(alloc::format!("{e}"))),
        })
    }

    pub fn to_expr(&self) -> Expr {
        let terms: Vec<Expr> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let mut factors = vec![Expr::Const(c.clone())];
                for (i, &e) in m.0.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(Expr::Var(i)),
                        e => factors.push(Expr::Var(i).pow(e)),
                    }
                }
                Expr::Prod(factors)
            })
            .collect();
        Expr::Sum(terms).canonical()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(n, d)| (n.mul(m), d * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }

    /// Rename variables: `x_i ↦ x_{offset+i}` inside `nvars` variables.
    pub fn shift(&self, nvars: usize, offset: usize) -> Polynomial {
        let mut out = Polynomial::zero(nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; nvars];
            e[offset..offset + m.nvars()].copy_from_slice(&m.0);
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    /// Full reduction modulo `basis` (every term, not only the leading one).
    pub fn reduce(&self, basis: &[Polynomial]) -> Polynomial {
        let mut p = self.clone();
        let mut rest = Polynomial::zero(self.nvars);
        while let Some((m, c)) = p.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let divisor = basis.iter().find(|g| {
                g.leading()
                    .is_some_and(|(lm, _)| lm.divides(&m))
            });
            match divisor {
                Some(g) => {
                    let (lm, lc) = g.leading().unwrap();
                    let q = m.div(lm);
                    p = p.sub(&g.mul_term(&q, &(&c / lc)));
                }
                None => {
                    p.terms.remove(&m);
                    rest.add_term(m, c);
                }
            }
        }
        rest
    }

    pub fn to_string_with(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let coeff = if a.is_integer() {
                alloc::format!("{}", a.numer())
            } else {
                alloc::format!("{}/{}", a.numer(), a.denom())
            };
            if m.is_one() {
                f.write_str(&coeff)?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{coeff}*{m}")?;
            }
        }
        Ok(())
    }
}

fn s_polynomial(f: &Polynomial, g: &Polynomial) -> Polynomial {
    let (fm, fc) = f.leading().unwrap();
    let (gm, gc) = g.leading().unwrap();
    let l = fm.lcm(gm);
    f.mul_term(&l.div(fm), &fc.recip())
        .sub(&g.mul_term(&l.div(gm), &gc.recip()))
}

/// Reduced Gröbner basis of the ideal generated by `gens`, sorted by leading
/// monomial.
pub fn groebner_basis(gens: &[Polynomial]) -> Vec<Polynomial> {
    let mut basis: Vec<Polynomial> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(Polynomial::monic)
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..basis.len())
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .collect();
    while let Some((i, j)) = pairs.pop() {
        let (li, lj) = (basis[i].leading().unwrap().0, basis[j].leading().unwrap().0);
        // coprime leading monomials reduce to zero
        if li.0.iter().zip(&lj.0).all(|(a, b)| *a == 0 || *b == 0) {
            continue;
        }
        let r = s_polynomial(&basis[i], &basis[j]).reduce(&basis);
        if !r.is_zero() {
            let k = basis.len();
            basis.push(r.monic());
            pairs.extend((0..k).map(|i| (i, k)));
        }
    }
    // minimal: drop elements whose leading monomial is divisible by another's
    let mut minimal: Vec<Polynomial> = Vec::new();
    for (k, g) in basis.iter().enumerate() {
        let lm = g.leading().unwrap().0;
        let redundant = basis.iter().enumerate().any(|(l, h)| {
            let hm = h.leading().unwrap().0;
            l != k && hm.divides(lm) && (hm != lm || l < k)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    // reduced: reduce every element by the others
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<Polynomial> = minimal
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != k)
            .map(|(_, g)| g.clone())
            .collect();
        let (lm, _) = minimal[k].leading().unwrap();
        let lead = Polynomial::term(lm.clone(), Rational::one());
        let tail = minimal[k].sub(&lead).reduce(&others);
        reduced.push(lead.add(&tail));
    }
    reduced.sort_by(|a, b| a.leading().unwrap().0.cmp(b.leading().unwrap().0));
    reduced
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    #[test]
    fn deglex_order() {
        let x0 = Monomial(vec![1, 0]);
        let x1 = Monomial(vec![0, 1]);
        let x1sq = Monomial(vec![0, 2]);
        assert!(x0 > x1);
        assert!(x1sq > x0);
        assert_eq!(Monomial::all_of_degree(2, 2).len(), 3);
        assert_eq!(Monomial::all_of_degree(3, 2).len(), 6);
        assert_eq!(Monomial::all_of_degree(0, 0).len(), 1);
    }

    #[test]
    fn parse_and_print() {
        let q = p("(x0 + 1)^2 - 2*x0", 1);
        assert_eq!(q, p("x0^2 + 1", 1));
        assert_eq!(alloc::format!("{}", p("x0^2 - x0 + 3/2*x1", 2)), "x0^2 - x0 + 3/2*x1");
        assert_eq!(p(&alloc::format!("{}", p("x0^2 - 1/3", 1)), 1), p("x0^2 - 1/3", 1));
        assert!(matches!(
            Polynomial::parse("x0/x1", 2),
            Err(Error::NotPolynomial(_))
        ));
        assert_eq!(p("x0/2", 1), Polynomial::var(1, 0).scale(&crate::scalar::ratio(1, 2)));
    }

    #[test]
    fn groebner_of_non_monomial_ideal() {
        // (x0^2 - x1^3, x0*x1)
        let g = groebner_basis(&[p("x0^2 - x1^3", 2), p("x0*x1", 2)]);
        let leads: Vec<String> = g
            .iter()
            .map(|q| alloc::format!("{}", q.leading().unwrap().0))
            .collect();
        // x1^3 leads x0^2 - x1^3 under deglex; the S-pair adds x0^3
        assert_eq!(leads, ["x0*x1", "x1^3", "x0^3"]);
        assert!(p("x1^4", 2).reduce(&g).is_zero());
        assert!(p("x0^3", 2).reduce(&g).is_zero());
        assert_eq!(p("x1^3", 2).reduce(&g), p("x0^2", 2));
    }

    #[test]
    fn reduction_is_idempotent() {
        let g = groebner_basis(&[p("x0^3", 2), p("x1^2 - x0^2", 2)]);
        let f = p("x0^2*x1^3 + 7*x1^2 + x0", 2);
        let r = f.reduce(&g);
        assert_eq!(r.reduce(&g), r);
        let _ = rational(0);
    }
}
