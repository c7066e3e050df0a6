//! Expression language for chart-level smooth maps `Rⁿ → Rᵐ`.
//!
//! Grammar (variables are `x0..x{n-1}`):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' unary)?          exponent folds to an integer ≥ 0
//! atom     := number | 'x' digits | prim '(' expr ')' | '(' expr ')'
//! prim     := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt'
//! number   := digits ('.' digits?)? | '.' digits
//! ```
//!
//! Adding a primitive needs a derivative rule here and a Taylor rule in
//! [`Scalar::primitive_derivatives`](crate::scalar::Scalar::primitive_derivatives).

mod parse;
mod print;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::marker::PhantomData;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rational, Rational, Scalar};

pub use parse::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Primitive {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Primitive {
    pub const ALL: [Primitive; 5] = [
        Primitive::Sin,
        Primitive::Cos,
        Primitive::Exp,
        Primitive::Log,
        Primitive::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Sin => "sin",
            Primitive::Cos => "cos",
            Primitive::Exp => "exp",
            Primitive::Log => "log",
            Primitive::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Rational),
    Var(usize),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Quot(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Primitive, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(rational(n))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn pow(self, n: u32) -> Expr {
        Expr::Pow(Box::new(self), n)
    }

    pub fn call(p: Primitive, arg: Expr) -> Expr {
        Expr::Call(p, Box::new(arg))
    }

    pub fn quot(num: Expr, den: Expr) -> Expr {
        Expr::Quot(Box::new(num), Box::new(den))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Expr {
        Expr::Prod(vec![Expr::int(-1), self])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Largest variable index mentioned, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Sum(xs) | Expr::Prod(xs) => xs.iter().filter_map(Expr::max_var).max(),
            Expr::Quot(a, b) => a.max_var().max(b.max_var()),
            Expr::Pow(b, _) | Expr::Call(_, b) => b.max_var(),
        }
    }

    pub fn has_primitives(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Sum(xs) | Expr::Prod(xs) => xs.iter().any(Expr::has_primitives),
            Expr::Quot(a, b) => a.has_primitives() || b.has_primitives(),
            Expr::Pow(b, _) => b.has_primitives(),
            Expr::Call(..) => true,
        }
    }

    pub fn check_arity(&self, arity: usize) -> Result<()> {
        match self.max_var() {
            Some(i) if i >= arity => Err(Error::ArityViolation { index: i, arity }),
            _ => Ok(()),
        }
    }

    /// Replace each `x_i` by `args[i]`.
    pub fn substitute(&self, args: &[Expr]) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => args[*i].clone(),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| x.substitute(args)).collect()),
            Expr::Prod(xs) => Expr::Prod(xs.iter().map(|x| x.substitute(args)).collect()),
            Expr::Quot(a, b) => Expr::quot(a.substitute(args), b.substitute(args)),
            Expr::Pow(b, n) => b.substitute(args).pow(*n),
            Expr::Call(p, a) => Expr::call(*p, a.substitute(args)),
        }
    }

    /// Canonical form: nested sums and products flattened, constants folded,
    /// zeros and ones absorbed, operands sorted.
    pub fn canonical(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Call(p, a) => {
                let a = a.canonical();
                match (p, a.as_const()) {
                    (Primitive::Sin, Some(c)) | (Primitive::Sqrt, Some(c)) if c.is_zero() => {
                        Expr::zero()
                    }
                    (Primitive::Exp, Some(c)) if c.is_zero() => Expr::one(),
                    (Primitive::Log, Some(c)) | (Primitive::Sqrt, Some(c)) if c.is_one() => {
                        if *p == Primitive::Log {
                            Expr::zero()
                        } else {
                            Expr::one()
                        }
                    }
                    (Primitive::Cos, Some(c)) if c.is_zero() => Expr::one(),
                    _ => Expr::call(*p, a),
                }
            }
            Expr::Pow(b, n) => {
                let b = b.canonical();
                match (n, b) {
                    (0, _) => Expr::one(),
                    (1, b) => b,
                    (n, Expr::Const(c)) => Expr::Const(num_traits::pow(c, *n as usize)),
                    (n, Expr::Pow(inner, m)) => Expr::Pow(inner, m * n),
                    (n, b) => b.pow(*n),
                }
            }
            Expr::Sum(xs) => {
                let mut constant = Rational::zero();
                let mut terms = Vec::new();
                for x in xs {
                    match x.canonical() {
                        Expr::Sum(inner) => {
                            for t in inner {
                                match t {
                                    Expr::Const(c) => constant += c,
                                    t => terms.push(t),
                                }
                            }
                        }
                        Expr::Const(c) => constant += c,
                        t => terms.push(t),
                    }
                }
                terms.sort();
                if !constant.is_zero() {
                    terms.insert(0, Expr::Const(constant));
                }
                match terms.len() {
                    0 => Expr::zero(),
                    1 => terms.pop().unwrap(),
                    _ => Expr::Sum(terms),
                }
            }
            Expr::Prod(xs) => {
                let mut constant = Rational::one();
                let mut factors = Vec::new();
                for x in xs {
                    match x.canonical() {
                        Expr::Prod(inner) => {
                            for f in inner {
                                match f {
                                    Expr::Const(c) => constant *= c,
                                    f => factors.push(f),
                                }
                            }
                        }
                        Expr::Const(c) => constant *= c,
                        f => factors.push(f),
                    }
                }
                if constant.is_zero() {
                    return Expr::zero();
                }
                factors.sort();
                if !constant.is_one() {
                    factors.insert(0, Expr::Const(constant));
                }
                match factors.len() {
                    0 => Expr::one(),
                    1 => factors.pop().unwrap(),
                    _ => Expr::Prod(factors),
                }
            }
            Expr::Quot(a, b) => {
                let (a, b) = (a.canonical(), b.canonical());
                if a.is_zero() {
                    return Expr::zero();
                }
                match b {
                    Expr::Const(c) if c.is_zero() => Expr::quot(a, Expr::Const(c)),
                    Expr::Const(c) => {
                        Expr::Prod(vec![Expr::Const(c.recip()), a]).canonical()
                    }
                    b => Expr::quot(a, b),
                }
            }
        }
    }

    /// Symbolic partial derivative with respect to `x_var`, in canonical form.
    pub fn derive(&self, var: usize) -> Expr {
        self.derive_raw(var).canonical()
    }

    fn derive_raw(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(i) => Expr::int((*i == var) as i64),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| x.derive_raw(var)).collect()),
            Expr::Prod(xs) => Expr::Sum(
                (0..xs.len())
                    .map(|i| {
                        let mut factors: Vec<Expr> = xs.clone();
                        factors[i] = xs[i].derive_raw(var);
                        Expr::Prod(factors)
                    })
                    .collect(),
            ),
            Expr::Quot(a, b) => {
                let num = Expr::Sum(vec![
                    Expr::Prod(vec![a.derive_raw(var), (**b).clone()]),
                    Expr::Prod(vec![Expr::int(-1), (**a).clone(), b.derive_raw(var)]),
                ]);
                Expr::quot(num, (**b).clone().pow(2))
            }
            Expr::Pow(b, n) => match n {
                0 => Expr::zero(),
                n => Expr::Prod(vec![
                    Expr::int(*n as i64),
                    (**b).clone().pow(n - 1),
                    b.derive_raw(var),
                ]),
            },
            Expr::Call(p, u) => {
                let du = u.derive_raw(var);
                let u = (**u).clone();
                match p {
                    Primitive::Sin => Expr::Prod(vec![Expr::call(Primitive::Cos, u), du]),
                    Primitive::Cos => Expr::Prod(vec![
                        Expr::int(-1),
                        Expr::call(Primitive::Sin, u),
                        du,
                    ]),
                    Primitive::Exp => Expr::Prod(vec![Expr::call(Primitive::Exp, u), du]),
                    Primitive::Log => Expr::quot(du, u),
                    Primitive::Sqrt => Expr::quot(
                        du,
                        Expr::Prod(vec![Expr::int(2), Expr::call(Primitive::Sqrt, u)]),
                    ),
                }
            }
        }
    }

    /// Evaluate over any arithmetic (scalars, Weil elements, …).
    pub fn eval<A: Arith>(&self, ctx: &A, point: &[A::Value]) -> Result<A::Value> {
        match self {
            Expr::Const(c) => Ok(ctx.constant(c)),
            Expr::Var(i) => point.get(*i).cloned().ok_or(Error::ArityViolation {
                index: *i,
                arity: point.len(),
            }),
            Expr::Sum(xs) => {
                let mut acc = ctx.constant(&Rational::zero());
                for x in xs {
                    acc = ctx.add(&acc, &x.eval(ctx, point)?)?;
                }
                Ok(acc)
            }
            Expr::Prod(xs) => {
                let mut acc = ctx.constant(&Rational::one());
                for x in xs {
                    acc = ctx.mul(&acc, &x.eval(ctx, point)?)?;
                }
                Ok(acc)
            }
            Expr::Quot(a, b) => ctx.div(&a.eval(ctx, point)?, &b.eval(ctx, point)?),
            Expr::Pow(b, n) => {
                let base = b.eval(ctx, point)?;
                let mut acc = ctx.constant(&Rational::one());
                let mut sq = base;
                let mut n = *n;
                while n > 0 {
                    if n & 1 == 1 {
                        acc = ctx.mul(&acc, &sq)?;
                    }
                    n >>= 1;
                    if n > 0 {
                        sq = ctx.mul(&sq, &sq)?;
                    }
                }
                Ok(acc)
            }
            Expr::Call(p, a) => ctx.call(*p, &a.eval(ctx, point)?),
        }
    }

    /// Evaluate at a real point (rational or float).
    pub fn eval_real<S: Scalar>(&self, point: &[S]) -> Result<S> {
        self.eval(&ScalarArith::<S>::new(), point)
    }
}

/// Arithmetic an [`Expr`] can be evaluated in.
pub trait Arith {
    type Value: Clone;
    fn constant(&self, q: &Rational) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn call(&self, p: Primitive, a: &Self::Value) -> Result<Self::Value>;
}

pub struct ScalarArith<S>(PhantomData<S>);

impl<S> ScalarArith<S> {
    pub fn new() -> Self {
        ScalarArith(PhantomData)
    }
}

impl<S> Default for ScalarArith<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> Arith for ScalarArith<S> {
    type Value = S;
    fn constant(&self, q: &Rational) -> S {
        S::from_rational(q)
    }
    fn add(&self, a: &S, b: &S) -> Result<S> {
        let mut sum = a.clone();
        sum.add_ref(b);
        Ok(sum)
    }
    fn mul(&self, a: &S, b: &S) -> Result<S> {
        Ok(a.mul_ref(b))
    }
    fn div(&self, a: &S, b: &S) -> Result<S> {
        a.checked_div(b)
    }
    fn call(&self, p: Primitive, a: &S) -> Result<S> {
        Ok(S::primitive_derivatives(p, a, 1)?.remove(0))
    }
}

/// One open interval; a missing bound is infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl Interval {
    pub fn new(lo: Option<Rational>, hi: Option<Rational>) -> Self {
        Interval { lo, hi }
    }

    pub fn full() -> Self {
        Interval { lo: None, hi: None }
    }

    pub fn contains<S: Scalar>(&self, x: &S) -> bool {
        use core::cmp::Ordering::*;
        let above = self.lo.as_ref().is_none_or(|lo| x.cmp_rational(lo) == Some(Greater));
        let below = self.hi.as_ref().is_none_or(|hi| x.cmp_rational(hi) == Some(Less));
        above && below
    }
}

/// An open box `∏ (lo_i, hi_i)`, the chart-level open subsets we support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenBox {
    pub intervals: Vec<Interval>,
}

impl OpenBox {
    pub fn new(intervals: Vec<Interval>) -> Self {
        OpenBox { intervals }
    }

    /// The open unit cube `(0,1)ⁿ`.
    pub fn unit(n: usize) -> Self {
        let i = Interval::new(Some(rational(0)), Some(rational(1)));
        OpenBox { intervals: vec![i; n] }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains<S: Scalar>(&self, point: &[S]) -> bool {
        point.len() == self.dim() && self.intervals.iter().zip(point).all(|(i, x)| i.contains(x))
    }
}

/// A chart-level smooth map `R^arity → R^components.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothMap {
    arity: usize,
    components: Vec<Expr>,
    domain: Option<OpenBox>,
}

impl SmoothMap {
    pub fn new(arity: usize, components: Vec<Expr>) -> Result<Self> {
        for c in &components {
            c.check_arity(arity)?;
        }
        Ok(SmoothMap {
            arity,
            components,
            domain: None,
        })
    }

    pub fn parse(arity: usize, sources: &[&str]) -> Result<Self> {
        let components = sources
            .iter()
            .map(|s| parse(s, arity))
            .collect::<Result<Vec<_>>>()?;
        SmoothMap::new(arity, components)
    }

    pub fn with_domain(mut self, domain: OpenBox) -> Result<Self> {
        if domain.dim() != self.arity {
            return Err(Error::MapArity {
                expected: self.arity,
                found: domain.dim(),
            });
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn identity(n: usize) -> Self {
        SmoothMap {
            arity: n,
            components: (0..n).map(Expr::Var).collect(),
            domain: None,
        }
    }

    /// Coordinate projection onto `indices`.
    pub fn projection(arity: usize, indices: &[usize]) -> Result<Self> {
        SmoothMap::new(arity, indices.iter().map(|&i| Expr::Var(i)).collect())
    }

    /// The linear map with the given rows.
    pub fn linear(arity: usize, rows: &[Vec<Rational>]) -> Result<Self> {
        let components = rows
            .iter()
            .map(|row| {
                let terms: Vec<Expr> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(j, c)| Expr::Prod(vec![Expr::Const(c.clone()), Expr::Var(j)]))
                    .collect();
                Expr::Sum(terms).canonical()
            })
            .collect();
        SmoothMap::new(arity, components)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coarity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn domain(&self) -> Option<&OpenBox> {
        self.domain.as_ref()
    }

    pub fn has_primitives(&self) -> bool {
        self.components.iter().any(Expr::has_primitives)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap> {
        if inner.coarity() != self.arity {
            return Err(Error::MapArity {
                expected: self.arity,
                found: inner.coarity(),
            });
        }
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(&inner.components))
            .collect();
        Ok(SmoothMap {
            arity: inner.arity,
            components,
            domain: inner.domain.clone(),
        })
    }

    /// `(self, other): Rⁿ → R^(m+l)`.
    pub fn pair(&self, other: &SmoothMap) -> Result<SmoothMap> {
        if other.arity != self.arity {
            return Err(Error::MapArity {
                expected: self.arity,
                found: other.arity,
            });
        }
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Ok(SmoothMap {
            arity: self.arity,
            components,
            domain: self.domain.clone(),
        })
    }

    pub fn eval_real<S: Scalar>(&self, point: &[S]) -> Result<alloc::vec::Vec<S>> {
        if point.len() != self.arity {
            return Err(Error::MapArity {
                expected: self.arity,
                found: point.len(),
            });
        }
        if let Some(d) = &self.domain {
            if !d.contains(point) {
                return Err(Error::Domain("point outside the map's domain".into()));
            }
        }
        self.components.iter().map(|c| c.eval_real(point)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn p(s: &str, n: usize) -> Expr {
        parse(s, n).unwrap()
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("x0^3", 1).derive(0), p("3*x0^2", 1).canonical());
        assert_eq!(
            p("sin(x0)*exp(x1)", 2).derive(0),
            p("cos(x0)*exp(x1)", 2).canonical()
        );
        assert_eq!(p("x0/x1", 2).derive(1), p("-x0/x1^2", 2).canonical());
    }

    #[test]
    fn primitive_derivative_rules() {
        let d = p("log(x0)", 1).derive(0);
        assert_eq!(d, p("1/x0", 1).canonical());
        let d = p("sqrt(x0)", 1).derive(0);
        assert_eq!(d.eval_real(&[4.0]).unwrap(), 0.25);
        let d = p("cos(x0^2)", 1).derive(0);
        let v: f64 = d.eval_real(&[0.5]).unwrap();
        assert!((v + 2.0 * 0.5 * libm_sin(0.25)).abs() < 1e-15);
    }

    fn libm_sin(x: f64) -> f64 {
        num_traits::Float::sin(x)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("x0^2", 1).eval_real(&[rational(3)]).unwrap(), rational(9));
        assert!(matches!(
            p("log(x0)", 1).eval_real(&[0.0]),
            Err(Error::Domain(_))
        ));
        assert_eq!(p("sin(x0)", 1).eval_real(&[0.0]).unwrap(), 0.0);
        assert!(matches!(
            p("x0/x1", 2).eval_real(&[rational(1), rational(0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            p("sqrt(x0)", 1).eval_real(&[-1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            p("exp(x0)", 1).eval_real(&[rational(0)]),
            Err(Error::ModeMismatch(_))
        ));
        assert_eq!(
            p("x0/3 + 0.5", 1).eval_real(&[rational(1)]).unwrap(),
            ratio(5, 6)
        );
    }

    #[test]
    fn canonical_flattens_and_folds() {
        let e = p("(x1 + (x0 + 0)) * 1 * (2 * 3)", 2).canonical();
        assert_eq!(e, p("6*(x0 + x1)", 2).canonical());
        assert_eq!(p("x0 * 0 + 4", 1).canonical(), Expr::int(4));
        assert_eq!(p("(x0^2)^3", 1).canonical(), p("x0^6", 1));
        assert_eq!(p("x0/2", 1).canonical(), p("1/2*x0", 1).canonical());
    }

    #[test]
    fn derive_commutes_with_sums() {
        let a = p("x0^3*x1", 2);
        let b = p("sin(x1)/x0", 2);
        let sum = Expr::Sum(vec![a.clone(), b.clone()]);
        let lhs = sum.derive(0);
        let rhs = Expr::Sum(vec![a.derive(0), b.derive(0)]).canonical();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn smooth_map_composition_and_domain() {
        let f = SmoothMap::parse(1, &["x0^2", "x0 + 1"]).unwrap();
        let g = SmoothMap::parse(2, &["x0*x1"]).unwrap();
        let h = g.compose(&f).unwrap();
        assert_eq!(h.eval_real(&[rational(2)]).unwrap(), [rational(12)]);
        assert!(g.compose(&g).is_err());
        assert_eq!(f.compose(&g).unwrap().coarity(), 2);

        let boxed = SmoothMap::parse(1, &["log(x0)"])
            .unwrap()
            .with_domain(OpenBox::unit(1))
            .unwrap();
        assert!(boxed.eval_real(&[0.5f64]).is_ok());
        assert!(matches!(boxed.eval_real(&[1.5f64]), Err(Error::Domain(_))));
    }

    #[test]
    fn open_box_is_open() {
        let b = OpenBox::unit(2);
        assert!(b.contains(&[ratio(1, 2), ratio(1, 3)]));
        assert!(!b.contains(&[rational(0), ratio(1, 3)]));
        assert!(!b.contains(&[ratio(1, 2), rational(1)]));
        assert!(Interval::full().contains(&1e300f64));
    }

    #[test]
    fn linear_map_builder() {
        let m = SmoothMap::linear(2, &[vec![rational(2), rational(0)], vec![ratio(1, 2), rational(-1)]])
            .unwrap();
        let y = m.eval_real(&[rational(3), rational(4)]).unwrap();
        assert_eq!(y, [rational(6), ratio(-5, 2)]);
    }
}
