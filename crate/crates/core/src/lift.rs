//! The Weil functor on charts.
//!
//! A point of `T^W(R^n) = W^n` splits as `a + ν` with `a` real and `ν`
//! nilpotent. The lift of `f` sends it to `Σ_{|α|<k} ∂^α f(a)/α! · ν^α`, which
//! is exact because `ν^α = 0` once `|α| ≥ k`.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::algebra::{Tensor, WeilAlgebra, WeilElement, WeilMorphism};
use crate::error::{Error, Result};
use crate::expr::{Arith, Expr, Primitive, SmoothMap};
use crate::faults::{self, Fault};
use crate::scalar::{factorial, Rational, Scalar};

/// A point of `W^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeilPoint<S = Rational> {
    alg: Arc<WeilAlgebra>,
    coords: Vec<WeilElement<S>>,
}

impl<S: Scalar> WeilPoint<S> {
    pub fn new(alg: &Arc<WeilAlgebra>, coords: Vec<WeilElement<S>>) -> Result<Self> {
        if coords.iter().any(|c| c.algebra() != alg) {
            return Err(Error::AlgebraMismatch);
        }
        Ok(WeilPoint {
            alg: alg.clone(),
            coords,
        })
    }

    /// The real point `a` seen inside `W^n`.
    pub fn from_real(alg: &Arc<WeilAlgebra>, a: &[S]) -> Self {
        WeilPoint {
            alg: alg.clone(),
            coords: a.iter().map(|x| alg.constant(x.clone())).collect(),
        }
    }

    /// Build from `n · dim(W)` flat coordinates.
    pub fn from_flat(alg: &Arc<WeilAlgebra>, flat: &[S]) -> Result<Self> {
        let d = alg.dim();
        if !flat.len().is_multiple_of(d) {
            return Err(Error::CoordinateCount {
                expected: d * (flat.len() / d + 1),
                found: flat.len(),
            });
        }
        let coords = flat
            .chunks(d)
            .map(|c| alg.from_coords(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeilPoint {
            alg: alg.clone(),
            coords,
        })
    }

    pub fn algebra(&self) -> &Arc<WeilAlgebra> {
        &self.alg
    }

    pub fn components(&self) -> &[WeilElement<S>] {
        &self.coords
    }

    pub fn arity(&self) -> usize {
        self.coords.len()
    }

    /// The base point: augmentation of every component.
    pub fn base(&self) -> Vec<S> {
        self.coords.iter().map(|c| c.augmentation().clone()).collect()
    }

    pub fn flat(&self) -> Vec<S> {
        self.coords.iter().flat_map(|c| c.coords().iter().cloned()).collect()
    }

    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.coords.len() == other.coords.len()
            && self.coords.iter().zip(&other.coords).all(|(a, b)| a.close_to(b, tol))
    }

    pub fn to_float(&self) -> WeilPoint<f64> {
        WeilPoint {
            alg: self.alg.clone(),
            coords: self.coords.iter().map(WeilElement::to_float).collect(),
        }
    }
}

impl<S: Scalar> core::fmt::Display for WeilPoint<S> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// All nonzero partial derivatives of a map up to a given order.
///
/// Entry `α` is reached from its parent `α − e_i` (where `i` is the last
/// nonzero index of `α`) by one symbolic derivative.
#[derive(Debug, Clone)]
struct Partials {
    // parents precede children; entry 0 is α = 0
    entries: Vec<Partial>,
    index: BTreeMap<Vec<u32>, usize>,
}

#[derive(Debug, Clone)]
struct Partial {
    alpha: Vec<u32>,
    parent: usize,
    var: usize,
    inv_factorial: Rational,
    derivs: Vec<Expr>,
}

impl Partials {
    fn new(f: &SmoothMap, max_order: usize) -> Self {
        let arity = f.arity();
        let mut entries = vec![Partial {
            alpha: vec![0; arity],
            parent: 0,
            var: 0,
            inv_factorial: Rational::one(),
            derivs: f.components().to_vec(),
        }];
        let mut index = BTreeMap::new();
        index.insert(vec![0; arity], 0);
        let mut frontier = vec![0usize];
        for _ in 0..max_order {
            let mut next = Vec::new();
            for &p in &frontier {
                let alpha = entries[p].alpha.clone();
                // extend only at or after the last nonzero index so each α appears once
                let start = alpha.iter().rposition(|&e| e > 0).unwrap_or(0);
                for var in start..arity {
                    let derivs: Vec<Expr> = entries[p].derivs.iter().map(|e| e.derive(var)).collect();
                    if derivs.iter().all(Expr::is_zero) {
                        continue;
                    }
                    let mut a = alpha.clone();
                    a[var] += 1;
                    let inv_factorial = a
                        .iter()
                        .map(|&e| factorial(e as usize))
                        .fold(Rational::one(), |acc, x| acc * x)
                        .recip();
                    index.insert(a.clone(), entries.len());
                    next.push(entries.len());
                    entries.push(Partial {
                        alpha: a,
                        parent: p,
                        var,
                        inv_factorial,
                        derivs,
                    });
                }
            }
            frontier = next;
        }
        Partials {
            entries,
            index,
        }
    }

    fn order_of(&self, k: usize) -> usize {
        self.entries[k].alpha.iter().sum::<u32>() as usize
    }

    fn weight<S: Scalar>(&self, k: usize) -> S {
        if faults::is_active(Fault::DropFactorial) {
            S::one()
        } else {
            S::from_rational(&self.entries[k].inv_factorial)
        }
    }
}

/// `T^W f` for a fixed map and algebra, with its partials precomputed.
#[derive(Debug, Clone)]
pub struct LiftedMap {
    map: SmoothMap,
    alg: Arc<WeilAlgebra>,
    partials: Partials,
}

/// Precompute the lift of `f` to `W`.
pub fn lift_map(f: &SmoothMap, w: &Arc<WeilAlgebra>) -> LiftedMap {
    let order = w.nilpotency_index().saturating_sub(1);
    LiftedMap {
        map: f.clone(),
        alg: w.clone(),
        partials: Partials::new(f, order),
    }
}

fn check_point<S: Scalar>(f: &SmoothMap, w: &Arc<WeilAlgebra>, p: &WeilPoint<S>) -> Result<()> {
    if p.alg != *w {
        return Err(Error::AlgebraMismatch);
    }
    if p.arity() != f.arity() {
        return Err(Error::MapArity {
            expected: f.arity(),
            found: p.arity(),
        });
    }
    if let Some(dom) = f.domain() {
        if !dom.contains(&p.base()) {
            return Err(Error::Domain("base point lies outside the domain of the map".into()));
        }
    }
    Ok(())
}

impl LiftedMap {
    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    pub fn algebra(&self) -> &Arc<WeilAlgebra> {
        &self.alg
    }

    pub fn apply<S: Scalar>(&self, p: &WeilPoint<S>) -> Result<WeilPoint<S>> {
        check_point(&self.map, &self.alg, p)?;
        if S::MODE == crate::scalar::Mode::Exact && self.map.has_primitives() {
            return Err(Error::ModeMismatch("transcendental primitives".into()));
        }
        let a = p.base();
        let nu: Vec<WeilElement<S>> = p.coords.iter().map(WeilElement::nilpotent_part).collect();
        let parts = &self.partials;
        let k = self.alg.nilpotency_index();
        let mut powers: Vec<Option<WeilElement<S>>> = Vec::with_capacity(parts.entries.len());
        let mut out: Vec<WeilElement<S>> = (0..self.map.coarity()).map(|_| self.alg.zero()).collect();
        for (t, entry) in parts.entries.iter().enumerate() {
            let power = if t == 0 {
                Some(self.alg.one())
            } else if parts.order_of(t) >= k {
                None
            } else {
                powers[entry.parent]
                    .as_ref()
                    .map(|q: &WeilElement<S>| q.mul_unchecked(&nu[entry.var]))
                    .filter(|q| !q.is_zero())
            };
            if let Some(q) = &power {
                let w: S = parts.weight(t);
                for (j, d) in entry.derivs.iter().enumerate() {
                    if d.is_zero() {
                        continue;
                    }
                    let c = d.eval_real(&a)? * w.clone();
                    out[j].add_scaled(&c, q);
                }
            }
            powers.push(power);
        }
        WeilPoint::new(&self.alg, out)
    }
}

/// Arithmetic on elements of one Weil algebra, with primitives applied by
/// their truncated Taylor series.
#[derive(Debug, Clone)]
pub struct WeilArith<S> {
    alg: Arc<WeilAlgebra>,
    _scalar: core::marker::PhantomData<S>,
}

impl<S: Scalar> WeilArith<S> {
    pub fn new(alg: &Arc<WeilAlgebra>) -> Self {
        WeilArith {
            alg: alg.clone(),
            _scalar: core::marker::PhantomData,
        }
    }
}

impl<S: Scalar> Arith for WeilArith<S> {
    type Value = WeilElement<S>;

    fn constant(&self, q: &Rational) -> WeilElement<S> {
        self.alg.constant(S::from_rational(q))
    }

    fn add(&self, a: &WeilElement<S>, b: &WeilElement<S>) -> Result<WeilElement<S>> {
        a.add(b)
    }

    fn mul(&self, a: &WeilElement<S>, b: &WeilElement<S>) -> Result<WeilElement<S>> {
        a.mul(b)
    }

    fn div(&self, a: &WeilElement<S>, b: &WeilElement<S>) -> Result<WeilElement<S>> {
        a.mul(&reciprocal(b)?)
    }

    fn call(&self, p: Primitive, a: &WeilElement<S>) -> Result<WeilElement<S>> {
        taylor_primitive(p, a.augmentation(), &a.nilpotent_part())
    }
}

/// `1/(b0 + ν) = Σ_{j<k} (−1)^j ν^j / b0^(j+1)`.
pub fn reciprocal<S: Scalar>(b: &WeilElement<S>) -> Result<WeilElement<S>> {
    let alg = b.algebra().clone();
    let inv = S::one().checked_div(b.augmentation())?;
    let nu = b.nilpotent_part();
    let mut term = alg.constant(inv.clone());
    let mut acc = term.clone();
    for _ in 1..alg.nilpotency_index() {
        term = term.mul_unchecked(&nu).scale(&-inv.clone());
        acc = acc.add_unchecked(&term);
    }
    Ok(acc)
}

/// `Σ_{j<k} p^(j)(a)/j! · ν^j`.
pub fn taylor_primitive<S: Scalar>(prim: Primitive, a: &S, nu: &WeilElement<S>) -> Result<WeilElement<S>> {
    if !nu.is_nilpotent() {
        return Err(Error::NotNilpotent);
    }
    let alg = nu.algebra().clone();
    let k = alg.nilpotency_index();
    let derivs = S::primitive_derivatives(prim, a, k)?;
    let mut acc = alg.zero();
    let mut power = alg.one();
    for (j, d) in derivs.iter().enumerate() {
        if j > 0 {
            power = power.mul_unchecked(nu);
        }
        let c = d.clone() * S::from_rational(&factorial(j).recip());
        acc.add_scaled(&c, &power);
    }
    Ok(acc)
}

/// Evaluate the map's expressions directly on Weil elements.
///
/// This is a second route to `T^W f`, independent of symbolic derivatives.
pub fn eval_direct<S: Scalar>(f: &SmoothMap, p: &WeilPoint<S>) -> Result<WeilPoint<S>> {
    check_point(f, &p.alg, p)?;
    let ctx = WeilArith::<S>::new(&p.alg);
    let out = f
        .components()
        .iter()
        .map(|e| e.eval(&ctx, &p.coords))
        .collect::<Result<Vec<_>>>()?;
    WeilPoint::new(&p.alg, out)
}

/// `α_φ(R^n) = φ^n`.
pub fn alpha_on_chart<S: Scalar>(phi: &WeilMorphism, p: &WeilPoint<S>) -> Result<WeilPoint<S>> {
    if p.alg != *phi.source() {
        return Err(Error::AlgebraMismatch);
    }
    let coords = p.coords.iter().map(|c| phi.apply(c)).collect::<Result<Vec<_>>>()?;
    WeilPoint::new(phi.target(), coords)
}

/// A point of `T^{W2}(T^{W1} R^n) = (W2^{dim W1})^n`.
///
/// `coords[i][b]` is the `W2`-element sitting at basis slot `b` of the `i`-th
/// `W1`-coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedPoint<S = Rational> {
    pub inner: Arc<WeilAlgebra>,
    pub outer: Arc<WeilAlgebra>,
    pub coords: Vec<Vec<WeilElement<S>>>,
}

impl<S: Scalar> IteratedPoint<S> {
    /// Identify with a point of `(W1 ⊗ W2)^n`.
    pub fn to_tensor(&self, t: &Tensor) -> Result<WeilPoint<S>> {
        if *t.left_factor() != self.inner || *t.right_factor() != self.outer {
            return Err(Error::AlgebraMismatch);
        }
        let coords = self.coords.iter().map(|c| t.join(c)).collect::<Result<Vec<_>>>()?;
        WeilPoint::new(&t.algebra, coords)
    }

    pub fn from_tensor(t: &Tensor, p: &WeilPoint<S>) -> Result<Self> {
        let coords = p.coords.iter().map(|c| t.split(c)).collect::<Result<Vec<_>>>()?;
        Ok(IteratedPoint {
            inner: t.left_factor().clone(),
            outer: t.right_factor().clone(),
            coords,
        })
    }
}

// product in W1 ⊗ W2 written as W1-coordinates with values in W2
fn mul_over<S: Scalar>(inner: &WeilAlgebra, u: &[WeilElement<S>], v: &[WeilElement<S>]) -> Vec<WeilElement<S>> {
    let d = u.len();
    let table = S::structure(inner);
    let mut out: Vec<WeilElement<S>> = u.iter().map(|x| x.algebra().zero()).collect();
    for (i, a) in u.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in v.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let ab = a.mul_unchecked(b);
            for (k, c) in &table[i * d + j] {
                out[*k].add_scaled(c, &ab);
            }
        }
    }
    out
}

/// `T^{W2}(T^{W1} f)`, computed without the tensor algebra.
#[derive(Debug, Clone)]
pub struct IteratedLift {
    map: SmoothMap,
    inner: Arc<WeilAlgebra>,
    outer: Arc<WeilAlgebra>,
    partials: Partials,
}

/// Lift `f` by `W1` and then by `W2`.
///
/// Writing a point as `A + N` with `A` the `W2`-valued base and `N` its
/// `W1`-nilpotent part, and `A = a + μ`, the result is the double Taylor sum
/// `Σ_{α,β} ∂^{α+β} f(a)/(α! β!) · μ^β · N^α`.
pub fn lift_iterated(f: &SmoothMap, inner: &Arc<WeilAlgebra>, outer: &Arc<WeilAlgebra>) -> IteratedLift {
    let order = inner.nilpotency_index() + outer.nilpotency_index();
    IteratedLift {
        map: f.clone(),
        inner: inner.clone(),
        outer: outer.clone(),
        partials: Partials::new(f, order.saturating_sub(2)),
    }
}

impl IteratedLift {
    pub fn apply<S: Scalar>(&self, p: &IteratedPoint<S>) -> Result<IteratedPoint<S>> {
        if p.inner != self.inner || p.outer != self.outer {
            return Err(Error::AlgebraMismatch);
        }
        if p.coords.len() != self.map.arity() {
            return Err(Error::MapArity {
                expected: self.map.arity(),
                found: p.coords.len(),
            });
        }
        let d1 = self.inner.dim();
        if p.coords.iter().any(|c| c.len() != d1 || c.iter().any(|e| *e.algebra() != self.outer)) {
            return Err(Error::AlgebraMismatch);
        }
        let big_a: Vec<WeilElement<S>> = p.coords.iter().map(|c| c[0].clone()).collect();
        let a: Vec<S> = big_a.iter().map(|e| e.augmentation().clone()).collect();
        if let Some(dom) = self.map.domain() {
            if !dom.contains(&a) {
                return Err(Error::Domain("base point lies outside the domain of the map".into()));
            }
        }
        let mu: Vec<WeilElement<S>> = big_a.iter().map(WeilElement::nilpotent_part).collect();
        let big_n: Vec<Vec<WeilElement<S>>> = p
            .coords
            .iter()
            .map(|c| {
                let mut v = c.clone();
                v[0] = self.outer.zero();
                v
            })
            .collect();

        let parts = &self.partials;
        let (k1, k2) = (self.inner.nilpotency_index(), self.outer.nilpotency_index());
        let arity = self.map.arity();
        let unit_over: Vec<WeilElement<S>> = (0..d1)
            .map(|b| if b == 0 { self.outer.one() } else { self.outer.zero() })
            .collect();

        // N^α over W1 for |α| < k1 and μ^β in W2 for |β| < k2, keyed by multi-index
        let mut n_pow: BTreeMap<Vec<u32>, Vec<WeilElement<S>>> = BTreeMap::new();
        let mut mu_pow: BTreeMap<Vec<u32>, WeilElement<S>> = BTreeMap::new();
        n_pow.insert(vec![0; arity], unit_over.clone());
        mu_pow.insert(vec![0; arity], self.outer.one());
        for entry in &parts.entries[1..] {
            let order = entry.alpha.iter().sum::<u32>() as usize;
            let parent = &parts.entries[entry.parent].alpha;
            if order < k1 {
                if let Some(q) = n_pow.get(parent) {
                    let next = mul_over(&self.inner, q, &big_n[entry.var]);
                    if next.iter().any(|e| !e.is_zero()) {
                        n_pow.insert(entry.alpha.clone(), next);
                    }
                }
            }
            if order < k2 {
                if let Some(q) = mu_pow.get(parent) {
                    let next = q.mul_unchecked(&mu[entry.var]);
                    if !next.is_zero() {
                        mu_pow.insert(entry.alpha.clone(), next);
                    }
                }
            }
        }

        let drop = faults::is_active(Fault::DropFactorial);
        let inv_fact = |m: &[u32]| -> S {
            if drop {
                S::one()
            } else {
                let f = m.iter().map(|&e| factorial(e as usize)).fold(Rational::one(), |acc, x| acc * x);
                S::from_rational(&f.recip())
            }
        };
        let coarity = self.map.coarity();
        // each partial is evaluated once, on demand
        let mut values: Vec<Option<Vec<S>>> = vec![None; parts.entries.len()];
        let mu_pow: Vec<(S, &Vec<u32>, &WeilElement<S>)> =
            mu_pow.iter().map(|(beta, mb)| (inv_fact(beta), beta, mb)).collect();
        let mut out: Vec<Vec<WeilElement<S>>> = (0..coarity)
            .map(|_| (0..d1).map(|_| self.outer.zero()).collect())
            .collect();
        for (alpha, na) in &n_pow {
            let wa = inv_fact(alpha);
            // g[j] = Σ_β ∂^{α+β} f_j(a)/(α! β!) · μ^β
            let mut g: Vec<WeilElement<S>> = (0..coarity).map(|_| self.outer.zero()).collect();
            for (wb, beta, mb) in &mu_pow {
                let gamma: Vec<u32> = alpha.iter().zip(beta.iter()).map(|(x, y)| x + y).collect();
                let Some(&t) = parts.index.get(&gamma) else {
                    continue;
                };
                if values[t].is_none() {
                    let vals = parts.entries[t]
                        .derivs
                        .iter()
                        .map(|d| if d.is_zero() { Ok(S::zero()) } else { d.eval_real(&a) })
                        .collect::<Result<Vec<S>>>()?;
                    values[t] = Some(vals);
                }
                let w = wa.mul_ref(wb);
                for (j, v) in values[t].as_ref().into_iter().flatten().enumerate() {
                    if !v.is_zero() {
                        g[j].add_scaled(&v.mul_ref(&w), mb);
                    }
                }
            }
            for (j, gj) in g.iter().enumerate() {
                if gj.is_zero() {
                    continue;
                }
                for (b, x) in na.iter().enumerate() {
                    if !x.is_zero() {
                        let term = x.mul_unchecked(gj);
                        out[j][b].add_scaled(&S::one(), &term);
                    }
                }
            }
        }
        Ok(IteratedPoint {
            inner: self.inner.clone(),
            outer: self.outer.clone(),
            coords: out,
        })
    }
}
