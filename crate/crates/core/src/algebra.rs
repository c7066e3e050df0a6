//! Weil algebras `Q[x0..x{n-1}]/I`, their elements, morphisms and tensor products.
//!
//! The basis of an algebra is the set of standard monomials of the reduced
//! Gröbner basis of `I`. It is listed unit first, then by ascending degree, and
//! within one degree by descending exponent vector, so `x0` precedes `x1`.
//! Matrices and file formats depend on this order.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::faults::{self, Fault};
use crate::poly::{groebner_basis, Monomial, Polynomial};
use crate::scalar::{Rational, Scalar};

/// A finite-dimensional local algebra presented by generators and relations.
#[derive(Debug, Clone)]
pub struct WeilAlgebra {
    n_gens: usize,
    relations: Vec<Polynomial>,
    relation_src: Vec<String>,
    groebner: Vec<Polynomial>,
    basis: Vec<Monomial>,
    index: BTreeMap<Monomial, usize>,
    nilpotency: usize,
    // false only for presentations admitted while the locality check is skipped
    local: bool,
    reduction: BTreeMap<Monomial, Vec<Rational>>,
    table_exact: Vec<Vec<(usize, Rational)>>,
    table_float: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for WeilAlgebra {
    fn eq(&self, other: &Self) -> bool {
        core::ptr::eq(self, other)
            || (self.n_gens == other.n_gens && self.groebner == other.groebner)
    }
}

impl Eq for WeilAlgebra {}

impl WeilAlgebra {
    /// The algebra `R` itself: no generators.
    pub fn real() -> Arc<Self> {
        Self::new(0, Vec::new()).expect("R is a Weil algebra")
    }

    /// Parse relation strings in `x0..x{n-1}` and build the quotient.
    ///
    /// The strings are kept verbatim for [`WeilAlgebra::relation_strings`].
    pub fn from_strs(n_gens: usize, relations: &[&str]) -> Result<Arc<Self>> {
        let polys = relations
            .iter()
            .map(|r| Polynomial::parse(r, n_gens))
            .collect::<Result<Vec<_>>>()?;
        let src = relations.iter().map(|r| String::from(*r)).collect();
        Self::build(n_gens, polys, src)
    }

    pub fn new(n_gens: usize, relations: Vec<Polynomial>) -> Result<Arc<Self>> {
        let src = relations.iter().map(|r| alloc::format!("{r}")).collect();
        Self::build(n_gens, relations, src)
    }

    fn build(n_gens: usize, relations: Vec<Polynomial>, relation_src: Vec<String>) -> Result<Arc<Self>> {
        if let Some(r) = relations.iter().find(|r| r.nvars() != n_gens) {
            return Err(Error::WrongVariableCount {
                expected: n_gens,
                found: r.nvars(),
            });
        }
        if n_gens > 0 && relations.iter().all(Polynomial::is_zero) {
            return Err(Error::EmptyRelationsWithGenerators { n_gens });
        }
        let groebner = groebner_basis(&relations);
        if groebner
            .iter()
            .any(|g| g.leading().is_some_and(|(m, _)| m.is_one()))
        {
            return Err(Error::NotLocal {
                reason: "the relations generate the unit ideal".into(),
            });
        }

        // every variable needs a pure power among the leading monomials
        let mut bounds = vec![u32::MAX; n_gens];
        for g in &groebner {
            let (m, _) = g.leading().expect("Gröbner elements are nonzero");
            if let Some(i) = m.pure_power_of() {
                bounds[i] = bounds[i].min(m.0[i]);
            }
        }
        if let Some(generator) = bounds.iter().position(|&b| b == u32::MAX) {
            return Err(Error::NotFiniteDimensional { generator });
        }

        let leads: Vec<&Monomial> = groebner.iter().map(|g| g.leading().unwrap().0).collect();
        let mut basis: Vec<Monomial> = Vec::new();
        let mut exps = vec![0u32; n_gens];
        loop {
            let m = Monomial(exps.clone());
            if !leads.iter().any(|l| l.divides(&m)) {
                basis.push(m);
            }
            // odometer over the box of exponents below the pure-power bounds
            let mut i = 0;
            while i < n_gens {
                exps[i] += 1;
                if exps[i] < bounds[i] {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
            if i == n_gens {
                break;
            }
        }
        basis.sort_by(basis_order);
        let index: BTreeMap<Monomial, usize> =
            basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let dim = basis.len();

        let mut alg = WeilAlgebra {
            n_gens,
            relations,
            relation_src,
            groebner,
            basis,
            index,
            nilpotency: 0,
            local: false,
            reduction: BTreeMap::new(),
            table_exact: Vec::new(),
            table_float: Vec::new(),
        };

        if !faults::is_active(Fault::SkipLocalityCheck) {
            for i in 0..n_gens {
                let mut e = vec![0; n_gens];
                e[i] = dim as u32;
                if !alg.reduce_monomial(&Monomial(e)).iter().all(Zero::is_zero) {
                    return Err(Error::NotLocal {
                        reason: alloc::format!("generator x{i} is not nilpotent"),
                    });
                }
            }
        }

        // least d such that every monomial of degree d vanishes
        alg.nilpotency = (1..=dim + 1)
            .find(|&d| {
                Monomial::all_of_degree(n_gens, d as u32)
                    .iter()
                    .all(|m| alg.reduce_monomial(m).iter().all(Zero::is_zero))
            })
            .unwrap_or(dim + 1);
        alg.local = (0..n_gens).all(|i| {
            let mut e = vec![0; n_gens];
            e[i] = dim as u32;
            alg.reduce_monomial(&Monomial(e)).iter().all(Zero::is_zero)
        });

        for d in 0..=alg.nilpotency as u32 {
            for m in Monomial::all_of_degree(n_gens, d) {
                let v = alg.reduce_monomial(&m);
                alg.reduction.insert(m, v);
            }
        }

        let mut table_exact = Vec::with_capacity(dim * dim);
        for a in &alg.basis {
            for b in &alg.basis {
                let v = alg.monomial_coords(&a.mul(b));
                table_exact.push(
                    v.into_iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .collect::<Vec<_>>(),
                );
            }
        }
        alg.table_float = table_exact
            .iter()
            .map(|row| row.iter().map(|(k, c)| (*k, <f64 as Scalar>::from_rational(c))).collect())
            .collect();
        alg.table_exact = table_exact;
        Ok(Arc::new(alg))
    }

    fn reduce_monomial(&self, m: &Monomial) -> Vec<Rational> {
        let r = Polynomial::term(m.clone(), Rational::one()).reduce(&self.groebner);
        let mut v = vec![Rational::zero(); self.basis.len()];
        for (m, c) in r.terms() {
            v[self.index[m]] = c.clone();
        }
        v
    }

    /// Normal-form coordinates of a monomial.
    pub fn monomial_coords(&self, m: &Monomial) -> Vec<Rational> {
        match self.reduction.get(m) {
            Some(v) => v.clone(),
            None if self.local && m.degree() as usize >= self.nilpotency =>
            {
                vec![Rational::zero(); self.dim()]
            }
            None => self.reduce_monomial(m),
        }
    }

    /// Normal-form coordinates of a polynomial in the generators.
    pub fn normal_form(&self, p: &Polynomial) -> Result<Vec<Rational>> {
        if p.nvars() != self.n_gens {
            return Err(Error::WrongVariableCount {
                expected: self.n_gens,
                found: p.nvars(),
            });
        }
        let mut v = vec![Rational::zero(); self.dim()];
        for (m, c) in p.terms() {
            for (k, x) in self.monomial_coords(m).into_iter().enumerate() {
                if !x.is_zero() {
                    v[k] += c * x;
                }
            }
        }
        Ok(v)
    }

    /// The polynomial whose normal form has the given coordinates.
    pub fn coords_to_poly(&self, coords: &[Rational]) -> Polynomial {
        let mut p = Polynomial::zero(self.n_gens);
        for (m, c) in self.basis.iter().zip(coords) {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn n_gens(&self) -> usize {
        self.n_gens
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Least `k` with `m^k = 0` for the maximal ideal `m`.
    pub fn nilpotency_index(&self) -> usize {
        self.nilpotency
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn basis_index(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn relations(&self) -> &[Polynomial] {
        &self.relations
    }

    /// Relations exactly as they were supplied.
    pub fn relation_strings(&self) -> &[String] {
        &self.relation_src
    }

    pub fn groebner_basis(&self) -> &[Polynomial] {
        &self.groebner
    }

    pub fn is_real(&self) -> bool {
        self.dim() == 1
    }

    /// Sparse products of basis elements: entry `i*dim + j` lists the nonzero
    /// coordinates of `basis[i]·basis[j]`.
    pub fn structure_exact(&self) -> &[Vec<(usize, Rational)>] {
        &self.table_exact
    }

    pub fn structure_float(&self) -> &[Vec<(usize, f64)>] {
        &self.table_float
    }

    /// Parse a polynomial in the generators and reduce it.
    pub fn element(self: &Arc<Self>, src: &str) -> Result<WeilElement> {
        let p = Polynomial::parse(src, self.n_gens).map_err(|e| match e {
            Error::ArityViolation { index, .. } => Error::WrongVariableCount {
                expected: self.n_gens,
                found: index + 1,
            },
            e => e,
        })?;
        self.from_poly(&p)
    }

    pub fn from_poly(self: &Arc<Self>, p: &Polynomial) -> Result<WeilElement> {
        Ok(WeilElement {
            alg: self.clone(),
            coords: self.normal_form(p)?,
        })
    }

    pub fn from_coords<S: Scalar>(self: &Arc<Self>, coords: Vec<S>) -> Result<WeilElement<S>> {
        if coords.len() != self.dim() {
            return Err(Error::CoordinateCount {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        Ok(WeilElement {
            alg: self.clone(),
            coords,
        })
    }

    pub fn constant<S: Scalar>(self: &Arc<Self>, c: S) -> WeilElement<S> {
        let mut coords = vec![S::zero(); self.dim()];
        coords[0] = c;
        WeilElement {
            alg: self.clone(),
            coords,
        }
    }

    pub fn zero<S: Scalar>(self: &Arc<Self>) -> WeilElement<S> {
        self.constant(S::zero())
    }

    pub fn one<S: Scalar>(self: &Arc<Self>) -> WeilElement<S> {
        self.constant(S::one())
    }

    /// The class of generator `x_i`.
    pub fn generator<S: Scalar>(self: &Arc<Self>, i: usize) -> WeilElement<S> {
        let v = self.monomial_coords(&Monomial::var(self.n_gens, i));
        WeilElement {
            alg: self.clone(),
            coords: v.iter().map(S::from_rational).collect(),
        }
    }

    /// The class of a basis monomial.
    pub fn basis_element<S: Scalar>(self: &Arc<Self>, k: usize) -> WeilElement<S> {
        let mut coords = vec![S::zero(); self.dim()];
        coords[k] = S::one();
        WeilElement {
            alg: self.clone(),
            coords,
        }
    }

    /// Evaluate a polynomial at elements of this algebra.
    pub fn eval_poly<S: Scalar>(self: &Arc<Self>, p: &Polynomial, at: &[WeilElement<S>]) -> Result<WeilElement<S>> {
        if at.len() != p.nvars() {
            return Err(Error::ImageCount {
                expected: p.nvars(),
                found: at.len(),
            });
        }
        if at.iter().any(|e| e.alg != *self) {
            return Err(Error::AlgebraMismatch);
        }
        // powers[i][e] = at[i]^e, grown on demand
        let mut powers: Vec<Vec<WeilElement<S>>> = at.iter().map(|_| vec![self.one()]).collect();
        let mut acc = self.zero();
        for (m, c) in p.terms() {
            let mut t = self.constant(S::from_rational(c));
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul_unchecked(&at[i]);
                    powers[i].push(next);
                }
                if e > 0 {
                    t = t.mul_unchecked(&powers[i][e as usize]);
                }
            }
            acc = acc.add_unchecked(&t);
        }
        Ok(acc)
    }
}

fn basis_order(a: &Monomial, b: &Monomial) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| b.0.cmp(&a.0))
}

impl fmt::Display for WeilAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Q[")?;
        for i in 0..self.n_gens {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "x{i}")?;
        }
        f.write_str("]/(")?;
        for (i, r) in self.relation_src.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(r)?;
        }
        f.write_str(")")
    }
}

/// An element of a Weil algebra, stored as normal-form coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct WeilElement<S = Rational> {
    alg: Arc<WeilAlgebra>,
    coords: Vec<S>,
}

impl<S: Scalar> WeilElement<S> {
    pub fn algebra(&self) -> &Arc<WeilAlgebra> {
        &self.alg
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    /// The unit coordinate, i.e. the image under the augmentation.
    pub fn augmentation(&self) -> &S {
        &self.coords[0]
    }

    /// The element with its unit coordinate zeroed.
    pub fn nilpotent_part(&self) -> Self {
        let mut e = self.clone();
        e.coords[0] = S::zero();
        e
    }

    pub fn is_nilpotent(&self) -> bool {
        self.coords[0].is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.alg, &other.alg) || self.alg == other.alg {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(&other.neg()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        WeilElement {
            alg: self.alg.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    /// `self += c · other`, skipping work when `c` is zero.
    pub(crate) fn add_scaled(&mut self, c: &S, other: &Self) {
        if c.is_zero() {
            return;
        }
        let unit = c.is_one();
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            if !b.is_zero() {
                if unit {
                    a.add_ref(b);
                } else {
                    a.add_mul(c, b);
                }
            }
        }
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        WeilElement {
            alg: self.alg.clone(),
            coords: S::structure_mul(&self.coords, &other.coords, S::structure(&self.alg)),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        WeilElement {
            alg: self.alg.clone(),
            coords: self.coords.iter().map(|a| c.clone() * a.clone()).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        WeilElement {
            alg: self.alg.clone(),
            coords: self.coords.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = self.alg.one();
        for _ in 0..n {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Coordinatewise comparison with [`Scalar::close_to`].
    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.alg == other.alg
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.close_to(b, tol))
    }

    pub fn to_float(&self) -> WeilElement<f64> {
        WeilElement {
            alg: self.alg.clone(),
            coords: self.coords.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl WeilElement<Rational> {
    pub fn to_poly(&self) -> Polynomial {
        self.alg.coords_to_poly(&self.coords)
    }
}

impl<S: Scalar> fmt::Display for WeilElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zero = Rational::zero();
        let mut first = true;
        for (m, c) in self.alg.basis.iter().zip(&self.coords) {
            if c.is_zero() {
                continue;
            }
            let neg = c.cmp_rational(&zero) == Some(Ordering::Less);
            let a = if neg { -c.clone() } else { c.clone() };
            match (first, neg) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a == S::one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// An algebra map determined by the images of the source generators.
#[derive(Debug, Clone)]
pub struct WeilMorphism {
    source: Arc<WeilAlgebra>,
    target: Arc<WeilAlgebra>,
    images: Vec<WeilElement>,
    /// `dim(target)` rows by `dim(source)` columns.
    matrix: Vec<Vec<Rational>>,
}

impl PartialEq for WeilMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.matrix == other.matrix
    }
}

impl WeilMorphism {
    pub fn new(source: &Arc<WeilAlgebra>, target: &Arc<WeilAlgebra>, images: Vec<WeilElement>) -> Result<Self> {
        if images.len() != source.n_gens() {
            return Err(Error::ImageCount {
                expected: source.n_gens(),
                found: images.len(),
            });
        }
        for (generator, im) in images.iter().enumerate() {
            if im.alg != *target {
                return Err(Error::AlgebraMismatch);
            }
            if !im.is_nilpotent() {
                return Err(Error::NotLocalMorphism { generator });
            }
        }
        for (r, src) in source.relations.iter().zip(&source.relation_src) {
            if !target.eval_poly(r, &images)?.is_zero() {
                return Err(Error::RelationNotKilled {
                    relation: src.clone(),
                });
            }
        }
        let mut matrix = vec![vec![Rational::zero(); source.dim()]; target.dim()];
        for (j, m) in source.basis.iter().enumerate() {
            let col = target.eval_poly(&Polynomial::term(m.clone(), Rational::one()), &images)?;
            for (i, c) in col.coords.into_iter().enumerate() {
                matrix[i][j] = c;
            }
        }
        Ok(WeilMorphism {
            source: source.clone(),
            target: target.clone(),
            images,
            matrix,
        })
    }

    /// Images given as polynomial strings in the target generators.
    pub fn from_strs(source: &Arc<WeilAlgebra>, target: &Arc<WeilAlgebra>, images: &[&str]) -> Result<Self> {
        let images = images
            .iter()
            .map(|s| target.element(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, images)
    }

    pub fn identity(w: &Arc<WeilAlgebra>) -> Self {
        let images = (0..w.n_gens()).map(|i| w.generator(i)).collect();
        Self::new(w, w, images).expect("identity is a morphism")
    }

    /// The augmentation `W → R` killing every generator.
    pub fn augmentation(w: &Arc<WeilAlgebra>) -> Self {
        let r = WeilAlgebra::real();
        let images = (0..w.n_gens()).map(|_| r.zero()).collect();
        Self::new(w, &r, images).expect("augmentation is a morphism")
    }

    /// The unit inclusion `R → W`.
    pub fn unit(w: &Arc<WeilAlgebra>) -> Self {
        Self::new(&WeilAlgebra::real(), w, Vec::new()).expect("unit is a morphism")
    }

    pub fn source(&self) -> &Arc<WeilAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<WeilAlgebra> {
        &self.target
    }

    pub fn images(&self) -> &[WeilElement] {
        &self.images
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    /// Apply the linear matrix to an element of the source.
    pub fn apply<S: Scalar>(&self, e: &WeilElement<S>) -> Result<WeilElement<S>> {
        if e.alg != self.source {
            return Err(Error::AlgebraMismatch);
        }
        let coords = self
            .matrix
            .iter()
            .map(|row| {
                let mut acc = S::zero();
                for (m, x) in row.iter().zip(&e.coords) {
                    if !m.is_zero() && !x.is_zero() {
                        acc.add_mul(&S::from_rational(m), x);
                    }
                }
                acc
            })
            .collect();
        Ok(WeilElement {
            alg: self.target.clone(),
            coords,
        })
    }

    /// Apply by substituting generator images into the element's polynomial.
    pub fn apply_by_evaluation(&self, e: &WeilElement) -> Result<WeilElement> {
        if e.alg != self.source {
            return Err(Error::AlgebraMismatch);
        }
        self.target.eval_poly(&e.to_poly(), &self.images)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &WeilMorphism) -> Result<WeilMorphism> {
        if inner.target != self.source {
            return Err(Error::CompositionMismatch);
        }
        let images = inner
            .images
            .iter()
            .map(|e| self.apply(e))
            .collect::<Result<Vec<_>>>()?;
        WeilMorphism::new(&inner.source, &self.target, images)
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.matrix.iter().enumerate().all(|(i, row)| {
                row.iter()
                    .enumerate()
                    .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
            })
    }
}

impl fmt::Display for WeilMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, im) in self.images.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "x{i} ↦ {im}")?;
        }
        f.write_str("]")
    }
}

/// `W1 ⊗ W2` with its inclusions and the identification of basis pairs.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub algebra: Arc<WeilAlgebra>,
    pub left: WeilMorphism,
    pub right: WeilMorphism,
    pairs: Vec<usize>,
    d1: usize,
    d2: usize,
}

/// Tensor product: the generators of `w1` come first, then those of `w2`.
pub fn tensor(w1: &Arc<WeilAlgebra>, w2: &Arc<WeilAlgebra>) -> Result<Tensor> {
    let (n1, n2) = (w1.n_gens(), w2.n_gens());
    let n = n1 + n2;
    let mut relations: Vec<Polynomial> = w1.relations.iter().map(|r| r.shift(n, 0)).collect();
    relations.extend(w2.relations.iter().map(|r| r.shift(n, n1)));
    let mut src: Vec<String> = relations[..w1.relations.len()]
        .iter()
        .zip(&w1.relation_src)
        .map(|(p, s)| if n2 == 0 { s.clone() } else { alloc::format!("{p}") })
        .collect();
    src.extend(relations[w1.relations.len()..].iter().map(|p| alloc::format!("{p}")));
    let alg = WeilAlgebra::build(n, relations, src)?;

    let mut pairs = Vec::with_capacity(w1.dim() * w2.dim());
    for a in &w1.basis {
        for b in &w2.basis {
            let mut e = a.0.clone();
            e.extend_from_slice(&b.0);
            let k = alg
                .basis_index(&Monomial(e))
                .expect("products of standard monomials are standard");
            pairs.push(k);
        }
    }
    let left = WeilMorphism::new(w1, &alg, (0..n1).map(|i| alg.generator(i)).collect())?;
    let right = WeilMorphism::new(w2, &alg, (0..n2).map(|i| alg.generator(n1 + i)).collect())?;
    Ok(Tensor {
        algebra: alg,
        left,
        right,
        pairs,
        d1: w1.dim(),
        d2: w2.dim(),
    })
}

impl Tensor {
    pub fn left_factor(&self) -> &Arc<WeilAlgebra> {
        self.left.source()
    }

    pub fn right_factor(&self) -> &Arc<WeilAlgebra> {
        self.right.source()
    }

    /// Tensor-basis index of `basis1[b] ⊗ basis2[c]`.
    pub fn pair_index(&self, b: usize, c: usize) -> usize {
        if faults::is_active(Fault::TransposeTensorBasis) {
            self.pairs[c * self.d1 + b]
        } else {
            self.pairs[b * self.d2 + c]
        }
    }

    /// Read an element `Σ_b e_b ⊗ w_b` as its `W2`-valued coordinates `w_b`.
    pub fn split<S: Scalar>(&self, e: &WeilElement<S>) -> Result<Vec<WeilElement<S>>> {
        if e.alg != self.algebra {
            return Err(Error::AlgebraMismatch);
        }
        let w2 = self.right_factor();
        Ok((0..self.d1)
            .map(|b| WeilElement {
                alg: w2.clone(),
                coords: (0..self.d2).map(|c| e.coords[self.pair_index(b, c)].clone()).collect(),
            })
            .collect())
    }

    /// Inverse of [`Tensor::split`].
    pub fn join<S: Scalar>(&self, parts: &[WeilElement<S>]) -> Result<WeilElement<S>> {
        if parts.len() != self.d1 {
            return Err(Error::CoordinateCount {
                expected: self.d1,
                found: parts.len(),
            });
        }
        let mut coords = vec![S::zero(); self.d1 * self.d2];
        for (b, w) in parts.iter().enumerate() {
            if w.alg != *self.right_factor() {
                return Err(Error::AlgebraMismatch);
            }
            for (c, x) in w.coords.iter().enumerate() {
                coords[self.pair_index(b, c)] = x.clone();
            }
        }
        Ok(WeilElement {
            alg: self.algebra.clone(),
            coords,
        })
    }
}

/// `φ ⊗ ψ` acting by `φ` on the first generator block and `ψ` on the second.
pub fn tensor_morphism(phi: &WeilMorphism, psi: &WeilMorphism) -> Result<WeilMorphism> {
    let src = tensor(phi.source(), psi.source())?;
    let tgt = tensor(phi.target(), psi.target())?;
    let mut images = phi
        .images()
        .iter()
        .map(|e| tgt.left.apply(e))
        .collect::<Result<Vec<_>>>()?;
    for e in psi.images() {
        images.push(tgt.right.apply(e)?);
    }
    WeilMorphism::new(&src.algebra, &tgt.algebra, images)
}
