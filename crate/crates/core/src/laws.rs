//! Runnable checks of the identities satisfied by Weil functors on charts.
//!
//! Every check draws its inputs from a ChaCha generator seeded with the
//! report's `seed`, so rerunning a check with the same arguments and seed
//! reproduces it exactly. Coordinates are integers in `[-5, 5]`, except base
//! points inside bounded boxes, which are multiples of a sixth of the interval.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{tensor, tensor_morphism, WeilAlgebra, WeilElement, WeilMorphism};
use crate::error::{Error, Result};
use crate::expr::{Expr, Interval, OpenBox, SmoothMap};
use crate::lift::{alpha_on_chart, eval_direct, lift_iterated, lift_map, IteratedPoint, WeilPoint};
use crate::presets::{self, NamedMorphism};
use crate::scalar::{rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// Inputs and both sides of the first failing comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub inputs: Vec<(String, String)>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub law: String,
    /// The identity being checked, as a formula.
    pub statement: String,
    pub status: Status,
    pub seed: u64,
    /// Number of comparisons performed.
    pub cases: usize,
    pub probes: Vec<String>,
    pub counterexample: Option<Counterexample>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

pub(crate) struct Checker {
    report: LawReport,
}

impl Checker {
    pub(crate) fn new(law: String, statement: &str, seed: u64) -> Self {
        Checker {
            report: LawReport {
                law,
                statement: statement.into(),
                status: Status::Pass,
                seed,
                cases: 0,
                probes: Vec::new(),
                counterexample: None,
            },
        }
    }

    pub(crate) fn fail(&mut self, inputs: Vec<(String, String)>, lhs: String, rhs: String) {
        self.report.status = Status::Fail;
        if self.report.counterexample.is_none() {
            self.report.counterexample = Some(Counterexample { inputs, lhs, rhs });
        }
    }

    /// Record one comparison; `inputs` is only rendered on failure.
    pub(crate) fn compare<T, F>(&mut self, inputs: F, lhs: Result<T>, rhs: Result<T>) -> bool
    where
        T: PartialEq + fmt::Display,
        F: FnOnce() -> Vec<(String, String)>,
    {
        self.report.cases += 1;
        let show = |r: &Result<T>| match r {
            Ok(v) => v.to_string(),
            Err(e) => format!("error: {e}"),
        };
        match (&lhs, &rhs) {
            (Ok(a), Ok(b)) if a == b => true,
            _ => {
                self.fail(inputs(), show(&lhs), show(&rhs));
                false
            }
        }
    }

    pub(crate) fn expect(&mut self, what: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.report.cases += 1;
        if !ok {
            self.fail(vec![("check".into(), what.into())], detail(), "expected to hold".into());
        }
    }

    pub(crate) fn probe(&mut self, name: &str) {
        self.report.probes.push(name.into());
    }

    pub(crate) fn done(self) -> LawReport {
        self.report
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small(rng: &mut ChaCha8Rng) -> Rational {
    rational(rng.random_range(-5..=5))
}

/// A random polynomial expression in `arity` variables of total degree at most
/// `max_degree` with integer coefficients in `[-5, 5]`.
pub fn random_polynomial(rng: &mut ChaCha8Rng, arity: usize, max_degree: u32) -> Expr {
    let n_terms = rng.random_range(1..=4);
    let terms = (0..n_terms)
        .map(|_| {
            let mut c = 0;
            while c == 0 {
                c = rng.random_range(-5..=5);
            }
            let mut factors = vec![Expr::int(c)];
            if arity > 0 {
                let degree = rng.random_range(0..=max_degree);
                let mut exps = vec![0u32; arity];
                for _ in 0..degree {
                    exps[rng.random_range(0..arity)] += 1;
                }
                for (i, e) in exps.into_iter().enumerate() {
                    if e > 0 {
                        factors.push(Expr::var(i).pow(e));
                    }
                }
            }
            Expr::Prod(factors)
        })
        .collect();
    Expr::Sum(terms).canonical()
}

pub fn random_map(rng: &mut ChaCha8Rng, arity: usize, coarity: usize, max_degree: u32) -> SmoothMap {
    let comps = (0..coarity).map(|_| random_polynomial(rng, arity, max_degree)).collect();
    SmoothMap::new(arity, comps).expect("variables respect the arity")
}

/// Maps of arity 1–3, coarity 1–2 and degree at most 3.
pub fn random_maps(rng: &mut ChaCha8Rng, count: usize) -> Vec<SmoothMap> {
    (0..count)
        .map(|_| {
            let arity = rng.random_range(1..=3);
            let coarity = rng.random_range(1..=2);
            random_map(rng, arity, coarity, 3)
        })
        .collect()
}

pub fn random_element(rng: &mut ChaCha8Rng, w: &Arc<WeilAlgebra>) -> WeilElement {
    let coords = (0..w.dim()).map(|_| small(rng)).collect();
    w.from_coords(coords).expect("dimension matches")
}

/// A chart: `R^n`, optionally restricted to an open box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    dim: usize,
    domain: Option<OpenBox>,
}

impl Chart {
    pub fn real(n: usize) -> Self {
        Chart { dim: n, domain: None }
    }

    pub fn open_box(b: OpenBox) -> Self {
        Chart {
            dim: b.dim(),
            domain: Some(b),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Option<&OpenBox> {
        self.domain.as_ref()
    }

    pub fn contains(&self, base: &[Rational]) -> bool {
        base.len() == self.dim && self.domain.as_ref().is_none_or(|b| b.contains(base))
    }

    /// `T^W M` as a chart of dimension `dim · dim(W)`: the box constrains only
    /// the base slot of each coordinate.
    pub fn weil(&self, w: &WeilAlgebra) -> Chart {
        let d = w.dim();
        Chart {
            dim: self.dim * d,
            domain: self.domain.as_ref().map(|b| {
                OpenBox::new(
                    b.intervals
                        .iter()
                        .flat_map(|i| (0..d).map(move |k| if k == 0 { i.clone() } else { Interval::full() }))
                        .collect(),
                )
            }),
        }
    }

    pub fn name(&self) -> String {
        match &self.domain {
            None => format!("R{}", self.dim),
            Some(b) => {
                let mut s = String::new();
                for (k, i) in b.intervals.iter().enumerate() {
                    if k > 0 {
                        s.push('×');
                    }
                    let show = |x: &Option<Rational>, inf: &str| x.as_ref().map_or(inf.to_string(), |q| q.to_string());
                    s.push_str(&format!("({},{})", show(&i.lo, "-inf"), show(&i.hi, "inf")));
                }
                s
            }
        }
    }

    /// A random base point inside the chart.
    pub fn random_base(&self, rng: &mut ChaCha8Rng) -> Vec<Rational> {
        (0..self.dim)
            .map(|k| {
                let i = self.domain.as_ref().map(|b| &b.intervals[k]);
                let step = rational(rng.random_range(1..=5));
                match i.map(|i| (&i.lo, &i.hi)) {
                    Some((Some(lo), Some(hi))) => lo + (hi - lo) * step / rational(6),
                    Some((Some(lo), None)) => lo + step,
                    Some((None, Some(hi))) => hi - step,
                    _ => small(rng),
                }
            })
            .collect()
    }

    /// A random point of `T^W M`.
    pub fn random_point(&self, rng: &mut ChaCha8Rng, w: &Arc<WeilAlgebra>) -> WeilPoint {
        let base = self.random_base(rng);
        let coords = base
            .into_iter()
            .map(|a| {
                let mut e = random_element(rng, w).into_coords();
                e[0] = a;
                w.from_coords(e).expect("dimension matches")
            })
            .collect();
        WeilPoint::new(w, coords).expect("one algebra")
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `α_φ(R^n)` as a linear chart map `R^(n·dim W1) → R^(n·dim W2)`.
pub fn alpha_as_map(phi: &WeilMorphism, n: usize) -> SmoothMap {
    let (d1, d2) = (phi.source().dim(), phi.target().dim());
    let mut rows = Vec::with_capacity(n * d2);
    for i in 0..n {
        for r in 0..d2 {
            let mut row = vec![Rational::zero(); n * d1];
            row[i * d1..(i + 1) * d1].clone_from_slice(&phi.matrix()[r]);
            rows.push(row);
        }
    }
    SmoothMap::linear(n * d1, &rows).expect("rows have the stated width")
}

/// Random point of `T^{outer}(T^{inner} M)` with base inside the chart.
pub(crate) fn random_iterated(
    rng: &mut ChaCha8Rng,
    chart: &Chart,
    inner: &Arc<WeilAlgebra>,
    outer: &Arc<WeilAlgebra>,
) -> IteratedPoint {
    let base = chart.random_base(rng);
    let coords = base
        .into_iter()
        .map(|a| {
            (0..inner.dim())
                .map(|b| {
                    let mut e = random_element(rng, outer).into_coords();
                    if b == 0 {
                        e[0] = a.clone();
                    }
                    outer.from_coords(e).expect("dimension matches")
                })
                .collect()
        })
        .collect();
    IteratedPoint {
        inner: inner.clone(),
        outer: outer.clone(),
        coords,
    }
}

fn flatten(p: &IteratedPoint) -> Result<WeilPoint> {
    WeilPoint::new(&p.outer, p.coords.iter().flatten().cloned().collect())
}

fn unflatten(q: &WeilPoint, inner: &Arc<WeilAlgebra>) -> IteratedPoint {
    let d = inner.dim();
    IteratedPoint {
        inner: inner.clone(),
        outer: q.algebra().clone(),
        coords: q.components().chunks(d).map(<[_]>::to_vec).collect(),
    }
}

fn show_point(p: &WeilPoint) -> (String, String) {
    ("point".into(), p.to_string())
}

fn show_iterated(p: &IteratedPoint) -> (String, String) {
    let parts: Vec<String> = p
        .coords
        .iter()
        .map(|c| {
            let s: Vec<String> = c.iter().map(ToString::to_string).collect();
            format!("[{}]", s.join("; "))
        })
        .collect();
    ("point".into(), format!("({})", parts.join(", ")))
}

fn show_map(f: &SmoothMap) -> (String, String) {
    let s: Vec<String> = f.components().iter().map(ToString::to_string).collect();
    ("map".into(), format!("R{} -> [{}]", f.arity(), s.join(", ")))
}

/// `T^{W2} ∘ T^{W1} = T^{W1⊗W2}` on random points of every map.
pub fn check_composition_law(
    w1: &Arc<WeilAlgebra>,
    w2: &Arc<WeilAlgebra>,
    maps: &[SmoothMap],
    trials: usize,
    seed: u64,
    label: &str,
) -> LawReport {
    let mut ck = Checker::new(
        format!("composition[{label}]"),
        "T^{W2} ∘ T^{W1} = T^{W1⊗W2}",
        seed,
    );
    let t = match tensor(w1, w2) {
        Ok(t) => t,
        Err(e) => {
            ck.fail(Vec::new(), format!("error: {e}"), "tensor product".into());
            return ck.done();
        }
    };
    let mut rng = rng(seed);
    for f in maps {
        let chart = Chart::real(f.arity());
        let nested = lift_iterated(f, w1, w2);
        let direct = lift_map(f, &t.algebra);
        for _ in 0..trials {
            let p = random_iterated(&mut rng, &chart, w1, w2);
            let lhs = nested.apply(&p).and_then(|q| q.to_tensor(&t));
            let rhs = p.to_tensor(&t).and_then(|q| direct.apply(&q));
            if !ck.compare(|| vec![show_map(f), show_iterated(&p)], lhs, rhs) {
                return ck.done();
            }
        }
    }
    ck.done()
}

/// `T^W(g ∘ f) = T^W g ∘ T^W f` and `T^W id = id`.
pub fn check_functoriality(
    w: &Arc<WeilAlgebra>,
    maps: &[SmoothMap],
    trials: usize,
    seed: u64,
    label: &str,
) -> LawReport {
    let mut ck = Checker::new(
        format!("functoriality[{label}]"),
        "T^W(g∘f) = T^W g ∘ T^W f, T^W id = id",
        seed,
    );
    let mut rng = rng(seed);
    for f in maps {
        let coarity = rng.random_range(1..=2);
        let g = random_map(&mut rng, f.coarity(), coarity, 2);
        let gf = g.compose(f).expect("arities chain");
        let (lf, lg, lgf) = (lift_map(f, w), lift_map(&g, w), lift_map(&gf, w));
        let id = lift_map(&SmoothMap::identity(f.arity()), w);
        let chart = Chart::real(f.arity());
        for _ in 0..trials {
            let p = chart.random_point(&mut rng, w);
            let lhs = lgf.apply(&p);
            let rhs = lf.apply(&p).and_then(|q| lg.apply(&q));
            if !ck.compare(|| vec![show_map(f), show_map(&g), show_point(&p)], lhs, rhs) {
                return ck.done();
            }
            if !ck.compare(|| vec![show_point(&p)], id.apply(&p), Ok(p.clone())) {
                return ck.done();
            }
        }
    }
    ck.done()
}

/// `T^W (f, g) = (T^W f, T^W g)`.
pub fn check_product_preservation(
    w: &Arc<WeilAlgebra>,
    maps: &[SmoothMap],
    trials: usize,
    seed: u64,
    label: &str,
) -> LawReport {
    let mut ck = Checker::new(
        format!("products[{label}]"),
        "T^W(f, g) = (T^W f, T^W g)",
        seed,
    );
    let mut rng = rng(seed);
    for f in maps {
        let coarity = rng.random_range(1..=2);
        let g = random_map(&mut rng, f.arity(), coarity, 3);
        let fg = f.pair(&g).expect("same arity");
        let (lf, lg, lfg) = (lift_map(f, w), lift_map(&g, w), lift_map(&fg, w));
        let chart = Chart::real(f.arity());
        for _ in 0..trials {
            let p = chart.random_point(&mut rng, w);
            let lhs = lfg.apply(&p);
            let rhs = lf.apply(&p).and_then(|a| {
                let b = lg.apply(&p)?;
                let mut c = a.components().to_vec();
                c.extend_from_slice(b.components());
                WeilPoint::new(w, c)
            });
            if !ck.compare(|| vec![show_map(f), show_map(&g), show_point(&p)], lhs, rhs) {
                return ck.done();
            }
        }
    }
    ck.done()
}

/// `T^W(R) = W`: the carrier has dimension `dim W`, and the lifts of `+` and
/// `·` on `R` are the operations of `W`.
pub fn check_tw_of_r(w: &Arc<WeilAlgebra>, trials: usize, seed: u64, label: &str) -> LawReport {
    let mut ck = Checker::new(format!("tw-of-r[{label}]"), "T^W(R) = W", seed);
    let dim = Chart::real(1).weil(w).dim();
    ck.expect("carrier dimension", dim == w.dim(), || format!("{dim} != {}", w.dim()));
    let id = lift_map(&SmoothMap::identity(1), w);
    let add = lift_map(&SmoothMap::parse(2, &["x0 + x1"]).expect("valid"), w);
    let mul = lift_map(&SmoothMap::parse(2, &["x0*x1"]).expect("valid"), w);
    let mut rng = rng(seed);
    for _ in 0..trials {
        let a = random_element(&mut rng, w);
        let b = random_element(&mut rng, w);
        let p1 = WeilPoint::new(w, vec![a.clone()]).expect("one algebra");
        let p2 = WeilPoint::new(w, vec![a.clone(), b.clone()]).expect("one algebra");
        let inputs = || vec![("a".into(), a.to_string()), ("b".into(), b.to_string())];
        let ok = ck.compare(inputs, id.apply(&p1).map(|q| q.components()[0].clone()), Ok(a.clone()))
            && ck.compare(inputs, add.apply(&p2).map(|q| q.components()[0].clone()), a.add(&b))
            && ck.compare(inputs, mul.apply(&p2).map(|q| q.components()[0].clone()), a.mul(&b));
        if !ok {
            break;
        }
    }
    ck.done()
}

/// `α_ψ · α_φ = α_{ψ∘φ}` and `α_id = id` on `R^n`.
pub fn check_alpha_functoriality(
    phi: &WeilMorphism,
    psi: &WeilMorphism,
    n: usize,
    trials: usize,
    seed: u64,
    label: &str,
) -> LawReport {
    let mut ck = Checker::new(
        format!("alpha-functoriality[{label}]"),
        "α_ψ · α_φ = α_{ψ∘φ}, α_id = id",
        seed,
    );
    let composed = match psi.compose(phi) {
        Ok(c) => c,
        Err(e) => {
            ck.fail(Vec::new(), format!("error: {e}"), "composable morphisms".into());
            return ck.done();
        }
    };
    let id = WeilMorphism::identity(phi.source());
    let chart = Chart::real(n);
    let mut rng = rng(seed);
    for _ in 0..trials {
        let p = chart.random_point(&mut rng, phi.source());
        let lhs = alpha_on_chart(phi, &p).and_then(|q| alpha_on_chart(psi, &q));
        let rhs = alpha_on_chart(&composed, &p);
        if !ck.compare(|| vec![show_point(&p)], lhs, rhs) {
            break;
        }
        if !ck.compare(|| vec![show_point(&p)], alpha_on_chart(&id, &p), Ok(p.clone())) {
            break;
        }
    }
    ck.done()
}

/// `α_φ ∘ T^{W1} f = T^{W2} f ∘ α_φ`.
pub fn check_alpha_naturality(
    phi: &WeilMorphism,
    maps: &[SmoothMap],
    trials: usize,
    seed: u64,
    label: &str,
) -> LawReport {
    let mut ck = Checker::new(
        format!("alpha-naturality[{label}]"),
        "α_φ ∘ T^{W1} f = T^{W2} f ∘ α_φ",
        seed,
    );
    let mut rng = rng(seed);
    for f in maps {
        let (l1, l2) = (lift_map(f, phi.source()), lift_map(f, phi.target()));
        let chart = Chart::real(f.arity());
        for _ in 0..trials {
            let p = chart.random_point(&mut rng, phi.source());
            let lhs = l1.apply(&p).and_then(|q| alpha_on_chart(phi, &q));
            let rhs = alpha_on_chart(phi, &p).and_then(|q| l2.apply(&q));
            if !ck.compare(|| vec![show_map(f), show_point(&p)], lhs, rhs) {
                return ck.done();
            }
        }
    }
    ck.done()
}

/// `α_φ(R) = φ`: on the chart `R` the transformation is the algebra map,
/// computed here by substituting generator images.
pub fn check_alpha_on_r(phi: &WeilMorphism, trials: usize, seed: u64, label: &str) -> LawReport {
    let mut ck = Checker::new(format!("alpha-on-r[{label}]"), "α_φ(R) = φ", seed);
    let mut rng = rng(seed);
    for _ in 0..trials {
        let a = random_element(&mut rng, phi.source());
        let p = WeilPoint::new(phi.source(), vec![a.clone()]).expect("one algebra");
        let lhs = alpha_on_chart(phi, &p).map(|q| q.components()[0].clone());
        if !ck.compare(|| vec![("a".into(), a.to_string())], lhs, phi.apply_by_evaluation(&a)) {
            break;
        }
    }
    ck.done()
}

/// Both coherence squares for `φ: W1 → W2` and `W`, plus their compatibility
/// with a lifted map:
///
/// 1. `T^W α_φ = α_{φ⊗id_W}` on `T^W T^{W1} R^n = (W1⊗W)^n`;
/// 2. `α_φ(T^W R^n) = α_{id_W⊗φ}` on `T^{W1} T^W R^n = (W⊗W1)^n`.
pub fn check_monoidal_coherence(
    phi: &WeilMorphism,
    w: &Arc<WeilAlgebra>,
    maps: &[SmoothMap],
    trials: usize,
    seed: u64,
    label: &str,
) -> LawReport {
    let mut ck = Checker::new(
        format!("coherence[{label}]"),
        "T^W α_φ = α_{φ⊗id_W}, α_φ(T^W) = α_{id_W⊗φ}",
        seed,
    );
    let (w1, w2) = (phi.source(), phi.target());
    let id_w = WeilMorphism::identity(w);
    let built = (|| {
        Ok::<_, Error>((
            tensor(w1, w)?,
            tensor(w2, w)?,
            tensor(w, w1)?,
            tensor(w, w2)?,
            tensor_morphism(phi, &id_w)?,
            tensor_morphism(&id_w, phi)?,
        ))
    })();
    let (t1w, t2w, tw1, tw2, phi_id, id_phi) = match built {
        Ok(b) => b,
        Err(e) => {
            ck.fail(Vec::new(), format!("error: {e}"), "tensor products".into());
            return ck.done();
        }
    };
    let mut rng = rng(seed);
    for f in maps {
        let n = f.arity();
        let chart = Chart::real(n);
        // T^W applied to the linear chart map α_φ(R^n)
        let tw_alpha = lift_map(&alpha_as_map(phi, n), w);
        let tw_alpha_out = lift_map(&alpha_as_map(phi, f.coarity()), w);
        let (it1, it2) = (lift_iterated(f, w1, w), lift_iterated(f, w2, w));
        let (jt1, jt2) = (lift_iterated(f, w, w1), lift_iterated(f, w, w2));
        let tw_of = |lift: &crate::lift::LiftedMap, p: &IteratedPoint, inner: &Arc<WeilAlgebra>| {
            flatten(p).and_then(|q| lift.apply(&q)).map(|q| unflatten(&q, inner))
        };
        for _ in 0..trials {
            // first square
            let p = random_iterated(&mut rng, &chart, w1, w);
            let moved = tw_of(&tw_alpha, &p, w2);
            let lhs = moved.clone().and_then(|q| q.to_tensor(&t2w));
            let rhs = p.to_tensor(&t1w).and_then(|q| alpha_on_chart(&phi_id, &q));
            if !ck.compare(|| vec![show_map(f), show_iterated(&p)], lhs, rhs) {
                return ck.done();
            }
            let lhs = it1
                .apply(&p)
                .and_then(|q| tw_of(&tw_alpha_out, &q, w2))
                .and_then(|q| q.to_tensor(&t2w));
            let rhs = moved.and_then(|q| it2.apply(&q)).and_then(|q| q.to_tensor(&t2w));
            if !ck.compare(|| vec![show_map(f), show_iterated(&p)], lhs, rhs) {
                return ck.done();
            }

            // second square
            let p = random_iterated(&mut rng, &chart, w, w1);
            let outer_phi = |q: &IteratedPoint| -> Result<IteratedPoint> {
                let coords = q
                    .coords
                    .iter()
                    .map(|c| c.iter().map(|e| phi.apply(e)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(IteratedPoint {
                    inner: q.inner.clone(),
                    outer: w2.clone(),
                    coords,
                })
            };
            let moved = outer_phi(&p);
            let lhs = moved.clone().and_then(|q| q.to_tensor(&tw2));
            let rhs = p.to_tensor(&tw1).and_then(|q| alpha_on_chart(&id_phi, &q));
            if !ck.compare(|| vec![show_map(f), show_iterated(&p)], lhs, rhs) {
                return ck.done();
            }
            let lhs = jt1.apply(&p).and_then(|q| outer_phi(&q)).and_then(|q| q.to_tensor(&tw2));
            let rhs = moved.and_then(|q| jt2.apply(&q)).and_then(|q| q.to_tensor(&tw2));
            if !ck.compare(|| vec![show_map(f), show_iterated(&p)], lhs, rhs) {
                return ck.done();
            }
        }
    }
    ck.done()
}

/// The embedding `i(M): W ↦ T^W M` of a chart, restricted to a probe set.
#[derive(Debug, Clone)]
pub struct ProbedFunctor {
    pub chart: Chart,
    pub probes: Vec<(String, Arc<WeilAlgebra>)>,
}

impl ProbedFunctor {
    /// Errors when the probe set is empty or lacks `R`.
    pub fn of_chart(chart: Chart, probes: &[(String, Arc<WeilAlgebra>)]) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::ProbeSetNotClosed("the probe set is empty".into()));
        }
        if !probes.iter().any(|(_, w)| w.is_real()) {
            return Err(Error::ProbeSetNotClosed("the probe set must contain R".into()));
        }
        Ok(ProbedFunctor {
            chart,
            probes: probes.to_vec(),
        })
    }

    /// The carrier `T^W M` at a probe.
    pub fn value(&self, w: &WeilAlgebra) -> Chart {
        self.chart.weil(w)
    }

    /// The arrow `α_φ(M)` induced by a probe morphism.
    pub fn arrow(&self, phi: &WeilMorphism) -> SmoothMap {
        alpha_as_map(phi, self.chart.dim())
    }

    fn probe_name(&self, w: &WeilAlgebra) -> Option<&str> {
        self.probes.iter().find(|(_, p)| **p == *w).map(|(n, _)| n.as_str())
    }
}

/// Probe-level embedding theorems for a chart `M`:
///
/// * `i(T^W M)(W') = i(M)(W ⊗ W')`, on carriers, arrows and lifted maps;
/// * `i(α_φ(M))(W') = α_φ(i(M))(W') = α_{φ⊗id_{W'}}(M)`.
///
/// `arrows` are the probe morphisms checked for naturality; those whose ends
/// are not probes are skipped.
#[allow(clippy::too_many_arguments)]
pub fn check_embedding_theorems(
    chart: &Chart,
    w: &Arc<WeilAlgebra>,
    phi: &WeilMorphism,
    probes: &[(String, Arc<WeilAlgebra>)],
    arrows: &[NamedMorphism],
    maps: &[SmoothMap],
    trials: usize,
    seed: u64,
) -> Result<LawReport> {
    let functor = ProbedFunctor::of_chart(chart.clone(), probes)?;
    for end in [phi.source(), phi.target()] {
        if functor.probe_name(end).is_none() {
            return Err(Error::ProbeSetNotClosed(format!("{end} is not a probe")));
        }
    }
    let mut ck = Checker::new(
        format!(
            "embedding[{}, W={}, φ={}→{}]",
            chart,
            functor.probe_name(w).map_or_else(|| w.to_string(), Into::into),
            functor.probe_name(phi.source()).unwrap_or("?"),
            functor.probe_name(phi.target()).unwrap_or("?"),
        ),
        "i(T^W M) = i(M)∘(W⊗-), i(α_φ M) = α_φ i(M)",
        seed,
    );
    ck.report.probes = probes.iter().map(|(n, _)| n.clone()).collect();
    let r = WeilAlgebra::real();
    ck.expect("i(M)(R) = M", functor.value(&r) == *chart, || functor.value(&r).to_string());

    let mut rng = rng(seed);
    let n = chart.dim();
    let maps: Vec<SmoothMap> = maps
        .iter()
        .map(|f| {
            if f.arity() == n {
                f.clone()
            } else {
                random_map(&mut rng, n, f.coarity(), 3)
            }
        })
        .collect();
    let tw_chart = chart.weil(w);
    for (_, wp) in probes {
        let t = tensor(w, wp)?;

        // carriers: T^{W'}(T^W M) and T^{W⊗W'} M
        let lhs_chart = tw_chart.weil(wp);
        let rhs_chart = chart.weil(&t.algebra);
        ck.expect("carrier dimension", lhs_chart.dim() == rhs_chart.dim(), || {
            format!("{} != {}", lhs_chart.dim(), rhs_chart.dim())
        });
        for _ in 0..trials {
            let p = random_iterated(&mut rng, &Chart::real(n), w, wp);
            let q = p.to_tensor(&t)?;
            // membership is decided on base points: in T^W M, resp. in M
            let inside_lhs = tw_chart.contains(&flatten(&p)?.base());
            let inside_rhs = chart.contains(&q.base());
            ck.expect("carrier membership", inside_lhs == inside_rhs, || show_iterated(&p).1);
            let back = IteratedPoint::from_tensor(&t, &q)?;
            ck.expect("identification is bijective", back == p, || show_iterated(&p).1);
        }

        // arrows: α_ψ(T^W M) = α_{id_W⊗ψ}(M)
        for arrow in arrows {
            let psi = &arrow.morphism;
            if psi.source() != wp || functor.probe_name(psi.target()).is_none() {
                continue;
            }
            let t2 = tensor(w, psi.target())?;
            let id_psi = tensor_morphism(&WeilMorphism::identity(w), psi)?;
            for _ in 0..trials {
                let p = random_iterated(&mut rng, chart, w, wp);
                let lhs = flatten(&p)
                    .and_then(|q| alpha_on_chart(psi, &q))
                    .map(|q| unflatten(&q, w))
                    .and_then(|q| q.to_tensor(&t2));
                let rhs = p.to_tensor(&t).and_then(|q| alpha_on_chart(&id_psi, &q));
                ck.compare(|| vec![("arrow".into(), arrow.name.clone()), show_iterated(&p)], lhs, rhs);
            }
        }

        // maps: T^{W'}(T^W f) = T^{W⊗W'} f
        for f in &maps {
            let nested = lift_iterated(f, w, wp);
            let direct = lift_map(f, &t.algebra);
            for _ in 0..trials {
                let p = random_iterated(&mut rng, chart, w, wp);
                let lhs = nested.apply(&p).and_then(|q| q.to_tensor(&t));
                let rhs = p.to_tensor(&t).and_then(|q| direct.apply(&q));
                ck.compare(|| vec![show_map(f), show_iterated(&p)], lhs, rhs);
            }
        }

        // second theorem: T^{W'}(α_φ(M)) = α_{φ⊗id_{W'}}(M)
        let (w1, w2) = (phi.source(), phi.target());
        let (t1, t2) = (tensor(w1, wp)?, tensor(w2, wp)?);
        let phi_id = tensor_morphism(phi, &WeilMorphism::identity(wp))?;
        let lifted_alpha = lift_map(&functor.arrow(phi), wp);
        for _ in 0..trials {
            let p = random_iterated(&mut rng, chart, w1, wp);
            let lhs = flatten(&p)
                .and_then(|q| lifted_alpha.apply(&q))
                .map(|q| unflatten(&q, w2))
                .and_then(|q| q.to_tensor(&t2));
            let rhs = p.to_tensor(&t1).and_then(|q| alpha_on_chart(&phi_id, &q));
            if let (Ok(a), Ok(_)) = (&lhs, &rhs) {
                ck.expect("base stays in M", chart.contains(&a.base()), || a.to_string());
            }
            ck.compare(|| vec![show_iterated(&p)], lhs, rhs);
        }
    }
    Ok(ck.done())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Composition,
    Alpha,
    Coherence,
    Embedding,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["composition", "alpha", "coherence", "embedding", "all"];

    pub fn from_name(s: &str) -> Option<Suite> {
        Some(match s {
            "composition" => Suite::Composition,
            "alpha" => Suite::Alpha,
            "coherence" => Suite::Coherence,
            "embedding" => Suite::Embedding,
            "all" => Suite::All,
            _ => return None,
        })
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// Parameters of a suite run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random points per map and law.
    pub trials: usize,
    /// Random polynomial maps per law.
    pub maps: usize,
    /// Algebras the suite quantifies over; defaults to the preset family.
    pub family: Vec<(String, Arc<WeilAlgebra>)>,
    /// Probe set for the embedding theorems.
    pub probes: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            trials: 50,
            maps: 20,
            family: presets::family(),
            probes: ["R", "dual", "jet2", "jet3", "dual⊗dual"].map(String::from).to_vec(),
        }
    }
}

/// Charts used by the embedding suite: `R^0`, `R^1`, `R^2` and `(0,1)^2`.
pub fn embedding_charts() -> Vec<Chart> {
    vec![
        Chart::real(0),
        Chart::real(1),
        Chart::real(2),
        Chart::open_box(OpenBox::unit(2)),
    ]
}

/// Run a suite over the configured family; reports come in a fixed order.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Vec<LawReport> {
    let mut rng = rng(cfg.seed);
    let maps = random_maps(&mut rng, cfg.maps);
    let fam = &cfg.family;
    let catalog = presets::morphisms(fam);
    let seed = cfg.seed;
    let mut out = Vec::new();

    if suite.includes(Suite::Composition) {
        for (n1, w1) in fam {
            for (n2, w2) in fam {
                out.push(check_composition_law(w1, w2, &maps, cfg.trials, seed, &format!("{n1},{n2}")));
            }
        }
        for (name, w) in fam {
            out.push(check_functoriality(w, &maps, cfg.trials, seed, name));
            out.push(check_product_preservation(w, &maps, cfg.trials, seed, name));
            out.push(check_tw_of_r(w, cfg.trials, seed, name));
        }
    }

    if suite.includes(Suite::Alpha) {
        for phi in &catalog {
            for psi in catalog.iter().filter(|m| m.source == phi.target) {
                let label = format!("{} ; {}", phi.name, psi.name);
                for n in 0..=2 {
                    let r = check_alpha_functoriality(
                        &phi.morphism,
                        &psi.morphism,
                        n,
                        cfg.trials,
                        seed,
                        &format!("{label}, R{n}"),
                    );
                    out.push(r);
                }
            }
        }
        for phi in &catalog {
            out.push(check_alpha_naturality(&phi.morphism, &maps, cfg.trials, seed, &phi.name));
            out.push(check_alpha_on_r(&phi.morphism, cfg.trials, seed, &phi.name));
        }
    }

    if suite.includes(Suite::Coherence) {
        for phi in &catalog {
            for (name, w) in fam {
                let label = format!("{}, W={name}", phi.name);
                out.push(check_monoidal_coherence(&phi.morphism, w, &maps, cfg.trials, seed, &label));
            }
        }
    }

    if suite.includes(Suite::Embedding) {
        let probes: Vec<(String, Arc<WeilAlgebra>)> = fam
            .iter()
            .filter(|(n, _)| cfg.probes.contains(n))
            .cloned()
            .collect();
        let arrows: Vec<NamedMorphism> = catalog
            .iter()
            .filter(|m| cfg.probes.contains(&m.source) && cfg.probes.contains(&m.target))
            .cloned()
            .collect();
        // a few maps and points per probe keep the probe-level checks small
        let few_maps = &maps[..maps.len().min(3)];
        let few = cfg.trials.clamp(1, 5);
        for chart in embedding_charts() {
            for (_, w) in &probes {
                for phi in &arrows {
                    let report = check_embedding_theorems(
                        &chart,
                        w,
                        &phi.morphism,
                        &probes,
                        &arrows,
                        few_maps,
                        few,
                        seed,
                    );
                    match report {
                        Ok(r) => out.push(r),
                        Err(e) => {
                            let mut ck = Checker::new(format!("embedding[{chart}]"), "probe set", seed);
                            ck.fail(Vec::new(), format!("error: {e}"), "closed probe set".into());
                            out.push(ck.done());
                        }
                    }
                }
            }
        }
    }
    out
}

/// Evaluate a polynomial map both by the Taylor sum and directly on Weil
/// elements; used as a cross-check of the lift.
pub fn check_two_routes(w: &Arc<WeilAlgebra>, maps: &[SmoothMap], trials: usize, seed: u64, label: &str) -> LawReport {
    let mut ck = Checker::new(format!("two-routes[{label}]"), "Σ ∂^α f(a)/α! ν^α = f(a + ν)", seed);
    let mut rng = rng(seed);
    for f in maps {
        let lf = lift_map(f, w);
        let chart = Chart::real(f.arity());
        for _ in 0..trials {
            let p = chart.random_point(&mut rng, w);
            if !ck.compare(|| vec![show_map(f), show_point(&p)], lf.apply(&p), eval_direct(f, &p)) {
                return ck.done();
            }
        }
    }
    ck.done()
}
