//! Limits of Weil algebras and the chart-level limit checks built on them.
//!
//! The limit of a connected diagram of Weil algebras is the space of
//! compatible tuples `{(u_i) : φ_e(u_s) = u_t for every edge e}` inside the
//! product of the node carriers. It is a local subalgebra, and
//! [`compute_limit`] re-presents it as a quotient of a polynomial ring whose
//! generators are a basis of `N/N²`, `N` being its maximal ideal.
//!
//! On charts every carrier is a product of copies of `R`, so a cone is a limit
//! exactly when its comparison map to the compatible tuples is a bijection and,
//! for open boxes, preimages of points inside the node boxes stay inside the
//! apex box. Chart cones are restricted to affine maps, for which both
//! conditions are decided by exact linear algebra.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{tensor, tensor_morphism, WeilAlgebra, WeilElement, WeilMorphism};
use crate::error::{Error, Result};
use crate::expr::{Expr, Interval, OpenBox, SmoothMap};
use crate::laws::{alpha_as_map, random_iterated, rng, Chart, Checker, LawReport, Status};
use crate::lift::{alpha_on_chart, lift_map, WeilPoint};
use crate::linalg::{mat_mul, mat_vec, nullspace, rank, solve_in_span, Matrix};
use crate::poly::{Monomial, Polynomial};
use crate::presets::{self, NamedMorphism};
use crate::scalar::{rational, Rational};

/// An arrow `source → target` between two nodes of a diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub morphism: WeilMorphism,
}

/// A finite connected diagram of Weil algebras.
#[derive(Debug, Clone, PartialEq)]
pub struct WeilDiagram {
    nodes: Vec<Arc<WeilAlgebra>>,
    edges: Vec<Edge>,
}

fn connected(n: usize, links: impl Iterator<Item = (usize, usize)>) -> bool {
    if n == 0 {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (a, b) in links {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        parent[ra] = rb;
    }
    let r = root(&mut parent, 0);
    (0..n).all(|i| root(&mut parent, i) == r)
}

impl WeilDiagram {
    pub fn new(nodes: Vec<Arc<WeilAlgebra>>, edges: Vec<Edge>) -> Result<Self> {
        for (edge, e) in edges.iter().enumerate() {
            let fits = e.source < nodes.len()
                && e.target < nodes.len()
                && *e.morphism.source() == nodes[e.source]
                && *e.morphism.target() == nodes[e.target];
            if !fits {
                return Err(Error::EdgeMismatch { edge });
            }
        }
        if !connected(nodes.len(), edges.iter().map(|e| (e.source, e.target))) {
            return Err(Error::NotConnected);
        }
        Ok(WeilDiagram { nodes, edges })
    }

    /// The cospan `A → C ← B` of `f: A → C` and `g: B → C`.
    pub fn pullback(f: &WeilMorphism, g: &WeilMorphism) -> Result<Self> {
        let nodes = vec![f.source().clone(), g.source().clone(), f.target().clone()];
        let edges = vec![
            Edge {
                source: 0,
                target: 2,
                morphism: f.clone(),
            },
            Edge {
                source: 1,
                target: 2,
                morphism: g.clone(),
            },
        ];
        WeilDiagram::new(nodes, edges)
    }

    /// The parallel pair `f, g: A ⇉ B`.
    pub fn equalizer(f: &WeilMorphism, g: &WeilMorphism) -> Result<Self> {
        let nodes = vec![f.source().clone(), f.target().clone()];
        let edges = [f, g]
            .into_iter()
            .map(|m| Edge {
                source: 0,
                target: 1,
                morphism: m.clone(),
            })
            .collect();
        WeilDiagram::new(nodes, edges)
    }

    pub fn nodes(&self) -> &[Arc<WeilAlgebra>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn dims(&self) -> Vec<usize> {
        self.nodes.iter().map(|w| w.dim()).collect()
    }

    /// The diagram `T^D M` on an `m`-dimensional chart, with arrows `α_φ(M)`.
    fn on_chart(&self, m: usize) -> (Vec<usize>, Vec<(usize, usize, Matrix)>) {
        let dims = self.dims().into_iter().map(|d| d * m).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| (e.source, e.target, block(e.morphism.matrix(), m)))
            .collect();
        (dims, edges)
    }
}

/// Names accepted by [`builtin_diagram`].
pub const BUILTIN_DIAGRAMS: [&str; 2] = ["pullback-D2", "equalizer-vertical"];

/// `pullback-D2` is `dual → R ← dual` along the augmentations, whose limit is
/// the first-order neighbourhood `D(2)`. `equalizer-vertical` is the pair
/// `id, unit ∘ aug: dual ⇉ dual`, the algebra-level shadow of the diagram
/// defining vertical Weil functors.
pub fn builtin_diagram(name: &str) -> Option<WeilDiagram> {
    let dual = presets::preset("dual")?.ok()?;
    let aug = WeilMorphism::augmentation(&dual);
    match name {
        "pullback-D2" => WeilDiagram::pullback(&aug, &aug).ok(),
        "equalizer-vertical" => {
            let kill = WeilMorphism::unit(&dual).compose(&aug).ok()?;
            WeilDiagram::equalizer(&WeilMorphism::identity(&dual), &kill).ok()
        }
        _ => None,
    }
}

/// `m` diagonal copies of `a`, acting on `m` coordinates of width `cols(a)`.
fn block(a: &[Vec<Rational>], m: usize) -> Matrix {
    let (rows, cols) = (a.len(), a.first().map_or(0, Vec::len));
    let mut out = vec![vec![Rational::zero(); m * cols]; m * rows];
    for i in 0..m {
        for (r, row) in a.iter().enumerate() {
            out[i * rows + r][i * cols..(i + 1) * cols].clone_from_slice(row);
        }
    }
    out
}

/// Rows `A_e u_s − u_t` of the compatibility system over `∏ R^{dims[i]}`.
fn compatibility(dims: &[usize], edges: &[(usize, usize, Matrix)]) -> Matrix {
    let offsets = offsets(dims);
    let total = offsets[dims.len()];
    let mut rows = Vec::new();
    for (s, t, a) in edges {
        for (r, arow) in a.iter().enumerate() {
            let mut row = vec![Rational::zero(); total];
            for (c, x) in arow.iter().enumerate() {
                row[offsets[*s] + c] += x;
            }
            row[offsets[*t] + r] -= Rational::one();
            rows.push(row);
        }
    }
    rows
}

fn show(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|q| format!("{q}")).collect();
    format!("[{}]", parts.join(", "))
}

fn offsets(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0];
    for d in dims {
        out.push(out.last().unwrap() + d);
    }
    out
}

/// Stack leg matrices into the comparison map `apex → ∏ nodes`.
fn stack<'a>(legs: impl Iterator<Item = &'a Matrix>) -> Matrix {
    legs.flat_map(|m| m.iter().cloned()).collect()
}

fn columns(m: &Matrix, cols: usize) -> Vec<Vec<Rational>> {
    (0..cols).map(|c| m.iter().map(|row| row[c].clone()).collect()).collect()
}

fn compatible_dim(dims: &[usize], edges: &[(usize, usize, Matrix)]) -> usize {
    let total: usize = dims.iter().sum();
    total - rank(&compatibility(dims, edges))
}

/// A cone over a [`WeilDiagram`] and the verdict on whether it is a limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeCertificate {
    pub apex: Arc<WeilAlgebra>,
    /// One leg `apex → node` per node.
    pub legs: Vec<WeilMorphism>,
    /// Dimension of the space of compatible tuples.
    pub compatible_dim: usize,
    pub is_limit: bool,
    /// Why the cone fails to be a limit.
    pub witness: Option<String>,
}

/// Decide whether `legs` form a limit cone: they commute with every edge and
/// identify the apex with the compatible tuples.
pub fn verify_cone(diagram: &WeilDiagram, apex: &Arc<WeilAlgebra>, legs: Vec<WeilMorphism>) -> Result<ConeCertificate> {
    if legs.len() != diagram.nodes.len() {
        return Err(Error::ConeNotVerified(format!(
            "{} legs for {} nodes",
            legs.len(),
            diagram.nodes.len()
        )));
    }
    if legs
        .iter()
        .zip(&diagram.nodes)
        .any(|(l, w)| l.source() != apex || l.target() != w)
    {
        return Err(Error::AlgebraMismatch);
    }
    let edges: Vec<(usize, usize, Matrix)> = diagram
        .edges
        .iter()
        .map(|e| (e.source, e.target, e.morphism.matrix().to_vec()))
        .collect();
    let compatible_dim = compatible_dim(&diagram.dims(), &edges);
    let mut witness = None;
    for (k, e) in diagram.edges.iter().enumerate() {
        if e.morphism.compose(&legs[e.source])? != legs[e.target] {
            witness.get_or_insert(format!(
                "edge {k} composed with leg {} differs from leg {}",
                e.source, e.target
            ));
        }
    }
    let matrices: Vec<Matrix> = legs.iter().map(|l| l.matrix().to_vec()).collect();
    let r = rank(&stack(matrices.iter()));
    if r != apex.dim() {
        witness.get_or_insert(format!("legs have joint rank {r} on an apex of dimension {}", apex.dim()));
    }
    if compatible_dim != apex.dim() {
        witness.get_or_insert(format!(
            "compatible tuples have dimension {compatible_dim}, the apex {}",
            apex.dim()
        ));
    }
    Ok(ConeCertificate {
        apex: apex.clone(),
        legs,
        compatible_dim,
        is_limit: witness.is_none(),
        witness,
    })
}

// componentwise product of two tuples
fn tuple_mul(nodes: &[Arc<WeilAlgebra>], u: &[Rational], v: &[Rational]) -> Result<Vec<Rational>> {
    let mut out = Vec::with_capacity(u.len());
    let mut at = 0;
    for w in nodes {
        let d = w.dim();
        let a = w.from_coords(u[at..at + d].to_vec())?;
        let b = w.from_coords(v[at..at + d].to_vec())?;
        out.extend(a.mul(&b)?.into_coords());
        at += d;
    }
    Ok(out)
}

fn not_weil(e: Error) -> Error {
    match e {
        Error::LimitNotWeil(_) => e,
        other => Error::LimitNotWeil(format!("{other}")),
    }
}

/// The limit of a connected diagram, with its apex re-presented as a Weil
/// algebra and the projections as legs.
pub fn compute_limit(diagram: &WeilDiagram) -> Result<ConeCertificate> {
    let nodes = &diagram.nodes;
    let dims = diagram.dims();
    let offsets = offsets(&dims);
    let total = offsets[nodes.len()];
    let edges: Vec<(usize, usize, Matrix)> = diagram
        .edges
        .iter()
        .map(|e| (e.source, e.target, e.morphism.matrix().to_vec()))
        .collect();
    let compat = compatibility(&dims, &edges);
    let tuples = nullspace(&compat, total);

    // the maximal ideal: compatible tuples with zero augmentation everywhere
    let mut with_aug = compat.clone();
    for &o in &offsets[..nodes.len()] {
        let mut row = vec![Rational::zero(); total];
        row[o] = Rational::one();
        with_aug.push(row);
    }
    let ideal = nullspace(&with_aug, total);
    if ideal.len() + 1 != tuples.len() {
        return Err(Error::LimitNotWeil(format!(
            "{} compatible dimensions but a maximal ideal of dimension {}",
            tuples.len(),
            ideal.len()
        )));
    }

    let mut squares = Vec::new();
    for (i, a) in ideal.iter().enumerate() {
        for b in &ideal[i..] {
            let p = tuple_mul(nodes, a, b)?;
            if solve_in_span(&ideal, &p).is_none() {
                return Err(Error::LimitNotWeil("compatible tuples are not closed under products".into()));
            }
            squares.push(p);
        }
    }
    // generators: ideal vectors independent modulo N²
    let mut span = squares;
    let mut current = rank(&span);
    let mut gens: Vec<Vec<Rational>> = Vec::new();
    for v in &ideal {
        span.push(v.clone());
        let r = rank(&span);
        if r > current {
            current = r;
            gens.push(v.clone());
        } else {
            span.pop();
        }
    }

    let r = gens.len();
    let node_gens: Vec<Vec<WeilElement>> = nodes
        .iter()
        .enumerate()
        .map(|(i, w)| {
            gens.iter()
                .map(|g| w.from_coords(g[offsets[i]..offsets[i + 1]].to_vec()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let apex = if r == 0 {
        WeilAlgebra::real()
    } else {
        // monomials of degree ≥ k vanish on every node
        let k = nodes.iter().map(|w| w.nilpotency_index()).max().unwrap_or(1).max(1) as u32;
        let monomials: Vec<Monomial> = (0..k).flat_map(|deg| Monomial::all_of_degree(r, deg)).collect();
        let mut images = vec![Vec::with_capacity(monomials.len()); total];
        for m in &monomials {
            let term = Polynomial::term(m.clone(), Rational::one());
            let mut at = 0;
            for (w, g) in nodes.iter().zip(&node_gens) {
                for c in w.eval_poly(&term, g)?.into_coords() {
                    images[at].push(c);
                    at += 1;
                }
            }
        }
        let mut relations: Vec<Polynomial> = nullspace(&images, monomials.len())
            .into_iter()
            .map(|c| {
                let mut p = Polynomial::zero(r);
                for (m, x) in monomials.iter().zip(c) {
                    p.add_term(m.clone(), x);
                }
                p
            })
            .collect();
        relations.extend(
            Monomial::all_of_degree(r, k)
                .into_iter()
                .map(|m| Polynomial::term(m, Rational::one())),
        );
        WeilAlgebra::new(r, relations).map_err(not_weil)?
    };
    if apex.dim() != tuples.len() {
        return Err(Error::LimitNotWeil(format!(
            "presentation has dimension {}, compatible tuples {}",
            apex.dim(),
            tuples.len()
        )));
    }
    let legs = nodes
        .iter()
        .zip(node_gens)
        .map(|(w, g)| WeilMorphism::new(&apex, w, g))
        .collect::<Result<Vec<_>>>()?;
    verify_cone(diagram, &apex, legs)
}

// linear solve plus box membership for the chart-level cone
// `apex → ∏ nodes` given by `legs` (linear part) and `offset`
struct ChartLimit<'a> {
    apex: Chart,
    nodes: Vec<Chart>,
    dims: Vec<usize>,
    edges: &'a [(usize, usize, Matrix)],
    legs: Matrix,
    offset: Vec<Rational>,
}

impl ChartLimit<'_> {
    fn check(&self, ck: &mut Checker, rng: &mut ChaCha8Rng, trials: usize, tag: &str) {
        let apex_dim = self.apex.dim();
        let r = rank(&self.legs);
        ck.expect(&format!("{tag}: comparison map is injective"), r == apex_dim, || {
            format!("rank {r} on an apex of dimension {apex_dim}")
        });
        let free = nullspace(&compatibility(&self.dims, self.edges), self.dims.iter().sum());
        ck.expect(
            &format!("{tag}: compatible families have the dimension of the apex"),
            free.len() == apex_dim,
            || format!("{} compatible dimensions, apex {apex_dim}", free.len()),
        );
        let offsets = offsets(&self.dims);
        let in_nodes = |u: &[Rational]| {
            self.nodes
                .iter()
                .enumerate()
                .all(|(i, c)| c.contains(&u[offsets[i]..offsets[i + 1]]))
        };
        let cols = columns(&self.legs, apex_dim);
        let image = |x: &[Rational]| -> Vec<Rational> {
            mat_vec(&self.legs, x).into_iter().zip(&self.offset).map(|(a, b)| a + b).collect()
        };
        for _ in 0..trials {
            let base = self.apex.random_base(rng);
            let x = random_apex_point(rng, &self.apex, &base);
            let u = image(&x);
            ck.expect(&format!("{tag}: legs map the apex into the nodes"), in_nodes(&u), || {
                format!("apex point {} ↦ {}", show(&x), show(&u))
            });
            // move along the compatible families
            let mut v = u.clone();
            for f in &free {
                let t = Rational::new(rng.random_range(-3..=3).into(), 12.into());
                for (a, b) in v.iter_mut().zip(f) {
                    *a += &t * b;
                }
            }
            if !in_nodes(&v) {
                continue;
            }
            let shifted: Vec<Rational> = v.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
            let pre = solve_in_span(&cols, &shifted);
            let ok = pre
                .as_ref()
                .is_some_and(|p| self.apex.contains(&p[..]) && image(p) == v);
            ck.expect(
                &format!("{tag}: a compatible family inside the nodes has a preimage in the apex"),
                ok,
                || format!("family {}", show(&v)),
            );
        }
    }
}

// random point of an apex chart whose real coordinates sit at `base`-slots
fn random_apex_point(rng: &mut ChaCha8Rng, apex: &Chart, base: &[Rational]) -> Vec<Rational> {
    let Some(b) = apex.domain() else {
        return base.to_vec();
    };
    // unbounded slots of a box chart are the nilpotent coordinates
    base.iter()
        .zip(&b.intervals)
        .map(|(x, i)| {
            if i.lo.is_none() && i.hi.is_none() {
                rational(rng.random_range(-5..=5))
            } else {
                x.clone()
            }
        })
        .collect()
}

fn microlinear_into(
    ck: &mut Checker,
    chart: &Chart,
    diagram: &WeilDiagram,
    cone: &ConeCertificate,
    rng: &mut ChaCha8Rng,
    trials: usize,
    tag: &str,
) -> Result<()> {
    if !cone.is_limit {
        return Err(Error::ConeNotVerified(cone.witness.clone().unwrap_or_default()));
    }
    if cone.legs.len() != diagram.nodes.len() || cone.legs.iter().zip(&diagram.nodes).any(|(l, w)| l.target() != w) {
        return Err(Error::ConeNotVerified("legs do not end at the diagram nodes".into()));
    }
    let m = chart.dim();
    let (dims, edges) = diagram.on_chart(m);
    let legs: Vec<Matrix> = cone.legs.iter().map(|l| block(l.matrix(), m)).collect();
    for (k, (s, t, a)) in edges.iter().enumerate() {
        ck.expect(
            &format!("{tag}: α of edge {k} commutes with the legs"),
            mat_mul(a, &legs[*s]) == legs[*t],
            || format!("edge {k}"),
        );
    }
    let stacked = stack(legs.iter());
    let total: usize = dims.iter().sum();
    let limit = ChartLimit {
        apex: chart.weil(&cone.apex),
        nodes: diagram.nodes.iter().map(|w| chart.weil(w)).collect(),
        dims,
        edges: &edges,
        legs: stacked,
        offset: vec![Rational::zero(); total],
    };
    limit.check(ck, rng, trials, tag);
    Ok(())
}

/// Check that `T^C M` is a limit of `T^D M` for a chart `M` and a verified
/// limit cone `C` of `D`.
pub fn check_microlinear_chart(
    chart: &Chart,
    diagram: &WeilDiagram,
    cone: &ConeCertificate,
    trials: usize,
    seed: u64,
) -> Result<LawReport> {
    let mut ck = Checker::new(format!("microlinear[{chart}]"), "T^C M = lim T^D M", seed);
    let mut rng = rng(seed);
    microlinear_into(&mut ck, chart, diagram, cone, &mut rng, trials, &chart.name())?;
    Ok(ck.done())
}

/// Probe-level microlinearity of `M` as an object of the functor category:
/// for every probe `W`, the chart `T^W M` is microlinear against `D`, and the
/// arrows `α_φ(T^W M)` agree with `α_{id_W ⊗ φ}(M)` under `T^{W1}(T^W M) = T^{W⊗W1} M`.
pub fn check_microlinear_probes(
    chart: &Chart,
    diagram: &WeilDiagram,
    cone: &ConeCertificate,
    probes: &[(String, Arc<WeilAlgebra>)],
    trials: usize,
    seed: u64,
) -> Result<LawReport> {
    let mut ck = Checker::new(
        format!("microlinear-probes[{chart}]"),
        "T^C(T^W M) = lim T^D(T^W M) for every probe W",
        seed,
    );
    let mut rng = rng(seed);
    for (name, w) in probes {
        ck.probe(name);
        let lifted = chart.weil(w);
        microlinear_into(&mut ck, &lifted, diagram, cone, &mut rng, trials, &format!("W={name}"))?;
        let id_w = WeilMorphism::identity(w);
        for e in &diagram.edges {
            let phi = &e.morphism;
            let (w1, w2) = (phi.source(), phi.target());
            let (t1, t2) = (tensor(w, w1)?, tensor(w, w2)?);
            let id_phi = tensor_morphism(&id_w, phi)?;
            for _ in 0..trials {
                let p = random_iterated(&mut rng, chart, w, w1);
                let coords = p
                    .coords
                    .iter()
                    .map(|c| c.iter().map(|x| phi.apply(x)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let moved = crate::lift::IteratedPoint {
                    inner: w.clone(),
                    outer: w2.clone(),
                    coords,
                };
                let lhs = moved.to_tensor(&t2);
                let rhs = p.to_tensor(&t1).and_then(|q| alpha_on_chart(&id_phi, &q));
                if !ck.compare(|| vec![("probe".into(), name.clone())], lhs, rhs) {
                    break;
                }
            }
        }
    }
    Ok(ck.done())
}

/// `x ↦ A x + b`.
#[derive(Debug, Clone, PartialEq)]
struct Affine {
    linear: Matrix,
    offset: Vec<Rational>,
}

impl Affine {
    fn of_map(f: &SmoothMap) -> Result<Self> {
        let n = f.arity();
        let mut linear = Vec::with_capacity(f.coarity());
        let mut offset = Vec::with_capacity(f.coarity());
        for (component, e) in f.components().iter().enumerate() {
            let p = Polynomial::from_expr(e, n).map_err(|_| Error::NonAffineMap { component })?;
            if p.degree().unwrap_or(0) > 1 {
                return Err(Error::NonAffineMap { component });
            }
            let mut row = vec![Rational::zero(); n];
            let mut c = Rational::zero();
            for (m, x) in p.terms() {
                match m.0.iter().position(|&e| e > 0) {
                    Some(j) => row[j] = x.clone(),
                    None => c = x.clone(),
                }
            }
            linear.push(row);
            offset.push(c);
        }
        Ok(Affine { linear, offset })
    }

    fn then(&self, next: &Affine) -> Affine {
        let offset = mat_vec(&next.linear, &self.offset)
            .into_iter()
            .zip(&next.offset)
            .map(|(a, b)| a + b)
            .collect();
        Affine {
            linear: mat_mul(&next.linear, &self.linear),
            offset,
        }
    }

    fn to_map(&self, arity: usize) -> SmoothMap {
        let components = self
            .linear
            .iter()
            .zip(&self.offset)
            .map(|(row, c)| {
                let mut terms: Vec<Expr> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| !a.is_zero())
                    .map(|(j, a)| Expr::Prod(vec![Expr::Const(a.clone()), Expr::Var(j)]))
                    .collect();
                terms.push(Expr::Const(c.clone()));
                Expr::Sum(terms).canonical()
            })
            .collect();
        SmoothMap::new(arity, components).expect("variables below the arity")
    }
}

/// `T^W f` for an affine `f`, read off by evaluating the lift on flat basis points.
fn lifted_affine(f: &SmoothMap, w: &Arc<WeilAlgebra>) -> Result<Affine> {
    let global = SmoothMap::new(f.arity(), f.components().to_vec())?;
    let lift = lift_map(&global, w);
    let n = f.arity() * w.dim();
    let mut point = vec![Rational::zero(); n];
    let offset = lift.apply(&WeilPoint::from_flat(w, &point)?)?.flat();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        point[k] = Rational::one();
        let image = lift.apply(&WeilPoint::from_flat(w, &point)?)?.flat();
        cols.push(image.into_iter().zip(&offset).map(|(a, b)| a - b).collect::<Vec<_>>());
        point[k] = Rational::zero();
    }
    let linear = (0..offset.len())
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    Ok(Affine { linear, offset })
}

/// A cone of affine chart maps: legs `apex → nodes[i]` over a diagram of
/// edges `(source, target, map)` between the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartCone {
    pub apex: Chart,
    pub nodes: Vec<Chart>,
    pub legs: Vec<SmoothMap>,
    pub edges: Vec<(usize, usize, SmoothMap)>,
}

impl ChartCone {
    pub fn new(apex: Chart, nodes: Vec<Chart>, legs: Vec<SmoothMap>, edges: Vec<(usize, usize, SmoothMap)>) -> Result<Self> {
        if legs.len() != nodes.len() {
            return Err(Error::MapArity {
                expected: nodes.len(),
                found: legs.len(),
            });
        }
        for (leg, node) in legs.iter().zip(&nodes) {
            if leg.arity() != apex.dim() || leg.coarity() != node.dim() {
                return Err(Error::MapArity {
                    expected: apex.dim(),
                    found: leg.arity(),
                });
            }
            Affine::of_map(leg)?;
        }
        for (edge, (s, t, f)) in edges.iter().enumerate() {
            let fits = *s < nodes.len()
                && *t < nodes.len()
                && f.arity() == nodes[*s].dim()
                && f.coarity() == nodes[*t].dim();
            if !fits {
                return Err(Error::EdgeMismatch { edge });
            }
            Affine::of_map(f)?;
        }
        Ok(ChartCone { apex, nodes, legs, edges })
    }

    /// The product cone `R^(m+n) → R^m, R^n`.
    pub fn product(m: usize, n: usize) -> Self {
        let first: Vec<usize> = (0..m).collect();
        let second: Vec<usize> = (m..m + n).collect();
        let legs = vec![
            SmoothMap::projection(m + n, &first).expect("indices in range"),
            SmoothMap::projection(m + n, &second).expect("indices in range"),
        ];
        ChartCone::new(Chart::real(m + n), vec![Chart::real(m), Chart::real(n)], legs, Vec::new())
            .expect("projections are affine")
    }

    fn check_probe(&self, ck: &mut Checker, w: &Arc<WeilAlgebra>, name: &str, rng: &mut ChaCha8Rng, trials: usize) -> Result<()> {
        let tag = format!("W={name}");
        let legs = self
            .legs
            .iter()
            .map(|f| lifted_affine(f, w))
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edges
            .iter()
            .map(|(s, t, f)| Ok((*s, *t, lifted_affine(f, w)?)))
            .collect::<Result<Vec<_>>>()?;
        for (k, (s, t, e)) in edges.iter().enumerate() {
            ck.expect(
                &format!("{tag}: edge {k} commutes with the legs"),
                legs[*s].then(e) == legs[*t],
                || format!("edge {k}"),
            );
        }
        let linear_edges: Vec<(usize, usize, Matrix)> =
            edges.into_iter().map(|(s, t, e)| (s, t, e.linear)).collect();
        let limit = ChartLimit {
            apex: self.apex.weil(w),
            nodes: self.nodes.iter().map(|c| c.weil(w)).collect(),
            dims: self.nodes.iter().map(|c| c.dim() * w.dim()).collect(),
            edges: &linear_edges,
            legs: stack(legs.iter().map(|a| &a.linear)),
            offset: legs.iter().flat_map(|a| a.offset.iter().cloned()).collect(),
        };
        limit.check(ck, rng, trials, &tag);
        Ok(())
    }
}

/// One report per probe: is `T^W` of the cone a limit?
pub fn transversal_verdicts(
    cone: &ChartCone,
    probes: &[(String, Arc<WeilAlgebra>)],
    trials: usize,
    seed: u64,
) -> Vec<LawReport> {
    probes
        .iter()
        .map(|(name, w)| {
            let mut ck = Checker::new(format!("transversal[W={name}]"), "T^W C = lim T^W D", seed);
            ck.probe(name);
            let mut rng = rng(seed);
            if let Err(e) = cone.check_probe(&mut ck, w, name, &mut rng, trials) {
                ck.fail(vec![("probe".into(), name.clone())], format!("error: {e}"), "a lifted cone".into());
            }
            ck.done()
        })
        .collect()
}

/// Transversality of a chart cone relative to `probes`; include `R` so that
/// a pass also certifies the plain limit property.
pub fn check_transversal(cone: &ChartCone, probes: &[(String, Arc<WeilAlgebra>)], trials: usize, seed: u64) -> LawReport {
    merge(
        "transversal".into(),
        "T^W C = lim T^W D for every probe W",
        seed,
        transversal_verdicts(cone, probes, trials, seed),
    )
}

fn merge(law: String, statement: &str, seed: u64, parts: Vec<LawReport>) -> LawReport {
    let mut out = LawReport {
        law,
        statement: statement.into(),
        status: Status::Pass,
        seed,
        cases: 0,
        probes: Vec::new(),
        counterexample: None,
    };
    for r in parts {
        out.cases += r.cases;
        let passed = r.passed();
        out.probes.extend(r.probes);
        if !passed {
            out.status = Status::Fail;
            if out.counterexample.is_none() {
                out.counterexample = r.counterexample;
            }
        }
    }
    out
}

/// A trivial bundle `E = B × F → B`, optionally over open boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub base: Chart,
    pub fiber: Chart,
}

impl Bundle {
    pub fn trivial(m: usize, n: usize) -> Self {
        Bundle {
            base: Chart::real(m),
            fiber: Chart::real(n),
        }
    }

    /// Recognize `π: E → R^m` as the projection onto the first `m` coordinates.
    pub fn from_projection(total: &Chart, pi: &SmoothMap) -> Result<Self> {
        let m = pi.coarity();
        if pi.arity() != total.dim() || m > total.dim() {
            return Err(Error::UnsupportedBundle(format!(
                "a map R^{} → R^{m} on a chart of dimension {}",
                pi.arity(),
                total.dim()
            )));
        }
        if pi.components().iter().enumerate().any(|(i, c)| *c != Expr::Var(i)) {
            return Err(Error::UnsupportedBundle("not the projection onto the leading coordinates".into()));
        }
        let split = |range: core::ops::Range<usize>| match total.domain() {
            None => Chart::real(range.len()),
            Some(b) => Chart::open_box(OpenBox::new(b.intervals[range].to_vec())),
        };
        Ok(Bundle {
            base: split(0..m),
            fiber: split(m..total.dim()),
        })
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    fn intervals(c: &Chart) -> Vec<Interval> {
        match c.domain() {
            Some(b) => b.intervals.clone(),
            None => vec![Interval::full(); c.dim()],
        }
    }

    fn bounded(&self) -> bool {
        self.base.domain().is_some() || self.fiber.domain().is_some()
    }

    pub fn total(&self) -> Chart {
        if !self.bounded() {
            return Chart::real(self.base_dim() + self.fiber_dim());
        }
        let mut iv = Self::intervals(&self.base);
        iv.extend(Self::intervals(&self.fiber));
        Chart::open_box(OpenBox::new(iv))
    }

    pub fn projection(&self) -> SmoothMap {
        let idx: Vec<usize> = (0..self.base_dim()).collect();
        SmoothMap::projection(self.base_dim() + self.fiber_dim(), &idx).expect("indices in range")
    }

    /// `R^m × W^n` as a chart: `m` base coordinates followed by the fibers.
    fn vertical_chart(&self, w: &WeilAlgebra) -> Chart {
        let dim = self.base_dim() + self.fiber_dim() * w.dim();
        if !self.bounded() {
            return Chart::real(dim);
        }
        let mut iv = Self::intervals(&self.base);
        iv.extend(Self::intervals(&self.fiber.weil(w)));
        Chart::open_box(OpenBox::new(iv))
    }

    /// The canonical injection `R^m × W^n → W^(m+n)` on flat coordinates.
    fn injection(&self, d: usize) -> Matrix {
        let (m, n) = (self.base_dim(), self.fiber_dim());
        let cols = m + n * d;
        let mut rows = vec![vec![Rational::zero(); cols]; (m + n) * d];
        for j in 0..m {
            rows[j * d][j] = Rational::one();
        }
        for k in 0..n * d {
            rows[m * d + k][m + k] = Rational::one();
        }
        rows
    }
}

/// The vertical Weil functor of a trivial bundle at one algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalWeil {
    pub bundle: Bundle,
    pub algebra: Arc<WeilAlgebra>,
    /// Real dimension of `R^m × W^n`.
    pub carrier_dim: usize,
    /// Nilpotent coordinates over each base point, `n · (dim W − 1)`.
    pub nilpotent_dim: usize,
    /// The equalizer cone `R^m × W^n → T^W E ⇉ T^W M`.
    pub cone: ChartCone,
    /// Whether the cone is the equalizer of the two parallel maps.
    pub is_equalizer: bool,
    /// Transversality of the equalizer over the probe set.
    pub transversal: LawReport,
}

/// The equalizer of `T^W π` and `α_{R→W}(M) ∘ α_{W→R}(M) ∘ T^W π`.
pub fn vertical_weil(
    bundle: &Bundle,
    w: &Arc<WeilAlgebra>,
    probes: &[(String, Arc<WeilAlgebra>)],
    trials: usize,
    seed: u64,
) -> Result<VerticalWeil> {
    let (m, n, d) = (bundle.base_dim(), bundle.fiber_dim(), w.dim());
    let t_pi = lifted_affine(&bundle.projection(), w)?;
    let t_pi_map = t_pi.to_map((m + n) * d);
    let back = alpha_as_map(&WeilMorphism::unit(w), m);
    let down = alpha_as_map(&WeilMorphism::augmentation(w), m);
    let killed = back.compose(&down)?.compose(&t_pi_map)?;
    let inj = bundle.injection(d);
    let carrier_dim = m + n * d;
    let inj_map = SmoothMap::linear(carrier_dim, &inj)?;
    let cone = ChartCone::new(
        bundle.vertical_chart(w),
        vec![bundle.total().weil(w), bundle.base.weil(w)],
        vec![inj_map.clone(), t_pi_map.compose(&inj_map)?],
        vec![(0, 1, t_pi_map), (0, 1, killed.clone())],
    )?;
    // equalizer = kernel of the difference, which must be the image of the injection
    let killed = Affine::of_map(&killed)?;
    let diff: Matrix = t_pi
        .linear
        .iter()
        .zip(&killed.linear)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    let kernel = nullspace(&diff, (m + n) * d);
    let image = columns(&inj, carrier_dim);
    let is_equalizer = kernel.len() == carrier_dim
        && rank(&inj) == carrier_dim
        && image.iter().all(|v| solve_in_span(&kernel, v).is_some());
    let transversal = check_transversal(&cone, probes, trials, seed);
    Ok(VerticalWeil {
        bundle: bundle.clone(),
        algebra: w.clone(),
        carrier_dim,
        nilpotent_dim: n * (d - 1),
        cone,
        is_equalizer,
        transversal,
    })
}

/// Probe-level vertical embedding: every probe lifts the equalizer to an
/// equalizer, and each `α_φ` restricts to the vertical functors compatibly
/// with the canonical injections.
pub fn check_vertical_embedding(
    bundle: &Bundle,
    w: &Arc<WeilAlgebra>,
    probes: &[(String, Arc<WeilAlgebra>)],
    morphisms: &[NamedMorphism],
    trials: usize,
    seed: u64,
) -> Result<LawReport> {
    let v = vertical_weil(bundle, w, &[], 0, seed)?;
    let mut parts = transversal_verdicts(&v.cone, probes, trials, seed);
    let mut ck = Checker::new(
        "vertical-alpha".into(),
        "α_φ(E) restricts to R^m × W1^n → R^m × W2^n",
        seed,
    );
    let mut rng = rng(seed);
    let m = bundle.base_dim();
    ck.expect("the cone is an equalizer", v.is_equalizer, || "kernel differs from the injection".into());
    for phi in morphisms {
        let (w1, w2) = (phi.morphism.source(), phi.morphism.target());
        for _ in 0..trials {
            let base = bundle.base.random_base(&mut rng);
            let fiber = bundle.fiber.random_point(&mut rng, w1);
            let embed = |w: &Arc<WeilAlgebra>, f: &WeilPoint| -> Result<WeilPoint> {
                let mut coords: Vec<WeilElement> = base.iter().map(|a| w.constant(a.clone())).collect();
                coords.extend(f.components().iter().cloned());
                WeilPoint::new(w, coords)
            };
            let moved = embed(w1, &fiber).and_then(|p| alpha_on_chart(&phi.morphism, &p));
            if let Ok(q) = &moved {
                let vertical = q.components()[..m].iter().all(|c| c.nilpotent_part().is_zero());
                ck.expect(&format!("{}: image is vertical", phi.name), vertical, || format!("{q}"));
            }
            let restricted = alpha_on_chart(&phi.morphism, &fiber).and_then(|f| embed(w2, &f));
            if !ck.compare(|| vec![("φ".into(), phi.name.clone())], moved, restricted) {
                break;
            }
        }
    }
    parts.push(ck.done());
    Ok(merge(
        format!("vertical-embedding[m={m}, n={}]", bundle.fiber_dim()),
        "T^W' of the vertical equalizer is an equalizer; α_φ restricts to vertical functors",
        seed,
        parts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{family, preset};

    fn alg(name: &str) -> Arc<WeilAlgebra> {
        preset(name).unwrap().unwrap()
    }

    #[test]
    fn pullback_d2_has_apex_of_dimension_three() {
        let d = builtin_diagram("pullback-D2").unwrap();
        let c = compute_limit(&d).unwrap();
        assert!(c.is_limit, "{:?}", c.witness);
        assert_eq!(c.apex.dim(), 3);
        assert_eq!(c.apex, alg("Dn2"));
        assert_eq!(c.compatible_dim, 3);
    }

    #[test]
    fn equalizers() {
        let w = alg("jet2");
        let id = WeilMorphism::identity(&w);
        let c = compute_limit(&WeilDiagram::equalizer(&id, &id).unwrap()).unwrap();
        assert_eq!(c.apex, w);
        let c = compute_limit(&builtin_diagram("equalizer-vertical").unwrap()).unwrap();
        assert!(c.apex.is_real());
        assert!(c.is_limit);
    }

    #[test]
    fn diagram_errors() {
        let dual = alg("dual");
        let r = WeilAlgebra::real();
        assert_eq!(WeilDiagram::new(vec![dual.clone(), r.clone()], Vec::new()), Err(Error::NotConnected));
        let bad = Edge {
            source: 1,
            target: 0,
            morphism: WeilMorphism::augmentation(&dual),
        };
        assert_eq!(WeilDiagram::new(vec![dual, r], vec![bad]), Err(Error::EdgeMismatch { edge: 0 }));
    }

    #[test]
    fn wrong_cone_is_rejected() {
        let d = builtin_diagram("pullback-D2").unwrap();
        let dual = alg("dual");
        // apex dual with both legs the identity: commutes but is too small
        let legs = vec![
            WeilMorphism::identity(&dual),
            WeilMorphism::identity(&dual),
            WeilMorphism::augmentation(&dual),
        ];
        let c = verify_cone(&d, &dual, legs).unwrap();
        assert!(!c.is_limit);
        assert!(c.witness.unwrap().contains("compatible"));
    }

    #[test]
    fn microlinear_charts() {
        let d = builtin_diagram("pullback-D2").unwrap();
        let c = compute_limit(&d).unwrap();
        for chart in [Chart::real(0), Chart::real(1), Chart::real(2), Chart::open_box(OpenBox::unit(1))] {
            let r = check_microlinear_chart(&chart, &d, &c, 10, 7).unwrap();
            assert!(r.passed(), "{chart}: {:?}", r.counterexample);
        }
    }

    #[test]
    fn microlinear_needs_a_verified_cone() {
        let d = builtin_diagram("pullback-D2").unwrap();
        let mut c = compute_limit(&d).unwrap();
        c.is_limit = false;
        assert!(matches!(
            check_microlinear_chart(&Chart::real(1), &d, &c, 1, 0),
            Err(Error::ConeNotVerified(_))
        ));
    }

    #[test]
    fn transversal_product_and_non_limit() {
        let probes: Vec<_> = ["R", "dual", "jet2"].iter().map(|n| (String::from(*n), alg(n))).collect();
        assert!(check_transversal(&ChartCone::product(1, 2), &probes, 5, 1).passed());
        let empty = ChartCone::new(
            Chart::real(0),
            vec![Chart::real(1), Chart::real(1)],
            vec![SmoothMap::new(0, vec![Expr::int(0)]).unwrap(), SmoothMap::new(0, vec![Expr::int(0)]).unwrap()],
            Vec::new(),
        )
        .unwrap();
        let verdicts = transversal_verdicts(&empty, &probes[..1], 5, 1);
        assert!(!verdicts[0].passed());
    }

    #[test]
    fn non_affine_cones_are_rejected() {
        let sq = SmoothMap::parse(1, &["x0^2"]).unwrap();
        let r = ChartCone::new(Chart::real(1), vec![Chart::real(1)], vec![sq], Vec::new());
        assert_eq!(r, Err(Error::NonAffineMap { component: 0 }));
    }

    #[test]
    fn vertical_carriers() {
        let fam = family();
        for (_, w) in &fam {
            let v = vertical_weil(&Bundle::trivial(1, 2), w, &[], 0, 0).unwrap();
            assert_eq!(v.carrier_dim, 1 + 2 * w.dim());
            assert!(v.is_equalizer);
        }
        let r = vertical_weil(&Bundle::trivial(2, 1), &WeilAlgebra::real(), &[], 0, 0).unwrap();
        assert_eq!(r.carrier_dim, 3);
        let v = vertical_weil(&Bundle::trivial(0, 2), &alg("jet2"), &[], 0, 0).unwrap();
        assert_eq!(v.carrier_dim, 6);
    }

    #[test]
    fn vertical_dual_example() {
        let fam = family();
        let v = vertical_weil(&Bundle::trivial(1, 2), &alg("dual"), &fam, 3, 5).unwrap();
        assert_eq!((v.carrier_dim, v.nilpotent_dim), (5, 2));
        assert!(v.transversal.passed(), "{:?}", v.transversal.counterexample);
        let boxed = Bundle {
            base: Chart::open_box(OpenBox::unit(1)),
            fiber: Chart::open_box(OpenBox::unit(1)),
        };
        let v = vertical_weil(&boxed, &alg("dual"), &fam[..3], 5, 5).unwrap();
        assert!(v.transversal.passed(), "{:?}", v.transversal.counterexample);
    }

    #[test]
    fn bundles_from_projections() {
        let total = Chart::open_box(OpenBox::unit(3));
        let pi = SmoothMap::projection(3, &[0]).unwrap();
        let b = Bundle::from_projection(&total, &pi).unwrap();
        assert_eq!((b.base_dim(), b.fiber_dim()), (1, 2));
        let swap = SmoothMap::projection(3, &[1]).unwrap();
        assert!(matches!(Bundle::from_projection(&total, &swap), Err(Error::UnsupportedBundle(_))));
    }

    #[test]
    fn vertical_embedding_small() {
        let fam = family();
        let probes: Vec<_> = fam.iter().filter(|(n, _)| n == "R" || n == "dual").cloned().collect();
        let ms = presets::morphisms(&probes);
        let r = check_vertical_embedding(&Bundle::trivial(1, 1), &alg("dual"), &probes, &ms, 3, 9).unwrap();
        assert!(r.passed(), "{:?}", r.counterexample);
    }

    #[test]
    fn microlinear_probe_level() {
        let d = builtin_diagram("pullback-D2").unwrap();
        let c = compute_limit(&d).unwrap();
        let probes: Vec<_> = ["R", "dual", "jet2"].iter().map(|n| (String::from(*n), alg(n))).collect();
        let r = check_microlinear_probes(&Chart::real(1), &d, &c, &probes, 3, 2).unwrap();
        assert!(r.passed(), "{:?}", r.counterexample);
    }
}
