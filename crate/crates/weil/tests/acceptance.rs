//! End-to-end acceptance run: one line per criterion, `[PASS]` or `[FAIL]`.
//!
//! Kept as a single test because injected faults are process-wide.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};
use weil_core::expr::{parse, Primitive};
use weil_core::faults::Fault;
use weil_core::laws::{run_suite, Chart, LawReport, Suite, SuiteConfig};
use weil_core::lift::{lift_map, WeilPoint};
use weil_core::limits::{
    builtin_diagram, check_microlinear_chart, check_vertical_embedding, compute_limit, vertical_weil, Bundle,
};
use weil_core::poly::{Monomial, Polynomial};
use weil_core::presets::{family, morphisms, preset};
use weil_core::scalar::{ratio, rational};
use weil_core::{Expr, OpenBox, Rational, SmoothMap, WeilAlgebra};

const TOL_EXACT_VS_ORACLE: f64 = 1e-9;
const TOL_VS_FINITE_DIFFERENCE: f64 = 1e-5;
const FD_STEP: f64 = 1e-4;
const PROPERTY_CASES: u32 = 1000;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, took: Duration, what: &str) -> Result<(), String> {
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

fn all_pass(reports: &[LawReport]) -> Result<usize, String> {
    match reports.iter().find(|r| !r.passed()) {
        None => Ok(reports.iter().map(|r| r.cases).sum()),
        Some(r) => Err(format!("{} failed: {:?}", r.law, r.counterexample)),
    }
}

fn alg(name: &str) -> Arc<WeilAlgebra> {
    preset(name).unwrap().unwrap()
}

fn derivatives() -> Verdict {
    let start = Instant::now();
    let dual = alg("dual");
    let cube = SmoothMap::parse(1, &["x0^3"]).unwrap();
    let p = WeilPoint::new(&dual, vec![dual.element("2 + x0").unwrap()]).unwrap();
    let out = lift_map(&cube, &dual).apply(&p).map_err(|e| e.to_string())?;
    let d = out.components()[0].coords()[1].clone();
    ensure(d == rational(12), || format!("x^3 at 2 gave {d}"))?;

    let tt = alg("dual⊗dual");
    let f = SmoothMap::parse(2, &["sin(x0)*exp(x1)"]).unwrap();
    let p = WeilPoint::new(&tt, vec![tt.element("0.3 + x0").unwrap(), tt.element("-0.2 + x1").unwrap()]).unwrap();
    let out = lift_map(&f, &tt).apply(&p.to_float()).map_err(|e| e.to_string())?;
    let k = tt.basis_index(&Monomial(vec![1, 1])).unwrap();
    let mixed = out.components()[0].coords()[k];
    let (x, y) = (0.3f64, -0.2f64);
    let oracle = x.cos() * y.exp();
    let g = |a: f64, b: f64| a.sin() * b.exp();
    let h = FD_STEP;
    let fd = (g(x + h, y + h) - g(x + h, y - h) - g(x - h, y + h) + g(x - h, y - h)) / (4.0 * h * h);
    ensure((mixed - oracle).abs() <= TOL_EXACT_VS_ORACLE, || format!("mixed {mixed} vs {oracle}"))?;
    ensure((mixed - fd).abs() <= TOL_VS_FINITE_DIFFERENCE, || format!("mixed {mixed} vs fd {fd}"))?;
    let took = start.elapsed();
    within(Duration::from_secs(1), took, "derivatives")?;
    Ok(format!(
        "x^3 at 2: 12 exact; mixed {mixed:.12} vs cos(0.3)exp(-0.2) {oracle:.12} (|Δ| {:.1e}), fd |Δ| {:.1e}; {took:?}",
        (mixed - oracle).abs(),
        (mixed - fd).abs()
    ))
}

fn composition() -> Verdict {
    let start = Instant::now();
    let cfg = SuiteConfig::default();
    let reports = run_suite(Suite::Composition, &cfg);
    let took = start.elapsed();
    let cases = all_pass(&reports)?;
    let pairs = reports.iter().filter(|r| r.law.starts_with("composition[")).count();
    let n = cfg.family.len();
    ensure(pairs == n * n, || format!("{pairs} composition pairs, expected {}", n * n))?;
    within(Duration::from_secs(30), took, "composition suite")?;
    Ok(format!(
        "{pairs} preset pairs × {} maps × {} points, {} reports, {cases} exact comparisons; {took:?}",
        cfg.maps,
        cfg.trials,
        reports.len()
    ))
}

fn alpha() -> Verdict {
    let start = Instant::now();
    let cfg = SuiteConfig::default();
    let mut reports = run_suite(Suite::Alpha, &cfg);
    reports.extend(run_suite(Suite::Coherence, &cfg));
    let cases = all_pass(&reports)?;
    let count = |p: &str| reports.iter().filter(|r| r.law.starts_with(p)).count();
    let with_id = reports
        .iter()
        .filter(|r| r.law.starts_with("alpha-functoriality[id["))
        .count();
    ensure(with_id > 0, || "no α_id reports".into())?;
    ensure(count("coherence[") > 0, || "no coherence reports".into())?;
    Ok(format!(
        "{} functoriality ({with_id} with α_id), {} naturality, {} coherence reports, {cases} comparisons; {:?}",
        count("alpha-functoriality["),
        count("alpha-naturality["),
        count("coherence["),
        start.elapsed()
    ))
}

fn tw_of_r() -> Verdict {
    let cfg = SuiteConfig::default();
    let mut reports = run_suite(Suite::Composition, &cfg);
    reports.retain(|r| r.law.starts_with("tw-of-r["));
    let mut alpha = run_suite(Suite::Alpha, &cfg);
    alpha.retain(|r| r.law.starts_with("alpha-on-r["));
    let n_morphisms = morphisms(&cfg.family).len();
    ensure(reports.len() == cfg.family.len(), || format!("{} T^W(R) reports", reports.len()))?;
    ensure(alpha.len() == n_morphisms, || format!("{} α_φ(R) reports", alpha.len()))?;
    for (_, w) in &cfg.family {
        let id = SmoothMap::identity(1);
        let p = WeilPoint::new(w, vec![w.element("3").unwrap()]).unwrap();
        let out = lift_map(&id, w).apply(&p).map_err(|e| e.to_string())?;
        ensure(out.flat().len() == w.dim(), || format!("carrier of T^W(R) for {w}"))?;
    }
    reports.extend(alpha);
    all_pass(&reports)?;
    Ok(format!(
        "T^W(R) = W for {} presets, α_φ(R) = φ for {n_morphisms} morphisms",
        cfg.family.len()
    ))
}

fn embedding() -> Verdict {
    let start = Instant::now();
    let cfg = SuiteConfig::default();
    let reports = run_suite(Suite::Embedding, &cfg);
    let cases = all_pass(&reports)?;
    let want = ["R", "dual", "jet2", "jet3", "dual⊗dual"];
    ensure(cfg.probes == want, || format!("probe set {:?}", cfg.probes))?;
    for chart in ["R0", "R1", "R2", "(0,1)×(0,1)"] {
        let n = reports.iter().filter(|r| r.law.contains(&format!("[{chart},"))).count();
        ensure(n > 0, || format!("no reports for chart {chart}"))?;
    }
    Ok(format!(
        "{} reports over R0, R1, R2, (0,1)^2 with probes {want:?}, {cases} comparisons; {:?}",
        reports.len(),
        start.elapsed()
    ))
}

fn microlinearity() -> Verdict {
    let start = Instant::now();
    let d = builtin_diagram("pullback-D2").unwrap();
    let cone = compute_limit(&d).map_err(|e| e.to_string())?;
    ensure(cone.is_limit && cone.apex.dim() == 3, || format!("apex dim {}", cone.apex.dim()))?;
    let charts = [Chart::real(1), Chart::real(2), Chart::open_box(OpenBox::unit(1))];
    let reports = charts
        .iter()
        .map(|c| check_microlinear_chart(c, &d, &cone, 50, 42))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    all_pass(&reports)?;
    let took = start.elapsed();
    within(Duration::from_secs(5), took, "microlinearity")?;
    Ok(format!("pullback-D2 apex dim 3; R1, R2, (0,1) pass; {took:?}"))
}

fn vertical() -> Verdict {
    let start = Instant::now();
    let probes = family();
    let dual = alg("dual");
    let bundle = Bundle::trivial(1, 2);
    let v = vertical_weil(&bundle, &dual, &probes, 20, 42).map_err(|e| e.to_string())?;
    ensure(v.carrier_dim == 1 + 2 * dual.dim(), || format!("carrier {}", v.carrier_dim))?;
    ensure(v.nilpotent_dim == 2, || format!("nilpotent dim {}", v.nilpotent_dim))?;
    ensure(v.is_equalizer, || "not an equalizer".into())?;
    let arrows = morphisms(&probes);
    let thm = check_vertical_embedding(&bundle, &dual, &probes, &arrows, 5, 42).map_err(|e| e.to_string())?;
    all_pass(&[v.transversal.clone(), thm])?;
    Ok(format!(
        "carrier R^1 × dual^2 (dim {}), nilpotent dim 2, transversal over {} presets, embedding check pass; {:?}",
        v.carrier_dim,
        probes.len(),
        start.elapsed()
    ))
}

fn cli(session: &Path, args: &[&str]) -> (i32, String) {
    let mut argv = vec!["weil", "--session", session.to_str().unwrap()];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = weil::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned() + &String::from_utf8_lossy(&err))
}

fn failures(text: &str) -> usize {
    text.lines().filter(|l| l.starts_with("fail")).count()
}

fn mutations() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("session.json");
    let idem = dir.path().join("idem.json");
    std::fs::write(&idem, r#"{"format_version":1,"generators":1,"relations":["x0^2 - x0"]}"#).unwrap();
    let small = ["laws", "composition", "--trials", "3", "--maps", "3", "--family"];
    let with = |fault: Option<Fault>, tail: &[&str]| {
        let mut args: Vec<&str> = Vec::new();
        if let Some(f) = fault {
            args.extend(["--inject-fault", f.name()]);
        }
        args.extend(tail);
        cli(&s, &args)
    };
    let mut lines = Vec::new();

    let laws: Vec<&str> = small.iter().copied().chain(["R,dual,jet2"]).collect();
    let (code, _) = with(None, &laws);
    ensure(code == 0, || "baseline composition run failed".into())?;
    let (code, out) = with(Some(Fault::DropFactorial), &laws);
    ensure(code == 1 && failures(&out) > 0, || format!("drop-factorial: exit {code}"))?;
    lines.push(format!("drop-factorial {} failing reports", failures(&out)));

    let (code, out) = with(Some(Fault::TransposeTensorBasis), &laws);
    ensure(code == 1 && failures(&out) > 0, || format!("transpose-tensor-basis: exit {code}"))?;
    lines.push(format!("transpose-tensor-basis {}", failures(&out)));

    let define = ["algebra", "define", idem.to_str().unwrap()];
    let (code, _) = with(None, &define);
    ensure(code == 2, || "non-local presentation accepted without the fault".into())?;
    let (code, out) = with(Some(Fault::SkipLocalityCheck), &define);
    ensure(code == 0, || format!("define under skip-locality-check: {out}"))?;
    let laws: Vec<&str> = small.iter().copied().chain(["R,idem"]).collect();
    let (code, out) = with(Some(Fault::SkipLocalityCheck), &laws);
    ensure(code == 1 && failures(&out) > 0, || format!("skip-locality-check: exit {code}"))?;
    lines.push(format!("skip-locality-check {}", failures(&out)));
    Ok(lines.join(", "))
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![small_rational().prop_map(Expr::Const), (0usize..3).prop_map(Expr::Var)];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Sum),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Prod),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::quot(a, b)),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| a.pow(n)),
            (prop::sample::select(Primitive::ALL.to_vec()), inner).prop_map(|(p, a)| Expr::call(p, a)),
        ]
    })
}

fn polynomial(nvars: usize) -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::vec(0u32..3, nvars), small_rational());
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        let mut p = Polynomial::zero(nvars);
        for (e, c) in terms {
            p.add_term(Monomial(e), c);
        }
        p
    })
}

fn properties() -> Verdict {
    let config = Config {
        cases: PROPERTY_CASES,
        rng_seed: RngSeed::Fixed(42),
        failure_persistence: None,
        ..Config::default()
    };
    let fam: Vec<Arc<WeilAlgebra>> = family().into_iter().map(|(_, w)| w).collect();
    let catalog = morphisms(&family());
    let mut counts = Vec::new();

    let n = AtomicUsize::new(0);
    TestRunner::new(config.clone())
        .run(&expr(), |e| {
            n.fetch_add(1, Ordering::Relaxed);
            let printed = e.to_string();
            prop_assert_eq!(parse(&printed, 3).unwrap().to_string(), printed);
            Ok(())
        })
        .map_err(|e| format!("parser round-trip: {e}"))?;
    counts.push(("parser round-trip", n.swap(0, Ordering::Relaxed)));

    let strategy = prop::sample::select(fam).prop_flat_map(|w| {
        let n = w.n_gens();
        (Just(w), polynomial(n))
    });
    TestRunner::new(config.clone())
        .run(&strategy, |(w, p)| {
            n.fetch_add(1, Ordering::Relaxed);
            let nf = w.normal_form(&p).unwrap();
            prop_assert_eq!(w.normal_form(&w.coords_to_poly(&nf)).unwrap(), nf);
            Ok(())
        })
        .map_err(|e| format!("normal-form idempotence: {e}"))?;
    counts.push(("normal-form idempotence", n.swap(0, Ordering::Relaxed)));

    let strategy = (0..catalog.len()).prop_flat_map(|k| {
        let g = catalog[k].morphism.source().n_gens();
        (Just(k), polynomial(g), polynomial(g))
    });
    TestRunner::new(config)
        .run(&strategy, |(k, p, q)| {
            n.fetch_add(1, Ordering::Relaxed);
            let phi = &catalog[k].morphism;
            let w = phi.source();
            let (a, b) = (w.from_poly(&p).unwrap(), w.from_poly(&q).unwrap());
            let lhs = phi.apply(&a.mul(&b).unwrap()).unwrap();
            let rhs = phi.apply(&a).unwrap().mul(&phi.apply(&b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            Ok(())
        })
        .map_err(|e| format!("morphism multiplicativity: {e}"))?;
    counts.push(("morphism multiplicativity", n.swap(0, Ordering::Relaxed)));

    for (name, c) in &counts {
        ensure(*c >= PROPERTY_CASES as usize, || format!("{name}: only {c} cases"))?;
    }
    Ok(counts
        .iter()
        .map(|(name, c)| format!("{name} {c} cases"))
        .collect::<Vec<_>>()
        .join(", ")
        + " (seed 42)")
}

#[test]
fn acceptance() {
    #[allow(clippy::type_complexity)]
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("derivative correctness", derivatives),
        ("composition law", composition),
        ("α functoriality, naturality and coherence", alpha),
        ("T^W(R) = W and α_φ(R) = φ", tw_of_r),
        ("embedding theorems at probe level", embedding),
        ("microlinearity", microlinearity),
        ("vertical Weil functor", vertical),
        ("mutation sensitivity", mutations),
        ("property suites", properties),
    ];
    println!();
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        weil_core::faults::inject(None);
        match verdict {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", k + 1),
            Err(why) => {
                println!("[FAIL] {} {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
