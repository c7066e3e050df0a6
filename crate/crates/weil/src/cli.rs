//! The `weil` command line.
//!
//! Exit codes: 0 success or all checks pass, 1 some check fails, 2 the input
//! was rejected.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use weil_core::algebra::tensor;
use weil_core::faults::{self, Fault};
use weil_core::laws::{self, Chart, LawReport, Suite, SuiteConfig};
use weil_core::lift::{lift_map, WeilPoint};
use weil_core::limits::{
    builtin_diagram, check_microlinear_chart, check_microlinear_probes, check_vertical_embedding, compute_limit,
    transversal_verdicts, vertical_weil, Bundle, ChartCone, WeilDiagram, BUILTIN_DIAGRAMS,
};
use weil_core::{presets, OpenBox, Scalar, SmoothMap, WeilAlgebra};

use crate::doc::{to_pretty, write_json, AlgebraDoc, ConeDoc, DiagramDoc, MorphismDoc, ReportDoc, FORMAT_VERSION};
use crate::extract;
use crate::input::{parse_chart, parse_map, parse_names, parse_point, split_top_level};
use crate::session::{Session, DEFAULT_PATH};
use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "weil", version, about = "Weil algebras, jets and Weil functor law checks")]
pub struct Cli {
    /// Registry of user-defined algebras and morphisms.
    #[arg(long, global = true, default_value = DEFAULT_PATH)]
    session: PathBuf,
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Switch on an injected fault (builds with the `fault-injection` feature only).
    #[arg(long, global = true, hide = true)]
    inject_fault: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Define, inspect and tensor algebras.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Define and inspect morphisms.
    #[command(subcommand)]
    Morphism(MorphismCmd),
    /// Evaluate the lift of a map at a Weil point.
    Eval(EvalArgs),
    /// Run a law suite over the preset family.
    Laws(LawsArgs),
    /// Limits, microlinearity, transversality and vertical functors.
    #[command(subcommand)]
    Limits(LimitsCmd),
}

#[derive(Debug, Subcommand)]
enum AlgebraCmd {
    /// Register the presentation in FILE.
    Define {
        file: PathBuf,
        /// Registry name; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Print basis, dimension and nilpotency index.
    Show { name: String },
    /// Register `A ⊗ B` under NAME: `algebra tensor A B as NAME`.
    Tensor {
        left: String,
        right: String,
        #[arg(value_parser = ["as"])]
        r#as: String,
        name: String,
    },
    /// Write the presentation document of an algebra.
    Export {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the preset family and registered algebras.
    List,
}

#[derive(Debug, Subcommand)]
enum MorphismCmd {
    /// Register `SOURCE → TARGET` given by comma-separated generator images.
    Define {
        name: String,
        source: String,
        target: String,
        #[arg(long)]
        images: String,
    },
    /// Print generator images and matrix; `id[A]`, `aug[A]`, `unit[A]` are built in.
    Show { name: String },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Extract {
    Jet,
    Gradient,
    Hessian,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Map components in x0.., separated by `;` or commas.
    map: String,
    algebra: String,
    /// One polynomial in the generators per input, e.g. `2 + x0`.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long, value_enum)]
    extract: Option<Extract>,
    /// Evaluate in floating point even for polynomial maps.
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Args)]
struct LawsArgs {
    #[arg(value_parser = Suite::NAMES)]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Random points per map and law.
    #[arg(long)]
    trials: Option<usize>,
    /// Random polynomial maps per law.
    #[arg(long)]
    maps: Option<usize>,
    /// Comma-separated algebras to quantify over instead of the presets.
    #[arg(long)]
    family: Option<String>,
    /// Write the report document to FILE.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Comma-separated probe algebras; defaults to the preset family.
    #[arg(long)]
    probes: Option<String>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the report document to FILE.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum LimitsCmd {
    /// Compute the limit of a built-in diagram or a diagram document.
    Compute { diagram: String },
    /// Check that `T^W M` sends the diagram's limit to a limit.
    Microlinear {
        #[arg(long)]
        chart: String,
        #[arg(long)]
        diagram: String,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Check that a chart cone stays a limit under every probe functor.
    Transversal {
        /// The product cone `R^(m+n) → R^m, R^n`, written `m,n`.
        #[arg(long, conflicts_with = "cone")]
        product: Option<String>,
        /// A cone document.
        #[arg(long)]
        cone: Option<PathBuf>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// The vertical Weil functor of the trivial bundle `R^m × R^n → R^m`.
    Vertical {
        #[arg(long)]
        base: usize,
        #[arg(long)]
        fiber: usize,
        #[arg(long)]
        algebra: String,
        /// Restrict base and fiber to unit boxes.
        #[arg(long = "box")]
        boxed: bool,
        #[command(flatten)]
        check: CheckArgs,
    },
}

/// Text and document forms of a command's result, plus its exit code.
struct Outcome {
    code: i32,
    text: String,
    doc: Value,
}

impl Outcome {
    fn ok(text: String, doc: Value) -> Self {
        Outcome { code: 0, text, doc }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let json = cli.json;
    let fault = cli.inject_fault.clone();
    let result = with_fault(fault.as_deref(), || dispatch(cli));
    match result {
        Ok(o) => {
            let text = if json { to_pretty(&o.doc) + "\n" } else { o.text };
            let _ = out.write_all(text.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn with_fault<T>(name: Option<&str>, f: impl FnOnce() -> CliResult<T>) -> CliResult<T> {
    let Some(name) = name else {
        return f();
    };
    let fault: Fault = name.parse().map_err(|_| {
        let known: Vec<&str> = Fault::ALL.iter().map(|f| f.name()).collect();
        CliError::Usage(format!("unknown fault `{name}` (known: {})", known.join(", ")))
    })?;
    if !faults::inject(Some(fault)) {
        return Err(CliError::Usage("this build cannot inject faults".into()));
    }
    let r = f();
    faults::inject(None);
    r
}

fn dispatch(cli: Cli) -> CliResult<Outcome> {
    let mut session = Session::open(&cli.session)?;
    match cli.command {
        Command::Algebra(cmd) => algebra(&mut session, cmd),
        Command::Morphism(cmd) => morphism(&mut session, cmd),
        Command::Eval(args) => eval(&session, &args),
        Command::Laws(args) => run_laws(&session, &args),
        Command::Limits(cmd) => limits(&session, cmd),
    }
}

fn describe(name: &str, w: &WeilAlgebra) -> Outcome {
    let basis: Vec<String> = w.basis().iter().map(|m| m.to_string()).collect();
    let text = format!(
        "{name} = {w}\ndim {}, nilpotency index {}\nbasis [{}]\n",
        w.dim(),
        w.nilpotency_index(),
        basis.join(", ")
    );
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "name": name,
        "generators": w.n_gens(),
        "relations": w.relation_strings(),
        "dim": w.dim(),
        "nilpotency_index": w.nilpotency_index(),
        "basis": basis,
    });
    Outcome::ok(text, doc)
}

fn algebra(session: &mut Session, cmd: AlgebraCmd) -> CliResult<Outcome> {
    match cmd {
        AlgebraCmd::Define { file, name } => {
            let doc = AlgebraDoc::load(&file)?;
            let name = match name {
                Some(n) => n,
                None => file
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .ok_or_else(|| CliError::Usage("cannot derive a name; pass --name".into()))?,
            };
            let w = session.define_algebra(&name, doc)?;
            session.save()?;
            Ok(describe(&name, &w))
        }
        AlgebraCmd::Show { name } => Ok(describe(&name, &*session.algebra(&name)?)),
        AlgebraCmd::Tensor { left, right, name, .. } => {
            let t = tensor(&session.algebra(&left)?, &session.algebra(&right)?)?;
            let w = session.define_algebra(&name, AlgebraDoc::of(&t.algebra))?;
            session.save()?;
            Ok(describe(&name, &w))
        }
        AlgebraCmd::Export { name, out } => {
            let doc = AlgebraDoc::of(&*session.algebra(&name)?);
            let value = serde_json::to_value(&doc).expect("documents serialize");
            match out {
                Some(path) => {
                    write_json(&path, &doc)?;
                    Ok(Outcome::ok(format!("wrote {}\n", path.display()), value))
                }
                None => Ok(Outcome::ok(to_pretty(&doc) + "\n", value)),
            }
        }
        AlgebraCmd::List => {
            let names: Vec<&str> = session.algebra_names().collect();
            let mut text = String::new();
            for n in presets::FAMILY {
                let _ = writeln!(text, "preset   {n}");
            }
            let _ = writeln!(text, "         jetK, DnN, Wk,n and A⊗B of presets are also built in");
            for n in &names {
                let _ = writeln!(text, "defined  {n}");
            }
            Ok(Outcome::ok(
                text,
                json!({ "format_version": FORMAT_VERSION, "presets": presets::FAMILY, "algebras": names }),
            ))
        }
    }
}

fn morphism(session: &mut Session, cmd: MorphismCmd) -> CliResult<Outcome> {
    let (name, phi) = match cmd {
        MorphismCmd::Define {
            name,
            source,
            target,
            images,
        } => {
            let doc = MorphismDoc {
                format_version: FORMAT_VERSION,
                source,
                target,
                images: split_top_level(&images).into_iter().map(String::from).collect(),
            };
            let phi = session.define_morphism(&name, doc)?;
            session.save()?;
            (name, phi)
        }
        MorphismCmd::Show { name } => {
            let phi = session.morphism(&name)?;
            (name, phi)
        }
    };
    let images: Vec<String> = phi.images().iter().map(|e| e.to_string()).collect();
    let matrix: Vec<Vec<String>> = phi
        .matrix()
        .iter()
        .map(|r| r.iter().map(|q| q.to_string()).collect())
        .collect();
    let mut text = format!("{name}: {phi}\nmatrix ({} × {})\n", matrix.len(), phi.source().dim());
    for row in &matrix {
        let _ = writeln!(text, "  [{}]", row.join(", "));
    }
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "name": name,
        "images": images,
        "matrix": matrix,
    });
    Ok(Outcome::ok(text, doc))
}

fn number<S: Scalar>(x: &S) -> Value {
    match S::MODE {
        weil_core::Mode::Exact => Value::String(x.to_string()),
        weil_core::Mode::Float => json!(x.to_f64()),
    }
}

fn eval(session: &Session, args: &EvalArgs) -> CliResult<Outcome> {
    let w = session.algebra(&args.algebra)?;
    let point = parse_point(&w, &args.point)?;
    let f = parse_map(&args.map, point.arity())?;
    if args.float || f.has_primitives() {
        eval_in(&w, &f, &point.to_float(), args.extract)
    } else {
        eval_in(&w, &f, &point, args.extract)
    }
}

fn eval_in<S: Scalar>(
    w: &Arc<WeilAlgebra>,
    f: &SmoothMap,
    point: &WeilPoint<S>,
    extract: Option<Extract>,
) -> CliResult<Outcome> {
    let out = lift_map(f, w).apply(point)?;
    let mode = match S::MODE {
        weil_core::Mode::Exact => "exact",
        weil_core::Mode::Float => "float",
    };
    let coords: Vec<Vec<Value>> = out
        .components()
        .iter()
        .map(|e| e.coords().iter().map(number).collect())
        .collect();
    let basis: Vec<String> = w.basis().iter().map(|m| m.to_string()).collect();
    let mut text = format!("basis [{}] ({mode})\n", basis.join(", "));
    for (j, e) in out.components().iter().enumerate() {
        let cs: Vec<String> = e.coords().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(text, "f{j} = [{}]  = {e}", cs.join(", "));
    }
    let mut doc = json!({
        "format_version": FORMAT_VERSION,
        "mode": mode,
        "basis": basis,
        "outputs": coords,
    });
    let arity = point.arity();
    match extract {
        None => {}
        Some(Extract::Jet) => {
            let jet = extract::jet(&out);
            let mut rows = Vec::new();
            for (j, terms) in jet.iter().enumerate() {
                let mut comp = Vec::new();
                for t in terms {
                    let _ = writeln!(text, "∂^[{}] f{j} = {}", t.monomial, t.derivative);
                    comp.push(json!({
                        "monomial": t.monomial.to_string(),
                        "coefficient": number(&t.coefficient),
                        "derivative": number(&t.derivative),
                    }));
                }
                rows.push(Value::Array(comp));
            }
            doc["jet"] = Value::Array(rows);
        }
        Some(Extract::Gradient) => {
            let g = extract::gradient(&out, arity)?;
            for (j, row) in g.iter().enumerate() {
                let cs: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                let _ = writeln!(text, "∇f{j} = [{}]", cs.join(", "));
            }
            doc["gradient"] = json!(g.iter().map(|r| r.iter().map(number).collect::<Vec<_>>()).collect::<Vec<_>>());
        }
        Some(Extract::Hessian) => {
            let h = extract::hessian(&out, arity)?;
            let show = |c: &Option<S>| c.as_ref().map_or("-".to_string(), |c| c.to_string());
            let value = |c: &Option<S>| c.as_ref().map_or(Value::Null, number);
            for (j, m) in h.iter().enumerate() {
                let _ = writeln!(text, "H f{j} =");
                for row in m {
                    let cs: Vec<String> = row.iter().map(show).collect();
                    let _ = writeln!(text, "  [{}]", cs.join(", "));
                }
            }
            doc["hessian"] = json!(h
                .iter()
                .map(|m| m.iter().map(|r| r.iter().map(value).collect::<Vec<_>>()).collect::<Vec<_>>())
                .collect::<Vec<_>>());
        }
    }
    Ok(Outcome::ok(text, doc))
}

fn resolve_all(session: &Session, names: &[String]) -> CliResult<Vec<(String, Arc<WeilAlgebra>)>> {
    names.iter().map(|n| Ok((n.clone(), session.algebra(n)?))).collect()
}

fn probes(session: &Session, spec: Option<&str>) -> CliResult<Vec<(String, Arc<WeilAlgebra>)>> {
    match spec {
        Some(s) => resolve_all(session, &parse_names(s)),
        None => Ok(presets::family()),
    }
}

fn report_outcome(reports: &[LawReport], header: String, path: Option<&Path>) -> CliResult<Outcome> {
    let doc = ReportDoc::new(reports);
    if let Some(p) = path {
        write_json(p, &doc)?;
    }
    let mut text = header;
    for r in reports {
        let _ = writeln!(text, "{:4}  {}  ({} cases)", r.status.as_str(), r.law, r.cases);
        if let Some(c) = &r.counterexample {
            for (k, v) in &c.inputs {
                let _ = writeln!(text, "      {k} = {v}");
            }
            let _ = writeln!(text, "      lhs {}\n      rhs {}", c.lhs, c.rhs);
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let n = reports.len();
    let _ = writeln!(text, "{n} check{}, {failed} failed", if n == 1 { "" } else { "s" });
    Ok(Outcome {
        code: if failed == 0 { 0 } else { 1 },
        text,
        doc: serde_json::to_value(&doc).expect("documents serialize"),
    })
}

fn run_laws(session: &Session, args: &LawsArgs) -> CliResult<Outcome> {
    let suite = Suite::from_name(&args.suite).expect("clap restricts suite names");
    let mut cfg = SuiteConfig {
        seed: args.seed,
        ..SuiteConfig::default()
    };
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(m) = args.maps {
        cfg.maps = m;
    }
    if let Some(f) = &args.family {
        cfg.family = resolve_all(session, &parse_names(f))?;
    }
    let reports = laws::run_suite(suite, &cfg);
    report_outcome(&reports, String::new(), args.report.as_deref())
}

fn diagram(session: &Session, spec: &str) -> CliResult<WeilDiagram> {
    if let Some(d) = builtin_diagram(spec) {
        return Ok(d);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "`{spec}` is neither a built-in diagram ({}) nor a file",
            BUILTIN_DIAGRAMS.join(", ")
        )));
    }
    DiagramDoc::load(path)?.build(|n| session.algebra(n))
}

fn limits(session: &Session, cmd: LimitsCmd) -> CliResult<Outcome> {
    match cmd {
        LimitsCmd::Compute { diagram: spec } => {
            let d = diagram(session, &spec)?;
            let cone = compute_limit(&d)?;
            let basis: Vec<String> = cone.apex.basis().iter().map(|m| m.to_string()).collect();
            let mut text = format!(
                "apex {}\ndim {}, basis [{}]\ncompatible tuples: dimension {}\n",
                cone.apex,
                cone.apex.dim(),
                basis.join(", "),
                cone.compatible_dim
            );
            let legs: Vec<Vec<String>> = cone
                .legs
                .iter()
                .map(|l| l.images().iter().map(|e| e.to_string()).collect())
                .collect();
            for (i, l) in legs.iter().enumerate() {
                let _ = writeln!(text, "leg {i}: [{}]", l.join(", "));
            }
            let verdict = if cone.is_limit { "limit" } else { "not a limit" };
            let _ = writeln!(text, "verdict: {verdict}");
            if let Some(w) = &cone.witness {
                let _ = writeln!(text, "witness: {w}");
            }
            let doc = json!({
                "format_version": FORMAT_VERSION,
                "apex": AlgebraDoc::of(&cone.apex),
                "dim": cone.apex.dim(),
                "basis": basis,
                "legs": legs,
                "compatible_dim": cone.compatible_dim,
                "is_limit": cone.is_limit,
                "witness": cone.witness,
            });
            Ok(Outcome {
                code: if cone.is_limit { 0 } else { 1 },
                text,
                doc,
            })
        }
        LimitsCmd::Microlinear {
            chart,
            diagram: spec,
            check,
        } => {
            let c = parse_chart(&chart)?;
            let d = diagram(session, &spec)?;
            let cone = compute_limit(&d)?;
            let mut reports = vec![check_microlinear_chart(&c, &d, &cone, check.trials, check.seed)?];
            if check.probes.is_some() {
                let ps = probes(session, check.probes.as_deref())?;
                reports.push(check_microlinear_probes(&c, &d, &cone, &ps, check.trials, check.seed)?);
            }
            let header = format!("limit apex {} (dim {}) on chart {c}\n", cone.apex, cone.apex.dim());
            report_outcome(&reports, header, check.report.as_deref())
        }
        LimitsCmd::Transversal { product, cone, check } => {
            let cone = match (product, cone) {
                (Some(p), None) => {
                    let parts = split_top_level(&p);
                    let dims: Vec<usize> = parts.iter().filter_map(|s| s.parse().ok()).collect();
                    let [m, n] = dims[..] else {
                        return Err(CliError::Usage(format!("--product expects `m,n`, got `{p}`")));
                    };
                    ChartCone::product(m, n)
                }
                (None, Some(path)) => chart_cone(&ConeDoc::load(&path)?)?,
                _ => return Err(CliError::Usage("pass --product m,n or --cone FILE".into())),
            };
            let ps = probes(session, check.probes.as_deref())?;
            let reports = transversal_verdicts(&cone, &ps, check.trials, check.seed);
            let header = format!("cone with apex {} over {} nodes\n", cone.apex, cone.nodes.len());
            report_outcome(&reports, header, check.report.as_deref())
        }
        LimitsCmd::Vertical {
            base,
            fiber,
            algebra,
            boxed,
            check,
        } => {
            let w = session.algebra(&algebra)?;
            let bundle = if boxed {
                let unit = |n| if n == 0 { Chart::real(0) } else { Chart::open_box(OpenBox::unit(n)) };
                Bundle {
                    base: unit(base),
                    fiber: unit(fiber),
                }
            } else {
                Bundle::trivial(base, fiber)
            };
            let ps = probes(session, check.probes.as_deref())?;
            let arrows = presets::morphisms(&ps);
            let v = vertical_weil(&bundle, &w, &ps, check.trials, check.seed)?;
            let embedding = check_vertical_embedding(&bundle, &w, &ps, &arrows, check.trials, check.seed)?;
            let mut header = format!(
                "carrier R^{base} × {algebra}^{fiber}: dimension {}, nilpotent dimension {} over each base point\n",
                v.carrier_dim, v.nilpotent_dim
            );
            let _ = writeln!(header, "equalizer: {}", if v.is_equalizer { "yes" } else { "no" });
            let mut o = report_outcome(&[v.transversal.clone(), embedding], header, check.report.as_deref())?;
            if !v.is_equalizer {
                o.code = 1;
            }
            o.doc["carrier_dim"] = json!(v.carrier_dim);
            o.doc["nilpotent_dim"] = json!(v.nilpotent_dim);
            o.doc["is_equalizer"] = json!(v.is_equalizer);
            Ok(o)
        }
    }
}

fn chart_cone(doc: &ConeDoc) -> CliResult<ChartCone> {
    let apex = parse_chart(&doc.apex)?;
    let nodes = doc.nodes.iter().map(|s| parse_chart(s)).collect::<CliResult<Vec<_>>>()?;
    let legs = doc
        .legs
        .iter()
        .map(|l| {
            let parts: Vec<&str> = l.iter().map(String::as_str).collect();
            Ok(SmoothMap::parse(apex.dim(), &parts)?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (k, e) in doc.edges.iter().enumerate() {
        let source = nodes
            .get(e.source)
            .ok_or(weil_core::Error::EdgeMismatch { edge: k })?;
        let parts: Vec<&str> = e.map.iter().map(String::as_str).collect();
        edges.push((e.source, e.target, SmoothMap::parse(source.dim(), &parts)?));
    }
    Ok(ChartCone::new(apex, nodes, legs, edges)?)
}
